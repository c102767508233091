#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include "gridvest/csv.hpp"
#include "gridvest/milp/model.hpp"

namespace gridvest::milp {

namespace detail {

inline std::string lp_name(const std::string& name, const char* prefix, int index) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') ? c : '_';
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out = prefix + std::to_string(index);
  return out + "#" + std::to_string(index);
}

inline void write_terms(std::ostream& os, const std::vector<Term>& terms, const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    os << (t.coef < 0 ? " - " : (first ? " " : " + ")) << csv::format_double(std::abs(t.coef)) << ' '
       << names[t.var.index];
    first = false;
  }
  if (first && !names.empty()) os << " 0 " << names.front();
}

}  // namespace detail

/// Writes the model in CPLEX LP text format for cross-checking with external solvers.
inline void write_lp(const Model& model, std::ostream& os) {
  std::vector<std::string> names;
  for (int j = 0; j < model.num_vars(); ++j) names.push_back(detail::lp_name(model.variables()[j].name, "x", j));

  std::vector<Term> obj;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.objective()[j] != 0.0) obj.push_back({VarId{j}, model.objective()[j]});
  os << "\\ " << model.name() << "\nMinimize\n obj:";
  detail::write_terms(os, obj, names);
  if (model.objective_offset() != 0.0) os << " + " << csv::format_double(model.objective_offset()) << " constant";
  os << "\nSubject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const auto& r = model.constraints()[i];
    os << ' ' << detail::lp_name(r.name, "c", i) << ':';
    detail::write_terms(os, r.terms, names);
    os << (r.relation == Relation::kLessEqual ? " <= " : r.relation == Relation::kEqual ? " = " : " >= ")
       << csv::format_double(r.rhs) << '\n';
  }
  os << "Bounds\n";
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.variables()[j];
    if (v.kind == VarKind::kBinary) continue;
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      os << ' ' << names[j] << " free\n";
      continue;
    }
    os << ' ' << (std::isinf(v.lower) ? "-inf" : csv::format_double(v.lower)) << " <= " << names[j] << " <= "
       << (std::isinf(v.upper) ? "+inf" : csv::format_double(v.upper)) << '\n';
  }
  if (model.num_binaries() > 0) {
    os << "Binaries\n";
    for (int j = 0; j < model.num_vars(); ++j)
      if (model.variables()[j].kind == VarKind::kBinary) os << ' ' << names[j] << '\n';
  }
  os << "End\n";
}

inline void write_lp(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_lp(model, out);
}

}  // namespace gridvest::milp
