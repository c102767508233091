#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gridvest/milp/model.hpp"

namespace gridvest::milp {

struct Violation {
  std::string what;
  double amount = 0.0;
};

/// Re-checks a point against the model from scratch (bounds, integrality and
/// every row), independently of any solver residuals. Tolerances scale with
/// max(1, |bound|) / max(1, |rhs|).
inline std::vector<Violation> check_solution(const Model& model, const std::vector<double>& values,
                                              double feas_tol, double int_tol, bool check_integrality = true) {
  std::vector<Violation> out;
  if (static_cast<int>(values.size()) != model.num_vars()) {
    out.push_back({"value vector has wrong length", 0.0});
    return out;
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.variables()[j];
    const double x = values[j];
    const auto label = v.name.empty() ? "x" + std::to_string(j) : v.name;
    if (!std::isfinite(x)) {
      out.push_back({label + " is not finite", kInf});
      continue;
    }
    if (x < v.lower - feas_tol * std::max(1.0, std::abs(v.lower)))
      out.push_back({label + " below lower bound", v.lower - x});
    if (x > v.upper + feas_tol * std::max(1.0, std::abs(v.upper)))
      out.push_back({label + " above upper bound", x - v.upper});
    if (check_integrality && v.kind == VarKind::kBinary && std::abs(x - std::round(x)) > int_tol)
      out.push_back({label + " is fractional", std::abs(x - std::round(x))});
  }
  const auto& rows = model.constraints();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double act = 0.0;
    for (const auto& t : r.terms) act += t.coef * values[t.var.index];
    const double tol = feas_tol * std::max(1.0, std::abs(r.rhs));
    double viol = 0.0;
    if (r.relation != Relation::kGreaterEqual && act > r.rhs + tol) viol = act - r.rhs;
    if (r.relation != Relation::kLessEqual && act < r.rhs - tol) viol = r.rhs - act;
    if (viol > 0.0) out.push_back({(r.name.empty() ? "row " + std::to_string(i) : r.name) + " violated", viol});
  }
  return out;
}

inline bool is_feasible(const Model& model, const std::vector<double>& values, double feas_tol, double int_tol) {
  return check_solution(model, values, feas_tol, int_tol).empty();
}

}  // namespace gridvest::milp
