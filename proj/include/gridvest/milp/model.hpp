#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridvest::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind : std::uint8_t { kContinuous, kBinary };
enum class Relation : std::uint8_t { kLessEqual, kEqual, kGreaterEqual };

/// Opaque handle to a model variable.
struct VarId {
  int index = -1;
  friend auto operator<=>(const VarId&, const VarId&) = default;
};

struct Variable {
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::kContinuous;
  std::string name;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct LinearConstraint {
  std::vector<Term> terms;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

/// A minimisation MILP over continuous and binary variables.
class Model {
public:
  explicit Model(std::string name = "model") : name_(std::move(name)) {}

  VarId add_variable(double lower, double upper, VarKind kind = VarKind::kContinuous, std::string name = {}) {
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
      throw std::invalid_argument("variable '" + name + "' has invalid bounds");
    if (kind == VarKind::kBinary) {
      lower = std::max(lower, 0.0);
      upper = std::min(upper, 1.0);
      if (lower > upper) throw std::invalid_argument("binary variable '" + name + "' has empty domain");
    }
    vars_.push_back({lower, upper, kind, std::move(name)});
    objective_.push_back(0.0);
    return VarId{static_cast<int>(vars_.size()) - 1};
  }

  VarId add_continuous(double lower, double upper, std::string name = {}) {
    return add_variable(lower, upper, VarKind::kContinuous, std::move(name));
  }
  VarId add_binary(std::string name = {}) { return add_variable(0.0, 1.0, VarKind::kBinary, std::move(name)); }

  /// Adds a row; terms must reference declared variables, at most once each.
  int add_constraint(std::vector<Term> terms, Relation relation, double rhs, std::string name = {}) {
    if (!std::isfinite(rhs)) throw std::invalid_argument("constraint '" + name + "' has non-finite rhs");
    for (const auto& t : terms) {
      if (t.var.index < 0 || t.var.index >= num_vars())
        throw std::invalid_argument("constraint '" + name + "' references an undeclared variable");
      if (!std::isfinite(t.coef)) throw std::invalid_argument("constraint '" + name + "' has a non-finite coefficient");
    }
    auto sorted = terms;
    std::sort(sorted.begin(), sorted.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    for (std::size_t k = 1; k < sorted.size(); ++k)
      if (sorted[k].var == sorted[k - 1].var)
        throw std::invalid_argument("constraint '" + name + "' repeats variable " +
                                    std::to_string(sorted[k].var.index));
    rows_.push_back({std::move(terms), relation, rhs, std::move(name)});
    return static_cast<int>(rows_.size()) - 1;
  }

  void set_objective(VarId v, double coef) {
    if (!std::isfinite(coef)) throw std::invalid_argument("non-finite objective coefficient");
    objective_.at(static_cast<std::size_t>(v.index)) = coef;
  }
  void set_objective_offset(double offset) { offset_ = offset; }

  void set_bounds(VarId v, double lower, double upper) {
    auto& var = vars_.at(static_cast<std::size_t>(v.index));
    if (lower > upper) throw std::invalid_argument("invalid bounds for '" + var.name + "'");
    var.lower = lower;
    var.upper = upper;
  }

  const std::string& name() const { return name_; }
  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const Variable& variable(VarId v) const { return vars_.at(static_cast<std::size_t>(v.index)); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<LinearConstraint>& constraints() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_offset() const { return offset_; }

  int num_binaries() const {
    return static_cast<int>(std::count_if(vars_.begin(), vars_.end(),
                                          [](const Variable& v) { return v.kind == VarKind::kBinary; }));
  }

  double evaluate_objective(const std::vector<double>& values) const {
    double obj = offset_;
    for (std::size_t j = 0; j < objective_.size(); ++j) obj += objective_[j] * values[j];
    return obj;
  }

private:
  std::string name_;
  std::vector<Variable> vars_;
  std::vector<LinearConstraint> rows_;
  std::vector<double> objective_;
  double offset_ = 0.0;
};

enum class SolveStatus : std::uint8_t { kOptimal, kInfeasible, kUnbounded, kGapLimit, kNumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kGapLimit: return "gap_limit";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

enum class VarStatus : std::int8_t { kBasic, kAtLower, kAtUpper, kAtZero };

/// Simplex basis over structural columns followed by one logical per row.
struct Basis {
  std::vector<VarStatus> status;
  bool empty() const { return status.empty(); }
};

struct SolverOptions {
  double feas_tol = 1e-7;
  double int_tol = 1e-6;
  double rel_gap = 1e-6;
  long node_limit = 100000;
  double time_limit_s = 600.0;
  long iteration_limit = 0;  // 0 selects a size-based default
  bool scaling = true;
  int refactor_interval = 100;
};

struct Solution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::vector<double> values;
  double objective = kInf;
  double bound = -kInf;
  double mip_gap = kInf;
  bool has_incumbent = false;
  long nodes = 0;
  long iterations = 0;
  std::string diagnostics;
  Basis basis;

  bool optimal() const { return status == SolveStatus::kOptimal; }
  double value(VarId v) const { return values.at(static_cast<std::size_t>(v.index)); }
};

}  // namespace gridvest::milp
