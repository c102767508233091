#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "gridvest/milp/model.hpp"
#include "gridvest/milp/simplex.hpp"
#include "gridvest/milp/verify.hpp"

namespace gridvest::milp {

namespace detail {

/// Rounds fractional binaries one at a time in a direction that keeps every
/// row satisfied at the current values ("simple rounding"). Continuous values
/// are left untouched.
class SimpleRounding {
public:
  explicit SimpleRounding(const Model& model) : model_(model), col_rows_(model.num_vars()) {
    const auto& rows = model.constraints();
    for (int i = 0; i < static_cast<int>(rows.size()); ++i)
      for (const auto& t : rows[i].terms) col_rows_[t.var.index].push_back({i, t.coef});
  }

  std::optional<std::vector<double>> round(std::vector<double> values, double feas_tol) const {
    const auto& rows = model_.constraints();
    std::vector<double> act(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (const auto& t : rows[i].terms) act[i] += t.coef * values[t.var.index];

    for (int j = 0; j < model_.num_vars(); ++j) {
      const auto& var = model_.variables()[j];
      if (var.kind != VarKind::kBinary) continue;
      const double v = values[j];
      const double nearest = std::round(v);
      bool done = false;
      for (double cand : {nearest, 1.0 - nearest}) {
        if (cand < var.lower || cand > var.upper) continue;
        const double delta = cand - v;
        bool ok = true;
        for (const auto& [i, a] : col_rows_[j]) {
          const auto& r = rows[i];
          const double next = act[i] + a * delta;
          const double tol = feas_tol * std::max(1.0, std::abs(r.rhs));
          if ((r.relation != Relation::kGreaterEqual && next > r.rhs + tol) ||
              (r.relation != Relation::kLessEqual && next < r.rhs - tol)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        for (const auto& [i, a] : col_rows_[j]) act[i] += a * delta;
        values[j] = cand;
        done = true;
        break;
      }
      if (!done) return std::nullopt;
    }
    return values;
  }

  /// Sets every binary to the value that adds the least row violation given
  /// the current activities, updating activities as it goes. Never fails.
  std::vector<double> round_least_violation(std::vector<double> values) const {
    const auto& rows = model_.constraints();
    std::vector<double> act(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (const auto& t : rows[i].terms) act[i] += t.coef * values[t.var.index];
    auto excess = [&](int i, double a) {
      const auto& r = rows[i];
      if (r.relation != Relation::kGreaterEqual && a > r.rhs) return a - r.rhs;
      if (r.relation != Relation::kLessEqual && a < r.rhs) return r.rhs - a;
      return 0.0;
    };
    for (int j = 0; j < model_.num_vars(); ++j) {
      const auto& var = model_.variables()[j];
      if (var.kind != VarKind::kBinary) continue;
      const double v = values[j];
      double best = kInf, choice = std::round(v);
      for (double cand : {std::round(v), 1.0 - std::round(v)}) {
        if (cand < var.lower || cand > var.upper) continue;
        double worse = 0.0;
        for (const auto& [i, a] : col_rows_[j]) worse += excess(i, act[i] + a * (cand - v)) - excess(i, act[i]);
        if (worse < best) {
          best = worse;
          choice = cand;
        }
      }
      for (const auto& [i, a] : col_rows_[j]) act[i] += a * (choice - v);
      values[j] = choice;
    }
    return values;
  }

private:
  const Model& model_;
  std::vector<std::vector<std::pair<int, double>>> col_rows_;
};

}  // namespace detail

/// LP-based branch and bound over binary variables.
///
/// Nodes are explored best-bound first (ties: deeper first, then creation
/// order). Until the first incumbent exists the search dives depth-first,
/// following the child on the side the LP value rounds to. The root also tries
/// fixing every binary at a rounded value and re-solving the continuous part.
/// Branching picks the most fractional binary, lowest index on ties. Children
/// inherit the parent's optimal basis.
inline Solution solve_milp(const Model& model, const SolverOptions& options = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const int n = model.num_vars();

  std::vector<int> binaries;
  for (int j = 0; j < n; ++j)
    if (model.variables()[j].kind == VarKind::kBinary) binaries.push_back(j);

  LpEngine engine(model, options);
  if (binaries.empty()) {
    auto sol = engine.solve();
    sol.nodes = 1;
    return sol;
  }

  struct Node {
    std::vector<double> lower, upper;
    double bound = -kInf;
    std::shared_ptr<const Basis> basis;
    int depth = 0;
  };

  Solution best;
  best.status = SolveStatus::kInfeasible;
  double incumbent = kInf;
  std::vector<double> incumbent_values;
  long iterations = 0, nodes = 0;
  bool limit_hit = false, numerical_trouble = false;
  double failed_bound = kInf;  // parent bounds of nodes whose LP could not be solved
  std::string diagnostics;

  detail::SimpleRounding rounding(model);
  auto gap_abs = [&](double inc) { return options.rel_gap * std::max(1.0, std::abs(inc)); };

  auto offer = [&](std::vector<double> values) {
    for (int j : binaries) values[j] = std::round(values[j]);
    if (!check_solution(model, values, options.feas_tol, options.int_tol).empty()) return false;
    const double obj = model.evaluate_objective(values);
    if (obj < incumbent) {
      incumbent = obj;
      incumbent_values = std::move(values);
    }
    return true;
  };

  // Fixes every binary at a least-violation rounding and re-solves the continuous part.
  auto polish = [&](const Node& node, const std::vector<double>& values, const Basis& basis) {
    auto lo = node.lower, hi = node.upper;
    const auto fixed = rounding.round_least_violation(values);
    for (int j : binaries) lo[j] = hi[j] = fixed[j];
    auto sol = engine.solve(lo, hi, &basis);
    iterations += sol.iterations;
    if (sol.status == SolveStatus::kOptimal) offer(sol.values);
  };

  std::multimap<std::tuple<double, int, long>, Node> open;
  long sequence = 0;
  std::optional<Node> dive;

  Node root;
  root.lower.resize(n);
  root.upper.resize(n);
  for (int j = 0; j < n; ++j) {
    root.lower[j] = model.variables()[j].lower;
    root.upper[j] = model.variables()[j].upper;
  }
  dive = std::move(root);

  while (true) {
    Node node;
    if (dive) {
      node = std::move(*dive);
      dive.reset();
    } else {
      if (open.empty()) break;
      auto it = open.begin();
      if (it->second.bound >= incumbent - gap_abs(incumbent)) {
        open.clear();
        break;
      }
      node = std::move(it->second);
      open.erase(it);
    }
    if (node.bound >= incumbent - gap_abs(incumbent)) continue;

    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (nodes >= options.node_limit || elapsed > options.time_limit_s) {
      limit_hit = true;
      open.emplace(std::make_tuple(node.bound, -node.depth, sequence++), std::move(node));
      break;
    }
    ++nodes;

    auto lp = engine.solve(node.lower, node.upper, node.basis.get());
    iterations += lp.iterations;
    if (lp.status == SolveStatus::kInfeasible) continue;
    if (lp.status == SolveStatus::kUnbounded) {
      if (nodes == 1) {
        best.status = SolveStatus::kUnbounded;
        best.diagnostics = "LP relaxation is unbounded";
        best.nodes = nodes;
        best.iterations = iterations;
        return best;
      }
      continue;
    }
    if (lp.status != SolveStatus::kOptimal) {
      numerical_trouble = true;
      failed_bound = std::min(failed_bound, node.bound);
      diagnostics = lp.diagnostics;
      if (nodes == 1) {
        best.status = SolveStatus::kNumericalFailure;
        best.diagnostics = "root relaxation: " + lp.diagnostics;
        best.nodes = nodes;
        best.iterations = iterations;
        return best;
      }
      continue;
    }
    if (lp.objective >= incumbent - gap_abs(incumbent)) continue;

    int branch_var = -1;
    double most = 0.0;
    for (int j : binaries) {
      const double frac = std::abs(lp.values[j] - std::round(lp.values[j]));
      if (frac <= options.int_tol) continue;
      const double score = 0.5 - std::abs(lp.values[j] - std::floor(lp.values[j]) - 0.5);
      if (score > most) {  // strict: the lowest index wins ties
        most = score;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      if (!offer(lp.values)) polish(node, lp.values, lp.basis);
      continue;
    }
    if (auto rounded = rounding.round(lp.values, options.feas_tol)) {
      if (!offer(*rounded)) polish(node, *rounded, lp.basis);
    } else if (nodes == 1) {
      polish(node, lp.values, lp.basis);
    }
    if (lp.objective >= incumbent - gap_abs(incumbent)) continue;

    auto shared_basis = std::make_shared<const Basis>(std::move(lp.basis));
    Node down, up;
    down.lower = node.lower;
    down.upper = node.upper;
    down.upper[branch_var] = 0.0;
    up.lower = std::move(node.lower);
    up.upper = std::move(node.upper);
    up.lower[branch_var] = 1.0;
    for (Node* child : {&down, &up}) {
      child->bound = lp.objective;
      child->basis = shared_basis;
      child->depth = node.depth + 1;
    }
    if (!std::isfinite(incumbent)) {
      const bool go_up = lp.values[branch_var] >= 0.5;
      dive = std::move(go_up ? up : down);
      Node& other = go_up ? down : up;
      open.emplace(std::make_tuple(other.bound, -other.depth, sequence++), std::move(other));
    } else {
      open.emplace(std::make_tuple(down.bound, -down.depth, sequence++), std::move(down));
      open.emplace(std::make_tuple(up.bound, -up.depth, sequence++), std::move(up));
    }
  }

  best.nodes = nodes;
  best.iterations = iterations;
  double bound = open.empty() ? incumbent : std::min(std::get<0>(open.begin()->first), incumbent);
  bound = std::min(bound, failed_bound);
  if (std::isfinite(incumbent)) {
    best.values = std::move(incumbent_values);
    best.objective = incumbent;
    best.has_incumbent = true;
    best.bound = std::min(bound, incumbent);
    best.mip_gap = (incumbent - best.bound) / std::max(1.0, std::abs(incumbent));
    const bool closed = incumbent - best.bound <= gap_abs(incumbent);
    best.status = closed ? SolveStatus::kOptimal : SolveStatus::kGapLimit;
  } else if (limit_hit) {
    best.status = SolveStatus::kGapLimit;
    best.bound = bound;
    best.diagnostics = "node or time limit reached without an incumbent";
  } else if (numerical_trouble) {
    best.status = SolveStatus::kNumericalFailure;
    best.diagnostics = "no incumbent; some nodes failed: " + diagnostics;
  } else {
    best.status = SolveStatus::kInfeasible;
  }
  if (limit_hit && best.status == SolveStatus::kGapLimit && best.diagnostics.empty())
    best.diagnostics = "node or time limit reached";
  return best;
}

}  // namespace gridvest::milp
