#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gridvest/error.hpp"
#include "gridvest/planner.hpp"

namespace gridvest::igdt {

enum class Direction { kWorst, kBest };
enum class Mode { kRobust, kOpportunity, kBoth };
enum class Coupling { kIndependent, kJoint };
enum class Param { kPv, kEv, kJoint };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kRobust: return "robust";
    case Mode::kOpportunity: return "opportunity";
    case Mode::kBoth: return "both";
  }
  return "?";
}
inline const char* to_string(Coupling c) { return c == Coupling::kJoint ? "joint" : "independent"; }
inline const char* to_string(Param p) {
  switch (p) {
    case Param::kPv: return "pv";
    case Param::kEv: return "ev";
    case Param::kJoint: return "joint";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "robust" || s == "robustness") return Mode::kRobust;
  if (s == "opportunity") return Mode::kOpportunity;
  if (s == "both") return Mode::kBoth;
  throw InputError("unknown igdt mode '" + s + "' (robust | opportunity | both)");
}
inline Coupling parse_coupling(const std::string& s) {
  if (s == "independent") return Coupling::kIndependent;
  if (s == "joint") return Coupling::kJoint;
  throw InputError("unknown igdt coupling '" + s + "' (independent | joint)");
}
inline Param parse_param(const std::string& s) {
  if (s == "pv") return Param::kPv;
  if (s == "ev") return Param::kEv;
  if (s == "joint") return Param::kJoint;
  throw InputError("unknown igdt parameter '" + s + "' (pv | ev | joint)");
}

struct DeviationGrid {
  std::vector<double> betas;
  Mode mode = Mode::kBoth;
  Coupling coupling = Coupling::kIndependent;

  /// A lone 0 is accepted as the degenerate anchor grid.
  void validate() const {
    if (betas.empty()) throw InputError("igdt.betas must not be empty");
    if (betas.size() == 1 && betas[0] == 0.0) return;
    for (std::size_t i = 0; i < betas.size(); ++i) {
      if (!(betas[i] > 0.0 && betas[i] <= 1.0)) throw InputError("igdt.betas must lie in (0, 1]");
      if (i > 0 && !(betas[i] > betas[i - 1])) throw InputError("igdt.betas must be strictly increasing");
    }
  }
};

struct IgdtOptions {
  double alpha_tol = 1e-3;
  int max_iterations = 30;
  milp::SolverOptions solver;
};

struct RadiusResult {
  double beta = 0.0;
  Param param = Param::kEv;
  Mode mode = Mode::kRobust;
  Coupling coupling = Coupling::kIndependent;
  double alpha = 0.0;  // radius along `param`
  double alpha_pv = 0.0, alpha_ev = 0.0;
  double achieved_cost = 0.0;  // scaled objective at the reported radius
  int iterations = 0;          // planner solves used
  bool saturated = false;      // robust: even alpha = 1 stays within budget
  bool unattainable = false;   // opportunity: alpha = 1 cannot reach the target
  std::string error;

  std::string flags() const {
    std::string f;
    auto add = [&](const std::string& s) { f += (f.empty() ? "" : "|") + s; };
    if (saturated) add("saturated");
    if (unattainable) add("unattainable");
    if (!error.empty()) add("failed");
    return f;
  }
};

struct IgdtCurve {
  double objective = 0.0;  // deterministic anchor
  DeviationGrid grid;
  std::vector<RadiusResult> results;
};

struct ScaledResult {
  milp::SolveStatus status = milp::SolveStatus::kNumericalFailure;
  double objective = 0.0;
  std::string diagnostics;
  bool ok() const { return status == milp::SolveStatus::kOptimal || status == milp::SolveStatus::kGapLimit; }
};

/// Scales PV by (1 -/+ alpha_pv) and EV demand by (1 +/- alpha_ev) (worst /
/// best) and re-optimizes the whole plan.
inline ScaledResult evaluate_scaled(const PlanningProblem& problem, double alpha_pv, double alpha_ev, Direction dir,
                                    const milp::SolverOptions& options = {}) {
  if (!(alpha_pv >= 0.0 && alpha_pv <= 1.0) || !(alpha_ev >= 0.0 && alpha_ev <= 1.0))
    throw InputError("uncertainty radius must lie in [0, 1]");
  PlanningProblem p = problem;
  const double sign = dir == Direction::kWorst ? 1.0 : -1.0;
  p.pv_scale = problem.pv_scale * (1.0 - sign * alpha_pv);
  p.ev_scale = problem.ev_scale * (1.0 + sign * alpha_ev);
  const auto plan = solve_plan(p, options);
  ScaledResult r;
  r.status = plan.status;
  r.diagnostics = plan.diagnostics;
  if (plan.ok()) r.objective = plan.objective;
  return r;
}

namespace detail {

inline std::pair<double, double> split_alpha(Param param, double alpha) {
  switch (param) {
    case Param::kPv: return {alpha, 0.0};
    case Param::kEv: return {0.0, alpha};
    case Param::kJoint: return {alpha, alpha};
  }
  return {0.0, 0.0};
}

// Budget / target test. A scaled instance that cannot be solved counts as
// failing it.
inline bool meets(const ScaledResult& r, double threshold) {
  return r.ok() && r.objective <= threshold + 1e-9 * std::max(1.0, std::abs(threshold));
}

inline RadiusResult radius(const PlanningProblem& problem, double objective, double beta, Param param, Mode mode,
                           const IgdtOptions& opt) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InputError("beta must lie in [0, 1]");
  RadiusResult res;
  res.beta = beta;
  res.param = param;
  res.mode = mode;
  res.coupling = param == Param::kJoint ? Coupling::kJoint : Coupling::kIndependent;
  const bool robust = mode == Mode::kRobust;
  const auto dir = robust ? Direction::kWorst : Direction::kBest;
  const double threshold = robust ? (1.0 + beta) * objective : (1.0 - beta) * objective;
  auto eval = [&](double a) {
    ++res.iterations;
    const auto [apv, aev] = split_alpha(param, a);
    return evaluate_scaled(problem, apv, aev, dir, opt.solver);
  };
  auto finish = [&](double a, const ScaledResult& r) {
    res.alpha = a;
    std::tie(res.alpha_pv, res.alpha_ev) = split_alpha(param, a);
    res.achieved_cost = r.ok() ? r.objective : 0.0;
    return res;
  };

  if (beta == 0.0) {  // the budget / target is the deterministic optimum itself
    ScaledResult anchor;
    anchor.status = milp::SolveStatus::kOptimal;
    anchor.objective = objective;
    return finish(0.0, anchor);
  }

  auto at_one = eval(1.0);
  if (robust) {
    if (meets(at_one, threshold)) {
      res.saturated = true;
      return finish(1.0, at_one);
    }
    double lo = 0.0, hi = 1.0;
    ScaledResult lo_result;
    lo_result.status = milp::SolveStatus::kOptimal;
    lo_result.objective = objective;
    for (int k = 0; hi - lo > opt.alpha_tol && k < opt.max_iterations; ++k) {
      const double mid = 0.5 * (lo + hi);
      auto r = eval(mid);
      if (meets(r, threshold)) {
        lo = mid;
        lo_result = r;
      } else {
        hi = mid;
      }
    }
    return finish(lo, lo_result);
  }

  if (!meets(at_one, threshold)) {
    res.unattainable = true;
    if (!at_one.ok()) res.error = at_one.diagnostics;
    return finish(1.0, at_one);
  }
  double lo = 0.0, hi = 1.0;
  auto hi_result = at_one;
  for (int k = 0; hi - lo > opt.alpha_tol && k < opt.max_iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    auto r = eval(mid);
    if (meets(r, threshold)) {
      hi = mid;
      hi_result = r;
    } else {
      lo = mid;
    }
  }
  return finish(hi, hi_result);
}

}  // namespace detail

/// Largest radius whose worst-case cost stays within (1 + beta) * objective.
inline RadiusResult robust_radius(const PlanningProblem& problem, double objective, double beta, Param param,
                                  const IgdtOptions& opt = {}) {
  return detail::radius(problem, objective, beta, param, Mode::kRobust, opt);
}

/// Smallest radius whose best-case cost reaches (1 - beta) * objective.
inline RadiusResult opportunity_radius(const PlanningProblem& problem, double objective, double beta, Param param,
                                       const IgdtOptions& opt = {}) {
  return detail::radius(problem, objective, beta, param, Mode::kOpportunity, opt);
}

/// Re-solves at the reported radius and just past it: the budget must hold at
/// alpha and fail at alpha + 2 tol (robust, unless saturated); the target must
/// hold at alpha and fail at alpha - 2 tol (opportunity, unless alpha is that
/// close to 0 or the target is unattainable). Returns an empty string on success.
inline std::string band_check(const PlanningProblem& problem, double objective, const RadiusResult& r,
                              const IgdtOptions& opt = {}) {
  if (!r.error.empty() && !r.unattainable) return "radius computation failed: " + r.error;
  const bool robust = r.mode == Mode::kRobust;
  const auto dir = robust ? Direction::kWorst : Direction::kBest;
  const double threshold = robust ? (1.0 + r.beta) * objective : (1.0 - r.beta) * objective;
  auto eval = [&](double a) {
    const auto [apv, aev] = detail::split_alpha(r.param, std::clamp(a, 0.0, 1.0));
    return evaluate_scaled(problem, apv, aev, dir, opt.solver);
  };
  const double step = 2.0 * opt.alpha_tol;
  if (robust) {
    if (!detail::meets(eval(r.alpha), threshold)) return "budget violated at alpha";
    if (!r.saturated && r.alpha + step <= 1.0 && detail::meets(eval(r.alpha + step), threshold))
      return "budget still met at alpha + 2 tol";
    if (r.saturated && r.alpha != 1.0) return "saturated radius is not 1";
    return {};
  }
  if (r.unattainable) return detail::meets(eval(1.0), threshold) ? "target reachable at alpha = 1" : "";
  if (!detail::meets(eval(r.alpha), threshold)) return "target missed at alpha";
  if (r.alpha - step >= 0.0 && r.beta > 0.0 && detail::meets(eval(r.alpha - step), threshold))
    return "target already met at alpha - 2 tol";
  return {};
}

/// Radii for every beta, mode and parameter. Betas are independent and run
/// on up to worker_count() threads; a failure is recorded and the sweep
/// continues. Row order: beta, then robust before opportunity, then ev before
/// pv (or the single joint parameter).
inline IgdtCurve sweep(const PlanningProblem& problem, double objective, const DeviationGrid& grid,
                       const IgdtOptions& opt = {}) {
  grid.validate();
  std::vector<Mode> modes;
  if (grid.mode != Mode::kOpportunity) modes.push_back(Mode::kRobust);
  if (grid.mode != Mode::kRobust) modes.push_back(Mode::kOpportunity);
  std::vector<Param> params = grid.coupling == Coupling::kJoint ? std::vector<Param>{Param::kJoint}
                                                                : std::vector<Param>{Param::kEv, Param::kPv};
  const std::size_t per_beta = modes.size() * params.size();
  IgdtCurve curve;
  curve.objective = objective;
  curve.grid = grid;
  curve.results.resize(grid.betas.size() * per_beta);
  parallel_for(curve.results.size(), [&](std::size_t i) {
    const double beta = grid.betas[i / per_beta];
    const Mode mode = modes[(i % per_beta) / params.size()];
    const Param param = params[i % params.size()];
    try {
      curve.results[i] = detail::radius(problem, objective, beta, param, mode, opt);
    } catch (const std::exception& e) {
      auto& r = curve.results[i];
      r.beta = beta;
      r.mode = mode;
      r.param = param;
      r.coupling = grid.coupling;
      r.error = e.what();
    }
  });
  return curve;
}

}  // namespace gridvest::igdt
