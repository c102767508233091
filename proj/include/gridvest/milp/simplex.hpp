#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "gridvest/milp/model.hpp"

namespace gridvest::milp {

namespace detail {

/// LU factors of the basis matrix plus product-form eta updates applied since
/// the last refactorization.
class BasisFactor {
public:
  bool factor(const Eigen::SparseMatrix<double>& basis) {
    etas_.clear();
    empty_ = basis.rows() == 0;
    if (empty_) return true;
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    return lu_.info() == Eigen::Success;
  }

  // Solves B v = rhs in place.
  void ftran(Eigen::VectorXd& v) {
    if (empty_) return;
    Eigen::VectorXd tmp = lu_.solve(v);
    v.swap(tmp);
    for (const auto& e : etas_) {
      const double vr = v[e.row] / e.pivot;
      v[e.row] = vr;
      if (vr == 0.0) continue;
      for (std::size_t k = 0; k < e.index.size(); ++k) v[e.index[k]] -= e.value[k] * vr;
    }
  }

  // Solves B^T w = rhs in place.
  void btran(Eigen::VectorXd& w) {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = w[it->row];
      for (std::size_t k = 0; k < it->index.size(); ++k) s -= it->value[k] * w[it->index[k]];
      w[it->row] = s / it->pivot;
    }
    if (empty_) return;
    Eigen::VectorXd tmp = lu_.transpose().solve(w);
    w.swap(tmp);
  }

  /// Records the replacement of basis position `row` by a column whose
  /// FTRAN image is `alpha`.
  void update(int row, const Eigen::VectorXd& alpha) {
    Eta e;
    e.row = row;
    e.pivot = alpha[row];
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (i == row || std::abs(alpha[i]) < 1e-14) continue;
      e.index.push_back(static_cast<int>(i));
      e.value.push_back(alpha[i]);
    }
    etas_.push_back(std::move(e));
  }

  std::size_t num_updates() const { return etas_.size(); }

private:
  struct Eta {
    int row = 0;
    double pivot = 1.0;
    std::vector<int> index;
    std::vector<double> value;
  };
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  bool empty_ = false;
};

inline double pow2_round(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) return 1.0;
  return std::exp2(std::round(std::log2(s)));
}

}  // namespace detail

/// Bounded-variable primal revised simplex.
///
/// The model is brought to the form [A -I](x, s) = 0 with one logical s_i per
/// row carrying the row bounds, scaled by powers of two (geometric-mean
/// equilibration). Phase 1 minimises the sum of bound violations of basic
/// variables directly, so any basis (including one inherited from a parent
/// branch-and-bound node) is a valid starting point. Pricing is Dantzig with a
/// Harris two-pass ratio test; after a run of degenerate pivots the engine
/// switches to Bland's rule until the objective moves again.
class LpEngine {
public:
  LpEngine(const Model& model, SolverOptions options) : model_(model), opt_(options) {
    n_ = model.num_vars();
    m_ = model.num_constraints();
    build_matrix();
  }

  int num_structural() const { return n_; }
  int num_rows() const { return m_; }

  Solution solve(const Basis* warm = nullptr) {
    std::vector<double> lo(n_), hi(n_);
    for (int j = 0; j < n_; ++j) {
      lo[j] = model_.variables()[j].lower;
      hi[j] = model_.variables()[j].upper;
    }
    return solve(lo, hi, warm);
  }

  /// Solves the LP relaxation under the given structural bounds.
  Solution solve(std::span<const double> lower, std::span<const double> upper, const Basis* warm = nullptr) {
    Solution out;
    for (int j = 0; j < n_; ++j) {
      if (lower[j] > upper[j] + 1e-12) {
        out.status = SolveStatus::kInfeasible;
        out.diagnostics = "empty bound interval for variable " + std::to_string(j);
        return out;
      }
    }
    set_bounds(lower, upper);
    init_basis(warm);
    iterations_ = 0;
    const long limit = opt_.iteration_limit > 0 ? opt_.iteration_limit : 50L * (n_ + m_) + 10000;

    int restarts = 0;
    while (true) {
      const auto status = iterate(limit);
      if (status == IterateResult::kRestart && restarts < 2) {
        ++restarts;
        init_basis(nullptr);
        continue;
      }
      switch (status) {
        case IterateResult::kOptimal: out.status = SolveStatus::kOptimal; break;
        case IterateResult::kInfeasible: out.status = SolveStatus::kInfeasible; break;
        case IterateResult::kUnbounded: out.status = SolveStatus::kUnbounded; break;
        case IterateResult::kLimit:
          out.status = SolveStatus::kNumericalFailure;
          out.diagnostics = "simplex iteration limit reached";
          break;
        case IterateResult::kRestart:
          out.status = SolveStatus::kNumericalFailure;
          out.diagnostics = "basis factorization failed after " + std::to_string(restarts) + " restarts";
          break;
      }
      break;
    }
    out.iterations = iterations_;
    if (out.status == SolveStatus::kOptimal) {
      out.values.resize(n_);
      for (int j = 0; j < n_; ++j) {
        const double v = x_[j] * col_scale_[j];
        out.values[j] = std::clamp(v, lower[j], upper[j]);
      }
      out.objective = model_.evaluate_objective(out.values);
      out.bound = out.objective;
      out.mip_gap = 0.0;
      out.has_incumbent = true;
    }
    out.basis.status = status_;
    return out;
  }

private:
  enum class IterateResult { kOptimal, kInfeasible, kUnbounded, kLimit, kRestart };

  static constexpr double kPrimalTol = 1e-9;
  static constexpr double kHarrisTol = 5e-10;
  static constexpr double kDualTol = 1e-9;
  static constexpr double kPivotTol = 1e-9;
  static constexpr int kDegenerateSwitch = 60;

  void build_matrix() {
    const auto& rows = model_.constraints();
    std::vector<int> count(n_ + 1, 0);
    for (const auto& r : rows)
      for (const auto& t : r.terms)
        if (t.coef != 0.0) ++count[t.var.index + 1];
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j + 1];
    row_index_.resize(col_start_[n_]);
    value_.resize(col_start_[n_]);
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i)
      for (const auto& t : rows[i].terms) {
        if (t.coef == 0.0) continue;
        const int p = fill[t.var.index]++;
        row_index_[p] = i;
        value_[p] = t.coef;
      }

    row_scale_.assign(m_, 1.0);
    col_scale_.assign(n_, 1.0);
    if (opt_.scaling) equilibrate();
    for (int j = 0; j < n_; ++j)
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) value_[p] *= row_scale_[row_index_[p]] * col_scale_[j];

    cost_.assign(n_ + m_, 0.0);
    double cmax = 0.0;
    for (int j = 0; j < n_; ++j) {
      cost_[j] = model_.objective()[j] * col_scale_[j];
      cmax = std::max(cmax, std::abs(cost_[j]));
    }
    const double cscale = cmax > 0.0 ? detail::pow2_round(1.0 / cmax) : 1.0;
    for (int j = 0; j < n_; ++j) cost_[j] *= cscale;

    row_lo_.resize(m_);
    row_hi_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      const auto& r = rows[i];
      row_lo_[i] = r.relation == Relation::kLessEqual ? -kInf : r.rhs;
      row_hi_[i] = r.relation == Relation::kGreaterEqual ? kInf : r.rhs;
    }
  }

  void equilibrate() {
    std::vector<double> rmin(m_), rmax(m_);
    for (int pass = 0; pass < 6; ++pass) {
      std::fill(rmin.begin(), rmin.end(), kInf);
      std::fill(rmax.begin(), rmax.end(), 0.0);
      for (int j = 0; j < n_; ++j)
        for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) {
          const double a = std::abs(value_[p]) * col_scale_[j];
          rmin[row_index_[p]] = std::min(rmin[row_index_[p]], a);
          rmax[row_index_[p]] = std::max(rmax[row_index_[p]], a);
        }
      for (int i = 0; i < m_; ++i)
        row_scale_[i] = rmax[i] > 0.0 ? 1.0 / std::sqrt(rmin[i] * rmax[i]) : 1.0;
      for (int j = 0; j < n_; ++j) {
        double lo = kInf, hi = 0.0;
        for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) {
          const double a = std::abs(value_[p]) * row_scale_[row_index_[p]];
          lo = std::min(lo, a);
          hi = std::max(hi, a);
        }
        col_scale_[j] = hi > 0.0 ? 1.0 / std::sqrt(lo * hi) : 1.0;
      }
    }
    for (auto& s : row_scale_) s = detail::pow2_round(s);
    for (auto& s : col_scale_) s = detail::pow2_round(s);
  }

  void set_bounds(std::span<const double> lower, std::span<const double> upper) {
    lo_.resize(n_ + m_);
    hi_.resize(n_ + m_);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lower[j] / col_scale_[j];
      hi_[j] = upper[j] / col_scale_[j];
    }
    for (int i = 0; i < m_; ++i) {
      lo_[n_ + i] = row_lo_[i] * row_scale_[i];
      hi_[n_ + i] = row_hi_[i] * row_scale_[i];
    }
  }

  void place_nonbasic(int j) {
    auto& st = status_[j];
    const bool has_lo = std::isfinite(lo_[j]), has_hi = std::isfinite(hi_[j]);
    if (st == VarStatus::kAtUpper && !has_hi) st = has_lo ? VarStatus::kAtLower : VarStatus::kAtZero;
    if (st == VarStatus::kAtLower && !has_lo) st = has_hi ? VarStatus::kAtUpper : VarStatus::kAtZero;
    if (st == VarStatus::kAtZero && (has_lo || has_hi)) st = has_lo ? VarStatus::kAtLower : VarStatus::kAtUpper;
    if (lo_[j] == hi_[j]) st = VarStatus::kAtLower;
    x_[j] = st == VarStatus::kAtLower ? lo_[j] : st == VarStatus::kAtUpper ? hi_[j] : 0.0;
  }

  void init_basis(const Basis* warm) {
    const int total = n_ + m_;
    x_.assign(total, 0.0);
    bool use_warm = false;
    if (warm && static_cast<int>(warm->status.size()) == total) {
      const auto basic = std::count(warm->status.begin(), warm->status.end(), VarStatus::kBasic);
      use_warm = basic == m_;
    }
    if (use_warm) {
      status_ = warm->status;
    } else {
      status_.assign(total, VarStatus::kAtLower);
      for (int i = 0; i < m_; ++i) status_[n_ + i] = VarStatus::kBasic;
    }
    head_.clear();
    for (int j = 0; j < total; ++j) {
      if (status_[j] == VarStatus::kBasic)
        head_.push_back(j);
      else
        place_nonbasic(j);
    }
    need_refactor_ = true;
  }

  bool refactor() {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m_) * 3);
    for (int k = 0; k < m_; ++k) {
      const int j = head_[k];
      if (j >= n_) {
        trip.emplace_back(j - n_, k, -1.0);
      } else {
        for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) trip.emplace_back(row_index_[p], k, value_[p]);
      }
    }
    Eigen::SparseMatrix<double> basis(m_, m_);
    basis.setFromTriplets(trip.begin(), trip.end());
    basis.makeCompressed();
    if (!factor_.factor(basis)) return false;
    need_refactor_ = false;
    compute_basic_values();
    return true;
  }

  void compute_basic_values() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == VarStatus::kBasic || x_[j] == 0.0) continue;
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) rhs[row_index_[p]] -= value_[p] * x_[j];
    }
    for (int i = 0; i < m_; ++i)
      if (status_[n_ + i] != VarStatus::kBasic) rhs[i] += x_[n_ + i];
    factor_.ftran(rhs);
    for (int k = 0; k < m_; ++k) x_[head_[k]] = rhs[k];
  }

  void load_column(int j, Eigen::VectorXd& col) const {
    col.setZero(m_);
    if (j >= n_) {
      col[j - n_] = -1.0;
      return;
    }
    for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) col[row_index_[p]] = value_[p];
  }

  // Bound at which basic variable j stops when moving at `rate`; NaN if none.
  double blocking_target(int j, double rate) const {
    const double x = x_[j];
    if (rate < 0.0) {
      if (x > hi_[j] + kPrimalTol) return hi_[j];
      if (x >= lo_[j] - kPrimalTol && std::isfinite(lo_[j])) return lo_[j];
      return std::nan("");
    }
    if (x < lo_[j] - kPrimalTol) return lo_[j];
    if (x <= hi_[j] + kPrimalTol && std::isfinite(hi_[j])) return hi_[j];
    return std::nan("");
  }

  IterateResult iterate(long limit) {
    const int total = n_ + m_;
    Eigen::VectorXd cb(m_), y(m_), alpha(m_);
    std::vector<double> target(m_);
    int degenerate = 0;
    bool bland = false;

    while (true) {
      if (need_refactor_ && !refactor()) return IterateResult::kRestart;
      if (iterations_ >= limit) return IterateResult::kLimit;

      bool phase1 = false;
      for (int k = 0; k < m_; ++k) {
        const int j = head_[k];
        if (x_[j] < lo_[j] - kPrimalTol) { cb[k] = -1.0; phase1 = true; }
        else if (x_[j] > hi_[j] + kPrimalTol) { cb[k] = 1.0; phase1 = true; }
        else cb[k] = 0.0;
      }
      if (!phase1)
        for (int k = 0; k < m_; ++k) cb[k] = cost_[head_[k]];

      y = cb;
      factor_.btran(y);

      int entering = -1;
      double entering_d = 0.0, best = 0.0;
      for (int j = 0; j < total; ++j) {
        const auto st = status_[j];
        if (st == VarStatus::kBasic || lo_[j] == hi_[j]) continue;
        double d;
        if (j < n_) {
          d = phase1 ? 0.0 : cost_[j];
          for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) d -= y[row_index_[p]] * value_[p];
        } else {
          d = y[j - n_];
        }
        bool eligible = false;
        if (st == VarStatus::kAtLower) eligible = d < -kDualTol;
        else if (st == VarStatus::kAtUpper) eligible = d > kDualTol;
        else eligible = std::abs(d) > kDualTol;
        if (!eligible) continue;
        if (bland) {
          entering = j;
          entering_d = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          entering_d = d;
        }
      }

      if (entering < 0) {
        if (factor_.num_updates() > 0) {
          need_refactor_ = true;  // confirm on fresh factors before declaring
          continue;
        }
        return phase1 ? IterateResult::kInfeasible : IterateResult::kOptimal;
      }

      const double dir = entering_d < 0.0 ? 1.0 : -1.0;
      load_column(entering, alpha);
      factor_.ftran(alpha);

      // Harris pass 1: largest step keeping every blocker within the relaxed bound.
      const double relax = bland ? 0.0 : kHarrisTol;
      double theta_max = kInf;
      for (int k = 0; k < m_; ++k) {
        target[k] = std::nan("");
        const double a = alpha[k];
        if (std::abs(a) < kPivotTol) continue;
        const double rate = -dir * a;
        const int j = head_[k];
        const double t = blocking_target(j, rate);
        if (std::isnan(t)) continue;
        target[k] = t;
        const double r = rate < 0.0 ? (x_[j] - (t - relax)) / -rate : ((t + relax) - x_[j]) / rate;
        theta_max = std::min(theta_max, r);
      }
      // Pass 2: among ratios within the bound pick the largest pivot
      // (Bland: the lowest variable index).
      int leave = -1;
      double theta = kInf, best_pivot = 0.0;
      for (int k = 0; k < m_; ++k) {
        if (std::isnan(target[k])) continue;
        const double rate = -dir * alpha[k];
        const int j = head_[k];
        double r = rate < 0.0 ? (x_[j] - target[k]) / -rate : (target[k] - x_[j]) / rate;
        r = std::max(r, 0.0);
        if (r > theta_max + (bland ? 1e-12 : 0.0)) continue;
        const bool better = bland ? (leave < 0 || j < head_[leave]) : std::abs(alpha[k]) > best_pivot;
        if (better) {
          leave = k;
          theta = r;
          best_pivot = std::abs(alpha[k]);
        }
      }

      const double flip = (std::isfinite(lo_[entering]) && std::isfinite(hi_[entering]))
                              ? hi_[entering] - lo_[entering]
                              : kInf;
      if (leave < 0 && !std::isfinite(flip)) {
        if (phase1) return IterateResult::kRestart;
        if (factor_.num_updates() > 0) {
          need_refactor_ = true;
          continue;
        }
        return IterateResult::kUnbounded;
      }
      const bool do_flip = flip <= theta;
      const double step = do_flip ? flip : theta;

      ++iterations_;
      for (int k = 0; k < m_; ++k) x_[head_[k]] -= dir * alpha[k] * step;
      x_[entering] += dir * step;

      if (step <= 1e-12) {
        if (++degenerate > kDegenerateSwitch) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }

      if (do_flip) {
        status_[entering] = dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
        x_[entering] = dir > 0 ? hi_[entering] : lo_[entering];
        continue;
      }

      const int leaving = head_[leave];
      x_[leaving] = target[leave];
      status_[leaving] = (target[leave] == lo_[leaving]) ? VarStatus::kAtLower : VarStatus::kAtUpper;
      head_[leave] = entering;
      status_[entering] = VarStatus::kBasic;
      factor_.update(leave, alpha);
      if (static_cast<int>(factor_.num_updates()) >= opt_.refactor_interval) need_refactor_ = true;
    }
  }

  const Model& model_;
  SolverOptions opt_;
  int n_ = 0, m_ = 0;

  std::vector<int> col_start_, row_index_;
  std::vector<double> value_;
  std::vector<double> row_scale_, col_scale_;
  std::vector<double> cost_;
  std::vector<double> row_lo_, row_hi_;

  std::vector<double> lo_, hi_, x_;
  std::vector<VarStatus> status_;
  std::vector<int> head_;
  detail::BasisFactor factor_;
  bool need_refactor_ = true;
  long iterations_ = 0;
};

/// Solves the LP relaxation of `model` (binaries relaxed to [0, 1]).
inline Solution solve_lp(const Model& model, const SolverOptions& options = {}) {
  LpEngine engine(model, options);
  return engine.solve();
}

}  // namespace gridvest::milp
