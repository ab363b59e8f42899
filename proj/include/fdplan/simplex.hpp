#pragma once

// Bounded-variable revised primal simplex.
//
// Every row gets a logical column (slack in [0, inf) for <= rows, fixed at 0
// for equalities), so the all-logical basis is always available. Phase 1
// minimizes the sum of bound infeasibilities of the basic variables and works
// from any starting basis, which is what branch-and-bound warm starts need.
//
// The basis is factored by splitting off the basic logicals: with Rs the rows
// whose logical is basic and S the basic structurals, B^{-1} only needs the LU
// of the kernel K = A[rows not in Rs, S]. Basis changes between
// refactorizations are kept as product-form eta vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fdplan/lp.hpp"

namespace fdplan {

enum class SolveStatus { Optimal, Infeasible, Unbounded, Stalled, NotProven };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::Stalled: return "Stalled";
    case SolveStatus::NotProven: return "NotProven";
  }
  return "Unknown";
}

enum class Pricing { Devex, Dantzig };

// All solver tolerances and limits in one place.
struct SolverOptions {
  double feas_tol = 1e-7;      // primal feasibility: scaled rows, unscaled structurals
  double opt_tol = 1e-9;       // reduced cost, scaled units
  double row_rel_tol = 1e-11;  // row slack error relative to row activity, at optimality
  double pivot_tol = 1e-9;     // smallest acceptable |alpha| in the ratio test
  double int_tol = 1e-6;       // integrality
  double gap_tol = 1e-6;       // relative MILP gap
  std::size_t max_iterations = 0;  // 0 picks a size-based default
  std::size_t degenerate_streak = 50;
  std::size_t refactor_interval = 50;
  std::size_t node_limit = 200000;
  Pricing pricing = Pricing::Devex;
  bool prefer_up = true;  // explore the x=1 child first
};

struct LpSolution {
  SolveStatus status = SolveStatus::Stalled;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
  std::vector<double> duals;          // <= rows first, then equality rows
  std::vector<double> reduced_costs;  // structural columns
};

namespace detail {

// Dense LU with row pivoting; columns without an acceptable pivot are moved to
// the end and reported as dependent.
class DenseLu {
 public:
  void factor(std::vector<double> a, std::size_t k) {
    k_ = k;
    a_ = std::move(a);
    rperm_.resize(k);
    cperm_.resize(k);
    for (std::size_t i = 0; i < k; ++i) rperm_[i] = cperm_[i] = i;
    std::vector<double> colmax(k, 0.0);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) colmax[c] = std::max(colmax[c], std::abs(at(r, c)));

    std::size_t active = k;
    std::size_t t = 0;
    while (t < active) {
      std::size_t p = t;
      double best = std::abs(at(t, t));
      for (std::size_t r = t + 1; r < k; ++r) {
        const double v = std::abs(at(r, t));
        if (v > best) {
          best = v;
          p = r;
        }
      }
      if (best <= 1e-11 * std::max(colmax[cperm_[t]], 1e-300) || best == 0.0) {
        --active;
        swap_cols(t, active);
        continue;
      }
      if (p != t) swap_rows(t, p);
      const double piv = at(t, t);
      for (std::size_t r = t + 1; r < k; ++r) {
        double& lr = at(r, t);
        if (lr == 0.0) continue;
        lr /= piv;
        const double l = lr;
        double* dst = &a_[r * k_];
        const double* src = &a_[t * k_];
        for (std::size_t c = t + 1; c < active; ++c) dst[c] -= l * src[c];
      }
      ++t;
    }
    rank_ = active;
  }

  std::size_t rank() const { return rank_; }
  std::size_t size() const { return k_; }
  // Original column / row numbers left without a pivot.
  std::vector<std::size_t> dependent_cols() const {
    return {cperm_.begin() + static_cast<std::ptrdiff_t>(rank_), cperm_.end()};
  }
  std::vector<std::size_t> free_rows() const {
    return {rperm_.begin() + static_cast<std::ptrdiff_t>(rank_), rperm_.end()};
  }

  // Solves K z = b in place.
  void solve(std::vector<double>& b) const {
    std::vector<double> w(k_);
    for (std::size_t t = 0; t < k_; ++t) w[t] = b[rperm_[t]];
    for (std::size_t t = 0; t < k_; ++t) {
      const double v = w[t];
      if (v == 0.0) continue;
      for (std::size_t r = t + 1; r < k_; ++r) w[r] -= at(r, t) * v;
    }
    for (std::size_t t = k_; t-- > 0;) {
      double v = w[t];
      for (std::size_t c = t + 1; c < k_; ++c) v -= at(t, c) * w[c];
      w[t] = v / at(t, t);
    }
    for (std::size_t t = 0; t < k_; ++t) b[cperm_[t]] = w[t];
  }

  // Solves K' y = c in place.
  void solve_transpose(std::vector<double>& c) const {
    std::vector<double> w(k_);
    for (std::size_t t = 0; t < k_; ++t) w[t] = c[cperm_[t]];
    for (std::size_t t = 0; t < k_; ++t) {
      double v = w[t];
      for (std::size_t r = 0; r < t; ++r) v -= at(r, t) * w[r];
      w[t] = v / at(t, t);
    }
    for (std::size_t t = k_; t-- > 0;) {
      const double v = w[t];
      if (v == 0.0) continue;
      for (std::size_t r = 0; r < t; ++r) w[r] -= at(t, r) * v;
    }
    for (std::size_t t = 0; t < k_; ++t) c[rperm_[t]] = w[t];
  }

 private:
  double& at(std::size_t r, std::size_t c) { return a_[r * k_ + c]; }
  double at(std::size_t r, std::size_t c) const { return a_[r * k_ + c]; }

  void swap_rows(std::size_t i, std::size_t j) {
    for (std::size_t c = 0; c < k_; ++c) std::swap(at(i, c), at(j, c));
    std::swap(rperm_[i], rperm_[j]);
  }
  void swap_cols(std::size_t i, std::size_t j) {
    for (std::size_t r = 0; r < k_; ++r) std::swap(at(r, i), at(r, j));
    std::swap(cperm_[i], cperm_[j]);
  }

  std::size_t k_ = 0;
  std::size_t rank_ = 0;
  std::vector<double> a_;
  std::vector<std::size_t> rperm_, cperm_;
};

inline double round_pow2(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return 1.0;
  return std::exp2(std::round(std::log2(v)));
}

}  // namespace detail

enum class VarState : std::uint8_t { Basic, Lower, Upper, Zero };

struct BasisState {
  std::vector<VarState> state;    // structurals then logicals
  std::vector<std::size_t> head;  // variable at each basis position

  bool operator==(const BasisState&) const = default;
};

class LpSolver {
 public:
  explicit LpSolver(const LinearProgram& lp, SolverOptions opts = {}) : opts_(opts) {
    lp.check();
    n_ = lp.num_vars();
    m_ = lp.num_rows();
    load(lp);
    scale();
    reset_basis();
  }

  std::size_t num_vars() const { return n_; }
  std::size_t num_rows() const { return m_; }
  const SolverOptions& options() const { return opts_; }

  double lower(std::size_t j) const { return lb_[j] * cscale_[j]; }
  double upper(std::size_t j) const { return ub_[j] * cscale_[j]; }

  void set_bounds(std::size_t j, double lo, double hi) {
    if (j >= n_) throw std::out_of_range("set_bounds: variable index");
    if (lo > hi) throw std::invalid_argument("set_bounds: lower > upper");
    lb_[j] = lo / cscale_[j];
    ub_[j] = hi / cscale_[j];
    if (state_[j] != VarState::Basic) place_nonbasic(j);
  }

  BasisState basis() const { return {state_, head_}; }

  void set_basis(const BasisState& b) {
    if (b.state.size() != n_ + m_ || b.head.size() != m_)
      throw std::invalid_argument("basis size mismatch");
    state_ = b.state;
    head_ = b.head;
    pos_.assign(n_ + m_, kNone);
    for (std::size_t p = 0; p < m_; ++p) pos_[head_[p]] = p;
    for (std::size_t j = 0; j < n_ + m_; ++j)
      if (state_[j] != VarState::Basic) place_nonbasic(j);
    factored_ = false;
  }

  void reset_basis() {
    state_.assign(n_ + m_, VarState::Lower);
    pos_.assign(n_ + m_, kNone);
    head_.resize(m_);
    for (std::size_t j = 0; j < n_; ++j) {
      state_[j] = VarState::Lower;
      place_nonbasic(j);
    }
    for (std::size_t i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      pos_[n_ + i] = i;
      state_[n_ + i] = VarState::Basic;
    }
    factored_ = false;
  }

  LpSolution solve() {
    const std::size_t max_iter =
        opts_.max_iterations ? opts_.max_iterations : std::max<std::size_t>(20000, 50 * (m_ + n_));
    std::fill(ftol_.begin() + static_cast<std::ptrdiff_t>(n_), ftol_.end(), opts_.feas_tol);
    if (!factored_) refactor();
    recompute_primal();
    weights_.assign(n_ + m_, 1.0);

    std::size_t iter = 0;
    std::size_t streak = 0;
    bool bland = false;
    // No progress for a long stretch: first restart from the slack basis with
    // Dantzig pricing, then fall back to Bland's rule for good.
    int restarts = 0;
    bool stuck = false;
    Pricing pricing = opts_.pricing;
    double best_measure = kInf;
    std::size_t since_progress = 0;
    bool measured_phase1 = false;
    const std::size_t patience = std::max<std::size_t>(500, 2 * (m_ + n_));
    bool verified = false;
    std::vector<double> cb(m_);
    std::vector<double> alpha;
    std::vector<std::size_t> rejected;  // phase-1 candidates with no usable pivot
    int tightenings = 0;
    std::optional<LpSolution> loose;  // optimum under the untightened tolerances
    auto give_up = [&](SolveStatus status) {
      if (!loose) return finish(status, iter);
      loose->iterations = iter;
      return *loose;
    };

    for (;;) {
      if (iter >= max_iter) return give_up(SolveStatus::Stalled);
      if (etas_.size() >= opts_.refactor_interval) {
        refactor();
        recompute_primal();
      }

      bool phase1 = false;
      for (std::size_t p = 0; p < m_; ++p) {
        const auto j = head_[p];
        // Phase-1 weights count violation in multiples of the tolerance.
        if (x_[j] < lb_[j] - ftol_[j]) {
          cb[p] = -opts_.feas_tol / ftol_[j];
          phase1 = true;
        } else if (x_[j] > ub_[j] + ftol_[j]) {
          cb[p] = opts_.feas_tol / ftol_[j];
          phase1 = true;
        } else {
          cb[p] = 0.0;
        }
      }
      if (!phase1)
        for (std::size_t p = 0; p < m_; ++p) cb[p] = cost_[head_[p]];
      if (!stuck) {
        if (phase1 != measured_phase1) {
          measured_phase1 = phase1;
          best_measure = kInf;
        }
        const double measure = progress_measure(phase1);
        if (measure < best_measure - 1e-12 * (1.0 + std::abs(best_measure))) {
          best_measure = measure;
          since_progress = 0;
        } else if (++since_progress > patience) {
          since_progress = 0;
          best_measure = kInf;
          if (restarts++ == 0) {
            pricing = Pricing::Dantzig;
            bland = false;
            streak = 0;
            rejected.clear();
            reset_basis();
            refactor();
            recompute_primal();
            verified = false;
            continue;
          }
          stuck = bland = true;
        }
      }

      std::vector<double> y = cb;
      btran(y);

      std::size_t q = kNone;
      double best = 0.0;
      double dq = 0.0;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        const auto st = state_[j];
        if (st == VarState::Basic) continue;
        if (lb_[j] == ub_[j]) continue;
        if (!rejected.empty() && std::find(rejected.begin(), rejected.end(), j) != rejected.end()) continue;
        const double dj = (phase1 ? 0.0 : cost_[j]) - dot_column(y, j);
        bool eligible = false;
        if (st == VarState::Lower) eligible = dj < -opts_.opt_tol;
        else if (st == VarState::Upper) eligible = dj > opts_.opt_tol;
        else eligible = std::abs(dj) > opts_.opt_tol;
        if (!eligible) continue;
        if (bland) {
          q = j;
          dq = dj;
          break;
        }
        const double score = pricing == Pricing::Devex ? dj * dj / weights_[j] : dj * dj;
        if (score > best) {
          best = score;
          q = j;
          dq = dj;
        }
      }

      if (q == kNone) {
        if (!rejected.empty()) return give_up(SolveStatus::Stalled);
        if (!verified) {
          refactor();
          recompute_primal();
          verified = true;
          continue;
        }
        if (phase1 && loose) return give_up(SolveStatus::Infeasible);
        if (!phase1 && tightenings < 4 && tighten_rows()) {
          if (!loose) loose = finish(SolveStatus::Optimal, iter);
          ++tightenings;
          verified = false;
          continue;
        }
        return finish(phase1 ? SolveStatus::Infeasible : SolveStatus::Optimal, iter);
      }

      ++iter;
      verified = false;
      const double dir = state_[q] == VarState::Lower   ? 1.0
                         : state_[q] == VarState::Upper ? -1.0
                         : (dq < 0.0 ? 1.0 : -1.0);
      alpha.assign(m_, 0.0);
      scatter_column(q, alpha);
      ftran(alpha);

      // Ratio test: the first basic variable to reach a bound (an infeasible
      // one may only travel back to the bound it violates).
      double theta = (std::isfinite(lb_[q]) && std::isfinite(ub_[q])) ? ub_[q] - lb_[q] : kInf;
      std::size_t r = kNone;
      double leave_at = 0.0;
      for (std::size_t p = 0; p < m_; ++p) {
        const double a = alpha[p];
        if (std::abs(a) < opts_.pivot_tol) continue;
        const double delta = -dir * a;
        const auto j = head_[p];
        const double v = x_[j];
        double lim;
        double bound;
        if (delta > 0.0) {
          if (v < lb_[j] - ftol_[j]) {
            lim = (lb_[j] - v) / delta;
            bound = lb_[j];
          } else if (std::isfinite(ub_[j])) {
            lim = std::max(0.0, (ub_[j] - v) / delta);
            bound = ub_[j];
          } else {
            continue;
          }
        } else {
          if (v > ub_[j] + ftol_[j]) {
            lim = (ub_[j] - v) / delta;
            bound = ub_[j];
          } else if (std::isfinite(lb_[j])) {
            lim = std::max(0.0, (lb_[j] - v) / delta);
            bound = lb_[j];
          } else {
            continue;
          }
        }
        const double tie = 1e-12 * (1.0 + std::min(lim, theta));
        bool take = false;
        if (lim < theta - tie) {
          take = true;
        } else if (r != kNone && lim <= theta + tie) {
          take = bland ? j < head_[r] : std::abs(a) > std::abs(alpha[r]);
        }
        if (take) {
          theta = std::min(lim, theta);
          r = p;
          leave_at = bound;
        }
      }

      if (!std::isfinite(theta)) {
        if (phase1) {
          rejected.push_back(q);
          continue;
        }
        return finish(SolveStatus::Unbounded, iter);
      }
      rejected.clear();

      if (theta <= 1e-12) {
        if (++streak > opts_.degenerate_streak) bland = true;
      } else {
        streak = 0;
        bland = stuck;
      }

      for (std::size_t p = 0; p < m_; ++p)
        if (alpha[p] != 0.0) x_[head_[p]] -= dir * alpha[p] * theta;
      x_[q] += dir * theta;

      if (r == kNone) {
        // Bound flip: the entering variable crosses to its other bound.
        if (dir > 0) {
          state_[q] = VarState::Upper;
          x_[q] = ub_[q];
        } else {
          state_[q] = VarState::Lower;
          x_[q] = lb_[q];
        }
        continue;
      }

      if (pricing == Pricing::Devex && !bland) update_devex(q, r, alpha);

      const auto leaving = head_[r];
      x_[leaving] = leave_at;
      state_[leaving] = (leave_at == lb_[leaving]) ? VarState::Lower : VarState::Upper;
      pos_[leaving] = kNone;
      head_[r] = q;
      pos_[q] = r;
      state_[q] = VarState::Basic;
      push_eta(r, alpha);
    }
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Eta {
    std::size_t r = 0;
    double pivot = 1.0;
    std::vector<std::pair<std::size_t, double>> others;
  };

  void load(const LinearProgram& lp) {
    // Column-compressed structural matrix, rows ordered <= then =.
    std::vector<std::size_t> counts(n_, 0);
    auto count_rows = [&](const std::vector<SparseRow>& rows) {
      for (const auto& row : rows)
        for (const auto& t : row)
          if (t.coef != 0.0) ++counts[t.var];
    };
    count_rows(lp.le_rows);
    count_rows(lp.eq_rows);
    col_ptr_.assign(n_ + 1, 0);
    for (std::size_t j = 0; j < n_; ++j) col_ptr_[j + 1] = col_ptr_[j] + counts[j];
    row_idx_.assign(col_ptr_[n_], 0);
    val_.assign(col_ptr_[n_], 0.0);
    std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    std::size_t row = 0;
    auto add_rows = [&](const std::vector<SparseRow>& rows) {
      for (const auto& r : rows) {
        for (const auto& t : r) {
          if (t.coef == 0.0) continue;
          row_idx_[fill[t.var]] = row;
          val_[fill[t.var]++] = t.coef;
        }
        ++row;
      }
    };
    add_rows(lp.le_rows);
    add_rows(lp.eq_rows);
    merge_duplicates();

    rhs_.resize(m_);
    std::copy(lp.le_rhs.begin(), lp.le_rhs.end(), rhs_.begin());
    std::copy(lp.eq_rhs.begin(), lp.eq_rhs.end(),
              rhs_.begin() + static_cast<std::ptrdiff_t>(lp.le_rhs.size()));

    lb_.assign(n_ + m_, 0.0);
    ub_.assign(n_ + m_, 0.0);
    cost_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      lb_[j] = lp.lower[j];
      ub_[j] = lp.upper[j];
      cost_[j] = lp.objective[j];
    }
    const std::size_t nle = lp.le_rows.size();
    for (std::size_t i = 0; i < m_; ++i) {
      lb_[n_ + i] = 0.0;
      ub_[n_ + i] = i < nle ? kInf : 0.0;
    }
    x_.assign(n_ + m_, 0.0);
  }

  // Sums repeated (row, column) entries.
  void merge_duplicates() {
    std::vector<std::size_t> new_ptr(n_ + 1, 0);
    std::vector<std::size_t> ri;
    std::vector<double> vv;
    ri.reserve(row_idx_.size());
    vv.reserve(val_.size());
    std::vector<std::pair<std::size_t, double>> buf;
    for (std::size_t j = 0; j < n_; ++j) {
      buf.clear();
      for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) buf.emplace_back(row_idx_[k], val_[k]);
      std::sort(buf.begin(), buf.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t k = 0; k < buf.size();) {
        std::size_t e = k;
        double sum = 0.0;
        while (e < buf.size() && buf[e].first == buf[k].first) sum += buf[e++].second;
        if (sum != 0.0) {
          ri.push_back(buf[k].first);
          vv.push_back(sum);
        }
        k = e;
      }
      new_ptr[j + 1] = ri.size();
    }
    col_ptr_ = std::move(new_ptr);
    row_idx_ = std::move(ri);
    val_ = std::move(vv);
  }

  // Geometric-mean scaling passes followed by row equilibration; all factors
  // are powers of two so scaling itself introduces no rounding.
  void scale() {
    rscale_.assign(m_, 1.0);
    cscale_.assign(n_, 1.0);
    std::vector<double> rmin(m_), rmax(m_);
    for (int pass = 0; pass < 8; ++pass) {
      std::fill(rmin.begin(), rmin.end(), kInf);
      std::fill(rmax.begin(), rmax.end(), 0.0);
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
          const double v = std::abs(val_[k]) * cscale_[j];
          rmin[row_idx_[k]] = std::min(rmin[row_idx_[k]], v);
          rmax[row_idx_[k]] = std::max(rmax[row_idx_[k]], v);
        }
      for (std::size_t i = 0; i < m_; ++i)
        if (rmax[i] > 0.0) rscale_[i] = detail::round_pow2(1.0 / std::sqrt(rmin[i] * rmax[i]));
      for (std::size_t j = 0; j < n_; ++j) {
        double cmin = kInf, cmax = 0.0;
        for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
          const double v = std::abs(val_[k]) * rscale_[row_idx_[k]];
          cmin = std::min(cmin, v);
          cmax = std::max(cmax, v);
        }
        if (cmax > 0.0) cscale_[j] = detail::round_pow2(1.0 / std::sqrt(cmin * cmax));
      }
    }
    std::fill(rmax.begin(), rmax.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        rmax[row_idx_[k]] = std::max(rmax[row_idx_[k]], std::abs(val_[k]) * cscale_[j]);
    for (std::size_t i = 0; i < m_; ++i)
      if (rmax[i] > 0.0) rscale_[i] = detail::round_pow2(1.0 / rmax[i]);
      else rscale_[i] = 1.0;

    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        val_[k] *= rscale_[row_idx_[k]] * cscale_[j];
    for (std::size_t i = 0; i < m_; ++i) rhs_[i] *= rscale_[i];
    double cmax = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      lb_[j] /= cscale_[j];
      ub_[j] /= cscale_[j];
      cost_[j] *= cscale_[j];
      cmax = std::max(cmax, std::abs(cost_[j]));
    }
    oscale_ = cmax > 0.0 ? detail::round_pow2(1.0 / cmax) : 1.0;
    for (std::size_t j = 0; j < n_; ++j) cost_[j] *= oscale_;
    // A structural's tolerance holds in its own units, so a large column
    // factor cannot let a fixed binary drift.
    ftol_.assign(n_ + m_, opts_.feas_tol);
    for (std::size_t j = 0; j < n_; ++j) ftol_[j] = opts_.feas_tol * std::min(1.0, 1.0 / cscale_[j]);
  }

  void place_nonbasic(std::size_t j) {
    auto& st = state_[j];
    if (st == VarState::Basic) return;
    const bool has_lo = std::isfinite(lb_[j]);
    const bool has_hi = std::isfinite(ub_[j]);
    if (st == VarState::Upper && !has_hi) st = has_lo ? VarState::Lower : VarState::Zero;
    if (st == VarState::Lower && !has_lo) st = has_hi ? VarState::Upper : VarState::Zero;
    if (st == VarState::Zero && (has_lo || has_hi)) st = has_lo ? VarState::Lower : VarState::Upper;
    x_[j] = st == VarState::Lower ? lb_[j] : st == VarState::Upper ? ub_[j] : 0.0;
  }

  double dot_column(const std::vector<double>& y, std::size_t j) const {
    if (j >= n_) return y[j - n_];
    double s = 0.0;
    for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) s += y[row_idx_[k]] * val_[k];
    return s;
  }

  void scatter_column(std::size_t j, std::vector<double>& dense) const {
    if (j >= n_) {
      dense[j - n_] = 1.0;
      return;
    }
    for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) dense[row_idx_[k]] = val_[k];
  }

  void refactor() {
    for (int attempt = 0; attempt < 4; ++attempt) {
      etas_.clear();
      row_logical_.assign(m_, false);
      kernel_pos_.clear();
      for (std::size_t p = 0; p < m_; ++p) {
        if (head_[p] >= n_) row_logical_[head_[p] - n_] = true;
        else kernel_pos_.push_back(p);
      }
      kernel_rows_.clear();
      row_in_kernel_.assign(m_, kNone);
      for (std::size_t i = 0; i < m_; ++i)
        if (!row_logical_[i]) {
          row_in_kernel_[i] = kernel_rows_.size();
          kernel_rows_.push_back(i);
        }
      const std::size_t k = kernel_pos_.size();
      std::vector<double> dense(k * k, 0.0);
      for (std::size_t c = 0; c < k; ++c) {
        const auto j = head_[kernel_pos_[c]];
        for (std::size_t e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) {
          const auto r = row_in_kernel_[row_idx_[e]];
          if (r != kNone) dense[r * k + c] = val_[e];
        }
      }
      lu_.factor(std::move(dense), k);
      if (lu_.rank() == k) {
        kernel_var_.resize(k);
        for (std::size_t c = 0; c < k; ++c) kernel_var_[c] = head_[kernel_pos_[c]];
        base_pos_.assign(m_, kNone);
        for (std::size_t p = 0; p < m_; ++p)
          if (head_[p] >= n_) base_pos_[head_[p] - n_] = p;
        factored_ = true;
        return;
      }
      // Replace dependent structurals with the logicals of uncovered rows.
      const auto cols = lu_.dependent_cols();
      const auto rows = lu_.free_rows();
      for (std::size_t d = 0; d < cols.size(); ++d) {
        const auto p = kernel_pos_[cols[d]];
        const auto out = head_[p];
        const auto in = n_ + kernel_rows_[rows[d]];
        state_[out] = x_[out] >= ub_[out] ? VarState::Upper : VarState::Lower;
        pos_[out] = kNone;
        place_nonbasic(out);
        head_[p] = in;
        pos_[in] = p;
        state_[in] = VarState::Basic;
      }
    }
    throw std::runtime_error("simplex: basis repair failed");
  }

  // v holds a dense column on entry and B^{-1} v (by basis position) on exit.
  void ftran(std::vector<double>& v) const {
    const std::size_t k = kernel_pos_.size();
    std::vector<double> z(k);
    for (std::size_t r = 0; r < k; ++r) z[r] = v[kernel_rows_[r]];
    if (k) lu_.solve(z);
    std::vector<double> out(m_, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      out[kernel_pos_[c]] = z[c];
      if (z[c] == 0.0) continue;
      const auto j = kernel_var_[c];
      for (std::size_t e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) {
        const auto i = row_idx_[e];
        if (row_logical_[i]) v[i] -= val_[e] * z[c];
      }
    }
    for (std::size_t i = 0; i < m_; ++i)
      if (row_logical_[i]) out[base_pos_of_row(i)] = v[i];
    for (const auto& eta : etas_) {
      const double vr = out[eta.r] / eta.pivot;
      out[eta.r] = vr;
      if (vr == 0.0) continue;
      for (const auto& [i, a] : eta.others) out[i] -= a * vr;
    }
    v = std::move(out);
  }

  // c holds basis-position costs on entry and the row multipliers y on exit.
  void btran(std::vector<double>& c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c[it->r];
      for (const auto& [i, a] : it->others) s -= c[i] * a;
      c[it->r] = s / it->pivot;
    }
    std::vector<double> y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (row_logical_[i]) y[i] = c[base_pos_of_row(i)];
    const std::size_t k = kernel_pos_.size();
    if (k) {
      std::vector<double> rhs(k);
      for (std::size_t c2 = 0; c2 < k; ++c2) {
        const auto j = kernel_var_[c2];
        double s = c[kernel_pos_[c2]];
        for (std::size_t e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) {
          const auto i = row_idx_[e];
          if (row_logical_[i]) s -= y[i] * val_[e];
        }
        rhs[c2] = s;
      }
      lu_.solve_transpose(rhs);
      for (std::size_t r = 0; r < k; ++r) y[kernel_rows_[r]] = rhs[r];
    }
    c = std::move(y);
  }

  // Position held by row i's logical at the last refactorization.
  std::size_t base_pos_of_row(std::size_t i) const { return base_pos_[i]; }

  void push_eta(std::size_t r, const std::vector<double>& alpha) {
    Eta e;
    e.r = r;
    e.pivot = alpha[r];
    for (std::size_t p = 0; p < m_; ++p)
      if (p != r && alpha[p] != 0.0) e.others.emplace_back(p, alpha[p]);
    etas_.push_back(std::move(e));
  }

  // Phase 1: infeasibility in tolerance units. Phase 2: the objective.
  double progress_measure(bool phase1) const {
    if (!phase1) {
      double obj = 0.0;
      for (std::size_t j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
      return obj;
    }
    double sum = 0.0;
    for (std::size_t p = 0; p < m_; ++p) {
      const auto j = head_[p];
      sum += std::max(0.0, lb_[j] - x_[j]) / ftol_[j] + std::max(0.0, x_[j] - ub_[j]) / ftol_[j];
    }
    return sum;
  }

  // Rows whose slack error is large next to the row's own activity get a
  // tighter tolerance. Returns true if any tolerance changed.
  bool tighten_rows() {
    std::vector<double> act(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        act[row_idx_[k]] += std::abs(val_[k] * x_[j]);
    bool changed = false;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto j = n_ + i;
      const double viol = std::max(lb_[j] - x_[j], x_[j] - ub_[j]);
      if (viol <= 0.0) continue;
      const double target = opts_.row_rel_tol * std::max(act[i], std::abs(rhs_[i]));
      if (viol <= target || ftol_[j] <= target) continue;
      ftol_[j] = 0.5 * target;
      changed = true;
    }
    return changed;
  }

  // rhs - A x over all columns (structurals and logicals).
  std::vector<double> residual(bool basic_only_zero) const {
    std::vector<double> r = rhs_;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (basic_only_zero && state_[j] == VarState::Basic) continue;
      if (x_[j] == 0.0) continue;
      if (j >= n_) {
        r[j - n_] -= x_[j];
      } else {
        for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) r[row_idx_[k]] -= val_[k] * x_[j];
      }
    }
    return r;
  }

  void recompute_primal() {
    for (std::size_t j = 0; j < n_ + m_; ++j)
      if (state_[j] != VarState::Basic) place_nonbasic(j);
    std::vector<double> r = residual(true);
    ftran(r);
    for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] = r[p];
    for (int pass = 0; pass < 2; ++pass) {
      r = residual(false);
      double worst = 0.0;
      for (double v : r) worst = std::max(worst, std::abs(v));
      if (worst < 1e-13) break;
      ftran(r);
      for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] += r[p];
    }
  }

  void update_devex(std::size_t q, std::size_t r, const std::vector<double>& alpha) {
    std::vector<double> rho(m_, 0.0);
    rho[r] = 1.0;
    btran(rho);
    const double arq = alpha[r];
    const double wq = weights_[q];
    double wmax = 0.0;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::Basic || j == q) continue;
      const double arj = dot_column(rho, j);
      if (arj == 0.0) continue;
      const double ratio = arj / arq;
      weights_[j] = std::max(weights_[j], ratio * ratio * wq);
      wmax = std::max(wmax, weights_[j]);
    }
    weights_[head_[r]] = std::max(wq / (arq * arq), 1.0);
    if (wmax > 1e8) std::fill(weights_.begin(), weights_.end(), 1.0);
  }

  LpSolution finish(SolveStatus status, std::size_t iterations) {
    LpSolution s;
    s.status = status;
    s.iterations = iterations;
    s.x.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) s.x[j] = x_[j] * cscale_[j];
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) obj += cost_[j] / (cscale_[j] * oscale_) * s.x[j];
    s.objective = obj;
    if (status == SolveStatus::Optimal) {
      std::vector<double> y(m_);
      for (std::size_t p = 0; p < m_; ++p) y[p] = cost_[head_[p]];
      btran(y);
      s.duals.resize(m_);
      for (std::size_t i = 0; i < m_; ++i) s.duals[i] = y[i] * rscale_[i] / oscale_;
      s.reduced_costs.resize(n_);
      for (std::size_t j = 0; j < n_; ++j)
        s.reduced_costs[j] = (cost_[j] - dot_column(y, j)) / (oscale_ * cscale_[j]);
    }
    return s;
  }

  SolverOptions opts_;
  std::size_t n_ = 0, m_ = 0;

  std::vector<std::size_t> col_ptr_, row_idx_;
  std::vector<double> val_;
  std::vector<double> rhs_;
  std::vector<double> lb_, ub_, cost_;
  std::vector<double> rscale_, cscale_, ftol_;
  double oscale_ = 1.0;

  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<std::size_t> head_, pos_;

  bool factored_ = false;
  std::vector<bool> row_logical_;
  std::vector<std::size_t> kernel_pos_, kernel_var_, kernel_rows_, row_in_kernel_;
  std::vector<std::size_t> base_pos_;
  detail::DenseLu lu_;
  std::vector<Eta> etas_;
  std::vector<double> weights_;
};

inline LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& opts = {}) {
  LpSolver solver(lp, opts);
  return solver.solve();
}

}  // namespace fdplan
