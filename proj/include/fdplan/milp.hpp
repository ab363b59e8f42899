#pragma once

// Binary MILP by LP-based branch-and-bound, plus an exhaustive enumerator for
// small instances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fdplan/log.hpp"
#include "fdplan/lp.hpp"
#include "fdplan/simplex.hpp"

namespace fdplan {

struct BnbStats {
  std::size_t nodes = 0;
  std::size_t incumbent_updates = 0;
  std::size_t lp_iterations = 0;
  double best_bound = -kInf;
  double gap = 0.0;  // relative, 0 when proven
};

struct MilpResult {
  SolveStatus status = SolveStatus::Stalled;
  std::vector<double> x;
  double objective = kInf;
  BnbStats stats;
};

// Values for lp.integral, in that order; each 0 or 1.
using BinaryFixing = std::vector<std::uint8_t>;

namespace detail {

inline double rel_scale(double v) { return std::max(1.0, std::abs(v)); }

struct BnbNode {
  std::size_t id = 0;
  double bound = -kInf;
  std::vector<std::int8_t> fix;  // -1 free, else fixed value
  std::optional<BasisState> basis;
  std::size_t depth = 0;
};

class Bnb {
 public:
  Bnb(const LinearProgram& lp, const SolverOptions& opts) : lp_(lp), opts_(opts), solver_(lp, opts) {
    for (auto j : lp.integral) {
      lo_.push_back(lp.lower[j]);
      hi_.push_back(lp.upper[j]);
    }
  }

  // Tries a complete binary fixing as a starting incumbent.
  void seed(const BinaryFixing& fixing) {
    if (fixing.size() != lp_.integral.size()) throw std::invalid_argument("warm fixing size mismatch");
    preferred_ = fixing;
    std::vector<std::int8_t> fix(fixing.size());
    for (std::size_t k = 0; k < fixing.size(); ++k) {
      if (fixing[k] > 1) throw std::invalid_argument("warm fixing values must be 0 or 1");
      if (fixing[k] < lo_[k] || fixing[k] > hi_[k]) return;
      fix[k] = static_cast<std::int8_t>(fixing[k]);
    }
    apply(fix);
    solver_.reset_basis();
    auto sol = solver_.solve();
    result_.stats.lp_iterations += sol.iterations;
    if (sol.status == SolveStatus::Optimal) accept(sol);
  }

  MilpResult run() {
    std::vector<BnbNode> open;
    BnbNode root;
    root.fix.assign(lp_.integral.size(), -1);
    root.id = next_id_++;
    open.push_back(std::move(root));
    bool uncertain = false;
    bool unbounded = false;
    solver_.reset_basis();

    while (!open.empty()) {
      if (result_.stats.nodes >= opts_.node_limit) break;
      const std::size_t pick = select(open);
      BnbNode node = std::move(open[pick]);
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
      if (pruned(node.bound)) continue;

      ++result_.stats.nodes;
      apply(node.fix);
      if (node.basis) solver_.set_basis(*node.basis);
      auto sol = solver_.solve();
      result_.stats.lp_iterations += sol.iterations;
      if (sol.status == SolveStatus::Stalled) {
        solver_.reset_basis();
        sol = solver_.solve();
        result_.stats.lp_iterations += sol.iterations;
      }
      if (sol.status != SolveStatus::Optimal && log::enabled(log::Level::Debug))
      {
        std::string f;
        for (auto v : node.fix) f += v < 0 ? '.' : static_cast<char>('0' + v);
        log::debug("bnb node " + std::to_string(node.id) + " depth " + std::to_string(node.depth) + " " +
                   to_string(sol.status) + " after " + std::to_string(sol.iterations) + " pivots, fix " + f);
      }
      if (sol.status == SolveStatus::Infeasible) continue;
      if (sol.status == SolveStatus::Unbounded) {
        unbounded = true;
        break;
      }
      if (sol.status != SolveStatus::Optimal) {
        uncertain = true;
        continue;
      }
      if (pruned(sol.objective)) continue;

      auto branch = most_fractional(sol.x, opts_.int_tol);
      if (log::enabled(log::Level::Debug))
        log::debug("bnb node " + std::to_string(node.id) + " depth " + std::to_string(node.depth) +
                   " obj " + std::to_string(sol.objective) + " branch " +
                   (branch ? std::to_string(lp_.integral[*branch]) + " = " +
                                 std::to_string(sol.x[lp_.integral[*branch]])
                           : std::string("none")));
      if (!branch) {
        if (accept(sol)) continue;
        branch = most_fractional(sol.x, 0.0);
        if (!branch) continue;
      }
      const std::size_t k = *branch;
      const auto basis = solver_.basis();
      const bool up_first = preferred_.empty() ? opts_.prefer_up : preferred_[k] == 1;
      for (int pass = 0; pass < 2; ++pass) {
        // The child pushed last is explored first while plunging.
        const bool up = (pass == 1) == up_first;
        const double v = up ? 1.0 : 0.0;
        if (v < lo_[k] || v > hi_[k]) continue;
        BnbNode child;
        child.id = next_id_++;
        child.bound = sol.objective;
        child.fix = node.fix;
        child.fix[k] = static_cast<std::int8_t>(up ? 1 : 0);
        child.basis = basis;
        child.depth = node.depth + 1;
        open.push_back(std::move(child));
      }
    }

    if (unbounded) {
      result_.status = SolveStatus::Unbounded;
      return result_;
    }
    double best_open = kInf;
    for (const auto& n : open)
      if (!pruned(n.bound)) best_open = std::min(best_open, n.bound);
    const bool exhausted = best_open == kInf;
    if (have_incumbent_) {
      result_.stats.best_bound = std::min(best_open, result_.objective);
      result_.stats.gap = exhausted ? 0.0
                                    : (result_.objective - result_.stats.best_bound) /
                                          rel_scale(result_.objective);
      result_.status = exhausted && !uncertain ? SolveStatus::Optimal : SolveStatus::NotProven;
    } else {
      result_.stats.best_bound = best_open;
      result_.stats.gap = kInf;
      result_.status = exhausted && !uncertain ? SolveStatus::Infeasible : SolveStatus::NotProven;
    }
    return result_;
  }

 private:
  std::size_t select(const std::vector<BnbNode>& open) const {
    if (!have_incumbent_) return open.size() - 1;
    std::size_t best = 0;
    for (std::size_t i = 1; i < open.size(); ++i) {
      if (open[i].bound < open[best].bound ||
          (open[i].bound == open[best].bound && open[i].id < open[best].id))
        best = i;
    }
    return best;
  }

  bool pruned(double bound) const {
    if (!have_incumbent_) return false;
    return bound >= result_.objective - opts_.gap_tol * rel_scale(result_.objective);
  }

  void apply(const std::vector<std::int8_t>& fix) {
    for (std::size_t k = 0; k < fix.size(); ++k) {
      const auto j = lp_.integral[k];
      if (fix[k] < 0) solver_.set_bounds(j, lo_[k], hi_[k]);
      else solver_.set_bounds(j, fix[k], fix[k]);
    }
  }

  std::optional<std::size_t> most_fractional(const std::vector<double>& x, double tol) const {
    std::optional<std::size_t> best;
    double best_frac = tol;
    for (std::size_t k = 0; k < lp_.integral.size(); ++k) {
      const double v = x[lp_.integral[k]];
      const double frac = std::abs(v - std::round(v));
      if (frac > best_frac) {
        best_frac = frac;
        best = k;
      }
    }
    return best;
  }

  // Binaries within int_tol of {0, 1} are fixed at their rounded values and
  // the LP is re-solved, so the continuous part is exact for that fixing.
  // Returns false when rounding lost feasibility or objective, in which case
  // the node still needs branching.
  bool accept(const LpSolution& sol) {
    if (have_incumbent_ && !improves(sol.objective)) return true;
    bool exact = true;
    for (auto j : lp_.integral)
      if (sol.x[j] != std::round(sol.x[j])) exact = false;
    if (!exact) {
      for (auto j : lp_.integral) solver_.set_bounds(j, std::round(sol.x[j]), std::round(sol.x[j]));
      auto polished = solver_.solve();
      result_.stats.lp_iterations += polished.iterations;
      if (polished.status != SolveStatus::Optimal) {
        solver_.reset_basis();
        polished = solver_.solve();
        result_.stats.lp_iterations += polished.iterations;
      }
      if (polished.status != SolveStatus::Optimal) return false;
      const bool tight = polished.objective <= sol.objective + opts_.gap_tol * rel_scale(sol.objective);
      if (!have_incumbent_ || improves(polished.objective)) install(polished);
      return tight;
    }
    install(sol);
    return true;
  }

  void install(const LpSolution& sol) {
    auto x = sol.x;
    for (auto j : lp_.integral) x[j] = std::round(x[j]);
    have_incumbent_ = true;
    result_.x = std::move(x);
    result_.objective = sol.objective;
    ++result_.stats.incumbent_updates;
  }

  bool improves(double obj) const {
    return obj < result_.objective - 1e-12 * rel_scale(result_.objective);
  }

  const LinearProgram& lp_;
  SolverOptions opts_;
  LpSolver solver_;
  std::vector<double> lo_, hi_;
  BinaryFixing preferred_;
  MilpResult result_;
  bool have_incumbent_ = false;
  std::size_t next_id_ = 0;
};

}  // namespace detail

inline MilpResult solve_milp(const LinearProgram& lp, const SolverOptions& opts = {},
                             const std::optional<BinaryFixing>& warm = std::nullopt) {
  detail::Bnb bnb(lp, opts);
  if (warm) bnb.seed(*warm);
  return bnb.run();
}

// Enumerates every binary fixing (first integral variable is the most
// significant bit) and solves the remaining LP from a cold basis. Ties keep
// the earliest fixing.
inline MilpResult brute_force_milp(const LinearProgram& lp, const SolverOptions& opts = {}) {
  const std::size_t k = lp.integral.size();
  if (k > 20) throw std::invalid_argument("brute force limited to 20 binaries");
  LpSolver solver(lp, opts);
  MilpResult best;
  best.stats.gap = 0.0;
  bool found = false;
  bool uncertain = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    bool consistent = true;
    for (std::size_t t = 0; t < k; ++t) {
      const double v = static_cast<double>((mask >> (k - 1 - t)) & 1U);
      const auto j = lp.integral[t];
      if (v < lp.lower[j] || v > lp.upper[j]) {
        consistent = false;
        break;
      }
      solver.set_bounds(j, v, v);
    }
    if (!consistent) continue;
    ++best.stats.nodes;
    solver.reset_basis();
    const auto sol = solver.solve();
    best.stats.lp_iterations += sol.iterations;
    if (sol.status == SolveStatus::Unbounded) {
      best.status = SolveStatus::Unbounded;
      return best;
    }
    if (sol.status != SolveStatus::Optimal) {
      if (sol.status != SolveStatus::Infeasible) uncertain = true;
      continue;
    }
    if (!found || sol.objective < best.objective - 1e-9 * detail::rel_scale(best.objective)) {
      found = true;
      best.objective = sol.objective;
      best.x = sol.x;
      for (auto j : lp.integral) best.x[j] = std::round(best.x[j]);
      ++best.stats.incumbent_updates;
    }
  }
  best.status = found ? (uncertain ? SolveStatus::NotProven : SolveStatus::Optimal)
                      : (uncertain ? SolveStatus::NotProven : SolveStatus::Infeasible);
  best.stats.best_bound = found ? best.objective : kInf;
  return best;
}

}  // namespace fdplan
