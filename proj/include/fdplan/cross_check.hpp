#pragma once

// Compares branch-and-bound against exhaustive enumeration on the first
// planning MILP of a small scenario.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "fdplan/approx.hpp"
#include "fdplan/formulation.hpp"
#include "fdplan/milp.hpp"
#include "fdplan/planner.hpp"

namespace fdplan {

struct ComparisonReport {
  std::size_t binaries = 0;
  SolveStatus bnb_status = SolveStatus::Stalled;
  SolveStatus brute_status = SolveStatus::Stalled;
  double bnb_objective = kInf;
  double brute_objective = kInf;
  double relative_delta = 0.0;  // |bnb - brute| / max(1, |brute|), 0 when both lack a solution
  bool status_agrees = false;
  bool fixing_agrees = false;
};

inline constexpr std::size_t kCrossCheckMaxBinaries = 10;

inline ComparisonReport cross_check_lp(const LinearProgram& lp, const SolverOptions& opts = {}) {
  if (lp.integral.size() > kCrossCheckMaxBinaries)
    throw std::invalid_argument("cross check needs at most " + std::to_string(kCrossCheckMaxBinaries) +
                                " binaries, got " + std::to_string(lp.integral.size()));
  const auto a = solve_milp(lp, opts);
  const auto b = brute_force_milp(lp, opts);
  ComparisonReport r;
  r.binaries = lp.integral.size();
  r.bnb_status = a.status;
  r.brute_status = b.status;
  r.bnb_objective = a.objective;
  r.brute_objective = b.objective;
  r.status_agrees = a.status == b.status;
  const bool both = !a.x.empty() && !b.x.empty();
  r.relative_delta = both ? std::abs(a.objective - b.objective) / std::max(1.0, std::abs(b.objective))
                     : (a.x.empty() && b.x.empty() ? 0.0 : kInf);
  r.fixing_agrees = both || (a.x.empty() && b.x.empty());
  if (both)
    for (auto j : lp.integral)
      if (a.x[j] != b.x[j]) r.fixing_agrees = false;
  return r;
}

// First-iteration planning MILP, linearized at the initial point.
inline ComparisonReport cross_check_small(const Scenario& s, const PlanOptions& opts = {}) {
  const auto approx = build_approx(s, initial_point(s), opts.segments);
  const auto form = build_milp(s, approx, opts.formulation);
  return cross_check_lp(form.lp, opts.solver);
}

}  // namespace fdplan
