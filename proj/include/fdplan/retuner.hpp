#pragma once

// Power re-tuning on a fixed set of links and subchannels by successive inner
// approximation: each step minimizes total power over a linearized capacity
// region that is exact at the previous point and contained in the true one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdplan/approx.hpp"
#include "fdplan/formulation.hpp"
#include "fdplan/log.hpp"
#include "fdplan/model.hpp"
#include "fdplan/plan.hpp"
#include "fdplan/planner.hpp"
#include "fdplan/simplex.hpp"
#include "fdplan/validate.hpp"

namespace fdplan {

struct RetuneOptions {
  std::size_t segments = 32;
  std::size_t max_outer_iters = 50;
  double rel_power_tol = 1e-5;      // times the total power budget
  double stationarity_tol = 1e-4;   // times the total power budget
  std::size_t max_restoration_iters = 20;
  double validation_tol = 1e-9;
  SolverOptions solver;
  FormulationOptions formulation;
};

struct RetuneResult {
  PlanStatus status = PlanStatus::Infeasible;
  Plan plan;
  IterationTrace trace;
  std::string diagnosis;
  std::size_t iterations = 0;
  double delta_total_power = 0.0;  // output minus input
  bool restored = false;           // a feasibility restoration phase ran
  bool stationary = false;
};

inline constexpr const char* kReplanRequired =
    "re-plan required: the fixed links and subchannels cannot carry the demand";

// True when no single power can be lowered by delta (or to zero, if smaller)
// with flows held fixed while the plan stays exactly feasible.
inline bool stationarity_probe(const Scenario& s, const Plan& p, double delta, double tol = 1e-9,
                               C5Direction c5_dl = C5Direction::AsPrinted) {
  for (std::size_t l = 0; l < s.num_links(); ++l)
    for (std::size_t f = 0; f < s.num_subchannels(); ++f) {
      const double x = p.powers(l, f);
      if (!(x > 0.0)) continue;
      Plan q = p;
      q.powers(l, f) = x - std::min(delta, x);
      if (check_feasibility(s, q, tol, c5_dl).feasible) return false;
    }
  return true;
}

namespace detail {

// Retune LP with one elastic variable per C7 row; the objective is the total
// elasticity, so a zero optimum means the linearized region is nonempty.
inline LinearProgram elastic_c7(const Formulation& form) {
  LinearProgram lp = form.lp;
  std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
  for (std::size_t k = 0; k < form.c7_rows.size(); ++k) {
    const auto e = lp.add_var(0.0, kInf, 1.0, lp.var_names.empty() ? "" : nm("e", k));
    lp.le_rows[form.c7_rows[k]].push_back({e, -1.0});
  }
  return lp;
}

inline PowerVector project_to_box(const Scenario& s, const PowerVector& p,
                                  const std::vector<bool>& links, const std::vector<bool>& subs) {
  PowerVector out = PowerVector::zeros(s);
  for (std::size_t l = 0; l < s.num_links(); ++l)
    for (std::size_t f = 0; f < s.num_subchannels(); ++f)
      if (links[l] && subs[f]) out(l, f) = std::clamp(p(l, f), 0.0, s.power_box(l));
  return out;
}

}  // namespace detail

inline RetuneResult retune(const Scenario& s, const Plan& current, const RetuneOptions& opts = {}) {
  if (opts.segments == 0 || opts.max_outer_iters == 0 || !(opts.rel_power_tol > 0.0) ||
      !(opts.stationarity_tol > 0.0))
    throw std::invalid_argument("retune options must be positive");
  if (auto bad = validate_scenario(s); !bad.empty())
    throw std::invalid_argument("invalid scenario: " + bad.front().field + " " + bad.front().rule);
  cross_check_links(s, current);

  const double ptil = s.total_power_budget();
  const auto links = indices_of(current.active_links);
  const auto subs = indices_of(current.active_subchannels);
  const auto c5 = opts.formulation.c5_dl_direction;

  RetuneResult out;
  auto finish = [&](Plan p) {
    p.active_links = current.active_links;
    p.active_subchannels = current.active_subchannels;
    p.link_ids = link_ends(s);
    p.exact_capacities = exact_capacities(s, p.powers);
    p.cost = network_cost(s, p);
    const auto report = check_feasibility(s, p, opts.validation_tol, c5);
    p.feasible = report.feasible;
    p.validation = report;
    return p;
  };

  const PowerVector start =
      detail::project_to_box(s, current.powers, current.active_links, current.active_subchannels);
  PowerVector point = start;

  if (links.empty() || subs.empty()) {
    Plan p = current;
    p.powers = point;
    out.plan = finish(p);
    out.status = out.plan.feasible ? PlanStatus::Optimal : PlanStatus::Infeasible;
    if (!out.plan.feasible) out.diagnosis = kReplanRequired;
    out.stationary = true;
    out.delta_total_power = out.plan.powers.total() - current.powers.total();
    return out;
  }

  auto fail = [&](std::string why) {
    out.status = PlanStatus::Infeasible;
    out.diagnosis = std::move(why);
    Plan p = current;
    p.powers = start;
    out.plan = finish(p);
    out.plan.trace = out.trace;
    out.delta_total_power = out.plan.powers.total() - current.powers.total();
    return out;
  };

  std::optional<Plan> best;
  bool not_proven = false;
  for (std::size_t m = 1; m <= opts.max_outer_iters; ++m) {
    const auto approx = build_approx(s, point, opts.segments);
    const auto form = build_retune_lp(s, links, subs, approx, opts.formulation);
    auto sol = solve_lp(form.lp, opts.solver);

    if (sol.status == SolveStatus::Infeasible && m == 1 && !out.restored) {
      // Drifted scenario: walk the expansion point toward the capacity region
      // by minimizing total C7 shortfall, re-linearizing after each step.
      out.restored = true;
      bool ok = false;
      for (std::size_t r = 0; r < opts.max_restoration_iters && !ok; ++r) {
        const auto a = build_approx(s, point, opts.segments);
        const auto f = build_retune_lp(s, links, subs, a, opts.formulation);
        const auto rs = solve_lp(detail::elastic_c7(f), opts.solver);
        if (rs.status != SolveStatus::Optimal) return fail(kReplanRequired);
        std::vector<double> x(rs.x.begin(), rs.x.begin() + static_cast<std::ptrdiff_t>(f.index.total));
        const Plan p = extract_plan(s, f.index, x, opts.solver.int_tol);
        const double shortfall = rs.objective;
        const double moved = max_abs_difference(p.powers, point);
        log::debug("restoration step " + std::to_string(r + 1) + ": shortfall " + std::to_string(shortfall));
        point = p.powers;
        ok = shortfall <= 1e-9 * std::max({1.0, s.total_demand_ul(), s.total_demand_dl()});
        if (!ok && moved < opts.rel_power_tol * ptil) return fail(kReplanRequired);
      }
      if (!ok) return fail(kReplanRequired);
      --m;
      continue;
    }
    if (sol.status != SolveStatus::Optimal) {
      if (sol.status != SolveStatus::Infeasible) not_proven = true;
      if (!best) return fail(sol.status == SolveStatus::Infeasible ? std::string(kReplanRequired)
                                                                    : "solver stopped: " + to_string(sol.status));
      break;
    }

    Plan p = finish(extract_plan(s, form.index, sol.x, opts.solver.int_tol));
    TraceEntry e;
    e.iteration = m;
    e.cost = p.powers.total();
    e.status = to_string(sol.status);
    e.max_power_change = max_abs_difference(p.powers, point);
    out.trace.entries.push_back(e);
    out.iterations = m;
    if (!p.feasible) log::error("retune iteration " + std::to_string(m) + " fails exact validation");
    if (p.feasible && (!best || p.powers.total() < best->powers.total())) best = p;

    point = p.powers;
    if (e.max_power_change < opts.rel_power_tol * ptil) break;
  }

  if (!best) return fail("no re-tuned iterate passed exact validation");
  out.plan = *best;
  if (std::abs(best->powers.total() - start.total()) < opts.rel_power_tol * ptil) {
    // Within the convergence tolerance of the input: keep the input powers.
    Plan p = current;
    p.powers = start;
    p = finish(p);
    if (p.feasible) out.plan = p;
  }
  out.plan.trace = out.trace;
  out.status = not_proven ? PlanStatus::NotProven : PlanStatus::Optimal;
  out.delta_total_power = out.plan.powers.total() - current.powers.total();
  out.stationary = stationarity_probe(s, out.plan, opts.stationarity_tol * ptil, opts.validation_tol, c5);
  return out;
}

}  // namespace fdplan
