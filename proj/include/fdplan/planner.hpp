#pragma once

// Iterative minimum-cost planning: linearize capacities around the previous
// power vector, solve the planning MILP, repeat until the plan stops moving.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>

#include "fdplan/approx.hpp"
#include "fdplan/formulation.hpp"
#include "fdplan/log.hpp"
#include "fdplan/milp.hpp"
#include "fdplan/model.hpp"
#include "fdplan/plan.hpp"
#include "fdplan/validate.hpp"

namespace fdplan {

enum class MilpEngine { BranchAndBound, BruteForce };

enum class PlanStatus { Optimal, Infeasible, NotProven };

inline std::string to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Optimal: return "optimal";
    case PlanStatus::Infeasible: return "infeasible";
    case PlanStatus::NotProven: return "not_proven";
  }
  return "unknown";
}

struct PlanOptions {
  std::size_t segments = 16;
  std::size_t max_outer_iters = 20;
  double rel_cost_tol = 1e-4;
  double power_change_tol = 1e-6;  // times the total power budget
  double validation_tol = 1e-9;
  SolverOptions solver;
  FormulationOptions formulation;
  MilpEngine engine = MilpEngine::BranchAndBound;
  bool warm_start = true;
};

struct PlanResult {
  PlanStatus status = PlanStatus::Infeasible;
  Plan plan;
  IterationTrace trace;
  std::string diagnosis;
  std::size_t iterations = 0;
};

// Every link on every subchannel, each link at the largest even share of its
// cap and its transmitter's budget.
inline PowerVector initial_point(const Scenario& s) {
  PowerVector p = PowerVector::zeros(s);
  if (s.num_subchannels() == 0) return p;
  const auto deg = out_degree(s);
  const double nf = static_cast<double>(s.num_subchannels());
  for (std::size_t l = 0; l < s.num_links(); ++l) {
    const auto& link = s.links[l];
    const double share =
        std::min(link.p_max_link, s.nodes[link.from].power_budget / static_cast<double>(deg[link.from]));
    for (std::size_t f = 0; f < s.num_subchannels(); ++f) p(l, f) = share / nf;
  }
  return p;
}

namespace detail {

struct FlowEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = 0.0;
};

// Capacities are rounded up to whole bits/s: the push-relabel implementation
// checks flow conservation exactly, and rounding up keeps the cut bound valid.
inline double max_flow(std::size_t vertices, const std::vector<FlowEdge>& edges, std::size_t source,
                       std::size_t sink) {
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, std::int64_t,
                      boost::property<boost::edge_residual_capacity_t, std::int64_t,
                                      boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;
  constexpr double cap_limit = 1e15;
  Graph g(vertices);
  auto cap = boost::get(boost::edge_capacity, g);
  auto rev = boost::get(boost::edge_reverse, g);
  for (const auto& e : edges) {
    auto fwd = boost::add_edge(e.from, e.to, g).first;
    auto back = boost::add_edge(e.to, e.from, g).first;
    cap[fwd] = static_cast<std::int64_t>(std::ceil(std::min(e.capacity, cap_limit)));
    cap[back] = 0;
    rev[fwd] = back;
    rev[back] = fwd;
  }
  return static_cast<double>(boost::push_relabel_max_flow(g, source, sink));
}

// Wired capacity plus noise-limited wireless capacity at full power on every
// subchannel: no plan can carry more over the link.
inline std::vector<double> link_capacity_ceiling(const Scenario& s) {
  std::vector<double> out(s.num_links());
  for (std::size_t l = 0; l < s.num_links(); ++l) {
    out[l] = s.links[l].wired_capacity;
    for (std::size_t f = 0; f < s.num_subchannels(); ++f) out[l] += capacity_bound(s, l, f);
  }
  return out;
}

inline std::vector<bool> reachable(const Scenario& s, const std::vector<double>& cap,
                                   const std::vector<std::size_t>& starts, bool forward) {
  std::vector<bool> seen(s.num_nodes(), false);
  std::vector<std::size_t> stack = starts;
  for (auto v : starts) seen[v] = true;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (std::size_t l = 0; l < s.num_links(); ++l) {
      if (!(cap[l] > 0.0)) continue;
      const auto a = forward ? s.links[l].from : s.links[l].to;
      const auto b = forward ? s.links[l].to : s.links[l].from;
      if (a == v && !seen[b]) {
        seen[b] = true;
        stack.push_back(b);
      }
    }
  }
  return seen;
}

}  // namespace detail

// Checks uplink and downlink demand separately against a max-flow bound on
// the best-case link capacities. Returns an explanation when some demand
// cannot possibly be routed, nothing otherwise.
inline std::optional<std::string> diagnose_capacity(const Scenario& s) {
  const std::size_t nn = s.num_nodes();
  const auto cap = detail::link_capacity_ceiling(s);
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < nn; ++i)
    if (s.nodes[i].is_root()) roots.push_back(i);
  const std::size_t src = nn, sink = nn + 1;
  std::ostringstream msg;
  msg.precision(6);
  bool bad = false;

  const double dem_ul = s.total_demand_ul();
  if (dem_ul > 0.0) {
    std::vector<detail::FlowEdge> edges;
    for (std::size_t i = 0; i < nn; ++i)
      if (s.demand_ul(i) > 0.0) edges.push_back({src, i, s.demand_ul(i)});
    for (std::size_t l = 0; l < s.num_links(); ++l)
      if (cap[l] > 0.0) edges.push_back({s.links[l].from, s.links[l].to, cap[l]});
    for (auto r : roots) edges.push_back({r, sink, dem_ul});
    const double flow = detail::max_flow(nn + 2, edges, src, sink);
    if (flow < std::floor(dem_ul * (1.0 - 1e-9))) {
      bad = true;
      msg << "uplink demand " << dem_ul << " bit/s exceeds the cut capacity " << flow
          << " bit/s toward the roots (C7, C8, C10)";
      const auto to_root = detail::reachable(s, cap, roots, false);
      for (std::size_t i = 0; i < nn; ++i)
        if (s.demand_ul(i) > 0.0 && !to_root[i]) msg << "; node " << i << " has no path to a root";
    }
  }
  const double dem_dl = s.total_demand_dl();
  if (dem_dl > 0.0) {
    std::vector<detail::FlowEdge> edges;
    for (auto r : roots) edges.push_back({src, r, dem_dl});
    for (std::size_t l = 0; l < s.num_links(); ++l)
      if (cap[l] > 0.0) edges.push_back({s.links[l].from, s.links[l].to, cap[l]});
    for (std::size_t i = 0; i < nn; ++i)
      if (s.demand_dl(i) > 0.0) edges.push_back({i, sink, s.demand_dl(i)});
    const double flow = detail::max_flow(nn + 2, edges, src, sink);
    if (flow < std::floor(dem_dl * (1.0 - 1e-9))) {
      if (bad) msg << "\n";
      bad = true;
      msg << "downlink demand " << dem_dl << " bit/s exceeds the cut capacity " << flow
          << " bit/s out of the roots (C7, C9, C11)";
      const auto from_root = detail::reachable(s, cap, roots, true);
      for (std::size_t i = 0; i < nn; ++i)
        if (s.demand_dl(i) > 0.0 && !from_root[i]) msg << "; node " << i << " is not reachable from a root";
    }
  }
  if (!bad) return std::nullopt;
  return msg.str();
}

namespace detail {

inline std::optional<Plan> solve_pattern(const Scenario& s, const CapacityApprox& approx,
                                         const std::vector<bool>& pairs, const Plan& milp_plan,
                                         const PlanOptions& opts) {
  const auto form = build_fixed_pattern_lp(s, approx, pairs, opts.formulation);
  const auto sol = solve_lp(form.lp, opts.solver);
  if (sol.status != SolveStatus::Optimal) return std::nullopt;
  Plan p = extract_plan(s, form.index, sol.x, opts.solver.int_tol);
  for (std::size_t l = 0; l < s.num_links(); ++l)
    p.active_links[l] = p.active_links[l] || milp_plan.active_links[l];
  for (std::size_t f = 0; f < s.num_subchannels(); ++f)
    p.active_subchannels[f] = p.active_subchannels[f] || milp_plan.active_subchannels[f];
  p.cost = network_cost(s, p);
  if (!check_feasibility(s, p, opts.validation_tol, opts.formulation.c5_dl_direction).feasible)
    return std::nullopt;
  return p;
}

// Re-solves the power LP on the MILP's activation pattern. Near the noise
// floor the capacity rows of the MILP mix coefficients many orders of
// magnitude apart, and the gated interference rows admit errors of the order
// of the solver tolerance times the interference bound; the fixed-pattern LP
// avoids both. Pairs the MILP switched on without using are tried without
// first, and powers too small to matter are pruned while the plan stays
// exactly feasible. Returns nothing when no pattern gives a valid plan.
inline std::optional<Plan> polish(const Scenario& s, const CapacityApprox& approx, const VarIndex& vi,
                                  const std::vector<double>& x, const Plan& milp_plan, const PlanOptions& opts) {
  const std::size_t nl = s.num_links(), nf = s.num_subchannels();
  std::vector<bool> on(nl * nf), used(nl * nf);
  for (std::size_t l = 0; l < nl; ++l)
    for (std::size_t f = 0; f < nf; ++f) {
      on[l * nf + f] = x[vi.y(l, f)] > 0.5;
      used[l * nf + f] = on[l * nf + f] && (x[vi.x(l, f)] > 0.0 || x[vi.ct(l, f)] > 0.0);
    }
  std::optional<Plan> best;
  std::vector<bool> pattern;
  for (const auto* cand : {&used, &on}) {
    if (best && *cand == pattern) continue;
    if (auto p = solve_pattern(s, approx, *cand, milp_plan, opts);
        p && (!best || p->cost.total < best->cost.total)) {
      best = std::move(p);
      pattern = *cand;
    }
  }
  for (std::size_t round = 0; best && round < 4; ++round) {
    std::vector<bool> pruned = pattern;
    bool changed = false;
    for (std::size_t l = 0; l < nl; ++l)
      for (std::size_t f = 0; f < nf; ++f)
        if (pruned[l * nf + f] && best->powers(l, f) < 1e-9 * s.power_box(l)) {
          pruned[l * nf + f] = false;
          changed = true;
        }
    if (!changed) break;
    auto p = solve_pattern(s, approx, pruned, milp_plan, opts);
    if (!p || p->cost.total > best->cost.total * (1.0 + opts.solver.gap_tol)) break;
    best = std::move(p);
    pattern = std::move(pruned);
  }
  return best;
}

inline MilpResult run_engine(const LinearProgram& lp, const PlanOptions& opts,
                             const std::optional<BinaryFixing>& warm) {
  if (opts.engine == MilpEngine::BruteForce) return brute_force_milp(lp, opts.solver);
  return solve_milp(lp, opts.solver, opts.warm_start ? warm : std::nullopt);
}

}  // namespace detail

inline PlanResult plan(const Scenario& s, const PlanOptions& opts = {}) {
  if (opts.segments == 0 || opts.max_outer_iters == 0 || !(opts.rel_cost_tol > 0.0) ||
      !(opts.power_change_tol > 0.0))
    throw std::invalid_argument("plan options must be positive");
  if (auto bad = validate_scenario(s); !bad.empty())
    throw std::invalid_argument("invalid scenario: " + bad.front().field + " " + bad.front().rule);

  PlanResult out;
  out.plan = empty_plan(s);
  if (auto why = diagnose_capacity(s)) {
    out.status = PlanStatus::Infeasible;
    out.diagnosis = *why;
    log::info("capacity pre-check failed: " + *why);
    return out;
  }

  const double ptil = s.total_power_budget();
  PowerVector point = initial_point(s);
  bool tried_zero = false;
  bool not_proven = false;
  std::optional<BinaryFixing> warm;
  std::optional<Plan> best;
  std::optional<double> prev_cost;

  for (std::size_t m = 1; m <= opts.max_outer_iters;) {
    const auto approx = build_approx(s, point, opts.segments);
    const auto form = build_milp(s, approx, opts.formulation);
    const auto res = detail::run_engine(form.lp, opts, warm);
    log::debug("iteration " + std::to_string(m) + ": " + to_string(res.status) + ", " +
               std::to_string(res.stats.nodes) + " nodes");

    if (res.x.empty()) {
      if (m == 1 && !tried_zero && res.status == SolveStatus::Infeasible) {
        // The linearization around full power can be too pessimistic; start
        // over from the interference-free point.
        tried_zero = true;
        point = PowerVector::zeros(s);
        warm.reset();
        log::info("infeasible around the initial point, retrying from zero power");
        continue;
      }
      if (res.status != SolveStatus::Infeasible) not_proven = true;
      if (!best) {
        out.diagnosis = res.status == SolveStatus::Infeasible
                            ? "the linearized planning problem is infeasible (check delay limits C5, "
                              "interference thresholds C6 and power budgets C3, C4)"
                            : "the solver stopped before finding a plan (" + to_string(res.status) + ")";
      }
      break;
    }
    if (res.status != SolveStatus::Optimal) not_proven = true;

    Plan p = extract_plan(s, form.index, res.x, opts.solver.int_tol);
    if (auto q = detail::polish(s, approx, form.index, res.x, p, opts)) p = std::move(*q);
    const auto report = check_feasibility(s, p, opts.validation_tol, opts.formulation.c5_dl_direction);
    p.feasible = report.feasible;
    p.validation = report;

    TraceEntry e;
    e.iteration = m;
    e.cost = p.cost.total;
    e.status = to_string(res.status);
    e.max_power_change = max_abs_difference(p.powers, point);
    e.nodes = res.stats.nodes;
    e.gap = res.stats.gap;
    e.incumbent_updates = res.stats.incumbent_updates;
    out.trace.entries.push_back(e);
    out.iterations = m;
    if (!report.feasible)
      for (const auto& fam : report.families)
        if (!(fam.max_violation <= report.tolerance))
          log::error("iteration " + std::to_string(m) + " plan violates " + fam.family + " by " +
                     std::to_string(fam.max_violation) + " at " + fam.worst);

    if (p.feasible && (!best || p.cost.total < best->cost.total)) best = p;

    const bool cost_stable =
        prev_cost && std::abs(p.cost.total - *prev_cost) <= opts.rel_cost_tol * std::abs(*prev_cost);
    const bool power_stable = e.max_power_change < opts.power_change_tol * ptil;
    prev_cost = p.cost.total;
    warm = binary_fixing(form.index, p);
    point = p.powers;
    if (p.cost.total == 0.0 || (cost_stable && power_stable)) break;
    ++m;
  }

  if (best) {
    out.plan = *best;
    out.status = not_proven ? PlanStatus::NotProven : PlanStatus::Optimal;
  } else if (!out.trace.empty()) {
    out.status = PlanStatus::NotProven;
    out.diagnosis = "no iterate passed exact validation";
  } else {
    out.status = not_proven ? PlanStatus::NotProven : PlanStatus::Infeasible;
  }
  out.plan.trace = out.trace;
  return out;
}

}  // namespace fdplan
