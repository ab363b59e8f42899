#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdplan/model.hpp"

namespace fdplan {

// Which links the downlink delay row (C5) sums over for each node.
enum class C5Direction { AsPrinted, Incoming };

inline std::string to_string(C5Direction d) {
  return d == C5Direction::AsPrinted ? "as-printed" : "incoming";
}

struct CostBreakdown {
  double power = 0.0;
  double link = 0.0;
  double spectrum = 0.0;
  double total = 0.0;

  bool operator==(const CostBreakdown&) const = default;
};

// One outer iteration of the planner or the re-tuner.
struct TraceEntry {
  std::size_t iteration = 0;
  double cost = 0.0;  // network cost for planning, total power for re-tuning
  std::string status;
  double max_power_change = 0.0;
  std::size_t nodes = 0;  // branch-and-bound nodes, 0 for pure LPs
  double gap = 0.0;
  std::size_t incumbent_updates = 0;

  bool operator==(const TraceEntry&) const = default;
};

struct IterationTrace {
  std::vector<TraceEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  bool operator==(const IterationTrace&) const = default;
};

inline void write_trace_csv(const IterationTrace& trace, std::ostream& os) {
  os << "iteration,cost,gap,nodes,max_power_change,status\n";
  auto old_precision = os.precision(17);
  for (const auto& e : trace.entries)
    os << e.iteration << ',' << e.cost << ',' << e.gap << ',' << e.nodes << ','
       << e.max_power_change << ',' << e.status << '\n';
  os.precision(old_precision);
}

struct FamilyCheck {
  std::string family;  // "C0" .. "C11", "flow_nonneg"
  double max_violation = 0.0;
  std::size_t rows = 0;
  std::string worst;  // human-readable location of the worst row

  bool operator==(const FamilyCheck&) const = default;
};

struct FeasibilityReport {
  std::vector<FamilyCheck> families;
  double tolerance = 0.0;
  bool feasible = true;

  const FamilyCheck* find(const std::string& family) const {
    for (const auto& f : families)
      if (f.family == family) return &f;
    return nullptr;
  }

  double max_violation(const std::string& family) const {
    const auto* f = find(family);
    if (!f) throw std::out_of_range("unknown constraint family " + family);
    return f->max_violation;
  }

  bool operator==(const FeasibilityReport&) const = default;
};

struct LinkEnds {
  std::size_t from = 0;
  std::size_t to = 0;

  bool operator==(const LinkEnds&) const = default;
};

struct Plan {
  PowerVector powers;
  std::vector<double> flow_ul;  // bits/s per link
  std::vector<double> flow_dl;
  std::vector<bool> active_links;
  std::vector<bool> active_subchannels;
  Matrix exact_capacities;  // [link][subchannel], bits/s
  CostBreakdown cost;
  bool feasible = false;
  std::vector<LinkEnds> link_ids;  // endpoints, used to cross-check against a scenario
  IterationTrace trace;
  std::optional<FeasibilityReport> validation;

  std::size_t num_active_links() const {
    std::size_t n = 0;
    for (bool b : active_links) n += b ? 1 : 0;
    return n;
  }
  std::size_t num_active_subchannels() const {
    std::size_t n = 0;
    for (bool b : active_subchannels) n += b ? 1 : 0;
    return n;
  }

  bool operator==(const Plan&) const = default;
};

inline void check_plan_dimensions(const Scenario& s, const Plan& p) {
  const auto nl = s.num_links();
  const auto nf = s.num_subchannels();
  bool ok = p.powers.x.size() == nl && p.flow_ul.size() == nl && p.flow_dl.size() == nl &&
            p.active_links.size() == nl && p.active_subchannels.size() == nf;
  for (const auto& row : p.powers.x) ok = ok && row.size() == nf;
  if (!ok) throw std::invalid_argument("plan dimensions do not match scenario");
}

// Throws when the plan's link list names links the scenario does not have.
inline void cross_check_links(const Scenario& s, const Plan& p) {
  check_plan_dimensions(s, p);
  if (p.link_ids.empty()) return;
  if (p.link_ids.size() != s.num_links())
    throw std::invalid_argument("plan link list length differs from scenario");
  for (std::size_t l = 0; l < s.num_links(); ++l) {
    if (p.link_ids[l].from != s.links[l].from || p.link_ids[l].to != s.links[l].to)
      throw std::invalid_argument("plan link " + std::to_string(l) + " (" +
                                  std::to_string(p.link_ids[l].from) + "->" +
                                  std::to_string(p.link_ids[l].to) +
                                  ") is not link " + std::to_string(l) + " of the scenario");
  }
}

inline std::vector<LinkEnds> link_ends(const Scenario& s) {
  std::vector<LinkEnds> out;
  out.reserve(s.num_links());
  for (const auto& l : s.links) out.push_back({l.from, l.to});
  return out;
}

inline CostBreakdown network_cost(const Scenario& s, const Plan& plan) {
  check_plan_dimensions(s, plan);
  CostBreakdown c;
  c.power = s.costs.w_power * plan.powers.total();
  c.link = s.costs.w_link * static_cast<double>(plan.num_active_links());
  double exclusive = 0.0;
  for (std::size_t f = 0; f < s.num_subchannels(); ++f)
    if (plan.active_subchannels[f] && !s.spectrum.is_access(f)) exclusive += 1.0;
  c.spectrum = s.costs.w_spectrum * exclusive;
  c.total = c.power + c.link + c.spectrum;
  return c;
}

inline Matrix exact_capacities(const Scenario& s, const PowerVector& p) {
  auto caps = make_matrix(s.num_links(), s.num_subchannels());
  for (std::size_t l = 0; l < s.num_links(); ++l)
    for (std::size_t f = 0; f < s.num_subchannels(); ++f) caps[l][f] = link_capacity(s, p, l, f);
  return caps;
}

inline Plan empty_plan(const Scenario& s) {
  Plan p;
  p.powers = PowerVector::zeros(s);
  p.flow_ul.assign(s.num_links(), 0.0);
  p.flow_dl.assign(s.num_links(), 0.0);
  p.active_links.assign(s.num_links(), false);
  p.active_subchannels.assign(s.num_subchannels(), false);
  p.exact_capacities = make_matrix(s.num_links(), s.num_subchannels());
  p.link_ids = link_ends(s);
  return p;
}

}  // namespace fdplan
