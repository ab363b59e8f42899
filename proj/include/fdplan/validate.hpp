#pragma once

// Checks a plan against the exact model: every constraint family C0-C11 with
// Shannon capacities, plus nonnegative flows.
//
// Each row's violation is (lhs - rhs) / scale, where scale is |rhs| or, for a
// zero right-hand side, max(1, sum of |lhs terms|). Equalities report
// |lhs - rhs| / scale.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fdplan/model.hpp"
#include "fdplan/plan.hpp"

namespace fdplan {

namespace detail {

class FamilyAccumulator {
 public:
  explicit FamilyAccumulator(std::string family) { check_.family = std::move(family); }

  void le(double lhs, double rhs, double abs_terms, const std::string& where) {
    add((lhs - rhs) / scale(rhs, abs_terms), where);
  }
  void eq(double lhs, double rhs, double abs_terms, const std::string& where) {
    add(std::abs(lhs - rhs) / scale(rhs, abs_terms), where);
  }

  FamilyCheck done() {
    if (check_.rows == 0) check_.max_violation = 0.0;
    return check_;
  }

 private:
  static double scale(double rhs, double abs_terms) {
    return rhs != 0.0 ? std::abs(rhs) : std::max(1.0, abs_terms);
  }
  void add(double v, const std::string& where) {
    if (check_.rows == 0 || v > check_.max_violation) {
      check_.max_violation = v;
      check_.worst = where;
    }
    ++check_.rows;
  }
  FamilyCheck check_;
};

inline std::string link_label(const Scenario& s, std::size_t l) {
  return "link " + std::to_string(l) + " (" + std::to_string(s.links[l].from) + "->" +
         std::to_string(s.links[l].to) + ")";
}

}  // namespace detail

inline FeasibilityReport check_feasibility(const Scenario& s, const Plan& p, double tol = 1e-9,
                                           C5Direction c5_dl = C5Direction::AsPrinted) {
  using detail::FamilyAccumulator;
  using detail::link_label;
  check_plan_dimensions(s, p);
  const std::size_t nl = s.num_links();
  const std::size_t nf = s.num_subchannels();
  const std::size_t nn = s.num_nodes();
  const double ptil = s.total_power_budget();
  const double dem_ul = s.total_demand_ul();
  const double dem_dl = s.total_demand_dl();

  std::vector<double> link_power(nl, 0.0);
  for (std::size_t l = 0; l < nl; ++l)
    for (std::size_t f = 0; f < nf; ++f) link_power[l] += p.powers(l, f);

  FeasibilityReport r;
  r.tolerance = tol;

  {
    FamilyAccumulator c0("C0");
    for (std::size_t l = 0; l < nl; ++l)
      for (std::size_t f = 0; f < nf; ++f) {
        const double x = p.powers(l, f);
        c0.le(-x, 0.0, std::abs(x), link_label(s, l) + " subchannel " + std::to_string(f));
      }
    r.families.push_back(c0.done());
  }
  {
    FamilyAccumulator c1("C1");
    for (std::size_t l = 0; l < nl; ++l) {
      const double rhs = p.active_links[l] ? ptil : 0.0;
      c1.le(link_power[l], rhs, link_power[l], link_label(s, l));
    }
    r.families.push_back(c1.done());
  }
  {
    FamilyAccumulator c2("C2");
    for (std::size_t f = 0; f < nf; ++f) {
      double sum = 0.0;
      for (std::size_t l = 0; l < nl; ++l) sum += p.powers(l, f);
      c2.le(sum, p.active_subchannels[f] ? ptil : 0.0, sum, "subchannel " + std::to_string(f));
    }
    r.families.push_back(c2.done());
  }
  {
    FamilyAccumulator c3("C3");
    for (std::size_t l = 0; l < nl; ++l)
      c3.le(link_power[l], s.links[l].p_max_link, link_power[l], link_label(s, l));
    r.families.push_back(c3.done());
  }
  {
    FamilyAccumulator c4("C4");
    for (std::size_t i = 0; i < nn; ++i) {
      double sum = 0.0;
      bool any = false;
      for (std::size_t l = 0; l < nl; ++l)
        if (s.links[l].from == i) {
          sum += link_power[l];
          any = true;
        }
      if (any) c4.le(sum, s.nodes[i].power_budget, sum, "node " + std::to_string(i));
    }
    r.families.push_back(c4.done());
  }
  {
    FamilyAccumulator c5("C5");
    double ul = 0.0, dl = 0.0, ul_abs = 0.0, dl_abs = 0.0;
    for (std::size_t l = 0; l < nl; ++l) {
      const double d = s.nodes[s.links[l].from].proc_delay;
      const double d_dl =
          c5_dl == C5Direction::AsPrinted ? d : s.nodes[s.links[l].to].proc_delay;
      ul += d * p.flow_ul[l];
      dl += d_dl * p.flow_dl[l];
      ul_abs += std::abs(d * p.flow_ul[l]);
      dl_abs += std::abs(d_dl * p.flow_dl[l]);
    }
    c5.le(ul, s.limits.delay_ul * dem_ul, ul_abs, "uplink");
    c5.le(dl, s.limits.delay_dl * dem_dl, dl_abs, "downlink");
    r.families.push_back(c5.done());
  }
  {
    FamilyAccumulator c6("C6");
    for (std::size_t a = 0; a < s.spectrum.access_subchannels.size(); ++a) {
      const auto f = s.spectrum.access_subchannels[a];
      for (std::size_t m = 0; m < nn; ++m) {
        double sum = 0.0;
        for (std::size_t l = 0; l < nl; ++l) sum += s.gains.omega[l][m][f] * p.powers(l, f);
        c6.le(sum, s.limits.i_th[m][a], sum,
              "node " + std::to_string(m) + " subchannel " + std::to_string(f));
      }
    }
    r.families.push_back(c6.done());
  }
  {
    FamilyAccumulator c7("C7");
    for (std::size_t l = 0; l < nl; ++l) {
      double cap = s.links[l].wired_capacity;
      for (std::size_t f = 0; f < nf; ++f) cap += link_capacity(s, p.powers, l, f);
      const double flow = p.flow_ul[l] + p.flow_dl[l];
      c7.le(flow, cap, std::abs(p.flow_ul[l]) + std::abs(p.flow_dl[l]), link_label(s, l));
    }
    r.families.push_back(c7.done());
  }
  {
    FamilyAccumulator c8("C8"), c9("C9");
    for (std::size_t i = 0; i < nn; ++i) {
      if (s.nodes[i].is_root()) continue;
      double ul = 0.0, dl = 0.0, ul_abs = 0.0, dl_abs = 0.0;
      for (std::size_t l = 0; l < nl; ++l) {
        if (s.links[l].from == i) {
          ul += p.flow_ul[l];
          dl -= p.flow_dl[l];
        }
        if (s.links[l].to == i) {
          ul -= p.flow_ul[l];
          dl += p.flow_dl[l];
        }
        if (s.links[l].from == i || s.links[l].to == i) {
          ul_abs += std::abs(p.flow_ul[l]);
          dl_abs += std::abs(p.flow_dl[l]);
        }
      }
      c8.eq(ul, s.demand_ul(i), ul_abs, "node " + std::to_string(i));
      c9.eq(dl, s.demand_dl(i), dl_abs, "node " + std::to_string(i));
    }
    r.families.push_back(c8.done());
    r.families.push_back(c9.done());
  }
  {
    FamilyAccumulator c10("C10"), c11("C11");
    double ul = 0.0, dl = 0.0, ul_abs = 0.0, dl_abs = 0.0;
    for (std::size_t l = 0; l < nl; ++l) {
      if (s.nodes[s.links[l].to].is_root()) {
        ul += p.flow_ul[l];
        ul_abs += std::abs(p.flow_ul[l]);
      }
      if (s.nodes[s.links[l].from].is_root()) {
        dl += p.flow_dl[l];
        dl_abs += std::abs(p.flow_dl[l]);
      }
    }
    c10.eq(ul, dem_ul, ul_abs, "uplink into roots");
    c11.eq(dl, dem_dl, dl_abs, "downlink out of roots");
    r.families.push_back(c10.done());
    r.families.push_back(c11.done());
  }
  {
    FamilyAccumulator fn("flow_nonneg");
    for (std::size_t l = 0; l < nl; ++l) {
      fn.le(-p.flow_ul[l], 0.0, std::abs(p.flow_ul[l]), link_label(s, l) + " uplink");
      fn.le(-p.flow_dl[l], 0.0, std::abs(p.flow_dl[l]), link_label(s, l) + " downlink");
    }
    r.families.push_back(fn.done());
  }

  r.feasible = true;
  for (const auto& f : r.families)
    if (!(f.max_violation <= tol)) r.feasible = false;
  return r;
}

// Half-duplex stand-in: every self-interference gain is made so large that a
// node cannot transmit and receive on the same subchannel.
inline Scenario hd_variant(const Scenario& s, double si_gain = 1e6) {
  Scenario out = s;
  for (const auto& [aggressor, victim] : self_interference_pairs(s))
    for (std::size_t f = 0; f < s.num_subchannels(); ++f) out.gains.gamma[victim][aggressor][f] = si_gain;
  return out;
}

// Pairs of links that share a node as transmitter and receiver and are both
// powered on the same subchannel.
inline std::vector<std::pair<std::size_t, std::size_t>> co_channel_tx_rx(const Scenario& s,
                                                                       const Plan& p) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [a, v] : self_interference_pairs(s))
    for (std::size_t f = 0; f < s.num_subchannels(); ++f)
      if (p.powers(a, f) > 0.0 && p.powers(v, f) > 0.0) {
        out.emplace_back(a, v);
        break;
      }
  return out;
}

}  // namespace fdplan
