#pragma once

// Builds the linearized planning MILP and the re-tuning LP from a scenario and
// a capacity approximation, and maps solver vectors back to plans.
//
// Variable blocks, in order:
//   X[l][f]    transmit power
//   Cul[l]     uplink flow
//   Cdl[l]     downlink flow
//   Ct[l][f]   wireless capacity credited to (l, f)
//   Jl[l]      link activation (binary)
//   Jf[f]      subchannel activation (binary)
//   Y[l][f]    (link, subchannel) activation (binary)
//   I[l][f]    interference at the receiver of (l, f)
// The re-tuning LP has no Jl, Jf, Y or I blocks.
//
// A capacity row for piece k of (l, f) reads
//   Ct - a_k*lambda*X_l + (c - a_k)*I <= rhs_k + M_k*(1 - Y)
// where a_k is the chord slope and c the tangent slope. I is pinned to
// sum gamma*X_a when Y = 1 and may drop to zero when Y = 0. With Y = 0 the
// pair carries no power and no capacity, and the row is switched off; M_k only
// has to cover the noise-floor value of the row, so it stays of the order of
// B*log2(t0/W) whatever the interference gains are. The re-tuning LP writes
// the interference sum out in place of I.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdplan/approx.hpp"
#include "fdplan/lp.hpp"
#include "fdplan/model.hpp"
#include "fdplan/plan.hpp"

namespace fdplan {

struct FormulationOptions {
  C5Direction c5_dl_direction = C5Direction::AsPrinted;
  // Capacity rows are tightened by backoff*B so that plans keep a small
  // margin against rounding when re-checked with exact capacities.
  double backoff = 1e-9;
  bool names = true;
};

struct VarIndex {
  std::size_t num_links = 0;
  std::size_t num_subchannels = 0;
  bool binaries = false;

  std::size_t x0 = 0, cul0 = 0, cdl0 = 0, ct0 = 0, jl0 = 0, jf0 = 0, y0 = 0, i0 = 0, total = 0;

  static VarIndex make(std::size_t links, std::size_t subchannels, bool with_binaries) {
    VarIndex v;
    v.num_links = links;
    v.num_subchannels = subchannels;
    v.binaries = with_binaries;
    const std::size_t lf = links * subchannels;
    v.x0 = 0;
    v.cul0 = v.x0 + lf;
    v.cdl0 = v.cul0 + links;
    v.ct0 = v.cdl0 + links;
    v.jl0 = v.ct0 + lf;
    v.jf0 = v.jl0 + (with_binaries ? links : 0);
    v.y0 = v.jf0 + (with_binaries ? subchannels : 0);
    v.i0 = v.y0 + (with_binaries ? lf : 0);
    v.total = v.i0 + (with_binaries ? lf : 0);
    return v;
  }

  std::size_t x(std::size_t l, std::size_t f) const { return x0 + l * num_subchannels + f; }
  std::size_t cul(std::size_t l) const { return cul0 + l; }
  std::size_t cdl(std::size_t l) const { return cdl0 + l; }
  std::size_t ct(std::size_t l, std::size_t f) const { return ct0 + l * num_subchannels + f; }
  std::size_t jl(std::size_t l) const { return need(jl0 + l); }
  std::size_t jf(std::size_t f) const { return need(jf0 + f); }
  std::size_t y(std::size_t l, std::size_t f) const { return need(y0 + l * num_subchannels + f); }
  std::size_t intf(std::size_t l, std::size_t f) const {
    return need(i0 + l * num_subchannels + f);
  }

  bool operator==(const VarIndex&) const = default;

 private:
  std::size_t need(std::size_t i) const {
    if (!binaries) throw std::logic_error("variable block absent from this formulation");
    return i;
  }
};

struct Formulation {
  LinearProgram lp;
  VarIndex index;
  std::vector<std::size_t> c7_rows;  // positions in lp.le_rows, one per link
};

namespace detail {

inline std::string nm(const char* base, std::size_t a) { return base + std::to_string(a); }
inline std::string nm(const char* base, std::size_t a, std::size_t b) {
  return std::string(base) + std::to_string(a) + "_" + std::to_string(b);
}
inline std::string nm(const char* base, std::size_t a, std::size_t b, std::size_t c) {
  return std::string(base) + std::to_string(a) + "_" + std::to_string(b) + "_" + std::to_string(c);
}

inline void check_approx(const Scenario& s, const CapacityApprox& a) {
  if (a.num_links != s.num_links() || a.num_subchannels != s.num_subchannels() ||
      a.entries.size() != s.num_links() * s.num_subchannels())
    throw std::invalid_argument("capacity approximation does not match scenario dimensions");
  for (const auto& e : a.entries) {
    const bool shaped = e.breakpoints.size() == e.f1_pieces.size() + 1 ||
                        (e.breakpoints.size() == 1 && e.f1_pieces.size() == 1);
    if (e.f1_pieces.empty() || !shaped || !(e.t0 > 0.0))
      throw std::invalid_argument("capacity approximation entry is malformed");
  }
}

// Upper bound on the exact capacity of (l, f) anywhere in the power box.
inline double capacity_bound(const Scenario& s, std::size_t l, std::size_t f) {
  return s.spectrum.bandwidth *
         std::log2(1.0 + s.gains.lambda[l][f] * s.power_box(l) / s.spectrum.noise_power[l][f]);
}

// Largest interference (l, f) can see inside the power box.
inline double interference_bound(const Scenario& s, std::size_t l, std::size_t f) {
  double t = 0.0;
  for (std::size_t a = 0; a < s.num_links(); ++a)
    if (a != l) t += s.gains.gamma[l][a][f] * s.power_box(a);
  return t;
}

enum class Mode { Plan, Retune };

inline Formulation build(const Scenario& s, const CapacityApprox& approx, Mode mode,
                         const std::vector<bool>& pair_enabled, const FormulationOptions& opts) {
  check_approx(s, approx);
  const std::size_t nl = s.num_links();
  const std::size_t nf = s.num_subchannels();
  const std::size_t nn = s.num_nodes();
  const bool milp = mode == Mode::Plan;
  const double bw = s.spectrum.bandwidth;
  const double ptil = s.total_power_budget();
  const double dem_ul = s.total_demand_ul();
  const double dem_dl = s.total_demand_dl();

  Formulation out;
  out.index = VarIndex::make(nl, nf, milp);
  const auto& vi = out.index;
  auto& lp = out.lp;
  auto name = [&](std::string n) { return opts.names ? std::move(n) : std::string{}; };

  for (std::size_t l = 0; l < nl; ++l)
    for (std::size_t f = 0; f < nf; ++f) {
      const bool on = pair_enabled[l * nf + f];
      lp.add_var(0.0, on ? s.power_box(l) : 0.0, milp ? s.costs.w_power : 1.0, name(nm("x", l, f)));
    }
  for (std::size_t l = 0; l < nl; ++l) lp.add_var(0.0, dem_ul, 0.0, name(nm("cul", l)));
  for (std::size_t l = 0; l < nl; ++l) lp.add_var(0.0, dem_dl, 0.0, name(nm("cdl", l)));
  for (std::size_t l = 0; l < nl; ++l)
    for (std::size_t f = 0; f < nf; ++f) {
      const bool on = pair_enabled[l * nf + f];
      lp.add_var(0.0, on ? capacity_bound(s, l, f) : 0.0, 0.0, name(nm("ct", l, f)));
    }
  if (milp) {
    for (std::size_t l = 0; l < nl; ++l) {
      lp.add_var(0.0, 1.0, s.costs.w_link, name(nm("jl", l)));
      lp.mark_integral(vi.jl(l));
    }
    for (std::size_t f = 0; f < nf; ++f) {
      lp.add_var(0.0, 1.0, s.spectrum.is_access(f) ? 0.0 : s.costs.w_spectrum, name(nm("jf", f)));
      lp.mark_integral(vi.jf(f));
    }
    for (std::size_t l = 0; l < nl; ++l)
      for (std::size_t f = 0; f < nf; ++f) {
        lp.add_var(0.0, pair_enabled[l * nf + f] ? 1.0 : 0.0, 0.0, name(nm("y", l, f)));
        lp.mark_integral(vi.y(l, f));
      }
    for (std::size_t l = 0; l < nl; ++l)
      for (std::size_t f = 0; f < nf; ++f)
        lp.add_var(0.0, interference_bound(s, l, f), 0.0, name(nm("i", l, f)));
  }

  // C1, C2: activation.
  if (milp) {
    for (std::size_t l = 0; l < nl; ++l) {
      SparseRow row;
      for (std::size_t f = 0; f < nf; ++f) row.push_back({vi.x(l, f), 1.0});
      row.push_back({vi.jl(l), -ptil});
      lp.add_le(std::move(row), 0.0, name(nm("c1_", l)));
    }
    for (std::size_t f = 0; f < nf; ++f) {
      SparseRow row;
      for (std::size_t l = 0; l < nl; ++l) row.push_back({vi.x(l, f), 1.0});
      row.push_back({vi.jf(f), -ptil});
      lp.add_le(std::move(row), 0.0, name(nm("c2_", f)));
    }
  }

  // C3: per-link power cap.
  for (std::size_t l = 0; l < nl; ++l) {
    SparseRow row;
    for (std::size_t f = 0; f < nf; ++f) row.push_back({vi.x(l, f), 1.0});
    lp.add_le(std::move(row), s.links[l].p_max_link, name(nm("c3_", l)));
  }

  // C4: node power budget over outgoing links.
  for (std::size_t i = 0; i < nn; ++i) {
    SparseRow row;
    for (std::size_t l = 0; l < nl; ++l)
      if (s.links[l].from == i)
        for (std::size_t f = 0; f < nf; ++f) row.push_back({vi.x(l, f), 1.0});
    if (!row.empty()) lp.add_le(std::move(row), s.nodes[i].power_budget, name(nm("c4_", i)));
  }

  // C5: average delay, UL then DL.
  {
    SparseRow ul, dl;
    for (std::size_t l = 0; l < nl; ++l) {
      const double d_out = s.nodes[s.links[l].from].proc_delay;
      const double d_dl =
          opts.c5_dl_direction == C5Direction::AsPrinted ? d_out : s.nodes[s.links[l].to].proc_delay;
      if (d_out != 0.0) ul.push_back({vi.cul(l), d_out});
      if (d_dl != 0.0) dl.push_back({vi.cdl(l), d_dl});
    }
    lp.add_le(std::move(ul), s.limits.delay_ul * dem_ul, name("c5_ul"));
    lp.add_le(std::move(dl), s.limits.delay_dl * dem_dl, name("c5_dl"));
  }

  // C6: interference at access receivers on shared subchannels.
  for (std::size_t a = 0; a < s.spectrum.access_subchannels.size(); ++a) {
    const auto f = s.spectrum.access_subchannels[a];
    for (std::size_t m = 0; m < nn; ++m) {
      SparseRow row;
      for (std::size_t l = 0; l < nl; ++l) {
        const double w = s.gains.omega[l][m][f];
        if (w != 0.0) row.push_back({vi.x(l, f), w});
      }
      lp.add_le(std::move(row), s.limits.i_th[m][a], name(nm("c6_", f, m)));
    }
  }

  // Linearized capacity of each (l, f).
  for (std::size_t l = 0; l < nl; ++l) {
    for (std::size_t f = 0; f < nf; ++f) {
      if (!pair_enabled[l * nf + f]) continue;
      const auto& e = approx.at(l, f);
      const double w = e.noise;
      const double c = e.f2_tangent.slope;
      const double lambda = s.gains.lambda[l][f];
      const double tbound = milp ? interference_bound(s, l, f) : 0.0;

      if (milp) {
        lp.add_le({{vi.x(l, f), 1.0}, {vi.y(l, f), -s.power_box(l)}}, 0.0, name(nm("yx_", l, f)));
        lp.add_le({{vi.ct(l, f), 1.0}, {vi.y(l, f), -capacity_bound(s, l, f)}}, 0.0,
                  name(nm("yc_", l, f)));
        lp.add_le({{vi.y(l, f), 1.0}, {vi.jl(l), -1.0}}, 0.0, name(nm("yl_", l, f)));
        lp.add_le({{vi.y(l, f), 1.0}, {vi.jf(f), -1.0}}, 0.0, name(nm("yf_", l, f)));
        if (tbound > 0.0) {
          SparseRow row;
          for (std::size_t a = 0; a < nl; ++a) {
            const double g = s.gains.gamma[l][a][f];
            if (a != l && g != 0.0) row.push_back({vi.x(a, f), g});
          }
          SparseRow upper;
          for (const auto& term : row) upper.push_back({term.var, -term.coef});
          upper.push_back({vi.intf(l, f), 1.0});
          row.push_back({vi.intf(l, f), -1.0});
          row.push_back({vi.y(l, f), tbound});
          lp.add_le(std::move(row), tbound, name(nm("it_", l, f)));
          lp.add_le(std::move(upper), 0.0, name(nm("iu_", l, f)));
        }
      }

      for (std::size_t k = 0; k < e.f1_pieces.size(); ++k) {
        const double ak = e.f1_pieces[k].slope;
        const double sk = e.breakpoints[k];
        // Row value at the noise floor, i.e. chord_k(W) - tangent(W).
        double rhs = bw * std::log2(sk / e.t0) - ak * (sk - w) + c * (e.t0 - w) - opts.backoff * bw;
        SparseRow row;
        row.push_back({vi.ct(l, f), 1.0});
        if (ak != 0.0) row.push_back({vi.x(l, f), -ak * lambda});
        if (milp) {
          if (tbound > 0.0 && c != ak) row.push_back({vi.intf(l, f), c - ak});
        } else {
          for (std::size_t a = 0; a < nl; ++a) {
            if (a == l || !pair_enabled[a * nf + f]) continue;  // X[a][f] is fixed at zero
            const double g = s.gains.gamma[l][a][f];
            if (g != 0.0 && c != ak) row.push_back({vi.x(a, f), (c - ak) * g});
          }
        }
        if (milp) {
          if (rhs < 0.0) {
            // M_k = -rhs, so rhs + M_k is exactly zero.
            row.push_back({vi.y(l, f), -rhs});
            rhs = 0.0;
          }
        }
        lp.add_le(std::move(row), rhs, name(nm("cap_", l, f, k)));
      }
    }
  }

  // C7: flow on a link bounded by wired plus wireless capacity.
  for (std::size_t l = 0; l < nl; ++l) {
    SparseRow row{{vi.cul(l), 1.0}, {vi.cdl(l), 1.0}};
    for (std::size_t f = 0; f < nf; ++f) row.push_back({vi.ct(l, f), -1.0});
    out.c7_rows.push_back(lp.le_rows.size());
    lp.add_le(std::move(row), s.links[l].wired_capacity, name(nm("c7_", l)));
  }

  // C8, C9: conservation at non-root nodes.
  for (std::size_t i = 0; i < nn; ++i) {
    if (s.nodes[i].is_root()) continue;
    SparseRow ul, dl;
    for (std::size_t l = 0; l < nl; ++l) {
      if (s.links[l].from == i) {
        ul.push_back({vi.cul(l), 1.0});
        dl.push_back({vi.cdl(l), -1.0});
      }
      if (s.links[l].to == i) {
        ul.push_back({vi.cul(l), -1.0});
        dl.push_back({vi.cdl(l), 1.0});
      }
    }
    lp.add_eq(std::move(ul), s.demand_ul(i), name(nm("c8_", i)));
    lp.add_eq(std::move(dl), s.demand_dl(i), name(nm("c9_", i)));
  }

  // C10, C11: all demand reaches (leaves) the roots.
  {
    SparseRow ul, dl;
    for (std::size_t l = 0; l < nl; ++l) {
      if (s.nodes[s.links[l].to].is_root()) ul.push_back({vi.cul(l), 1.0});
      if (s.nodes[s.links[l].from].is_root()) dl.push_back({vi.cdl(l), 1.0});
    }
    lp.add_eq(std::move(ul), dem_ul, name("c10"));
    lp.add_eq(std::move(dl), dem_dl, name("c11"));
  }
  return out;
}

}  // namespace detail

inline Formulation build_milp(const Scenario& s, const CapacityApprox& approx,
                              const FormulationOptions& opts = {}) {
  const std::vector<bool> all(s.num_links() * s.num_subchannels(), true);
  return detail::build(s, approx, detail::Mode::Plan, all, opts);
}

// Power re-tuning LP on a fixed topology. Pairs outside the fixed sets, and
// pairs that carry no power at the expansion point, are held at zero.
inline Formulation build_retune_lp(const Scenario& s, const std::vector<std::size_t>& fixed_links,
                                   const std::vector<std::size_t>& fixed_subchannels,
                                   const CapacityApprox& approx,
                                   const FormulationOptions& opts = {}) {
  const std::size_t nl = s.num_links();
  const std::size_t nf = s.num_subchannels();
  detail::check_approx(s, approx);
  std::vector<bool> link_on(nl, false), sub_on(nf, false);
  for (auto l : fixed_links) {
    if (l >= nl) throw std::invalid_argument("fixed link " + std::to_string(l) + " is not in the scenario");
    link_on[l] = true;
  }
  for (auto f : fixed_subchannels) {
    if (f >= nf)
      throw std::invalid_argument("fixed subchannel " + std::to_string(f) + " is not in the scenario");
    sub_on[f] = true;
  }
  std::vector<bool> pairs(nl * nf, false);
  for (std::size_t l = 0; l < nl; ++l)
    for (std::size_t f = 0; f < nf; ++f)
      pairs[l * nf + f] = link_on[l] && sub_on[f] && approx.expansion_point(l, f) > 0.0;
  return detail::build(s, approx, detail::Mode::Retune, pairs, opts);
}

// Power LP for a fixed (link, subchannel) activation pattern, pairs indexed
// l*F + f. Interference enters the capacity rows directly, without the
// gated I variables of the MILP.
inline Formulation build_fixed_pattern_lp(const Scenario& s, const CapacityApprox& approx,
                                          const std::vector<bool>& pairs,
                                          const FormulationOptions& opts = {}) {
  detail::check_approx(s, approx);
  if (pairs.size() != s.num_links() * s.num_subchannels())
    throw std::invalid_argument("activation pattern does not match scenario");
  return detail::build(s, approx, detail::Mode::Retune, pairs, opts);
}

inline std::vector<std::size_t> indices_of(const std::vector<bool>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) out.push_back(i);
  return out;
}

// Rebuilds a plan from a solver vector. Binary values farther than int_tol
// from {0, 1} are rejected; rounding noise on continuous values is cleaned.
inline Plan extract_plan(const Scenario& s, const VarIndex& vi, const std::vector<double>& x,
                         double int_tol = 1e-6) {
  if (x.size() != vi.total) throw std::invalid_argument("solution length does not match variable index");
  if (vi.num_links != s.num_links() || vi.num_subchannels != s.num_subchannels())
    throw std::invalid_argument("variable index does not match scenario");
  const std::size_t nl = vi.num_links;
  const std::size_t nf = vi.num_subchannels;

  auto binary = [&](std::size_t j) {
    const double v = x[j];
    const double r = std::round(v);
    if (std::abs(v - r) > int_tol || (r != 0.0 && r != 1.0))
      throw std::invalid_argument("variable " + std::to_string(j) + " = " + std::to_string(v) +
                                  " is not binary within tolerance");
    return r == 1.0;
  };

  Plan p = empty_plan(s);
  std::vector<bool> pair_on(nl * nf, true);
  if (vi.binaries) {
    for (std::size_t l = 0; l < nl; ++l) p.active_links[l] = binary(vi.jl(l));
    for (std::size_t f = 0; f < nf; ++f) p.active_subchannels[f] = binary(vi.jf(f));
    for (std::size_t l = 0; l < nl; ++l)
      for (std::size_t f = 0; f < nf; ++f) pair_on[l * nf + f] = binary(vi.y(l, f));
  }
  for (std::size_t l = 0; l < nl; ++l)
    for (std::size_t f = 0; f < nf; ++f) {
      const double v = x[vi.x(l, f)];
      p.powers(l, f) = (pair_on[l * nf + f] && v > 0.0) ? v : 0.0;
    }
  for (std::size_t l = 0; l < nl; ++l) {
    p.flow_ul[l] = std::max(0.0, x[vi.cul(l)]);
    p.flow_dl[l] = std::max(0.0, x[vi.cdl(l)]);
  }
  if (!vi.binaries) {
    for (std::size_t l = 0; l < nl; ++l)
      for (std::size_t f = 0; f < nf; ++f)
        if (p.powers(l, f) > 0.0) {
          p.active_links[l] = true;
          p.active_subchannels[f] = true;
        }
  }
  p.exact_capacities = exact_capacities(s, p.powers);
  p.cost = network_cost(s, p);
  return p;
}

// Binary part of a plan in the order of the MILP's integral list.
inline std::vector<std::uint8_t> binary_fixing(const VarIndex& vi, const Plan& p) {
  std::vector<std::uint8_t> out;
  if (!vi.binaries) return out;
  for (std::size_t l = 0; l < vi.num_links; ++l) out.push_back(p.active_links[l] ? 1 : 0);
  for (std::size_t f = 0; f < vi.num_subchannels; ++f) out.push_back(p.active_subchannels[f] ? 1 : 0);
  for (std::size_t l = 0; l < vi.num_links; ++l)
    for (std::size_t f = 0; f < vi.num_subchannels; ++f)
      out.push_back(p.powers(l, f) > 0.0 ? 1 : 0);
  return out;
}

}  // namespace fdplan
