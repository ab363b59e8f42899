#pragma once

// Conservative linearization of B*log2(1 + SINR) written as f1 - f2 with
//   f1 = B*log2(s),  s = lambda*X_own + sum gamma*X_other + W
//   f2 = B*log2(t),  t = sum gamma*X_other + W.
// f1 is replaced by its chord (secant) envelope, which lies below the concave
// log, and f2 by its tangent at the expansion point, which lies above it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fdplan/model.hpp"

namespace fdplan {

struct AffinePiece {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double v) const { return slope * v + intercept; }

  bool operator==(const AffinePiece&) const = default;
};

inline std::vector<AffinePiece> chord_pieces(const std::vector<double>& breakpoints,
                                             double bandwidth) {
  if (breakpoints.size() < 2) throw std::invalid_argument("chord_pieces needs >= 2 breakpoints");
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > 0.0) || !std::isfinite(breakpoints[k]))
      throw std::invalid_argument("breakpoints must be finite and > 0");
    if (k > 0 && !(breakpoints[k] > breakpoints[k - 1]))
      throw std::invalid_argument("breakpoints must be strictly increasing");
  }
  std::vector<AffinePiece> pieces;
  pieces.reserve(breakpoints.size() - 1);
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double lo = breakpoints[k];
    const double width = breakpoints[k + 1] - lo;
    // log1p keeps the slope accurate for closely spaced breakpoints.
    const double rise = bandwidth * std::log1p(width / lo) / std::numbers::ln2;
    const double slope = rise / width;
    pieces.push_back({slope, bandwidth * std::log2(lo) - slope * lo});
  }
  return pieces;
}

inline double evaluate_min(const std::vector<AffinePiece>& pieces, double v) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) best = std::min(best, p(v));
  return best;
}

inline AffinePiece taylor_f2(double t0, double bandwidth) {
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw std::invalid_argument("taylor_f2 needs t0 > 0");
  const double slope = bandwidth / (t0 * std::numbers::ln2);
  return {slope, bandwidth * std::log2(t0) - slope * t0};
}

struct LinkApprox {
  std::vector<double> breakpoints;  // over the aggregate s
  std::vector<AffinePiece> f1_pieces;
  AffinePiece f2_tangent;
  double t0 = 0.0;  // t at the expansion point
  double s0 = 0.0;  // s at the expansion point
  double noise = 0.0;
};

struct CapacityApprox {
  std::size_t num_links = 0;
  std::size_t num_subchannels = 0;
  std::vector<LinkApprox> entries;  // row-major [link][subchannel]
  PowerVector expansion_point;
  std::size_t segments = 0;
  double bandwidth = 0.0;

  const LinkApprox& at(std::size_t link, std::size_t f) const {
    return entries.at(link * num_subchannels + f);
  }

  // Approximate capacity of (link, f) at power vector p.
  double capacity(const Scenario& s, const PowerVector& p, std::size_t link, std::size_t f) const {
    const auto& e = at(link, f);
    const double sv = received_aggregate(s, p, link, f);
    const double tv = interference_plus_noise(s, p, link, f);
    return evaluate_min(e.f1_pieces, sv) - e.f2_tangent(tv);
  }
};

namespace detail {

// Geometric grid on [lo, hi] with `segments` intervals; endpoints are exact.
inline std::vector<double> geometric_grid(double lo, double hi, std::size_t segments) {
  std::vector<double> grid(segments + 1);
  const double ratio = std::log(hi / lo);
  for (std::size_t k = 0; k <= segments; ++k)
    grid[k] = lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(segments));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

inline void insert_breakpoint(std::vector<double>& grid, double v) {
  auto it = std::lower_bound(grid.begin(), grid.end(), v);
  auto close = [v](double g) { return std::abs(g - v) <= 1e-12 * std::max(std::abs(g), std::abs(v)); };
  if (it != grid.end() && close(*it)) return;
  if (it != grid.begin() && close(*(it - 1))) return;
  grid.insert(it, v);
}

}  // namespace detail

// Upper end of the aggregate s for (link, f) when every contributing power
// sits at its box limit.
inline double max_aggregate(const Scenario& s, std::size_t link, std::size_t f) {
  double v = s.spectrum.noise_power[link][f];
  for (std::size_t a = 0; a < s.num_links(); ++a) {
    const double coeff = a == link ? s.gains.lambda[link][f] : s.gains.gamma[link][a][f];
    v += coeff * s.power_box(a);
  }
  return v;
}

inline CapacityApprox build_approx(const Scenario& s, const PowerVector& p0, std::size_t segments) {
  if (segments == 0) throw std::invalid_argument("segments must be >= 1");
  if (p0.x.size() != s.num_links()) throw std::invalid_argument("expansion point dimension mismatch");
  for (const auto& row : p0.x) {
    if (row.size() != s.num_subchannels())
      throw std::invalid_argument("expansion point dimension mismatch");
    for (double v : row)
      if (!(v >= 0.0)) throw std::invalid_argument("expansion point must be >= 0");
  }

  CapacityApprox a;
  a.num_links = s.num_links();
  a.num_subchannels = s.num_subchannels();
  a.expansion_point = p0;
  a.segments = segments;
  a.bandwidth = s.spectrum.bandwidth;
  a.entries.reserve(a.num_links * a.num_subchannels);
  const double bw = s.spectrum.bandwidth;

  for (std::size_t l = 0; l < a.num_links; ++l) {
    for (std::size_t f = 0; f < a.num_subchannels; ++f) {
      LinkApprox e;
      e.noise = s.spectrum.noise_power[l][f];
      e.t0 = interference_plus_noise(s, p0, l, f);
      e.s0 = received_aggregate(s, p0, l, f);
      e.f2_tangent = taylor_f2(e.t0, bw);
      const double hi = std::max(max_aggregate(s, l, f), e.s0);
      if (!(hi > e.noise)) {
        // No power reaches this receiver: s is pinned at the noise floor.
        e.breakpoints = {e.noise};
        e.f1_pieces = {AffinePiece{0.0, bw * std::log2(e.noise)}};
      } else {
        e.breakpoints = detail::geometric_grid(e.noise, hi, segments);
        detail::insert_breakpoint(e.breakpoints, e.s0);
        e.f1_pieces = chord_pieces(e.breakpoints, bw);
      }
      a.entries.push_back(std::move(e));
    }
  }
  return a;
}

}  // namespace fdplan
