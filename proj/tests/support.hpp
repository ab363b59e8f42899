#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdplan/fdplan.hpp"

namespace fdtest {

using namespace fdplan;

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string fixture_path(const std::string& name) {
  return std::string(FDPLAN_FIXTURES) + "/" + name;
}

inline Scenario fixture(const std::string& name) { return parse_scenario(slurp(fixture_path(name))); }

inline const std::vector<std::string>& scenario_fixtures() {
  static const std::vector<std::string> names = {
      "infeasible.json",        "relay_chain_fd.json",         "relay_chain_sic0db.json",
      "single_link.json",       "single_link_degraded.json",   "single_link_overdemand.json",
      "two_node.json",          "zero_demand.json"};
  return names;
}

// SplitMix64; kept separate from the library's generator so tests do not
// share a stream with the code under test.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  bool coin(double p = 0.5) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

// Nodes 0..roots-1 are roots. Gains: lambda everywhere, gamma and omega zero.
inline Scenario make_scenario(std::size_t num_nodes, std::vector<Link> links, std::size_t nf,
                              double bandwidth = 10e6, double noise = 1e-10, double lambda = 1e-6,
                              std::size_t roots = 1) {
  Scenario s;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    Node n;
    n.id = i;
    n.kind = i < roots ? NodeKind::Root : NodeKind::NonRoot;
    n.position = {100.0 * static_cast<double>(i), 0.0, 0.0};
    n.proc_delay = 1e-4;
    s.nodes.push_back(n);
  }
  s.links = std::move(links);
  const auto nl = s.links.size();
  s.spectrum.num_subchannels = nf;
  s.spectrum.bandwidth = bandwidth;
  s.spectrum.noise_power = make_matrix(nl, nf, noise);
  s.gains.lambda = make_matrix(nl, nf, lambda);
  s.gains.gamma = make_tensor(nl, nl, nf);
  s.gains.omega = make_tensor(nl, num_nodes, nf);
  s.limits.i_th = make_matrix(num_nodes, 0);
  return s;
}

// Root 0 and one non-root, link 1->0 with the given demand on it.
inline Scenario single_link(double rate_ul = 20e6, double lambda = 1e-6) {
  auto s = make_scenario(2, {Link{1, 0, 1.0, 0.0}}, 1, 10e6, 1e-10, lambda);
  s.nodes[1].rate_ul = rate_ul;
  return s;
}

inline double closed_form_power(double rate, double bandwidth, double noise, double lambda) {
  return noise * (std::pow(2.0, rate / bandwidth) - 1.0) / lambda;
}

// Random scenario in the shape of the generator's output but with gains drawn
// directly, so sampling covers strong and weak interference alike.
inline Scenario random_scenario(Rng& rng, std::size_t min_nodes, std::size_t max_nodes,
                                std::size_t min_sub, std::size_t max_sub) {
  const auto nn = min_nodes + rng.index(max_nodes - min_nodes + 1);
  const auto nf = min_sub + rng.index(max_sub - min_sub + 1);
  std::vector<Link> links;
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = 0; j < nn; ++j)
      if (i != j && (j + 1 == i || rng.coin(0.3))) links.push_back({i, j, rng.uniform(0.2, 1.0), 0.0});
  auto s = make_scenario(nn, links, nf, rng.uniform(1e6, 1e8), 1e-10);
  const auto nl = s.num_links();
  for (std::size_t l = 0; l < nl; ++l)
    for (std::size_t f = 0; f < nf; ++f) {
      s.spectrum.noise_power[l][f] = rng.log_uniform(1e-13, 1e-9);
      s.gains.lambda[l][f] = rng.log_uniform(1e-10, 1e-5);
      for (std::size_t a = 0; a < nl; ++a)
        if (a != l && rng.coin(0.7)) s.gains.gamma[l][a][f] = rng.log_uniform(1e-14, 1e-6);
    }
  for (std::size_t i = 1; i < nn; ++i) {
    s.nodes[i].rate_ul = rng.uniform(0.0, 5e7);
    s.nodes[i].rate_dl = rng.uniform(0.0, 5e7);
    s.nodes[i].power_budget = rng.uniform(0.5, 2.0);
  }
  return s;
}

inline PowerVector random_powers(Rng& rng, const Scenario& s, double zero_prob = 0.2) {
  auto p = PowerVector::zeros(s);
  for (std::size_t l = 0; l < s.num_links(); ++l)
    for (std::size_t f = 0; f < s.num_subchannels(); ++f)
      if (!rng.coin(zero_prob)) p(l, f) = rng.uniform(0.0, s.power_box(l));
  return p;
}

}  // namespace fdtest
