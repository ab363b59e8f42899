#pragma once

// Network model for full-duplex wireless backhaul planning: node/link/spectrum
// data, the exact SINR and Shannon capacity evaluations, and scenario checks.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fdplan {

using Matrix = std::vector<std::vector<double>>;
using Tensor3 = std::vector<std::vector<std::vector<double>>>;

inline Matrix make_matrix(std::size_t rows, std::size_t cols, double value = 0.0) {
  return Matrix(rows, std::vector<double>(cols, value));
}

inline Tensor3 make_tensor(std::size_t a, std::size_t b, std::size_t c, double value = 0.0) {
  return Tensor3(a, Matrix(b, std::vector<double>(c, value)));
}

enum class NodeKind { Root, NonRoot };

struct Node {
  std::size_t id = 0;
  NodeKind kind = NodeKind::NonRoot;
  std::array<double, 3> position{0.0, 0.0, 0.0};  // meters
  double proc_delay = 0.0;                        // seconds
  double power_budget = 1.0;                      // watts
  double rate_ul = 0.0;                           // bits/s
  double rate_dl = 0.0;                           // bits/s

  bool is_root() const { return kind == NodeKind::Root; }

  bool operator==(const Node&) const = default;
};

// Directed candidate link; (i,j) and (j,i) are distinct entries.
struct Link {
  std::size_t from = 0;
  std::size_t to = 0;
  double p_max_link = 1.0;      // watts
  double wired_capacity = 0.0;  // bits/s available through pre-existing wired media

  bool operator==(const Link&) const = default;
};

struct Spectrum {
  std::size_t num_subchannels = 1;
  double bandwidth = 1.0;                        // Hz per subchannel
  std::vector<std::size_t> access_subchannels;  // shared with the access network
  Matrix noise_power;                            // [link][subchannel], watts

  bool is_access(std::size_t f) const {
    for (auto a : access_subchannels)
      if (a == f) return true;
    return false;
  }

  bool operator==(const Spectrum&) const = default;
};

// Channel strengths as linear power ratios.
//   lambda[link][f]                  desired path
//   gamma[victim][aggressor][f]      link-to-link interference, including residual
//                                    self-interference when aggressor.from == victim.to
//   omega[link][node][f]             backhaul link to access receiver at node
struct Gains {
  Matrix lambda;
  Tensor3 gamma;
  Tensor3 omega;

  bool operator==(const Gains&) const = default;
};

struct CostWeights {
  double w_power = 1.0;     // per watt
  double w_link = 1.0;      // per established wireless link
  double w_spectrum = 1.0;  // per backhaul-exclusive subchannel

  bool operator==(const CostWeights&) const = default;
};

struct Limits {
  Matrix i_th;  // [node][position in access_subchannels], watts
  double delay_ul = 1.0;
  double delay_dl = 1.0;

  bool operator==(const Limits&) const = default;
};

struct Scenario {
  std::vector<Node> nodes;
  std::vector<Link> links;
  Spectrum spectrum;
  Gains gains;
  CostWeights costs;
  Limits limits;

  std::size_t num_links() const { return links.size(); }
  std::size_t num_subchannels() const { return spectrum.num_subchannels; }
  std::size_t num_nodes() const { return nodes.size(); }

  // Root nodes exchange traffic with the core over fiber; their demand is zero.
  double demand_ul(std::size_t node) const {
    return nodes[node].is_root() ? 0.0 : nodes[node].rate_ul;
  }
  double demand_dl(std::size_t node) const {
    return nodes[node].is_root() ? 0.0 : nodes[node].rate_dl;
  }

  double total_demand_ul() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += demand_ul(i);
    return sum;
  }
  double total_demand_dl() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += demand_dl(i);
    return sum;
  }

  // Big-M for the activation rows: sum of node power budgets.
  double total_power_budget() const {
    double sum = 0.0;
    for (const auto& n : nodes) sum += n.power_budget;
    return sum;
  }

  // Largest power a single (link, subchannel) variable can carry.
  double power_box(std::size_t link) const {
    const auto& l = links[link];
    return std::min(l.p_max_link, nodes[l.from].power_budget);
  }

  bool operator==(const Scenario&) const = default;
};

// Transmit power X[link][subchannel] in watts.
struct PowerVector {
  Matrix x;

  PowerVector() = default;
  explicit PowerVector(Matrix values) : x(std::move(values)) {}
  PowerVector(std::size_t links, std::size_t subchannels, double value = 0.0)
      : x(make_matrix(links, subchannels, value)) {}

  static PowerVector zeros(const Scenario& s) {
    return PowerVector(s.num_links(), s.num_subchannels());
  }

  double& operator()(std::size_t link, std::size_t f) { return x[link][f]; }
  double operator()(std::size_t link, std::size_t f) const { return x[link][f]; }

  std::size_t num_links() const { return x.size(); }

  double total() const {
    double sum = 0.0;
    for (const auto& row : x)
      for (double v : row) sum += v;
    return sum;
  }

  bool operator==(const PowerVector&) const = default;
};

inline double max_abs_difference(const PowerVector& a, const PowerVector& b) {
  if (a.x.size() != b.x.size()) throw std::invalid_argument("power vectors differ in link count");
  double worst = 0.0;
  for (std::size_t l = 0; l < a.x.size(); ++l) {
    if (a.x[l].size() != b.x[l].size())
      throw std::invalid_argument("power vectors differ in subchannel count");
    for (std::size_t f = 0; f < a.x[l].size(); ++f)
      worst = std::max(worst, std::abs(a.x[l][f] - b.x[l][f]));
  }
  return worst;
}

struct Violation {
  std::string field;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

namespace detail {

inline std::string idx(std::string base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }
inline bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace detail

inline std::vector<Violation> validate_scenario(const Scenario& s) {
  using detail::idx;
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string rule) {
    out.push_back({std::move(field), std::move(rule)});
  };

  const std::size_t n = s.nodes.size();
  const std::size_t nl = s.links.size();
  const std::size_t nf = s.spectrum.num_subchannels;

  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = s.nodes[i];
    const auto base = idx("nodes", i);
    if (node.is_root()) ++roots;
    if (node.id != i) add(base + ".id", "must equal its position in the node list");
    if (!detail::finite_nonneg(node.proc_delay)) add(base + ".proc_delay", "must be >= 0");
    if (!detail::finite_pos(node.power_budget)) add(base + ".power_budget", "must be > 0");
    if (!detail::finite_nonneg(node.rate_ul)) add(base + ".rate_ul", "must be >= 0");
    if (!detail::finite_nonneg(node.rate_dl)) add(base + ".rate_dl", "must be >= 0");
    for (double c : node.position)
      if (!std::isfinite(c)) add(base + ".position", "must be finite");
  }
  if (roots == 0) add("nodes", "at least one root node is required");

  for (std::size_t l = 0; l < nl; ++l) {
    const auto& link = s.links[l];
    const auto base = idx("links", l);
    if (link.from >= n) add(base + ".from", "must name an existing node");
    if (link.to >= n) add(base + ".to", "must name an existing node");
    if (link.from == link.to) add(base, "from and to must differ");
    if (!detail::finite_pos(link.p_max_link)) add(base + ".p_max_link", "must be > 0");
    if (!detail::finite_nonneg(link.wired_capacity)) add(base + ".wired_capacity", "must be >= 0");
    for (std::size_t k = 0; k < l; ++k)
      if (s.links[k].from == link.from && s.links[k].to == link.to)
        add(base, "duplicate directed link");
  }

  if (nf == 0) add("spectrum.num_subchannels", "must be >= 1");
  if (!detail::finite_pos(s.spectrum.bandwidth)) add("spectrum.bandwidth", "must be > 0");
  for (std::size_t a = 0; a < s.spectrum.access_subchannels.size(); ++a) {
    const auto f = s.spectrum.access_subchannels[a];
    if (f >= nf) add(idx("spectrum.access_subchannels", a), "must be < num_subchannels");
    for (std::size_t b = 0; b < a; ++b)
      if (s.spectrum.access_subchannels[b] == f)
        add(idx("spectrum.access_subchannels", a), "duplicate subchannel");
  }

  auto check_matrix = [&](const Matrix& m, const std::string& name, std::size_t rows,
                          std::size_t cols, bool strictly_positive, const char* rule) {
    if (m.size() != rows) {
      add(name, "expected " + std::to_string(rows) + " rows");
      return;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      if (m[r].size() != cols) {
        add(idx(name, r), "expected " + std::to_string(cols) + " entries");
        continue;
      }
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = m[r][c];
        const bool ok = strictly_positive ? detail::finite_pos(v) : detail::finite_nonneg(v);
        if (!ok) add(idx(idx(name, r), c), rule);
      }
    }
  };

  check_matrix(s.spectrum.noise_power, "spectrum.noise_power", nl, nf, true, "must be > 0");
  check_matrix(s.gains.lambda, "gains.lambda", nl, nf, true, "must be > 0");

  if (s.gains.gamma.size() != nl) {
    add("gains.gamma", "expected " + std::to_string(nl) + " victim entries");
  } else {
    for (std::size_t v = 0; v < nl; ++v)
      check_matrix(s.gains.gamma[v], idx("gains.gamma", v), nl, nf, false, "must be >= 0");
  }
  if (s.gains.omega.size() != nl) {
    add("gains.omega", "expected " + std::to_string(nl) + " link entries");
  } else {
    for (std::size_t l = 0; l < nl; ++l)
      check_matrix(s.gains.omega[l], idx("gains.omega", l), n, nf, false, "must be >= 0");
  }

  if (!detail::finite_nonneg(s.costs.w_power)) add("costs.w_power", "must be >= 0");
  if (!detail::finite_nonneg(s.costs.w_link)) add("costs.w_link", "must be >= 0");
  if (!detail::finite_nonneg(s.costs.w_spectrum)) add("costs.w_spectrum", "must be >= 0");

  check_matrix(s.limits.i_th, "limits.i_th", n, s.spectrum.access_subchannels.size(), true,
               "must be > 0");
  if (!detail::finite_pos(s.limits.delay_ul)) add("limits.delay_ul", "must be > 0");
  if (!detail::finite_pos(s.limits.delay_dl)) add("limits.delay_dl", "must be > 0");

  return out;
}

namespace detail {

inline void check_index(const Scenario& s, const PowerVector& p, std::size_t link, std::size_t f) {
  if (link >= s.num_links()) throw std::out_of_range("link index out of range");
  if (f >= s.num_subchannels()) throw std::out_of_range("subchannel index out of range");
  if (p.x.size() != s.num_links() || p.x[link].size() != s.num_subchannels())
    throw std::out_of_range("power vector does not match scenario dimensions");
}

}  // namespace detail

// Interference plus noise seen by `link` on `f`: sum over other links of
// gamma * X, plus thermal noise.
inline double interference_plus_noise(const Scenario& s, const PowerVector& p, std::size_t link,
                                      std::size_t f) {
  detail::check_index(s, p, link, f);
  double t = s.spectrum.noise_power[link][f];
  const auto& g = s.gains.gamma[link];
  for (std::size_t a = 0; a < s.num_links(); ++a) {
    if (a == link) continue;
    t += g[a][f] * p.x[a][f];
  }
  return t;
}

// Received signal plus interference plus noise; the log argument of f1.
inline double received_aggregate(const Scenario& s, const PowerVector& p, std::size_t link,
                                 std::size_t f) {
  return interference_plus_noise(s, p, link, f) + s.gains.lambda[link][f] * p.x[link][f];
}

inline double sinr(const Scenario& s, const PowerVector& p, std::size_t link, std::size_t f) {
  const double t = interference_plus_noise(s, p, link, f);
  return s.gains.lambda[link][f] * p.x[link][f] / t;
}

inline double link_capacity(const Scenario& s, const PowerVector& p, std::size_t link,
                            std::size_t f) {
  return s.spectrum.bandwidth * std::log2(1.0 + sinr(s, p, link, f));
}

// Ordered (aggressor, victim) pairs where the aggressor transmits from the node
// the victim receives at.
inline std::vector<std::pair<std::size_t, std::size_t>> self_interference_pairs(const Scenario& s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < s.num_links(); ++a)
    for (std::size_t v = 0; v < s.num_links(); ++v)
      if (a != v && s.links[a].from == s.links[v].to) out.emplace_back(a, v);
  return out;
}

inline std::vector<std::size_t> out_degree(const Scenario& s) {
  std::vector<std::size_t> deg(s.num_nodes(), 0);
  for (const auto& l : s.links) ++deg[l.from];
  return deg;
}

}  // namespace fdplan
