#pragma once

// JSON documents for scenarios, plans and generator parameters, plus the
// synthetic scenario generator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "fdplan/model.hpp"
#include "fdplan/plan.hpp"

namespace fdplan {

using ordered_json = nlohmann::ordered_json;

// Malformed document (with byte offset) or schema violation (with JSON path).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& msg)
      : std::runtime_error(path.empty() ? msg : path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline constexpr double kDefaultNoiseDensity = 4e-21;  // W/Hz

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

namespace io {

inline ordered_json parse_document(std::string_view text) {
  try {
    return ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("", "malformed document at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}
inline std::string child(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline const ordered_json& require(const ordered_json& j, std::string_view key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(child(path, key), "missing required field");
  return *it;
}

inline const ordered_json* optional_field(const ordered_json& j, std::string_view key,
                                          const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline double number(const ordered_json& j, const std::string& path) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

// A linear ratio: a number, or a string such as "-110 dB".
inline double gain(const ordered_json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    while (!s.empty() && s.back() == ' ') s.pop_back();
    if (s.size() > 2 && s.compare(s.size() - 2, 2, "dB") == 0) {
      const std::string head = s.substr(0, s.size() - 2);
      try {
        std::size_t used = 0;
        const double db = std::stod(head, &used);
        if (head.find_first_not_of(' ', used) == std::string::npos) return db_to_linear(db);
      } catch (const std::exception&) {
      }
    }
    throw ParseError(path, "expected a number or a \"<value> dB\" string, got \"" + s + "\"");
  }
  throw ParseError(path, "expected a number or a dB string");
}

inline std::size_t index(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ParseError(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline const ordered_json& array(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  return j;
}

template <typename F>
Matrix matrix(const ordered_json& j, std::size_t rows, std::size_t cols, const std::string& path, F conv) {
  if (!j.is_array()) {
    const double v = conv(j, path);
    return make_matrix(rows, cols, v);
  }
  if (j.size() != rows) throw ParseError(path, "expected " + std::to_string(rows) + " rows");
  Matrix m(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto p = child(path, r);
    const auto& row = j[r];
    if (!row.is_array()) {
      m[r].assign(cols, conv(row, p));
      continue;
    }
    if (row.size() != cols) throw ParseError(p, "expected " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) m[r].push_back(conv(row[c], child(p, c)));
  }
  return m;
}

// Dense [a][b][f] array, a broadcast scalar, or {"default": g, "entries": [...]}
// with entries naming keys `ka`, `kb` and optionally `subchannel`.
inline Tensor3 tensor(const ordered_json& j, std::size_t na, std::size_t nb, std::size_t nf,
                      const char* ka, const char* kb, const std::string& path) {
  if (j.is_object()) {
    double def = 0.0;
    if (auto d = optional_field(j, "default", path)) def = gain(*d, child(path, "default"));
    Tensor3 t = make_tensor(na, nb, nf, def);
    if (auto e = optional_field(j, "entries", path)) {
      const auto ep = child(path, "entries");
      array(*e, ep);
      for (std::size_t k = 0; k < e->size(); ++k) {
        const auto p = child(ep, k);
        const auto& item = (*e)[k];
        const auto a = index(require(item, ka, p), child(p, ka));
        const auto b = index(require(item, kb, p), child(p, kb));
        if (a >= na) throw ParseError(child(p, ka), "index out of range");
        if (b >= nb) throw ParseError(child(p, kb), "index out of range");
        const double v = gain(require(item, "value", p), child(p, "value"));
        if (auto f = optional_field(item, "subchannel", p)) {
          const auto fi = index(*f, child(p, "subchannel"));
          if (fi >= nf) throw ParseError(child(p, "subchannel"), "index out of range");
          t[a][b][fi] = v;
        } else {
          for (std::size_t fi = 0; fi < nf; ++fi) t[a][b][fi] = v;
        }
      }
    }
    return t;
  }
  if (!j.is_array()) return make_tensor(na, nb, nf, gain(j, path));
  if (j.size() != na) throw ParseError(path, "expected " + std::to_string(na) + " entries");
  Tensor3 t(na);
  for (std::size_t a = 0; a < na; ++a) t[a] = matrix(j[a], nb, nf, child(path, a), gain);
  return t;
}

inline ordered_json to_json(const Matrix& m) {
  ordered_json out = ordered_json::array();
  for (const auto& row : m) {
    ordered_json r = ordered_json::array();
    for (double v : row) r.push_back(v);
    out.push_back(std::move(r));
  }
  return out;
}

inline ordered_json to_json(const Tensor3& t) {
  ordered_json out = ordered_json::array();
  for (const auto& m : t) out.push_back(to_json(m));
  return out;
}

inline ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

inline std::vector<bool> membership(const ordered_json& j, std::size_t n, const std::string& path) {
  array(j, path);
  std::vector<bool> out(n, false);
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto i = index(j[k], child(path, k));
    if (i >= n) throw ParseError(child(path, k), "index out of range");
    out[i] = true;
  }
  return out;
}

inline std::vector<std::size_t> indices(const std::vector<bool>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) out.push_back(i);
  return out;
}

inline std::vector<double> numbers(const ordered_json& j, std::size_t n, const std::string& path) {
  array(j, path);
  if (j.size() != n) throw ParseError(path, "expected " + std::to_string(n) + " entries");
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(number(j[k], child(path, k)));
  return out;
}

}  // namespace io

inline Scenario parse_scenario(std::string_view text) {
  using namespace io;
  const auto doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("", "top level must be an object");
  Scenario s;

  const auto& nodes = array(require(doc, "nodes", ""), "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto p = child("nodes", i);
    const auto& j = nodes[i];
    Node n;
    n.id = index(require(j, "id", p), child(p, "id"));
    const auto& kind = require(j, "kind", p);
    if (kind == "root") n.kind = NodeKind::Root;
    else if (kind == "nonroot") n.kind = NodeKind::NonRoot;
    else throw ParseError(child(p, "kind"), "expected \"root\" or \"nonroot\"");
    if (auto pos = optional_field(j, "position_m", p)) {
      const auto v = numbers(*pos, pos->is_array() && pos->size() == 2 ? 2 : 3, child(p, "position_m"));
      for (std::size_t k = 0; k < v.size(); ++k) n.position[k] = v[k];
    }
    if (auto v = optional_field(j, "proc_delay_s", p)) n.proc_delay = number(*v, child(p, "proc_delay_s"));
    n.power_budget = number(require(j, "power_budget_w", p), child(p, "power_budget_w"));
    if (auto v = optional_field(j, "rate_ul_bps", p)) n.rate_ul = number(*v, child(p, "rate_ul_bps"));
    if (auto v = optional_field(j, "rate_dl_bps", p)) n.rate_dl = number(*v, child(p, "rate_dl_bps"));
    if (n.is_root()) n.rate_ul = n.rate_dl = 0.0;
    s.nodes.push_back(n);
  }

  const auto& links = array(require(doc, "links", ""), "links");
  for (std::size_t l = 0; l < links.size(); ++l) {
    const auto p = child("links", l);
    const auto& j = links[l];
    Link k;
    k.from = index(require(j, "from", p), child(p, "from"));
    k.to = index(require(j, "to", p), child(p, "to"));
    k.p_max_link = number(require(j, "p_max_w", p), child(p, "p_max_w"));
    if (auto v = optional_field(j, "wired_capacity_bps", p))
      k.wired_capacity = number(*v, child(p, "wired_capacity_bps"));
    s.links.push_back(k);
  }
  const std::size_t nl = s.links.size();
  const std::size_t nn = s.nodes.size();

  const auto& sp = require(doc, "spectrum", "");
  s.spectrum.num_subchannels = index(require(sp, "num_subchannels", "spectrum"), "spectrum.num_subchannels");
  s.spectrum.bandwidth = number(require(sp, "bandwidth_hz", "spectrum"), "spectrum.bandwidth_hz");
  const std::size_t nf = s.spectrum.num_subchannels;
  if (auto a = optional_field(sp, "access_subchannels", "spectrum")) {
    array(*a, "spectrum.access_subchannels");
    for (std::size_t k = 0; k < a->size(); ++k)
      s.spectrum.access_subchannels.push_back(index((*a)[k], child("spectrum.access_subchannels", k)));
  }
  if (auto w = optional_field(sp, "noise_w", "spectrum")) {
    s.spectrum.noise_power = matrix(*w, nl, nf, "spectrum.noise_w", gain);
  } else {
    double density = kDefaultNoiseDensity;
    if (auto d = optional_field(sp, "noise_density_w_per_hz", "spectrum"))
      density = gain(*d, "spectrum.noise_density_w_per_hz");
    s.spectrum.noise_power = make_matrix(nl, nf, density * s.spectrum.bandwidth);
  }

  const auto& g = require(doc, "gains", "");
  s.gains.lambda = matrix(require(g, "lambda", "gains"), nl, nf, "gains.lambda", gain);
  if (auto v = optional_field(g, "gamma", "gains"))
    s.gains.gamma = tensor(*v, nl, nl, nf, "victim", "aggressor", "gains.gamma");
  else
    s.gains.gamma = make_tensor(nl, nl, nf);
  if (auto v = optional_field(g, "omega", "gains"))
    s.gains.omega = tensor(*v, nl, nn, nf, "link", "node", "gains.omega");
  else
    s.gains.omega = make_tensor(nl, nn, nf);

  const auto& c = require(doc, "costs", "");
  s.costs.w_power = number(require(c, "power_per_w", "costs"), "costs.power_per_w");
  s.costs.w_link = number(require(c, "per_link", "costs"), "costs.per_link");
  s.costs.w_spectrum = number(require(c, "per_subchannel", "costs"), "costs.per_subchannel");

  const auto& lim = require(doc, "limits", "");
  const std::size_t na = s.spectrum.access_subchannels.size();
  if (auto v = optional_field(lim, "i_th_w", "limits"))
    s.limits.i_th = matrix(*v, nn, na, "limits.i_th_w", gain);
  else
    s.limits.i_th = make_matrix(nn, na, std::numeric_limits<double>::max());
  s.limits.delay_ul = number(require(lim, "delay_ul_s", "limits"), "limits.delay_ul_s");
  s.limits.delay_dl = number(require(lim, "delay_dl_s", "limits"), "limits.delay_dl_s");

  const auto bad = validate_scenario(s);
  if (!bad.empty()) throw ParseError(bad.front().field, bad.front().rule);
  return s;
}

inline ordered_json scenario_to_json(const Scenario& s) {
  using io::to_json;
  ordered_json doc;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : s.nodes) {
    ordered_json j;
    j["id"] = n.id;
    j["kind"] = n.is_root() ? "root" : "nonroot";
    j["position_m"] = {n.position[0], n.position[1], n.position[2]};
    j["proc_delay_s"] = n.proc_delay;
    j["power_budget_w"] = n.power_budget;
    j["rate_ul_bps"] = n.rate_ul;
    j["rate_dl_bps"] = n.rate_dl;
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  ordered_json links = ordered_json::array();
  for (const auto& l : s.links) {
    ordered_json j;
    j["from"] = l.from;
    j["to"] = l.to;
    j["p_max_w"] = l.p_max_link;
    j["wired_capacity_bps"] = l.wired_capacity;
    links.push_back(std::move(j));
  }
  doc["links"] = std::move(links);
  doc["spectrum"]["num_subchannels"] = s.spectrum.num_subchannels;
  doc["spectrum"]["bandwidth_hz"] = s.spectrum.bandwidth;
  doc["spectrum"]["access_subchannels"] = s.spectrum.access_subchannels;
  doc["spectrum"]["noise_w"] = to_json(s.spectrum.noise_power);
  doc["gains"]["lambda"] = to_json(s.gains.lambda);
  doc["gains"]["gamma"] = to_json(s.gains.gamma);
  doc["gains"]["omega"] = to_json(s.gains.omega);
  doc["costs"]["power_per_w"] = s.costs.w_power;
  doc["costs"]["per_link"] = s.costs.w_link;
  doc["costs"]["per_subchannel"] = s.costs.w_spectrum;
  doc["limits"]["i_th_w"] = to_json(s.limits.i_th);
  doc["limits"]["delay_ul_s"] = s.limits.delay_ul;
  doc["limits"]["delay_dl_s"] = s.limits.delay_dl;
  return doc;
}

inline std::string write_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

inline ordered_json report_to_json(const FeasibilityReport& r) {
  ordered_json j;
  j["feasible"] = r.feasible;
  j["tolerance"] = r.tolerance;
  ordered_json fams = ordered_json::array();
  for (const auto& f : r.families) {
    ordered_json e;
    e["family"] = f.family;
    e["max_violation"] = f.max_violation;
    e["rows"] = f.rows;
    e["worst"] = f.worst;
    fams.push_back(std::move(e));
  }
  j["families"] = std::move(fams);
  return j;
}

inline ordered_json plan_to_json(const Plan& p) {
  using io::to_json;
  ordered_json doc;
  ordered_json ids = ordered_json::array();
  for (const auto& e : p.link_ids) ids.push_back({e.from, e.to});
  doc["link_ids"] = std::move(ids);
  doc["powers"] = to_json(p.powers.x);
  doc["flow_ul"] = p.flow_ul;
  doc["flow_dl"] = p.flow_dl;
  doc["num_subchannels"] = p.active_subchannels.size();
  doc["active_links"] = io::indices(p.active_links);
  doc["active_subchannels"] = io::indices(p.active_subchannels);
  doc["cost_breakdown"]["power"] = p.cost.power;
  doc["cost_breakdown"]["link"] = p.cost.link;
  doc["cost_breakdown"]["spectrum"] = p.cost.spectrum;
  doc["cost_breakdown"]["total"] = p.cost.total;
  doc["exact_capacities"] = to_json(p.exact_capacities);
  doc["feasible"] = p.feasible;
  ordered_json trace = ordered_json::array();
  for (const auto& e : p.trace.entries) {
    ordered_json t;
    t["iteration"] = e.iteration;
    t["cost"] = e.cost;
    t["status"] = e.status;
    t["max_power_change"] = io::finite_or_null(e.max_power_change);
    t["nodes"] = e.nodes;
    t["gap"] = io::finite_or_null(e.gap);
    t["incumbent_updates"] = e.incumbent_updates;
    trace.push_back(std::move(t));
  }
  doc["trace"] = std::move(trace);
  if (p.validation) doc["validation"] = report_to_json(*p.validation);
  return doc;
}

inline std::string write_plan(const Plan& p) { return plan_to_json(p).dump(2) + "\n"; }

inline Plan parse_plan(std::string_view text) {
  using namespace io;
  const auto doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("", "top level must be an object");
  Plan p;
  const auto& pw = array(require(doc, "powers", ""), "powers");
  const std::size_t nl = pw.size();
  std::size_t nf = nl == 0 ? 0 : (pw[0].is_array() ? pw[0].size() : 0);
  if (nl == 0)
    if (auto n = optional_field(doc, "num_subchannels", "")) nf = index(*n, "num_subchannels");
  p.powers = PowerVector(matrix(pw, nl, nf, "powers", number));
  if (auto ids = optional_field(doc, "link_ids", "")) {
    array(*ids, "link_ids");
    if (ids->size() != nl) throw ParseError("link_ids", "expected " + std::to_string(nl) + " entries");
    for (std::size_t l = 0; l < nl; ++l) {
      const auto path = child("link_ids", l);
      const auto& e = (*ids)[l];
      if (!e.is_array() || e.size() != 2) throw ParseError(path, "expected [from, to]");
      p.link_ids.push_back({index(e[0], child(path, 0)), index(e[1], child(path, 1))});
    }
  }
  p.flow_ul = numbers(require(doc, "flow_ul", ""), nl, "flow_ul");
  p.flow_dl = numbers(require(doc, "flow_dl", ""), nl, "flow_dl");
  p.active_links = membership(require(doc, "active_links", ""), nl, "active_links");
  const auto& subs = require(doc, "active_subchannels", "");
  std::size_t nsub = nf;
  if (auto n = optional_field(doc, "num_subchannels", "")) {
    nsub = index(*n, "num_subchannels");
    if (nl > 0 && nsub != nf) throw ParseError("num_subchannels", "does not match the powers matrix");
  }
  p.active_subchannels = membership(subs, nsub, "active_subchannels");
  if (auto caps = optional_field(doc, "exact_capacities", ""))
    p.exact_capacities = matrix(*caps, nl, nf, "exact_capacities", number);
  else
    p.exact_capacities = make_matrix(nl, nf);
  if (auto c = optional_field(doc, "cost_breakdown", "")) {
    p.cost.power = number(require(*c, "power", "cost_breakdown"), "cost_breakdown.power");
    p.cost.link = number(require(*c, "link", "cost_breakdown"), "cost_breakdown.link");
    p.cost.spectrum = number(require(*c, "spectrum", "cost_breakdown"), "cost_breakdown.spectrum");
    p.cost.total = number(require(*c, "total", "cost_breakdown"), "cost_breakdown.total");
  }
  if (auto f = optional_field(doc, "feasible", "")) {
    if (!f->is_boolean()) throw ParseError("feasible", "expected a boolean");
    p.feasible = f->get<bool>();
  }
  if (auto t = optional_field(doc, "trace", "")) {
    array(*t, "trace");
    for (std::size_t k = 0; k < t->size(); ++k) {
      const auto path = child("trace", k);
      const auto& j = (*t)[k];
      TraceEntry e;
      e.iteration = index(require(j, "iteration", path), child(path, "iteration"));
      e.cost = number(require(j, "cost", path), child(path, "cost"));
      if (auto v = optional_field(j, "status", path)) e.status = v->get<std::string>();
      if (auto v = optional_field(j, "max_power_change", path))
        e.max_power_change = number(*v, child(path, "max_power_change"));
      if (auto v = optional_field(j, "nodes", path)) e.nodes = index(*v, child(path, "nodes"));
      if (auto v = optional_field(j, "gap", path)) e.gap = number(*v, child(path, "gap"));
      if (auto v = optional_field(j, "incumbent_updates", path))
        e.incumbent_updates = index(*v, child(path, "incumbent_updates"));
      p.trace.entries.push_back(e);
    }
  }
  if (auto v = optional_field(doc, "validation", "")) {
    FeasibilityReport r;
    r.feasible = require(*v, "feasible", "validation").get<bool>();
    r.tolerance = number(require(*v, "tolerance", "validation"), "validation.tolerance");
    const auto& fams = array(require(*v, "families", "validation"), "validation.families");
    for (std::size_t k = 0; k < fams.size(); ++k) {
      const auto path = child("validation.families", k);
      FamilyCheck f;
      f.family = require(fams[k], "family", path).get<std::string>();
      f.max_violation = number(require(fams[k], "max_violation", path), child(path, "max_violation"));
      f.rows = index(require(fams[k], "rows", path), child(path, "rows"));
      f.worst = require(fams[k], "worst", path).get<std::string>();
      r.families.push_back(f);
    }
    p.validation = r;
  }
  return p;
}

// Parameters of the synthetic generator. Links exist between every ordered
// pair of nodes closer than max_link_distance.
struct GeneratorParams {
  std::size_t num_nonroot = 4;
  std::size_t num_root = 1;
  double area_side = 300.0;           // m
  double max_link_distance = 200.0;   // m
  double carrier_freq = 60e9;         // Hz
  double pathloss_exponent = 2.0;
  double tx_antenna_gain_boresight = 1000.0;
  double antenna_gain_sidelobe = 0.01;
  double sic_attenuation = 1e-11;
  std::uint64_t seed = 1;
  double rate_ul_min = 50e6, rate_ul_max = 200e6;  // bits/s
  double rate_dl_min = 50e6, rate_dl_max = 200e6;
  double budget_min = 0.5, budget_max = 1.0;       // W
  double p_max_link = 1.0;                         // W
  std::size_t num_subchannels = 2;
  std::size_t num_access_subchannels = 0;          // the first ones are shared
  double bandwidth = 100e6;                        // Hz
  double noise_density = kDefaultNoiseDensity;     // W/Hz
  double proc_delay = 1e-4;                        // s
  double delay_ul = 1.0, delay_dl = 1.0;           // s
  double i_th = 1e-9;                              // W
  double w_power = 1.0, w_link = 1.0, w_spectrum = 10.0;

  bool operator==(const GeneratorParams&) const = default;
};

inline std::vector<std::string> check_params(const GeneratorParams& p) {
  std::vector<std::string> bad;
  if (p.num_root == 0) bad.push_back("num_root must be >= 1");
  if (!(p.max_link_distance > 0.0)) bad.push_back("max_link_distance must be > 0");
  if (!(p.area_side >= 0.0)) bad.push_back("area_side must be >= 0");
  if (!(p.carrier_freq > 0.0)) bad.push_back("carrier_freq must be > 0");
  if (!(p.pathloss_exponent >= 2.0)) bad.push_back("pathloss_exponent must be >= 2");
  if (!(p.sic_attenuation >= 0.0 && p.sic_attenuation <= 1.0)) bad.push_back("sic_attenuation must be in [0, 1]");
  if (!(p.tx_antenna_gain_boresight > 0.0)) bad.push_back("tx_antenna_gain_boresight must be > 0");
  if (!(p.antenna_gain_sidelobe >= 0.0)) bad.push_back("antenna_gain_sidelobe must be >= 0");
  if (!(p.rate_ul_min >= 0.0 && p.rate_ul_min <= p.rate_ul_max)) bad.push_back("uplink rate range is invalid");
  if (!(p.rate_dl_min >= 0.0 && p.rate_dl_min <= p.rate_dl_max)) bad.push_back("downlink rate range is invalid");
  if (!(p.budget_min > 0.0 && p.budget_min <= p.budget_max)) bad.push_back("budget range is invalid");
  if (!(p.p_max_link > 0.0)) bad.push_back("p_max_link must be > 0");
  if (p.num_subchannels == 0) bad.push_back("num_subchannels must be >= 1");
  if (p.num_access_subchannels > p.num_subchannels)
    bad.push_back("num_access_subchannels must not exceed num_subchannels");
  if (!(p.bandwidth > 0.0)) bad.push_back("bandwidth must be > 0");
  if (!(p.noise_density > 0.0)) bad.push_back("noise_density must be > 0");
  if (!(p.proc_delay >= 0.0)) bad.push_back("proc_delay must be >= 0");
  if (!(p.delay_ul > 0.0 && p.delay_dl > 0.0)) bad.push_back("delay limits must be > 0");
  if (!(p.i_th > 0.0)) bad.push_back("i_th must be > 0");
  if (!(p.w_power >= 0.0 && p.w_link >= 0.0 && p.w_spectrum >= 0.0)) bad.push_back("cost weights must be >= 0");
  return bad;
}

namespace io {

#define FDPLAN_PARAM_FIELDS(X)                                                                      \
  X(num_nonroot) X(num_root) X(area_side) X(max_link_distance) X(carrier_freq) X(pathloss_exponent) \
  X(tx_antenna_gain_boresight) X(antenna_gain_sidelobe) X(sic_attenuation) X(seed) X(rate_ul_min)   \
  X(rate_ul_max) X(rate_dl_min) X(rate_dl_max) X(budget_min) X(budget_max) X(p_max_link)            \
  X(num_subchannels) X(num_access_subchannels) X(bandwidth) X(noise_density) X(proc_delay)         \
  X(delay_ul) X(delay_dl) X(i_th) X(w_power) X(w_link) X(w_spectrum)

template <typename T>
void read_param(const ordered_json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer() || it->template get<long long>() < 0)
      throw ParseError(key, "expected a nonnegative integer");
    out = it->template get<T>();
  } else {
    out = gain(*it, key);
  }
}

}  // namespace io

inline GeneratorParams parse_generator_params(std::string_view text) {
  const auto doc = io::parse_document(text);
  if (!doc.is_object()) throw ParseError("", "top level must be an object");
  GeneratorParams p;
  static const std::vector<std::string> known = {
#define FDPLAN_NAME(f) #f,
      FDPLAN_PARAM_FIELDS(FDPLAN_NAME)
#undef FDPLAN_NAME
  };
  for (const auto& item : doc.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw ParseError(item.key(), "unknown generator parameter");
#define FDPLAN_READ(f) io::read_param(doc, #f, p.f);
  FDPLAN_PARAM_FIELDS(FDPLAN_READ)
#undef FDPLAN_READ
  return p;
}

inline std::string write_generator_params(const GeneratorParams& p) {
  ordered_json doc;
#define FDPLAN_WRITE(f) doc[#f] = p.f;
  FDPLAN_PARAM_FIELDS(FDPLAN_WRITE)
#undef FDPLAN_WRITE
  return doc.dump(2) + "\n";
}

#undef FDPLAN_PARAM_FIELDS

// Free-space gain (c / (4 pi d f))^2 scaled by (d / 1 m)^(2 - alpha); distances
// below 1 m are treated as 1 m.
inline double friis_gain(double distance, double carrier_freq, double pathloss_exponent,
                         double tx_gain = 1.0, double rx_gain = 1.0) {
  constexpr double c = 299792458.0;
  const double d = std::max(distance, 1.0);
  const double fs = c / (4.0 * std::numbers::pi * d * carrier_freq);
  return tx_gain * rx_gain * fs * fs * std::pow(d, 2.0 - pathloss_exponent);
}

// Uniform doubles in [0, 1) from the top 53 bits of a 64-bit Mersenne Twister.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double between(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

struct GeneratedScenario {
  Scenario scenario;
  std::optional<std::string> warning;  // set when no pair of nodes is in range
};

inline GeneratedScenario generate_synthetic(const GeneratorParams& p) {
  if (auto bad = check_params(p); !bad.empty()) throw std::invalid_argument(bad.front());
  UniformStream rng(p.seed);
  Scenario s;
  const std::size_t nn = p.num_root + p.num_nonroot;
  for (std::size_t i = 0; i < nn; ++i) {
    Node n;
    n.id = i;
    n.kind = i < p.num_root ? NodeKind::Root : NodeKind::NonRoot;
    n.position = {rng.between(0.0, p.area_side), rng.between(0.0, p.area_side), 0.0};
    const double ul = rng.between(p.rate_ul_min, p.rate_ul_max);
    const double dl = rng.between(p.rate_dl_min, p.rate_dl_max);
    n.power_budget = rng.between(p.budget_min, p.budget_max);
    n.rate_ul = n.is_root() ? 0.0 : ul;
    n.rate_dl = n.is_root() ? 0.0 : dl;
    n.proc_delay = p.proc_delay;
    s.nodes.push_back(n);
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    const auto& x = s.nodes[a].position;
    const auto& y = s.nodes[b].position;
    return std::hypot(x[0] - y[0], x[1] - y[1], x[2] - y[2]);
  };
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = 0; j < nn; ++j)
      if (i != j && dist(i, j) <= p.max_link_distance) s.links.push_back({i, j, p.p_max_link, 0.0});

  const std::size_t nl = s.links.size();
  const std::size_t nf = p.num_subchannels;
  s.spectrum.num_subchannels = nf;
  s.spectrum.bandwidth = p.bandwidth;
  for (std::size_t f = 0; f < p.num_access_subchannels; ++f) s.spectrum.access_subchannels.push_back(f);
  s.spectrum.noise_power = make_matrix(nl, nf, p.noise_density * p.bandwidth);

  const double gb = p.tx_antenna_gain_boresight;
  const double gs = p.antenna_gain_sidelobe;
  auto path = [&](std::size_t a, std::size_t b, double gt, double gr) {
    return friis_gain(dist(a, b), p.carrier_freq, p.pathloss_exponent, gt, gr);
  };
  s.gains.lambda = make_matrix(nl, nf);
  s.gains.gamma = make_tensor(nl, nl, nf);
  s.gains.omega = make_tensor(nl, nn, nf);
  for (std::size_t v = 0; v < nl; ++v) {
    const auto& lv = s.links[v];
    const double lam = path(lv.from, lv.to, gb, gb);
    for (std::size_t f = 0; f < nf; ++f) s.gains.lambda[v][f] = lam;
    for (std::size_t a = 0; a < nl; ++a) {
      if (a == v) continue;
      const auto& la = s.links[a];
      double g;
      if (la.from == lv.to) {
        g = p.sic_attenuation;
      } else {
        const double gt = la.to == lv.to ? gb : gs;
        const double gr = la.from == lv.from ? gb : gs;
        g = path(la.from, lv.to, gt, gr);
      }
      for (std::size_t f = 0; f < nf; ++f) s.gains.gamma[v][a][f] = g;
    }
    for (std::size_t m = 0; m < nn; ++m) {
      const double g = m == lv.from ? p.sic_attenuation : path(lv.from, m, m == lv.to ? gb : gs, gs);
      for (std::size_t f = 0; f < nf; ++f) s.gains.omega[v][m][f] = g;
    }
  }

  s.costs = {p.w_power, p.w_link, p.w_spectrum};
  s.limits.i_th = make_matrix(nn, p.num_access_subchannels, p.i_th);
  s.limits.delay_ul = p.delay_ul;
  s.limits.delay_dl = p.delay_dl;

  GeneratedScenario out;
  out.scenario = std::move(s);
  if (nl == 0) out.warning = "no pair of nodes lies within max_link_distance; the scenario has zero links";
  return out;
}

}  // namespace fdplan
