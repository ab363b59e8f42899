#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>

#include "fdplan/fdplan.hpp"

namespace {

using namespace fdplan;

enum Exit { kOk = 0, kInvalid = 1, kUsage = 2, kInfeasible = 3, kNotProven = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
  if (!out) throw UsageError("cannot write " + path);
}

Scenario load_scenario(const std::string& path) {
  try {
    return parse_scenario(read_file(path));
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

Plan load_plan(const std::string& path) {
  try {
    return parse_plan(read_file(path));
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// Six significant digits; integral values keep a trailing ".0".
std::string num(double v) {
  std::string s = fmt::format("{:.6g}", v + 0.0);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string plural(std::size_t n, const char* word) {
  return fmt::format("{} {}{}", n, word, n == 1 ? "" : "s");
}

int status_exit(PlanStatus s) {
  switch (s) {
    case PlanStatus::Optimal: return kOk;
    case PlanStatus::Infeasible: return kInfeasible;
    case PlanStatus::NotProven: return kNotProven;
  }
  return kNotProven;
}

C5Direction parse_c5(const std::string& v) {
  return v == "incoming" ? C5Direction::Incoming : C5Direction::AsPrinted;
}

void print_cost(const CostBreakdown& c) {
  fmt::print("{:<10} {:>14}\n", "term", "cost");
  fmt::print("{:<10} {:>14}\n", "power", num(c.power));
  fmt::print("{:<10} {:>14}\n", "link", num(c.link));
  fmt::print("{:<10} {:>14}\n", "spectrum", num(c.spectrum));
  fmt::print("{:<10} {:>14}\n", "total", num(c.total));
}

void print_report(const FeasibilityReport& r) {
  fmt::print("{:<12} {:>6} {:>14}  {}\n", "family", "rows", "max_violation", "worst");
  for (const auto& f : r.families) {
    const bool bad = !(f.max_violation <= r.tolerance);
    fmt::print("{:<12} {:>6} {:>14}  {}{}\n", f.family, f.rows, num(f.max_violation), f.worst,
               bad ? "  VIOLATED" : "");
  }
  for (const auto& f : r.families)
    if (!(f.max_violation <= r.tolerance))
      fmt::print("{} violation: {} at {}\n", f.family, num(f.max_violation), f.worst);
  fmt::print("{} (tolerance {})\n", r.feasible ? "feasible" : "infeasible", num(r.tolerance));
}

void write_trace(const std::string& path, const IterationTrace& trace) {
  std::ostringstream os;
  write_trace_csv(trace, os);
  write_file(path, os.str());
}

struct GenArgs {
  std::string params;
  std::string out;
  std::optional<std::size_t> nonroot, root, subchannels, access;
  std::optional<std::uint64_t> seed;
  std::optional<double> area, max_distance, bandwidth, sic;
};

int run_gen(const GenArgs& a) {
  GeneratorParams p;
  if (!a.params.empty()) {
    try {
      p = parse_generator_params(read_file(a.params));
    } catch (const ParseError& e) {
      throw UsageError(a.params + ": " + e.what());
    }
  }
  if (a.nonroot) p.num_nonroot = *a.nonroot;
  if (a.root) p.num_root = *a.root;
  if (a.subchannels) p.num_subchannels = *a.subchannels;
  if (a.access) p.num_access_subchannels = *a.access;
  if (a.seed) p.seed = *a.seed;
  if (a.area) p.area_side = *a.area;
  if (a.max_distance) p.max_link_distance = *a.max_distance;
  if (a.bandwidth) p.bandwidth = *a.bandwidth;
  if (a.sic) p.sic_attenuation = *a.sic;
  if (auto bad = check_params(p); !bad.empty()) throw UsageError("bad generator parameters: " + bad.front());

  const auto g = generate_synthetic(p);
  write_file(a.out, write_scenario(g.scenario));
  if (g.warning) fmt::print(stderr, "warning: {}\n", *g.warning);
  fmt::print("nodes {}, links {}, subchannels {}\n", g.scenario.num_nodes(), g.scenario.num_links(),
             g.scenario.num_subchannels());
  return kOk;
}

struct PlanArgs {
  std::string scenario;
  std::size_t segments = 16;
  std::size_t max_iters = 20;
  double tol = 1e-4;
  std::string trace, out, dump_lp;
  std::string engine = "bnb";
  std::string c5 = "as-printed";
};

int run_plan(const PlanArgs& a) {
  const auto s = load_scenario(a.scenario);
  PlanOptions o;
  o.segments = a.segments;
  o.max_outer_iters = a.max_iters;
  o.rel_cost_tol = a.tol;
  o.engine = a.engine == "brute" ? MilpEngine::BruteForce : MilpEngine::BranchAndBound;
  o.formulation.c5_dl_direction = parse_c5(a.c5);

  if (!a.dump_lp.empty()) {
    const auto form = build_milp(s, build_approx(s, initial_point(s), o.segments), o.formulation);
    std::ostringstream os;
    write_lp_format(form.lp, os);
    write_file(a.dump_lp, os.str());
  }

  const auto r = plan(s, o);
  if (!a.out.empty()) write_file(a.out, write_plan(r.plan));
  if (!a.trace.empty()) write_trace(a.trace, r.trace);

  fmt::print("status {}\n", to_string(r.status));
  if (!r.diagnosis.empty()) fmt::print("{}\n", r.diagnosis);
  if (r.status != PlanStatus::Infeasible || !r.trace.empty()) {
    fmt::print("cost {}, {}\n", num(r.plan.cost.total), plural(r.iterations, "iteration"));
    print_cost(r.plan.cost);
    fmt::print("active links {}, active subchannels {}\n", r.plan.num_active_links(),
               r.plan.num_active_subchannels());
  }
  return status_exit(r.status);
}

struct RetuneArgs {
  std::string scenario, plan_path, out, trace;
  std::size_t segments = 32;
  std::size_t max_iters = 50;
  std::string c5 = "as-printed";
};

int run_retune(const RetuneArgs& a) {
  const auto s = load_scenario(a.scenario);
  const auto current = load_plan(a.plan_path);
  try {
    cross_check_links(s, current);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("topology mismatch: ") + e.what());
  }
  RetuneOptions o;
  o.segments = a.segments;
  o.max_outer_iters = a.max_iters;
  o.formulation.c5_dl_direction = parse_c5(a.c5);
  const auto r = retune(s, current, o);
  if (!a.out.empty()) write_file(a.out, write_plan(r.plan));
  if (!a.trace.empty()) write_trace(a.trace, r.trace);

  fmt::print("status {}\n", to_string(r.status));
  if (!r.diagnosis.empty()) fmt::print("{}\n", r.diagnosis);
  fmt::print("ΔΣX = {} W\n", r.delta_total_power == 0.0 ? std::string("0") : num(r.delta_total_power));
  fmt::print("ΣX {} W -> {} W, {}\n", num(current.powers.total()), num(r.plan.powers.total()),
             plural(r.iterations, "iteration"));
  if (r.restored) fmt::print("feasibility restoration ran\n");
  if (r.status != PlanStatus::Infeasible) fmt::print("stationary {}\n", r.stationary ? "yes" : "no");
  return status_exit(r.status);
}

int run_eval(const std::string& scenario, const std::string& plan_path) {
  const auto s = load_scenario(scenario);
  auto p = load_plan(plan_path);
  try {
    cross_check_links(s, p);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("topology mismatch: ") + e.what());
  }
  fmt::print("{:>4} {:>9} {:>4} {:>12} {:>12} {:>12} {:>12} {:>12}\n", "link", "ends", "sub", "power_w",
             "sinr", "capacity", "flow_ul", "flow_dl");
  for (std::size_t l = 0; l < s.num_links(); ++l) {
    const auto ends = fmt::format("{}->{}", s.links[l].from, s.links[l].to);
    for (std::size_t f = 0; f < s.num_subchannels(); ++f) {
      if (!(p.powers(l, f) > 0.0)) continue;
      fmt::print("{:>4} {:>9} {:>4} {:>12} {:>12} {:>12} {:>12} {:>12}\n", l, ends, f, num(p.powers(l, f)),
                 num(sinr(s, p.powers, l, f)), num(link_capacity(s, p.powers, l, f)), num(p.flow_ul[l]),
                 num(p.flow_dl[l]));
    }
    if (s.links[l].wired_capacity > 0.0)
      fmt::print("{:>4} {:>9} {:>4} {:>12} {:>12} {:>12} {:>12} {:>12}\n", l, ends, "wire", "-", "-",
                 num(s.links[l].wired_capacity), num(p.flow_ul[l]), num(p.flow_dl[l]));
  }
  print_cost(network_cost(s, p));
  return kOk;
}

int run_validate(const std::string& scenario, const std::string& plan_path, double tol, const std::string& c5) {
  Scenario s;
  try {
    s = parse_scenario(read_file(scenario));
  } catch (const ParseError& e) {
    fmt::print("{}: {}\n", scenario, e.what());
    return kInvalid;
  }
  if (plan_path.empty()) {
    fmt::print("scenario valid: {} nodes, {} links, {} subchannels\n", s.num_nodes(), s.num_links(),
               s.num_subchannels());
    return kOk;
  }
  const auto p = load_plan(plan_path);
  try {
    cross_check_links(s, p);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("topology mismatch: ") + e.what());
  }
  const auto report = check_feasibility(s, p, tol, parse_c5(c5));
  print_report(report);
  return report.feasible ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fdplan: minimum-cost planning and power re-tuning for full-duplex wireless backhaul"};
  app.require_subcommand(1);
  const std::vector<std::string> c5_values{"as-printed", "incoming"};

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "generate a synthetic scenario");
  gen->add_option("--params", ga.params, "generator parameter file")->check(CLI::ExistingFile);
  gen->add_option("--out", ga.out, "scenario file to write")->required();
  gen->add_option("--nonroot", ga.nonroot, "non-root nodes");
  gen->add_option("--root", ga.root, "root nodes");
  gen->add_option("--subchannels", ga.subchannels, "subchannels");
  gen->add_option("--access", ga.access, "subchannels shared with the access network");
  gen->add_option("--seed", ga.seed, "random seed");
  gen->add_option("--area", ga.area, "side of the square deployment area, m");
  gen->add_option("--max-distance", ga.max_distance, "longest link, m");
  gen->add_option("--bandwidth", ga.bandwidth, "subchannel bandwidth, Hz");
  gen->add_option("--sic", ga.sic, "residual self-interference gain");

  PlanArgs pa;
  auto* pl = app.add_subcommand("plan", "plan a minimum-cost network");
  pl->add_option("scenario", pa.scenario, "scenario file")->required();
  pl->add_option("--segments", pa.segments, "chord segments per capacity term")->capture_default_str()
      ->check(CLI::PositiveNumber);
  pl->add_option("--max-iters", pa.max_iters, "outer iteration cap")->capture_default_str()
      ->check(CLI::PositiveNumber);
  pl->add_option("--tol", pa.tol, "relative cost change that stops the iteration")->capture_default_str()
      ->check(CLI::PositiveNumber);
  pl->add_option("--trace", pa.trace, "iteration trace CSV");
  pl->add_option("--out", pa.out, "plan file to write");
  pl->add_option("--engine", pa.engine, "MILP engine")->capture_default_str()
      ->check(CLI::IsMember({"bnb", "brute"}));
  pl->add_option("--dump-lp", pa.dump_lp, "write the first MILP in LP format");
  pl->add_option("--c5-dl-direction", pa.c5, "links summed by the downlink delay row")->capture_default_str()
      ->check(CLI::IsMember(c5_values));

  RetuneArgs ra;
  auto* rt = app.add_subcommand("retune", "re-tune powers on a fixed topology");
  rt->add_option("scenario", ra.scenario, "scenario file")->required();
  rt->add_option("plan", ra.plan_path, "current plan file")->required();
  rt->add_option("--out", ra.out, "plan file to write");
  rt->add_option("--trace", ra.trace, "iteration trace CSV");
  rt->add_option("--segments", ra.segments, "chord segments per capacity term")->capture_default_str()
      ->check(CLI::PositiveNumber);
  rt->add_option("--max-iters", ra.max_iters, "iteration cap")->capture_default_str()
      ->check(CLI::PositiveNumber);
  rt->add_option("--c5-dl-direction", ra.c5, "links summed by the downlink delay row")->capture_default_str()
      ->check(CLI::IsMember(c5_values));

  std::string ev_scenario, ev_plan;
  auto* ev = app.add_subcommand("eval", "evaluate a plan with exact capacities");
  ev->add_option("scenario", ev_scenario, "scenario file")->required();
  ev->add_option("plan", ev_plan, "plan file")->required();

  std::string va_scenario, va_plan, va_c5 = "as-printed";
  double va_tol = 1e-9;
  auto* va = app.add_subcommand("validate", "check a scenario, or a plan against a scenario");
  va->add_option("scenario", va_scenario, "scenario file")->required();
  va->add_option("plan", va_plan, "plan file");
  va->add_option("--tol", va_tol, "relative violation tolerance")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  va->add_option("--c5-dl-direction", va_c5, "links summed by the downlink delay row")->capture_default_str()
      ->check(CLI::IsMember(c5_values));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return run_gen(ga);
    if (*pl) return run_plan(pa);
    if (*rt) return run_retune(ra);
    if (*ev) return run_eval(ev_scenario, ev_plan);
    if (*va) return run_validate(va_scenario, va_plan, va_tol, va_c5);
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kNotProven;
  }
  return kUsage;
}
