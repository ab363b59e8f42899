#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace fdtest;

TEST(ParseScenario, CanonicalTwoNodeDocument) {
  const auto s = fixture("two_node.json");
  ASSERT_EQ(s.num_nodes(), 2u);
  EXPECT_TRUE(s.nodes[0].is_root());
  EXPECT_FALSE(s.nodes[1].is_root());
  ASSERT_EQ(s.num_links(), 2u);
  EXPECT_EQ(s.links[0].from, 1u);
  EXPECT_EQ(s.links[0].to, 0u);
  EXPECT_EQ(s.spectrum.access_subchannels, std::vector<std::size_t>{0});
}

TEST(ParseScenario, DecibelGainsBecomeLinear) {
  const auto s = fixture("two_node.json");
  EXPECT_NEAR(s.gains.gamma[0][1][0], 1e-11, 1e-24);
  EXPECT_NEAR(s.gains.lambda[0][0], std::pow(10.0, -7.5), 1e-20);
  EXPECT_NEAR(s.gains.omega[0][1][1], 1e-12, 1e-25);
  EXPECT_EQ(s.gains.gamma[0][0][0], 0.0);
}

TEST(ParseScenario, NoiseDefaultsToDensityTimesBandwidth) {
  const auto s = fixture("two_node.json");
  EXPECT_NEAR(s.spectrum.noise_power[1][1], 4e-21 * 20e6, 1e-27);
}

TEST(ParseScenario, TruncatedDocumentNamesByteOffset) {
  const auto text = slurp(fixture_path("two_node.json"));
  try {
    parse_scenario(text.substr(0, text.size() / 2));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
  }
}

TEST(ParseScenario, SchemaErrorNamesPath) {
  auto text = slurp(fixture_path("single_link.json"));
  const auto at = text.find("\"bandwidth_hz\"");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 14, "\"bandwidth\"");
  try {
    parse_scenario(text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("spectrum.bandwidth_hz"), std::string::npos) << e.what();
  }
}

TEST(ParseScenario, InvariantBreachIsRejected) {
  auto text = slurp(fixture_path("single_link.json"));
  const auto at = text.find("\"noise_w\": 1e-10");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 16, "\"noise_w\": 0");
  EXPECT_THROW(parse_scenario(text), std::exception);
}

TEST(RoundTrip, EveryFixture) {
  for (const auto& name : scenario_fixtures()) {
    const auto s = fixture(name);
    const auto again = parse_scenario(write_scenario(s));
    EXPECT_EQ(again, s) << name;
    EXPECT_EQ(write_scenario(again), write_scenario(s)) << name;
  }
}

TEST(RoundTrip, GeneratedScenarios) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorParams p;
    p.seed = seed;
    p.num_nonroot = 1 + seed % 5;
    p.num_access_subchannels = seed % 2;
    const auto s = generate_synthetic(p).scenario;
    EXPECT_EQ(parse_scenario(write_scenario(s)), s) << seed;
  }
}

TEST(RoundTrip, EmptyPlan) {
  const auto s = fixture("zero_demand.json");
  Plan p = empty_plan(s);
  p.cost = network_cost(s, p);
  const auto q = parse_plan(write_plan(p));
  EXPECT_EQ(q, p);
  EXPECT_EQ(q.cost.total, 0.0);
}

TEST(RoundTrip, PlannedPlan) {
  const auto s = fixture("single_link.json");
  auto r = plan(s);
  ASSERT_EQ(r.status, PlanStatus::Optimal);
  const auto q = parse_plan(write_plan(r.plan));
  EXPECT_EQ(q, r.plan);
}

TEST(RoundTrip, PlanWithZeroLinks) {
  GeneratorParams gp;
  gp.num_nonroot = 0;
  const auto s = generate_synthetic(gp).scenario;
  Plan p = empty_plan(s);
  const auto q = parse_plan(write_plan(p));
  EXPECT_EQ(q, p);
  EXPECT_EQ(q.active_subchannels.size(), s.num_subchannels());
}

TEST(CrossCheck, UnknownLinkIsRejected) {
  const auto s = fixture("two_node.json");
  Plan p = empty_plan(s);
  p.link_ids[1] = {1, 2};
  EXPECT_THROW(cross_check_links(s, p), std::invalid_argument);
  p.link_ids[1] = {0, 1};
  EXPECT_NO_THROW(cross_check_links(s, p));
}

TEST(Generator, SingleRootHasNoLinks) {
  GeneratorParams p;
  p.num_nonroot = 0;
  p.num_root = 1;
  const auto g = generate_synthetic(p);
  EXPECT_EQ(g.scenario.num_nodes(), 1u);
  EXPECT_EQ(g.scenario.num_links(), 0u);
  EXPECT_TRUE(g.warning.has_value());
}

TEST(Generator, DeterministicPerSeed) {
  GeneratorParams a;
  a.seed = 7;
  GeneratorParams b = a;
  b.seed = 8;
  const auto first = write_scenario(generate_synthetic(a).scenario);
  EXPECT_EQ(write_scenario(generate_synthetic(a).scenario), first);
  EXPECT_NE(write_scenario(generate_synthetic(b).scenario), first);
}

TEST(Generator, FreeSpaceGain) {
  const double c = 299792458.0;
  const double amplitude = c / (4.0 * std::numbers::pi * 100.0 * 60e9);
  const double oracle = amplitude * amplitude;
  EXPECT_NEAR(friis_gain(100.0, 60e9, 2.0), oracle, 1e-12 * oracle);
  EXPECT_NEAR(friis_gain(100.0, 60e9, 2.0), 1.581e-11, 1e-14);
  EXPECT_NEAR(friis_gain(100.0, 60e9, 3.0), oracle / 100.0, 1e-12 * oracle);
}

TEST(Generator, LambdaFallsWithDistance) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorParams p;
    p.seed = seed;
    p.num_nonroot = 5;
    p.pathloss_exponent = 2.0 + 0.25 * static_cast<double>(seed);
    const auto s = generate_synthetic(p).scenario;
    auto dist = [&](const Link& l) {
      const auto& a = s.nodes[l.from].position;
      const auto& b = s.nodes[l.to].position;
      return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    };
    for (std::size_t i = 0; i < s.num_links(); ++i)
      for (std::size_t j = 0; j < s.num_links(); ++j)
        if (dist(s.links[i]) < dist(s.links[j]) - 1e-9)
          EXPECT_GT(s.gains.lambda[i][0], s.gains.lambda[j][0]);
  }
}

TEST(Generator, OutputsAlwaysValidate) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    GeneratorParams p;
    p.seed = rng.next();
    p.num_nonroot = rng.index(8);
    p.num_root = 1 + rng.index(2);
    p.num_subchannels = 1 + rng.index(4);
    p.num_access_subchannels = rng.index(p.num_subchannels + 1);
    p.area_side = rng.uniform(10.0, 500.0);
    p.max_link_distance = rng.uniform(10.0, 400.0);
    p.sic_attenuation = rng.uniform(0.0, 1.0);
    EXPECT_TRUE(validate_scenario(generate_synthetic(p).scenario).empty());
  }
}

TEST(Generator, SelfInterferenceUsesSicAttenuation) {
  GeneratorParams p;
  p.seed = 3;
  p.num_nonroot = 3;
  p.area_side = 50.0;
  p.sic_attenuation = 1e-9;
  const auto s = generate_synthetic(p).scenario;
  const auto pairs = self_interference_pairs(s);
  ASSERT_FALSE(pairs.empty());
  for (auto [a, v] : pairs) EXPECT_EQ(s.gains.gamma[v][a][0], 1e-9);
}

TEST(Generator, BadParamsThrow) {
  GeneratorParams p;
  p.num_root = 0;
  EXPECT_THROW(generate_synthetic(p), std::invalid_argument);
}

TEST(GeneratorParamsDoc, RoundTripAndUnknownKey) {
  GeneratorParams p;
  p.seed = 99;
  p.num_nonroot = 6;
  p.sic_attenuation = 1e-10;
  EXPECT_EQ(parse_generator_params(write_generator_params(p)), p);
  EXPECT_THROW(parse_generator_params("{\"nonsense\": 1}"), ParseError);
  EXPECT_NO_THROW(parse_generator_params(slurp(fixture_path("params/gen_small.json"))));
}
