#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace fdtest;

namespace {

double exact_f1(const Scenario& s, const PowerVector& p, std::size_t l, std::size_t f) {
  return s.spectrum.bandwidth * std::log2(received_aggregate(s, p, l, f));
}

double exact_f2(const Scenario& s, const PowerVector& p, std::size_t l, std::size_t f) {
  return s.spectrum.bandwidth * std::log2(interference_plus_noise(s, p, l, f));
}

}  // namespace

TEST(ChordPieces, ThroughPowersOfTwo) {
  const auto pieces = chord_pieces({1.0, 2.0, 4.0}, 1.0);
  ASSERT_EQ(pieces.size(), 2u);
  EXPECT_NEAR(pieces[0].slope, 1.0, 1e-15);
  EXPECT_NEAR(pieces[0].intercept, -1.0, 1e-15);
  EXPECT_NEAR(pieces[1].slope, 0.5, 1e-15);
  EXPECT_NEAR(pieces[1].intercept, 0.0, 1e-15);
  EXPECT_NEAR(evaluate_min(pieces, 3.0), 1.5, 1e-15);
  EXPECT_LE(evaluate_min(pieces, 3.0), std::log2(3.0));
  EXPECT_NEAR(evaluate_min(pieces, 2.0), 1.0, 1e-15);
}

TEST(ChordPieces, RejectsBadBreakpoints) {
  EXPECT_THROW(chord_pieces({1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(chord_pieces({2.0, 1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(chord_pieces({0.0, 1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(chord_pieces({1.0, 1.0}, 1.0), std::invalid_argument);
}

TEST(TaylorF2, TangentAtTwo) {
  const auto t = taylor_f2(2.0, 1.0);
  EXPECT_NEAR(t.slope, 1.0 / (2.0 * std::log(2.0)), 1e-15);
  EXPECT_NEAR(t.slope, 0.72135, 1e-5);
  EXPECT_NEAR(t(2.0), 1.0, 1e-15);
  EXPECT_NEAR(t(4.0), 2.4427, 1e-4);
  EXPECT_GE(t(4.0), 2.0);
  EXPECT_NEAR(t(1.0), 0.2787, 1e-4);
  EXPECT_GE(t(1.0), 0.0);
  EXPECT_THROW(taylor_f2(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(taylor_f2(-1.0, 1.0), std::invalid_argument);
}

TEST(TaylorF2, OverestimatesEverywhere) {
  Rng rng(31);
  for (int k = 0; k < 2000; ++k) {
    const double t0 = rng.log_uniform(1e-14, 1e2);
    const double bw = rng.log_uniform(1.0, 1e9);
    const auto piece = taylor_f2(t0, bw);
    const double t = rng.log_uniform(1e-14, 1e3);
    EXPECT_GE(piece(t) + 1e-9 * bw, bw * std::log2(t));
  }
}

TEST(BuildApprox, NoiseFloorTangentAtZeroPower) {
  const auto s = single_link();
  const auto a = build_approx(s, PowerVector::zeros(s), 8);
  const auto& e = a.at(0, 0);
  EXPECT_EQ(e.t0, 1e-10);
  EXPECT_NEAR(e.f2_tangent(1e-10), 10e6 * std::log2(1e-10), 1e-9 * 10e6);
  EXPECT_EQ(e.breakpoints.front(), 1e-10);
  EXPECT_NEAR(e.breakpoints.back(), 1e-10 + 1e-6 * 1.0, 1e-22);
  EXPECT_EQ(e.f1_pieces.size(), 8u);
}

TEST(BuildApprox, SingleSegmentIsStillALowerBound) {
  const auto s = single_link();
  const auto a = build_approx(s, PowerVector::zeros(s), 1);
  EXPECT_EQ(a.at(0, 0).f1_pieces.size(), 1u);
  auto p = PowerVector::zeros(s);
  for (double x : {0.0, 1e-6, 3e-4, 0.1, 1.0}) {
    p(0, 0) = x;
    EXPECT_LE(a.capacity(s, p, 0, 0), link_capacity(s, p, 0, 0) + 1e-9 * s.spectrum.bandwidth);
  }
}

TEST(BuildApprox, DeadReceiverGetsConstantPiece) {
  auto s = single_link();
  s.gains.lambda[0][0] = 0.0;
  const auto a = build_approx(s, PowerVector::zeros(s), 4);
  ASSERT_EQ(a.at(0, 0).f1_pieces.size(), 1u);
  EXPECT_EQ(a.at(0, 0).f1_pieces[0].slope, 0.0);
  EXPECT_NEAR(a.at(0, 0).f1_pieces[0].intercept, 10e6 * std::log2(1e-10), 1e-6);
}

TEST(BuildApprox, RejectsBadInput) {
  const auto s = single_link();
  EXPECT_THROW(build_approx(s, PowerVector::zeros(s), 0), std::invalid_argument);
  EXPECT_THROW(build_approx(s, PowerVector(2, 1), 4), std::invalid_argument);
  auto neg = PowerVector::zeros(s);
  neg(0, 0) = -1.0;
  EXPECT_THROW(build_approx(s, neg, 4), std::invalid_argument);
}

TEST(BuildApprox, ExactAtExpansionPoint) {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_scenario(rng, 2, 5, 1, 3);
    const auto p0 = random_powers(rng, s);
    const auto a = build_approx(s, p0, 1 + rng.index(32));
    for (std::size_t l = 0; l < s.num_links(); ++l)
      for (std::size_t f = 0; f < s.num_subchannels(); ++f) {
        const double exact = link_capacity(s, p0, l, f);
        EXPECT_NEAR(a.capacity(s, p0, l, f), exact, 1e-9 * s.spectrum.bandwidth);
      }
  }
}

TEST(BuildApprox, TightAtBreakpoints) {
  Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = random_scenario(rng, 2, 4, 1, 2);
    const auto a = build_approx(s, random_powers(rng, s), 1 + rng.index(16));
    const double bw = s.spectrum.bandwidth;
    for (const auto& e : a.entries)
      for (double b : e.breakpoints) EXPECT_NEAR(evaluate_min(e.f1_pieces, b), bw * std::log2(b), 1e-9 * bw);
  }
}

TEST(BuildApprox, ConservativeOnRandomPoints) {
  Rng rng(34);
  std::size_t checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_scenario(rng, 2, 5, 1, 3);
    const auto a = build_approx(s, random_powers(rng, s), 1 + rng.index(64));
    const double bw = s.spectrum.bandwidth;
    for (int k = 0; k < 200; ++k) {
      const auto p = random_powers(rng, s, 0.3);
      for (std::size_t l = 0; l < s.num_links(); ++l)
        for (std::size_t f = 0; f < s.num_subchannels(); ++f) {
          const double approx_f1 = evaluate_min(a.at(l, f).f1_pieces, received_aggregate(s, p, l, f));
          const double approx_f2 = a.at(l, f).f2_tangent(interference_plus_noise(s, p, l, f));
          EXPECT_LE(approx_f1, exact_f1(s, p, l, f) + 1e-9 * bw);
          EXPECT_GE(approx_f2, exact_f2(s, p, l, f) - 1e-9 * bw);
          EXPECT_LE(a.capacity(s, p, l, f), link_capacity(s, p, l, f) + 1e-9 * bw);
          ++checked;
        }
    }
  }
  EXPECT_GT(checked, 10000u);
}

TEST(BuildApprox, RefinementNeverLowersTheBound) {
  Rng rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_scenario(rng, 2, 4, 1, 2);
    const auto p0 = random_powers(rng, s);
    const std::size_t k = 1 + rng.index(16);
    const auto coarse = build_approx(s, p0, k);
    const auto fine = build_approx(s, p0, 2 * k);
    const double bw = s.spectrum.bandwidth;
    for (int n = 0; n < 100; ++n) {
      const auto p = random_powers(rng, s, 0.3);
      for (std::size_t l = 0; l < s.num_links(); ++l)
        for (std::size_t f = 0; f < s.num_subchannels(); ++f)
          EXPECT_GE(fine.capacity(s, p, l, f), coarse.capacity(s, p, l, f) - 1e-9 * bw);
    }
  }
}
