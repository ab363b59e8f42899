#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "support.hpp"

using namespace fdtest;

namespace {

struct Reference {
  bool feasible = false;
  double objective = 0.0;
};

// Solves a small dense system by Gaussian elimination with partial pivoting.
std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-10) return std::nullopt;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double m = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= m * a[c][k];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Vertex enumeration over a bounded LP: fixed variables are substituted, then
// every choice of n tight hyperplanes among the rows and bounds is tried.
Reference vertex_oracle(const LinearProgram& lp) {
  std::vector<std::size_t> free_vars;
  std::vector<double> fixed(lp.num_vars(), 0.0);
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    if (lp.lower[j] == lp.upper[j]) fixed[j] = lp.lower[j];
    else free_vars.push_back(j);
  }
  const std::size_t n = free_vars.size();
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  auto reduce = [&](const SparseRow& row, double rhs) {
    Plane p{std::vector<double>(n, 0.0), rhs};
    for (const auto& t : row) {
      auto it = std::find(free_vars.begin(), free_vars.end(), t.var);
      if (it == free_vars.end()) p.b -= t.coef * fixed[t.var];
      else p.a[static_cast<std::size_t>(it - free_vars.begin())] += t.coef;
    }
    return p;
  };
  for (std::size_t i = 0; i < lp.le_rows.size(); ++i) planes.push_back(reduce(lp.le_rows[i], lp.le_rhs[i]));
  for (std::size_t i = 0; i < lp.eq_rows.size(); ++i) planes.push_back(reduce(lp.eq_rows[i], lp.eq_rhs[i]));
  for (std::size_t k = 0; k < n; ++k) {
    Plane lo{std::vector<double>(n, 0.0), lp.lower[free_vars[k]]};
    lo.a[k] = 1.0;
    planes.push_back(lo);
    Plane hi{std::vector<double>(n, 0.0), lp.upper[free_vars[k]]};
    hi.a[k] = 1.0;
    planes.push_back(hi);
  }
  auto feasible = [&](const std::vector<double>& full) {
    return lp.max_violation(full) <= 1e-9;
  };
  auto expand = [&](const std::vector<double>& y) {
    auto full = fixed;
    for (std::size_t k = 0; k < n; ++k) full[free_vars[k]] = y[k];
    return full;
  };
  Reference best;
  if (n == 0) {
    if (feasible(fixed)) best = {true, lp.evaluate_objective(fixed)};
    return best;
  }
  std::vector<std::size_t> pick(n);
  for (std::size_t k = 0; k < n; ++k) pick[k] = k;
  const std::size_t m = planes.size();
  for (;;) {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (auto i : pick) {
      a.push_back(planes[i].a);
      b.push_back(planes[i].b);
    }
    if (auto y = solve_dense(a, b)) {
      const auto full = expand(*y);
      if (feasible(full)) {
        const double v = lp.evaluate_objective(full);
        if (!best.feasible || v < best.objective) best = {true, v};
      }
    }
    std::size_t k = n;
    while (k > 0 && pick[k - 1] == m - n + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t t = k; t < n; ++t) pick[t] = pick[t - 1] + 1;
  }
  return best;
}

LinearProgram random_lp(Rng& rng, std::size_t n, std::size_t rows, bool anchored) {
  LinearProgram lp;
  std::vector<double> anchor(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = std::round(rng.uniform(-3.0, 1.0));
    const double hi = lo + std::round(rng.uniform(1.0, 5.0));
    lp.add_var(lo, hi, std::round(rng.uniform(-5.0, 5.0)));
    anchor[j] = rng.uniform(lo, hi);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    SparseRow row;
    double at = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = std::round(rng.uniform(-5.0, 5.0));
      if (c == 0.0) continue;
      row.push_back({j, c});
      at += c * anchor[j];
    }
    if (row.empty()) continue;
    if (i == 0 && rng.coin(0.3)) {
      lp.add_eq(row, anchored ? at : std::round(rng.uniform(-5.0, 5.0)));
    } else {
      lp.add_le(row, anchored ? at + rng.uniform(0.0, 2.0) : std::round(rng.uniform(-8.0, 4.0)));
    }
  }
  return lp;
}

}  // namespace

TEST(SolveLp, LowerBoundRow) {
  LinearProgram lp;
  const auto x = lp.add_var(0.0, kInf, 1.0);
  lp.add_ge({{x, 1.0}}, 3.0);
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.x[x], 3.0, 1e-9);
  EXPECT_NEAR(r.objective, 3.0, 1e-9);
}

TEST(SolveLp, Unbounded) {
  LinearProgram lp;
  lp.add_var(0.0, kInf, -1.0);
  EXPECT_EQ(solve_lp(lp).status, SolveStatus::Unbounded);
}

TEST(SolveLp, Infeasible) {
  LinearProgram lp;
  const auto x = lp.add_var(0.0, 0.5, 1.0);
  const auto y = lp.add_var(0.0, 0.5, 1.0);
  lp.add_ge({{x, 1.0}, {y, 1.0}}, 2.0);
  EXPECT_EQ(solve_lp(lp).status, SolveStatus::Infeasible);
}

TEST(SolveLp, IterationCapIsStalledNotSilent) {
  Rng rng(40);
  LinearProgram lp;
  for (int j = 0; j < 6; ++j) lp.add_var(0.0, 10.0, -rng.uniform(1.0, 2.0));
  for (int i = 0; i < 6; ++i) {
    SparseRow row;
    for (std::size_t j = 0; j < 6; ++j) row.push_back({j, rng.uniform(0.5, 2.0)});
    lp.add_le(row, rng.uniform(5.0, 10.0));
  }
  SolverOptions opts;
  opts.max_iterations = 1;
  EXPECT_EQ(solve_lp(lp, opts).status, SolveStatus::Stalled);
}

TEST(SolveLp, RejectsMalformedInput) {
  LinearProgram lp;
  lp.add_var(1.0, 0.0, 1.0);
  EXPECT_THROW(solve_lp(lp), std::invalid_argument);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  Rng rng(41);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto n = 1 + rng.index(3);
    const auto lp = random_lp(rng, n, 1 + rng.index(4), rng.coin(0.7));
    const auto ref = vertex_oracle(lp);
    const auto got = solve_lp(lp);
    if (ref.feasible) {
      ++feasible;
      ASSERT_EQ(got.status, SolveStatus::Optimal) << "trial " << trial;
      EXPECT_NEAR(got.objective, ref.objective, 1e-7 * (1.0 + std::abs(ref.objective))) << "trial " << trial;
      EXPECT_LE(lp.max_violation(got.x), 1e-7);
    } else {
      ++infeasible;
      EXPECT_EQ(got.status, SolveStatus::Infeasible) << "trial " << trial;
    }
  }
  EXPECT_GT(feasible, 100);
  EXPECT_GT(infeasible, 10);
}

TEST(SolveLp, WeakDualityCertificate) {
  Rng rng(42);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto lp = random_lp(rng, 2 + rng.index(4), 2 + rng.index(5), true);
    const auto r = solve_lp(lp);
    if (r.status != SolveStatus::Optimal) continue;
    ASSERT_EQ(r.duals.size(), lp.num_rows());
    // Rebuild reduced costs from the duals and bound the objective from below.
    std::vector<double> d = lp.objective;
    double bound = 0.0;
    for (std::size_t i = 0; i < lp.le_rows.size(); ++i) {
      EXPECT_LE(r.duals[i], 1e-9);
      bound += r.duals[i] * lp.le_rhs[i];
      for (const auto& t : lp.le_rows[i]) d[t.var] -= r.duals[i] * t.coef;
    }
    for (std::size_t i = 0; i < lp.eq_rows.size(); ++i) {
      const double y = r.duals[lp.le_rows.size() + i];
      bound += y * lp.eq_rhs[i];
      for (const auto& t : lp.eq_rows[i]) d[t.var] -= y * t.coef;
    }
    for (std::size_t j = 0; j < lp.num_vars(); ++j) bound += d[j] > 0.0 ? d[j] * lp.lower[j] : d[j] * lp.upper[j];
    const double cx = lp.evaluate_objective(r.x);
    EXPECT_GE(cx, bound - 1e-6 * (1.0 + std::abs(cx)));
    EXPECT_LE(cx, bound + 1e-6 * (1.0 + std::abs(cx)));
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(SolveLp, Deterministic) {
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const auto lp = random_lp(rng, 4, 4, true);
    const auto a = solve_lp(lp);
    const auto b = solve_lp(lp);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.x, b.x);
  }
}

namespace {

LinearProgram y_example() {
  LinearProgram lp;
  const auto x = lp.add_var(0.0, kInf, 1.0);
  const auto y = lp.add_var(0.0, 1.0, 10.0);
  lp.mark_integral(y);
  lp.add_le({{x, 1.0}, {y, -5.0}}, 0.0);
  lp.add_ge({{x, 1.0}}, 3.0);
  return lp;
}

LinearProgram random_milp(Rng& rng, std::size_t binaries, std::size_t continuous) {
  auto lp = random_lp(rng, continuous, 1 + rng.index(3), true);
  std::vector<std::size_t> bins;
  for (std::size_t k = 0; k < binaries; ++k) {
    bins.push_back(lp.add_var(0.0, 1.0, std::round(rng.uniform(-4.0, 6.0))));
    lp.mark_integral(bins.back());
  }
  for (std::size_t i = 0; i < 1 + rng.index(4); ++i) {
    SparseRow row;
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
      if (rng.coin(0.6)) row.push_back({j, std::round(rng.uniform(-4.0, 4.0))});
    if (row.empty()) continue;
    lp.add_le(row, std::round(rng.uniform(-2.0, 6.0)));
  }
  // Couple some continuous variables to binaries, big-M style.
  for (std::size_t j = 0; j < continuous; ++j)
    if (rng.coin(0.5)) lp.add_le({{j, 1.0}, {bins[rng.index(binaries)], -lp.upper[j] - 1.0}}, 0.0);
  return lp;
}

}  // namespace

TEST(SolveMilp, BinaryGatesContinuous) {
  const auto r = solve_milp(y_example());
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.x[0], 3.0, 1e-9);
  EXPECT_EQ(r.x[1], 1.0);
  EXPECT_NEAR(r.objective, 13.0, 1e-9);
  const auto b = brute_force_milp(y_example());
  ASSERT_EQ(b.status, SolveStatus::Optimal);
  EXPECT_NEAR(b.objective, 13.0, 1e-9);
}

// A large big-M lets the relaxation carry a small demand with the binary
// inside int_tol of zero; rounding that node must not lose the optimum.
TEST(SolveMilp, NearIntegralBigMStillBranches) {
  LinearProgram lp;
  const auto x = lp.add_var(0.0, kInf, 1.0);
  const auto y = lp.add_var(0.0, 1.0, 10.0);
  lp.mark_integral(y);
  lp.add_le({{x, 1.0}, {y, -1e8}}, 0.0);
  lp.add_ge({{x, 1.0}}, 1e-2);
  const auto r = solve_milp(lp);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.x[y], 1.0);
  EXPECT_NEAR(r.objective, 10.01, 1e-9);
  EXPECT_NEAR(brute_force_milp(lp).objective, 10.01, 1e-9);
}

TEST(SolveMilp, ContinuousOnlyMatchesLp) {
  Rng rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const auto lp = random_lp(rng, 3, 3, true);
    const auto a = solve_lp(lp);
    const auto b = solve_milp(lp);
    EXPECT_EQ(a.status, b.status);
    if (a.status == SolveStatus::Optimal) {
      EXPECT_EQ(a.x, b.x);
      EXPECT_EQ(b.stats.nodes, 1u);
    }
  }
}

TEST(BruteForce, InfeasibleForEveryFixing) {
  LinearProgram lp;
  const auto a = lp.add_var(0.0, 1.0, 1.0);
  const auto b = lp.add_var(0.0, 1.0, 1.0);
  lp.mark_integral(a);
  lp.mark_integral(b);
  lp.add_ge({{a, 1.0}, {b, 1.0}}, 3.0);
  EXPECT_EQ(brute_force_milp(lp).status, SolveStatus::Infeasible);
  EXPECT_EQ(solve_milp(lp).status, SolveStatus::Infeasible);
}

TEST(BruteForce, TiesKeepTheEarliestFixing) {
  LinearProgram lp;
  const auto a = lp.add_var(0.0, 1.0, 1.0);
  const auto b = lp.add_var(0.0, 1.0, 1.0);
  lp.mark_integral(a);
  lp.mark_integral(b);
  lp.add_ge({{a, 1.0}, {b, 1.0}}, 1.0);
  const auto r = brute_force_milp(lp);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.x[a], 0.0);
  EXPECT_EQ(r.x[b], 1.0);
}

TEST(BruteForce, TooManyBinaries) {
  LinearProgram lp;
  for (int k = 0; k < 21; ++k) lp.mark_integral(lp.add_var(0.0, 1.0, 1.0));
  EXPECT_THROW(brute_force_milp(lp), std::invalid_argument);
}

TEST(SolveMilp, NodeBudgetGivesNotProven) {
  LinearProgram lp;
  const double w[] = {5, 7, 9, 11, 13, 6, 8, 10};
  SparseRow row;
  for (int k = 0; k < 8; ++k) {
    const auto j = lp.add_var(0.0, 1.0, -w[k] - 0.5 * k);
    lp.mark_integral(j);
    row.push_back({j, w[k]});
  }
  lp.add_le(row, 30.5);
  SolverOptions opts;
  opts.node_limit = 2;
  const auto r = solve_milp(lp, opts);
  EXPECT_EQ(r.status, SolveStatus::NotProven);
  opts.node_limit = 200000;
  const auto full = solve_milp(lp, opts);
  ASSERT_EQ(full.status, SolveStatus::Optimal);
  EXPECT_NEAR(full.objective, brute_force_milp(lp).objective, 1e-9);
}

TEST(SolveMilp, MatchesBruteForceOnRandomEightBinaryInstances) {
  Rng rng(45);
  int optimal = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto lp = random_milp(rng, 8, 1 + rng.index(3));
    const auto a = solve_milp(lp);
    const auto b = brute_force_milp(lp);
    ASSERT_EQ(a.status, b.status) << "trial " << trial;
    if (b.status != SolveStatus::Optimal) continue;
    ++optimal;
    EXPECT_NEAR(a.objective, b.objective, 1e-6 * std::max(1.0, std::abs(b.objective))) << "trial " << trial;
    for (auto j : lp.integral) EXPECT_TRUE(a.x[j] == 0.0 || a.x[j] == 1.0);
  }
  EXPECT_GT(optimal, 30);
}

TEST(SolveMilp, MatchesEnumerationOracle) {
  Rng rng(46);
  for (int trial = 0; trial < 60; ++trial) {
    auto lp = random_milp(rng, 3, 2);
    Reference best;
    for (unsigned mask = 0; mask < 8; ++mask) {
      auto fixed = lp;
      for (std::size_t t = 0; t < 3; ++t) {
        const double v = (mask >> t) & 1U;
        fixed.lower[lp.integral[t]] = fixed.upper[lp.integral[t]] = v;
      }
      const auto r = vertex_oracle(fixed);
      if (r.feasible && (!best.feasible || r.objective < best.objective)) best = r;
    }
    const auto got = solve_milp(lp);
    if (!best.feasible) {
      EXPECT_EQ(got.status, SolveStatus::Infeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(got.status, SolveStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(got.objective, best.objective, 1e-6 * std::max(1.0, std::abs(best.objective)));
  }
}

TEST(SolveMilp, WarmStartDoesNotChangeTheOptimum) {
  Rng rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const auto lp = random_milp(rng, 6, 2);
    const auto cold = solve_milp(lp);
    if (cold.status != SolveStatus::Optimal) continue;
    BinaryFixing warm;
    for (auto j : lp.integral) warm.push_back(static_cast<std::uint8_t>(cold.x[j]));
    const auto hot = solve_milp(lp, {}, warm);
    ASSERT_EQ(hot.status, SolveStatus::Optimal);
    EXPECT_NEAR(hot.objective, cold.objective, 1e-6 * std::max(1.0, std::abs(cold.objective)));
  }
}

TEST(SolveMilp, Deterministic) {
  Rng rng(48);
  for (int trial = 0; trial < 20; ++trial) {
    const auto lp = random_milp(rng, 8, 2);
    const auto a = solve_milp(lp);
    const auto b = solve_milp(lp);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.stats.nodes, b.stats.nodes);
  }
}
