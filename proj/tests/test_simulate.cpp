#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "uniconc/bounds.hpp"
#include "uniconc/distributions.hpp"
#include "uniconc/eprocess.hpp"
#include "uniconc/error.hpp"
#include "uniconc/rng.hpp"
#include "uniconc/simulate.hpp"
#include "uniconc/trajectory.hpp"

using namespace uniconc;

namespace {

Errc error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected uniconc::Error";
  return Errc::kInternal;
}

SimConfig cell(const char* dist, Inequality ineq, double eps, std::uint64_t m, std::uint64_t N,
               std::uint64_t reps, std::uint64_t seed = 1) {
  SimConfig c;
  c.spec = parse_distribution(dist);
  c.inequality = ineq;
  c.eps = eps;
  c.m = m;
  c.horizon = N;
  c.reps = reps;
  c.seed = seed;
  return c;
}

// Re-evaluates one replication's crossing from the raw sample stream with a
// two-pass variance, independently of the shared-trajectory engine.
bool crosses_directly(const SimConfig& c, std::uint64_t rep) {
  Sampler sampler(c.spec, c.seed, rep);
  std::vector<double> xs(c.horizon);
  sampler.fill(xs);
  const double sbar = resolved_sigma_bar(c);
  for (std::uint64_t k = 1; k <= c.horizon; ++k) {
    if (k < c.m) continue;
    const double s = std::accumulate(xs.begin(), xs.begin() + k, 0.0);
    const double kk = static_cast<double>(k);
    switch (c.inequality) {
      case Inequality::kL1:
        if (std::abs(s) >= c.eps * kk) return true;
        break;
      case Inequality::kLq:
        if (std::abs(s) >= c.eps * std::pow(kk, 1.0 / c.q)) return true;
        break;
      case Inequality::kLil:
        if (std::abs(s) >= lil_boundary(k, c.eps, sbar)) return true;
        break;
      case Inequality::kDarlingRobbins:
        if (std::abs(s) >= darling_robbins_boundary(k, c.eps, sbar)) return true;
        break;
      case Inequality::kStudentizedLil: {
        const double mean = s / kk;
        double ss = 0.0;
        for (std::uint64_t i = 0; i < k; ++i) ss += (xs[i] - mean) * (xs[i] - mean);
        const double sigma_hat = std::sqrt(ss / kk);
        if (std::abs(s) > 0.0 && std::abs(s) >= studentized_lil_boundary(k, c.eps, sigma_hat)) {
          return true;
        }
        break;
      }
    }
  }
  return false;
}

}  // namespace

// Reference intervals from an independent statistics package.
TEST(Wilson, MatchesReferenceIntervals) {
  struct Case {
    std::uint64_t x, n;
    double lo, hi;
  };
  for (const Case& c : {Case{0, 100, 0.0, 0.03699349820698569},
                        Case{50, 100, 0.4038315303659956, 0.5961684696340044},
                        Case{3, 10000, 0.00010203219941781007, 0.0008817357722363797},
                        Case{10000, 10000, 0.9996160016293234, 1.0},
                        Case{1, 1, 0.2065493143772374, 1.0}}) {
    const auto w = wilson_interval(c.x, c.n);
    EXPECT_NEAR(w.lo, c.lo, 1e-15) << c.x << "/" << c.n;
    EXPECT_NEAR(w.hi, c.hi, 1e-15) << c.x << "/" << c.n;
  }
}

TEST(WilsonProperty, IntervalContainsEstimate) {
  Rng rng(41, 0);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t n = 1 + rng.next_u64() % 100000;
    const std::uint64_t x = rng.next_u64() % (n + 1);
    const auto w = wilson_interval(x, n);
    const double p = static_cast<double>(x) / n;
    ASSERT_LE(0.0, w.lo);
    ASSERT_LE(w.lo, p);
    ASSERT_LE(p, w.hi);
    ASSERT_LE(w.hi, 1.0);
  }
}

TEST(Trajectory, StreamingVarianceMatchesTwoPass) {
  Rng rng(42, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const double shift = 100.0 * (rng.uniform() - 0.5);
    const auto xs = sample_stream(DistributionSpec::gaussian(0.1 + rng.uniform()), rep, 1000);
    TrajectoryState t;
    for (double x : xs) t.push(x + shift);
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x + shift;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x + shift - mean) * (x + shift - mean);
    ASSERT_NEAR(t.sigma_hat_sq(), ss / n, 1e-9 * ss / n);
    ASSERT_GE(t.sigma_hat_sq(), 0.0);
    ASSERT_NEAR(t.mu_hat(), mean, 1e-12 * std::max(1.0, std::abs(mean)));
  }
}

TEST(EstimateCrossing, LevelAboveMaximumNeverCrosses) {
  const auto est = estimate_crossing(cell("two-point:1", Inequality::kL1, 2.0, 1, 100, 500));
  EXPECT_EQ(est.crossings, 0u);
  EXPECT_EQ(est.phat, 0.0);
}

// Reference probability from an independent 10^7-replication run.
TEST(EstimateCrossing, GaussianShortHorizonMatchesHighRepRun) {
  const double reference = 0.0027212;
  const auto est = estimate_crossing(cell("gaussian:1", Inequality::kL1, 3.0, 1, 10, 1000000, 3));
  const double se = std::sqrt(reference * (1 - reference) / 1e6);
  EXPECT_NEAR(est.phat, reference, 4.0 * se);
}

TEST(EstimateCrossing, EngineMatchesDirectEvaluation) {
  std::vector<SimConfig> cells = {
      cell("gaussian:1", Inequality::kL1, 0.3, 5, 60, 300, 9),
      cell("gaussian:1", Inequality::kLil, 0.5, 2, 80, 300, 9),
      cell("gaussian:1", Inequality::kStudentizedLil, 0.2, 3, 80, 300, 9),
      cell("gaussian:1", Inequality::kDarlingRobbins, 0.5, 3, 80, 300, 9),
  };
  SimConfig lq = cell("gaussian:1", Inequality::kLq, 0.5, 10, 50, 300, 9);
  lq.q = 1.5;
  cells.push_back(lq);
  const auto batch = estimate_crossings(cells);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::uint64_t direct = 0;
    for (std::uint64_t r = 0; r < cells[i].reps; ++r) direct += crosses_directly(cells[i], r);
    EXPECT_EQ(batch[i].crossings, direct) << to_string(cells[i].inequality);
    EXPECT_EQ(batch[i].crossings, estimate_crossing(cells[i]).crossings);
  }
}

TEST(EstimateCrossing, DeterministicAcrossWorkerCounts) {
  SimConfig c = cell("pareto:1.5", Inequality::kL1, 0.2, 10, 500, 2000, 17);
  const auto one = estimate_crossing(c);
  c.workers = 3;
  const auto three = estimate_crossing(c);
  EXPECT_EQ(one.crossings, three.crossings);
  EXPECT_EQ(one.phat, three.phat);
}

TEST(EstimateCrossing, MomentHypothesisViolations) {
  SimConfig lq = cell("pareto:1.2", Inequality::kLq, 0.5, 10, 100, 10);
  lq.q = 1.5;
  EXPECT_EQ(error_code_of([&] { estimate_crossing(lq); }), Errc::kHypothesisViolated);
  EXPECT_EQ(error_code_of([] {
              estimate_crossing(cell("pareto:1.5", Inequality::kLil, 1.0, 10, 100, 10));
            }),
            Errc::kHypothesisViolated);
  EXPECT_EQ(error_code_of([] {
              estimate_crossing(cell("pareto:3", Inequality::kDarlingRobbins, 1.0, 10, 100, 10));
            }),
            Errc::kHypothesisViolated);
  SimConfig low = cell("gaussian:2", Inequality::kLil, 1.0, 10, 100, 10);
  low.sigma_bar = 1.0;
  EXPECT_EQ(error_code_of([&] { estimate_crossing(low); }), Errc::kHypothesisViolated);
}

TEST(EstimateCrossing, MalformedConfigsAreDomainErrors) {
  EXPECT_EQ(error_code_of([] { estimate_crossing(cell("gaussian:1", Inequality::kL1, 1, 10, 5, 1)); }),
            Errc::kDomain);
  EXPECT_EQ(error_code_of([] { estimate_crossing(cell("gaussian:1", Inequality::kL1, 1, 1, 5, 0)); }),
            Errc::kDomain);
  EXPECT_EQ(error_code_of([] { estimate_crossing(cell("gaussian:1", Inequality::kL1, 0, 1, 5, 1)); }),
            Errc::kDomain);
  EXPECT_EQ(error_code_of([] { parse_inequality("l3"); }), Errc::kDomain);
}

TEST(EProcessMean, DeterministicAcrossWorkerCounts) {
  const auto s = make_slln_schedule(1.0, {5, 10, 20, 40});
  const auto a = estimate_eprocess_mean(s, StoppingRule::sqrt_crossing(2.0, 500),
                                        {DistributionSpec::two_point(1.0), 500, 3, 1});
  const auto b = estimate_eprocess_mean(s, StoppingRule::sqrt_crossing(2.0, 500),
                                        {DistributionSpec::two_point(1.0), 500, 3, 4});
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.se, b.se);
}

TEST(EProcessMean, SllnOnCoinWithSqrtStopping) {
  const auto s = build_slln_eprocess(1.0, DistributionSpec::two_point(1.0));
  const auto est = estimate_eprocess_mean(s, StoppingRule::sqrt_crossing(2.0, 10000),
                                          {DistributionSpec::two_point(1.0), 2000, 5, 1});
  EXPECT_LE(est.mean, 1.0 + 3.0 * est.se);
}

TEST(LilRatio, ZeroStreamAndScaleInvariance) {
  const std::vector<double> zeros(1000, 0.0);
  EXPECT_EQ(max_lil_ratio(zeros, 3, 1.0), 0.0);
  const auto xs = sample_stream(DistributionSpec::gaussian(1.0), 8, 5000);
  std::vector<double> scaled = xs;
  for (double& x : scaled) x *= 7.5;
  EXPECT_NEAR(max_lil_ratio(scaled, 10, 7.5), max_lil_ratio(xs, 10, 1.0), 1e-12);
  EXPECT_EQ(error_code_of([&] { max_lil_ratio(xs, 2, 1.0); }), Errc::kDomain);
}

TEST(LilRatio, SummaryStatistics) {
  const auto s = empirical_lil_ratio(DistributionSpec::gaussian(2.0), 10, 2000, 40, 4);
  ASSERT_EQ(s.per_rep_max.size(), 40u);
  const double mean = std::accumulate(s.per_rep_max.begin(), s.per_rep_max.end(), 0.0) / 40.0;
  EXPECT_NEAR(s.mean, mean, 1e-14);
  EXPECT_GT(s.sd, 0.0);
}

TEST(WeightedSumLemma, HandExamples) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{1, -1, 2};
  EXPECT_NEAR(weighted_sum_ratio(a, b), 3.0 / 7.0, 1e-15);
  const std::vector<double> zeros{0, 0, 0};
  EXPECT_EQ(weighted_sum_ratio(a, zeros), 0.0);
  const std::vector<double> flat{4, 4, 4, 4};
  const std::vector<double> c{1, -3, 0.5, 2};
  EXPECT_NEAR(weighted_sum_ratio(flat, c), 0.5, 1e-15);
}

TEST(WeightedSumLemma, RejectsInvalidWeights) {
  const std::vector<double> b{1, 1};
  EXPECT_EQ(error_code_of([&] { weighted_sum_ratio(std::vector<double>{2, 1}, b); }),
            Errc::kDomain);
  EXPECT_EQ(error_code_of([&] { weighted_sum_ratio(std::vector<double>{0, 1}, b); }),
            Errc::kDomain);
  EXPECT_EQ(error_code_of([&] { weighted_sum_ratio(std::vector<double>{1}, b); }), Errc::kDomain);
}

TEST(WeightedSumLemmaProperty, RatioNeverExceedsOne) {
  EXPECT_LE(verify_weighted_sum_lemma(5000, 1000, 99), 1.0);
}

TEST(BaumKatz, LevelAboveMaximumGivesZero) {
  const auto est =
      baum_katz_partial_sum(DistributionSpec::two_point(1.0), 1.0, 1.5, 50, 200, 100, 1);
  EXPECT_EQ(est.partial_sum, 0.0);
}

TEST(BaumKatz, CumulativeSumsMatchDirectScan) {
  const auto spec = DistributionSpec::gaussian(1.0);
  const std::uint64_t M = 40, N = 200, reps = 200, seed = 6;
  const auto est = baum_katz_partial_sum(spec, 1.2, 0.3, M, N, reps, seed);
  double acc = 0.0;
  for (std::uint64_t m = 1; m <= M; ++m) {
    std::uint64_t hits = 0;
    for (std::uint64_t r = 0; r < reps; ++r) {
      Sampler sampler(spec, seed, r);
      double s = 0.0;
      bool hit = false;
      for (std::uint64_t k = 1; k <= N; ++k) {
        s += sampler.next();
        if (k >= m && std::abs(s) >= 0.3 * std::pow(static_cast<double>(k), 1.0 / 1.2)) hit = true;
      }
      hits += hit;
    }
    acc += static_cast<double>(hits) / reps / m;
    EXPECT_NEAR(est.cumulative[m - 1], acc, 1e-12) << m;
    if (m > 1) EXPECT_GE(est.cumulative[m - 1], est.cumulative[m - 2]);
  }
  EXPECT_EQ(est.partial_sum, est.cumulative.back());
}
