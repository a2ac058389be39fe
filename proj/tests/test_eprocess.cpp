#include <gtest/gtest.h>

#include <cmath>

#include "uniconc/bounds.hpp"
#include "uniconc/distributions.hpp"
#include "uniconc/eprocess.hpp"
#include "uniconc/error.hpp"
#include "uniconc/rng.hpp"
#include "uniconc/simulate.hpp"

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

// Scan oracle: m is the least integer >= domain_min with B(m) <= target.
void expect_minimal(const BoundFunction& B, int j, std::uint64_t m) {
  const double target = std::ldexp(1.0, -j);
  const double eps = 1.0 / j;
  EXPECT_LE(B(m, eps), target) << "j=" << j;
  for (std::uint64_t k = std::max<std::uint64_t>(B.domain_min(), m > 64 ? m - 64 : 1); k < m;
       ++k) {
    EXPECT_GT(B(k, eps), target) << "j=" << j << " k=" << k;
  }
}

EventLattice darling_robbins_lattice() {
  return {[](std::span<const double>, const TrajectoryState& t, double eps) {
    if (t.n() < 3) return false;
    return std::abs(t.sum()) >= darling_robbins_boundary(t.n(), eps, 1.0);
  }};
}

BoundFunction darling_robbins_function() {
  return BoundFunction(
      [](std::uint64_t m, double eps) { return darling_robbins_bound(m, eps).raw; }, 3);
}

// Direct evaluation of E_n = sum_j 1{exists k in [m_j, n] with the event at k}.
int brute_force_value(const std::vector<double>& xs, std::size_t n,
                      const std::vector<Threshold>& thresholds, double q) {
  int value = 0;
  for (std::size_t j = 1; j <= thresholds.size(); ++j) {
    const Threshold& mj = thresholds[j - 1];
    if (!mj) continue;
    double s = 0.0;
    bool hit = false;
    for (std::size_t k = 1; k <= n; ++k) {
      s += xs[k - 1];
      if (k >= *mj && std::abs(s) / std::pow(static_cast<double>(k), 1.0 / q) >= 1.0 / j) {
        hit = true;
      }
    }
    value += hit ? 1 : 0;
  }
  return value;
}

}  // namespace

TEST(ComputeMj, SyntheticBoundInvertsToPowersOfTwo) {
  const BoundFunction B([](std::uint64_t m, double) { return 1.0 / static_cast<double>(m); }, 1);
  for (int j = 1; j <= 40; ++j) {
    ASSERT_TRUE(compute_mj(B, j).has_value());
    EXPECT_EQ(*compute_mj(B, j), std::uint64_t{1} << j);
  }
  EXPECT_FALSE(compute_mj(B, 10, 1000).has_value());
  EXPECT_EQ(compute_mj(B, 10, 1024), 1024u);
}

TEST(ComputeMj, DomainMinimumIsRespected) {
  const BoundFunction B([](std::uint64_t, double) { return 0.0; }, 5);
  EXPECT_EQ(compute_mj(B, 3), 5u);
}

TEST(ComputeMj, IncreasingBoundViolatesCertificate) {
  EXPECT_EQ(error_code_of([] {
              BoundFunction([](std::uint64_t m, double) { return static_cast<double>(m); }, 1);
            }),
            Errc::kCertificateViolated);
}

TEST(ComputeMj, BadArgumentsAreDomainErrors) {
  const BoundFunction B([](std::uint64_t m, double) { return 1.0 / static_cast<double>(m); }, 1);
  EXPECT_EQ(error_code_of([&] { compute_mj(B, 0); }), Errc::kDomain);
  EXPECT_EQ(error_code_of([&] { compute_mj(B, 1, 1); }), Errc::kDomain);
}

TEST(Thresholds, ScaleInvariantClosedForm) {
  const auto s = build_scale_invariant_eprocess(4);
  EXPECT_EQ(s.thresholds[0], 143877824u);
  for (int j = 1; j <= 4; ++j) {
    const double root = 262.0 * j * j * std::ldexp(1.0, j);
    EXPECT_EQ(s.thresholds[j - 1], static_cast<std::uint64_t>(root * root * root)) << j;
    expect_minimal(s.bound, j, *s.thresholds[j - 1]);
  }
}

TEST(Thresholds, SllnOnCoinIsJumpOfTruncatedMoment) {
  const auto s = build_slln_eprocess(1.0, DistributionSpec::two_point(1.0), 6);
  for (int j = 1; j <= 6; ++j) {
    const std::uint64_t jump = static_cast<std::uint64_t>(std::pow(38.0 * j, 4.0));
    EXPECT_EQ(s.thresholds[j - 1], jump + 1) << j;
    expect_minimal(s.bound, j, *s.thresholds[j - 1]);
  }
}

// Independent high-precision root of (log2(2m/3))^{-1}/zeta(2) + 262 m^{-1/3} = 1/2.
TEST(Thresholds, LilOnGaussianMatchesHighPrecisionRoot) {
  const auto s = build_lil_eprocess(DistributionSpec::gaussian(1.0), 1.0, 2);
  EXPECT_EQ(s.thresholds[0], 165454314u);
  expect_minimal(s.bound, 1, 165454314u);
}

TEST(Thresholds, SllnOnGaussianHalfPowerIsSaturated) {
  const auto s = build_slln_eprocess(1.5, DistributionSpec::gaussian(1.0), 20);
  EXPECT_EQ(s.finite_count(), 0);
}

TEST(Thresholds, DarlingRobbinsFirstLevelIsFour) {
  const auto s = build_generic_eprocess(darling_robbins_lattice(), darling_robbins_function(), 3);
  EXPECT_EQ(s.thresholds[0], 4u);
  expect_minimal(s.bound, 1, 4);
}

TEST(EProcess, AllSaturatedScheduleStaysZero) {
  const auto s = make_slln_schedule(1.0, std::vector<Threshold>(5, std::nullopt));
  EProcessState st = make_state(s);
  for (double x : sample_stream(DistributionSpec::gaussian(10.0), 1, 1000)) update(s, st, x);
  EXPECT_EQ(st.value, 0);
  const auto est = estimate_eprocess_mean(s, StoppingRule::fixed(100),
                                          {DistributionSpec::gaussian(1.0), 100, 1, 1});
  EXPECT_EQ(est.mean, 0.0);
}

TEST(EProcess, StoppingAtZeroGivesZero) {
  const auto s = make_slln_schedule(1.0, {1, 1, 1});
  const auto est = estimate_eprocess_mean(s, StoppingRule::fixed(0),
                                          {DistributionSpec::two_point(1.0), 100, 1, 1});
  EXPECT_EQ(est.mean, 0.0);
}

TEST(EProcess, FirstStepLatchesEveryReachableLevel) {
  // |S_1|/1 = 1 >= 1/j for all j once n >= m_j = 1.
  const auto s = make_slln_schedule(1.0, {1, 1, 1, std::nullopt});
  EProcessState st = make_state(s);
  update(s, st, 1.0);
  EXPECT_EQ(st.value, 3);
}

TEST(EProcess, ScaleInvariantRejectsZeroFirstObservation) {
  const auto s = build_scale_invariant_eprocess(2);
  EProcessState st = make_state(s);
  EXPECT_EQ(error_code_of([&] { update(s, st, 0.0); }), Errc::kStatisticUndefined);
}

// Property: the incremental value equals the brute-force definition at every n.
TEST(EProcessProperty, IncrementalMatchesBruteForce) {
  Rng rng(31, 0);
  for (int rep = 0; rep < 60; ++rep) {
    const double q = 1.0 + 0.9 * rng.uniform();
    std::vector<Threshold> thresholds;
    for (int j = 0; j < 8; ++j) {
      if (rng.uniform() < 0.2) {
        thresholds.push_back(std::nullopt);
      } else {
        thresholds.push_back(1 + rng.next_u64() % 150);
      }
    }
    const auto s = make_slln_schedule(q, thresholds);
    const auto xs = sample_stream(DistributionSpec::gaussian(0.5), 100 + rep, 200);
    EProcessState st = make_state(s);
    for (std::size_t n = 1; n <= xs.size(); ++n) {
      update(s, st, xs[n - 1]);
      ASSERT_EQ(st.value, brute_force_value(xs, n, thresholds, q)) << "rep=" << rep << " n=" << n;
    }
  }
}

// Property: a generic e-process over the SLLN lattice latches exactly like the
// dedicated SLLN kind with the same thresholds.
TEST(EProcessProperty, GenericLatticeReproducesSlln) {
  Rng rng(32, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const double q = rng.coin() ? 1.0 : 1.5;
    std::vector<Threshold> thresholds;
    for (int j = 0; j < 10; ++j) thresholds.push_back(1 + rng.next_u64() % 300);
    const auto slln = make_slln_schedule(q, thresholds);
    EProcessSchedule generic;
    generic.kind = EProcessKind::kGeneric;
    generic.lattice = slln_lattice(q);
    generic.thresholds = thresholds;
    EProcessState a = make_state(slln);
    EProcessState b = make_state(generic);
    for (double x : sample_stream(DistributionSpec::two_point(1.0), 200 + rep, 400)) {
      update(slln, a, x);
      update(generic, b, x);
      ASSERT_EQ(a.latches, b.latches);
    }
  }
}

// Property: values never decrease and never exceed J.
TEST(EProcessProperty, ValuesAreNondecreasing) {
  Rng rng(33, 0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Threshold> thresholds;
    for (int j = 0; j < 20; ++j) thresholds.push_back(1 + rng.next_u64() % 100);
    const auto s = make_slln_schedule(1.0 + rng.uniform() * 0.9, thresholds);
    EProcessState st = make_state(s);
    int prev = 0;
    for (double x : sample_stream(DistributionSpec::pareto(1.5), 300 + rep, 300)) {
      update(s, st, x);
      ASSERT_GE(st.value, prev);
      ASSERT_LE(st.value, s.J());
      prev = st.value;
    }
  }
}

// Property: the scale-invariant statistic is unchanged when the stream is
// multiplied by a positive constant.
TEST(EProcessProperty, ScaleInvariantIgnoresScale) {
  Rng rng(34, 0);
  for (int rep = 0; rep < 50; ++rep) {
    EProcessSchedule s;
    s.kind = EProcessKind::kScaleInvariant;
    for (int j = 0; j < 10; ++j) s.thresholds.push_back(2 + rng.next_u64() % 50);
    const double c = std::exp(10.0 * (rng.uniform() - 0.5));
    EProcessState a = make_state(s);
    EProcessState b = make_state(s);
    for (double x : sample_stream(DistributionSpec::gaussian(1.0), 400 + rep, 200)) {
      update(s, a, x);
      update(s, b, c * x);
      ASSERT_EQ(a.latches, b.latches);
    }
  }
}

// With m_1 = 4 the Darling-Robbins e-process can actually reach 1 within the
// horizon, so this mean is a nontrivial check of E[E_tau] <= 1.
TEST(EProcessValidity, DarlingRobbinsLatticeOnCoin) {
  const auto s = build_generic_eprocess(darling_robbins_lattice(), darling_robbins_function(), 3);
  for (const auto& rule : stopping_battery()) {
    if (rule.cap > 1000) continue;
    const auto est =
        estimate_eprocess_mean(s, rule, {DistributionSpec::two_point(1.0), 2000, 77, 1});
    EXPECT_LE(est.mean, 1.0 + 3.0 * est.se) << rule.name();
    EXPECT_GT(est.mean, 0.0) << rule.name();
  }
}
