#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "uniconc/bounds.hpp"
#include "uniconc/distributions.hpp"
#include "uniconc/error.hpp"
#include "uniconc/rng.hpp"

using namespace uniconc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TailMoment moment_of(const char* dist, const TruncatedMomentKind& kind) {
  return truncated_moment_fn(parse_distribution(dist), kind);
}

bool throws_domain(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == Errc::kDomain;
  }
  return false;
}

}  // namespace

// Reference values from arbitrary-precision evaluation.
TEST(Zeta, MatchesHighPrecision) {
  EXPECT_NEAR(zeta(1.5), 2.612375348685488, 1e-13);
  EXPECT_NEAR(zeta(2.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-14);
  EXPECT_NEAR(zeta(1.05), 20.58084430203700, 1e-11);
  EXPECT_NEAR(zeta(4.0 / 3.0) - 1.0, 2.600937750458862, 1e-13);
  EXPECT_TRUE(throws_domain([] { zeta(1.0); }));
  EXPECT_TRUE(throws_domain([] { zeta(0.5); }));
}

TEST(StitchingConstants, MatchHighPrecision) {
  EXPECT_NEAR(c_eps(1.0), 2.870999945510150, 1e-14);
  EXPECT_NEAR(ell_eps(1.0), 1.557360403612355, 1e-13);
}

TEST(PowExact, PerfectPowersAreExact) {
  EXPECT_EQ(pow_exact(524.0 * 524.0 * 524.0, 1.0 / 3.0), 524.0);
  EXPECT_EQ(pow_exact(16.0, 0.25), 2.0);
  EXPECT_EQ(pow_exact(100.0, -0.5), 0.1);
  EXPECT_NEAR(pow_exact(7.0, 0.3), std::pow(7.0, 0.3), 1e-15);
}

TEST(L1Bound, WorkedExamples) {
  const auto U = moment_of("two-point:1", TruncatedMomentKind::abs_q(1.0));
  const BoundValue b = l1_bound({100, 0.5, 0.25}, U);
  EXPECT_EQ(b.raw, 104.8);
  EXPECT_EQ(b.clamped, 1.0);
  EXPECT_NEAR(l1_bound({100000000, 1.0, 0.25}, U).raw, 0.0262, 1e-15);
  // With m^lambda below the atom the truncated moment is the full moment.
  const BoundValue small = l1_bound({1, 2.0, 0.25}, U);
  EXPECT_DOUBLE_EQ(small.raw, 262.0 * 2.0);
}

TEST(L1Bound, RejectsBadParameters) {
  const auto U = moment_of("gaussian:1", TruncatedMomentKind::abs_q(1.0));
  EXPECT_TRUE(throws_domain([&] { l1_bound({0, 0.5, 0.25}, U); }));
  EXPECT_TRUE(throws_domain([&] { l1_bound({10, 0.0, 0.25}, U); }));
  EXPECT_TRUE(throws_domain([&] { l1_bound({10, 0.5, 0.5}, U); }));
  EXPECT_TRUE(throws_domain([&] { l1_bound({10, 0.5, 0.0}, U); }));
}

TEST(LineCrossingBound, WorkedExample) {
  const TailMoment U = [](double) { return 0.1; };
  EXPECT_NEAR(line_crossing_bound(0.5, 100.0, 2.0, U).raw, 7.88, 1e-13);
}

TEST(LqBound, WorkedExample) {
  const auto U = moment_of("two-point:1", TruncatedMomentKind::abs_q(1.0));
  const BoundValue b = lq_bound({3000000, 1.0, 1.0}, U);
  // Level m^{1/4}/38 ≈ 1.095 exceeds the atom so only the exponential remains.
  EXPECT_EQ(b.components[1].value, 0.0);
  EXPECT_NEAR(b.raw, 2.0 * std::exp(-std::sqrt(3e6)), 1e-300);
  EXPECT_TRUE(throws_domain([&] { lq_bound({10, 1.0, 2.0}, U); }));
  EXPECT_TRUE(throws_domain([&] { lq_bound({10, 1.0, 0.9}, U); }));
}

TEST(LilBound, FirstAddendAtPowerOfTwo) {
  const auto U = moment_of("gaussian:1", TruncatedMomentKind::centered_square());
  const std::uint64_t m40 = 3ull << 40;
  const BoundValue b = lil_bound({m40, 1.0, 1.0 / 3.0, 1.0, 1.0}, U);
  EXPECT_NEAR(b.components[0].value, 0.01519817754635067, 1e-15);
  const BoundValue e = lil_eprocess_bound({3ull << 39, 1.0, 1.0 / 3.0, 1.0, 1.0}, U);
  EXPECT_NEAR(e.components[0].value, 0.01519817754635067, 1e-15);
  // log_{1+eps}(m/3) <= 0: first addend is +inf.
  EXPECT_EQ(lil_bound({3, 1.0, 1.0 / 3.0, 1.0, 1.0}, U).raw, kInf);
  EXPECT_EQ(lil_bound({3, 1.0, 1.0 / 3.0, 1.0, 1.0}, U).clamped, 1.0);
}

TEST(LilBound, StudentizedUsesLargerConstant) {
  const auto U = moment_of("gaussian:1", TruncatedMomentKind::normalized_square());
  const BoundValue s = studentized_lil_bound({1000000, 1.0, 1.0 / 3.0, 1.0, 1.0}, U);
  EXPECT_NEAR(s.components[1].value, 786.0 * 0.01, 1e-12);
}

TEST(Boundaries, MatchHighPrecision) {
  EXPECT_NEAR(lil_boundary(1000000, 1.0, 1.0), 5938.720514909384, 1e-9);
  EXPECT_NEAR(studentized_lil_boundary(1000000, 1.0, 1.0), 10286.16566377466, 1e-8);
  EXPECT_NEAR(lil_boundary(1000, 0.5, 2.0), 289.2223102810003, 1e-10);
  EXPECT_NEAR(darling_robbins_boundary(1000000, 0.1, 1.0), 2807.016250445271, 1e-9);
  EXPECT_NEAR(darling_robbins_bound(1000, 0.5).raw, 0.4845496315214521, 1e-14);
  EXPECT_TRUE(throws_domain([] { darling_robbins_boundary(2, 0.5, 1.0); }));
  EXPECT_TRUE(throws_domain([] { lil_boundary(0, 0.5, 1.0); }));
}

// The normalized boundary approaches c_eps/sqrt 2 from above, slowly; at
// k = 1e12 the exact ratio is 1.2178... times the limit.
TEST(Boundaries, LilRatioDecreasesTowardLimit) {
  const double limit = c_eps(1.0) / std::sqrt(2.0);
  auto ratio = [](double k) {
    const auto kk = static_cast<std::uint64_t>(k);
    return lil_boundary(kk, 1.0, 1.0) / std::sqrt(2.0 * k * std::log(std::log(k)));
  };
  EXPECT_NEAR(ratio(1e12) / limit,
              std::sqrt((std::log(std::log(4e12)) + ell_eps(1.0)) / std::log(std::log(1e12))),
              1e-12);
  double prev = ratio(1e4);
  for (double k : {1e6, 1e8, 1e10, 1e12, 1e15, 1e18}) {
    const double r = ratio(k);
    EXPECT_LT(r, prev);
    EXPECT_GT(r, limit);
    prev = r;
  }
}

TEST(BaumKatz, SeriesBoundConstant) {
  const BoundValue b = baum_katz_series_bound(1.0, 0.5, 0.0);
  EXPECT_NEAR(b.raw, 3.122951381692172, 1e-14);
  EXPECT_NEAR(baum_katz_series_bound(1.5, 0.5, 2.0).raw, 41661.73770829015, 1e-9);
}

TEST(BaumKatz, LilSeriesMatchesHighPrecision) {
  const BoundValue b = baum_katz_lil_series_bound(1.0, 1.0, 1.0, 1e-6);
  EXPECT_LE(b.abs_error, 1e-6);
  // Head sums to 2e4 in extended precision plus integral tail brackets.
  EXPECT_NEAR(b.raw, 3706.214912445262, 1e-3);
  EXPECT_NEAR(b.components[0].value, 9.008289804809776, 1e-6);
  // The polynomial series is below zeta(4/3) - 1.
  EXPECT_LT(b.components[1].value / 262.0, 2.600937750458862);
  EXPECT_NEAR(b.components[1].value / 262.0, 1.453018851511749, 1e-7);
}

TEST(Clamp, IsMinWithOne) {
  BoundValue b = BoundValue::from_components({{"a", 0.25}, {"b", 0.5}});
  EXPECT_EQ(b.raw, 0.75);
  EXPECT_EQ(clamp(b), 0.75);
  b = BoundValue::from_components({{"a", 3.0}});
  EXPECT_EQ(b.clamped, 1.0);
}

// Property: each tail bound is nonincreasing in m for random parameters.
TEST(BoundProperty, NonincreasingInM) {
  Rng rng(21, 0);
  const char* dists[] = {"two-point:1", "gaussian:2", "uniform:1", "pareto:3.5"};
  for (int i = 0; i < 400; ++i) {
    const char* dist = dists[rng.next_u64() % 4];
    const double eps = std::exp(std::log(0.01) + std::log(200.0) * rng.uniform());
    const double lambda = 0.01 + 0.48 * rng.uniform();
    const double q = 1.0 + 0.99 * rng.uniform();
    auto m1 = static_cast<std::uint64_t>(std::exp(std::log(3.0) + 18.0 * rng.uniform()));
    auto m2 = static_cast<std::uint64_t>(std::exp(std::log(3.0) + 18.0 * rng.uniform()));
    if (m1 > m2) std::swap(m1, m2);
    const auto spec = parse_distribution(dist);
    const double sd = std_dev(spec);
    const auto U1 = moment_of(dist, TruncatedMomentKind::abs_q(1.0));
    const auto Uq = moment_of(dist, TruncatedMomentKind::abs_q(q));
    const auto Ubar = moment_of(dist, TruncatedMomentKind::centered_square());
    const auto Uhat = moment_of(dist, TruncatedMomentKind::normalized_square());
    auto le = [](double later, double earlier) { return later <= earlier * (1 + 1e-12); };
    EXPECT_TRUE(le(l1_bound({m2, eps, lambda}, U1).raw, l1_bound({m1, eps, lambda}, U1).raw));
    EXPECT_TRUE(le(lq_bound({m2, eps, q}, Uq).raw, lq_bound({m1, eps, q}, Uq).raw));
    EXPECT_TRUE(le(lil_bound({m2, eps, lambda, sd, sd}, Ubar).raw,
                   lil_bound({m1, eps, lambda, sd, sd}, Ubar).raw));
    EXPECT_TRUE(le(studentized_lil_bound({m2, eps, lambda, sd, sd}, Uhat).raw,
                   studentized_lil_bound({m1, eps, lambda, sd, sd}, Uhat).raw));
    EXPECT_TRUE(le(darling_robbins_bound(m2, eps).raw, darling_robbins_bound(m1, eps).raw));
  }
}

// Property: boundaries are increasing in k and scale linearly in sigma.
TEST(BoundProperty, BoundariesIncreaseInKAndScaleInSigma) {
  Rng rng(22, 0);
  for (int i = 0; i < 400; ++i) {
    const double eps = 0.05 + 2.0 * rng.uniform();
    const double sigma = 0.1 + 5.0 * rng.uniform();
    auto k1 = static_cast<std::uint64_t>(std::exp(std::log(3.0) + 30.0 * rng.uniform()));
    const std::uint64_t k2 = k1 + 1 + rng.next_u64() % 1000;
    EXPECT_LT(lil_boundary(k1, eps, 1.0), lil_boundary(k2, eps, 1.0));
    EXPECT_LT(darling_robbins_boundary(k1, eps, 1.0), darling_robbins_boundary(k2, eps, 1.0));
    EXPECT_NEAR(lil_boundary(k1, eps, sigma), sigma * lil_boundary(k1, eps, 1.0),
                1e-12 * sigma * lil_boundary(k1, eps, 1.0));
    EXPECT_NEAR(studentized_lil_boundary(k1, eps, sigma),
                std::sqrt(1.0 + 2.0 * eps) * lil_boundary(k1, eps, sigma),
                1e-12 * studentized_lil_boundary(k1, eps, sigma));
  }
}

// Property: clamped is always min(1, raw) and raw is the sum of components.
TEST(BoundProperty, ClampedIsMinOfRawAndOne) {
  Rng rng(23, 0);
  const auto U = moment_of("gaussian:1", TruncatedMomentKind::abs_q(1.0));
  for (int i = 0; i < 300; ++i) {
    const auto m = 1 + rng.next_u64() % 1000000000;
    const double eps = 0.01 + 3.0 * rng.uniform();
    const BoundValue b = l1_bound({m, eps, 0.25}, U);
    double sum = 0.0;
    for (const auto& c : b.components) sum += c.value;
    EXPECT_EQ(b.raw, sum);
    EXPECT_EQ(b.clamped, std::min(1.0, b.raw));
  }
}
