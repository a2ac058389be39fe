#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uniconc/bounds.hpp"
#include "uniconc/distributions.hpp"
#include "uniconc/eprocess.hpp"

namespace uniconc {

// Which tail inequality a simulated cell checks. Each fixes the crossing
// statistic and the analytic bound it is compared with:
//   kL1              |S_k|/k >= eps                         vs l1_bound
//   kLq              |S_k|/k^{1/q} >= eps                   vs lq_bound
//   kLil             |S_k| >= lil_boundary(k, eps, sbar)    vs lil_bound
//   kStudentizedLil  |S_k| >= studentized_lil_boundary(k, eps, sigma_hat_k)
//                                                           vs studentized_lil_bound
//   kDarlingRobbins  |S_k| >= darling_robbins_boundary(k, eps, sbar)
//                                                           vs darling_robbins_bound
enum class Inequality { kL1, kLq, kLil, kStudentizedLil, kDarlingRobbins };

std::string to_string(Inequality ineq);
Inequality parse_inequality(std::string_view text);

// One grid cell. The supremum over k >= m is truncated at `horizon` (N), so
// the estimated probability is a lower estimate of the infinite-horizon one.
struct SimConfig {
  DistributionSpec spec;
  Inequality inequality = Inequality::kL1;
  double q = 1.0;
  double eps = 0.5;
  double lambda = 0.0;     // 0 selects 1/4 (kL1) or 1/3 (LIL kinds)
  double sigma_bar = 0.0;  // 0 selects the true standard deviation
  std::uint64_t m = 100;
  std::uint64_t horizon = 1000;
  std::uint64_t reps = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Throws kDomain on malformed fields and kHypothesisViolated when the
// statistic needs a moment (or sub-Gaussianity) the distribution lacks.
void validate(const SimConfig& cfg);

double resolved_lambda(const SimConfig& cfg);
// sigma_bar, or the true sd when it is 0; 0 when the variance is infinite.
double resolved_sigma_bar(const SimConfig& cfg);

BoundValue analytic_bound(const SimConfig& cfg);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

inline constexpr double kZ95 = 1.959963984540054;

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

struct CrossingEstimate {
  std::uint64_t crossings = 0;
  std::uint64_t reps = 0;
  double phat = 0.0;
  WilsonInterval wilson;
  BoundValue analytic_bound;

  double half_width() const { return 0.5 * (wilson.hi - wilson.lo); }
  // phat - half-width <= clamp(bound): the one-sided check of the inequality.
  bool dominated() const { return phat - half_width() <= analytic_bound.clamped; }
};

CrossingEstimate estimate_crossing(const SimConfig& cfg);

// Several cells over the same distribution, seed, reps and workers, evaluated
// on one shared batch of trajectories. Each result equals what
// estimate_crossing gives for that cell alone.
std::vector<CrossingEstimate> estimate_crossings(std::span<const SimConfig> cells);

struct StoppingRule {
  enum class Kind { kFixed, kSqrtCrossing };
  Kind kind = Kind::kFixed;
  std::uint64_t n0 = 0;      // kFixed: tau = n0
  double c = 2.0;            // kSqrtCrossing: tau = inf{k : |S_k| >= c sqrt k} ^ cap
  std::uint64_t cap = 10000;

  static StoppingRule fixed(std::uint64_t n0);
  static StoppingRule sqrt_crossing(double c, std::uint64_t cap);
  std::string name() const;
};

// {tau = 100, 1000, 10000, inf{k : |S_k| >= 2 sqrt k} ^ 10^4}
std::vector<StoppingRule> stopping_battery();

struct EProcessSimConfig {
  DistributionSpec spec;
  std::uint64_t reps = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t reps = 0;
};

// Sample mean and standard error of E_tau over replications.
MeanEstimate estimate_eprocess_mean(const EProcessSchedule& schedule, const StoppingRule& stopping,
                                    const EProcessSimConfig& cfg);

struct LilRatioSummary {
  std::vector<double> per_rep_max;
  double mean = 0.0;
  double sd = 0.0;
};

// max over n in [m, N] of |S_n| / (sigma sqrt(2 n loglog n)) for one stream.
double max_lil_ratio(std::span<const double> stream, std::uint64_t m, double sigma);

LilRatioSummary empirical_lil_ratio(const DistributionSpec& spec, std::uint64_t m,
                                    std::uint64_t horizon, std::uint64_t reps, std::uint64_t seed,
                                    unsigned workers = 1);

// max_k |sum_{i<=k} b_i| / a_k divided by 2 max_k |sum_{i<=k} b_i/a_i|, with
// 0/0 read as 0. `a` must be strictly positive and nondecreasing.
double weighted_sum_ratio(std::span<const double> a, std::span<const double> b);

// Worst weighted_sum_ratio over `trials` random instances of length up to
// max_len: a = cumulative sums of log-normal draws, b = Gaussian / Cauchy mix.
double verify_weighted_sum_lemma(std::uint64_t trials, std::uint64_t max_len, std::uint64_t seed);

struct BaumKatzEstimate {
  std::vector<double> cumulative;  // sum_{m<=M} phat_m / m for M = 1..M_max
  double partial_sum = 0.0;        // cumulative.back()
  BoundValue analytic_bound;
};

// Monte Carlo partial sum of P[sup_{m<=k<=N} |S_k|/k^{1/q} >= eps]/m over
// m <= M_max, all m evaluated on each shared trajectory.
BaumKatzEstimate baum_katz_partial_sum(const DistributionSpec& spec, double q, double eps,
                                       std::uint64_t M_max, std::uint64_t horizon,
                                       std::uint64_t reps, std::uint64_t seed,
                                       unsigned workers = 1);

}  // namespace uniconc
