#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace uniconc {

// Truncated-moment function x -> U(x), assumed nonincreasing and nonnegative.
using TailMoment = std::function<double(double)>;

inline constexpr double kDefaultL1Lambda = 0.25;
inline constexpr double kDefaultLilLambda = 1.0 / 3.0;

struct L1Params {
  std::uint64_t m = 1;
  double eps = 1.0;
  double lambda = kDefaultL1Lambda;
};

struct LqParams {
  std::uint64_t m = 1;
  double eps = 1.0;
  double q = 1.0;
};

struct LilParams {
  std::uint64_t m = 2;
  double eps = 1.0;
  double lambda = kDefaultLilLambda;
  double sigma_bar = 1.0;  // variance proxy root
  double sigma_p = 1.0;    // true standard deviation (enters through U-bar)
};

struct BoundComponent {
  std::string label;
  double value = 0.0;
};

// Right-hand side of a tail inequality. `raw` may exceed 1 or be +inf;
// `clamped` = min(1, raw). `abs_error` is nonzero only for numerically
// summed series.
struct BoundValue {
  double raw = 0.0;
  double clamped = 0.0;
  std::vector<BoundComponent> components;
  double abs_error = 0.0;

  static BoundValue from_components(std::vector<BoundComponent> parts);
};

double clamp(const BoundValue& b);

void validate(const L1Params& p);
void validate(const LqParams& p);
void validate(const LilParams& p);

// Riemann zeta for real s > 1 (Euler-Maclaurin: partial sum, integral tail
// and Bernoulli corrections). Relative error below 1e-14.
double zeta(double s);

// ((1+eps)^{5/4} + (1+eps)^{3/4}) / sqrt 2
double c_eps(double eps);
// log(2 zeta(1+eps) / log(1+eps))
double ell_eps(double eps);

// log base (1+eps) of y.
double log_base(double y, double eps);

// m^e with exact roots for e in {+-1/2, +-1/4, +-1/3}, so that thresholds
// which are perfect powers invert exactly.
double pow_exact(double m, double e);

// P[sup_{k>=m} |S_k|/k >= eps] <= 262/(eps^2 ^ 1) (m^{2 lambda - 1} + U(m^lambda))
BoundValue l1_bound(const L1Params& p, const TailMoment& U);

// P[sup_k |S_k|/(k+gamma) >= eps + U(x)] <= 8x^2/(gamma eps^2) + (16/eps^2 + 2) U(x)
BoundValue line_crossing_bound(double eps, double gamma, double x, const TailMoment& U);

// P[sup_{k>=m} |S_k|/k^{1/q} >= eps]
//   <= 2 exp(-m^{1/q-1/2})/(2-q) + 451/(eps^2 ^ 1) Uq(eps^q m^{1/2-q/4}/38)
BoundValue lq_bound(const LqParams& p, const TailMoment& Uq);

// Crossing of the fixed-scale iterated-logarithm boundary (lil_boundary) from
// time m on. The first addend is (log_{1+eps}(m/3))^{-eps}/(eps zeta(1+eps)),
// taken as +inf when log_{1+eps}(m/3) <= 0.
BoundValue lil_bound(const LilParams& p, const TailMoment& Ubar2);

// Same inequality with log_{1+eps}(2m/3) in the first addend; this is the
// form used for the threshold schedule of the LIL e-process.
BoundValue lil_eprocess_bound(const LilParams& p, const TailMoment& Ubar2);

// Studentized version, compared against studentized_lil_boundary.
BoundValue studentized_lil_bound(const LilParams& p, const TailMoment& Uhat2);

// sigma_bar c_eps sqrt(k (loglog((1+eps)^2 k) + ell_eps))
double lil_boundary(std::uint64_t k, double eps, double sigma_bar);

// sigma_hat c_eps sqrt((1+2 eps) k (loglog((1+eps)^2 k) + ell_eps))
double studentized_lil_boundary(std::uint64_t k, double eps, double sigma_hat);

// sigma_bar sqrt(k (2(1+eps)^2 loglog k + 2(1+eps) log 2)), k >= 3
double darling_robbins_boundary(std::uint64_t k, double eps, double sigma_bar);

// (log_{1+eps} m)^{-eps} / eps, m >= 2
BoundValue darling_robbins_bound(std::uint64_t m, double eps);

// sum_m P_m/m <= 1 + c_q/(e log 2^{1/q-1/2}) + 2603 L/((2-q)(eps^2 ^ 1)),
// L = E[|X|^q log(38|X|^q/eps^q + 1)], c_q = 2/(2-q).
BoundValue baum_katz_series_bound(double q, double eps, double log_moment);

// The three series bounding sum_{m>=2} P_m/(m log m) for the iterated
// logarithm crossing probabilities, each summed to a cutoff and completed by
// an integral-sandwich tail estimate. Total absolute error <= tol, reported in
// abs_error.
BoundValue baum_katz_lil_series_bound(double eps, double delta, double log_delta_moment,
                                      double tol = 1e-6);

}  // namespace uniconc
