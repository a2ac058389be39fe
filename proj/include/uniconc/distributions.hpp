#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uniconc/rng.hpp"

namespace uniconc {

enum class Family {
  kTwoPoint,  // X = +-b with probability 1/2 each
  kGaussian,  // N(0, sigma^2)
  kUniform,   // uniform on [-a, a]
  kPareto,    // random sign, P[|X| > t] = t^(-alpha) for t >= 1
};

// A zero-mean i.i.d. family. `param` is b, sigma, a or alpha respectively.
struct DistributionSpec {
  Family family = Family::kGaussian;
  double param = 1.0;

  static DistributionSpec two_point(double b);
  static DistributionSpec gaussian(double sigma);
  static DistributionSpec uniform(double a);
  static DistributionSpec pareto(double alpha);

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

// Throws Errc::kDomain when the parameter is outside its family's range.
void validate(const DistributionSpec& spec);

// "two-point:1", "gaussian:1", "uniform:2", "pareto:1.5".
DistributionSpec parse_distribution(std::string_view text);
std::string to_string(const DistributionSpec& spec);

bool has_finite_abs_moment(const DistributionSpec& spec, double q);

// E|X|^q in closed form; throws kMomentNotFinite when infinite.
double abs_moment(const DistributionSpec& spec, double q);

double variance(const DistributionSpec& spec);
double std_dev(const DistributionSpec& spec);

struct TruncatedMomentKind {
  enum class Tag {
    kAbsQ,              // E[|X|^q 1{|X|^q >= x}]
    kCenteredSquare,    // E[|X^2 - s^2| 1{|X^2 - s^2| >= x}], s^2 = Var X
    kNormalizedSquare,  // E[(X^2/s^2) 1{X^2/s^2 >= x}]
    kLogMoment,         // E[|X|^q log(38 |X|^q / eps^q + 1)]   (x ignored)
    kLogDeltaMoment,    // E[X^2 log^delta(X^2 + 1)]            (x ignored)
  };

  Tag tag = Tag::kAbsQ;
  double q = 1.0;
  double eps = 1.0;
  double delta = 1.0;

  static TruncatedMomentKind abs_q(double q);
  static TruncatedMomentKind centered_square();
  static TruncatedMomentKind normalized_square();
  static TruncatedMomentKind log_moment(double q, double eps);
  static TruncatedMomentKind log_delta_moment(double delta);
};

std::string to_string(const TruncatedMomentKind& kind);

// Throws kMomentNotFinite if the functional is infinite for `spec`.
void require_finite(const DistributionSpec& spec, const TruncatedMomentKind& kind);

// Closed-form value of the truncated functional at level x >= 0. The two log
// kinds have no closed form and are delegated to the quadrature path.
double trunc_moment(const DistributionSpec& spec, const TruncatedMomentKind& kind,
                    double x);

// The same functional by adaptive quadrature over the law of |X|, written
// without reference to the closed forms. Absolute tolerance 1e-10; throws
// kQuadratureFailure when the error estimate exceeds it.
double trunc_moment_quadrature_oracle(const DistributionSpec& spec,
                                      const TruncatedMomentKind& kind, double x);

// x -> trunc_moment(spec, kind, x), with finiteness checked once up front.
std::function<double(double)> truncated_moment_fn(const DistributionSpec& spec,
                                                  const TruncatedMomentKind& kind);

// Draws from one stream of the documented generator (see Rng).
class Sampler {
 public:
  Sampler(const DistributionSpec& spec, std::uint64_t seed, std::uint64_t stream = 0);

  double next() {
    switch (spec_.family) {
      case Family::kTwoPoint:
        return rng_.coin() ? spec_.param : -spec_.param;
      case Family::kGaussian:
        return spec_.param * rng_.normal();
      case Family::kUniform:
        return spec_.param * (2.0 * rng_.uniform() - 1.0);
      case Family::kPareto:
        return pareto_next();
    }
    return 0.0;
  }

  void fill(std::span<double> out) {
    for (double& v : out) v = next();
  }

  const DistributionSpec& spec() const { return spec_; }

 private:
  double pareto_next();

  DistributionSpec spec_;
  double inv_alpha_ = 1.0;
  Rng rng_;
};

std::vector<double> sample_stream(const DistributionSpec& spec, std::uint64_t seed,
                                  std::size_t n);

}  // namespace uniconc
