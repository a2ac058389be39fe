#include "uniconc/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "uniconc/error.hpp"

namespace uniconc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

std::string format_param(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// E[|Z|^q 1{|Z| >= t}] * sigma^q for Z ~ N(0, sigma^2) via the upper
// incomplete gamma function.
double gaussian_abs_tail(double sigma, double q, double t) {
  const double z = 0.5 * (t / sigma) * (t / sigma);
  const double scale =
      std::pow(sigma, q) * std::pow(2.0, 0.5 * q) / std::sqrt(std::numbers::pi);
  return scale * boost::math::tgamma(0.5 * (q + 1.0), z);
}

double abs_q_closed(const DistributionSpec& spec, double q, double x) {
  const double p = spec.param;
  switch (spec.family) {
    case Family::kTwoPoint: {
      const double bq = std::pow(p, q);
      return x <= bq ? bq : 0.0;
    }
    case Family::kGaussian:
      return gaussian_abs_tail(p, q, std::pow(x, 1.0 / q));
    case Family::kUniform: {
      const double t = std::pow(x, 1.0 / q);
      if (t >= p) return 0.0;
      return (std::pow(p, q + 1.0) - std::pow(t, q + 1.0)) / ((q + 1.0) * p);
    }
    case Family::kPareto: {
      const double t = std::pow(x, 1.0 / q);
      const double full = p / (p - q);
      return t <= 1.0 ? full : full * std::pow(t, q - p);
    }
  }
  return 0.0;
}

double centered_square_closed(const DistributionSpec& spec, double x) {
  const double p = spec.param;
  switch (spec.family) {
    case Family::kTwoPoint:
      return 0.0;  // X^2 == Var X almost surely
    case Family::kGaussian: {
      // Z = X/sigma: E|Z^2-1| 1{...} = 2 t1 phi(t1) + 2 t2 phi(t2) 1{y < 1}.
      const double y = x / (p * p);
      const double t1 = std::sqrt(1.0 + y);
      double v = 2.0 * t1 * normal_pdf(t1);
      if (y < 1.0) {
        const double t2 = std::sqrt(1.0 - y);
        v += 2.0 * t2 * normal_pdf(t2);
      }
      return p * p * v;
    }
    case Family::kUniform: {
      const double s = p * p / 3.0;
      double v = 0.0;
      const double u1 = std::sqrt(s + x);
      if (u1 < p) v += ((p * p * p - u1 * u1 * u1) / 3.0 - s * (p - u1)) / p;
      if (x <= s) {
        const double u2 = std::sqrt(s - x);
        v += (s * u2 - u2 * u2 * u2 / 3.0) / p;
      }
      return v;
    }
    case Family::kPareto: {
      const double a = p;
      const double s = a / (a - 2.0);
      const double lo = std::max(1.0, std::sqrt(s + x));
      double v = a * std::pow(lo, 2.0 - a) / (a - 2.0) - s * std::pow(lo, -a);
      if (s - x > 1.0) {
        const double hi = std::sqrt(s - x);
        v += s * (1.0 - std::pow(hi, -a)) - a * (1.0 - std::pow(hi, 2.0 - a)) / (a - 2.0);
      }
      return v;
    }
  }
  return 0.0;
}

double normalized_square_closed(const DistributionSpec& spec, double x) {
  if (spec.family == Family::kTwoPoint) return x <= 1.0 ? 1.0 : 0.0;
  const double s2 = variance(spec);
  return abs_q_closed(spec, 2.0, x * s2) / s2;
}

// ---- quadrature oracle -------------------------------------------------

struct AbsLaw {
  // Either an atom at `atom` or a density on [lo, hi].
  bool is_atom = false;
  double atom = 0.0;
  double lo = 0.0;
  double hi = kInf;
  std::function<double(double)> density;
};

AbsLaw abs_law(const DistributionSpec& spec) {
  const double p = spec.param;
  AbsLaw law;
  switch (spec.family) {
    case Family::kTwoPoint:
      law.is_atom = true;
      law.atom = p;
      break;
    case Family::kGaussian:
      law.density = [p](double u) { return 2.0 * normal_pdf(u / p) / p; };
      break;
    case Family::kUniform:
      law.hi = p;
      law.density = [p](double) { return 1.0 / p; };
      break;
    case Family::kPareto:
      law.lo = 1.0;
      law.density = [p](double u) { return p * std::pow(u, -p - 1.0); };
      break;
  }
  return law;
}

struct Functional {
  std::function<double(double)> value;       // g(|X|)
  bool truncated = true;                     // apply 1{g >= x}
  std::vector<double> breakpoints;           // where 1{g >= x} may switch
};

Functional functional_of(const DistributionSpec& spec, const TruncatedMomentKind& kind,
                         double x) {
  Functional f;
  switch (kind.tag) {
    case TruncatedMomentKind::Tag::kAbsQ: {
      const double q = kind.q;
      f.value = [q](double u) { return std::pow(u, q); };
      f.breakpoints = {std::pow(x, 1.0 / q)};
      break;
    }
    case TruncatedMomentKind::Tag::kCenteredSquare: {
      const double s2 = variance(spec);
      f.value = [s2](double u) { return std::abs(u * u - s2); };
      f.breakpoints = {std::sqrt(s2), std::sqrt(s2 + x)};
      if (x <= s2) f.breakpoints.push_back(std::sqrt(s2 - x));
      break;
    }
    case TruncatedMomentKind::Tag::kNormalizedSquare: {
      const double s2 = variance(spec);
      f.value = [s2](double u) { return u * u / s2; };
      f.breakpoints = {std::sqrt(s2 * x)};
      break;
    }
    case TruncatedMomentKind::Tag::kLogMoment: {
      const double q = kind.q;
      const double c = 38.0 / std::pow(kind.eps, q);
      f.value = [q, c](double u) {
        const double uq = std::pow(u, q);
        return uq * std::log1p(c * uq);
      };
      f.truncated = false;
      break;
    }
    case TruncatedMomentKind::Tag::kLogDeltaMoment: {
      const double d = kind.delta;
      f.value = [d](double u) { return u * u * std::pow(std::log1p(u * u), d); };
      f.truncated = false;
      break;
    }
  }
  return f;
}

constexpr double kOracleAbsTol = 1e-10;

double integrate_piece(const std::function<double(double)>& integrand, double a, double b) {
  double err = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  if (std::isinf(b)) {
    boost::math::quadrature::exp_sinh<double> integrator;
    value = integrator.integrate(integrand, a, b, 1e-13, &err, &l1);
  } else {
    boost::math::quadrature::tanh_sinh<double> integrator;
    value = integrator.integrate(integrand, a, b, 1e-13, &err, &l1);
  }
  if (!std::isfinite(value) || err > kOracleAbsTol) {
    std::ostringstream os;
    os << "quadrature failure on [" << a << ", " << b << "]: error estimate " << err;
    throw Error(Errc::kQuadratureFailure, os.str());
  }
  return value;
}

}  // namespace

// ---- DistributionSpec ----------------------------------------------------

DistributionSpec DistributionSpec::two_point(double b) {
  DistributionSpec s{Family::kTwoPoint, b};
  validate(s);
  return s;
}
DistributionSpec DistributionSpec::gaussian(double sigma) {
  DistributionSpec s{Family::kGaussian, sigma};
  validate(s);
  return s;
}
DistributionSpec DistributionSpec::uniform(double a) {
  DistributionSpec s{Family::kUniform, a};
  validate(s);
  return s;
}
DistributionSpec DistributionSpec::pareto(double alpha) {
  DistributionSpec s{Family::kPareto, alpha};
  validate(s);
  return s;
}

void validate(const DistributionSpec& spec) {
  const double p = spec.param;
  if (!std::isfinite(p)) throw Error(Errc::kDomain, "distribution parameter must be finite");
  if (spec.family == Family::kPareto) {
    if (!(p > 1.0)) throw Error(Errc::kDomain, "pareto alpha must exceed 1, got " + format_param(p));
  } else if (!(p > 0.0)) {
    throw Error(Errc::kDomain, to_string(spec) + ": parameter must be positive");
  }
}

DistributionSpec parse_distribution(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(Errc::kDomain, "distribution must look like family:param, got '" +
                                   std::string(text) + "'");
  }
  const std::string_view name = text.substr(0, colon);
  const std::string_view num = text.substr(colon + 1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
  if (ec != std::errc{} || ptr != num.data() + num.size()) {
    throw Error(Errc::kDomain, "bad distribution parameter '" + std::string(num) + "'");
  }
  if (name == "two-point") return DistributionSpec::two_point(value);
  if (name == "gaussian") return DistributionSpec::gaussian(value);
  if (name == "uniform") return DistributionSpec::uniform(value);
  if (name == "pareto") return DistributionSpec::pareto(value);
  throw Error(Errc::kDomain, "unknown distribution family '" + std::string(name) +
                                 "' (expected two-point, gaussian, uniform or pareto)");
}

std::string to_string(const DistributionSpec& spec) {
  const char* name = "gaussian";
  switch (spec.family) {
    case Family::kTwoPoint: name = "two-point"; break;
    case Family::kGaussian: name = "gaussian"; break;
    case Family::kUniform: name = "uniform"; break;
    case Family::kPareto: name = "pareto"; break;
  }
  return std::string(name) + ":" + format_param(spec.param);
}

bool has_finite_abs_moment(const DistributionSpec& spec, double q) {
  return spec.family != Family::kPareto || q < spec.param;
}

double abs_moment(const DistributionSpec& spec, double q) {
  if (!has_finite_abs_moment(spec, q)) {
    throw Error(Errc::kMomentNotFinite,
                "E|X|^" + format_param(q) + " is infinite for " + to_string(spec));
  }
  return abs_q_closed(spec, q, 0.0);
}

double variance(const DistributionSpec& spec) {
  const double p = spec.param;
  switch (spec.family) {
    case Family::kTwoPoint: return p * p;
    case Family::kGaussian: return p * p;
    case Family::kUniform: return p * p / 3.0;
    case Family::kPareto:
      if (!(p > 2.0)) {
        throw Error(Errc::kMomentNotFinite, "variance is infinite for " + to_string(spec));
      }
      return p / (p - 2.0);
  }
  return 0.0;
}

double std_dev(const DistributionSpec& spec) { return std::sqrt(variance(spec)); }

// ---- TruncatedMomentKind ---------------------------------------------------

TruncatedMomentKind TruncatedMomentKind::abs_q(double q) {
  if (!(q >= 1.0 && q <= 2.0)) throw Error(Errc::kDomain, "AbsQ needs q in [1, 2]");
  return {Tag::kAbsQ, q, 1.0, 1.0};
}
TruncatedMomentKind TruncatedMomentKind::centered_square() {
  return {Tag::kCenteredSquare, 2.0, 1.0, 1.0};
}
TruncatedMomentKind TruncatedMomentKind::normalized_square() {
  return {Tag::kNormalizedSquare, 2.0, 1.0, 1.0};
}
TruncatedMomentKind TruncatedMomentKind::log_moment(double q, double eps) {
  if (!(q >= 1.0 && q < 2.0)) throw Error(Errc::kDomain, "LogMoment needs q in [1, 2)");
  if (!(eps > 0.0)) throw Error(Errc::kDomain, "LogMoment needs eps > 0");
  return {Tag::kLogMoment, q, eps, 1.0};
}
TruncatedMomentKind TruncatedMomentKind::log_delta_moment(double delta) {
  if (!(delta > 0.0)) throw Error(Errc::kDomain, "LogDeltaMoment needs delta > 0");
  return {Tag::kLogDeltaMoment, 2.0, 1.0, delta};
}

std::string to_string(const TruncatedMomentKind& kind) {
  switch (kind.tag) {
    case TruncatedMomentKind::Tag::kAbsQ: return "abs-q:" + format_param(kind.q);
    case TruncatedMomentKind::Tag::kCenteredSquare: return "centered-square";
    case TruncatedMomentKind::Tag::kNormalizedSquare: return "normalized-square";
    case TruncatedMomentKind::Tag::kLogMoment:
      return "log-moment:" + format_param(kind.q) + ":" + format_param(kind.eps);
    case TruncatedMomentKind::Tag::kLogDeltaMoment:
      return "log-delta-moment:" + format_param(kind.delta);
  }
  return "?";
}

void require_finite(const DistributionSpec& spec, const TruncatedMomentKind& kind) {
  if (spec.family != Family::kPareto) return;
  const double alpha = spec.param;
  // Every kind is driven by E|X|^q (q = 2 for the square kinds); the log
  // factors do not change finiteness for the power-law tail.
  const double order = kind.tag == TruncatedMomentKind::Tag::kAbsQ ||
                               kind.tag == TruncatedMomentKind::Tag::kLogMoment
                           ? kind.q
                           : 2.0;
  if (!(order < alpha)) {
    throw Error(Errc::kMomentNotFinite,
                to_string(kind) + " is infinite for " + to_string(spec));
  }
}

double trunc_moment(const DistributionSpec& spec, const TruncatedMomentKind& kind, double x) {
  if (!(x >= 0.0)) throw Error(Errc::kDomain, "truncation level must be >= 0");
  require_finite(spec, kind);
  switch (kind.tag) {
    case TruncatedMomentKind::Tag::kAbsQ: return abs_q_closed(spec, kind.q, x);
    case TruncatedMomentKind::Tag::kCenteredSquare: return centered_square_closed(spec, x);
    case TruncatedMomentKind::Tag::kNormalizedSquare: return normalized_square_closed(spec, x);
    case TruncatedMomentKind::Tag::kLogMoment:
    case TruncatedMomentKind::Tag::kLogDeltaMoment:
      return trunc_moment_quadrature_oracle(spec, kind, x);
  }
  return 0.0;
}

double trunc_moment_quadrature_oracle(const DistributionSpec& spec,
                                      const TruncatedMomentKind& kind, double x) {
  if (!(x >= 0.0)) throw Error(Errc::kDomain, "truncation level must be >= 0");
  require_finite(spec, kind);
  const AbsLaw law = abs_law(spec);
  const Functional f = functional_of(spec, kind, x);
  auto keep = [&](double g) { return !f.truncated || g >= x; };

  if (law.is_atom) {
    const double g = f.value(law.atom);
    return keep(g) ? g : 0.0;
  }

  std::vector<double> cuts{law.lo};
  if (f.truncated) {
    for (double b : f.breakpoints) {
      if (b > law.lo && b < law.hi) cuts.push_back(b);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(law.hi);

  const auto integrand = [&](double u) { return f.value(u) * law.density(u); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const double probe = std::isinf(b) ? a + 1.0 : 0.5 * (a + b);
    if (!keep(f.value(probe))) continue;
    total += integrate_piece(integrand, a, b);
  }
  return total;
}

std::function<double(double)> truncated_moment_fn(const DistributionSpec& spec,
                                                  const TruncatedMomentKind& kind) {
  require_finite(spec, kind);
  return [spec, kind](double x) { return trunc_moment(spec, kind, x); };
}

// ---- sampling --------------------------------------------------------------

Sampler::Sampler(const DistributionSpec& spec, std::uint64_t seed, std::uint64_t stream)
    : spec_(spec), rng_(seed, stream) {
  validate(spec);
  if (spec.family == Family::kPareto) inv_alpha_ = 1.0 / spec.param;
}

double Sampler::pareto_next() {
  const bool positive = rng_.coin();
  const double magnitude = std::pow(rng_.uniform_open(), -inv_alpha_);
  return positive ? magnitude : -magnitude;
}

std::vector<double> sample_stream(const DistributionSpec& spec, std::uint64_t seed,
                                  std::size_t n) {
  std::vector<double> out(n);
  Sampler sampler(spec, seed, 0);
  sampler.fill(out);
  return out;
}

}  // namespace uniconc
