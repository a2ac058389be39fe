#include "uniconc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "uniconc/error.hpp"

namespace uniconc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double min1(double v) { return std::min(v, 1.0); }

[[noreturn]] void domain(const std::string& what) { throw Error(Errc::kDomain, what); }

void require_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) domain("eps must be a positive finite real");
}

// (log_{1+eps} y)^{-eps} / (eps zeta(1+eps)), +inf when the log is <= 0.
double stitched_log_term(double y, double eps) {
  const double L = log_base(y, eps);
  if (!(L > 0.0)) return kInf;
  return std::pow(L, -eps) / (eps * zeta(1.0 + eps));
}

BoundValue lil_family_bound(const LilParams& p, const TailMoment& U, double log_arg,
                            double scale_constant, double scale_denominator) {
  const double m = static_cast<double>(p.m);
  const double first = stitched_log_term(log_arg, p.eps);
  const double coeff = scale_constant / min1(scale_denominator);
  const double poly = coeff / pow_exact(m, 1.0 - 2.0 * p.lambda);
  const double moment = coeff * U(pow_exact(m, p.lambda));
  return BoundValue::from_components(
      {{"log-stitching", first}, {"polynomial", poly}, {"truncated-moment", moment}});
}

}  // namespace

BoundValue BoundValue::from_components(std::vector<BoundComponent> parts) {
  BoundValue b;
  for (const auto& c : parts) b.raw += c.value;
  b.components = std::move(parts);
  b.clamped = clamp(b);
  return b;
}

double clamp(const BoundValue& b) {
  if (std::isnan(b.raw)) return 1.0;
  return std::min(1.0, std::max(0.0, b.raw));
}

void validate(const L1Params& p) {
  if (p.m < 1) domain("m must be >= 1");
  require_eps(p.eps);
  if (!(p.lambda > 0.0 && p.lambda < 0.5)) domain("lambda must lie in (0, 1/2)");
}

void validate(const LqParams& p) {
  if (p.m < 1) domain("m must be >= 1");
  require_eps(p.eps);
  if (!(p.q >= 1.0 && p.q < 2.0)) domain("q out of range: need q in [1, 2)");
}

void validate(const LilParams& p) {
  if (p.m < 2) domain("m must be >= 2");
  require_eps(p.eps);
  if (!(p.lambda > 0.0 && p.lambda < 0.5)) domain("lambda must lie in (0, 1/2)");
  if (!(p.sigma_bar > 0.0)) domain("sigma_bar must be positive");
  if (!(p.sigma_p > 0.0)) domain("sigma_P must be positive");
}

double zeta(double s) {
  if (!(s > 1.0)) {
    std::ostringstream os;
    os << "zeta domain: need s > 1, got " << s;
    domain(os.str());
  }
  constexpr int kTerms = 16;
  // B_{2k} / (2k)!
  constexpr double kBernoulliOverFactorial[] = {
      1.0 / 6.0 / 2.0,
      -1.0 / 30.0 / 24.0,
      1.0 / 42.0 / 720.0,
      -1.0 / 30.0 / 40320.0,
      5.0 / 66.0 / 3628800.0,
      -691.0 / 2730.0 / 479001600.0,
      7.0 / 6.0 / 87178291200.0,
  };
  double head = 0.0;
  for (int n = kTerms - 1; n >= 1; --n) head += std::pow(static_cast<double>(n), -s);
  const double N = kTerms;
  double tail = std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s);
  double rising = s;                // s (s+1) ... (s+2k-2)
  double power = std::pow(N, -s - 1.0);  // N^{-s-2k+1}
  for (int k = 0; k < 7; ++k) {
    tail += kBernoulliOverFactorial[k] * rising * power;
    rising *= (s + 2.0 * k + 1.0) * (s + 2.0 * k + 2.0);
    power /= N * N;
  }
  return head + tail;
}

double c_eps(double eps) {
  require_eps(eps);
  return (std::pow(1.0 + eps, 1.25) + std::pow(1.0 + eps, 0.75)) / std::numbers::sqrt2;
}

double ell_eps(double eps) {
  require_eps(eps);
  return std::log(2.0 * zeta(1.0 + eps) / std::log1p(eps));
}

double log_base(double y, double eps) { return std::log(y) / std::log1p(eps); }

double pow_exact(double m, double e) {
  auto near = [e](double target) { return std::abs(e - target) < 1e-12; };
  if (near(0.5)) return std::sqrt(m);
  if (near(-0.5)) return 1.0 / std::sqrt(m);
  if (near(0.25)) return std::sqrt(std::sqrt(m));
  if (near(-0.25)) return 1.0 / std::sqrt(std::sqrt(m));
  if (near(1.0 / 3.0)) return std::cbrt(m);
  if (near(-1.0 / 3.0)) return 1.0 / std::cbrt(m);
  return std::pow(m, e);
}

BoundValue l1_bound(const L1Params& p, const TailMoment& U) {
  validate(p);
  const double m = static_cast<double>(p.m);
  const double coeff = 262.0 / min1(p.eps * p.eps);
  return BoundValue::from_components(
      {{"polynomial", coeff / pow_exact(m, 1.0 - 2.0 * p.lambda)},
       {"truncated-moment", coeff * U(pow_exact(m, p.lambda))}});
}

BoundValue line_crossing_bound(double eps, double gamma, double x, const TailMoment& U) {
  require_eps(eps);
  if (!(gamma > 0.0)) domain("gamma must be positive");
  if (!(x >= 0.0)) domain("x must be >= 0");
  return BoundValue::from_components(
      {{"line", 8.0 * x * x / (gamma * eps * eps)},
       {"truncated-moment", (16.0 / (eps * eps) + 2.0) * U(x)}});
}

BoundValue lq_bound(const LqParams& p, const TailMoment& Uq) {
  validate(p);
  const double m = static_cast<double>(p.m);
  const double q = p.q;
  const double first = 2.0 * std::exp(-pow_exact(m, 1.0 / q - 0.5)) / (2.0 - q);
  const double level = std::pow(p.eps, q) * pow_exact(m, 0.5 - 0.25 * q) / 38.0;
  const double second = 451.0 / min1(p.eps * p.eps) * Uq(level);
  return BoundValue::from_components({{"sub-gaussian", first}, {"truncated-moment", second}});
}

BoundValue lil_bound(const LilParams& p, const TailMoment& Ubar2) {
  validate(p);
  const double s4 = std::pow(p.sigma_bar, 4.0);
  return lil_family_bound(p, Ubar2, static_cast<double>(p.m) / 3.0, 262.0,
                          p.eps * p.eps * s4);
}

BoundValue lil_eprocess_bound(const LilParams& p, const TailMoment& Ubar2) {
  validate(p);
  const double s4 = std::pow(p.sigma_bar, 4.0);
  return lil_family_bound(p, Ubar2, 2.0 * static_cast<double>(p.m) / 3.0, 262.0,
                          p.eps * p.eps * s4);
}

BoundValue studentized_lil_bound(const LilParams& p, const TailMoment& Uhat2) {
  validate(p);
  return lil_family_bound(p, Uhat2, 2.0 * static_cast<double>(p.m) / 3.0, 786.0,
                          p.eps * p.eps);
}

namespace {

double lil_radicand(std::uint64_t k, double eps) {
  if (k < 1) domain("boundary needs k >= 1");
  const double kk = static_cast<double>(k);
  const double r = std::log(std::log((1.0 + eps) * (1.0 + eps) * kk)) + ell_eps(eps);
  if (!(r >= 0.0)) {
    std::ostringstream os;
    os << "boundary undefined at k = " << k << " (negative radicand)";
    domain(os.str());
  }
  return kk * r;
}

}  // namespace

double lil_boundary(std::uint64_t k, double eps, double sigma_bar) {
  require_eps(eps);
  if (!(sigma_bar > 0.0)) domain("sigma_bar must be positive");
  return sigma_bar * c_eps(eps) * std::sqrt(lil_radicand(k, eps));
}

double studentized_lil_boundary(std::uint64_t k, double eps, double sigma_hat) {
  require_eps(eps);
  if (!(sigma_hat >= 0.0)) domain("sigma_hat must be >= 0");
  return sigma_hat * c_eps(eps) * std::sqrt((1.0 + 2.0 * eps) * lil_radicand(k, eps));
}

double darling_robbins_boundary(std::uint64_t k, double eps, double sigma_bar) {
  require_eps(eps);
  if (!(sigma_bar > 0.0)) domain("sigma_bar must be positive");
  if (k < 3) {
    std::ostringstream os;
    os << "boundary undefined at k = " << k << " (need k >= 3)";
    domain(os.str());
  }
  const double kk = static_cast<double>(k);
  const double r = 2.0 * (1.0 + eps) * (1.0 + eps) * std::log(std::log(kk)) +
                   2.0 * (1.0 + eps) * std::numbers::ln2;
  if (!(r >= 0.0)) {
    std::ostringstream os;
    os << "boundary undefined at k = " << k << " (negative radicand)";
    domain(os.str());
  }
  return sigma_bar * std::sqrt(kk * r);
}

BoundValue darling_robbins_bound(std::uint64_t m, double eps) {
  require_eps(eps);
  if (m < 2) domain("m must be >= 2");
  const double L = log_base(static_cast<double>(m), eps);
  return BoundValue::from_components({{"log-stitching", std::pow(L, -eps) / eps}});
}

BoundValue baum_katz_series_bound(double q, double eps, double log_moment) {
  if (!(q >= 1.0 && q < 2.0)) domain("q out of range: need q in [1, 2)");
  require_eps(eps);
  if (!(log_moment >= 0.0)) domain("log moment must be >= 0");
  const double cq = 2.0 / (2.0 - q);
  const double constant = cq / (std::numbers::e * (1.0 / q - 0.5) * std::numbers::ln2);
  const double moment = 2603.0 * log_moment / ((2.0 - q) * min1(eps * eps));
  return BoundValue::from_components({{"one", 1.0}, {"exponential-series", constant},
                                      {"log-moment", moment}});
}

namespace {

// Positive, decreasing summand on m >= 2 with a tail integral.
struct Series {
  std::function<double(double)> term;
  std::function<double(double)> tail_integral;  // int_M^inf term
};

struct SeriesSum {
  double value = 0.0;
  double half_width = 0.0;
};

SeriesSum sum_series(const Series& s, std::uint64_t cutoff) {
  double head = 0.0;
  // Smallest terms first.
  for (std::uint64_t m = cutoff; m >= 2; --m) head += s.term(static_cast<double>(m));
  const double upper = s.tail_integral(static_cast<double>(cutoff));
  const double lower = s.tail_integral(static_cast<double>(cutoff + 1));
  // sum_{m>M} f(m) lies in [int_{M+1}^inf f, int_M^inf f].
  return {head + 0.5 * (upper + lower), 0.5 * (upper - lower)};
}

}  // namespace

BoundValue baum_katz_lil_series_bound(double eps, double delta, double log_delta_moment,
                                      double tol) {
  require_eps(eps);
  if (!(delta > 0.0)) domain("delta must be positive");
  if (!(log_delta_moment >= 0.0) || !std::isfinite(log_delta_moment)) {
    domain("log-delta moment must be finite and >= 0");
  }
  if (!(tol > 0.0 && tol < 1.0)) domain("tol must lie in (0, 1)");

  const double ka = std::pow(std::log1p(eps), eps) * zeta(1.0 + eps) / eps;
  const Series stitched{
      [ka, eps](double m) { return ka / (m * std::pow(std::log(2.0 * m / 3.0), 1.0 + eps)); },
      [ka, eps](double M) { return ka * std::pow(std::log(2.0 * M / 3.0), -eps) / eps; }};

  const Series polynomial{
      [](double m) { return std::pow(m, -4.0 / 3.0) / std::log(m); },
      [](double M) {
        boost::math::quadrature::exp_sinh<double> integrator;
        return integrator.integrate(
            [](double t) { return std::pow(t, -4.0 / 3.0) / std::log(t); }, M,
            std::numeric_limits<double>::infinity(), 1e-14);
      }};

  const double kc = (1.0 + log_delta_moment) * std::pow(3.0, delta);
  const Series moment{
      [kc, delta](double m) { return kc / (m * std::pow(std::log(m), 1.0 + delta)); },
      [kc, delta](double M) { return kc * std::pow(std::log(M), -delta) / delta; }};

  const double weight = 262.0 / (eps * eps);
  auto width_estimate = [&](double M) {
    return 0.5 * (stitched.term(M) + weight * (polynomial.term(M) + moment.term(M)));
  };
  std::uint64_t cutoff = 1024;
  while (width_estimate(static_cast<double>(cutoff)) > 0.5 * tol) {
    if (cutoff > (std::uint64_t{1} << 34)) {
      domain("baum_katz_lil_series_bound: tol too small for direct summation");
    }
    cutoff *= 2;
  }

  const SeriesSum a = sum_series(stitched, cutoff);
  const SeriesSum b = sum_series(polynomial, cutoff);
  const SeriesSum c = sum_series(moment, cutoff);
  BoundValue out = BoundValue::from_components({{"log-stitching-series", a.value},
                                                {"polynomial-series", weight * b.value},
                                                {"moment-series", weight * c.value}});
  out.abs_error = a.half_width + weight * (b.half_width + c.half_width);
  return out;
}

}  // namespace uniconc
