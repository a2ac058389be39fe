#include "uniconc/rng.hpp"
#include "uniconc/error.hpp"

#include <cmath>

namespace uniconc {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kDomain: return "domain error";
    case Errc::kMomentNotFinite: return "moment not finite";
    case Errc::kQuadratureFailure: return "quadrature failure";
    case Errc::kCertificateViolated: return "certificate violated";
    case Errc::kHypothesisViolated: return "moment hypothesis violated";
    case Errc::kStatisticUndefined: return "statistic undefined";
    case Errc::kInternal: return "internal error";
  }
  return "unknown error";
}

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream) {
  return std::seed_seq{
      static_cast<std::uint32_t>(seed & 0xffffffffu),
      static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream & 0xffffffffu),
      static_cast<std::uint32_t>(stream >> 32)};
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  auto seq = make_seed_seq(seed, stream);
  engine_.seed(seq);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

}  // namespace uniconc
