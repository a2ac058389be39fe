#pragma once

#include <stdexcept>
#include <string>

namespace uniconc {

enum class Errc {
  kDomain,               // argument outside the documented domain
  kMomentNotFinite,      // requested moment is infinite for the distribution
  kQuadratureFailure,    // numerical integration did not reach tolerance
  kCertificateViolated,  // a bound declared monotone in m was not
  kHypothesisViolated,   // statistic needs a moment the distribution lacks
  kStatisticUndefined,   // e.g. scale-invariant statistic with X_1 = 0
  kInternal,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace uniconc
