#pragma once

#include <cstdint>

namespace uniconc {

// Running statistics of a stream X_1, X_2, ...: S_n, sum of squares, sample
// mean and the (biased, 1/n) sample variance, updated in O(1).
class TrajectoryState {
 public:
  void push(double x) {
    ++n_;
    sum_ += x;
    sum_sq_ += x * x;
    // Welford update of the centered second moment.
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::uint64_t n() const { return n_; }
  double sum() const { return sum_; }
  double sum_sq() const { return sum_sq_; }
  double mu_hat() const { return mean_; }

  // (1/n) sum (X_i - mu_hat)^2; zero before the first observation.
  double sigma_hat_sq() const {
    if (n_ == 0) return 0.0;
    const double v = m2_ / static_cast<double>(n_);
    return v > 0.0 ? v : 0.0;
  }

 private:
  std::uint64_t n_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace uniconc
