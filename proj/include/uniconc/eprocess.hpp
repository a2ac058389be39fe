#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uniconc/distributions.hpp"
#include "uniconc/trajectory.hpp"

namespace uniconc {

inline constexpr int kDefaultJ = 20;
inline constexpr std::uint64_t kDefaultSearchCap = std::uint64_t{1} << 62;

// A tail bound B(m, eps) certified nonincreasing in m for each eps.
// Construction spot-checks the certificate on a small grid of (m, eps).
class BoundFunction {
 public:
  using Eval = std::function<double(std::uint64_t m, double eps)>;

  BoundFunction() = default;
  BoundFunction(Eval eval, std::uint64_t domain_min);

  double operator()(std::uint64_t m, double eps) const { return eval_(m, eps); }
  std::uint64_t domain_min() const { return domain_min_; }
  explicit operator bool() const { return static_cast<bool>(eval_); }

 private:
  Eval eval_;
  std::uint64_t domain_min_ = 1;
};

// Finite threshold or nullopt for Saturated (no m <= search_cap qualifies).
using Threshold = std::optional<std::uint64_t>;

// Minimal m >= B.domain_min() with B(m, 1/j) <= 2^{-j}, by doubling then
// bisection. Throws kCertificateViolated if B is seen increasing in m.
Threshold compute_mj(const BoundFunction& B, int j, std::uint64_t search_cap = kDefaultSearchCap);

// Membership of the k-prefix in A_k^{(eps)}. `prefix` holds X_1..X_k and
// `trajectory` the running statistics after X_k.
struct EventLattice {
  std::function<bool(std::span<const double> prefix, const TrajectoryState& trajectory,
                     double eps)>
      membership;
};

enum class EProcessKind { kSllnQ, kLil, kScaleInvariant, kGeneric };

std::string to_string(EProcessKind kind);

// Immutable threshold schedule m_1..m_J plus what the latch rule needs.
struct EProcessSchedule {
  EProcessKind kind = EProcessKind::kGeneric;
  std::vector<Threshold> thresholds;  // index j-1
  BoundFunction bound;                // the B the thresholds invert

  double q = 1.0;        // SllnQ exponent
  double sigma = 1.0;    // Lil scale sigma_P
  std::vector<double> lil_c;    // c_{1/j}
  std::vector<double> lil_ell;  // ell_{1/j}
  EventLattice lattice;         // Generic only

  int J() const { return static_cast<int>(thresholds.size()); }
  int finite_count() const;
};

// B(m, eps) = lq_bound at (m, eps, q) with spec's truncated q-th moment.
BoundFunction slln_bound_function(double q, const DistributionSpec& spec);
// First addend with log_{1+eps}(2m/3), lambda = 1/3, sigma_bar = sigma_P.
BoundFunction lil_bound_function(const DistributionSpec& spec, double sigma_p);
// 262/(eps^2 ^ 1) (m^{-1/3} + U_{P_1}(m^{1/3})) with P_1 the +-1 coin.
BoundFunction scale_invariant_bound_function();

EProcessSchedule build_slln_eprocess(double q, const DistributionSpec& spec, int J = kDefaultJ,
                                     std::uint64_t search_cap = kDefaultSearchCap);
EProcessSchedule build_lil_eprocess(const DistributionSpec& spec, double sigma_p,
                                    int J = kDefaultJ,
                                    std::uint64_t search_cap = kDefaultSearchCap);
EProcessSchedule build_scale_invariant_eprocess(int J = kDefaultJ,
                                                std::uint64_t search_cap = kDefaultSearchCap);
EProcessSchedule build_generic_eprocess(EventLattice lattice, BoundFunction B,
                                        int J = kDefaultJ,
                                        std::uint64_t search_cap = kDefaultSearchCap);

// Schedule with explicitly supplied thresholds (no inversion); used to drive
// the latch logic on horizons where the computed thresholds are out of reach.
EProcessSchedule make_slln_schedule(double q, std::vector<Threshold> thresholds);

// Lattice A_k^{(eps)} = {|S_k| / k^{1/q} >= eps}.
EventLattice slln_lattice(double q);

struct EProcessState {
  std::uint64_t n = 0;
  int value = 0;
  std::vector<char> latches;
  TrajectoryState trajectory;
  double first_abs = 0.0;        // |X_1|, scale-invariant kind
  std::vector<double> history;   // kept for the generic kind only
  std::uint64_t armed_from = 0;  // smallest finite m_j; 0 when none is finite
};

EProcessState make_state(const EProcessSchedule& schedule);

// Appends x and latches every j with n >= m_j whose statistic crosses at
// k = n. O(J) per call plus O(1) trajectory work.
void update(const EProcessSchedule& schedule, EProcessState& state, double x);

}  // namespace uniconc
