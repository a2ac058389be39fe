#include "uniconc/eprocess.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "uniconc/bounds.hpp"
#include "uniconc/error.hpp"

namespace uniconc {

namespace {

// Slack for floating-point noise when checking monotonicity in m.
bool increased(double later, double earlier) {
  if (std::isinf(earlier)) return false;
  return later > earlier + 1e-12 * std::abs(earlier);
}

[[noreturn]] void certificate_violated(std::uint64_t m1, std::uint64_t m2, double eps) {
  std::ostringstream os;
  os << "certificate violated: B(" << m2 << ", " << eps << ") > B(" << m1 << ", " << eps
     << ") although " << m1 << " < " << m2;
  throw Error(Errc::kCertificateViolated, os.str());
}

std::vector<Threshold> invert_all(const BoundFunction& B, int J, std::uint64_t search_cap) {
  if (J < 1) throw Error(Errc::kDomain, "J must be >= 1");
  std::vector<Threshold> out;
  out.reserve(J);
  for (int j = 1; j <= J; ++j) out.push_back(compute_mj(B, j, search_cap));
  return out;
}

bool event_at(const EProcessSchedule& s, const EProcessState& state, int j) {
  const double k = static_cast<double>(state.n);
  const double abs_sum = std::abs(state.trajectory.sum());
  const double inv_j = 1.0 / j;
  switch (s.kind) {
    case EProcessKind::kSllnQ:
      return abs_sum / pow_exact(k, 1.0 / s.q) >= inv_j;
    case EProcessKind::kLil: {
      const double c = s.lil_c[j - 1];
      const double ell = s.lil_ell[j - 1];
      const double r = std::log(std::log((1.0 + inv_j) * (1.0 + inv_j) * k)) + ell;
      if (!(r >= 0.0)) return false;
      return abs_sum / s.sigma >= c * std::sqrt(k * r);
    }
    case EProcessKind::kScaleInvariant:
      return abs_sum / (k * state.first_abs) >= inv_j;
    case EProcessKind::kGeneric:
      return s.lattice.membership(state.history, state.trajectory, inv_j);
  }
  return false;
}

}  // namespace

BoundFunction::BoundFunction(Eval eval, std::uint64_t domain_min)
    : eval_(std::move(eval)), domain_min_(std::max<std::uint64_t>(domain_min, 1)) {
  if (!eval_) throw Error(Errc::kDomain, "bound function is empty");
  static constexpr double kEps[] = {1.0, 0.5, 0.1};
  static constexpr std::uint64_t kScale[] = {1, 2, 4, 16, 256, 65536, std::uint64_t{1} << 32,
                                             std::uint64_t{1} << 48};
  for (double eps : kEps) {
    std::uint64_t prev_m = domain_min_;
    double prev = eval_(prev_m, eps);
    for (std::uint64_t scale : kScale) {
      const std::uint64_t m = domain_min_ * scale;
      if (m == prev_m) continue;
      const double v = eval_(m, eps);
      if (increased(v, prev)) certificate_violated(prev_m, m, eps);
      prev = v;
      prev_m = m;
    }
  }
}

Threshold compute_mj(const BoundFunction& B, int j, std::uint64_t search_cap) {
  if (j < 1) throw Error(Errc::kDomain, "j must be >= 1");
  if (search_cap < 2) throw Error(Errc::kDomain, "search_cap must be >= 2");
  const double target = std::ldexp(1.0, -j);
  const double eps = 1.0 / j;

  std::uint64_t lo = B.domain_min();
  if (lo > search_cap) return std::nullopt;
  double v_lo = B(lo, eps);
  if (v_lo <= target) return lo;

  // Doubling: find a passing hi, keeping lo as the last failing point.
  std::uint64_t hi = lo;
  double v_hi = v_lo;
  for (;;) {
    if (hi == search_cap) return std::nullopt;
    const std::uint64_t next =
        hi > search_cap / 2 ? search_cap : std::min(search_cap, std::max(hi * 2, hi + 1));
    const double v = B(next, eps);
    if (increased(v, v_hi)) certificate_violated(hi, next, eps);
    if (v <= target) {
      lo = hi;
      v_lo = v_hi;
      hi = next;
      v_hi = v;
      break;
    }
    hi = next;
    v_hi = v;
  }

  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    const double v = B(mid, eps);
    if (increased(v, v_lo)) certificate_violated(lo, mid, eps);
    if (increased(v_hi, v)) certificate_violated(mid, hi, eps);
    if (v <= target) {
      hi = mid;
      v_hi = v;
    } else {
      lo = mid;
      v_lo = v;
    }
  }
  return hi;
}

std::string to_string(EProcessKind kind) {
  switch (kind) {
    case EProcessKind::kSllnQ: return "slln";
    case EProcessKind::kLil: return "lil";
    case EProcessKind::kScaleInvariant: return "scale-invariant";
    case EProcessKind::kGeneric: return "generic";
  }
  return "?";
}

int EProcessSchedule::finite_count() const {
  return static_cast<int>(
      std::count_if(thresholds.begin(), thresholds.end(), [](const Threshold& t) {
        return t.has_value();
      }));
}

BoundFunction slln_bound_function(double q, const DistributionSpec& spec) {
  if (!(q >= 1.0 && q < 2.0)) throw Error(Errc::kDomain, "q out of range: need q in [1, 2)");
  auto Uq = truncated_moment_fn(spec, TruncatedMomentKind::abs_q(q));
  return BoundFunction(
      [q, Uq](std::uint64_t m, double eps) { return lq_bound({m, eps, q}, Uq).raw; }, 1);
}

BoundFunction lil_bound_function(const DistributionSpec& spec, double sigma_p) {
  auto Ubar = truncated_moment_fn(spec, TruncatedMomentKind::centered_square());
  return BoundFunction(
      [sigma_p, Ubar](std::uint64_t m, double eps) {
        return lil_eprocess_bound({m, eps, kDefaultLilLambda, sigma_p, sigma_p}, Ubar).raw;
      },
      2);
}

BoundFunction scale_invariant_bound_function() {
  const auto coin = DistributionSpec::two_point(1.0);
  auto U = truncated_moment_fn(coin, TruncatedMomentKind::abs_q(1.0));
  return BoundFunction(
      [U](std::uint64_t m, double eps) {
        return l1_bound({m, eps, kDefaultLilLambda}, U).raw;
      },
      2);
}

EProcessSchedule build_slln_eprocess(double q, const DistributionSpec& spec, int J,
                                     std::uint64_t search_cap) {
  EProcessSchedule s;
  s.kind = EProcessKind::kSllnQ;
  s.q = q;
  s.bound = slln_bound_function(q, spec);
  s.thresholds = invert_all(s.bound, J, search_cap);
  return s;
}

EProcessSchedule build_lil_eprocess(const DistributionSpec& spec, double sigma_p, int J,
                                    std::uint64_t search_cap) {
  if (!(sigma_p > 0.0)) throw Error(Errc::kDomain, "sigma_P must be positive");
  EProcessSchedule s;
  s.kind = EProcessKind::kLil;
  s.sigma = sigma_p;
  s.bound = lil_bound_function(spec, sigma_p);
  s.thresholds = invert_all(s.bound, J, search_cap);
  for (int j = 1; j <= J; ++j) {
    s.lil_c.push_back(c_eps(1.0 / j));
    s.lil_ell.push_back(ell_eps(1.0 / j));
  }
  return s;
}

EProcessSchedule build_scale_invariant_eprocess(int J, std::uint64_t search_cap) {
  EProcessSchedule s;
  s.kind = EProcessKind::kScaleInvariant;
  s.bound = scale_invariant_bound_function();
  s.thresholds = invert_all(s.bound, J, search_cap);
  return s;
}

EProcessSchedule build_generic_eprocess(EventLattice lattice, BoundFunction B, int J,
                                        std::uint64_t search_cap) {
  if (!lattice.membership) throw Error(Errc::kDomain, "event lattice has no membership");
  if (!B) throw Error(Errc::kDomain, "bound function is empty");
  EProcessSchedule s;
  s.kind = EProcessKind::kGeneric;
  s.lattice = std::move(lattice);
  s.bound = std::move(B);
  s.thresholds = invert_all(s.bound, J, search_cap);
  return s;
}

EProcessSchedule make_slln_schedule(double q, std::vector<Threshold> thresholds) {
  if (thresholds.empty()) throw Error(Errc::kDomain, "J must be >= 1");
  EProcessSchedule s;
  s.kind = EProcessKind::kSllnQ;
  s.q = q;
  s.thresholds = std::move(thresholds);
  return s;
}

EventLattice slln_lattice(double q) {
  return {[q](std::span<const double>, const TrajectoryState& t, double eps) {
    const double k = static_cast<double>(t.n());
    return std::abs(t.sum()) / pow_exact(k, 1.0 / q) >= eps;
  }};
}

EProcessState make_state(const EProcessSchedule& schedule) {
  EProcessState st;
  st.latches.assign(schedule.thresholds.size(), 0);
  for (const Threshold& t : schedule.thresholds) {
    if (t && (st.armed_from == 0 || *t < st.armed_from)) st.armed_from = *t;
  }
  return st;
}

void update(const EProcessSchedule& schedule, EProcessState& state, double x) {
  if (state.n == 0 && schedule.kind == EProcessKind::kScaleInvariant) {
    if (x == 0.0) {
      throw Error(Errc::kStatisticUndefined,
                  "scale-invariant statistic undefined: first observation is 0");
    }
    state.first_abs = std::abs(x);
  }
  ++state.n;
  state.trajectory.push(x);
  if (schedule.kind == EProcessKind::kGeneric) state.history.push_back(x);

  if (state.armed_from == 0 || state.n < state.armed_from) return;
  const int J = schedule.J();
  for (int j = 1; j <= J; ++j) {
    if (state.latches[j - 1]) continue;
    const Threshold& mj = schedule.thresholds[j - 1];
    if (!mj || state.n < *mj) continue;
    if (event_at(schedule, state, j)) {
      state.latches[j - 1] = 1;
      ++state.value;
    }
  }
}

}  // namespace uniconc
