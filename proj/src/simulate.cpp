#include "uniconc/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "uniconc/error.hpp"
#include "uniconc/trajectory.hpp"

namespace uniconc {

namespace {

[[noreturn]] void domain(const std::string& what) { throw Error(Errc::kDomain, what); }

// Runs fn(rep) for rep in [0, reps) on `workers` threads. Callers write
// results into per-rep slots or per-worker integer tallies, so the outcome
// does not depend on scheduling.
template <class Fn>
void for_each_rep(std::uint64_t reps, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || reps < 2) {
    for (std::uint64_t r = 0; r < reps; ++r) fn(0u, r);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, reps));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint64_t r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) fn(w, r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(reps);
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

bool is_sub_gaussian(const DistributionSpec& spec) { return spec.family != Family::kPareto; }

// Crossing test for one cell on the shared trajectory.
struct CellPlan {
  std::uint64_t m = 1;
  std::uint64_t horizon = 1;
  bool studentized = false;
  std::vector<double> threshold;  // index k - m
};

CellPlan plan_cell(const SimConfig& cfg) {
  CellPlan plan;
  plan.m = cfg.m;
  plan.horizon = cfg.horizon;
  plan.studentized = cfg.inequality == Inequality::kStudentizedLil;
  plan.threshold.resize(cfg.horizon - cfg.m + 1);
  const double sbar = resolved_sigma_bar(cfg);
  for (std::uint64_t k = cfg.m; k <= cfg.horizon; ++k) {
    const double kk = static_cast<double>(k);
    double t = 0.0;
    switch (cfg.inequality) {
      case Inequality::kL1: t = cfg.eps * kk; break;
      case Inequality::kLq: t = cfg.eps * pow_exact(kk, 1.0 / cfg.q); break;
      case Inequality::kLil: t = lil_boundary(k, cfg.eps, sbar); break;
      case Inequality::kStudentizedLil: t = studentized_lil_boundary(k, cfg.eps, 1.0); break;
      case Inequality::kDarlingRobbins: t = darling_robbins_boundary(k, cfg.eps, sbar); break;
    }
    plan.threshold[k - cfg.m] = t;
  }
  return plan;
}

}  // namespace

std::string to_string(Inequality ineq) {
  switch (ineq) {
    case Inequality::kL1: return "l1";
    case Inequality::kLq: return "lq";
    case Inequality::kLil: return "lil";
    case Inequality::kStudentizedLil: return "studentized-lil";
    case Inequality::kDarlingRobbins: return "darling-robbins";
  }
  return "?";
}

Inequality parse_inequality(std::string_view text) {
  if (text == "l1") return Inequality::kL1;
  if (text == "lq") return Inequality::kLq;
  if (text == "lil") return Inequality::kLil;
  if (text == "studentized-lil") return Inequality::kStudentizedLil;
  if (text == "darling-robbins") return Inequality::kDarlingRobbins;
  domain("unknown inequality '" + std::string(text) +
         "' (expected l1, lq, lil, studentized-lil or darling-robbins)");
}

double resolved_lambda(const SimConfig& cfg) {
  if (cfg.lambda != 0.0) return cfg.lambda;
  return cfg.inequality == Inequality::kL1 ? kDefaultL1Lambda : kDefaultLilLambda;
}

double resolved_sigma_bar(const SimConfig& cfg) {
  if (cfg.sigma_bar > 0.0) return cfg.sigma_bar;
  return has_finite_abs_moment(cfg.spec, 2.0) ? std_dev(cfg.spec) : 0.0;
}

void validate(const SimConfig& cfg) {
  validate(cfg.spec);
  if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps)) domain("eps must be positive");
  if (cfg.m < 1) domain("m must be >= 1");
  if (cfg.horizon < cfg.m) domain("horizon N must be >= m");
  if (cfg.reps < 1) domain("reps must be >= 1");
  if (cfg.workers < 1) domain("workers must be >= 1");
  if (cfg.sigma_bar < 0.0) domain("sigma_bar must be >= 0");
  const double lambda = resolved_lambda(cfg);
  if (!(lambda > 0.0 && lambda < 0.5)) domain("lambda must lie in (0, 1/2)");

  auto violated = [&](const std::string& why) {
    throw Error(Errc::kHypothesisViolated, to_string(cfg.inequality) + " on " +
                                               to_string(cfg.spec) + ": " + why);
  };
  switch (cfg.inequality) {
    case Inequality::kL1:
      break;
    case Inequality::kLq:
      if (!(cfg.q >= 1.0 && cfg.q < 2.0)) domain("q out of range: need q in [1, 2)");
      if (!has_finite_abs_moment(cfg.spec, cfg.q)) violated("E|X|^q is infinite");
      break;
    case Inequality::kLil:
    case Inequality::kStudentizedLil:
      if (cfg.m < 2) domain("m must be >= 2 for the iterated-logarithm bounds");
      if (!has_finite_abs_moment(cfg.spec, 2.0)) violated("variance is infinite");
      if (resolved_sigma_bar(cfg) < std_dev(cfg.spec)) violated("sigma_bar below the true sd");
      break;
    case Inequality::kDarlingRobbins:
      if (cfg.m < 3) domain("m must be >= 3 for the Darling-Robbins boundary");
      if (!is_sub_gaussian(cfg.spec)) violated("distribution is not sub-Gaussian");
      if (resolved_sigma_bar(cfg) < std_dev(cfg.spec)) violated("sigma_bar below the true sd");
      break;
  }
}

BoundValue analytic_bound(const SimConfig& cfg) {
  validate(cfg);
  const double lambda = resolved_lambda(cfg);
  switch (cfg.inequality) {
    case Inequality::kL1:
      return l1_bound({cfg.m, cfg.eps, lambda},
                      truncated_moment_fn(cfg.spec, TruncatedMomentKind::abs_q(1.0)));
    case Inequality::kLq:
      return lq_bound({cfg.m, cfg.eps, cfg.q},
                      truncated_moment_fn(cfg.spec, TruncatedMomentKind::abs_q(cfg.q)));
    case Inequality::kLil:
      return lil_bound({cfg.m, cfg.eps, lambda, resolved_sigma_bar(cfg), std_dev(cfg.spec)},
                       truncated_moment_fn(cfg.spec, TruncatedMomentKind::centered_square()));
    case Inequality::kStudentizedLil: {
      const double sd = std_dev(cfg.spec);
      return studentized_lil_bound(
          {cfg.m, cfg.eps, lambda, sd, sd},
          truncated_moment_fn(cfg.spec, TruncatedMomentKind::normalized_square()));
    }
    case Inequality::kDarlingRobbins:
      return darling_robbins_bound(cfg.m, cfg.eps);
  }
  return {};
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) domain("Wilson interval needs at least one trial");
  if (successes > trials) domain("successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  WilsonInterval w{std::max(0.0, center - half), std::min(1.0, center + half)};
  // Keep lo <= phat <= hi in floating point at the extremes.
  w.lo = std::min(w.lo, p);
  w.hi = std::max(w.hi, p);
  return w;
}

CrossingEstimate estimate_crossing(const SimConfig& cfg) {
  return estimate_crossings(std::span<const SimConfig>(&cfg, 1)).front();
}

std::vector<CrossingEstimate> estimate_crossings(std::span<const SimConfig> cells) {
  if (cells.empty()) return {};
  const SimConfig& head = cells.front();
  for (const SimConfig& c : cells) {
    validate(c);
    if (!(c.spec == head.spec) || c.seed != head.seed || c.reps != head.reps ||
        c.workers != head.workers) {
      domain("cells in one batch must share distribution, seed, reps and workers");
    }
  }

  // Bounds first so that a failing evaluation stops the run before sampling.
  std::vector<BoundValue> bounds;
  bounds.reserve(cells.size());
  for (const SimConfig& c : cells) bounds.push_back(analytic_bound(c));

  std::vector<CellPlan> plans;
  plans.reserve(cells.size());
  std::uint64_t max_horizon = 0;
  for (const SimConfig& c : cells) {
    plans.push_back(plan_cell(c));
    max_horizon = std::max(max_horizon, c.horizon);
  }

  // Times at which the set of cells inside their window changes.
  std::vector<std::uint64_t> events;
  for (const CellPlan& p : plans) {
    events.push_back(p.m);
    events.push_back(p.horizon + 1);
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  const std::size_t n_cells = cells.size();
  const unsigned workers = std::max(1u, head.workers);
  std::vector<std::vector<std::uint64_t>> tallies(workers,
                                                  std::vector<std::uint64_t>(n_cells, 0));

  for_each_rep(head.reps, workers, [&](unsigned w, std::uint64_t rep) {
    Sampler sampler(head.spec, head.seed, rep);
    TrajectoryState traj;
    std::vector<char> crossed(n_cells, 0);
    std::vector<std::size_t> active;
    std::size_t unresolved = n_cells;
    std::size_t next_event = 0;

    for (std::uint64_t k = 1; k <= max_horizon && unresolved > 0; ++k) {
      traj.push(sampler.next());
      if (next_event < events.size() && events[next_event] == k) {
        ++next_event;
        active.clear();
        for (std::size_t c = 0; c < n_cells; ++c) {
          if (crossed[c]) continue;
          if (k > plans[c].horizon) continue;
          if (k >= plans[c].m) active.push_back(c);
        }
      }
      if (active.empty()) continue;
      const double abs_sum = std::abs(traj.sum());
      double sigma_hat = -1.0;
      for (std::size_t i = 0; i < active.size();) {
        const std::size_t c = active[i];
        const CellPlan& p = plans[c];
        const double t = p.threshold[k - p.m];
        bool hit;
        if (p.studentized) {
          if (sigma_hat < 0.0) sigma_hat = std::sqrt(traj.sigma_hat_sq());
          hit = abs_sum > 0.0 && abs_sum >= sigma_hat * t;
        } else {
          hit = abs_sum >= t;
        }
        const bool last = k == p.horizon;
        if (hit || last) {
          if (hit) crossed[c] = 1;
          --unresolved;
          active[i] = active.back();
          active.pop_back();
        } else {
          ++i;
        }
      }
    }
    for (std::size_t c = 0; c < n_cells; ++c) tallies[w][c] += crossed[c] ? 1 : 0;
  });

  std::vector<CrossingEstimate> out;
  out.reserve(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    CrossingEstimate e;
    for (const auto& t : tallies) e.crossings += t[c];
    e.reps = head.reps;
    e.phat = static_cast<double>(e.crossings) / static_cast<double>(e.reps);
    e.wilson = wilson_interval(e.crossings, e.reps);
    e.analytic_bound = bounds[c];
    out.push_back(std::move(e));
  }
  return out;
}

// ---- e-process validity ----------------------------------------------------

StoppingRule StoppingRule::fixed(std::uint64_t n0) {
  StoppingRule r;
  r.kind = Kind::kFixed;
  r.n0 = n0;
  r.cap = n0;
  return r;
}

StoppingRule StoppingRule::sqrt_crossing(double c, std::uint64_t cap) {
  if (!(c > 0.0)) domain("stopping constant must be positive");
  StoppingRule r;
  r.kind = Kind::kSqrtCrossing;
  r.c = c;
  r.cap = cap;
  return r;
}

std::string StoppingRule::name() const {
  std::ostringstream os;
  if (kind == Kind::kFixed) {
    os << "fixed:" << n0;
  } else {
    os << "sqrt-crossing:" << c << ":" << cap;
  }
  return os.str();
}

std::vector<StoppingRule> stopping_battery() {
  return {StoppingRule::fixed(100), StoppingRule::fixed(1000), StoppingRule::fixed(10000),
          StoppingRule::sqrt_crossing(2.0, 10000)};
}

MeanEstimate estimate_eprocess_mean(const EProcessSchedule& schedule, const StoppingRule& stopping,
                                    const EProcessSimConfig& cfg) {
  validate(cfg.spec);
  if (cfg.reps < 1) domain("reps must be >= 1");
  if (schedule.thresholds.empty()) domain("schedule has no thresholds");
  std::vector<int> values(cfg.reps, 0);
  for_each_rep(cfg.reps, cfg.workers, [&](unsigned, std::uint64_t rep) {
    Sampler sampler(cfg.spec, cfg.seed, rep);
    EProcessState state = make_state(schedule);
    for (std::uint64_t k = 1; k <= stopping.cap; ++k) {
      update(schedule, state, sampler.next());
      if (stopping.kind == StoppingRule::Kind::kSqrtCrossing &&
          std::abs(state.trajectory.sum()) >= stopping.c * std::sqrt(static_cast<double>(k))) {
        break;
      }
    }
    values[rep] = state.value;
  });

  MeanEstimate est;
  est.reps = cfg.reps;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int v : values) {
    sum += v;
    sum_sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(cfg.reps);
  est.mean = sum / n;
  if (cfg.reps > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.se = std::sqrt(var / n);
  }
  return est;
}

// ---- iterated logarithm ratio ----------------------------------------------

double max_lil_ratio(std::span<const double> stream, std::uint64_t m, double sigma) {
  if (m < 3) domain("lil ratio needs m >= 3 so that loglog m > 0");
  if (!(sigma > 0.0)) domain("sigma must be positive");
  double s = 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    s += stream[i];
    const std::uint64_t n = i + 1;
    if (n < m) continue;
    const double nn = static_cast<double>(n);
    best = std::max(best, std::abs(s) / (sigma * std::sqrt(2.0 * nn * std::log(std::log(nn)))));
  }
  return best;
}

LilRatioSummary empirical_lil_ratio(const DistributionSpec& spec, std::uint64_t m,
                                    std::uint64_t horizon, std::uint64_t reps, std::uint64_t seed,
                                    unsigned workers) {
  if (m < 3) domain("lil ratio needs m >= 3 so that loglog m > 0");
  if (horizon < m) domain("horizon N must be >= m");
  if (reps < 1) domain("reps must be >= 1");
  const double sigma = std_dev(spec);
  LilRatioSummary out;
  out.per_rep_max.assign(reps, 0.0);
  std::vector<std::vector<double>> buffers(std::max(1u, workers));
  for_each_rep(reps, workers, [&](unsigned w, std::uint64_t rep) {
    auto& buf = buffers[w];
    buf.resize(horizon);
    Sampler sampler(spec, seed, rep);
    sampler.fill(buf);
    out.per_rep_max[rep] = max_lil_ratio(buf, m, sigma);
  });
  double sum = 0.0;
  for (double v : out.per_rep_max) sum += v;
  out.mean = sum / static_cast<double>(reps);
  double ss = 0.0;
  for (double v : out.per_rep_max) ss += (v - out.mean) * (v - out.mean);
  out.sd = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
  return out;
}

// ---- weighted-sum lemma ------------------------------------------------------

double weighted_sum_ratio(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) domain("a and b must be nonempty and equally long");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0)) domain("a must be strictly positive");
    if (i > 0 && a[i] < a[i - 1]) domain("a must be nondecreasing");
  }
  long double t = 0.0L;
  long double t_weighted = 0.0L;
  long double lhs = 0.0L;
  long double rhs_half = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    t += b[i];
    t_weighted += static_cast<long double>(b[i]) / a[i];
    lhs = std::max(lhs, std::abs(t) / a[i]);
    rhs_half = std::max(rhs_half, std::abs(t_weighted));
  }
  if (rhs_half == 0.0L) return 0.0;
  return static_cast<double>(lhs / (2.0L * rhs_half));
}

double verify_weighted_sum_lemma(std::uint64_t trials, std::uint64_t max_len, std::uint64_t seed) {
  if (trials < 1 || max_len < 1) domain("trials and max_len must be >= 1");
  double worst = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng(seed, trial);
    const std::uint64_t len = 1 + rng.next_u64() % max_len;
    // Log-normal increments with log-sd up to 6 put a_k across roughly twelve
    // orders of magnitude within one instance.
    const double log_sd = 6.0 * rng.uniform();
    const bool scale_b_by_a = rng.coin();
    a.resize(len);
    b.resize(len);
    double acc = 0.0;
    for (std::uint64_t i = 0; i < len; ++i) {
      acc += std::exp(log_sd * rng.normal());
      a[i] = acc;
      const double draw = rng.coin()
                              ? rng.normal()
                              : std::tan(std::numbers::pi * (rng.uniform_open() - 0.5));
      b[i] = scale_b_by_a ? draw * a[i] : draw;
    }
    for (std::uint64_t i = 0; i < len; ++i) {
      if (!(a[i] > 0.0) || (i > 0 && a[i] < a[i - 1])) {
        throw Error(Errc::kInternal, "weighted-sum generator produced an invalid sequence a");
      }
    }
    worst = std::max(worst, weighted_sum_ratio(a, b));
  }
  return worst;
}

// ---- Baum-Katz partial sums ---------------------------------------------------

BaumKatzEstimate baum_katz_partial_sum(const DistributionSpec& spec, double q, double eps,
                                       std::uint64_t M_max, std::uint64_t horizon,
                                       std::uint64_t reps, std::uint64_t seed, unsigned workers) {
  validate(spec);
  if (!(q >= 1.0 && q < 2.0)) domain("q out of range: need q in [1, 2)");
  if (!(eps > 0.0)) domain("eps must be positive");
  if (M_max < 1 || horizon < M_max) domain("need 1 <= M_max <= N");
  if (reps < 1) domain("reps must be >= 1");
  if (!has_finite_abs_moment(spec, q)) {
    throw Error(Errc::kHypothesisViolated, "E|X|^q log(...) is infinite for " + to_string(spec));
  }

  std::vector<double> threshold(horizon);
  for (std::uint64_t k = 1; k <= horizon; ++k) {
    threshold[k - 1] = eps * pow_exact(static_cast<double>(k), 1.0 / q);
  }
  workers = std::max(1u, workers);
  // last_hit[w][t]: replications whose last crossing time, capped at M_max, is t.
  std::vector<std::vector<std::uint64_t>> last_hit(workers,
                                                   std::vector<std::uint64_t>(M_max + 1, 0));
  for_each_rep(reps, workers, [&](unsigned w, std::uint64_t rep) {
    Sampler sampler(spec, seed, rep);
    double s = 0.0;
    std::uint64_t last = 0;
    for (std::uint64_t k = 1; k <= horizon; ++k) {
      s += sampler.next();
      if (std::abs(s) >= threshold[k - 1]) last = k;
    }
    ++last_hit[w][std::min(last, M_max)];
  });

  std::vector<std::uint64_t> total(M_max + 1, 0);
  for (const auto& t : last_hit) {
    for (std::uint64_t i = 0; i <= M_max; ++i) total[i] += t[i];
  }
  // The event for start index m holds iff the last crossing is at or after m.
  BaumKatzEstimate out;
  out.cumulative.resize(M_max);
  std::uint64_t at_least = 0;
  std::vector<std::uint64_t> count_from(M_max + 2, 0);
  for (std::uint64_t t = M_max; t >= 1; --t) {
    at_least += total[t];
    count_from[t] = at_least;
  }
  double acc = 0.0;
  for (std::uint64_t m = 1; m <= M_max; ++m) {
    acc += static_cast<double>(count_from[m]) / static_cast<double>(reps) /
           static_cast<double>(m);
    out.cumulative[m - 1] = acc;
  }
  out.partial_sum = acc;
  const double log_moment =
      trunc_moment(spec, TruncatedMomentKind::log_moment(q, eps), 0.0);
  out.analytic_bound = baum_katz_series_bound(q, eps, log_moment);
  return out;
}

}  // namespace uniconc
