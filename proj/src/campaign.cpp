#include "uniconc/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "uniconc/bounds.hpp"
#include "uniconc/error.hpp"
#include "uniconc/rng.hpp"

namespace uniconc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string threshold_text(const Threshold& t) {
  return t ? std::to_string(*t) : std::string("saturated");
}

}  // namespace

// ---- truncated moments ---------------------------------------------------------

std::vector<MomentCheck> run_moment_grid(int levels) {
  if (levels < 2) throw Error(Errc::kDomain, "levels must be >= 2");
  const std::vector<DistributionSpec> families = {
      DistributionSpec::two_point(1.0), DistributionSpec::gaussian(1.0),
      DistributionSpec::uniform(1.0), DistributionSpec::pareto(3.0)};
  const std::vector<TruncatedMomentKind> kinds = {
      TruncatedMomentKind::abs_q(1.0), TruncatedMomentKind::abs_q(1.5),
      TruncatedMomentKind::centered_square(), TruncatedMomentKind::normalized_square()};

  // Levels log-spaced over [1e-3, 1e2], which straddles every support edge
  // and breakpoint of the families above.
  std::vector<double> xs;
  for (int i = 0; i < levels; ++i) xs.push_back(std::pow(10.0, -3.0 + 5.0 * i / (levels - 1)));

  std::vector<MomentCheck> out;
  auto check = [&](const DistributionSpec& spec, const TruncatedMomentKind& kind) {
    for (double x : xs) {
      MomentCheck c{spec, kind, x};
      c.closed = trunc_moment(spec, kind, x);
      c.oracle = trunc_moment_quadrature_oracle(spec, kind, x);
      c.ok = std::abs(c.closed - c.oracle) <= kMomentTolerance;
      out.push_back(c);
    }
  };
  for (const auto& spec : families) {
    for (const auto& kind : kinds) check(spec, kind);
  }
  check(DistributionSpec::pareto(1.5), TruncatedMomentKind::abs_q(1.0));
  return out;
}

std::vector<Record> to_records(const std::vector<MomentCheck>& rows) {
  std::vector<Record> out;
  for (const auto& r : rows) {
    Record rec;
    rec.add("dist", to_string(r.spec))
        .add("kind", to_string(r.kind))
        .add("x", r.x)
        .add("closed_form", r.closed)
        .add("quadrature", r.oracle)
        .add("abs_diff", std::abs(r.closed - r.oracle))
        .add("ok", r.ok);
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- bound dominance -------------------------------------------------------------

std::vector<SimConfig> dominance_grid(std::uint64_t seed, unsigned workers, std::uint64_t reps) {
  const std::vector<DistributionSpec> families = {
      DistributionSpec::two_point(1.0), DistributionSpec::gaussian(1.0),
      DistributionSpec::uniform(1.0), DistributionSpec::pareto(1.5)};
  std::vector<SimConfig> grid;
  for (const auto& spec : families) {
    const bool finite_variance = has_finite_abs_moment(spec, 2.0);
    for (std::uint64_t m : {100u, 1000u, 10000u}) {
      auto cell = [&](Inequality ineq, double q, double eps) {
        SimConfig c;
        c.spec = spec;
        c.inequality = ineq;
        c.q = q;
        c.eps = eps;
        c.m = m;
        c.horizon = 10 * m;
        c.reps = reps;
        c.seed = seed;
        c.workers = workers;
        grid.push_back(c);
      };
      for (double eps : {0.1, 0.5}) cell(Inequality::kL1, 1.0, eps);
      for (double eps : {0.1, 0.5}) cell(Inequality::kLq, 1.0, eps);
      if (has_finite_abs_moment(spec, 1.5)) {
        for (double eps : {0.1, 0.5}) cell(Inequality::kLq, 1.5, eps);
      }
      if (finite_variance) {
        cell(Inequality::kLil, 1.0, 1.0);
        cell(Inequality::kStudentizedLil, 1.0, 1.0);
      }
      if (spec.family == Family::kGaussian) cell(Inequality::kDarlingRobbins, 1.0, 0.5);
    }
  }
  return grid;
}

std::vector<DominanceRow> run_dominance(const std::vector<SimConfig>& grid) {
  std::vector<DominanceRow> rows(grid.size());
  // Group cell indices by distribution, preserving first-appearance order.
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto it = std::find_if(batches.begin(), batches.end(), [&](const auto& b) {
      const SimConfig& h = grid[b.front()];
      return h.spec == grid[i].spec && h.seed == grid[i].seed && h.reps == grid[i].reps &&
             h.workers == grid[i].workers;
    });
    if (it == batches.end()) {
      batches.push_back({i});
    } else {
      it->push_back(i);
    }
  }
  for (const auto& batch : batches) {
    std::vector<SimConfig> cells;
    for (std::size_t i : batch) cells.push_back(grid[i]);
    const auto start = std::chrono::steady_clock::now();
    const auto estimates = estimate_crossings(cells);
    const double elapsed = seconds_since(start);
    for (std::size_t k = 0; k < batch.size(); ++k) {
      rows[batch[k]] = {grid[batch[k]], estimates[k], elapsed};
    }
  }
  return rows;
}

bool all_dominated(const std::vector<DominanceRow>& rows) {
  return std::all_of(rows.begin(), rows.end(),
                     [](const DominanceRow& r) { return r.estimate.dominated(); });
}

Record dominance_record(const SimConfig& cfg, const CrossingEstimate& est) {
  Record rec;
  rec.add("dist", to_string(cfg.spec))
      .add("ineq", to_string(cfg.inequality))
      .add("q", cfg.q)
      .add("eps", cfg.eps)
      .add("lambda", resolved_lambda(cfg))
      .add("sigma_bar", resolved_sigma_bar(cfg))
      .add("m", cfg.m)
      .add("N", cfg.horizon)
      .add("reps", cfg.reps)
      .add("seed", cfg.seed)
      .add("crossings", est.crossings)
      .add("phat", est.phat)
      .add("wilson_lo", est.wilson.lo)
      .add("wilson_hi", est.wilson.hi)
      .add("half_width", est.half_width())
      .add("bound_raw", est.analytic_bound.raw)
      .add("bound_clamped", est.analytic_bound.clamped)
      .add("dominated", est.dominated());
  return rec;
}

std::vector<Record> to_records(const std::vector<DominanceRow>& rows, bool timing) {
  std::vector<Record> out;
  for (const auto& r : rows) {
    Record rec = dominance_record(r.cfg, r.estimate);
    if (timing) rec.add("batch_runtime_s", r.batch_seconds);
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- e-process validity ------------------------------------------------------------

std::vector<EProcessBuilder> eprocess_builders(int J) {
  std::vector<EProcessBuilder> out;
  const auto coin = DistributionSpec::two_point(1.0);
  const auto normal = DistributionSpec::gaussian(1.0);
  out.push_back({"slln-q1", coin, build_slln_eprocess(1.0, coin, J)});
  out.push_back({"slln-q1.5", normal, build_slln_eprocess(1.5, normal, J)});
  out.push_back({"lil", normal, build_lil_eprocess(normal, 1.0, J)});
  out.push_back(
      {"scale-invariant", DistributionSpec::two_point(3.0), build_scale_invariant_eprocess(J)});
  return out;
}

std::vector<EProcessRow> run_eprocess_battery(const std::vector<EProcessBuilder>& builders,
                                              std::uint64_t reps, std::uint64_t seed,
                                              unsigned workers) {
  std::vector<EProcessRow> rows;
  for (const auto& b : builders) {
    Threshold min_t;
    for (const auto& t : b.schedule.thresholds) {
      if (t && (!min_t || *t < *min_t)) min_t = t;
    }
    for (const auto& rule : stopping_battery()) {
      EProcessRow row;
      row.builder = b.name;
      row.spec = b.sample_spec;
      row.rule = rule;
      row.finite_thresholds = b.schedule.finite_count();
      row.min_threshold = min_t;
      row.seed = seed;
      row.estimate = estimate_eprocess_mean(b.schedule, rule, {b.sample_spec, reps, seed, workers});
      row.ok = row.estimate.mean <= 1.0 + 3.0 * row.estimate.se;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<Record> to_records(const std::vector<EProcessRow>& rows) {
  std::vector<Record> out;
  for (const auto& r : rows) {
    Record rec;
    rec.add("builder", r.builder)
        .add("dist", to_string(r.spec))
        .add("stopping", r.rule.name())
        .add("finite_thresholds", r.finite_thresholds)
        .add("min_threshold", threshold_text(r.min_threshold))
        .add("reps", r.estimate.reps)
        .add("seed", r.seed)
        .add("mean", r.estimate.mean)
        .add("se", r.estimate.se)
        .add("limit", 1.0 + 3.0 * r.estimate.se)
        .add("ok", r.ok);
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- threshold minimality ------------------------------------------------------------

std::vector<ThresholdCheck> check_threshold_minimality(
    const std::vector<EProcessBuilder>& builders) {
  std::vector<ThresholdCheck> out;
  for (const auto& b : builders) {
    const BoundFunction& B = b.schedule.bound;
    for (int j = 1; j <= b.schedule.J(); ++j) {
      ThresholdCheck c;
      c.builder = b.name;
      c.j = j;
      c.mj = b.schedule.thresholds[j - 1];
      const double eps = 1.0 / j;
      const double target = std::ldexp(1.0, -j);
      if (!c.mj) {
        // Saturated: the bound must still exceed the target at the search cap.
        c.bound_at = B(kDefaultSearchCap, eps);
        c.bound_prev = c.bound_at;
        c.ok = c.bound_at > target;
      } else {
        c.bound_at = B(*c.mj, eps);
        c.bound_prev = *c.mj > B.domain_min() ? B(*c.mj - 1, eps) : kInf;
        c.ok = c.bound_at <= target && target < c.bound_prev;
      }
      out.push_back(c);
    }
  }
  return out;
}

std::vector<Record> to_records(const std::vector<ThresholdCheck>& rows) {
  std::vector<Record> out;
  for (const auto& r : rows) {
    Record rec;
    rec.add("builder", r.builder)
        .add("j", r.j)
        .add("m_j", threshold_text(r.mj))
        .add("target", std::ldexp(1.0, -r.j))
        .add("bound_at_m_j", r.bound_at)
        .add("bound_at_m_j_minus_1", r.bound_prev)
        .add("ok", r.ok);
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- monotonicity ------------------------------------------------------------------

namespace {

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

std::uint64_t random_index(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return static_cast<std::uint64_t>(
      std::llround(log_uniform(rng, static_cast<double>(lo), static_cast<double>(hi))));
}

// Random family whose absolute moment of order `order` is finite.
DistributionSpec random_spec(Rng& rng, double order) {
  const double scale = log_uniform(rng, 0.1, 10.0);
  switch (rng.next_u64() % 4) {
    case 0: return DistributionSpec::two_point(scale);
    case 1: return DistributionSpec::gaussian(scale);
    case 2: return DistributionSpec::uniform(scale);
    default: return DistributionSpec::pareto(order + 0.1 + 4.0 * rng.uniform());
  }
}

bool not_above(double later, double earlier) {
  if (std::isinf(earlier) && earlier > 0) return true;
  return later <= earlier + 1e-12 * std::abs(earlier);
}

struct Tally {
  MonotonicityResult result;
  void record(bool ok, const std::string& detail) {
    ++result.draws;
    if (!ok) {
      ++result.violations;
      if (result.first_violation.empty()) result.first_violation = detail;
    }
  }
};

}  // namespace

std::vector<MonotonicityResult> run_monotonicity_suite(std::uint64_t draws, std::uint64_t seed) {
  std::vector<MonotonicityResult> out;
  std::uint64_t stream = 0;

  auto bound_check = [&](const std::string& name, double min_m, auto&& eval_pair) {
    Tally t;
    t.result.property = name + " nonincreasing in m";
    for (std::uint64_t d = 0; d < draws; ++d) {
      Rng rng(seed, stream++);
      std::uint64_t m1 = random_index(rng, static_cast<std::uint64_t>(min_m), 1000000000);
      std::uint64_t m2 = random_index(rng, static_cast<std::uint64_t>(min_m), 1000000000);
      if (m1 > m2) std::swap(m1, m2);
      const auto [b1, b2, label] = eval_pair(rng, m1, m2);
      std::ostringstream os;
      os << label << " m1=" << m1 << " m2=" << m2 << " B1=" << b1 << " B2=" << b2;
      t.record(not_above(b2, b1), os.str());
    }
    out.push_back(t.result);
  };

  using Triple = std::tuple<double, double, std::string>;

  bound_check("l1_bound", 1, [](Rng& rng, std::uint64_t m1, std::uint64_t m2) {
    const auto spec = random_spec(rng, 1.0);
    const double eps = log_uniform(rng, 0.01, 2.0);
    const double lambda = 0.01 + 0.48 * rng.uniform();
    auto U = truncated_moment_fn(spec, TruncatedMomentKind::abs_q(1.0));
    return Triple{l1_bound({m1, eps, lambda}, U).raw, l1_bound({m2, eps, lambda}, U).raw,
                  to_string(spec)};
  });
  bound_check("lq_bound", 1, [](Rng& rng, std::uint64_t m1, std::uint64_t m2) {
    const double q = 1.0 + 0.99 * rng.uniform();
    const auto spec = random_spec(rng, q);
    const double eps = log_uniform(rng, 0.01, 2.0);
    auto U = truncated_moment_fn(spec, TruncatedMomentKind::abs_q(q));
    return Triple{lq_bound({m1, eps, q}, U).raw, lq_bound({m2, eps, q}, U).raw,
                  to_string(spec)};
  });
  bound_check("lil_bound", 2, [](Rng& rng, std::uint64_t m1, std::uint64_t m2) {
    const auto spec = random_spec(rng, 2.0);
    const double eps = log_uniform(rng, 0.01, 2.0);
    const double lambda = 0.01 + 0.48 * rng.uniform();
    const double sp = std_dev(spec);
    const double sbar = sp * (1.0 + rng.uniform());
    auto U = truncated_moment_fn(spec, TruncatedMomentKind::centered_square());
    return Triple{lil_bound({m1, eps, lambda, sbar, sp}, U).raw,
                  lil_bound({m2, eps, lambda, sbar, sp}, U).raw, to_string(spec)};
  });
  bound_check("studentized_lil_bound", 2, [](Rng& rng, std::uint64_t m1, std::uint64_t m2) {
    const auto spec = random_spec(rng, 2.0);
    const double eps = log_uniform(rng, 0.01, 2.0);
    const double lambda = 0.01 + 0.48 * rng.uniform();
    const double sp = std_dev(spec);
    auto U = truncated_moment_fn(spec, TruncatedMomentKind::normalized_square());
    return Triple{studentized_lil_bound({m1, eps, lambda, sp, sp}, U).raw,
                  studentized_lil_bound({m2, eps, lambda, sp, sp}, U).raw, to_string(spec)};
  });
  bound_check("darling_robbins_bound", 2, [](Rng& rng, std::uint64_t m1, std::uint64_t m2) {
    const double eps = log_uniform(rng, 0.01, 2.0);
    return Triple{darling_robbins_bound(m1, eps).raw, darling_robbins_bound(m2, eps).raw,
                  "eps=" + std::to_string(eps)};
  });

  {
    Tally t;
    t.result.property = "truncated moments nonincreasing in x";
    for (std::uint64_t d = 0; d < draws; ++d) {
      Rng rng(seed, stream++);
      TruncatedMomentKind kind;
      double order = 2.0;
      switch (rng.next_u64() % 3) {
        case 0:
          kind = TruncatedMomentKind::abs_q(1.0 + rng.uniform());
          order = kind.q;
          break;
        case 1: kind = TruncatedMomentKind::centered_square(); break;
        default: kind = TruncatedMomentKind::normalized_square(); break;
      }
      const auto spec = random_spec(rng, order);
      double x1 = log_uniform(rng, 1e-4, 1e3);
      double x2 = log_uniform(rng, 1e-4, 1e3);
      if (x1 > x2) std::swap(x1, x2);
      const double u1 = trunc_moment(spec, kind, x1);
      const double u2 = trunc_moment(spec, kind, x2);
      std::ostringstream os;
      os << to_string(spec) << " " << to_string(kind) << " x1=" << x1 << " x2=" << x2;
      t.record(not_above(u2, u1) && u2 >= 0.0, os.str());
    }
    out.push_back(t.result);
  }

  {
    Tally t;
    t.result.property = "e-process values nondecreasing in n";
    for (std::uint64_t d = 0; d < draws; ++d) {
      Rng rng(seed, stream++);
      const double q = 1.0 + 0.99 * rng.uniform();
      // Small thresholds so that latches actually fire within the stream.
      std::vector<Threshold> thresholds;
      for (int j = 1; j <= kDefaultJ; ++j) {
        if (rng.uniform() < 0.2) {
          thresholds.push_back(std::nullopt);
        } else {
          thresholds.push_back(1 + rng.next_u64() % 200);
        }
      }
      const auto schedule = make_slln_schedule(q, thresholds);
      const auto spec = random_spec(rng, q);
      Sampler sampler(spec, seed, stream++);
      EProcessState state = make_state(schedule);
      int prev = 0;
      bool ok = true;
      for (int n = 0; n < 300; ++n) {
        update(schedule, state, sampler.next());
        if (state.value < prev || state.value > schedule.J()) ok = false;
        prev = state.value;
      }
      t.record(ok, to_string(spec) + " q=" + std::to_string(q));
    }
    out.push_back(t.result);
  }
  return out;
}

std::vector<Record> to_records(const std::vector<MonotonicityResult>& rows) {
  std::vector<Record> out;
  for (const auto& r : rows) {
    Record rec;
    rec.add("property", r.property)
        .add("draws", r.draws)
        .add("violations", r.violations)
        .add("first_violation", r.first_violation)
        .add("ok", r.violations == 0);
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- single-record checks ------------------------------------------------------------

Record lemma_record(std::uint64_t trials, std::uint64_t max_len, std::uint64_t seed,
                    double worst) {
  Record rec;
  rec.add("trials", trials)
      .add("max_len", max_len)
      .add("seed", seed)
      .add("worst_ratio", worst)
      .add("ok", worst <= 1.0);
  return rec;
}

Record baum_katz_record(const DistributionSpec& spec, double q, double eps, std::uint64_t M_max,
                        std::uint64_t horizon, std::uint64_t reps, std::uint64_t seed,
                        const BaumKatzEstimate& est) {
  Record rec;
  rec.add("dist", to_string(spec))
      .add("q", q)
      .add("eps", eps)
      .add("M_max", M_max)
      .add("N", horizon)
      .add("reps", reps)
      .add("seed", seed)
      .add("partial_sum", est.partial_sum)
      .add("bound_raw", est.analytic_bound.raw)
      .add("ok", est.partial_sum <= est.analytic_bound.raw);
  return rec;
}

Record lil_ratio_record(const DistributionSpec& spec, std::uint64_t m, std::uint64_t horizon,
                        std::uint64_t reps, std::uint64_t seed, const LilRatioSummary& s) {
  Record rec;
  rec.add("dist", to_string(spec))
      .add("m", m)
      .add("N", horizon)
      .add("reps", reps)
      .add("seed", seed)
      .add("mean_max_ratio", s.mean)
      .add("sd_max_ratio", s.sd)
      .add("band_lo", kLilRatioLo)
      .add("band_hi", kLilRatioHi)
      .add("ok", s.mean >= kLilRatioLo && s.mean <= kLilRatioHi);
  return rec;
}

}  // namespace uniconc
