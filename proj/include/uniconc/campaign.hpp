#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uniconc/distributions.hpp"
#include "uniconc/eprocess.hpp"
#include "uniconc/records.hpp"
#include "uniconc/simulate.hpp"

namespace uniconc {

// Fixed verification grids and the checks run on them. Each runner returns
// typed rows plus a pass flag; to_records turns rows into output records.

// ---- truncated moments: closed form vs quadrature ----------------------------

struct MomentCheck {
  DistributionSpec spec;
  TruncatedMomentKind kind;
  double x = 0.0;
  double closed = 0.0;
  double oracle = 0.0;
  bool ok = false;
};

inline constexpr double kMomentTolerance = 1e-8;

// Families {two-point:1, gaussian:1, uniform:1, pareto:3} x {AbsQ(1), AbsQ(1.5),
// CenteredSquare, NormalizedSquare} x `levels` truncation levels, plus
// AbsQ(1) on pareto:1.5.
std::vector<MomentCheck> run_moment_grid(int levels = 50);
std::vector<Record> to_records(const std::vector<MomentCheck>& rows);

// ---- bound dominance ---------------------------------------------------------

struct DominanceRow {
  SimConfig cfg;
  CrossingEstimate estimate;
  double batch_seconds = 0.0;  // wall time of the shared batch this cell ran in
};

// {two-point:1, gaussian:1, uniform:1, pareto:1.5} x m in {1e2, 1e3, 1e4},
// N = 10 m, with l1 and lq(1) at eps in {0.1, 0.5}; lq(1.5) at eps in
// {0.1, 0.5}, lil(eps=1) and studentized-lil(eps=1) where the variance is
// finite; darling-robbins(eps=0.5) on gaussian:1.
std::vector<SimConfig> dominance_grid(std::uint64_t seed, unsigned workers,
                                      std::uint64_t reps = 10000);

// Runs cells grouped into shared batches per distribution; rows keep grid order.
std::vector<DominanceRow> run_dominance(const std::vector<SimConfig>& grid);
bool all_dominated(const std::vector<DominanceRow>& rows);
std::vector<Record> to_records(const std::vector<DominanceRow>& rows, bool timing);

// One simulated cell as a record (shared by `simulate` and the grid output).
Record dominance_record(const SimConfig& cfg, const CrossingEstimate& est);

// ---- e-process validity ------------------------------------------------------

struct EProcessBuilder {
  std::string name;
  DistributionSpec sample_spec;  // law the replications are drawn from
  EProcessSchedule schedule;
};

// SllnQ(1) on two-point:1, SllnQ(1.5) on gaussian:1, Lil on gaussian:1 with
// sigma_P = 1, ScaleInvariant on two-point:3.
std::vector<EProcessBuilder> eprocess_builders(int J = kDefaultJ);

struct EProcessRow {
  std::string builder;
  DistributionSpec spec;
  StoppingRule rule;
  int finite_thresholds = 0;
  Threshold min_threshold;
  std::uint64_t seed = 0;
  MeanEstimate estimate;
  bool ok = false;  // mean <= 1 + 3 se
};

std::vector<EProcessRow> run_eprocess_battery(const std::vector<EProcessBuilder>& builders,
                                              std::uint64_t reps, std::uint64_t seed,
                                              unsigned workers);
std::vector<Record> to_records(const std::vector<EProcessRow>& rows);

// ---- threshold minimality ----------------------------------------------------

struct ThresholdCheck {
  std::string builder;
  int j = 0;
  Threshold mj;
  double bound_at = 0.0;    // B(m_j, 1/j)
  double bound_prev = 0.0;  // B(m_j - 1, 1/j); +inf when m_j is the domain minimum
  bool ok = false;
};

std::vector<ThresholdCheck> check_threshold_minimality(
    const std::vector<EProcessBuilder>& builders);
std::vector<Record> to_records(const std::vector<ThresholdCheck>& rows);

// ---- monotonicity ------------------------------------------------------------

struct MonotonicityResult {
  std::string property;
  std::uint64_t draws = 0;
  std::uint64_t violations = 0;
  std::string first_violation;  // empty when none
};

// Tail bounds nonincreasing in m (five families of bounds), truncated moments
// nonincreasing in x, and e-process values nondecreasing in n.
std::vector<MonotonicityResult> run_monotonicity_suite(std::uint64_t draws, std::uint64_t seed);
std::vector<Record> to_records(const std::vector<MonotonicityResult>& rows);

// ---- remaining checks as single records ----------------------------------------

Record lemma_record(std::uint64_t trials, std::uint64_t max_len, std::uint64_t seed,
                    double worst);
Record baum_katz_record(const DistributionSpec& spec, double q, double eps, std::uint64_t M_max,
                        std::uint64_t horizon, std::uint64_t reps, std::uint64_t seed,
                        const BaumKatzEstimate& est);
Record lil_ratio_record(const DistributionSpec& spec, std::uint64_t m, std::uint64_t horizon,
                        std::uint64_t reps, std::uint64_t seed, const LilRatioSummary& s);

inline constexpr double kLilRatioLo = 0.5;
inline constexpr double kLilRatioHi = 1.3;

}  // namespace uniconc
