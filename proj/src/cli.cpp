#include "uniconc/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "uniconc/bounds.hpp"
#include "uniconc/campaign.hpp"
#include "uniconc/distributions.hpp"
#include "uniconc/eprocess.hpp"
#include "uniconc/error.hpp"
#include "uniconc/records.hpp"
#include "uniconc/simulate.hpp"

namespace uniconc::cli {

namespace {

// Records produced by a command, and whether a checked property failed.
struct Outcome {
  std::vector<Record> rows;
  bool violation = false;
};

[[noreturn]] void usage(const std::string& what) { throw Error(Errc::kDomain, what); }

struct Common {
  std::string format = "csv";
  std::string output;
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();
  sub->add_option("--output", c.output, "Write records to this file instead of stdout");
  sub->add_option("--config", c.config,
                  "JSON object whose keys mirror this command's flag names; flags override it");
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string components_text(const BoundValue& b) {
  std::string s;
  for (const auto& c : b.components) {
    if (!s.empty()) s += ';';
    s += c.label + "=" + format_double(c.value);
  }
  return s;
}

// ---- bound ---------------------------------------------------------------

struct BoundArgs {
  std::string ineq;
  std::string dist;
  std::uint64_t m = 100;
  double eps = 0.5;
  std::optional<double> lambda;
  double q = 1.0;
  double sigma_bar = 0.0;
  double gamma = 1.0;
  double x = 1.0;
  double delta = 1.0;
  double tol = 1e-6;
};

Outcome run_bound(const BoundArgs& a) {
  auto need_dist = [&]() {
    if (a.dist.empty()) usage("--dist is required for --ineq " + a.ineq);
    return parse_distribution(a.dist);
  };
  Record rec;
  rec.add("ineq", a.ineq);
  BoundValue b;
  if (a.ineq == "l1") {
    const auto spec = need_dist();
    const double lambda = a.lambda.value_or(kDefaultL1Lambda);
    b = l1_bound({a.m, a.eps, lambda}, truncated_moment_fn(spec, TruncatedMomentKind::abs_q(1)));
    rec.add("dist", to_string(spec)).add("m", a.m).add("eps", a.eps).add("lambda", lambda);
  } else if (a.ineq == "lq") {
    const auto spec = need_dist();
    b = lq_bound({a.m, a.eps, a.q}, truncated_moment_fn(spec, TruncatedMomentKind::abs_q(a.q)));
    rec.add("dist", to_string(spec)).add("m", a.m).add("eps", a.eps).add("q", a.q);
  } else if (a.ineq == "lil" || a.ineq == "lil-eprocess" || a.ineq == "studentized-lil") {
    const auto spec = need_dist();
    const double lambda = a.lambda.value_or(kDefaultLilLambda);
    const double sp = std_dev(spec);
    const double sbar = a.sigma_bar > 0.0 ? a.sigma_bar : sp;
    if (a.ineq == "studentized-lil") {
      b = studentized_lil_bound({a.m, a.eps, lambda, sp, sp},
                                truncated_moment_fn(spec, TruncatedMomentKind::normalized_square()));
    } else {
      const LilParams p{a.m, a.eps, lambda, sbar, sp};
      auto U = truncated_moment_fn(spec, TruncatedMomentKind::centered_square());
      b = a.ineq == "lil" ? lil_bound(p, U) : lil_eprocess_bound(p, U);
    }
    rec.add("dist", to_string(spec)).add("m", a.m).add("eps", a.eps).add("lambda", lambda);
    rec.add("sigma_bar", a.ineq == "studentized-lil" ? sp : sbar);
  } else if (a.ineq == "darling-robbins") {
    b = darling_robbins_bound(a.m, a.eps);
    rec.add("m", a.m).add("eps", a.eps);
  } else if (a.ineq == "line-crossing") {
    const auto spec = need_dist();
    b = line_crossing_bound(a.eps, a.gamma, a.x,
                            truncated_moment_fn(spec, TruncatedMomentKind::abs_q(1)));
    rec.add("dist", to_string(spec)).add("eps", a.eps).add("gamma", a.gamma).add("x", a.x);
  } else if (a.ineq == "baum-katz") {
    const auto spec = need_dist();
    const double L = trunc_moment(spec, TruncatedMomentKind::log_moment(a.q, a.eps), 0.0);
    b = baum_katz_series_bound(a.q, a.eps, L);
    rec.add("dist", to_string(spec)).add("q", a.q).add("eps", a.eps).add("log_moment", L);
  } else if (a.ineq == "baum-katz-lil") {
    const auto spec = need_dist();
    const double L = trunc_moment(spec, TruncatedMomentKind::log_delta_moment(a.delta), 0.0);
    b = baum_katz_lil_series_bound(a.eps, a.delta, L, a.tol);
    rec.add("dist", to_string(spec)).add("eps", a.eps).add("delta", a.delta).add("log_moment", L);
  }
  rec.add("raw", b.raw).add("clamped", b.clamped).add("abs_error", b.abs_error);
  rec.add("components", components_text(b));
  return {{rec}, false};
}

// ---- moment --------------------------------------------------------------

struct MomentArgs {
  std::string dist;
  std::string kind;
  double q = 1.0;
  double eps = 1.0;
  double delta = 1.0;
  std::vector<double> x{0.0};
  bool oracle = false;
};

TruncatedMomentKind moment_kind(const MomentArgs& a) {
  if (a.kind == "abs-q") return TruncatedMomentKind::abs_q(a.q);
  if (a.kind == "centered-square") return TruncatedMomentKind::centered_square();
  if (a.kind == "normalized-square") return TruncatedMomentKind::normalized_square();
  if (a.kind == "log-moment") return TruncatedMomentKind::log_moment(a.q, a.eps);
  return TruncatedMomentKind::log_delta_moment(a.delta);
}

Outcome run_moment(const MomentArgs& a) {
  const auto spec = parse_distribution(a.dist);
  const auto kind = moment_kind(a);
  for (double x : a.x) {
    if (!(x >= 0.0)) usage("--x: truncation level must be >= 0");
  }
  require_finite(spec, kind);
  Outcome o;
  for (double x : a.x) {
    Record rec;
    rec.add("dist", to_string(spec)).add("kind", to_string(kind)).add("x", x);
    rec.add("value", trunc_moment(spec, kind, x));
    if (a.oracle) rec.add("quadrature", trunc_moment_quadrature_oracle(spec, kind, x));
    o.rows.push_back(std::move(rec));
  }
  return o;
}

// ---- mj and eprocess-run ------------------------------------------------------

struct ScheduleArgs {
  std::string kind;
  std::string dist;
  double q = 1.0;
  double sigma_p = 0.0;
  int J = kDefaultJ;
  std::uint64_t search_cap = kDefaultSearchCap;
};

EProcessSchedule build_schedule(const ScheduleArgs& a, int J) {
  if (a.kind == "scale-invariant") return build_scale_invariant_eprocess(J, a.search_cap);
  if (a.dist.empty()) usage("--dist is required for --kind " + a.kind);
  const auto spec = parse_distribution(a.dist);
  if (a.kind == "slln") return build_slln_eprocess(a.q, spec, J, a.search_cap);
  const double sp = a.sigma_p > 0.0 ? a.sigma_p : std_dev(spec);
  return build_lil_eprocess(spec, sp, J, a.search_cap);
}

struct MjArgs {
  ScheduleArgs schedule;
  int j = 0;
};

Outcome run_mj(const MjArgs& a) {
  const int J = a.j > 0 ? a.j : a.schedule.J;
  const auto s = build_schedule(a.schedule, J);
  Outcome o;
  const int first = a.j > 0 ? a.j : 1;
  for (int j = first; j <= J; ++j) {
    const Threshold& t = s.thresholds[j - 1];
    Record rec;
    rec.add("kind", a.schedule.kind).add("j", j);
    rec.add("m_j", t ? std::to_string(*t) : std::string("saturated"));
    o.rows.push_back(std::move(rec));
  }
  return o;
}

struct RunArgs {
  ScheduleArgs schedule;
  std::uint64_t n = 1000;
  std::optional<std::uint64_t> seed;
  std::string input;
  std::uint64_t every = 0;
};

std::vector<double> read_stream(const std::string& path) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (path != "-") {
    file.open(path);
    if (!file) usage("--input: cannot open '" + path + "'");
    in = &file;
  }
  std::vector<double> xs;
  std::string token;
  while (*in >> token) {
    try {
      std::size_t used = 0;
      xs.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      usage("--input: not a number: '" + token + "'");
    }
  }
  return xs;
}

Outcome run_eprocess(const RunArgs& a) {
  std::vector<double> xs;
  if (!a.input.empty()) {
    xs = read_stream(a.input);
  } else {
    if (!a.seed) usage("--seed is required when the stream is simulated (no --input)");
    if (a.schedule.dist.empty()) usage("--dist is required when the stream is simulated");
    xs.resize(a.n);
    Sampler sampler(parse_distribution(a.schedule.dist), *a.seed, 0);
    sampler.fill(xs);
  }
  const auto s = build_schedule(a.schedule, a.schedule.J);
  EProcessState state = make_state(s);
  Outcome o;
  int last_value = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    update(s, state, xs[i]);
    const bool final_step = i + 1 == xs.size();
    const bool changed = state.value != last_value;
    const bool periodic = a.every > 0 && state.n % a.every == 0;
    if (changed || periodic || final_step) {
      Record rec;
      rec.add("n", state.n).add("S_n", state.trajectory.sum()).add("value", state.value);
      o.rows.push_back(std::move(rec));
    }
    last_value = state.value;
  }
  return o;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::string ineq;
  std::string dist;
  std::uint64_t m = 100;
  std::uint64_t N = 1000;
  double eps = 0.5;
  double q = 1.0;
  double lambda = 0.0;
  double sigma_bar = 0.0;
  std::uint64_t reps = 10000;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  bool timing = false;
};

Outcome run_simulate(const SimulateArgs& a) {
  if (!a.seed) usage("--seed is required for simulate");
  SimConfig cfg;
  cfg.spec = parse_distribution(a.dist);
  cfg.inequality = parse_inequality(a.ineq);
  cfg.q = a.q;
  cfg.eps = a.eps;
  cfg.lambda = a.lambda;
  cfg.sigma_bar = a.sigma_bar;
  cfg.m = a.m;
  cfg.horizon = a.N;
  cfg.reps = a.reps;
  cfg.seed = *a.seed;
  cfg.workers = a.workers;
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto est = estimate_crossing(cfg);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Record rec = dominance_record(cfg, est);
  if (a.timing) rec.add("runtime_s", elapsed);
  return {{rec}, !est.dominated()};
}

// ---- verify and table -------------------------------------------------------

struct SuiteArgs {
  std::string name;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> reps;
  std::uint64_t trials = 100000;
  std::uint64_t max_len = 1000;
  std::uint64_t draws = 1000;
  unsigned workers = 1;
  bool timing = false;
};

std::uint64_t need_seed(const SuiteArgs& a) {
  if (!a.seed) usage("--seed is required for " + a.name);
  return *a.seed;
}

template <class Rows>
bool all_ok(const Rows& rows) {
  for (const auto& r : rows) {
    if (!r.ok) return false;
  }
  return true;
}

Outcome run_suite(const SuiteArgs& a) {
  if (a.name == "moments") {
    const auto rows = run_moment_grid();
    return {to_records(rows), !all_ok(rows)};
  }
  if (a.name == "dominance") {
    const auto seed = need_seed(a);
    const auto rows = run_dominance(dominance_grid(seed, a.workers, a.reps.value_or(10000)));
    return {to_records(rows, a.timing), !all_dominated(rows)};
  }
  if (a.name == "eprocess") {
    const auto seed = need_seed(a);
    const auto rows =
        run_eprocess_battery(eprocess_builders(), a.reps.value_or(10000), seed, a.workers);
    return {to_records(rows), !all_ok(rows)};
  }
  if (a.name == "thresholds") {
    const auto rows = check_threshold_minimality(eprocess_builders());
    return {to_records(rows), !all_ok(rows)};
  }
  if (a.name == "lemma") {
    const auto seed = need_seed(a);
    const double worst = verify_weighted_sum_lemma(a.trials, a.max_len, seed);
    return {{lemma_record(a.trials, a.max_len, seed, worst)}, worst > 1.0};
  }
  if (a.name == "baum-katz") {
    const auto seed = need_seed(a);
    const auto spec = DistributionSpec::two_point(1.0);
    const std::uint64_t reps = a.reps.value_or(1000);
    const auto est = baum_katz_partial_sum(spec, 1.0, 0.5, 1000, 10000, reps, seed, a.workers);
    return {{baum_katz_record(spec, 1.0, 0.5, 1000, 10000, reps, seed, est)},
            est.partial_sum > est.analytic_bound.raw};
  }
  if (a.name == "monotonicity") {
    const auto seed = need_seed(a);
    const auto rows = run_monotonicity_suite(a.draws, seed);
    bool bad = false;
    for (const auto& r : rows) bad = bad || r.violations > 0;
    return {to_records(rows), bad};
  }
  // lil-ratio
  const auto seed = need_seed(a);
  const auto spec = DistributionSpec::gaussian(1.0);
  const std::uint64_t reps = a.reps.value_or(100);
  const auto s = empirical_lil_ratio(spec, 1000, 1000000, reps, seed, a.workers);
  return {{lil_ratio_record(spec, 1000, 1000000, reps, seed, s)},
          s.mean < kLilRatioLo || s.mean > kLilRatioHi};
}

// ---- config file ------------------------------------------------------------

std::string json_scalar_text(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  usage("config key '" + key + "': expected a string, number or boolean");
}

// Expands --config into flag tokens placed directly after the subcommand so
// that flags given on the command line take precedence.
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args) {
  std::string path;
  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (sub_pos == args.size() && !args[i].empty() && args[i][0] != '-') sub_pos = i;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || sub_pos == args.size()) return args;

  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[sub_pos]);
  } catch (const CLI::OptionNotFound&) {
    return args;  // the parser reports the unknown command
  }
  std::ifstream in(path);
  if (!in) usage("--config: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    usage("--config: invalid JSON in '" + path + "': " + e.what());
  }
  if (!doc.is_object()) usage("--config: top level must be a JSON object");

  std::vector<std::string> injected;
  for (const auto& [key, value] : doc.items()) {
    const CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      usage("--config: unknown key '" + key + "' for command '" + sub->get_name() + "'");
    }
    if (value.is_boolean()) {
      if (opt->get_expected_min() != 0) usage("config key '" + key + "' expects a value");
      if (value.get<bool>()) injected.push_back("--" + key);
    } else if (value.is_array()) {
      for (const auto& item : value) {
        injected.push_back("--" + key);
        injected.push_back(json_scalar_text(key, item));
      }
    } else {
      injected.push_back("--" + key);
      injected.push_back(json_scalar_text(key, value));
    }
  }
  std::vector<std::string> out(args.begin(), args.begin() + sub_pos + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + sub_pos + 1, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-uniform concentration bounds, e-process thresholds and Monte Carlo checks",
               "uniconc"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  const auto positive = CLI::PositiveNumber;
  const auto nonneg = CLI::NonNegativeNumber;

  Common common;
  std::function<Outcome()> body;

  // bound
  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "Evaluate a tail bound");
  bound->add_option("--ineq", ba.ineq, "Inequality")
      ->required()
      ->check(CLI::IsMember({"l1", "lq", "lil", "lil-eprocess", "studentized-lil",
                             "darling-robbins", "line-crossing", "baum-katz", "baum-katz-lil"}));
  bound->add_option("--dist", ba.dist,
                    "Distribution family:param (two-point:b, gaussian:sigma, uniform:a, "
                    "pareto:alpha)");
  bound->add_option("--m", ba.m, "Start index m >= 1 (>= 2 for the LIL kinds)")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  bound->add_option("--eps", ba.eps, "Level eps > 0")->check(positive)->capture_default_str();
  bound->add_option("--lambda", ba.lambda, "Split exponent in (0, 1/2); default 1/4 (l1), 1/3 (LIL)");
  bound->add_option("--q", ba.q, "Moment order q in [1, 2)")->capture_default_str();
  bound->add_option("--sigma-bar", ba.sigma_bar, "Variance proxy root >= true sd; 0 = true sd")
      ->check(nonneg)
      ->capture_default_str();
  bound->add_option("--gamma", ba.gamma, "Line offset gamma > 0 (line-crossing)")
      ->check(positive)
      ->capture_default_str();
  bound->add_option("--x", ba.x, "Truncation level x > 0 (line-crossing)")
      ->check(positive)
      ->capture_default_str();
  bound->add_option("--delta", ba.delta, "Log exponent delta > 0 (baum-katz-lil)")
      ->check(positive)
      ->capture_default_str();
  bound->add_option("--tol", ba.tol, "Absolute tolerance of the summed series (baum-katz-lil)")
      ->check(positive)
      ->capture_default_str();
  add_common(bound, common);
  bound->callback([&] { body = [&] { return run_bound(ba); }; });

  // moment
  MomentArgs ma;
  auto* moment = app.add_subcommand("moment", "Evaluate a truncated moment");
  moment->add_option("--dist", ma.dist, "Distribution family:param")->required();
  moment->add_option("--kind", ma.kind, "Functional")
      ->required()
      ->check(CLI::IsMember(
          {"abs-q", "centered-square", "normalized-square", "log-moment", "log-delta-moment"}));
  moment->add_option("--q", ma.q, "Order q in [1, 2] (abs-q), [1, 2) (log-moment)")
      ->capture_default_str();
  moment->add_option("--eps", ma.eps, "eps > 0 (log-moment)")->check(positive)->capture_default_str();
  moment->add_option("--delta", ma.delta, "delta > 0 (log-delta-moment)")
      ->check(positive)
      ->capture_default_str();
  moment->add_option("--x", ma.x, "Truncation level(s) x >= 0")->check(nonneg)->expected(1, -1);
  moment->add_flag("--oracle", ma.oracle, "Also report the quadrature value");
  add_common(moment, common);
  moment->callback([&] { body = [&] { return run_moment(ma); }; });

  // mj
  MjArgs ja;
  auto add_schedule = [&](CLI::App* sub, ScheduleArgs& s) {
    sub->add_option("--kind", s.kind, "E-process kind")
        ->required()
        ->check(CLI::IsMember({"slln", "lil", "scale-invariant"}));
    sub->add_option("--dist", s.dist, "Distribution family:param");
    sub->add_option("--q", s.q, "Exponent q in [1, 2) (slln)")->capture_default_str();
    sub->add_option("--sigma-p", s.sigma_p, "Scale sigma_P > 0 (lil); 0 = true sd")
        ->check(nonneg)
        ->capture_default_str();
    sub->add_option("--J", s.J, "Number of levels J >= 1")
        ->check(CLI::Range(1, 62))
        ->capture_default_str();
    sub->add_option("--search-cap", s.search_cap, "Largest m searched, >= 2")
        ->check(CLI::Range(std::uint64_t{2}, std::numeric_limits<std::uint64_t>::max()))
        ->capture_default_str();
  };
  auto* mj = app.add_subcommand("mj", "Compute thresholds m_j");
  add_schedule(mj, ja.schedule);
  mj->add_option("--j", ja.j, "Single level j >= 1 (default: all of 1..J)")
      ->check(CLI::Range(1, 62));
  add_common(mj, common);
  mj->callback([&] { body = [&] { return run_mj(ja); }; });

  // eprocess-run
  RunArgs ra;
  auto* erun = app.add_subcommand("eprocess-run", "Stream observations through an e-process");
  add_schedule(erun, ra.schedule);
  erun->add_option("--n", ra.n, "Number of simulated observations >= 1")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  erun->add_option("--seed", ra.seed, "Seed (required unless --input is given)");
  erun->add_option("--input", ra.input, "Read observations from a file ('-' for stdin)");
  erun->add_option("--every", ra.every, "Also emit every k-th step (0 = changes and last only)")
      ->capture_default_str();
  add_common(erun, common);
  erun->callback([&] { body = [&] { return run_eprocess(ra); }; });

  // simulate
  SimulateArgs sa;
  sa.workers = default_workers();
  auto* sim = app.add_subcommand("simulate", "Estimate one crossing probability by Monte Carlo");
  sim->add_option("--ineq", sa.ineq, "Inequality")
      ->required()
      ->check(CLI::IsMember({"l1", "lq", "lil", "studentized-lil", "darling-robbins"}));
  sim->add_option("--dist", sa.dist, "Distribution family:param")->required();
  sim->add_option("--m", sa.m, "Start index 1 <= m <= N")->capture_default_str();
  sim->add_option("--N", sa.N, "Horizon N >= m")->capture_default_str();
  sim->add_option("--eps", sa.eps, "Level eps > 0")->check(positive)->capture_default_str();
  sim->add_option("--q", sa.q, "Exponent q in [1, 2) (lq)")->capture_default_str();
  sim->add_option("--lambda", sa.lambda, "Split exponent in (0, 1/2); 0 = default")
      ->check(nonneg)
      ->capture_default_str();
  sim->add_option("--sigma-bar", sa.sigma_bar, "Variance proxy root; 0 = true sd")
      ->check(nonneg)
      ->capture_default_str();
  sim->add_option("--reps", sa.reps, "Replications >= 1")->capture_default_str();
  sim->add_option("--seed", sa.seed, "Seed (required)")->required();
  sim->add_option("--workers", sa.workers, "Worker threads >= 1")
      ->check(CLI::Range(1u, 4096u))
      ->capture_default_str();
  sim->add_flag("--timing", sa.timing, "Add a runtime column (not reproducible)");
  add_common(sim, common);
  sim->callback([&] { body = [&] { return run_simulate(sa); }; });

  // verify and table
  SuiteArgs va;
  va.workers = default_workers();
  auto add_suite = [&](CLI::App* sub, const std::string& flag,
                       std::vector<std::string> names) {
    sub->add_option(flag, va.name, "Which check")->required()->check(CLI::IsMember(names));
    sub->add_option("--seed", va.seed, "Seed (required for stochastic checks)");
    sub->add_option("--reps", va.reps, "Replications >= 1 (default per check)")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
    sub->add_option("--workers", va.workers, "Worker threads >= 1")
        ->check(CLI::Range(1u, 4096u))
        ->capture_default_str();
    sub->add_flag("--timing", va.timing, "Add a runtime column (not reproducible)");
  };
  auto* verify = app.add_subcommand("verify", "Run a verification check; exit 1 on violation");
  add_suite(verify, "--suite",
            {"moments", "dominance", "eprocess", "thresholds", "lemma", "baum-katz",
             "monotonicity", "lil-ratio"});
  verify->add_option("--trials", va.trials, "Lemma instances >= 1")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  verify->add_option("--max-len", va.max_len, "Lemma sequence length cap >= 1")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  verify->add_option("--draws", va.draws, "Monotonicity draws per property >= 1")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  add_common(verify, common);
  bool verifying = false;
  verify->callback([&] {
    verifying = true;
    body = [&] { return run_suite(va); };
  });

  auto* table = app.add_subcommand("table", "Emit a verification grid as records");
  add_suite(table, "--grid", {"moments", "dominance", "eprocess", "thresholds"});
  add_common(table, common);
  table->callback([&] { body = [&] { return run_suite(va); }; });

  try {
    std::vector<std::string> expanded = expand_config(app, args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const Format format = parse_format(common.format);
    Outcome outcome = body();
    if (common.output.empty()) {
      write_records(out, outcome.rows, format);
    } else {
      std::ofstream file(common.output);
      if (!file) usage("--output: cannot open '" + common.output + "'");
      write_records(file, outcome.rows, format);
    }
    if (verifying && outcome.violation) {
      err << "violation: at least one checked property failed\n";
      return kExitViolation;
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << '\n';
    return e.code() == Errc::kCertificateViolated ? kExitViolation : kExitUsage;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace uniconc::cli
