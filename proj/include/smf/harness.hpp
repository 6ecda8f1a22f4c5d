#pragma once

/// \file harness.hpp
/// Experiment driver behind the `smf` command-line tool: experiment specs,
/// the five commands, and their CSV/JSON output. Every artifact starts with
/// the build id and the full resolved spec so a single re-run reproduces it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smf/bridge.hpp"
#include "smf/core.hpp"
#include "smf/csv.hpp"
#include "smf/errors.hpp"
#include "smf/light.hpp"
#include "smf/oracle.hpp"
#include "smf/overlap.hpp"
#include "smf/parallel.hpp"
#include "smf/prob.hpp"
#include "smf/rng.hpp"
#include "smf/stats.hpp"

#ifndef SMF_BUILD_ID
#define SMF_BUILD_ID "unknown"
#endif

namespace smf {

inline constexpr int kExitPass = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitInvalidSpec = 2;
inline constexpr int kExitResourceGuard = 3;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"oracle-sweep", "light-count", "verify-bounds",
                                              "bridge-pipeline", "downcross-study"};
  return names;
}

struct ExperimentSpec {
  std::string command;
  std::size_t n = 12;
  double lambda = 1.0;
  std::vector<double> lambda_grid{0.2, kInvE, 0.6};
  double eta = 0.3;
  std::size_t ell = 3;
  double c = 1.0;
  double zeta1 = 0.2;
  double zeta2 = 2.0;
  std::size_t nu = 1;
  double delta = 0.5;
  std::size_t path_length = 2500;
  std::vector<double> c_grid{1.0};
  std::vector<double> eta_prime_grid{0.16, 0.25};
  std::vector<std::uint64_t> seeds;  ///< explicit list; overrides base/count
  std::uint64_t seed_base = 1;
  std::size_t seed_count = 20;
  std::size_t trials = 10000;
  std::uint64_t budget = 200'000'000;
  std::size_t threads = 0;  ///< 0 means default_threads()
  std::string output;       ///< empty means standard output
  double bound_scale = 1.0; ///< multiplies the tail bounds; a negative-control hook
  bool allow_large = false; ///< lifts the exact-oracle size guard

  /// The explicit list, or split_seed(seed_base, i) for i < seed_count.
  [[nodiscard]] std::vector<std::uint64_t> resolved_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out;
    out.reserve(seed_count);
    for (std::size_t i = 0; i < seed_count; ++i) out.push_back(split_seed(seed_base, i));
    return out;
  }

  [[nodiscard]] std::size_t worker_count() const {
    return threads == 0 ? default_threads() : threads;
  }

  void validate() const {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end())
      throw std::invalid_argument("unknown command '" + command + "'");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
      throw std::invalid_argument("seeds must be unique");
    if (!(bound_scale > 0.0)) throw std::invalid_argument("bound_scale must be positive");
    if (command == "oracle-sweep") {
      if (n < 2) throw std::invalid_argument("n must be >= 2");
      for (double l : lambda_grid)
        if (!(l > 0.0)) throw std::invalid_argument("lambda grid values must be positive");
    } else if (command == "light-count") {
      if (n < 2) throw std::invalid_argument("n must be >= 2");
      if (ell < 1) throw std::invalid_argument("ell must be >= 1");
      LightSpec{lambda, c}.validate();
      if (resolved_seeds().empty()) throw std::invalid_argument("light-count needs seeds");
    } else if (command == "verify-bounds") {
      if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    } else if (command == "bridge-pipeline") {
      GoodSpec{eta, zeta2, ell}.validate();
      BridgeConfig{nu, ell, delta, zeta1}.validate();
      if (n < 2) throw std::invalid_argument("n must be >= 2");
      if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    } else if (command == "downcross-study") {
      if (trials < 1) throw std::invalid_argument("trials must be >= 1");
      if (ell < 1 || path_length < 2 * ell) throw std::invalid_argument("need L >= 2 ell");
      if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
      if (c_grid.empty() && eta_prime_grid.empty())
        throw std::invalid_argument("downcross study needs a nonempty grid");
      for (double x : c_grid)
        if (!(x >= 0.0)) throw std::invalid_argument("C values must be nonnegative");
      for (double x : eta_prime_grid)
        if (!(x > 0.0 && x <= 0.25)) throw std::invalid_argument("eta' must lie in (0, 1/4]");
    }
  }
};

inline void to_json(nlohmann::json& j, const ExperimentSpec& s) {
  j = nlohmann::json{{"command", s.command},
                     {"n", s.n},
                     {"lambda", s.lambda},
                     {"lambda_grid", s.lambda_grid},
                     {"eta", s.eta},
                     {"ell", s.ell},
                     {"c", s.c},
                     {"zeta1", s.zeta1},
                     {"zeta2", s.zeta2},
                     {"nu", s.nu},
                     {"delta", s.delta},
                     {"path_length", s.path_length},
                     {"c_grid", s.c_grid},
                     {"eta_prime_grid", s.eta_prime_grid},
                     {"seeds", s.resolved_seeds()},
                     {"seed_base", s.seed_base},
                     {"seed_count", s.seed_count},
                     {"trials", s.trials},
                     {"budget", s.budget},
                     {"bound_scale", s.bound_scale},
                     {"allow_large", s.allow_large}};
}

/// Overwrites the fields present in `j`; unknown keys are rejected.
inline void merge_spec(ExperimentSpec& s, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "command") value.get_to(s.command);
      else if (key == "n") value.get_to(s.n);
      else if (key == "lambda") value.get_to(s.lambda);
      else if (key == "lambda_grid") value.get_to(s.lambda_grid);
      else if (key == "eta") value.get_to(s.eta);
      else if (key == "ell") value.get_to(s.ell);
      else if (key == "c") value.get_to(s.c);
      else if (key == "zeta1") value.get_to(s.zeta1);
      else if (key == "zeta2") value.get_to(s.zeta2);
      else if (key == "nu") value.get_to(s.nu);
      else if (key == "delta") value.get_to(s.delta);
      else if (key == "path_length") value.get_to(s.path_length);
      else if (key == "c_grid") value.get_to(s.c_grid);
      else if (key == "eta_prime_grid") value.get_to(s.eta_prime_grid);
      else if (key == "seeds") value.get_to(s.seeds);
      else if (key == "seed_base") value.get_to(s.seed_base);
      else if (key == "seed_count") value.get_to(s.seed_count);
      else if (key == "trials") value.get_to(s.trials);
      else if (key == "budget") value.get_to(s.budget);
      else if (key == "threads") value.get_to(s.threads);
      else if (key == "output") value.get_to(s.output);
      else if (key == "bound_scale") value.get_to(s.bound_scale);
      else if (key == "allow_large") value.get_to(s.allow_large);
      else throw std::invalid_argument("unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
  }
}

inline std::string artifact_banner(const ExperimentSpec& s) {
  return std::string("# build=") + SMF_BUILD_ID + " spec=" + nlohmann::json(s).dump() + "\n";
}

// ---------------------------------------------------------------------------
// oracle-sweep

inline int cmd_oracle_sweep(const ExperimentSpec& s, std::ostream& out, std::ostream& log) {
  s.validate();
  if (s.n > kOracleMaxVertices && !s.allow_large)
    throw resource_limit("oracle sweep limited to n <= " + std::to_string(kOracleMaxVertices));
  const auto seeds = s.resolved_seeds();
  out << artifact_banner(s) << "lambda,seed,L,L_over_n,L_over_ln_n\n";
  if (s.lambda_grid.empty()) return kExitPass;

  const auto per_seed = parallel_map(seeds.size(), s.worker_count(), [&](std::size_t i) {
    const auto table =
        build_oracle(generate_instance(s.n, seeds[i]), {.override_guard = s.allow_large});
    std::vector<std::size_t> ls;
    for (double lambda : s.lambda_grid) ls.push_back(read_L(table, lambda));
    return ls;
  });

  int status = kExitPass;
  std::vector<std::size_t> order(s.lambda_grid.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.lambda_grid[a] < s.lambda_grid[b]; });
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t g = 1; g < order.size(); ++g)
      if (per_seed[i][order[g]] < per_seed[i][order[g - 1]]) {
        log << "violation: read_L not monotone in lambda for seed " << seeds[i] << "\n";
        status = kExitViolation;
      }

  const double nd = static_cast<double>(s.n);
  for (std::size_t g = 0; g < s.lambda_grid.size(); ++g)
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto l = static_cast<double>(per_seed[i][g]);
      out << CsvRow()
                 .add(s.lambda_grid[g])
                 .add(seeds[i])
                 .add(std::uint64_t{per_seed[i][g]})
                 .add(l / nd)
                 .add(l / std::log(nd))
                 .str();
    }
  return status;
}

// ---------------------------------------------------------------------------
// light-count

struct LightCountSummary {
  double mean = 0.0;
  double expected = 0.0;
  double relative_error = 0.0;
  double fraction_at_least_twice = 0.0;  ///< seeds with N >= 2 E N
};

inline int cmd_light_count(const ExperimentSpec& s, std::ostream& out, std::ostream& log,
                           LightCountSummary* summary = nullptr) {
  s.validate();
  const auto seeds = s.resolved_seeds();
  const LightSpec spec{s.lambda, s.c};
  const double expected = expected_light_count(s.n, s.ell, s.lambda, s.c);
  const auto counts = parallel_map(seeds.size(), s.worker_count(), [&](std::size_t i) {
    return exhaustive_light_count(generate_instance(s.n, seeds[i]), s.ell, spec);
  });

  out << artifact_banner(s) << "row,seed,count,expected,mean,relative_error,fraction_ge_2e\n";
  LightCountSummary sum;
  sum.expected = expected;
  std::size_t twice = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    sum.mean += static_cast<double>(counts[i]);
    if (static_cast<double>(counts[i]) >= 2.0 * expected) ++twice;
    out << CsvRow().add("seed").add(seeds[i]).add(counts[i]).add(expected).add("").add("").add("").str();
  }
  sum.mean /= static_cast<double>(seeds.size());
  sum.relative_error = expected > 0.0 ? std::abs(sum.mean - expected) / expected
                                      : (sum.mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  sum.fraction_at_least_twice = static_cast<double>(twice) / static_cast<double>(seeds.size());
  out << CsvRow()
             .add("summary")
             .add("")
             .add("")
             .add(expected)
             .add(sum.mean)
             .add(sum.relative_error)
             .add(sum.fraction_at_least_twice)
             .str();
  log << "light-count: mean " << format_double(sum.mean) << " vs expected "
      << format_double(expected) << "\n";
  if (summary) *summary = sum;
  return kExitPass;
}

// ---------------------------------------------------------------------------
// verify-bounds

/// Monte Carlo frequencies of S_N >= N + alpha and S_N <= N - alpha for sums
/// of N mean-one exponentials, one frequency pair per alpha.
struct TailFrequencies {
  std::size_t summands = 0;
  std::size_t trials = 0;
  std::vector<double> alphas;
  std::vector<double> upper;
  std::vector<double> lower;
};

inline TailFrequencies simulate_tails(std::size_t summands, const std::vector<double>& alphas,
                                      std::size_t trials, std::uint64_t seed,
                                      std::size_t threads = 1) {
  if (summands < 1) throw std::invalid_argument("need at least one summand");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  constexpr std::size_t chunk = 10000;
  const std::size_t chunks = (trials + chunk - 1) / chunk;
  const double nd = static_cast<double>(summands);
  const auto counts = parallel_map(chunks, threads, [&](std::size_t c) {
    std::vector<std::uint64_t> hits(2 * alphas.size(), 0);
    const std::size_t end = std::min(trials, (c + 1) * chunk);
    for (std::size_t t = c * chunk; t < end; ++t) {
      CounterRng rng(split_seed(seed, t));
      double sum = 0.0;
      for (std::size_t i = 0; i < summands; ++i) sum += rng.exponential(1.0);
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        if (sum >= nd + alphas[a]) ++hits[2 * a];
        if (sum <= nd - alphas[a]) ++hits[2 * a + 1];
      }
    }
    return hits;
  });
  TailFrequencies f;
  f.summands = summands;
  f.trials = trials;
  f.alphas = alphas;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    std::uint64_t up = 0;
    std::uint64_t lo = 0;
    for (const auto& h : counts) {
      up += h[2 * a];
      lo += h[2 * a + 1];
    }
    f.upper.push_back(static_cast<double>(up) / static_cast<double>(trials));
    f.lower.push_back(static_cast<double>(lo) / static_cast<double>(trials));
  }
  return f;
}

/// The (N, alpha) grid with alpha in {sqrt N, 2 sqrt N, 4 sqrt N}.
inline std::vector<double> tail_alphas(std::size_t summands) {
  const double r = std::sqrt(static_cast<double>(summands));
  return {r, 2.0 * r, 4.0 * r};
}

inline const std::vector<std::size_t>& tail_grid() {
  static const std::vector<std::size_t> grid{50, 200, 800};
  return grid;
}

/// Largest deviation allowed by the upper-tail inequality, (2 - sqrt 2) N.
inline double upper_tail_limit(std::size_t summands) {
  return (2.0 - std::numbers::sqrt2) * static_cast<double>(summands);
}

struct BoundCheckRow {
  std::string check;
  double p1 = 0.0;
  double p2 = 0.0;
  double observed = 0.0;
  double reference = 0.0;
  double slack = 0.0;
  bool pass = false;
};

/// Critical two-sample KS distance at significance 0.001 for equal sizes.
inline double ks_critical(std::size_t per_sample) {
  return 1.95 * std::sqrt(2.0 / static_cast<double>(per_sample));
}

inline std::vector<BoundCheckRow> run_bound_suite(const ExperimentSpec& s) {
  if (s.trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<BoundCheckRow> rows;
  const std::size_t threads = s.worker_count();

  // Tail inequalities against Monte Carlo, with 3 binomial sigma slack.
  for (std::size_t gi = 0; gi < tail_grid().size(); ++gi) {
    const std::size_t big_n = tail_grid()[gi];
    const auto alphas = tail_alphas(big_n);
    const auto f = simulate_tails(big_n, alphas, s.trials, split_seed(s.seed_base, gi), threads);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const TailBoundQuery q{big_n, alphas[a]};
      if (alphas[a] <= upper_tail_limit(big_n)) {
        const double b = std::min(1.0, exp_tail_upper(q) * s.bound_scale);
        const double sigma = binomial_sigma(b, s.trials);
        rows.push_back({"tail_upper", double(big_n), alphas[a], f.upper[a], b, 3.0 * sigma,
                        f.upper[a] <= b + 3.0 * sigma});
      }
      const double b = std::min(1.0, exp_tail_lower(q) * s.bound_scale);
      const double sigma = binomial_sigma(b, s.trials);
      rows.push_back({"tail_lower", double(big_n), alphas[a], f.lower[a], b, 3.0 * sigma,
                      f.lower[a] <= b + 3.0 * sigma});
    }
  }

  // Gamma CDF: zero at the origin, nondecreasing, tends to one.
  for (std::size_t k : {1u, 5u, 20u, 100u, 400u}) {
    const GammaSpec g{k, 1.0};
    double prev = gamma_cdf(g, 0.0);
    bool ok = prev == 0.0;
    const double top = 4.0 * static_cast<double>(k) + 60.0;
    for (int i = 1; i <= 400; ++i) {
      const double cur = gamma_cdf(g, top * i / 400.0);
      ok = ok && cur >= prev && cur <= 1.0;
      prev = cur;
    }
    rows.push_back({"gamma_cdf_shape", double(k), 0.0, prev, 1.0, 1e-9, ok && prev >= 1.0 - 1e-9});
  }

  // Gamma density integrates to one (composite Simpson).
  for (std::size_t k : {1u, 2u, 5u, 10u, 20u}) {
    const GammaSpec g{k, 0.5};
    const double top = (static_cast<double>(k) + 40.0) / g.rate;
    constexpr int panels = 200000;
    const double h = top / panels;
    double acc = gamma_pdf(g, 0.0) + gamma_pdf(g, top);
    for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * gamma_pdf(g, i * h);
    const double integral = acc * h / 3.0;
    rows.push_back({"gamma_pdf_mass", double(k), g.rate, integral, 1.0, 1e-6,
                    std::abs(integral - 1.0) <= 1e-6});
  }

  // Chernoff lower tail dominates the exact binomial CDF.
  for (auto [t, p] : {std::pair{200u, 0.1}, std::pair{100u, 0.5}, std::pair{50u, 0.3}}) {
    const auto cdf = binomial_cdf_table(t, p);
    bool ok = true;
    double worst = -1.0;
    for (std::size_t x = 0; static_cast<double>(x) <= t * p; ++x) {
      const double bound = binomial_lower_tail_bound(t, p, static_cast<double>(x));
      worst = std::max(worst, cdf[x] - bound);
      ok = ok && cdf[x] <= bound;
    }
    rows.push_back({"binomial_chernoff", double(t), p, worst, 0.0, 0.0, ok});
  }

  // Bridge samples: exact total, positive increments; ratio statistics do not
  // depend on the base exponential scale or on the conditioning total.
  const std::size_t ks_n = std::min<std::size_t>(s.trials, 100000);
  {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t t = 0; t < std::min<std::size_t>(ks_n, 10000); ++t) {
      const double total = 0.5 + static_cast<double>(t % 97);
      const auto x = dirichlet_bridge_sample(25, total, split_seed(s.seed_base ^ 0xD1u, t));
      double sum = 0.0;
      for (double v : x) {
        sum += v;
        ok = ok && v > 0.0;
      }
      worst = std::max(worst, std::abs(sum - total) / total);
    }
    rows.push_back({"bridge_total", 25.0, 0.0, worst, 1e-9, 0.0, ok && worst <= 1e-9});
  }
  {
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t t = 0; t < ks_n; ++t) {
      CounterRng ra(split_seed(s.seed_base ^ 0xA1u, t));
      CounterRng rb(split_seed(s.seed_base ^ 0xB1u, t));
      const auto xa = dirichlet_bridge_sample(10, 10.0, ra, 1.0);
      const auto xb = dirichlet_bridge_sample(10, 10.0, rb, 1000.0);
      a.push_back((xa[0] + xa[1] + xa[2]) / 10.0);
      b.push_back((xb[0] + xb[1] + xb[2]) / 10.0);
    }
    const double d = ks_two_sample(a, b);
    rows.push_back({"bridge_scale_free", 10.0, 3.0, d, ks_critical(ks_n), 0.0, d <= ks_critical(ks_n)});
  }
  {
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t t = 0; t < ks_n; ++t) {
      const auto xa = dirichlet_bridge_sample(25, 1.0, split_seed(s.seed_base ^ 0xC1u, t));
      const auto xb = dirichlet_bridge_sample(25, 50.0, split_seed(s.seed_base ^ 0xC2u, t));
      const auto sa = stats_from_weights(xa);
      const auto sb = stats_from_weights(xb);
      a.push_back(sa.max_deviation / sa.total_weight);
      b.push_back(sb.max_deviation / sb.total_weight);
    }
    const double d = ks_two_sample(a, b);
    rows.push_back({"deviation_ratio_free", 1.0, 50.0, d, ks_critical(ks_n), 0.0,
                    d <= ks_critical(ks_n)});
  }
  return rows;
}

inline int cmd_verify_bounds(const ExperimentSpec& s, std::ostream& out, std::ostream& log) {
  s.validate();
  const auto rows = run_bound_suite(s);
  out << artifact_banner(s) << "check,p1,p2,observed,reference,slack,pass\n";
  int status = kExitPass;
  for (const auto& r : rows) {
    out << CsvRow()
               .add(r.check)
               .add(r.p1)
               .add(r.p2)
               .add(r.observed)
               .add(r.reference)
               .add(r.slack)
               .add(r.pass)
               .str();
    if (!r.pass) {
      log << "violation: " << r.check << " (" << format_double(r.p1) << ", "
          << format_double(r.p2) << ")\n";
      status = kExitViolation;
    }
  }
  return status;
}

// ---------------------------------------------------------------------------
// bridge-pipeline

struct PipelineRun {
  std::uint64_t seed = 0;
  DisjointFamily family;
  BridgeResult result;
  std::optional<BridgeAudit> audit;
  std::string audit_error;
  bool oracle_checked = false;
  std::size_t oracle_L = 0;
  bool oracle_holds = true;

  [[nodiscard]] bool ok() const noexcept { return audit_error.empty() && oracle_holds; }
};

inline PipelineRun run_pipeline(const ExperimentSpec& s, std::uint64_t seed) {
  const auto instance = generate_instance(s.n, seed);
  const GoodSpec good{s.eta, s.zeta2, s.ell};
  const BridgeConfig config{s.nu, s.ell, s.delta, s.zeta1};
  PipelineRun run;
  run.seed = seed;
  run.family = extract_disjoint_good_paths(instance, good, s.zeta1, s.budget);
  run.result = run_bridge(instance, run.family, config);
  if (!run.result.feasibility.feasible()) return run;
  try {
    run.audit = audit_bridge(run.result, instance, run.family, config, good);
  } catch (const invariant_violation& e) {
    run.audit_error = e.what();
  }
  if (s.n <= kOracleMaxVertices) {
    run.oracle_checked = true;
    // The oracle may sum the same path in the opposite direction, so the
    // average is widened by a few ulps before the lookup.
    const double lambda = run.result.average() * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());
    run.oracle_L = read_L(build_oracle(instance), lambda);
    run.oracle_holds = run.oracle_L >= run.result.length();
  }
  return run;
}

inline nlohmann::json pipeline_run_to_json(const PipelineRun& run) {
  nlohmann::json j;
  j["seed"] = run.seed;
  j["family"] = {{"size", run.family.paths.size()},
                 {"source_count", run.family.source_count},
                 {"intersection_edges", run.family.edge_count},
                 {"n_star", run.family.n_star},
                 {"complete", run.family.complete}};
  j["result"] = bridge_result_to_json(run.result, run.audit);
  if (!run.audit_error.empty()) j["audit_error"] = run.audit_error;
  if (run.oracle_checked)
    j["oracle"] = {{"L", run.oracle_L}, {"length", run.result.length()}, {"holds", run.oracle_holds}};
  return j;
}

inline int cmd_bridge_pipeline(const ExperimentSpec& s, std::ostream& out, std::ostream& log) {
  s.validate();
  const auto seeds = s.resolved_seeds();
  const auto runs = parallel_map(seeds.size(), s.worker_count(),
                                 [&](std::size_t i) { return run_pipeline(s, seeds[i]); });
  nlohmann::json report;
  report["build"] = SMF_BUILD_ID;
  report["spec"] = s;
  report["runs"] = nlohmann::json::array();
  int status = kExitPass;
  for (const auto& run : runs) {
    report["runs"].push_back(pipeline_run_to_json(run));
    if (!run.result.feasibility.feasible())
      log << "seed " << run.seed << ": " << run.result.feasibility.reason() << "\n";
    if (!run.ok()) {
      log << "violation at seed " << run.seed << ": "
          << (run.audit_error.empty() ? "oracle witness inequality" : run.audit_error) << "\n";
      status = kExitViolation;
    }
  }
  out << report.dump(2) << "\n";
  return status;
}

// ---------------------------------------------------------------------------
// downcross-study

struct StudyRow {
  std::string kind;
  double param = 0.0;
  double estimate = 0.0;
  double sigma = 0.0;
  double reference = 0.0;
  bool flag = false;
  std::string note;
};

inline std::vector<StudyRow> run_downcross_study(const ExperimentSpec& s, std::ostream& log) {
  const std::size_t cells = s.c_grid.size() + s.eta_prime_grid.size();
  auto rows = parallel_map(cells, s.worker_count(), [&](std::size_t i) {
    const std::uint64_t seed = split_seed(s.seed_base, i);
    StudyRow row;
    if (i < s.c_grid.size()) {
      const double c = s.c_grid[i];
      const auto r = domination_trial(s.ell, s.path_length, s.lambda, c, s.trials, seed);
      const auto check = check_binomial_domination(r);
      const double events = r.c_hat * static_cast<double>(r.trials * r.half_blocks);
      row = {"domination", c, r.c_hat, binomial_sigma(r.c_hat, r.trials * r.half_blocks),
             check.max_excess, check.holds, ""};
      const double ld = static_cast<double>(s.ell);
      if (ld - c * std::sqrt(ld) <= 0.0)
        row.note = "unobservable: block threshold is nonpositive";
      else if (events < 10.0)
        row.note = "unobservable: fewer than 10 events";
    } else {
      const double ep = s.eta_prime_grid[i - s.c_grid.size()];
      const auto r = excursion_frequency(s.ell, s.path_length, s.lambda, ep, s.trials, seed);
      row = {"excursion", ep, r.frequency, r.sigma, r.bound,
             r.frequency <= r.bound + 3.0 * r.sigma, r.raw_bound >= 1.0 ? "trivial: bound >= 1" : ""};
    }
    return row;
  });
  for (const auto& r : rows)
    if (r.note.rfind("unobservable", 0) == 0)
      log << "warning: " << r.kind << " cell C=" << format_double(r.param) << " " << r.note << "\n";
  return rows;
}

inline int cmd_downcross_study(const ExperimentSpec& s, std::ostream& out, std::ostream& log) {
  s.validate();
  const auto rows = run_downcross_study(s, log);
  out << artifact_banner(s)
      << "kind,ell,L,lambda,param,trials,estimate,sigma,reference,flag,note,sampling\n";
  int status = kExitPass;
  for (const auto& r : rows) {
    out << CsvRow()
               .add(r.kind)
               .add(std::uint64_t{s.ell})
               .add(std::uint64_t{s.path_length})
               .add(s.lambda)
               .add(r.param)
               .add(std::uint64_t{s.trials})
               .add(r.estimate)
               .add(r.sigma)
               .add(r.reference)
               .add(r.flag)
               .add(r.note)
               .add("bridge-conditioned")
               .str();
    if (!r.flag) status = kExitViolation;
  }
  return status;
}

// ---------------------------------------------------------------------------

/// Runs the command named in the experiment spec and maps failures to exit codes:
/// invalid spec 2, resource guard 3, invariant violation 1.
inline int run_experiment(const ExperimentSpec& s, std::ostream& out, std::ostream& log) {
  try {
    s.validate();
    if (s.command == "oracle-sweep") return cmd_oracle_sweep(s, out, log);
    if (s.command == "light-count") return cmd_light_count(s, out, log);
    if (s.command == "verify-bounds") return cmd_verify_bounds(s, out, log);
    if (s.command == "bridge-pipeline") return cmd_bridge_pipeline(s, out, log);
    return cmd_downcross_study(s, out, log);
  } catch (const resource_limit& e) {
    log << "resource guard: " << e.what() << "\n";
    return kExitResourceGuard;
  } catch (const invariant_violation& e) {
    log << "violation: " << e.what() << "\n";
    return kExitViolation;
  } catch (const std::invalid_argument& e) {
    log << "invalid spec: " << e.what() << "\n";
    return kExitInvalidSpec;
  } catch (const std::domain_error& e) {
    log << "invalid spec: " << e.what() << "\n";
    return kExitInvalidSpec;
  }
}

}  // namespace smf
