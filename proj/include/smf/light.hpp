#pragma once

/// \file light.hpp
/// Light and good paths: threshold predicates, branch-and-bound search over
/// ordered vertex tuples, block downcrossings and the bridge-conditioned
/// Monte Carlo probes of the downcrossing counts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "smf/core.hpp"
#include "smf/prob.hpp"
#include "smf/rng.hpp"
#include "smf/stats.hpp"

namespace smf {

inline constexpr double kInvE = 1.0 / std::numbers::e;

/// (lambda, C)-lightness: total weight at most lambda * m - C * sqrt(m).
struct LightSpec {
  double lambda = 1.0;
  double c = 0.0;

  void validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(c >= 0.0)) throw std::invalid_argument("C must be nonnegative");
  }

  [[nodiscard]] double threshold(std::size_t m) const {
    const double md = static_cast<double>(m);
    return lambda * md - c * std::sqrt(md);
  }
};

/// Parameters of a good path: lambda = 1/e + eta, weight window
/// [lambda l - 1, lambda l] and deviation cap (zeta2 / sqrt eta) W / (lambda l).
struct GoodSpec {
  double eta = 0.1;
  double zeta2 = 2.0;
  std::size_t ell = 1;

  void validate() const {
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
    if (!(zeta2 > 0.0)) throw std::invalid_argument("zeta2 must be positive");
    if (ell < 1) throw std::invalid_argument("ell must be >= 1");
  }

  [[nodiscard]] double lambda() const noexcept { return kInvE + eta; }
  [[nodiscard]] double window_high() const noexcept {
    return lambda() * static_cast<double>(ell);
  }
  [[nodiscard]] double window_low() const noexcept { return window_high() - 1.0; }
  [[nodiscard]] double deviation_cap(double total_weight) const noexcept {
    return zeta2 / std::sqrt(eta) * (total_weight / window_high());
  }
};

inline bool is_light(const PathStats& stats, const LightSpec& spec) {
  if (stats.length < 1) throw std::invalid_argument("lightness undefined for zero-length path");
  return stats.total_weight <= spec.threshold(stats.length);
}

inline bool is_good(const PathStats& stats, const GoodSpec& spec) {
  if (stats.length != spec.ell)
    throw std::invalid_argument("good-path test needs a path of length ell");
  const double w = stats.total_weight;
  if (w < spec.window_low() || w > spec.window_high()) return false;
  return stats.max_deviation <= spec.deviation_cap(w);
}

enum class SearchMode { exhaustive, sampled };

struct SearchOptions {
  std::uint64_t budget = 50'000'000;  ///< node-expansion cap
  SearchMode mode = SearchMode::exhaustive;
  std::uint64_t seed = 0;  ///< anchor order in sampled mode
  std::size_t vertex_limit = 0;  ///< only ids below this; 0 means all
};

struct SearchResult {
  std::vector<Path> paths;
  bool complete = true;
  std::uint64_t expansions = 0;
};

/// Per-vertex neighbor lists sorted by ascending edge weight (ties by id),
/// restricted to vertices below `limit`.
class NeighborIndex {
 public:
  NeighborIndex(const Instance& instance, std::size_t limit) : limit_(limit) {
    order_.resize(limit * (limit - 1));
    for (Vertex v = 0; v < limit; ++v) {
      auto row = std::span(order_).subspan(static_cast<std::size_t>(v) * (limit - 1), limit - 1);
      std::size_t k = 0;
      for (Vertex u = 0; u < limit; ++u)
        if (u != v) row[k++] = u;
      std::sort(row.begin(), row.end(), [&](Vertex a, Vertex b) {
        const double wa = instance.weight(v, a);
        const double wb = instance.weight(v, b);
        return wa < wb || (wa == wb && a < b);
      });
    }
  }

  [[nodiscard]] std::span<const Vertex> neighbors(Vertex v) const {
    return std::span(order_).subspan(static_cast<std::size_t>(v) * (limit_ - 1), limit_ - 1);
  }

 private:
  std::size_t limit_;
  std::vector<Vertex> order_;
};

namespace detail {

class WindowSearch {
 public:
  WindowSearch(const Instance& instance, const NeighborIndex& index, std::size_t ell, double lo,
               double hi, std::uint64_t budget, std::vector<Path>& out)
      : instance_(instance), index_(index), ell_(ell), lo_(lo), hi_(hi), budget_(budget),
        out_(out), on_path_(instance.size(), false) {}

  /// Returns false once the budget is exhausted.
  bool from_anchor(Vertex anchor) {
    stack_.assign(1, anchor);
    on_path_[anchor] = true;
    const bool done = extend(0.0);
    on_path_[anchor] = false;
    return done;
  }

  [[nodiscard]] std::uint64_t expansions() const noexcept { return expansions_; }

 private:
  bool extend(double weight) {
    const Vertex tail = stack_.back();
    for (Vertex u : index_.neighbors(tail)) {
      const double w = weight + instance_.weight(tail, u);
      // Neighbors come in ascending weight, so nothing later fits either.
      if (w > hi_) break;
      if (on_path_[u]) continue;
      if (expansions_ >= budget_) return false;
      ++expansions_;
      if (stack_.size() == ell_) {
        if (w >= lo_) {
          stack_.push_back(u);
          out_.emplace_back(stack_);
          stack_.pop_back();
        }
        continue;
      }
      stack_.push_back(u);
      on_path_[u] = true;
      const bool ok = extend(w);
      on_path_[u] = false;
      stack_.pop_back();
      if (!ok) return false;
    }
    return true;
  }

  const Instance& instance_;
  const NeighborIndex& index_;
  std::size_t ell_;
  double lo_;
  double hi_;
  std::uint64_t budget_;
  std::uint64_t expansions_ = 0;
  std::vector<Path>& out_;
  std::vector<Vertex> stack_;
  std::vector<bool> on_path_;
};

}  // namespace detail

/// All ordered paths of length ell with total weight in [lo, hi], found by
/// depth-first search with weight-bound pruning. Output is sorted
/// lexicographically.
inline SearchResult search_weight_window(const Instance& instance, std::size_t ell, double lo,
                                         double hi, const SearchOptions& options = {}) {
  if (ell < 1) throw std::invalid_argument("path length must be >= 1");
  if (options.budget == 0) throw std::invalid_argument("search budget must be positive");
  const std::size_t limit = options.vertex_limit == 0 ? instance.size()
                                                      : std::min(options.vertex_limit, instance.size());
  SearchResult result;
  if (!(hi > 0.0) || limit < ell + 1) return result;

  const NeighborIndex index(instance, limit);
  std::vector<Vertex> anchors(limit);
  std::iota(anchors.begin(), anchors.end(), Vertex{0});
  if (options.mode == SearchMode::sampled) {
    CounterRng rng(split_seed(options.seed, instance.seed()));
    for (std::size_t i = anchors.size(); i > 1; --i)
      std::swap(anchors[i - 1], anchors[rng.below(i)]);
  }
  detail::WindowSearch search(instance, index, ell, lo, hi, options.budget, result.paths);
  for (Vertex a : anchors) {
    if (!search.from_anchor(a)) {
      result.complete = false;
      break;
    }
  }
  result.expansions = search.expansions();
  std::sort(result.paths.begin(), result.paths.end());
  return result;
}

/// Ordered (lambda, C)-light paths of length ell.
inline SearchResult search_light_paths(const Instance& instance, std::size_t ell,
                                       const LightSpec& spec, const SearchOptions& options = {}) {
  spec.validate();
  return search_weight_window(instance, ell, -std::numeric_limits<double>::infinity(),
                              spec.threshold(ell), options);
}

/// Block decomposition of a long path into consecutive length-ell pieces.
struct DowncrossReport {
  std::size_t block_length = 0;
  std::size_t block_count = 0;
  std::vector<std::size_t> downcross_indices;  ///< zero-based block indices
  std::vector<double> lambda_k;                ///< suffix average from block k on
  std::vector<bool> a_k;                       ///< W(b_k) <= Lambda_k (ell - C_A sqrt ell)
  std::vector<double> block_weights;
};

/// Downcrossing statistics of an edge-weight sequence. A trailing block
/// shorter than ell is left out of every count.
inline DowncrossReport downcross_report(std::span<const double> weights, std::size_t ell,
                                        const LightSpec& spec, double a_k_c = 6.0) {
  spec.validate();
  if (ell < 1) throw std::invalid_argument("block length must be >= 1");
  if (weights.size() < ell) throw std::invalid_argument("path shorter than one block");
  DowncrossReport r;
  r.block_length = ell;
  r.block_count = weights.size() / ell;
  const std::size_t m = weights.size();
  // suffix[i] = sum of weights[i..m)
  std::vector<double> suffix(m + 1, 0.0);
  for (std::size_t i = m; i-- > 0;) suffix[i] = suffix[i + 1] + weights[i];
  const double ld = static_cast<double>(ell);
  const double light_cut = spec.threshold(ell);
  const double a_factor = ld - a_k_c * std::sqrt(ld);
  for (std::size_t k = 0; k < r.block_count; ++k) {
    const std::size_t start = k * ell;
    double bw = 0.0;
    for (std::size_t i = start; i < start + ell; ++i) bw += weights[i];
    const double lam = suffix[start] / static_cast<double>(m - start);
    r.block_weights.push_back(bw);
    r.lambda_k.push_back(lam);
    r.a_k.push_back(bw <= lam * a_factor);
    if (bw <= light_cut) r.downcross_indices.push_back(k);
  }
  return r;
}

inline DowncrossReport downcross_report(const Instance& instance, const Path& path,
                                        std::size_t ell, const LightSpec& spec,
                                        double a_k_c = 6.0) {
  if (!validate_path(instance, path).ok()) throw invalid_path("downcross report needs a simple path");
  const auto w = path_weights(instance, path);
  return downcross_report(w, ell, spec, a_k_c);
}

/// A_k indicators for the first `count` blocks, with the same suffix-average
/// convention as downcross_report.
inline std::vector<bool> a_k_flags(std::span<const double> weights, std::size_t ell, double a_k_c,
                                   std::size_t count) {
  const std::size_t m = weights.size();
  if (count * ell > m) throw std::invalid_argument("not enough full blocks");
  double total = 0.0;
  for (double w : weights) total += w;
  const double ld = static_cast<double>(ell);
  const double a_factor = ld - a_k_c * std::sqrt(ld);
  std::vector<bool> flags(count);
  double prefix = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = k * ell;
    double bw = 0.0;
    for (std::size_t i = start; i < start + ell; ++i) bw += weights[i];
    const double lam = (total - prefix) / static_cast<double>(m - start);
    flags[k] = bw <= lam * a_factor;
    prefix += bw;
  }
  return flags;
}

struct DominationResult {
  std::size_t half_blocks = 0;            ///< floor(L / 2 ell) blocks counted per trial
  std::size_t trials = 0;
  std::vector<std::uint64_t> histogram;   ///< histogram[x] = trials with N = x
  std::vector<double> block_frequency;    ///< per-block empirical P(A_k)
  double c_hat = 0.0;                     ///< pooled per-block frequency
};

/// Counts A_k events over the first half of bridge-conditioned weight
/// sequences of length L with total lambda * L.
inline DominationResult domination_trial(std::size_t ell, std::size_t path_length, double lambda,
                                         double a_k_c, std::size_t trials, std::uint64_t seed) {
  if (ell < 1 || path_length < 2 * ell)
    throw std::invalid_argument("domination trial needs L >= 2 ell");
  if (trials < 1) throw std::invalid_argument("domination trial needs trials >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  DominationResult r;
  r.half_blocks = path_length / (2 * ell);
  r.trials = trials;
  r.histogram.assign(r.half_blocks + 1, 0);
  std::vector<std::uint64_t> hits(r.half_blocks, 0);
  const double total = lambda * static_cast<double>(path_length);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng(split_seed(seed, t));
    const auto w = dirichlet_bridge_sample(path_length, total, rng);
    const auto flags = a_k_flags(w, ell, a_k_c, r.half_blocks);
    std::size_t count = 0;
    for (std::size_t k = 0; k < flags.size(); ++k)
      if (flags[k]) {
        ++count;
        ++hits[k];
      }
    ++r.histogram[count];
  }
  std::uint64_t all = 0;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    all += hits[k];
    r.block_frequency.push_back(static_cast<double>(hits[k]) / static_cast<double>(trials));
  }
  r.c_hat = static_cast<double>(all) / static_cast<double>(trials * r.half_blocks);
  return r;
}

struct DominationCheck {
  bool holds = true;
  double max_excess = 0.0;  ///< max over x of F_emp(x) - F_bin(x) - slack(x)
  double p_reference = 0.0;
  std::vector<double> empirical_cdf;
  std::vector<double> binomial_cdf;
};

/// Whether the empirical CDF of N lies at or below the CDF of
/// Bin(half_blocks, c_hat (1 - eps)). Each point is allowed a Monte Carlo
/// slack of 3 binomial sigma plus one count, since an empirical CDF reaches 1
/// at its largest observation.
inline DominationCheck check_binomial_domination(const DominationResult& r, double eps = 0.2) {
  DominationCheck c;
  c.p_reference = r.c_hat * (1.0 - eps);
  c.binomial_cdf = binomial_cdf_table(r.half_blocks, c.p_reference);
  double acc = 0.0;
  const double t = static_cast<double>(r.trials);
  c.max_excess = -1.0;
  for (std::size_t x = 0; x < r.histogram.size(); ++x) {
    acc += static_cast<double>(r.histogram[x]);
    const double emp = acc / t;
    c.empirical_cdf.push_back(emp);
    const double ref = c.binomial_cdf[x];
    const double slack = 3.0 * binomial_sigma(ref, r.trials) + 1.0 / t;
    c.max_excess = std::max(c.max_excess, emp - ref - slack);
  }
  c.holds = c.max_excess <= 0.0;
  return c;
}

struct ExcursionResult {
  std::size_t trials = 0;
  std::uint64_t hits = 0;
  double frequency = 0.0;
  double sigma = 0.0;       ///< binomial standard error of the frequency
  double raw_bound = 0.0;   ///< 2 L exp(-L eta' / 16)
  double bound = 0.0;       ///< min(1, raw_bound)
};

/// Frequency of max_{k <= L/2ell} Lambda_k > lambda + sqrt(eta') over
/// bridge-conditioned sequences with S_L = lambda L.
inline ExcursionResult excursion_frequency(std::size_t ell, std::size_t path_length,
                                           double lambda, double eta_prime, std::size_t trials,
                                           std::uint64_t seed) {
  if (ell < 1 || path_length < 2 * ell)
    throw std::invalid_argument("excursion probe needs L >= 2 ell");
  if (!(eta_prime > 0.0 && eta_prime <= 0.25))
    throw std::invalid_argument("eta' must lie in (0, 1/4]");
  if (trials < 1) throw std::invalid_argument("excursion probe needs trials >= 1");
  ExcursionResult r;
  r.trials = trials;
  const double ld = static_cast<double>(path_length);
  r.raw_bound = 2.0 * ld * std::exp(-ld * eta_prime / 16.0);
  r.bound = std::min(1.0, r.raw_bound);
  const std::size_t blocks = path_length / (2 * ell);
  const double total = lambda * ld;
  const double level = lambda + std::sqrt(eta_prime);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng(split_seed(seed, t));
    const auto w = dirichlet_bridge_sample(path_length, total, rng);
    double prefix = 0.0;
    for (std::size_t k = 0; k < blocks; ++k) {
      const std::size_t start = k * ell;
      const double lam = (total - prefix) / static_cast<double>(path_length - start);
      if (lam > level) {
        ++r.hits;
        break;
      }
      for (std::size_t i = start; i < start + ell; ++i) prefix += w[i];
    }
  }
  r.frequency = static_cast<double>(r.hits) / static_cast<double>(trials);
  r.sigma = binomial_sigma(r.frequency, trials);
  return r;
}

}  // namespace smf
