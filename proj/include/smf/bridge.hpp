#pragma once

/// \file bridge.hpp
/// Greedy stitching of vertex-disjoint good paths into one long path through
/// two-edge bridges whose middle vertex comes from a reserved pool, plus the
/// feasibility checks, a structural audit and the asymptotic parameter
/// schedule evaluated in log-space.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "smf/core.hpp"
#include "smf/errors.hpp"
#include "smf/light.hpp"
#include "smf/overlap.hpp"

namespace smf {

struct BridgeConfig {
  std::size_t nu = 1;     ///< predecessor pool size per iteration
  std::size_t ell = 8;    ///< good-path length
  double delta = 0.01;    ///< target fraction: floor(delta n / ell) paths are joined
  double zeta1 = 0.2;     ///< reservoir fraction

  [[nodiscard]] std::size_t end_segment() const noexcept { return ell / 4; }

  void validate() const {
    if (nu < 1) throw std::invalid_argument("nu must be >= 1");
    if (ell < 8) throw std::invalid_argument("ell must be >= 8 so end segments are disjoint");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (!(zeta1 > 0.0 && zeta1 < 1.0)) throw std::invalid_argument("zeta1 must lie in (0, 1)");
  }

  /// floor(delta n / ell)
  [[nodiscard]] std::size_t blocks(std::size_t n) const {
    return static_cast<std::size_t>(std::floor(delta * static_cast<double>(n) /
                                               static_cast<double>(ell)));
  }
};

struct VertexPartition {
  std::size_t pool = 0;       ///< V1 = [0, pool)
  std::size_t reservoir = 0;  ///< V2 = [pool, n)
};

inline VertexPartition partition_vertices(std::size_t n, double zeta1, double eta) {
  if (!(zeta1 > 0.0 && zeta1 < 1.0)) throw std::invalid_argument("zeta1 must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  const std::size_t pool = pool_size(n, zeta1, eta);
  if (pool < 2) throw std::invalid_argument("partition leaves fewer than 2 pool vertices");
  return {pool, n - pool};
}

struct FeasibilityReport {
  std::size_t blocks = 0;  ///< floor(delta n / ell)
  bool at_least_one = false;
  bool family_large_enough = false;
  bool reservoir_large_enough = false;

  [[nodiscard]] bool feasible() const noexcept {
    return at_least_one && family_large_enough && reservoir_large_enough;
  }

  [[nodiscard]] std::string reason() const {
    if (!at_least_one) return "infeasible: delta n / ell < 1";
    if (!family_large_enough) return "infeasible: family too small";
    if (!reservoir_large_enough) return "infeasible: reservoir too small for nu per block";
    return "feasible";
  }
};

/// 1 <= floor(delta n / ell) <= |family| and nu floor(delta n / ell) <= |V2|.
inline FeasibilityReport feasibility(const BridgeConfig& config, std::size_t family_size,
                                     std::size_t reservoir_size, std::size_t n) {
  FeasibilityReport r;
  r.blocks = config.blocks(n);
  r.at_least_one = r.blocks >= 1;
  r.family_large_enough = r.blocks <= family_size;
  r.reservoir_large_enough = config.nu * r.blocks <= reservoir_size;
  return r;
}

/// Natural logs of the asymptotic parameter choices and the constraint set
/// they are meant to satisfy. The unknown absolute constant C6 is taken as 1.
struct ScheduleReport {
  double ln_ell = 0.0;
  double ln_nu = 0.0;
  double ln_delta = 0.0;
  double ln_f = 0.0;  ///< ln f(ell, eta) = -1000 zeta2/sqrt(eta) + (3 ln eta - 7 ln ell)/2
  bool nu_upper_ok = false;      ///< zeta1 (ell eta)^2 / 11 >= nu
  bool nu_lower_ok = false;      ///< nu >= 5 / (C6 ell^2 f)
  bool nu_lower_eta_ok = false;  ///< nu >= 5 / (C6 ell^2 eta f), the mean-bound form
  bool delta_terminal_ok = false;   ///< delta <= C6 f ell / 2
  bool delta_reservoir_ok = false;  ///< nu delta / ell <= zeta1 eta / 2
  bool ell_large_ok = false;        ///< ell >= zeta2 / eta^{3/2} and ell >= zeta2^2 / eta

  [[nodiscard]] bool all_ok() const noexcept {
    return nu_upper_ok && nu_lower_ok && nu_lower_eta_ok && delta_terminal_ok &&
           delta_reservoir_ok && ell_large_ok;
  }
};

namespace detail {

/// ln ceil(e^x), exact while e^x is representable.
inline double ln_ceil_exp(double x) {
  if (x < 700.0) return std::log(std::ceil(std::exp(x)));
  return x;
}

/// ln floor(e^x), or -inf when the floor is zero.
inline double ln_floor_exp(double x) {
  if (x < 700.0) {
    const double f = std::floor(std::exp(x));
    return f > 0.0 ? std::log(f) : -std::numeric_limits<double>::infinity();
  }
  return x;
}

}  // namespace detail

/// ln f(ell, eta) = -1000 zeta2 / sqrt(eta) + (3 ln eta - 7 ln ell) / 2.
inline double log_f(double ln_ell, double eta, double zeta2) {
  return -1000.0 * zeta2 / std::sqrt(eta) + (3.0 * std::log(eta) - 7.0 * ln_ell) / 2.0;
}

/// ell = ceil(e^{2001 zeta2 / sqrt eta}), nu = floor(zeta1 (ell eta)^2 / 11),
/// delta = e^{-7000 zeta2 / sqrt eta}, all as natural logarithms.
inline ScheduleReport asymptotic_schedule(double eta, double zeta1, double zeta2) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  if (!(zeta1 > 0.0 && zeta1 < 1.0)) throw std::invalid_argument("zeta1 must lie in (0, 1)");
  if (!(zeta2 > 0.0)) throw std::invalid_argument("zeta2 must be positive");
  constexpr double ln_c6 = 0.0;
  const double root = std::sqrt(eta);
  const double le = std::log(eta);
  ScheduleReport s;
  s.ln_ell = detail::ln_ceil_exp(2001.0 * zeta2 / root);
  const double ln_nu_real = std::log(zeta1) + 2.0 * (s.ln_ell + le) - std::log(11.0);
  s.ln_nu = detail::ln_floor_exp(ln_nu_real);
  s.ln_delta = -7000.0 * zeta2 / root;
  s.ln_f = log_f(s.ln_ell, eta, zeta2);
  s.nu_upper_ok = ln_nu_real >= s.ln_nu;
  s.nu_lower_ok = s.ln_nu >= std::log(5.0) - ln_c6 - 2.0 * s.ln_ell - s.ln_f;
  s.nu_lower_eta_ok = s.ln_nu >= std::log(5.0) - ln_c6 - 2.0 * s.ln_ell - le - s.ln_f;
  s.delta_terminal_ok = s.ln_delta <= ln_c6 + s.ln_f + s.ln_ell - std::log(2.0);
  s.delta_reservoir_ok =
      s.ln_nu + s.ln_delta - s.ln_ell <= std::log(zeta1) + le - std::log(2.0);
  s.ell_large_ok = s.ln_ell >= std::log(zeta2) - 1.5 * le &&
                   s.ln_ell >= 2.0 * std::log(zeta2) - le;
  return s;
}

/// One piece of a family path kept in the stitched path, from position
/// `first` to position `last` (either direction).
struct RetainedSegment {
  std::size_t family_index = 0;
  std::size_t first = 0;
  std::size_t last = 0;

  [[nodiscard]] std::size_t length() const noexcept {
    return first > last ? first - last : last - first;
  }
};

struct BridgeStep {
  std::vector<std::pair<Vertex, Vertex>> predecessors;  ///< (open-end vertex, reservoir vertex)
  Vertex attach = 0;   ///< open-end vertex of the bridge
  Vertex middle = 0;   ///< reservoir vertex of the bridge
  Vertex landing = 0;  ///< end-segment vertex of the target path
  std::size_t target = 0;
  double weight = 0.0;
  std::size_t dropped = 0;  ///< edges cut from the end of the previous path
  std::size_t terminals_before = 0;
  std::size_t terminals_after = 0;
  std::size_t reservoir_before = 0;
  std::size_t reservoir_after = 0;
};

struct BridgeResult {
  Path gamma;
  FeasibilityReport feasibility;
  std::size_t iterations = 0;
  std::vector<double> bridge_weights;
  std::vector<std::size_t> segment_lengths;
  std::vector<RetainedSegment> segments;
  std::vector<BridgeStep> steps;
  std::optional<PathStats> stats;  ///< empty for an infeasible run

  [[nodiscard]] std::size_t length() const noexcept { return gamma.length(); }
  [[nodiscard]] double average() const noexcept {
    return stats ? stats->average : std::numeric_limits<double>::infinity();
  }
};

namespace detail {

/// Strict "lighter than" on edges: weight, then the unordered pair.
struct EdgeKey {
  double weight = std::numeric_limits<double>::infinity();
  Edge edge{};

  [[nodiscard]] bool lighter_than(const EdgeKey& other) const noexcept {
    return std::tie(weight, edge) < std::tie(other.weight, other.edge);
  }
};

}  // namespace detail

/// Runs the stitching on `family` (paths of length ell inside [0, n_star)),
/// with reservoir V2 = [n_star, n). Deterministic: every choice is a
/// lightest edge with ties broken by the vertex pair.
inline BridgeResult run_bridge(const Instance& instance, const DisjointFamily& family,
                               const BridgeConfig& config) {
  config.validate();
  const std::size_t n = instance.size();
  const std::size_t ell = config.ell;
  const std::size_t seg = config.end_segment();
  BridgeResult out;
  out.feasibility = feasibility(config, family.paths.size(), n - family.n_star, n);
  if (!out.feasibility.feasible()) return out;

  for (const auto& p : family.paths) {
    if (p.length() != ell) throw std::invalid_argument("family paths must have length ell");
    for (Vertex v : p.vertices)
      if (v >= family.n_star) throw std::invalid_argument("family path leaves the pool");
  }

  // Terminal vertices: end segments of every family path except the first.
  struct Terminal {
    std::size_t path;
    std::size_t position;
  };
  std::vector<std::optional<Terminal>> terminal(n);
  std::size_t terminal_count = 0;
  for (std::size_t j = 1; j < family.paths.size(); ++j) {
    const auto& vs = family.paths[j].vertices;
    for (std::size_t i = 0; i < seg; ++i) {
      terminal[vs[i]] = Terminal{j, i};
      terminal[vs[ell - i]] = Terminal{j, ell - i};
    }
    terminal_count += 2 * seg;
  }
  std::vector<bool> in_reservoir(n, false);
  std::size_t reservoir_count = n - family.n_star;
  for (std::size_t v = family.n_star; v < n; ++v) in_reservoir[v] = true;

  std::vector<Vertex> gamma = family.paths.front().vertices;
  out.segments.push_back({0, 0, ell});

  const std::size_t rounds = out.feasibility.blocks - 1;
  for (std::size_t round = 0; round < rounds; ++round) {
    BridgeStep step;
    step.terminals_before = terminal_count;
    step.reservoir_before = reservoir_count;
    const std::size_t open_from = gamma.size() - seg;

    // Step 1: nu lightest open-end/reservoir edges move reservoir vertices
    // into the predecessor pool.
    for (std::size_t r = 0; r < config.nu; ++r) {
      detail::EdgeKey best;
      Vertex best_open = 0;
      Vertex best_res = 0;
      for (std::size_t gi = open_from; gi < gamma.size(); ++gi) {
        const Vertex g = gamma[gi];
        for (std::size_t m = family.n_star; m < n; ++m) {
          if (!in_reservoir[m]) continue;
          const auto mv = static_cast<Vertex>(m);
          const detail::EdgeKey key{instance.weight(g, mv), Edge(g, mv)};
          if (key.lighter_than(best)) {
            best = key;
            best_open = g;
            best_res = mv;
          }
        }
      }
      if (!std::isfinite(best.weight)) throw invariant_violation("reservoir exhausted");
      in_reservoir[best_res] = false;
      --reservoir_count;
      step.predecessors.emplace_back(best_open, best_res);
    }

    // Step 2: lightest edge between the predecessor pool and the terminals.
    detail::EdgeKey best;
    std::size_t best_pred = 0;
    Vertex best_term = 0;
    for (std::size_t pi = 0; pi < step.predecessors.size(); ++pi) {
      const Vertex p = step.predecessors[pi].second;
      for (std::size_t t = 0; t < family.n_star; ++t) {
        if (!terminal[t]) continue;
        const auto tv = static_cast<Vertex>(t);
        const detail::EdgeKey key{instance.weight(p, tv), Edge(p, tv)};
        if (key.lighter_than(best)) {
          best = key;
          best_pred = pi;
          best_term = tv;
        }
      }
    }
    if (!std::isfinite(best.weight)) throw invariant_violation("terminal set exhausted");

    // Step 3: bridge attach -> middle -> landing, keep gamma up to attach and
    // the target path from landing to its far endpoint.
    const auto [attach, middle] = step.predecessors[best_pred];
    const Terminal hit = *terminal[best_term];
    const auto& target = family.paths[hit.path].vertices;
    const bool head = hit.position < seg;
    const std::size_t far = head ? ell : 0;

    const auto attach_it = std::find(gamma.begin() + static_cast<std::ptrdiff_t>(open_from),
                                     gamma.end(), attach);
    if (attach_it == gamma.end()) throw invariant_violation("attach vertex left the open end");
    const auto keep = static_cast<std::size_t>(attach_it - gamma.begin()) + 1;
    step.dropped = gamma.size() - keep;
    gamma.resize(keep);
    auto& prev = out.segments.back();
    prev.last = prev.first <= prev.last ? prev.last - step.dropped : prev.last + step.dropped;

    gamma.push_back(middle);
    if (head) {
      for (std::size_t i = hit.position; i <= ell; ++i) gamma.push_back(target[i]);
    } else {
      for (std::size_t i = hit.position + 1; i-- > 0;) gamma.push_back(target[i]);
    }
    out.segments.push_back({hit.path, hit.position, far});

    // Step 4: retire both end segments of the target.
    for (std::size_t i = 0; i < seg; ++i) {
      terminal[target[i]].reset();
      terminal[target[ell - i]].reset();
    }
    terminal_count -= 2 * seg;

    step.attach = attach;
    step.middle = middle;
    step.landing = best_term;
    step.target = hit.path;
    step.weight = instance.weight(attach, middle) + best.weight;
    step.terminals_after = terminal_count;
    step.reservoir_after = reservoir_count;
    out.bridge_weights.push_back(step.weight);
    out.steps.push_back(std::move(step));
  }

  out.iterations = rounds;
  out.gamma = Path(std::move(gamma));
  for (const auto& s : out.segments) out.segment_lengths.push_back(s.length());
  out.stats = path_stats(instance, out.gamma);
  return out;
}

struct BridgeAudit {
  std::size_t length = 0;
  double average = 0.0;
  double bridge_total = 0.0;
  double bridge_budget = 0.0;      ///< 3 ell eta floor(delta n / ell)
  bool bridge_event = false;       ///< bridge_total <= bridge_budget
  double average_target = 0.0;     ///< 1/e + 12 eta
  bool average_within_target = false;
  double max_segment_excess = 0.0; ///< max over segments of W - (lambda l_i + 2 zeta2/sqrt eta)
};

/// Recomputes the stitched path from raw weights and checks every structural
/// property; a failure throws invariant_violation. The bridge-weight event and
/// the average-weight target are reported only.
inline BridgeAudit audit_bridge(const BridgeResult& result, const Instance& instance,
                                const DisjointFamily& family, const BridgeConfig& config,
                                const GoodSpec& good) {
  if (result.gamma.empty()) throw std::invalid_argument("audit needs a nonempty result");
  auto fail = [](const std::string& what) { throw invariant_violation("bridge audit: " + what); };
  const std::size_t n = instance.size();
  const std::size_t ell = config.ell;
  const std::size_t seg = config.end_segment();
  const std::size_t k = result.feasibility.blocks;

  if (!validate_path(instance, result.gamma).ok()) fail("output is not a simple path");
  if (result.iterations != k - 1) fail("iteration count differs from floor(delta n / ell) - 1");
  if (result.segments.size() != result.iterations + 1) fail("segment count mismatch");

  // Walk gamma piece by piece: segment, bridge middle, segment, ...
  const auto& g = result.gamma.vertices;
  std::size_t pos = 0;
  std::size_t sum_segments = 0;
  const double lambda = good.lambda();
  const double slack = 2.0 * good.zeta2 / std::sqrt(good.eta);
  BridgeAudit a;
  a.max_segment_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < result.segments.size(); ++s) {
    const auto& piece = result.segments[s];
    const auto& src = family.paths.at(piece.family_index).vertices;
    const std::size_t len = piece.length();
    if (2 * len < ell) fail("retained segment shorter than ell / 2");
    sum_segments += len;
    double w = 0.0;
    for (std::size_t i = 0; i <= len; ++i) {
      const std::size_t at = piece.first <= piece.last ? piece.first + i : piece.first - i;
      if (pos + i >= g.size() || g[pos + i] != src[at]) fail("non-bridge edge not on its family path");
      if (i > 0) w += instance.weight(g[pos + i - 1], g[pos + i]);
    }
    a.max_segment_excess =
        std::max(a.max_segment_excess, w - (lambda * static_cast<double>(len) + slack));
    pos += len + 1;
    if (s + 1 < result.segments.size()) {
      const auto& step = result.steps.at(s);
      if (pos >= g.size() || g[pos] != step.middle) fail("bridge middle out of place");
      if (g[pos] < family.n_star || g[pos] >= n) fail("bridge middle outside the reservoir");
      if (g[pos - 1] != step.attach || g[pos + 1] != step.landing) fail("bridge endpoints mismatch");
      const double bw = instance.weight(g[pos - 1], g[pos]) + instance.weight(g[pos], g[pos + 1]);
      if (bw != result.bridge_weights.at(s)) fail("bridge weight mismatch");
      ++pos;
    }
  }
  if (pos != g.size()) fail("gamma longer than its pieces");
  if (result.gamma.length() != sum_segments + 2 * result.iterations)
    fail("length differs from segment lengths plus bridges");
  if (result.gamma.length() < k * ((ell + 1) / 2)) fail("length below floor(delta n/ell) ceil(ell/2)");

  std::vector<bool> used(n, false);
  for (const auto& step : result.steps) {
    if (step.terminals_before - step.terminals_after != 2 * seg) fail("terminal accounting");
    if (step.reservoir_before - step.reservoir_after != config.nu) fail("reservoir accounting");
    if (step.predecessors.size() != config.nu) fail("predecessor count");
    for (const auto& [open, res] : step.predecessors) {
      if (used[res]) fail("reservoir vertex reused");
      used[res] = true;
    }
  }

  const auto fresh = path_stats(instance, result.gamma);
  if (!result.stats || std::abs(fresh.average - result.stats->average) >
                           1e-12 * std::max(1.0, std::abs(fresh.average)))
    fail("recomputed average differs");
  a.length = fresh.length;
  a.average = fresh.average;
  for (double w : result.bridge_weights) a.bridge_total += w;
  a.bridge_budget = 3.0 * static_cast<double>(ell) * good.eta * static_cast<double>(k);
  a.bridge_event = a.bridge_total <= a.bridge_budget;
  a.average_target = kInvE + 12.0 * good.eta;
  a.average_within_target = a.average <= a.average_target;
  if (a.max_segment_excess > 1e-9) fail("retained segment exceeds its weight bound");
  return a;
}

inline nlohmann::json bridge_result_to_json(const BridgeResult& r,
                                            const std::optional<BridgeAudit>& audit = {}) {
  nlohmann::json j;
  j["feasible"] = r.feasibility.feasible();
  j["feasibility"] = r.feasibility.reason();
  j["blocks"] = r.feasibility.blocks;
  j["length"] = r.length();
  if (r.stats) {
    j["average"] = r.stats->average;
    j["total_weight"] = r.stats->total_weight;
  } else {
    j["average"] = nullptr;  // infinite for an empty result
  }
  j["vertices"] = r.gamma.vertices;
  j["segment_lengths"] = r.segment_lengths;
  auto& log = j["iterations"] = nlohmann::json::array();
  for (const auto& s : r.steps) {
    nlohmann::json it;
    it["attach"] = s.attach;
    it["middle"] = s.middle;
    it["landing"] = s.landing;
    it["target"] = s.target;
    it["weight"] = s.weight;
    it["dropped"] = s.dropped;
    auto& preds = it["predecessors"] = nlohmann::json::array();
    for (const auto& [a, b] : s.predecessors) preds.push_back({a, b});
    log.push_back(std::move(it));
  }
  if (audit) {
    j["audit"] = {{"length", audit->length},
                  {"average", audit->average},
                  {"bridge_total", audit->bridge_total},
                  {"bridge_budget", audit->bridge_budget},
                  {"bridge_event", audit->bridge_event},
                  {"average_target", audit->average_target},
                  {"average_within_target", audit->average_within_target},
                  {"max_segment_excess", audit->max_segment_excess}};
  }
  return j;
}

}  // namespace smf
