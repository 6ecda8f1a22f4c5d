#pragma once

// Generators and independent reference implementations shared by the unit
// and acceptance suites. Nothing here calls the search or DP code it is used
// to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "smf/core.hpp"
#include "smf/rng.hpp"

namespace smf::testing {

/// Every ordered simple path with `len` edges, by plain recursion with no
/// pruning. Visits paths in lexicographic order.
template <class Visit>
void for_each_simple_path(std::size_t n, std::size_t len, Visit&& visit) {
  std::vector<Vertex> stack;
  std::vector<bool> used(n, false);
  auto rec = [&](auto&& self) -> void {
    if (stack.size() == len + 1) {
      visit(stack);
      return;
    }
    for (Vertex u = 0; u < n; ++u) {
      if (used[u]) continue;
      used[u] = true;
      stack.push_back(u);
      self(self);
      stack.pop_back();
      used[u] = false;
    }
  };
  rec(rec);
}

inline std::vector<Path> all_simple_paths(std::size_t n, std::size_t len) {
  std::vector<Path> out;
  for_each_simple_path(n, len, [&](const std::vector<Vertex>& p) { out.emplace_back(p); });
  return out;
}

/// Sums weights along the path in order.
inline double brute_weight(const Instance& inst, const std::vector<Vertex>& p) {
  double w = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) w += inst.weight(p[i - 1], p[i]);
  return w;
}

/// min over all simple paths with m edges of the total weight, m in [1, n-1].
inline std::vector<double> brute_min_weights(const Instance& inst) {
  const std::size_t n = inst.size();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (std::size_t m = 1; m < n; ++m)
    for_each_simple_path(n, m, [&](const std::vector<Vertex>& p) {
      best[m] = std::min(best[m], brute_weight(inst, p));
    });
  return best;
}

/// Uniform random simple path with `len` edges in K_n (partial Fisher-Yates).
inline Path random_simple_path(std::size_t n, std::size_t len, CounterRng& rng) {
  std::vector<Vertex> ids(n);
  std::iota(ids.begin(), ids.end(), Vertex{0});
  for (std::size_t i = 0; i <= len; ++i) std::swap(ids[i], ids[i + rng.below(n - i)]);
  ids.resize(len + 1);
  return Path(std::move(ids));
}

/// Erdos-Renyi G(n, p) edge list, each pair (i < j) kept independently.
inline std::vector<std::pair<std::size_t, std::size_t>> erdos_renyi(std::size_t n, double p,
                                                                    std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() <= p) edges.emplace_back(i, j);
  return edges;
}

/// Size of a maximum independent set by exhaustive subset scan (n <= 20).
inline std::size_t max_independent_set(std::size_t n,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::size_t best = 0;
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    bool ok = true;
    for (const auto& [a, b] : edges)
      if ((s >> a & 1u) && (s >> b & 1u)) {
        ok = false;
        break;
      }
    if (ok) best = std::max<std::size_t>(best, static_cast<std::size_t>(__builtin_popcount(s)));
  }
  return best;
}

// Two paths whose common edges form the runs (v3, v4) and (v6, v7, v8).
// Vertex labels: v1..v9 -> 0..8, v1' -> 9, v3' -> 10, v5' -> 11, v9' -> 12.
inline Path figure_one_p() { return Path({0, 1, 2, 3, 4, 5, 6, 7, 8}); }
inline Path figure_one_q() { return Path({9, 1, 10, 2, 3, 11, 5, 6, 7, 12}); }

// A length-8 pair whose intersection has two components, v2-v3-v4 and
// v6-v7-v8, joined along p4 by v4-v5-v6 and along p3 by v4-v5'-v6.
// Labels: v1..v9 -> 0..8, v1' -> 9, v5' -> 10, v9' -> 11.
inline Path figure_two_p4() { return Path({0, 1, 2, 3, 4, 5, 6, 7, 8}); }
inline Path figure_two_p3() { return Path({9, 1, 2, 3, 10, 5, 6, 7, 11}); }

/// K_{m+1} in which the path 0-1-...-m carries `chain` and every other edge
/// weighs `other`.
inline Instance chain_instance(const std::vector<double>& chain, double other = 1000.0) {
  const std::size_t n = chain.size() + 1;
  std::vector<double> w(n * (n - 1) / 2, other);
  for (std::size_t i = 0; i < chain.size(); ++i) w[pair_rank(n, i, i + 1)] = chain[i];
  return Instance::from_weights(n, std::move(w));
}

inline Path chain_path(std::size_t m) {
  std::vector<Vertex> v(m + 1);
  std::iota(v.begin(), v.end(), Vertex{0});
  return Path(std::move(v));
}

}  // namespace smf::testing
