#pragma once

/// \file oracle.hpp
/// Exact answers on small instances: the minimal weight of a simple path of
/// every length by dynamic programming over vertex subsets, the longest
/// lambda-light path read off from it, and exhaustive light-path counts.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "smf/core.hpp"
#include "smf/csv.hpp"
#include "smf/errors.hpp"
#include "smf/light.hpp"

namespace smf {

inline constexpr std::size_t kOracleMaxVertices = 22;

struct OracleTable {
  /// min_weight[m] for m in [0, n-1]; entry 0 is unused and +inf.
  std::vector<double> min_weight;
  /// argmin[m], filled only when paths were requested.
  std::vector<Path> argmin;

  [[nodiscard]] std::size_t max_length() const noexcept {
    return min_weight.empty() ? 0 : min_weight.size() - 1;
  }
};

struct OracleOptions {
  bool with_paths = false;
  bool override_guard = false;
};

/// best[S][v] = lightest simple path visiting exactly S and ending at v.
/// Subsets are processed in increasing numeric order, which is a valid
/// topological order since extending a path only sets more bits.
inline OracleTable build_oracle(const Instance& instance, const OracleOptions& options = {}) {
  const std::size_t n = instance.size();
  if (n > kOracleMaxVertices && !options.override_guard)
    throw resource_limit("exact oracle limited to n <= " + std::to_string(kOracleMaxVertices));
  if (n > 30) throw resource_limit("exact oracle cannot index more than 30 vertices");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<double> best(subsets * n, inf);
  std::vector<std::uint8_t> parent;
  if (options.with_paths) parent.assign(subsets * n, 0xFF);
  for (std::size_t v = 0; v < n; ++v) best[(std::size_t{1} << v) * n + v] = 0.0;

  OracleTable table;
  table.min_weight.assign(n, inf);
  std::vector<std::size_t> arg_state(n, 0);
  for (std::size_t s = 1; s < subsets; ++s) {
    const auto m = static_cast<std::size_t>(std::popcount(s)) - 1;
    for (std::size_t v = 0; v < n; ++v) {
      const double here = best[s * n + v];
      if (here == inf) continue;
      if (m >= 1 && here < table.min_weight[m]) {
        table.min_weight[m] = here;
        arg_state[m] = s * n + v;
      }
      for (std::size_t u = 0; u < n; ++u) {
        const std::size_t bit = std::size_t{1} << u;
        if (s & bit) continue;
        const double cand = here + instance.weight(static_cast<Vertex>(v), static_cast<Vertex>(u));
        double& slot = best[(s | bit) * n + u];
        if (cand < slot) {
          slot = cand;
          if (options.with_paths) parent[(s | bit) * n + u] = static_cast<std::uint8_t>(v);
        }
      }
    }
  }

  if (options.with_paths) {
    table.argmin.resize(n);
    for (std::size_t m = 1; m < n; ++m) {
      if (table.min_weight[m] == inf) continue;
      std::size_t s = arg_state[m] / n;
      std::size_t v = arg_state[m] % n;
      std::vector<Vertex> rev{static_cast<Vertex>(v)};
      while (std::popcount(s) > 1) {
        const std::size_t p = parent[s * n + v];
        s &= ~(std::size_t{1} << v);
        v = p;
        rev.push_back(static_cast<Vertex>(v));
      }
      table.argmin[m] = Path(std::vector<Vertex>(rev.rbegin(), rev.rend()));
    }
  }
  return table;
}

/// Longest m with min_weight[m] <= lambda m, or 0.
inline std::size_t read_L(const OracleTable& table, double lambda) {
  for (std::size_t m = table.max_length(); m >= 1; --m)
    if (table.min_weight[m] <= lambda * static_cast<double>(m)) return m;
  return 0;
}

/// Rows (m, min_weight[m]) for m = 1 .. n-1 under a header line.
inline void write_oracle_csv(const OracleTable& table, std::ostream& os) {
  os << "m,min_weight\n";
  for (std::size_t m = 1; m <= table.max_length(); ++m)
    os << CsvRow().add(std::uint64_t{m}).add(table.min_weight[m]).str();
}

namespace detail {

inline void check_enumeration_guard(std::size_t n, std::size_t ell) {
  double count = 1.0;
  for (std::size_t i = 0; i <= ell; ++i) count *= static_cast<double>(n);
  if (count > 1e9) throw resource_limit("n^(ell+1) exceeds the enumeration guard of 1e9");
}

class LightEnumerator {
 public:
  LightEnumerator(const Instance& inst, std::size_t ell, double threshold,
                  std::function<void(const std::vector<Vertex>&)> visit)
      : inst_(inst), ell_(ell), threshold_(threshold), visit_(std::move(visit)),
        used_(inst.size(), false) {}

  void run() {
    for (Vertex v = 0; v < inst_.size(); ++v) {
      stack_.assign(1, v);
      used_[v] = true;
      descend(0.0);
      used_[v] = false;
    }
  }

 private:
  void descend(double w) {
    if (stack_.size() == ell_ + 1) {
      visit_(stack_);
      return;
    }
    const Vertex tail = stack_.back();
    for (Vertex u = 0; u < inst_.size(); ++u) {
      if (used_[u]) continue;
      const double next = w + inst_.weight(tail, u);
      if (next > threshold_) continue;  // weights are positive
      used_[u] = true;
      stack_.push_back(u);
      descend(next);
      stack_.pop_back();
      used_[u] = false;
    }
  }

  const Instance& inst_;
  std::size_t ell_;
  double threshold_;
  std::function<void(const std::vector<Vertex>&)> visit_;
  std::vector<bool> used_;
  std::vector<Vertex> stack_;
};

}  // namespace detail

/// Every ordered (lambda, C)-light path of length ell, in lexicographic order.
inline std::vector<Path> enumerate_light_paths(const Instance& instance, std::size_t ell,
                                               const LightSpec& spec) {
  spec.validate();
  if (ell < 1) throw std::invalid_argument("path length must be >= 1");
  detail::check_enumeration_guard(instance.size(), ell);
  std::vector<Path> out;
  const double threshold = spec.threshold(ell);
  if (!(threshold > 0.0)) return out;
  detail::LightEnumerator(instance, ell, threshold,
                          [&](const std::vector<Vertex>& p) { out.emplace_back(p); })
      .run();
  return out;
}

inline std::uint64_t exhaustive_light_count(const Instance& instance, std::size_t ell,
                                            const LightSpec& spec) {
  spec.validate();
  if (ell < 1) throw std::invalid_argument("path length must be >= 1");
  detail::check_enumeration_guard(instance.size(), ell);
  const double threshold = spec.threshold(ell);
  if (!(threshold > 0.0)) return 0;
  std::uint64_t count = 0;
  detail::LightEnumerator(instance, ell, threshold, [&](const std::vector<Vertex>&) { ++count; })
      .run();
  return count;
}

}  // namespace smf
