#pragma once

/// \file core.hpp
/// Random complete-graph instances with i.i.d. exponential edge weights,
/// simple paths over them and the per-path weight statistics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "smf/errors.hpp"
#include "smf/rng.hpp"

namespace smf {

using Vertex = std::uint32_t;

/// Unordered vertex pair, stored with first < second.
struct Edge {
  Vertex first{};
  Vertex second{};

  constexpr Edge() = default;
  constexpr Edge(Vertex a, Vertex b) noexcept
      : first(a < b ? a : b), second(a < b ? b : a) {}

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

/// Rank of the pair (i, j), i < j, in lexicographic order over all pairs of
/// an n-vertex graph.
constexpr std::size_t pair_rank(std::size_t n, std::size_t i, std::size_t j) noexcept {
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

/// Weight of edge (u, v) in the instance generated from (n, mean, seed),
/// computed without materializing the instance.
inline double edge_weight_for(std::size_t n, double mean, std::uint64_t seed, Vertex u,
                              Vertex v) noexcept {
  const Edge e(u, v);
  const CounterRng stream(mix64(seed));
  return -mean * std::log(to_unit_open_closed(stream.at(pair_rank(n, e.first, e.second))));
}

class Instance {
 public:
  /// Weighted K_n from an explicit upper-triangular weight array in pair-rank
  /// order. Used for hand-built fixtures; such instances are not reproducible
  /// from a seed and refuse serialization.
  static Instance from_weights(std::size_t n, std::vector<double> weights) {
    if (n < 2) throw std::invalid_argument("instance needs at least 2 vertices");
    if (weights.size() != n * (n - 1) / 2)
      throw std::invalid_argument("weight array must hold n(n-1)/2 entries");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument("edge weights must be positive and finite");
    Instance inst;
    inst.n_ = n;
    inst.mean_ = 0.0;
    inst.seed_ = 0;
    inst.custom_ = true;
    inst.weights_ = std::move(weights);
    return inst;
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] double mean_param() const noexcept { return mean_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] bool is_custom() const noexcept { return custom_; }

  [[nodiscard]] double weight(Vertex u, Vertex v) const noexcept {
    const Edge e(u, v);
    return weights_[pair_rank(n_, e.first, e.second)];
  }

  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

  friend Instance generate_instance(std::size_t n, double mean_param, std::uint64_t seed);

 private:
  Instance() = default;

  std::size_t n_ = 0;
  double mean_ = 0.0;
  std::uint64_t seed_ = 0;
  bool custom_ = false;
  std::vector<double> weights_;
};

/// Samples K_n with i.i.d. exponential(mean_param) weights. The weight of the
/// pair with rank r is the r-th draw of the counter stream keyed by the seed.
inline Instance generate_instance(std::size_t n, double mean_param, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("instance needs at least 2 vertices");
  if (!(mean_param > 0.0) || !std::isfinite(mean_param))
    throw std::invalid_argument("mean_param must be positive");
  Instance inst;
  inst.n_ = n;
  inst.mean_ = mean_param;
  inst.seed_ = seed;
  const std::size_t pairs = n * (n - 1) / 2;
  inst.weights_.resize(pairs);
  const CounterRng stream(mix64(seed));
  for (std::size_t r = 0; r < pairs; ++r)
    inst.weights_[r] = -mean_param * std::log(to_unit_open_closed(stream.at(r)));
  return inst;
}

inline Instance generate_instance(std::size_t n, std::uint64_t seed) {
  return generate_instance(n, static_cast<double>(n), seed);
}

inline void to_json(nlohmann::json& j, const Instance& inst) {
  if (inst.is_custom())
    throw std::logic_error("hand-built instances have no seed and cannot be serialized");
  j = nlohmann::json{{"n", inst.size()}, {"mean_param", inst.mean_param()}, {"seed", inst.seed()}};
}

inline Instance instance_from_json(const nlohmann::json& j) {
  return generate_instance(j.at("n").get<std::size_t>(), j.at("mean_param").get<double>(),
                           j.at("seed").get<std::uint64_t>());
}

/// Ordered tuple of distinct vertices. A path of graph-length m has m + 1
/// entries.
struct Path {
  std::vector<Vertex> vertices;

  Path() = default;
  Path(std::initializer_list<Vertex> vs) : vertices(vs) {}
  explicit Path(std::vector<Vertex> vs) : vertices(std::move(vs)) {}

  [[nodiscard]] std::size_t length() const noexcept {
    return vertices.empty() ? 0 : vertices.size() - 1;
  }
  [[nodiscard]] bool empty() const noexcept { return vertices.empty(); }
  [[nodiscard]] Vertex front() const { return vertices.front(); }
  [[nodiscard]] Vertex back() const { return vertices.back(); }

  [[nodiscard]] std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
      out.emplace_back(vertices[i], vertices[i + 1]);
    return out;
  }

  [[nodiscard]] Path reversed() const {
    return Path(std::vector<Vertex>(vertices.rbegin(), vertices.rend()));
  }

  friend auto operator<=>(const Path&, const Path&) = default;
  friend bool operator==(const Path&, const Path&) = default;
};

inline void to_json(nlohmann::json& j, const Path& p) { j = p.vertices; }

struct PathStats {
  std::size_t length = 0;
  double total_weight = 0.0;
  double average = std::numeric_limits<double>::infinity();
  double max_deviation = 0.0;
};

/// Statistics of an edge-weight sequence. M is the largest gap between a
/// partial sum and the straight line from 0 to the total.
inline PathStats stats_from_weights(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("average undefined for zero-length path");
  PathStats s;
  s.length = weights.size();
  double total = 0.0;
  for (double w : weights) total += w;
  s.total_weight = total;
  s.average = total / static_cast<double>(s.length);
  const double m = static_cast<double>(s.length);
  double partial = 0.0;
  double dev = 0.0;
  for (std::size_t k = 1; k <= s.length; ++k) {
    partial += weights[k - 1];
    dev = std::max(dev, std::abs(partial - (static_cast<double>(k) / m) * total));
  }
  s.max_deviation = dev;
  return s;
}

enum class ViolationKind { duplicate_vertex, out_of_range };

struct PathViolation {
  ViolationKind kind;
  std::size_t position;
  Vertex vertex;
};

struct ValidationReport {
  std::vector<PathViolation> violations;
  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

inline ValidationReport validate_path(std::size_t n, const Path& path) {
  ValidationReport report;
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < path.vertices.size(); ++i) {
    const Vertex v = path.vertices[i];
    if (v >= n) {
      report.violations.push_back({ViolationKind::out_of_range, i, v});
    } else if (seen[v]) {
      report.violations.push_back({ViolationKind::duplicate_vertex, i, v});
    } else {
      seen[v] = true;
    }
  }
  return report;
}

inline ValidationReport validate_path(const Instance& instance, const Path& path) {
  return validate_path(instance.size(), path);
}

/// Edge weights along the path, in path order.
inline std::vector<double> path_weights(const Instance& instance, const Path& path) {
  std::vector<double> out;
  out.reserve(path.length());
  for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i)
    out.push_back(instance.weight(path.vertices[i], path.vertices[i + 1]));
  return out;
}

inline PathStats path_stats(const Instance& instance, const Path& path) {
  const auto report = validate_path(instance, path);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw invalid_path(std::string(v.kind == ViolationKind::duplicate_vertex ? "duplicate"
                                                                             : "out-of-range") +
                       " vertex " + std::to_string(v.vertex) + " at position " +
                       std::to_string(v.position));
  }
  if (path.length() == 0) throw std::invalid_argument("average undefined for zero-length path");
  const auto w = path_weights(instance, path);
  return stats_from_weights(w);
}

}  // namespace smf
