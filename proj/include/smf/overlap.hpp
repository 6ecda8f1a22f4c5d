#pragma once

/// \file overlap.hpp
/// Overlap combinatorics of path pairs and extraction of a large family of
/// pairwise vertex-disjoint good paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "smf/core.hpp"
#include "smf/errors.hpp"
#include "smf/light.hpp"

namespace smf {

struct OverlapProfile {
  std::size_t theta = 0;            ///< maximal shared segments
  std::size_t shared_edges = 0;     ///< |E(p) n E(q)|
  std::size_t shared_vertices = 0;  ///< vertices covered by shared edges, |V(S)|
  std::vector<std::vector<Vertex>> components;  ///< shared segments in order along p
};

namespace detail {

inline std::vector<Edge> sorted_edges(const Path& p) {
  auto e = p.edges();
  std::sort(e.begin(), e.end());
  return e;
}

inline bool contains(const std::vector<Edge>& sorted, const Edge& e) {
  return std::binary_search(sorted.begin(), sorted.end(), e);
}

inline std::vector<Vertex> sorted_vertices(const Path& p) {
  auto v = p.vertices;
  std::sort(v.begin(), v.end());
  return v;
}

template <class T>
std::size_t intersection_size(const std::vector<T>& a, const std::vector<T>& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t c = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++c;
      ++i;
      ++j;
    }
  }
  return c;
}

template <class T>
std::vector<T> sorted_union(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace detail

/// Edges are compared as unordered pairs; components are maximal runs of
/// shared edges along p.
inline OverlapProfile overlap_profile(const Path& p, const Path& q) {
  OverlapProfile prof;
  const auto qe = detail::sorted_edges(q);
  std::vector<Vertex> current;
  std::set<Vertex> covered;
  for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i) {
    const Edge e(p.vertices[i], p.vertices[i + 1]);
    if (detail::contains(qe, e)) {
      if (current.empty()) current.push_back(p.vertices[i]);
      current.push_back(p.vertices[i + 1]);
      ++prof.shared_edges;
      covered.insert(e.first);
      covered.insert(e.second);
    } else if (!current.empty()) {
      prof.components.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) prof.components.push_back(std::move(current));
  prof.theta = prof.components.size();
  prof.shared_vertices = covered.size();
  return prof;
}

/// Recounts |V(S)| for S = E(p) n E(q) from the edge set alone and compares
/// it with |S| + theta(p, q).
inline bool vs_identity_holds(const Path& p, const Path& q) {
  const auto pe = detail::sorted_edges(p);
  const auto qe = detail::sorted_edges(q);
  std::vector<Edge> shared;
  std::set_intersection(pe.begin(), pe.end(), qe.begin(), qe.end(), std::back_inserter(shared));
  if (shared.empty()) throw std::invalid_argument("paths share no edge");
  std::set<Vertex> vs;
  for (const auto& e : shared) {
    vs.insert(e.first);
    vs.insert(e.second);
  }
  const auto prof = overlap_profile(p, q);
  return vs.size() == shared.size() + prof.theta;
}

enum class CheckOutcome { holds, violated, not_applicable };

/// Both sides of the vertex-count inequality for a quadruple of equal-length
/// paths:
///   |V(p3) n V(p4)| + |V(p3 u p4) n V(p1 u p2)| >= j + j' + 2
/// with j = |E(p3) n E(p4)| and j' = |E(p1 u p2) n E(p3 u p4)|.
struct VertexCountCheck {
  CheckOutcome outcome = CheckOutcome::not_applicable;
  std::size_t lhs = 0;
  std::size_t rhs = 0;
  std::size_t j = 0;
  std::size_t j_prime = 0;
};

inline VertexCountCheck count_vertices_check(const Path& p1, const Path& p2, const Path& p3,
                                             const Path& p4) {
  VertexCountCheck c;
  const std::size_t ell = p1.length();
  if (p2.length() != ell || p3.length() != ell || p4.length() != ell || ell == 0) return c;
  const auto v3 = detail::sorted_vertices(p3);
  const auto v4 = detail::sorted_vertices(p4);
  const std::size_t common34 = detail::intersection_size(v3, v4);
  if (common34 == 0) return c;
  const auto e12 = detail::sorted_union(detail::sorted_edges(p1), detail::sorted_edges(p2));
  const auto e34 = detail::sorted_union(detail::sorted_edges(p3), detail::sorted_edges(p4));
  c.j = 2 * ell - e34.size();
  c.j_prime = detail::intersection_size(e12, e34);
  if (c.j_prime < 1) return c;
  const auto v12 = detail::sorted_union(detail::sorted_vertices(p1), detail::sorted_vertices(p2));
  const auto v34 = detail::sorted_union(v3, v4);
  c.lhs = common34 + detail::intersection_size(v34, v12);
  c.rhs = c.j + c.j_prime + 2;
  c.outcome = c.lhs >= c.rhs ? CheckOutcome::holds : CheckOutcome::violated;
  return c;
}

/// One edge of p4 from each stretch of p4 that runs between two different
/// components of the graph p3 n p4 (its first edge). Removing these leaves
/// p3 u p4 acyclic; there are (components - 1) of them.
inline std::vector<Edge> acyclic_cut_edges(const Path& p3, const Path& p4) {
  const auto v3 = detail::sorted_vertices(p3);
  const auto e3 = detail::sorted_edges(p3);
  // Components of p3 n p4 are contiguous along p4: label shared vertices,
  // starting a new label whenever the previous p4 edge is not shared.
  std::vector<std::pair<std::size_t, std::size_t>> marks;  // (position, component)
  std::size_t label = 0;
  bool have_prev = false;
  for (std::size_t i = 0; i < p4.vertices.size(); ++i) {
    if (!std::binary_search(v3.begin(), v3.end(), p4.vertices[i])) {
      continue;
    }
    if (have_prev) {
      const auto [prev_pos, prev_label] = marks.back();
      const bool joined = prev_pos + 1 == i &&
                          detail::contains(e3, Edge(p4.vertices[prev_pos], p4.vertices[i]));
      label = joined ? prev_label : prev_label + 1;
    }
    marks.emplace_back(i, label);
    have_prev = true;
  }
  std::vector<Edge> cuts;
  for (std::size_t m = 1; m < marks.size(); ++m) {
    if (marks[m].second != marks[m - 1].second) {
      const std::size_t pos = marks[m - 1].first;
      cuts.emplace_back(p4.vertices[pos], p4.vertices[pos + 1]);
    }
  }
  return cuts;
}

/// True when the simple graph formed by `edges` has no cycle.
inline bool is_forest(const std::vector<Edge>& edges) {
  std::vector<Vertex> ids;
  for (const auto& e : edges) {
    ids.push_back(e.first);
    ids.push_back(e.second);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::size_t> parent(ids.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto index = [&](Vertex v) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), v) - ids.begin());
  };
  for (const auto& e : edges) {
    const std::size_t a = find(index(e.first));
    const std::size_t b = find(index(e.second));
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

/// Upper bound ell^{3i} n^{ell+1-i-j} on |A_{i,j}(p)|, in log-space.
inline double log_aij_bound(std::size_t ell, std::size_t n, std::size_t i, std::size_t j) {
  const double e = static_cast<double>(ell + 1) - static_cast<double>(i + j);
  return 3.0 * static_cast<double>(i) * std::log(static_cast<double>(ell)) +
         e * std::log(static_cast<double>(n));
}

/// Buckets same-length candidates by (theta, shared edge count) relative to p.
inline std::map<std::pair<std::size_t, std::size_t>, std::size_t> classify_aij(
    const Path& p, const std::vector<Path>& candidates) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> buckets;
  for (const auto& q : candidates) {
    if (q.length() != p.length())
      throw std::invalid_argument("A_ij classification needs equal path lengths");
    const auto prof = overlap_profile(p, q);
    ++buckets[{prof.theta, prof.shared_edges}];
  }
  return buckets;
}

namespace detail {

/// Greedy minimum-degree elimination on a simple graph given as adjacency
/// lists. Ties go to the lowest id.
inline std::vector<std::size_t> greedy_min_degree(std::vector<std::vector<std::size_t>> adj) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> degree(n);
  std::set<std::pair<std::size_t, std::size_t>> queue;
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = adj[v].size();
    queue.emplace(degree[v], v);
  }
  std::vector<bool> removed(n, false);
  std::vector<std::size_t> chosen;
  auto drop = [&](std::size_t v) {
    removed[v] = true;
    queue.erase({degree[v], v});
    for (std::size_t u : adj[v]) {
      if (removed[u]) continue;
      queue.erase({degree[u], u});
      --degree[u];
      queue.emplace(degree[u], u);
    }
  };
  while (!queue.empty()) {
    const std::size_t v = queue.begin()->second;
    chosen.push_back(v);
    const auto neighbors = adj[v];
    drop(v);
    for (std::size_t u : neighbors)
      if (!removed[u]) drop(u);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace detail

/// ceil(|V|^2 / (2|E| + |V|)).
inline std::size_t turan_bound(std::size_t vertices, std::size_t edges) {
  if (vertices == 0) return 0;
  const std::size_t num = vertices * vertices;
  const std::size_t den = 2 * edges + vertices;
  return (num + den - 1) / den;
}

/// Independent set by greedy minimum-degree elimination; its size is at least
/// |V|^2 / (2|E| + |V|).
inline std::vector<std::size_t> turan_independent_set(
    std::size_t vertex_count, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::pair<std::size_t, std::size_t>> norm;
  norm.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a == b) throw std::invalid_argument("self-loop in independent-set input");
    if (a >= vertex_count || b >= vertex_count)
      throw std::invalid_argument("edge endpoint out of range");
    norm.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(norm.begin(), norm.end());
  if (std::adjacent_find(norm.begin(), norm.end()) != norm.end())
    throw std::invalid_argument("duplicate edge in independent-set input");
  std::vector<std::vector<std::size_t>> adj(vertex_count);
  for (auto [a, b] : norm) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  auto chosen = detail::greedy_min_degree(std::move(adj));
#ifndef NDEBUG
  std::vector<bool> in(vertex_count, false);
  for (auto v : chosen) in[v] = true;
  for (auto [a, b] : norm)
    if (in[a] && in[b]) throw invariant_violation("greedy independent set is not independent");
#endif
  return chosen;
}

/// Pairwise vertex-disjoint good paths drawn from the first n_star vertices.
struct DisjointFamily {
  std::vector<Path> paths;
  std::size_t source_count = 0;  ///< good paths found, one orientation each
  std::size_t edge_count = 0;    ///< edges of the intersection graph
  std::size_t n_star = 0;        ///< vertices below this id form the search pool
  bool complete = true;          ///< false when the search budget ran out
};

/// floor((1 - zeta1 eta) n).
inline std::size_t pool_size(std::size_t n, double zeta1, double eta) {
  return static_cast<std::size_t>(std::floor((1.0 - zeta1 * eta) * static_cast<double>(n)));
}

/// Canonical orientation: the lexicographically smaller of p and its reverse.
inline bool is_canonical_orientation(const Path& p) {
  return std::lexicographical_compare(p.vertices.begin(), p.vertices.end(), p.vertices.rbegin(),
                                      p.vertices.rend()) ||
         std::equal(p.vertices.begin(), p.vertices.end(), p.vertices.rbegin());
}

/// Good paths among the pool vertices, one orientation each, sorted.
inline std::vector<Path> find_good_paths(const Instance& instance, const GoodSpec& spec,
                                         std::size_t n_star, std::uint64_t budget,
                                         bool* complete = nullptr) {
  spec.validate();
  SearchOptions opts;
  opts.budget = budget;
  opts.vertex_limit = n_star;
  auto found = search_weight_window(instance, spec.ell, spec.window_low(), spec.window_high(), opts);
  if (complete) *complete = found.complete;
  std::vector<Path> good;
  for (auto& p : found.paths) {
    if (!is_canonical_orientation(p)) continue;
    if (is_good(path_stats(instance, p), spec)) good.push_back(std::move(p));
  }
  return good;
}

/// Builds the vertex-sharing intersection graph over `paths` as adjacency lists.
inline std::vector<std::vector<std::size_t>> intersection_graph(const std::vector<Path>& paths,
                                                                std::size_t n,
                                                                std::size_t* edge_count = nullptr) {
  std::vector<std::vector<std::size_t>> by_vertex(n);
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (Vertex v : paths[i].vertices) by_vertex[v].push_back(i);
  std::vector<std::vector<std::size_t>> adj(paths.size());
  std::vector<std::size_t> mark(paths.size(), static_cast<std::size_t>(-1));
  std::size_t twice_edges = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    mark[i] = i;
    for (Vertex v : paths[i].vertices)
      for (std::size_t j : by_vertex[v])
        if (mark[j] != i) {
          mark[j] = i;
          adj[i].push_back(j);
        }
    std::sort(adj[i].begin(), adj[i].end());
    twice_edges += adj[i].size();
  }
  if (edge_count) *edge_count = twice_edges / 2;
  return adj;
}

/// Searches good paths inside the pool, drops reversed duplicates, links
/// paths that share a vertex and keeps a greedy independent set of the
/// resulting graph.
inline DisjointFamily extract_disjoint_good_paths(const Instance& instance, const GoodSpec& spec,
                                                  double zeta1,
                                                  std::uint64_t budget = 200'000'000) {
  spec.validate();
  if (!(zeta1 > 0.0 && zeta1 < 1.0)) throw std::invalid_argument("zeta1 must lie in (0, 1)");
  DisjointFamily fam;
  fam.n_star = pool_size(instance.size(), zeta1, spec.eta);
  if (fam.n_star < spec.ell + 1)
    throw std::invalid_argument("pool too small for a path of length ell");
  auto good = find_good_paths(instance, spec, fam.n_star, budget, &fam.complete);
  fam.source_count = good.size();
  auto adj = intersection_graph(good, instance.size(), &fam.edge_count);
  for (std::size_t idx : detail::greedy_min_degree(std::move(adj)))
    fam.paths.push_back(std::move(good[idx]));
  return fam;
}

inline nlohmann::json family_to_json(const DisjointFamily& fam, const Instance& instance) {
  nlohmann::json j;
  j["instance"] = instance;
  j["paths"] = fam.paths;
  j["source_count"] = fam.source_count;
  j["edge_count"] = fam.edge_count;
  j["n_star"] = fam.n_star;
  j["complete"] = fam.complete;
  return j;
}

}  // namespace smf
