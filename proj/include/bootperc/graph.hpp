#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bootperc/model.hpp"
#include "bootperc/rng.hpp"

namespace bootperc {

/// Raised when a requested instance would not fit the configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph over [0, n1 + n2) in compressed sparse row form.
/// Neighbour lists are sorted ascending. Immutable once built.
class SbmGraph {
 public:
  SbmGraph() = default;

  /// Build from an explicit edge list. Rejects self-loops, out-of-range endpoints and
  /// duplicate edges (in either orientation).
  static SbmGraph from_edges(std::int64_t n1, std::int64_t n2, std::span<const Edge> edges) {
    const std::int64_t n = n1 + n2;
    if (n1 < 0 || n2 < 0) throw std::invalid_argument("SbmGraph: negative community size");
    for (const auto& [u, v] : edges) {
      if (u == v) throw std::invalid_argument("SbmGraph: self-loop at node " + std::to_string(u));
      if (u >= n || v >= n) throw std::invalid_argument("SbmGraph: endpoint out of range");
    }
    SbmGraph g = build(n1, n2, edges);
    for (std::int64_t v = 0; v < n; ++v) {
      auto adj = g.neighbors(static_cast<NodeId>(v));
      if (std::adjacent_find(adj.begin(), adj.end()) != adj.end()) {
        throw std::invalid_argument("SbmGraph: duplicate edge at node " + std::to_string(v));
      }
    }
    return g;
  }

  std::int64_t n1() const noexcept { return n1_; }
  std::int64_t n2() const noexcept { return n2_; }
  std::int64_t num_nodes() const noexcept { return n1_ + n2_; }
  std::int64_t num_edges() const noexcept { return static_cast<std::int64_t>(targets_.size() / 2); }

  Community community(NodeId v) const noexcept {
    return static_cast<std::int64_t>(v) < n1_ ? Community::one : Community::two;
  }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }

  std::size_t degree(NodeId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

  /// Symmetry, no self-loops, no duplicates. Linear-logarithmic; meant for tests.
  bool check_invariants() const {
    for (std::int64_t v = 0; v < num_nodes(); ++v) {
      auto adj = neighbors(static_cast<NodeId>(v));
      if (!std::is_sorted(adj.begin(), adj.end())) return false;
      if (std::adjacent_find(adj.begin(), adj.end()) != adj.end()) return false;
      for (NodeId u : adj) {
        if (u == v) return false;
        auto back = neighbors(u);
        if (!std::binary_search(back.begin(), back.end(), static_cast<NodeId>(v))) return false;
      }
    }
    return true;
  }

  friend bool operator==(const SbmGraph&, const SbmGraph&) = default;

 private:
  template <class Edges>
  static SbmGraph build(std::int64_t n1, std::int64_t n2, const Edges& edges) {
    SbmGraph g;
    g.n1_ = n1;
    g.n2_ = n2;
    const auto n = static_cast<std::size_t>(n1 + n2);
    g.offsets_.assign(n + 1, 0);
    for (const auto& [u, v] : edges) {
      ++g.offsets_[u + 1];
      ++g.offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.targets_.resize(g.offsets_[n]);
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [u, v] : edges) {
      g.targets_[cursor[u]++] = v;
      g.targets_[cursor[v]++] = u;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
                g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
    }
    return g;
  }

  friend SbmGraph generate_graph(const ModelParams&, std::uint64_t, double);

  std::int64_t n1_ = 0;
  std::int64_t n2_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> targets_;
};

/// Expected number of edges of G(n1, n2, p1, p2, q).
inline double expected_edge_count(const ModelParams& m) {
  const auto n1 = static_cast<double>(m.n1);
  const auto n2 = static_cast<double>(m.n2);
  return m.p1 * n1 * (n1 - 1) / 2 + m.p2 * n2 * (n2 - 1) / 2 + m.q * n1 * n2;
}

inline constexpr double kDefaultEdgeCap = 4e8;

namespace detail {

// Bernoulli(p) over the unordered pairs {w < v} of [0, n), offset into the global index
// space. Pair order is (v ascending, then w ascending).
template <class Sink>
void sample_intra_block(std::int64_t n, NodeId offset, double p, SplitMix64& rng, Sink&& sink) {
  if (n < 2 || p <= 0.0) return;
  const GeometricSkipper skipper(p);
  const auto total = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
  std::int64_t v = 1;
  std::int64_t w = -1;
  std::uint64_t consumed = 0;  // pairs passed over so far, guards overflow on huge skips
  while (v < n) {
    const std::uint64_t skip = skipper.next(rng);
    if (skip >= total - std::min(consumed, total)) return;
    consumed += skip + 1;
    w += 1 + static_cast<std::int64_t>(skip);
    while (w >= v && v < n) {
      w -= v;
      ++v;
    }
    if (v < n) sink(static_cast<NodeId>(offset + w), static_cast<NodeId>(offset + v));
  }
}

// Bernoulli(q) over the n1 * n2 cross pairs (u in [0, n1), v in [n1, n1 + n2)).
template <class Sink>
void sample_cross_block(std::int64_t n1, std::int64_t n2, double q, SplitMix64& rng, Sink&& sink) {
  if (n1 == 0 || n2 == 0 || q <= 0.0) return;
  const GeometricSkipper skipper(q);
  const auto total = static_cast<std::uint64_t>(n1) * static_cast<std::uint64_t>(n2);
  std::uint64_t k = 0;
  bool first = true;
  while (true) {
    const std::uint64_t skip = skipper.next(rng);
    const std::uint64_t step = first ? skip : skip + 1;
    first = false;
    if (step >= total - k) return;
    k += step;
    const auto u = static_cast<NodeId>(k / static_cast<std::uint64_t>(n2));
    const auto v = static_cast<NodeId>(n1 + static_cast<std::int64_t>(k % static_cast<std::uint64_t>(n2)));
    sink(u, v);
  }
}

}  // namespace detail

/// Sample G(n1, n2, p1, p2, q) with geometric skip sampling in expected O(n + edges) time.
/// Deterministic in `rng_seed`. Throws ResourceError when the expected edge count exceeds
/// `edge_cap`.
inline SbmGraph generate_graph(const ModelParams& m, std::uint64_t rng_seed,
                               double edge_cap = kDefaultEdgeCap) {
  m.validate();
  const double expected = expected_edge_count(m);
  if (expected > edge_cap) {
    throw ResourceError("generate_graph: expected edge count " + std::to_string(expected) +
                        " exceeds cap " + std::to_string(edge_cap));
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(expected + 6 * std::sqrt(expected) + 16));
  auto sink = [&edges](NodeId u, NodeId v) { edges.emplace_back(u, v); };

  SplitMix64 rng_one(derive_key(rng_seed, {0x67, 1}));
  SplitMix64 rng_two(derive_key(rng_seed, {0x67, 2}));
  SplitMix64 rng_cross(derive_key(rng_seed, {0x67, 3}));
  detail::sample_intra_block(m.n1, 0, m.p1, rng_one, sink);
  detail::sample_intra_block(m.n2, static_cast<NodeId>(m.n1), m.p2, rng_two, sink);
  detail::sample_cross_block(m.n1, m.n2, m.q, rng_cross, sink);
  return SbmGraph::build(m.n1, m.n2, edges);
}

/// Seeds of each community, sorted ascending, in the global index space.
struct SeedSet {
  std::vector<NodeId> one;
  std::vector<NodeId> two;

  const std::vector<NodeId>& of(Community c) const noexcept { return c == Community::one ? one : two; }
  std::size_t size() const noexcept { return one.size() + two.size(); }
  bool empty() const noexcept { return size() == 0; }

  /// Split an arbitrary node list by community; rejects duplicates and out-of-range ids.
  static SeedSet from_nodes(std::int64_t n1, std::int64_t n2, std::vector<NodeId> nodes) {
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
      throw std::invalid_argument("SeedSet: duplicate seed");
    }
    SeedSet s;
    for (NodeId v : nodes) {
      if (v >= n1 + n2) throw std::invalid_argument("SeedSet: seed out of range");
      (static_cast<std::int64_t>(v) < n1 ? s.one : s.two).push_back(v);
    }
    return s;
  }

  friend bool operator==(const SeedSet&, const SeedSet&) = default;
};

namespace detail {

// Floyd's algorithm: uniform k-subset of [0, n) in O(k) expected time.
inline std::vector<NodeId> floyd_sample(std::int64_t n, std::int64_t k, SplitMix64& rng) {
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k) * 2);
  for (std::int64_t j = n - k; j < n; ++j) {
    const auto t = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(j + 1)));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<NodeId> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<NodeId> uniform_subset(std::int64_t n, std::int64_t k, NodeId offset,
                                          SplitMix64& rng) {
  std::vector<NodeId> picked;
  if (2 * k <= n) {
    picked = floyd_sample(n, k, rng);
  } else {
    const auto excluded = floyd_sample(n, n - k, rng);
    picked.reserve(static_cast<std::size_t>(k));
    auto it = excluded.begin();
    for (std::int64_t v = 0; v < n; ++v) {
      if (it != excluded.end() && *it == v) {
        ++it;
        continue;
      }
      picked.push_back(static_cast<NodeId>(v));
    }
  }
  for (auto& v : picked) v += offset;
  return picked;
}

}  // namespace detail

/// Uniform without-replacement seed sample of size a_i inside each community.
inline SeedSet sample_seeds(const ModelParams& m, std::uint64_t rng_seed) {
  m.validate();
  SplitMix64 rng_one(derive_key(rng_seed, {0x73, 1}));
  SplitMix64 rng_two(derive_key(rng_seed, {0x73, 2}));
  SeedSet s;
  s.one = detail::uniform_subset(m.n1, m.a1, 0, rng_one);
  s.two = detail::uniform_subset(m.n2, m.a2, static_cast<NodeId>(m.n1), rng_two);
  return s;
}

/// Edge-list dump: header line, then one "u v" line per edge with u < v, ascending u.
inline void write_edge_list(std::ostream& os, const SbmGraph& g, std::uint64_t rng_seed) {
  os << "# sbm n1=" << g.n1() << " n2=" << g.n2() << " seed=" << rng_seed << '\n';
  for (std::int64_t u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) {
      if (v > u) os << u << ' ' << v << '\n';
    }
  }
}

}  // namespace bootperc
