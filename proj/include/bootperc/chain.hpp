#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bootperc/graph.hpp"
#include "bootperc/model.hpp"
#include "bootperc/rng.hpp"
#include "bootperc/strategy.hpp"

namespace bootperc {

/// Raised when a strategy selects a community whose frontier is empty.
class StrategyFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Snapshot {
  std::int64_t t = 0;
  std::int64_t U1 = 0;
  std::int64_t U2 = 0;
  std::int64_t A1 = 0;
  std::int64_t A2 = 0;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct RunRecord {
  std::int64_t final_active = 0;
  std::int64_t stop_time = 0;
  std::array<std::int64_t, 2> final_by_community{};
  std::vector<std::int64_t> per_generation_sizes;  // cascade mode only
  std::vector<Snapshot> trajectory;
  std::optional<std::int64_t> t_prime;  // hybrid strategy only
  std::uint64_t rng_seed = 0;
  std::string strategy_name;
};

inline void to_json(nlohmann::json& j, const Snapshot& s) {
  j = nlohmann::json::array({s.t, s.U1, s.U2, s.A1, s.A2});
}

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{{"final_active", r.final_active},
                     {"stop_time", r.stop_time},
                     {"final_active_1", r.final_by_community[0]},
                     {"final_active_2", r.final_by_community[1]},
                     {"per_generation_sizes", r.per_generation_sizes},
                     {"trajectory", r.trajectory},
                     {"t_prime", r.t_prime ? nlohmann::json(*r.t_prime) : nlohmann::json(nullptr)},
                     {"rng_seed", r.rng_seed},
                     {"rng_algorithm", kRngAlgorithm},
                     {"strategy", r.strategy_name}};
}

struct ChainOptions {
  std::uint64_t rng_seed = 0;
  std::int64_t trajectory_stride = 64;  // 0 disables trajectory sampling
};

namespace detail {

// Array of node ids with O(1) insert, O(1) removal by id and O(1) uniform pick.
// `pos` is shared by several sets over disjoint node populations.
class IndexedSet {
 public:
  std::int64_t size() const noexcept { return static_cast<std::int64_t>(items_.size()); }
  bool empty() const noexcept { return items_.empty(); }
  const std::vector<NodeId>& items() const noexcept { return items_; }
  NodeId at(std::size_t k) const noexcept { return items_[k]; }

  void insert(NodeId v, std::vector<std::uint32_t>& pos) {
    pos[v] = static_cast<std::uint32_t>(items_.size());
    items_.push_back(v);
  }
  void erase(NodeId v, std::vector<std::uint32_t>& pos) noexcept {
    const std::uint32_t k = pos[v];
    const NodeId last = items_.back();
    items_[k] = last;
    pos[last] = k;
    items_.pop_back();
  }

 private:
  std::vector<NodeId> items_;
};

}  // namespace detail

/// Full chain state after t steps. Marks are kept for inactive nodes only.
class ChainState {
 public:
  ChainState(std::int64_t n1, std::int64_t n2, int r) : n1_(n1), n2_(n2), r_(r) {
    const auto n = static_cast<std::size_t>(n1 + n2);
    marks_.assign(n, 0);
    active_flag_.assign(n, 0);
    frontier_pos_.assign(n, 0);
    inactive_pos_.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
      inactive_[index(community(static_cast<NodeId>(v)))].insert(static_cast<NodeId>(v), inactive_pos_);
    }
  }

  std::int64_t t() const noexcept { return t_; }
  std::int64_t used(Community c) const noexcept { return used_[index(c)]; }
  std::int64_t active(Community c) const noexcept { return active_[index(c)]; }
  std::int64_t frontier_size(Community c) const noexcept { return frontier_[index(c)].size(); }
  std::uint32_t marks(NodeId v) const noexcept { return marks_[v]; }
  bool is_active(NodeId v) const noexcept { return active_flag_[v] != 0; }
  const std::vector<NodeId>& frontier(Community c) const noexcept { return frontier_[index(c)].items(); }
  const std::vector<NodeId>& inactive(Community c) const noexcept { return inactive_[index(c)].items(); }
  std::int64_t n1() const noexcept { return n1_; }
  std::int64_t n2() const noexcept { return n2_; }
  int r() const noexcept { return r_; }

  Community community(NodeId v) const noexcept {
    return static_cast<std::int64_t>(v) < n1_ ? Community::one : Community::two;
  }

  /// Internal consistency: U1 + U2 = t, 0 <= U_i <= A_i <= n_i, frontier sizes A_i - U_i,
  /// inactive marks below r.
  bool check_invariants() const {
    if (used_[0] + used_[1] != t_) return false;
    const std::array<std::int64_t, 2> n{n1_, n2_};
    for (std::size_t i = 0; i < 2; ++i) {
      if (used_[i] < 0 || used_[i] > active_[i] || active_[i] > n[i]) return false;
      if (frontier_[i].size() != active_[i] - used_[i]) return false;
      if (inactive_[i].size() != n[i] - active_[i]) return false;
      for (NodeId v : inactive_[i].items()) {
        if (active_flag_[v] || marks_[v] >= static_cast<std::uint32_t>(r_)) return false;
      }
    }
    return true;
  }

 private:
  template <class Neighborhood>
  friend class BinomialChain;

  void activate(NodeId v) {
    const Community c = community(v);
    active_flag_[v] = 1;
    ++active_[index(c)];
    inactive_[index(c)].erase(v, inactive_pos_);
    frontier_[index(c)].insert(v, frontier_pos_);
  }

  std::int64_t n1_;
  std::int64_t n2_;
  int r_;
  std::int64_t t_ = 0;
  std::array<std::int64_t, 2> used_{};
  std::array<std::int64_t, 2> active_{};
  std::vector<std::uint32_t> marks_;
  std::vector<std::uint8_t> active_flag_;
  std::vector<std::uint32_t> frontier_pos_;
  std::vector<std::uint32_t> inactive_pos_;
  std::array<detail::IndexedSet, 2> frontier_;
  std::array<detail::IndexedSet, 2> inactive_;
};

inline Snapshot snapshot(const ChainState& s) {
  return {s.t(), s.used(Community::one), s.used(Community::two), s.active(Community::one),
          s.active(Community::two)};
}

/// Reveals the neighbours of an explored node from a materialised graph.
class GraphNeighborhood {
 public:
  explicit GraphNeighborhood(const SbmGraph& g) : g_(&g) {}

  template <class Sink>
  void reveal(NodeId source, const ChainState&, Sink&& sink) {
    for (NodeId v : g_->neighbors(source)) sink(v);
  }

 private:
  const SbmGraph* g_;
};

/// Reveals neighbours of an implicit G(n1, n2, p1, p2, q) on demand. Every node that is
/// still inactive receives a mark independently with the edge probability, drawn by
/// geometric skips over the inactive-node list. Already active nodes are never marked, so
/// an unordered pair influences the chain at most once and fresh draws give the exact law.
class ImplicitSbmNeighborhood {
 public:
  ImplicitSbmNeighborhood(const ModelParams& m, std::uint64_t rng_seed)
      : rng_(derive_key(rng_seed, {0x6c})),
        skip_{{{GeometricSkipper(m.p1), GeometricSkipper(m.q)},
               {GeometricSkipper(m.q), GeometricSkipper(m.p2)}}} {}

  template <class Sink>
  void reveal(NodeId source, const ChainState& s, Sink&& sink) {
    const Community from = s.community(source);
    for (Community to : {Community::one, Community::two}) {
      const auto& targets = s.inactive(to);
      const GeometricSkipper& skip = skip_[index(from)][index(to)];
      const auto count = static_cast<std::uint64_t>(targets.size());
      std::uint64_t k = 0;
      while (true) {
        const std::uint64_t gap = skip.next(rng_);
        if (gap >= count - k) break;
        k += gap;
        buffer_.push_back(targets[k]);
        ++k;
      }
    }
    for (NodeId v : buffer_) sink(v);
    buffer_.clear();
  }

 private:
  SplitMix64 rng_;
  std::array<std::array<GeometricSkipper, 2>, 2> skip_;
  std::vector<NodeId> buffer_;
};

/// The binomial chain: one active, unused node is explored per step; every inactive
/// neighbour gets a mark and activates on its r-th.
template <class Neighborhood>
class BinomialChain {
 public:
  BinomialChain(Neighborhood nb, std::int64_t n1, std::int64_t n2, const SeedSet& seeds, int r,
                std::uint64_t rng_seed)
      : nb_(std::move(nb)), state_(n1, n2, r), pick_(derive_key(rng_seed, {0x66})) {
    if (r < 2) throw std::invalid_argument("BinomialChain: r must be >= 2");
    for (Community c : {Community::one, Community::two}) {
      for (NodeId v : seeds.of(c)) {
        if (state_.community(v) != c || static_cast<std::int64_t>(v) >= n1 + n2) {
          throw std::invalid_argument("BinomialChain: seed outside its community range");
        }
        if (state_.is_active(v)) throw std::invalid_argument("BinomialChain: duplicate seed");
        state_.activate(v);
      }
    }
  }

  const ChainState& state() const noexcept { return state_; }

  bool finished() const noexcept {
    return state_.frontier_size(Community::one) == 0 && state_.frontier_size(Community::two) == 0;
  }

  /// Inputs of the strategy for the next step t + 1.
  Observation observe() const noexcept {
    return {state_.t() + 1,
            {state_.used(Community::one), state_.used(Community::two)},
            {state_.active(Community::one), state_.active(Community::two)}};
  }

  /// Explore a uniformly chosen frontier node of community c.
  void step(Community c) {
    auto& front = state_.frontier_[index(c)];
    if (front.empty()) {
      throw StrategyFault("strategy selected community " + std::to_string(label(c)) +
                          " with an empty frontier at t=" + std::to_string(state_.t() + 1));
    }
    const NodeId v = front.at(pick_.below(static_cast<std::uint64_t>(front.size())));
    front.erase(v, state_.frontier_pos_);
    ++state_.t_;
    ++state_.used_[index(c)];
    const auto r = static_cast<std::uint32_t>(state_.r_);
    nb_.reveal(v, state_, [this, r](NodeId w) {
      if (state_.active_flag_[w]) return;
      if (++state_.marks_[w] >= r) state_.activate(w);
    });
  }

 private:
  Neighborhood nb_;
  ChainState state_;
  SplitMix64 pick_;
};

/// Drive a chain to its stopping time under `strategy`.
template <class Neighborhood>
RunRecord run_to_end(BinomialChain<Neighborhood>& chain, const Strategy& strategy,
                     const ChainOptions& opt) {
  RunRecord rec;
  rec.rng_seed = opt.rng_seed;
  rec.strategy_name = std::string(strategy.name());
  const bool sample = opt.trajectory_stride > 0;
  if (sample) rec.trajectory.push_back(snapshot(chain.state()));
  SelectionState sel;
  const bool any_seed = !chain.finished();
  while (!chain.finished()) {
    chain.step(strategy.select(chain.observe(), sel));
    if (sample && chain.state().t() % opt.trajectory_stride == 0) {
      rec.trajectory.push_back(snapshot(chain.state()));
    }
  }
  const ChainState& s = chain.state();
  if (sample && rec.trajectory.back().t != s.t()) rec.trajectory.push_back(snapshot(s));
  rec.final_by_community = {s.active(Community::one), s.active(Community::two)};
  rec.final_active = rec.final_by_community[0] + rec.final_by_community[1];
  rec.stop_time = any_seed ? s.t() + 1 : 0;
  if (strategy.kind() == StrategyKind::hybrid) {
    rec.t_prime = sel.t_prime ? *sel.t_prime : rec.stop_time;
  }
  return rec;
}

/// Generation-by-generation cascade: generation k+1 holds the inactive nodes with at least
/// r neighbours in generations 0..k.
inline RunRecord run_cascade(const SbmGraph& g, const SeedSet& seeds, int r) {
  if (r < 2) throw std::invalid_argument("run_cascade: r must be >= 2");
  const auto n = static_cast<std::size_t>(g.num_nodes());
  std::vector<std::uint32_t> count(n, 0);
  std::vector<std::uint8_t> active(n, 0);
  std::vector<NodeId> current;
  for (Community c : {Community::one, Community::two}) {
    for (NodeId v : seeds.of(c)) {
      if (v >= n || active[v]) throw std::invalid_argument("run_cascade: invalid seed set");
      active[v] = 1;
      current.push_back(v);
    }
  }
  RunRecord rec;
  rec.strategy_name = "cascade";
  std::vector<NodeId> next;
  while (!current.empty()) {
    rec.per_generation_sizes.push_back(static_cast<std::int64_t>(current.size()));
    for (NodeId v : current) {
      ++rec.final_by_community[index(g.community(v))];
      for (NodeId w : g.neighbors(v)) {
        if (active[w]) continue;
        if (++count[w] >= static_cast<std::uint32_t>(r)) {
          active[w] = 1;
          next.push_back(w);
        }
      }
    }
    current.swap(next);
    next.clear();
  }
  rec.final_active = rec.final_by_community[0] + rec.final_by_community[1];
  rec.stop_time = static_cast<std::int64_t>(rec.per_generation_sizes.size());
  return rec;
}

inline RunRecord run_chain(const SbmGraph& g, const SeedSet& seeds, int r, const Strategy& strategy,
                           const ChainOptions& opt = {}) {
  BinomialChain<GraphNeighborhood> chain(GraphNeighborhood(g), g.n1(), g.n2(), seeds, r, opt.rng_seed);
  return run_to_end(chain, strategy, opt);
}

/// First a_i node ids of each community; nodes of the implicit graph are exchangeable.
inline SeedSet leading_seeds(const ModelParams& m) {
  SeedSet s;
  for (std::int64_t v = 0; v < m.a1; ++v) s.one.push_back(static_cast<NodeId>(v));
  for (std::int64_t v = 0; v < m.a2; ++v) s.two.push_back(static_cast<NodeId>(m.n1 + v));
  return s;
}

/// Chain over an implicit graph that is never materialised; memory O(n1 + n2).
inline RunRecord run_chain_lazy(const ModelParams& m, const Strategy& strategy,
                                const ChainOptions& opt = {}) {
  m.validate();
  BinomialChain<ImplicitSbmNeighborhood> chain(ImplicitSbmNeighborhood(m, opt.rng_seed), m.n1, m.n2,
                                               leading_seeds(m), m.r, opt.rng_seed);
  return run_to_end(chain, strategy, opt);
}

}  // namespace bootperc
