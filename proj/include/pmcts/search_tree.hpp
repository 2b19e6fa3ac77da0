#pragma once

#include "pmcts/game.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pmcts {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = ~NodeId{0};

/// One node of the search tree.
///
/// Structural fields are written once before the node is published to its
/// parent and are immutable afterwards. `w` and `n` are word-sized atomics so
/// readers on other threads see stale but never torn statistics. `untried` is
/// owned by whichever thread performs expansion.
struct SearchNode {
  NodeId parent = kNoNode;
  Action incoming_action = 0;
  /// Player who made the move into this node; `w` is accumulated from their
  /// point of view so a parent can rank its children directly.
  Player mover = Player::second;
  bool is_terminal = false;
  std::uint32_t num_actions = 0;
  GameState state;

  std::atomic<double> w{0.0};
  std::atomic<std::int64_t> n{0};

  std::unique_ptr<NodeId[]> children;
  std::atomic<std::uint32_t> child_count{0};
  std::vector<Action> untried;
};

/// Append-only, arena-allocated game tree.
///
/// Capacity is fixed at construction (one expansion per iteration bounds the
/// node count by budget + 1), so node addresses never move and readers may
/// traverse while a single expander appends.
class SearchTree {
 public:
  SearchTree(GameState root_state, std::size_t capacity);

  /// Moving is only valid while no other thread touches either tree.
  SearchTree(SearchTree&& other) noexcept;
  SearchTree& operator=(SearchTree&& other) noexcept;

  static constexpr NodeId root() noexcept { return 0; }
  const GameState& root_state() const noexcept { return nodes_[0].state; }

  std::size_t size() const noexcept { return size_.load(std::memory_order_acquire); }
  std::size_t capacity() const noexcept { return capacity_; }

  const SearchNode& node(NodeId id) const noexcept { return nodes_[id]; }

  /// Children published so far, in creation order.
  std::span<const NodeId> children(NodeId id) const noexcept {
    const SearchNode& nd = nodes_[id];
    return {nd.children.get(), nd.child_count.load(std::memory_order_acquire)};
  }

  /// True when the node is non-terminal and has not yet created every child,
  /// as seen by the caller's (possibly stale) view.
  bool expandable(NodeId id) const noexcept {
    const SearchNode& nd = nodes_[id];
    return !nd.is_terminal && nd.child_count.load(std::memory_order_acquire) < nd.num_actions;
  }

  double w(NodeId id) const noexcept { return nodes_[id].w.load(std::memory_order_relaxed); }
  std::int64_t n(NodeId id) const noexcept { return nodes_[id].n.load(std::memory_order_relaxed); }

  /// Removes untried[untried_index] from `parent` and creates the matching
  /// child with w = 0, n = 0. Only one thread may call this at a time.
  NodeId add_child(NodeId parent, std::size_t untried_index);

  std::size_t untried_count(NodeId id) const noexcept { return nodes_[id].untried.size(); }

  /// Statistics updates. Each node has a single statistics writer, except
  /// that visit marks may be added concurrently, so `n` uses fetch_add.
  void add_visit(NodeId id) noexcept { nodes_[id].n.fetch_add(1, std::memory_order_relaxed); }
  void add_reward(NodeId id, double value) noexcept {
    SearchNode& nd = nodes_[id];
    nd.w.store(nd.w.load(std::memory_order_relaxed) + value, std::memory_order_relaxed);
  }

  /// Depth-first walk; returns a description of the first violated
  /// structural or statistical invariant, or nullopt.
  ///  * parent/child links are consistent and every node is reachable once
  ///  * 0 <= w <= n at every node
  ///  * n >= child count
  ///  * n == 1 + sum(child.n) at visited non-terminal nodes; the root has no
  ///    creating iteration, so there n == sum(child.n)
  std::optional<std::string> check_invariants() const;

 private:
  NodeId emplace(NodeId parent, Action action, GameState state);

  std::unique_ptr<SearchNode[]> nodes_;
  std::size_t capacity_ = 0;
  std::atomic<std::size_t> size_{0};
};

/// Node-for-node comparison of structure and statistics.
bool identical_trees(const SearchTree& a, const SearchTree& b);

}  // namespace pmcts
