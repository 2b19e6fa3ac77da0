#pragma once

#include "pmcts/game.hpp"
#include "pmcts/rng.hpp"
#include "pmcts/search_tree.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace pmcts {

struct UctParams {
  double c_p = 1.0;
  std::uint64_t budget_m = 1000;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless c_p >= 0 and budget_m >= 1.
  void validate() const;
};

/// Score returned for children that have never been visited.
inline constexpr double kUnvisitedScore = std::numeric_limits<double>::infinity();

/// UCT value of a child: w/n + c_p * sqrt(ln(n_parent) / n).
///
/// Unvisited children get kUnvisitedScore. n_parent below 1 (only observable
/// through stale reads in the pipeline) is treated as 1.
double uct_score(double w, std::int64_t n, std::int64_t n_parent, double c_p) noexcept;

/// One iteration's root-to-leaf path and the reward it produced.
struct Trajectory {
  std::vector<NodeId> path;
  GameState leaf_state;
  std::optional<double> delta;
  /// Player whose point of view `delta` is expressed in.
  Player perspective = Player::first;
  std::uint64_t iteration_index = 0;

  NodeId leaf() const { return path.back(); }
};

/// Descends from the root by maximum UCT (ties to the lowest child index) and
/// stops at the first expandable or terminal node.
Trajectory select(const SearchTree& tree, double c_p, std::uint64_t iteration_index = 0);

/// Continues a descent from `from` exactly like select, appending to `traj`.
void descend(const SearchTree& tree, double c_p, NodeId from, Trajectory& traj);

/// Creates one child of the trajectory's stop node, picking the untried
/// action uniformly with `rng`, and appends it. Throws std::logic_error if
/// the stop node has no untried actions.
NodeId expand(SearchTree& tree, Trajectory& traj, RandomStream& rng);

/// Uniform random playout to a terminal state. Terminal input returns its
/// reward without touching rng.
double playout(const GameState& leaf_state, Player perspective, RandomStream& rng);

/// Adds one visit and the reward to every node on the path. A node credits
/// delta if its mover is traj.perspective and 1 - delta otherwise. The first
/// `premarked` nodes already carry a provisional visit and only receive the
/// reward.
void backup(SearchTree& tree, const Trajectory& traj, std::size_t premarked = 0);

struct ChildStats {
  Action action = 0;
  std::int64_t n = 0;
  double w = 0.0;

  friend bool operator==(const ChildStats&, const ChildStats&) = default;
};

struct SearchResult {
  Action best_action = 0;
  std::vector<ChildStats> root_children;
  std::size_t tree_size = 0;
  std::int64_t root_n = 0;
  std::int64_t elapsed_ns = 0;
};

/// Equality on every field except elapsed time.
bool same_outcome(const SearchResult& a, const SearchResult& b) noexcept;

void to_json(nlohmann::json& j, const SearchResult& r);
void from_json(const nlohmann::json& j, SearchResult& r);

class NoChildrenError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Most visited root child; ties by higher mean reward, then lower index.
Action best_action(const SearchTree& tree);

/// Root children statistics in child-creation order.
std::vector<ChildStats> root_child_stats(const SearchTree& tree);

SearchResult summarize(const SearchTree& tree, std::int64_t elapsed_ns);

struct SearchRun {
  SearchResult result;
  SearchTree tree;
};

/// Sequential select -> expand -> playout -> backup, budget_m times.
/// Iteration i draws all of its randomness from RandomStream(seed, i).
SearchRun search_sequential(const GameState& root, const UctParams& params);

inline SearchResult run_sequential(const GameState& root, const UctParams& params) {
  return search_sequential(root, params).result;
}

}  // namespace pmcts
