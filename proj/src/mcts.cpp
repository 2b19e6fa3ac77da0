#include "pmcts/mcts.hpp"

#include <chrono>
#include <cmath>

namespace pmcts {

void UctParams::validate() const {
  if (!(c_p >= 0.0)) throw std::invalid_argument("c_p must be >= 0");
  if (budget_m < 1) throw std::invalid_argument("budget_m must be >= 1");
}

double uct_score(double w, std::int64_t n, std::int64_t n_parent, double c_p) noexcept {
  if (n <= 0) return kUnvisitedScore;
  const double nj = static_cast<double>(n);
  const double log_parent = std::log(static_cast<double>(std::max<std::int64_t>(n_parent, 1)));
  return w / nj + c_p * std::sqrt(log_parent / nj);
}

void descend(const SearchTree& tree, double c_p, NodeId from, Trajectory& traj) {
  NodeId cur = from;
  while (!tree.node(cur).is_terminal && !tree.expandable(cur)) {
    const auto kids = tree.children(cur);
    const std::int64_t parent_n = tree.n(cur);
    NodeId best = kids.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (NodeId c : kids) {
      const double s = uct_score(tree.w(c), tree.n(c), parent_n, c_p);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    cur = best;
    traj.path.push_back(cur);
  }
  traj.leaf_state = tree.node(cur).state;
}

Trajectory select(const SearchTree& tree, double c_p, std::uint64_t iteration_index) {
  Trajectory traj;
  traj.iteration_index = iteration_index;
  traj.path.push_back(SearchTree::root());
  descend(tree, c_p, SearchTree::root(), traj);
  return traj;
}

NodeId expand(SearchTree& tree, Trajectory& traj, RandomStream& rng) {
  const NodeId stop = traj.leaf();
  const std::size_t untried = tree.untried_count(stop);
  if (tree.node(stop).is_terminal || untried == 0) {
    throw std::logic_error("expand: stop node " + std::to_string(stop) + " has no untried actions");
  }
  const NodeId child = tree.add_child(stop, rng.below(untried));
  traj.path.push_back(child);
  traj.leaf_state = tree.node(child).state;
  return child;
}

double playout(const GameState& leaf_state, Player perspective, RandomStream& rng) {
  if (leaf_state.is_terminal()) return leaf_state.terminal_reward(perspective);
  burn_work(leaf_state.playout_cost());
  GameState s = leaf_state;
  while (!s.is_terminal()) {
    const auto actions = s.legal_actions();
    s = s.apply(actions[rng.below(actions.size())]);
  }
  return s.terminal_reward(perspective);
}

void backup(SearchTree& tree, const Trajectory& traj, std::size_t premarked) {
  if (!traj.delta) throw std::logic_error("backup: trajectory has no reward");
  const double delta = *traj.delta;
  for (std::size_t i = 0; i < traj.path.size(); ++i) {
    const NodeId id = traj.path[i];
    if (i >= premarked) tree.add_visit(id);
    tree.add_reward(id, tree.node(id).mover == traj.perspective ? delta : 1.0 - delta);
  }
}

bool same_outcome(const SearchResult& a, const SearchResult& b) noexcept {
  return a.best_action == b.best_action && a.root_children == b.root_children &&
         a.tree_size == b.tree_size && a.root_n == b.root_n;
}

void to_json(nlohmann::json& j, const SearchResult& r) {
  nlohmann::json kids = nlohmann::json::array();
  for (const auto& c : r.root_children) kids.push_back({{"action", c.action}, {"n", c.n}, {"w", c.w}});
  j = {{"best_action", r.best_action},
       {"root_children", std::move(kids)},
       {"tree_size", r.tree_size},
       {"root_n", r.root_n},
       {"elapsed_ns", r.elapsed_ns}};
}

void from_json(const nlohmann::json& j, SearchResult& r) {
  r.best_action = j.at("best_action").get<Action>();
  r.tree_size = j.at("tree_size").get<std::size_t>();
  r.root_n = j.value("root_n", std::int64_t{0});
  r.elapsed_ns = j.at("elapsed_ns").get<std::int64_t>();
  r.root_children.clear();
  for (const auto& c : j.at("root_children")) {
    r.root_children.push_back({c.at("action").get<Action>(), c.at("n").get<std::int64_t>(), c.at("w").get<double>()});
  }
}

Action best_action(const SearchTree& tree) {
  const auto kids = tree.children(SearchTree::root());
  if (kids.empty()) throw NoChildrenError("best_action: root has no children");
  NodeId best = kids.front();
  for (NodeId c : kids.subspan(1)) {
    const std::int64_t nc = tree.n(c);
    const std::int64_t nb = tree.n(best);
    if (nc > nb) {
      best = c;
    } else if (nc == nb && nc > 0 && tree.w(c) / static_cast<double>(nc) > tree.w(best) / static_cast<double>(nb)) {
      best = c;
    }
  }
  return tree.node(best).incoming_action;
}

std::vector<ChildStats> root_child_stats(const SearchTree& tree) {
  std::vector<ChildStats> out;
  for (NodeId c : tree.children(SearchTree::root())) {
    out.push_back({tree.node(c).incoming_action, tree.n(c), tree.w(c)});
  }
  return out;
}

SearchResult summarize(const SearchTree& tree, std::int64_t elapsed_ns) {
  SearchResult r;
  r.best_action = best_action(tree);
  r.root_children = root_child_stats(tree);
  r.tree_size = tree.size();
  r.root_n = tree.n(SearchTree::root());
  r.elapsed_ns = elapsed_ns;
  return r;
}

SearchRun search_sequential(const GameState& root, const UctParams& params) {
  params.validate();
  if (root.is_terminal()) throw std::invalid_argument("search root is terminal");

  const auto start = std::chrono::steady_clock::now();
  SearchTree tree(root, params.budget_m + 1);
  for (std::uint64_t i = 0; i < params.budget_m; ++i) {
    RandomStream rng(params.seed, i);
    Trajectory traj = select(tree, params.c_p, i);
    if (!tree.node(traj.leaf()).is_terminal) expand(tree, traj, rng);
    traj.perspective = tree.node(traj.leaf()).mover;
    traj.delta = playout(traj.leaf_state, traj.perspective, rng);
    backup(tree, traj);
  }
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
  SearchResult result = summarize(tree, elapsed);
  return {std::move(result), std::move(tree)};
}

}  // namespace pmcts
