#include "pmcts/search_tree.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace pmcts {

SearchTree::SearchTree(GameState root_state, std::size_t capacity)
    : nodes_(std::make_unique<SearchNode[]>(capacity)), capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("search tree capacity must be >= 1");
  emplace(kNoNode, 0, std::move(root_state));
  nodes_[0].mover = opponent(nodes_[0].state.to_move());
}

SearchTree::SearchTree(SearchTree&& other) noexcept
    : nodes_(std::move(other.nodes_)),
      capacity_(std::exchange(other.capacity_, 0)),
      size_(other.size_.exchange(0)) {}

SearchTree& SearchTree::operator=(SearchTree&& other) noexcept {
  nodes_ = std::move(other.nodes_);
  capacity_ = std::exchange(other.capacity_, 0);
  size_.store(other.size_.exchange(0));
  return *this;
}

NodeId SearchTree::emplace(NodeId parent, Action action, GameState state) {
  const std::size_t id = size_.load(std::memory_order_relaxed);
  if (id >= capacity_) throw std::length_error("search tree arena exhausted");
  SearchNode& nd = nodes_[id];
  nd.parent = parent;
  nd.incoming_action = action;
  nd.is_terminal = state.is_terminal();
  nd.untried = state.legal_actions();
  nd.num_actions = static_cast<std::uint32_t>(nd.untried.size());
  nd.children = std::make_unique<NodeId[]>(nd.num_actions);
  nd.state = std::move(state);
  size_.store(id + 1, std::memory_order_release);
  return static_cast<NodeId>(id);
}

NodeId SearchTree::add_child(NodeId parent, std::size_t untried_index) {
  SearchNode& p = nodes_[parent];
  if (untried_index >= p.untried.size()) throw std::out_of_range("add_child: no such untried action");
  const Action a = p.untried[untried_index];
  p.untried.erase(p.untried.begin() + static_cast<std::ptrdiff_t>(untried_index));

  const NodeId child = emplace(parent, a, p.state.apply(a));
  nodes_[child].mover = p.state.to_move();

  const std::uint32_t slot = p.child_count.load(std::memory_order_relaxed);
  p.children[slot] = child;
  p.child_count.store(slot + 1, std::memory_order_release);
  return child;
}

std::optional<std::string> SearchTree::check_invariants() const {
  const std::size_t count = size();
  std::vector<int> seen(count, 0);
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (id >= count) return "node id " + std::to_string(id) + " out of range";
    if (seen[id]++) return "node " + std::to_string(id) + " reachable twice";

    const SearchNode& nd = nodes_[id];
    const double wv = w(id);
    const std::int64_t nv = n(id);
    const auto kids = children(id);
    const std::string where = "node " + std::to_string(id);

    if (nv < 0) return where + ": negative visit count";
    if (wv < 0.0 || wv > static_cast<double>(nv)) {
      return where + ": w=" + std::to_string(wv) + " outside [0, n=" + std::to_string(nv) + "]";
    }
    if (static_cast<std::size_t>(nv) < kids.size()) return where + ": n < child count";
    if (kids.size() + nd.untried.size() != nd.num_actions) return where + ": children + untried != actions";

    std::int64_t child_sum = 0;
    for (NodeId c : kids) {
      if (c >= count || nodes_[c].parent != id) return where + ": broken parent link to " + std::to_string(c);
      child_sum += n(c);
      stack.push_back(c);
    }
    if (!nd.is_terminal && nv > 0) {
      const std::int64_t own = id == root() ? 0 : 1;
      if (nv != own + child_sum) {
        return where + ": n=" + std::to_string(nv) + " but " + std::to_string(own) + " + sum(child n)=" +
               std::to_string(own + child_sum);
      }
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!seen[i]) return "node " + std::to_string(i) + " unreachable";
  }
  return std::nullopt;
}

bool identical_trees(const SearchTree& a, const SearchTree& b) {
  if (a.size() != b.size()) return false;
  for (NodeId id = 0; id < a.size(); ++id) {
    const SearchNode& x = a.node(id);
    const SearchNode& y = b.node(id);
    if (x.parent != y.parent || x.incoming_action != y.incoming_action || x.mover != y.mover ||
        x.is_terminal != y.is_terminal || !(x.state == y.state) || x.untried != y.untried) {
      return false;
    }
    if (a.w(id) != b.w(id) || a.n(id) != b.n(id)) return false;
    const auto ca = a.children(id);
    const auto cb = b.children(id);
    if (!std::equal(ca.begin(), ca.end(), cb.begin(), cb.end())) return false;
  }
  return true;
}

}  // namespace pmcts
