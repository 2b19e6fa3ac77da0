#include "pmcts/mcts.hpp"

#include "ttt_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace pmcts;

namespace {

// Root with `b` terminal children (synthetic tree of depth 1), stats set by hand.
SearchTree flat_tree(std::uint32_t b, const std::vector<std::pair<double, int>>& stats) {
  SearchTree tree(SyntheticGameState({b, 1, 0, 0}), b + 1);
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const NodeId c = tree.add_child(SearchTree::root(), 0);
    for (int v = 0; v < stats[i].second; ++v) {
      tree.add_visit(c);
      tree.add_visit(SearchTree::root());
    }
    tree.add_reward(c, stats[i].first);
  }
  return tree;
}

}  // namespace

TEST_SUITE("uct_score") {
  TEST_CASE("pure exploitation with c_p = 0") {
    CHECK(uct_score(3, 4, 10, 0.0) == 0.75);
  }
  TEST_CASE("exploration term") {
    // 1 + sqrt(ln 2), evaluated independently.
    CHECK(uct_score(1, 1, 2, 1.0) == doctest::Approx(1.8325546111576978).epsilon(1e-15));
  }
  TEST_CASE("unvisited children get the sentinel") {
    CHECK(uct_score(0, 0, 5, 1.0) == kUnvisitedScore);
    CHECK(uct_score(0, 0, 1, 0.0) == kUnvisitedScore);
    CHECK(uct_score(0, 0, 0, 3.0) == kUnvisitedScore);
  }
  TEST_CASE("parent count below one is treated as one") {
    CHECK(uct_score(1, 2, 0, 1.0) == 0.5);
  }
}

TEST_SUITE("select") {
  TEST_CASE("fresh tree stops at the root") {
    SearchTree tree(TicTacToeState{}, 2);
    const auto traj = select(tree, 1.0);
    REQUIRE(traj.path.size() == 1);
    CHECK(traj.path[0] == SearchTree::root());
    CHECK(traj.leaf_state == GameState(TicTacToeState{}));
  }

  TEST_CASE("c_p = 0 follows the better mean") {
    const auto tree = flat_tree(2, {{1.0, 1}, {0.0, 1}});
    const auto traj = select(tree, 0.0);
    REQUIRE(traj.path.size() == 2);
    CHECK(traj.path[1] == tree.children(SearchTree::root())[0]);
  }

  TEST_CASE("exploration prefers the less visited child") {
    // scores 0.5 + sqrt(ln3/2) = 1.2412 vs 1 + sqrt(ln3) = 2.0481
    const auto tree = flat_tree(2, {{1.0, 2}, {1.0, 1}});
    REQUIRE(tree.n(SearchTree::root()) == 3);
    const auto traj = select(tree, 1.0);
    CHECK(traj.path[1] == tree.children(SearchTree::root())[1]);
  }

  TEST_CASE("ties go to the lowest child index") {
    const auto tree = flat_tree(3, {{1.0, 2}, {1.0, 2}, {1.0, 2}});
    CHECK(select(tree, 1.0).path[1] == tree.children(SearchTree::root())[0]);
  }

  TEST_CASE("stops at terminal nodes") {
    const auto tree = flat_tree(1, {{1.0, 1}});
    const auto traj = select(tree, 1.0);
    CHECK(tree.node(traj.leaf()).is_terminal);
  }
}

TEST_SUITE("expand") {
  TEST_CASE("fresh tic-tac-toe root") {
    SearchTree tree(TicTacToeState{}, 4);
    auto traj = select(tree, 1.0);
    RandomStream rng(2024, 0);
    const NodeId c = expand(tree, traj, rng);
    CHECK(tree.size() == 2);
    CHECK(tree.untried_count(c) == 8);
    CHECK(traj.leaf() == c);
    CHECK(tree.node(c).incoming_action == 6);  // golden for seed 2024, iteration 0
  }

  TEST_CASE("last untried action") {
    SearchTree tree(SyntheticGameState({1, 3, 0, 0}), 4);
    auto traj = select(tree, 1.0);
    RandomStream rng(0, 0);
    expand(tree, traj, rng);
    CHECK(tree.untried_count(SearchTree::root()) == 0);
    CHECK_FALSE(tree.expandable(SearchTree::root()));
    Trajectory stale;
    stale.path = {SearchTree::root()};
    CHECK_THROWS_AS(expand(tree, stale, rng), std::logic_error);
  }
}

TEST_SUITE("playout") {
  TEST_CASE("forced win") {
    const GameState s = TicTacToeState::from_string("XOXOXOOX.");
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      RandomStream rng(seed, 0);
      CHECK(playout(s, Player::first, rng) == 1.0);
      CHECK(playout(s, Player::second, rng) == 0.0);
    }
  }

  TEST_CASE("terminal input returns its reward without consuming randomness") {
    const GameState drawn = TicTacToeState::from_string("XOXXOOOXX");
    RandomStream rng(3, 3);
    CHECK(playout(drawn, Player::first, rng) == 0.5);
    CHECK(rng.consumed() == 0);
  }

  TEST_CASE("first-player advantage under uniform random play") {
    // Exact expectation by enumeration: 817/1260. Variance from the outcome
    // distribution bounds the 3-sigma band of a 10k-sample mean.
    constexpr double exact = 817.0 / 1260.0;
    constexpr int samples = 10000;
    double sum = 0.0;
    for (int i = 0; i < samples; ++i) {
      RandomStream rng(11, static_cast<std::uint64_t>(i));
      sum += playout(TicTacToeState{}, Player::first, rng);
    }
    const double mean = sum / samples;
    const double sigma = std::sqrt(0.25 / samples);  // variance of a [0,1] value is <= 1/4
    CHECK(mean >= 0.55);
    CHECK(mean <= 0.70);
    CHECK(std::abs(mean - exact) <= 3 * sigma);
  }
}

TEST_SUITE("backup") {
  TEST_CASE("perspective alternates along the path") {
    SearchTree tree(TicTacToeState{}, 4);
    Trajectory traj = select(tree, 1.0);
    RandomStream rng(0, 0);
    expand(tree, traj, rng);
    const NodeId a = traj.leaf();
    traj.path.push_back(tree.add_child(a, 0));
    traj.perspective = tree.node(SearchTree::root()).mover;  // O
    traj.delta = 1.0;
    backup(tree, traj);
    CHECK(tree.w(traj.path[0]) == 1.0);
    CHECK(tree.w(traj.path[1]) == 0.0);
    CHECK(tree.w(traj.path[2]) == 1.0);
    for (NodeId id : traj.path) CHECK(tree.n(id) == 1);
  }

  TEST_CASE("draws credit everyone half") {
    SearchTree tree(TicTacToeState{}, 4);
    Trajectory traj = select(tree, 1.0);
    RandomStream rng(0, 0);
    expand(tree, traj, rng);
    traj.delta = 0.5;
    backup(tree, traj);
    for (NodeId id : traj.path) CHECK(tree.w(id) == 0.5);
  }

  TEST_CASE("additive on a single-node path") {
    SearchTree tree(TicTacToeState{}, 1);
    Trajectory traj = select(tree, 1.0);
    traj.perspective = tree.node(SearchTree::root()).mover;
    traj.delta = 1.0;
    backup(tree, traj);
    traj.delta = 0.0;
    backup(tree, traj);
    CHECK(tree.w(SearchTree::root()) == 1.0);
    CHECK(tree.n(SearchTree::root()) == 2);
  }

  TEST_CASE("premarked nodes only receive the reward") {
    SearchTree tree(TicTacToeState{}, 1);
    Trajectory traj = select(tree, 1.0);
    tree.add_visit(SearchTree::root());
    traj.delta = 0.5;
    backup(tree, traj, 1);
    CHECK(tree.n(SearchTree::root()) == 1);
    CHECK(tree.w(SearchTree::root()) == 0.5);
  }

  TEST_CASE("missing reward is an error") {
    SearchTree tree(TicTacToeState{}, 1);
    CHECK_THROWS_AS(backup(tree, select(tree, 1.0)), std::logic_error);
  }
}

TEST_SUITE("best_action") {
  TEST_CASE("most visits") {
    CHECK(best_action(flat_tree(3, {{5, 10}, {2, 5}, {1, 1}})) == 0);
  }
  TEST_CASE("ties broken by mean reward") {
    CHECK(best_action(flat_tree(2, {{4, 5}, {2, 5}})) == 0);
    const auto tree = flat_tree(2, {{2, 5}, {4, 5}});
    CHECK(best_action(tree) == tree.node(tree.children(SearchTree::root())[1]).incoming_action);
  }
  TEST_CASE("then by lower index") {
    const auto tree = flat_tree(2, {{2, 3}, {2, 3}});
    CHECK(best_action(tree) == tree.node(tree.children(SearchTree::root())[0]).incoming_action);
  }
  TEST_CASE("childless root") {
    SearchTree tree(TicTacToeState{}, 1);
    CHECK_THROWS_AS(best_action(tree), NoChildrenError);
  }
}

TEST_SUITE("run_sequential") {
  TEST_CASE("one iteration") {
    const auto run = search_sequential(TicTacToeState{}, {1.0, 1, 0});
    CHECK(run.tree.size() == 2);
    CHECK(run.result.root_n == 1);
  }

  TEST_CASE("unvisited-first forces breadth at the root") {
    const auto run = search_sequential(TicTacToeState{}, {100.0, 9, 3});
    REQUIRE(run.result.root_children.size() == 9);
    for (const auto& c : run.result.root_children) CHECK(c.n == 1);
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(run_sequential(TicTacToeState{}, {1.0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(run_sequential(TicTacToeState{}, {-1.0, 10, 0}), std::invalid_argument);
    CHECK_THROWS_AS(run_sequential(TicTacToeState::from_string("XXXOO...."), {1.0, 10, 0}), std::invalid_argument);
  }

  TEST_CASE("golden search result") {
    const auto r = run_sequential(TicTacToeState{}, {1.0, 1000, 7});
    CHECK(r.best_action == 4);
    CHECK(r.tree_size == 1001);
    REQUIRE(r.root_children.size() == 9);
    CHECK(r.root_children[1] == ChildStats{4, 324, 240.0});
  }

  TEST_CASE("invariants, visit conservation and determinism across seeds") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (const GameState& root : {GameState(TicTacToeState{}), GameState(SyntheticGameState({4, 8, 0, seed}))}) {
        const UctParams params{1.0, 300, seed};
        const auto a = search_sequential(root, params);
        const auto b = search_sequential(root, params);
        REQUIRE(a.result.root_n == 300);
        const auto err = a.tree.check_invariants();
        REQUIRE_MESSAGE(!err, *err);
        REQUIRE(identical_trees(a.tree, b.tree));
        REQUIRE(same_outcome(a.result, b.result));
      }
    }
  }

  TEST_CASE("root reward equals the sum of backed-up root-perspective values") {
    const UctParams params{1.0, 400, 5};
    SearchTree tree(TicTacToeState{}, params.budget_m + 1);
    double expected = 0.0;
    for (std::uint64_t i = 0; i < params.budget_m; ++i) {
      RandomStream rng(params.seed, i);
      Trajectory traj = select(tree, params.c_p, i);
      if (!tree.node(traj.leaf()).is_terminal) expand(tree, traj, rng);
      traj.perspective = tree.node(traj.leaf()).mover;
      traj.delta = playout(traj.leaf_state, traj.perspective, rng);
      expected += tree.node(SearchTree::root()).mover == traj.perspective ? *traj.delta : 1.0 - *traj.delta;
      backup(tree, traj);
    }
    CHECK(tree.w(SearchTree::root()) == expected);
    // Same loop as the driver, so the trees must match.
    CHECK(identical_trees(tree, search_sequential(TicTacToeState{}, params).tree));
  }

  TEST_CASE("plays a winning move where an immediate win exists (sample of oracle positions)") {
    const auto positions = oracle::positions_with_immediate_win();
    std::map<oracle::Board, int> memo;
    for (std::size_t i = 0; i < positions.size(); i += 37) {
      const auto& b = positions[i];
      const auto wins = oracle::minimax_winning_moves(b, memo);
      const auto r = run_sequential(TicTacToeState::from_string(oracle::to_string(b)), {1.0, 500, i});
      REQUIRE_MESSAGE(std::find(wins.begin(), wins.end(), r.best_action) != wins.end(), oracle::to_string(b));
    }
  }

  TEST_CASE("search result JSON") {
    const auto r = run_sequential(TicTacToeState{}, {1.0, 50, 1});
    const nlohmann::json j = r;
    CHECK(j.at("best_action") == r.best_action);
    CHECK(j.at("root_children").size() == r.root_children.size());
    CHECK(j.at("root_children")[0].contains("n"));
    CHECK(j.at("elapsed_ns").get<std::int64_t>() == r.elapsed_ns);
    const auto back = j.get<SearchResult>();
    CHECK(same_outcome(back, r));
  }
}
