#include "pmcts/game.hpp"
#include "pmcts/rng.hpp"

#include "ttt_oracle.hpp"

#include <doctest.h>

using namespace pmcts;

TEST_SUITE("tictactoe") {
  TEST_CASE("empty board has nine legal actions in cell order") {
    const TicTacToeState s;
    const auto actions = s.legal_actions();
    REQUIRE(actions.size() == 9);
    for (Action i = 0; i < 9; ++i) CHECK(actions[i] == i);
    CHECK(s.to_move() == Player::first);
    CHECK_FALSE(s.is_terminal());
  }

  TEST_CASE("apply places the mover's mark and alternates") {
    const TicTacToeState s;
    const auto next = s.apply(4);
    CHECK(next.at(4) == Cell::x);
    CHECK(next.to_move() == Player::second);
    CHECK(s.at(4) == Cell::empty);  // original untouched
    CHECK(next.legal_actions().size() == 8);
  }

  TEST_CASE("illegal moves are rejected") {
    const auto s = TicTacToeState{}.apply(4);
    CHECK_THROWS_AS(s.apply(4), IllegalActionError);
    CHECK_THROWS_AS(s.apply(9), IllegalActionError);
    const auto won = TicTacToeState::from_string("XXXOO....");
    CHECK_THROWS_AS(won.apply(6), IllegalActionError);
  }

  TEST_CASE("a hand-played drawn game ends on the ninth move") {
    // X O X / X O O / O X X  -> no line
    const Action moves[] = {0, 1, 2, 4, 3, 5, 7, 6, 8};
    TicTacToeState s;
    for (int i = 0; i < 8; ++i) {
      s = s.apply(moves[i]);
      CHECK_FALSE(s.is_terminal());
    }
    s = s.apply(moves[8]);
    CHECK(s.is_terminal());
    CHECK(s.legal_actions().empty());
    CHECK_FALSE(s.winner().has_value());
    CHECK(s.terminal_reward(Player::first) == 0.5);
    CHECK(s.terminal_reward(Player::second) == 0.5);
  }

  TEST_CASE("terminal rewards") {
    const auto x_wins = TicTacToeState::from_string("XXXOO....");
    CHECK(x_wins.terminal_reward(Player::first) == 1.0);
    CHECK(x_wins.terminal_reward(Player::second) == 0.0);
    CHECK_THROWS_AS(TicTacToeState{}.terminal_reward(Player::first), NotTerminalError);
  }

  TEST_CASE("from_string rejects impossible piece counts") {
    CHECK_THROWS(TicTacToeState::from_string("XX......."));
    CHECK_THROWS(TicTacToeState::from_string("O........"));
    CHECK_THROWS(TicTacToeState::from_string("X"));
  }

  TEST_CASE("terminal iff no legal actions, rewards zero-sum, over every reachable position") {
    std::size_t terminal = 0;
    for (const auto& b : oracle::reachable_positions()) {
      const GameState s = TicTacToeState::from_string(oracle::to_string(b));
      const bool oracle_terminal = oracle::winner(b) != 0 || oracle::full(b);
      REQUIRE(s.is_terminal() == oracle_terminal);
      REQUIRE(s.legal_actions().empty() == s.is_terminal());
      REQUIRE(s.num_legal_actions() == s.legal_actions().size());
      if (s.is_terminal()) {
        ++terminal;
        REQUIRE(s.terminal_reward(Player::first) + s.terminal_reward(Player::second) == 1.0);
      }
    }
    CHECK(terminal == 958);
  }

  TEST_CASE("random playouts from the empty board end within nine moves") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      RandomStream rng(seed, 0);
      GameState s = TicTacToeState{};
      int moves = 0;
      while (!s.is_terminal()) {
        const auto a = s.legal_actions();
        s = s.apply(a[rng.below(a.size())]);
        ++moves;
      }
      REQUIRE(moves <= 9);
      REQUIRE(moves >= 5);
    }
  }
}

TEST_SUITE("synthetic") {
  TEST_CASE("fixed branching until the depth limit") {
    SyntheticGameState s({3, 4, 0, 7});
    for (std::uint32_t d = 0; d < 4; ++d) {
      CHECK(s.depth() == d);
      CHECK(s.legal_actions().size() == 3);
      CHECK(s.to_move() == (d % 2 == 0 ? Player::first : Player::second));
      s = s.apply(static_cast<Action>(d % 3));
    }
    CHECK(s.is_terminal());
    CHECK(s.legal_actions().empty());
    CHECK_THROWS_AS(s.apply(0), IllegalActionError);
  }

  TEST_CASE("apply advances depth and path hash") {
    const SyntheticGameState root({4, 8, 0, 0});
    const auto a = root.apply(1);
    const auto b = root.apply(2);
    CHECK(a.depth() == 1);
    CHECK(a.path_hash() != root.path_hash());
    CHECK(a.path_hash() != b.path_hash());
    CHECK(root.apply(1) == a);
    CHECK_THROWS_AS(root.apply(4), IllegalActionError);
  }

  TEST_CASE("golden leaf values") {
    // Frozen from an independent re-implementation of the mixing hash.
    struct Golden {
      std::uint64_t seed;
      std::uint32_t depth;
      std::uint64_t hash;
      double value;
    };
    const Golden cases[] = {
        {0, 8, 0x0e40e8bba787337fULL, 0.14348775929684265},
        {42, 8, 0x0e40e8bba787337fULL, 0.39304951901251539},
        {12345, 3, 0x52569d6996db6c81ULL, 0.50910755318257594},
    };
    for (const auto& g : cases) {
      SyntheticGameState s({4, g.depth, 0, g.seed});
      while (!s.is_terminal()) s = s.apply(0);
      CHECK(s.path_hash() == g.hash);
      CHECK(s.terminal_reward(Player::first) == g.value);
      CHECK(s.terminal_reward(Player::second) == 1.0 - g.value);
    }
  }

  TEST_CASE("rewards are zero-sum and deterministic at every leaf of a small tree") {
    const SyntheticParams params{3, 5, 0, 99};
    std::vector<SyntheticGameState> frontier{SyntheticGameState(params)};
    std::size_t leaves = 0;
    while (!frontier.empty()) {
      const auto s = frontier.back();
      frontier.pop_back();
      if (s.is_terminal()) {
        ++leaves;
        const double r = s.terminal_reward(Player::first);
        REQUIRE(r >= 0.0);
        REQUIRE(r < 1.0);
        REQUIRE(r + s.terminal_reward(Player::second) == 1.0);
        REQUIRE(SyntheticGameState(s).terminal_reward(Player::first) == r);
        continue;
      }
      CHECK_THROWS_AS(s.terminal_reward(Player::first), NotTerminalError);
      for (Action a : s.legal_actions()) frontier.push_back(s.apply(a));
    }
    CHECK(leaves == 243);
  }

  TEST_CASE("playout cost only reported by synthetic states") {
    CHECK(GameState(TicTacToeState{}).playout_cost() == 0);
    CHECK(GameState(SyntheticGameState({4, 8, 17, 0})).playout_cost() == 17);
  }

  TEST_CASE("invalid branching rejected") {
    CHECK_THROWS(SyntheticGameState({0, 8, 0, 0}));
  }
}

TEST_SUITE("rng") {
  TEST_CASE("streams are pure functions of (seed, id)") {
    RandomStream a(5, 9);
    RandomStream b(5, 9);
    RandomStream c(5, 10);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next();
      CHECK(x == b.next());
      differs |= x != c.next();
    }
    CHECK(differs);
  }

  TEST_CASE("below stays in range and covers it") {
    RandomStream rng(1, 2);
    std::array<int, 7> hits{};
    for (int i = 0; i < 7000; ++i) {
      const auto v = rng.below(7);
      REQUIRE(v < 7);
      ++hits[v];
    }
    for (int h : hits) CHECK(h > 800);
  }
}
