#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pmcts {

enum class Player : std::uint8_t { first = 0, second = 1 };

constexpr Player opponent(Player p) noexcept {
  return p == Player::first ? Player::second : Player::first;
}

/// Action identifier. Tic-tac-toe uses the board cell (0..8); the synthetic
/// game uses the branch index (0..b-1).
using Action = std::uint16_t;

class IllegalActionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotTerminalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Tic-tac-toe

enum class Cell : std::uint8_t { empty = 0, x = 1, o = 2 };

class TicTacToeState {
 public:
  TicTacToeState() = default;

  /// Builds a position from a 9-char string of 'X', 'O' and '.'/'-'/' '.
  /// The side to move is inferred from the piece counts (X moves first).
  static TicTacToeState from_string(std::string_view cells);

  Player to_move() const noexcept { return to_move_; }
  Cell at(int cell) const { return board_.at(static_cast<std::size_t>(cell)); }
  const std::array<Cell, 9>& board() const noexcept { return board_; }

  /// Player owning a completed line, if any.
  std::optional<Player> winner() const noexcept;
  bool is_terminal() const noexcept;
  std::vector<Action> legal_actions() const;
  std::size_t num_legal_actions() const noexcept;
  TicTacToeState apply(Action a) const;
  double terminal_reward(Player perspective) const;

  std::string to_string() const;

  friend bool operator==(const TicTacToeState&, const TicTacToeState&) = default;

 private:
  std::array<Cell, 9> board_{};
  Player to_move_ = Player::first;
};

// ---------------------------------------------------------------------------
// Synthetic uniform tree

struct SyntheticParams {
  std::uint32_t branching = 4;
  std::uint32_t depth = 8;
  /// Busy-work units burned once per playout (see burn_work).
  std::uint32_t playout_cost = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const SyntheticParams&, const SyntheticParams&) = default;
};

class SyntheticGameState {
 public:
  explicit SyntheticGameState(SyntheticParams params);

  const SyntheticParams& params() const noexcept { return params_; }
  std::uint32_t depth() const noexcept { return depth_; }
  std::uint64_t path_hash() const noexcept { return path_hash_; }
  Player to_move() const noexcept {
    return depth_ % 2 == 0 ? Player::first : Player::second;
  }

  bool is_terminal() const noexcept { return depth_ >= params_.depth; }
  std::vector<Action> legal_actions() const;
  std::size_t num_legal_actions() const noexcept {
    return is_terminal() ? 0 : params_.branching;
  }
  SyntheticGameState apply(Action a) const;
  double terminal_reward(Player perspective) const;

  friend bool operator==(const SyntheticGameState&, const SyntheticGameState&) = default;

 private:
  SyntheticParams params_;
  std::uint32_t depth_ = 0;
  std::uint64_t path_hash_ = 0;
};

/// Reward of the first player at a synthetic leaf: 53 hash bits scaled to
/// [0, 1). Multiples of 2^-53 keep r + (1 - r) == 1 exact.
double synthetic_leaf_value(std::uint64_t path_hash, std::uint64_t seed) noexcept;

// ---------------------------------------------------------------------------
// Type-erased value state consumed by the search.

class GameState {
 public:
  /// Empty tic-tac-toe board.
  GameState() = default;
  GameState(TicTacToeState s) : state_(s) {}  // NOLINT(google-explicit-constructor)
  GameState(SyntheticGameState s) : state_(s) {}  // NOLINT(google-explicit-constructor)

  Player to_move() const noexcept;
  bool is_terminal() const noexcept;
  std::vector<Action> legal_actions() const;
  std::size_t num_legal_actions() const noexcept;
  /// Throws IllegalActionError if a is not legal here.
  GameState apply(Action a) const;
  /// Win 1, draw 0.5, loss 0 for `perspective`. Throws NotTerminalError.
  double terminal_reward(Player perspective) const;
  /// Busy-work units a playout from this state should burn.
  std::uint32_t playout_cost() const noexcept;

  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&state_);
  }

  friend bool operator==(const GameState&, const GameState&) = default;

 private:
  std::variant<TicTacToeState, SyntheticGameState> state_;
};

/// Deterministic arithmetic spin. One unit is 1024 mixing rounds; the
/// result is published to a volatile sink so the loop is not elided.
void burn_work(std::uint32_t units) noexcept;

}  // namespace pmcts
