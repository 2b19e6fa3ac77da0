#include "pmcts/game.hpp"

#include "pmcts/rng.hpp"

#include <algorithm>

namespace pmcts {

namespace {

constexpr std::array<std::array<int, 3>, 8> kLines = {{
    {0, 1, 2}, {3, 4, 5}, {6, 7, 8},
    {0, 3, 6}, {1, 4, 7}, {2, 5, 8},
    {0, 4, 8}, {2, 4, 6},
}};

constexpr Cell mark_of(Player p) noexcept { return p == Player::first ? Cell::x : Cell::o; }

volatile std::uint64_t g_work_sink = 0;

}  // namespace

// ---------------------------------------------------------------------------

TicTacToeState TicTacToeState::from_string(std::string_view cells) {
  if (cells.size() != 9) throw std::invalid_argument("tic-tac-toe board needs 9 cells");
  TicTacToeState s;
  int xs = 0;
  int os = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    switch (cells[i]) {
      case 'X': case 'x': s.board_[i] = Cell::x; ++xs; break;
      case 'O': case 'o': s.board_[i] = Cell::o; ++os; break;
      case '.': case '-': case ' ': break;
      default: throw std::invalid_argument("bad tic-tac-toe cell: " + std::string(1, cells[i]));
    }
  }
  if (xs - os != 0 && xs - os != 1) throw std::invalid_argument("piece counts violate |#X-#O|<=1 with X first");
  s.to_move_ = xs == os ? Player::first : Player::second;
  return s;
}

std::optional<Player> TicTacToeState::winner() const noexcept {
  for (const auto& line : kLines) {
    const Cell c = board_[line[0]];
    if (c != Cell::empty && c == board_[line[1]] && c == board_[line[2]]) {
      return c == Cell::x ? Player::first : Player::second;
    }
  }
  return std::nullopt;
}

bool TicTacToeState::is_terminal() const noexcept {
  if (winner()) return true;
  return std::none_of(board_.begin(), board_.end(), [](Cell c) { return c == Cell::empty; });
}

std::vector<Action> TicTacToeState::legal_actions() const {
  std::vector<Action> out;
  if (is_terminal()) return out;
  out.reserve(9);
  for (Action i = 0; i < 9; ++i) {
    if (board_[i] == Cell::empty) out.push_back(i);
  }
  return out;
}

std::size_t TicTacToeState::num_legal_actions() const noexcept {
  if (is_terminal()) return 0;
  return static_cast<std::size_t>(std::count(board_.begin(), board_.end(), Cell::empty));
}

TicTacToeState TicTacToeState::apply(Action a) const {
  if (a >= 9 || board_[a] != Cell::empty || is_terminal()) {
    throw IllegalActionError("illegal tic-tac-toe move " + std::to_string(a) + " on " + to_string());
  }
  TicTacToeState next = *this;
  next.board_[a] = mark_of(to_move_);
  next.to_move_ = opponent(to_move_);
  return next;
}

double TicTacToeState::terminal_reward(Player perspective) const {
  if (!is_terminal()) throw NotTerminalError("terminal_reward on live board " + to_string());
  const auto w = winner();
  if (!w) return 0.5;
  return *w == perspective ? 1.0 : 0.0;
}

std::string TicTacToeState::to_string() const {
  std::string s(9, '.');
  for (std::size_t i = 0; i < 9; ++i) {
    if (board_[i] == Cell::x) s[i] = 'X';
    if (board_[i] == Cell::o) s[i] = 'O';
  }
  return s;
}

// ---------------------------------------------------------------------------

SyntheticGameState::SyntheticGameState(SyntheticParams params) : params_(params) {
  if (params_.branching == 0 || params_.branching > 0xffff) {
    throw std::invalid_argument("synthetic branching factor must be in [1, 65535]");
  }
}

std::vector<Action> SyntheticGameState::legal_actions() const {
  std::vector<Action> out(num_legal_actions());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<Action>(i);
  return out;
}

SyntheticGameState SyntheticGameState::apply(Action a) const {
  if (is_terminal() || a >= params_.branching) {
    throw IllegalActionError("illegal synthetic action " + std::to_string(a) + " at depth " +
                             std::to_string(depth_));
  }
  SyntheticGameState next = *this;
  next.depth_ = depth_ + 1;
  next.path_hash_ = mix64(path_hash_, std::uint64_t{a} + 1);
  return next;
}

double synthetic_leaf_value(std::uint64_t path_hash, std::uint64_t seed) noexcept {
  return static_cast<double>(mix64(path_hash ^ seed) >> 11) * 0x1.0p-53;
}

double SyntheticGameState::terminal_reward(Player perspective) const {
  if (!is_terminal()) {
    throw NotTerminalError("terminal_reward at synthetic depth " + std::to_string(depth_));
  }
  const double v = synthetic_leaf_value(path_hash_, params_.seed);
  return perspective == Player::first ? v : 1.0 - v;
}

// ---------------------------------------------------------------------------

Player GameState::to_move() const noexcept {
  return std::visit([](const auto& s) { return s.to_move(); }, state_);
}

bool GameState::is_terminal() const noexcept {
  return std::visit([](const auto& s) { return s.is_terminal(); }, state_);
}

std::vector<Action> GameState::legal_actions() const {
  return std::visit([](const auto& s) { return s.legal_actions(); }, state_);
}

std::size_t GameState::num_legal_actions() const noexcept {
  return std::visit([](const auto& s) { return s.num_legal_actions(); }, state_);
}

GameState GameState::apply(Action a) const {
  return std::visit([a](const auto& s) { return GameState(s.apply(a)); }, state_);
}

double GameState::terminal_reward(Player perspective) const {
  return std::visit([perspective](const auto& s) { return s.terminal_reward(perspective); }, state_);
}

std::uint32_t GameState::playout_cost() const noexcept {
  if (const auto* s = std::get_if<SyntheticGameState>(&state_)) return s->params().playout_cost;
  return 0;
}

void burn_work(std::uint32_t units) noexcept {
  std::uint64_t acc = units;
  for (std::uint64_t i = 0; i < std::uint64_t{units} * 1024; ++i) acc = mix64(acc + i);
  g_work_sink = acc;
}

}  // namespace pmcts
