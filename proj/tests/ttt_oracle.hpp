#pragma once

// Brute-force tic-tac-toe oracle for tests. Deliberately uses its own board
// encoding and search so it shares no code with the engine under test.

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Board = std::array<int, 9>;  // 0 empty, 1 X, 2 O

inline int winner(const Board& b) {
  static constexpr int lines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                                      {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}};
  for (const auto& l : lines) {
    if (b[l[0]] != 0 && b[l[0]] == b[l[1]] && b[l[1]] == b[l[2]]) return b[l[0]];
  }
  return 0;
}

inline bool full(const Board& b) {
  for (int c : b) {
    if (c == 0) return false;
  }
  return true;
}

inline int to_move(const Board& b) {
  int xs = 0, os = 0;
  for (int c : b) {
    xs += c == 1;
    os += c == 2;
  }
  return xs == os ? 1 : 2;
}

inline std::string to_string(const Board& b) {
  std::string s(9, '.');
  for (int i = 0; i < 9; ++i) s[i] = b[i] == 1 ? 'X' : b[i] == 2 ? 'O' : '.';
  return s;
}

/// Game value for the side to move under perfect play: +1 win, 0 draw, -1 loss.
inline int negamax(const Board& b, std::map<Board, int>& memo) {
  if (auto it = memo.find(b); it != memo.end()) return it->second;
  const int p = to_move(b);
  int best = -2;
  if (winner(b) != 0) {
    best = -1;  // the previous mover completed a line
  } else if (full(b)) {
    best = 0;
  } else {
    for (int i = 0; i < 9; ++i) {
      if (b[i] != 0) continue;
      Board n = b;
      n[i] = p;
      best = std::max(best, -negamax(n, memo));
    }
  }
  memo[b] = best;
  return best;
}

/// Cells that complete a line for the side to move.
inline std::vector<int> winning_moves(const Board& b) {
  std::vector<int> out;
  const int p = to_move(b);
  for (int i = 0; i < 9; ++i) {
    if (b[i] != 0) continue;
    Board n = b;
    n[i] = p;
    if (winner(n) == p) out.push_back(i);
  }
  return out;
}

/// Cells whose resulting position is a forced win for the side to move.
inline std::vector<int> minimax_winning_moves(const Board& b, std::map<Board, int>& memo) {
  std::vector<int> out;
  const int p = to_move(b);
  for (int i = 0; i < 9; ++i) {
    if (b[i] != 0) continue;
    Board n = b;
    n[i] = p;
    if (negamax(n, memo) == -1) out.push_back(i);
  }
  return out;
}

/// Every position reachable from the empty board under legal play.
inline std::set<Board> reachable_positions() {
  std::set<Board> seen;
  std::vector<Board> stack{Board{}};
  while (!stack.empty()) {
    Board b = stack.back();
    stack.pop_back();
    if (!seen.insert(b).second) continue;
    if (winner(b) != 0 || full(b)) continue;
    const int p = to_move(b);
    for (int i = 0; i < 9; ++i) {
      if (b[i] != 0) continue;
      Board n = b;
      n[i] = p;
      stack.push_back(n);
    }
  }
  return seen;
}

/// Non-terminal reachable positions where the mover can win immediately.
inline std::vector<Board> positions_with_immediate_win() {
  std::vector<Board> out;
  for (const Board& b : reachable_positions()) {
    if (winner(b) == 0 && !full(b) && !winning_moves(b).empty()) out.push_back(b);
  }
  return out;
}

}  // namespace oracle
