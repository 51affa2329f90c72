#pragma once

// Exhaustive depth-first Sokoban search over plain (player, crate set) states.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace msgfn::oracle {

class SokobanDfs {
 public:
  explicit SokobanDfs(const std::string& text) {
    std::string row;
    for (char ch : text + "\n") {
      if (ch == '\n') {
        grid_.push_back(row);
        row.clear();
      } else {
        row.push_back(ch);
      }
    }
    h_ = static_cast<int>(grid_.size());
    w_ = static_cast<int>(grid_[0].size());
    for (int r = 0; r < h_; ++r)
      for (int c = 0; c < w_; ++c) {
        const char ch = grid_[r][c];
        if (ch == '@' || ch == '+') start_.player = {r, c};
        if (ch == '$' || ch == '*') start_.crates.insert({r, c});
        if (ch == '.' || ch == '*' || ch == '+') goals_.insert({r, c});
      }
  }

  /// True when any sequence of moves solves the level.
  bool solvable() const {
    std::set<State> seen;
    std::vector<State> stack{start_};
    seen.insert(start_);
    while (!stack.empty()) {
      State s = stack.back();
      stack.pop_back();
      if (s.crates == goals_) return true;
      for (int d = 0; d < 4; ++d) {
        auto t = move(s, d);
        if (t && seen.insert(*t).second) stack.push_back(*t);
      }
    }
    return false;
  }

  /// Optimal move count by iterative deepening, or -1 above max_depth.
  int optimal_length(int max_depth) const {
    for (int depth = 0; depth <= max_depth; ++depth) {
      std::map<State, int> memo;
      if (dfs(start_, depth, memo)) return depth;
    }
    return -1;
  }

 private:
  using Cell = std::pair<int, int>;
  struct State {
    Cell player;
    std::set<Cell> crates;
    bool operator<(const State& o) const {
      return player != o.player ? player < o.player : crates < o.crates;
    }
  };

  bool wall(Cell c) const {
    return c.first < 0 || c.second < 0 || c.first >= h_ || c.second >= w_ || grid_[c.first][c.second] == '#';
  }

  std::optional<State> move(const State& s, int d) const {
    static const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
    Cell next{s.player.first + dr[d], s.player.second + dc[d]};
    if (wall(next)) return std::nullopt;
    State t = s;
    if (s.crates.count(next)) {
      Cell beyond{next.first + dr[d], next.second + dc[d]};
      if (wall(beyond) || s.crates.count(beyond)) return std::nullopt;
      t.crates.erase(next);
      t.crates.insert(beyond);
    }
    t.player = next;
    return t;
  }

  bool dfs(const State& s, int remaining, std::map<State, int>& memo) const {
    if (s.crates == goals_) return true;
    if (remaining == 0) return false;
    auto it = memo.find(s);
    if (it != memo.end() && it->second >= remaining) return false;
    memo[s] = remaining;
    for (int d = 0; d < 4; ++d) {
      auto t = move(s, d);
      if (t && dfs(*t, remaining - 1, memo)) return true;
    }
    return false;
  }

  std::vector<std::string> grid_;
  int w_ = 0, h_ = 0;
  State start_;
  std::set<Cell> goals_;
};

}  // namespace msgfn::oracle
