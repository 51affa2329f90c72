#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgfn/games/analysis.hpp"
#include "msgfn/games/level.hpp"

namespace msgfn::dave {

enum Action : int { left = 0, right = 1, jump = 2, wait = 3 };
inline constexpr char kActions[4] = {'L', 'R', 'J', 'W'};
inline constexpr int kRiseTurns = 2;

/// Player state between turns: position, remaining rise turns, key held.
struct State {
  int row = 0;
  int col = 0;
  int rise = 0;
  bool has_key = false;
  bool operator==(const State&) const = default;
};

enum class Outcome { invalid, dead, moved, won };

inline bool solid(const Level& level, int row, int col) {
  return !level.inside(row, col) || level.at(row, col) == wall;
}

inline bool supported(const Level& level, int row, int col) {
  return row == level.height - 1 || solid(level, row + 1, col);
}

/// Advances one turn: horizontal movement first, then rising or falling.
/// `touched` receives every cell entered during the turn.
inline Outcome step(const Level& level, State& s, int action, std::vector<int>* touched = nullptr) {
  auto enter = [&](int row, int col) {
    s.row = row;
    s.col = col;
    if (touched) touched->push_back(row * level.width + col);
    const TileId t = level.at(row, col);
    if (t == spike) return Outcome::dead;
    if (t == key) s.has_key = true;
    if (t == door && s.has_key) return Outcome::won;
    return Outcome::moved;
  };
  if (action == jump) {
    if (s.rise != 0 || !supported(level, s.row, s.col)) return Outcome::invalid;
    s.rise = kRiseTurns;
  } else if (action == left || action == right) {
    const int col = s.col + (action == left ? -1 : 1);
    if (!solid(level, s.row, col)) {
      const Outcome o = enter(s.row, col);
      if (o != Outcome::moved) return o;
    }
  }
  if (s.rise > 0) {
    if (solid(level, s.row - 1, s.col)) {
      s.rise = 0;
    } else {
      --s.rise;
      return enter(s.row - 1, s.col);
    }
  } else if (!supported(level, s.row, s.col)) {
    return enter(s.row + 1, s.col);
  }
  return Outcome::moved;
}

inline std::size_t default_budget(int, int) { return 1'000'000; }

struct SearchResult {
  std::optional<std::string> solution;
  int jumps = 0;
  bool exhausted = false;
  std::vector<char> reached;  // per cell
};

/// Layered breadth-first search from the player's start. Among the shortest
/// action sequences that reach the door with the key, the one with the fewest
/// jumps wins. Exploration continues past the winning layer so that `reached`
/// covers every cell the player can get to.
inline SearchResult search(const Level& level, int start_cell, std::size_t limit) {
  const int n = level.area();
  auto index = [](const State& s, int width) {
    return ((s.row * width + s.col) * (kRiseTurns + 1) + s.rise) * 2 + (s.has_key ? 1 : 0);
  };
  auto decode = [](int idx, int width) {
    State s;
    s.has_key = idx & 1;
    idx >>= 1;
    s.rise = idx % (kRiseTurns + 1);
    idx /= kRiseTurns + 1;
    s.row = idx / width;
    s.col = idx % width;
    return s;
  };
  const int states = n * (kRiseTurns + 1) * 2;
  std::vector<int> dist(states, -1), jumps(states, 0), parent(states, -1);
  std::vector<std::int8_t> via(states, -1);
  SearchResult out;
  out.reached.assign(n, 0);
  out.reached[start_cell] = 1;

  State start{start_cell / level.width, start_cell % level.width, 0, false};
  std::vector<int> frontier{index(start, level.width)};
  dist[frontier[0]] = 0;
  std::size_t expanded = 0;
  int win_parent = -1, win_action = -1, win_jumps = 0;
  std::vector<int> touched;
  for (int depth = 0; !frontier.empty(); ++depth) {
    std::vector<int> next;
    for (int s : frontier) {
      if (expanded >= limit) {
        out.exhausted = true;
        return out;
      }
      ++expanded;
      for (int a = 0; a < 4; ++a) {
        State st = decode(s, level.width);
        touched.clear();
        const Outcome o = step(level, st, a, &touched);
        if (o == Outcome::invalid) continue;
        for (std::size_t i = 0; i < touched.size(); ++i)
          if (o != Outcome::dead || i + 1 < touched.size()) out.reached[touched[i]] = 1;
        if (o == Outcome::dead) continue;
        const int j = jumps[s] + (a == jump ? 1 : 0);
        if (o == Outcome::won) {
          if (!out.solution && (win_parent < 0 || j < win_jumps)) {
            win_parent = s;
            win_action = a;
            win_jumps = j;
          }
          continue;
        }
        const int t = index(st, level.width);
        if (dist[t] < 0) {
          dist[t] = depth + 1;
          jumps[t] = j;
          parent[t] = s;
          via[t] = static_cast<std::int8_t>(a);
          next.push_back(t);
        } else if (dist[t] == depth + 1 && j < jumps[t]) {
          jumps[t] = j;
          parent[t] = s;
          via[t] = static_cast<std::int8_t>(a);
        }
      }
    }
    if (!out.solution && win_parent >= 0) {
      std::string moves(1, kActions[win_action]);
      for (int s = win_parent; parent[s] >= 0; s = parent[s]) moves.push_back(kActions[via[s]]);
      std::reverse(moves.begin(), moves.end());
      out.solution = moves;
      out.jumps = win_jumps;
    }
    frontier = std::move(next);
  }
  return out;
}

inline Analysis analyze_dave(const Level& level, std::size_t iteration_limit) {
  if (level.game != Game::dave) throw std::invalid_argument("not a dave level");
  std::vector<int> players, keys, doors, diamonds;
  int spikes = 0;
  for (int i = 0; i < level.area(); ++i) {
    switch (level.cells[i]) {
      case player: players.push_back(i); break;
      case key: keys.push_back(i); break;
      case door: doors.push_back(i); break;
      case diamond: diamonds.push_back(i); break;
      case spike: ++spikes; break;
      default: break;
    }
  }
  Analysis a;
  a.properties["spikes"] = spikes;
  if (players.size() != 1)
    return fail(FailureReason::requirements, "player count " + std::to_string(players.size()), a);
  if (keys.size() != 1) return fail(FailureReason::requirements, "key count " + std::to_string(keys.size()), a);
  if (doors.size() != 1)
    return fail(FailureReason::requirements, "door count " + std::to_string(doors.size()), a);
  const int prow = players[0] / level.width, pcol = players[0] % level.width;
  if (!supported(level, prow, pcol)) return fail(FailureReason::requirements, "player is not on the ground", a);
  if (spikes >= (level.width - 1) * (level.height / 2))
    return fail(FailureReason::requirements, "too many spikes", a);
  if (diamonds.empty() || static_cast<int>(diamonds.size()) > std::max(level.width, level.height))
    return fail(FailureReason::requirements, "diamond count " + std::to_string(diamonds.size()), a);

  const SearchResult sr = search(level, players[0], iteration_limit);
  if (sr.exhausted) return fail(FailureReason::budget, "search budget exhausted", a);
  if (sr.solution) {
    a.solution = sr.solution;
    a.properties["solution_length"] = static_cast<int>(sr.solution->size());
    a.properties["jumps"] = sr.jumps;
  }
  for (int d : diamonds)
    if (!sr.reached[d]) return fail(FailureReason::unsolvable, "unreachable diamond", a);
  if (!sr.solution) return fail(FailureReason::unsolvable, "no solution", a);
  a.playable = true;
  return a;
}

inline Analysis analyze_dave(const Level& level) {
  return analyze_dave(level, default_budget(level.width, level.height));
}

}  // namespace msgfn::dave
