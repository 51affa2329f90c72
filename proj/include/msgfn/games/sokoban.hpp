#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msgfn/games/analysis.hpp"
#include "msgfn/games/level.hpp"
#include "msgfn/util/errors.hpp"
#include "msgfn/util/rng.hpp"

namespace msgfn::sokoban {

inline constexpr int kDr[4] = {-1, 1, 0, 0};
inline constexpr int kDc[4] = {0, 0, -1, 1};
inline constexpr char kMoves[4] = {'U', 'D', 'L', 'R'};

inline int direction_of(char move) {
  for (int d = 0; d < 4; ++d)
    if (kMoves[d] == move) return d;
  return -1;
}

/// Walls, goals, the player and crates of a level, with composite tiles split.
struct Board {
  int width = 0;
  int height = 0;
  std::vector<char> wall;
  std::vector<char> goal;
  std::vector<int> players;  // cell indices
  std::vector<int> crates;   // cell indices in scan order

  int cells() const { return width * height; }
  int neighbor(int cell, int d) const {
    const int r = cell / width + kDr[d], c = cell % width + kDc[d];
    if (r < 0 || c < 0 || r >= height || c >= width) return -1;
    return r * width + c;
  }
  bool open(int cell) const { return cell >= 0 && !wall[cell]; }
  int goal_count() const { return static_cast<int>(std::count(goal.begin(), goal.end(), 1)); }
};

inline Board decompose(const Level& level) {
  if (level.game != Game::sokoban) throw std::invalid_argument("not a sokoban level");
  Board b;
  b.width = level.width;
  b.height = level.height;
  b.wall.assign(level.cells.size(), 0);
  b.goal.assign(level.cells.size(), 0);
  for (int i = 0; i < level.area(); ++i) {
    switch (level.cells[i]) {
      case wall: b.wall[i] = 1; break;
      case player: b.players.push_back(i); break;
      case crate: b.crates.push_back(i); break;
      case goal: b.goal[i] = 1; break;
      case crate_on_goal:
        b.crates.push_back(i);
        b.goal[i] = 1;
        break;
      case player_on_goal:
        b.players.push_back(i);
        b.goal[i] = 1;
        break;
      default: break;
    }
  }
  return b;
}

/// Cells from which a crate can still be pushed onto some goal.
inline std::vector<char> live_cells(const Board& b) {
  std::vector<char> live(b.cells(), 0);
  std::deque<int> queue;
  for (int i = 0; i < b.cells(); ++i)
    if (b.goal[i] && !b.wall[i]) {
      live[i] = 1;
      queue.push_back(i);
    }
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      // a crate at `from` pushed in direction d lands on c; the pusher stands behind it
      const int back = d ^ 1;
      const int from = b.neighbor(c, back);
      if (!b.open(from) || live[from]) continue;
      if (!b.open(b.neighbor(from, back))) continue;
      live[from] = 1;
      queue.push_back(from);
    }
  }
  return live;
}

/// Expansion budget by level area.
inline std::size_t default_budget(int width, int height) {
  const int area = width * height;
  if (area <= 9) return 500;
  if (area <= 16) return 50'000;
  if (area <= 25) return 500'000;
  return 1'000'000;
}

struct SolveResult {
  std::optional<std::string> solution;
  bool exhausted = false;
  std::size_t expanded = 0;
};

namespace detail {

template <std::size_t W>
class PushSearch {
 public:
  using Bits = std::array<std::uint64_t, W>;

  explicit PushSearch(const Board& b) : b_(b), live_(live_cells(b)) {}

  SolveResult run(std::size_t limit) {
    SolveResult result;
    if (b_.players.size() != 1) return result;
    Bits start{}, target{};
    for (int c : b_.crates) set(start, c);
    for (int i = 0; i < b_.cells(); ++i)
      if (b_.goal[i]) set(target, i);
    if (start == target) {
      result.solution = std::string();
      return result;
    }
    table_.assign(1024, kNone);
    insert(static_cast<std::uint16_t>(b_.players[0]), start, kNone, 0);
    std::size_t head = 0;
    while (head < crates_.size()) {
      if (result.expanded >= limit) {
        result.exhausted = true;
        return result;
      }
      const std::uint32_t s = static_cast<std::uint32_t>(head++);
      ++result.expanded;
      const Bits cur = crates_[s];
      const int p = player_[s];
      for (int d = 0; d < 4; ++d) {
        const int p2 = b_.neighbor(p, d);
        if (!b_.open(p2)) continue;
        Bits next = cur;
        bool pushed = false;
        if (test(cur, p2)) {
          const int p3 = b_.neighbor(p2, d);
          if (!b_.open(p3) || test(cur, p3) || !live_[p3]) continue;
          reset(next, p2);
          set(next, p3);
          pushed = true;
        }
        const auto idx = insert(static_cast<std::uint16_t>(p2), next, s, static_cast<std::uint8_t>(d));
        if (idx == kNone) continue;
        if (pushed && next == target) {
          result.solution = trace(idx);
          return result;
        }
      }
    }
    return result;
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  static void set(Bits& bits, int i) { bits[i >> 6] |= std::uint64_t{1} << (i & 63); }
  static void reset(Bits& bits, int i) { bits[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  static bool test(const Bits& bits, int i) { return (bits[i >> 6] >> (i & 63)) & 1U; }

  static std::uint64_t hash(std::uint16_t p, const Bits& bits) {
    std::uint64_t h = splitmix64(p);
    for (auto w : bits) h = splitmix64(h ^ w);
    return h;
  }

  // Returns the new state's index, or kNone when it was already present.
  std::uint32_t insert(std::uint16_t p, const Bits& bits, std::uint32_t parent, std::uint8_t move) {
    if ((crates_.size() + 1) * 2 > table_.size()) grow();
    const std::size_t mask = table_.size() - 1;
    std::size_t slot = hash(p, bits) & mask;
    while (table_[slot] != kNone) {
      const auto i = table_[slot];
      if (player_[i] == p && crates_[i] == bits) return kNone;
      slot = (slot + 1) & mask;
    }
    const auto idx = static_cast<std::uint32_t>(crates_.size());
    table_[slot] = idx;
    crates_.push_back(bits);
    player_.push_back(p);
    parent_.push_back(parent);
    move_.push_back(move);
    return idx;
  }

  void grow() {
    table_.assign(table_.size() * 2, kNone);
    const std::size_t mask = table_.size() - 1;
    for (std::uint32_t i = 0; i < crates_.size(); ++i) {
      std::size_t slot = hash(player_[i], crates_[i]) & mask;
      while (table_[slot] != kNone) slot = (slot + 1) & mask;
      table_[slot] = i;
    }
  }

  std::string trace(std::uint32_t idx) const {
    std::string moves;
    while (parent_[idx] != kNone) {
      moves.push_back(kMoves[move_[idx]]);
      idx = parent_[idx];
    }
    std::reverse(moves.begin(), moves.end());
    return moves;
  }

  const Board& b_;
  std::vector<char> live_;
  std::vector<std::uint32_t> table_;
  std::vector<Bits> crates_;
  std::vector<std::uint16_t> player_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> move_;
};

template <std::size_t W>
SolveResult run_search(const Board& b, std::size_t limit) {
  return PushSearch<W>(b).run(limit);
}

}  // namespace detail

/// Breadth-first search over (player, crate set) states; the first solution
/// found is shortest in player moves. Expands at most `limit` states.
inline SolveResult solve_detailed(const Level& level, std::size_t limit) {
  const Board b = decompose(level);
  const int words = (b.cells() + 63) / 64;
  if (words <= 1) return detail::run_search<1>(b, limit);
  if (words <= 2) return detail::run_search<2>(b, limit);
  if (words <= 4) return detail::run_search<4>(b, limit);
  if (words <= 8) return detail::run_search<8>(b, limit);
  if (words <= 16) return detail::run_search<16>(b, limit);
  throw DimensionError("sokoban levels are limited to 1024 cells");
}

inline std::optional<std::string> solve_sokoban(const Level& level, std::size_t iteration_limit) {
  return solve_detailed(level, iteration_limit).solution;
}

struct Replay {
  bool solved = false;
  std::vector<std::pair<int, char>> pushes;  // (crate id, direction) per push
};

/// Plays `moves` from the initial layout. Crates are identified by their
/// rank in scan order at the start. Throws on an illegal move.
inline Replay replay(const Level& level, std::string_view moves) {
  const Board b = decompose(level);
  if (b.players.size() != 1) throw std::invalid_argument("level needs exactly one player");
  std::vector<int> owner(b.cells(), -1);
  for (std::size_t i = 0; i < b.crates.size(); ++i) owner[b.crates[i]] = static_cast<int>(i);
  int p = b.players[0];
  Replay out;
  for (char m : moves) {
    const int d = direction_of(m);
    if (d < 0) throw std::invalid_argument(std::string("bad move '") + m + "'");
    const int p2 = b.neighbor(p, d);
    if (!b.open(p2)) throw std::invalid_argument("move into wall");
    if (owner[p2] >= 0) {
      const int p3 = b.neighbor(p2, d);
      if (!b.open(p3) || owner[p3] >= 0) throw std::invalid_argument("blocked push");
      out.pushes.emplace_back(owner[p2], m);
      owner[p3] = owner[p2];
      owner[p2] = -1;
    }
    p = p2;
  }
  out.solved = true;
  for (int i = 0; i < b.cells(); ++i)
    if (b.goal[i] != (owner[i] >= 0 ? 1 : 0)) out.solved = false;
  return out;
}

inline int pushed_crates(const Level& level, std::string_view moves) {
  const Replay r = replay(level, moves);
  std::vector<int> ids;
  for (const auto& [id, dir] : r.pushes) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return static_cast<int>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

using Signature = std::vector<std::pair<int, char>>;

/// Push segments of a solution, consecutive pushes of one crate in one
/// direction collapsed.
inline Signature solution_signature(const Level& level, std::string_view moves) {
  const Replay r = replay(level, moves);
  if (!r.solved) throw std::invalid_argument("solution does not solve the level");
  Signature sig;
  for (const auto& push : r.pushes)
    if (sig.empty() || sig.back() != push) sig.push_back(push);
  return sig;
}

inline std::string signature_string(const Signature& sig) {
  std::string s;
  for (const auto& [id, dir] : sig) {
    if (!s.empty()) s.push_back(' ');
    s += std::to_string(id);
    s.push_back(dir);
  }
  return s;
}

inline Analysis analyze_sokoban(const Level& level, std::size_t budget) {
  const Board b = decompose(level);
  if (b.players.size() != 1)
    return fail(FailureReason::requirements, "player count " + std::to_string(b.players.size()));
  if (static_cast<int>(b.crates.size()) != b.goal_count())
    return fail(FailureReason::requirements, "crate and goal counts differ");
  if (count_tiles(level, {crate}) == 0)
    return fail(FailureReason::requirements, "no crate off a goal");
  const SolveResult sr = solve_detailed(level, budget);
  if (!sr.solution)
    return sr.exhausted ? fail(FailureReason::budget, "search budget exhausted")
                        : fail(FailureReason::unsolvable, "no solution");
  Analysis a;
  a.playable = true;
  a.solution = sr.solution;
  a.properties["solution_length"] = static_cast<int>(sr.solution->size());
  a.properties["pushed_crates"] = pushed_crates(level, *sr.solution);
  return a;
}

inline Analysis analyze_sokoban(const Level& level) {
  return analyze_sokoban(level, default_budget(level.width, level.height));
}

}  // namespace msgfn::sokoban
