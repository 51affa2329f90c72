#pragma once

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <vector>

#include "msgfn/games/analysis.hpp"
#include "msgfn/games/level.hpp"

namespace msgfn::zelda {

inline bool is_enemy(TileId t) { return t == bat || t == spider || t == scorpion; }

/// 4-connected BFS distances from `source`. Walls and the door block; a cell
/// listed in `target` may be entered but not left. -1 marks unreachable.
inline std::vector<int> distances(const Level& level, int source, int target = -1) {
  const int w = level.width, n = level.area();
  std::vector<int> dist(n, -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  static constexpr int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    if (c == target) continue;
    for (int d = 0; d < 4; ++d) {
      const int r2 = c / w + dr[d], c2 = c % w + dc[d];
      if (!level.inside(r2, c2)) continue;
      const int i = r2 * w + c2;
      if (dist[i] >= 0) continue;
      const TileId t = level.cells[i];
      if (t == wall || (t == door && i != target)) continue;
      dist[i] = dist[c] + 1;
      queue.push_back(i);
    }
  }
  return dist;
}

inline Analysis analyze_zelda(const Level& level) {
  if (level.game != Game::zelda) throw std::invalid_argument("not a zelda level");
  std::vector<int> players, keys, doors, enemies;
  for (int i = 0; i < level.area(); ++i) {
    const TileId t = level.cells[i];
    if (t == player) players.push_back(i);
    else if (t == key) keys.push_back(i);
    else if (t == door) doors.push_back(i);
    else if (is_enemy(t)) enemies.push_back(i);
  }
  Analysis a;
  a.properties["enemies"] = static_cast<int>(enemies.size());

  std::vector<int> from_player;
  if (players.size() == 1) {
    from_player = distances(level, players[0]);
    int nearest = -1;
    for (int e : enemies)
      if (from_player[e] >= 0 && (nearest < 0 || from_player[e] < nearest)) nearest = from_player[e];
    if (nearest >= 0) a.properties["nearest_enemy"] = nearest;
    if (keys.size() == 1 && doors.size() == 1 && from_player[keys[0]] >= 0) {
      const auto from_key = distances(level, keys[0], doors[0]);
      if (from_key[doors[0]] >= 0)
        a.properties["path_length"] = from_player[keys[0]] + from_key[doors[0]];
    }
  }

  const int max_enemies = std::max(level.width, level.height);
  if (players.size() != 1)
    return fail(FailureReason::requirements, "player count " + std::to_string(players.size()), a);
  if (keys.size() != 1) return fail(FailureReason::requirements, "key count " + std::to_string(keys.size()), a);
  if (doors.size() != 1)
    return fail(FailureReason::requirements, "door count " + std::to_string(doors.size()), a);
  if (enemies.empty() || static_cast<int>(enemies.size()) > max_enemies)
    return fail(FailureReason::requirements, "enemy count " + std::to_string(enemies.size()), a);
  if (!a.has("path_length")) return fail(FailureReason::unsolvable, "no path from player to key to door", a);
  for (int e : enemies)
    if (from_player[e] < 0) return fail(FailureReason::unsolvable, "an enemy cannot reach the player", a);
  a.playable = true;
  return a;
}

}  // namespace msgfn::zelda
