#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgfn/games/analysis.hpp"
#include "msgfn/games/controls.hpp"
#include "msgfn/games/dave.hpp"
#include "msgfn/games/level.hpp"
#include "msgfn/games/sokoban.hpp"
#include "msgfn/games/zelda.hpp"

namespace msgfn {

enum class FlipAxis { horizontal, vertical };

struct GameSpec {
  Game game;
  std::string name;
  std::string tiles;  // character per tile id
  std::vector<FlipAxis> flip_axes;
  std::vector<ControlSpec> controls;

  std::size_t tile_count() const { return tiles.size(); }
  bool allows(FlipAxis axis) const {
    return std::find(flip_axes.begin(), flip_axes.end(), axis) != flip_axes.end();
  }
};

inline GameSpec game_spec(Game game) {
  GameSpec spec{game, game_name(game), std::string(tile_chars(game)), {FlipAxis::horizontal},
                control_specs(game)};
  if (game != Game::dave) spec.flip_axes.push_back(FlipAxis::vertical);
  return spec;
}

/// Solver budget for a level of the given size.
inline std::size_t solver_budget(Game game, int width, int height) {
  return game == Game::sokoban ? sokoban::default_budget(width, height) : dave::default_budget(width, height);
}

inline Analysis analyze(const Level& level) {
  switch (level.game) {
    case Game::sokoban: return sokoban::analyze_sokoban(level);
    case Game::zelda: return zelda::analyze_zelda(level);
    case Game::dave: return dave::analyze_dave(level);
  }
  throw std::invalid_argument("unknown game");
}

/// Mirrors the grid. Horizontal mirrors columns, vertical mirrors rows.
inline Level flip_level(const Level& level, bool horizontal, bool vertical) {
  const GameSpec spec = game_spec(level.game);
  if (horizontal && !spec.allows(FlipAxis::horizontal))
    throw std::invalid_argument(spec.name + " levels cannot be flipped horizontally");
  if (vertical && !spec.allows(FlipAxis::vertical))
    throw std::invalid_argument(spec.name + " levels cannot be flipped vertically");
  Level out = level;
  for (int r = 0; r < level.height; ++r)
    for (int c = 0; c < level.width; ++c)
      out.at(r, c) = level.at(vertical ? level.height - 1 - r : r, horizontal ? level.width - 1 - c : c);
  return out;
}

}  // namespace msgfn
