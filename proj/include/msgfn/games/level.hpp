#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msgfn/util/errors.hpp"

namespace msgfn {

enum class Game : std::uint8_t { sokoban = 0, zelda = 1, dave = 2 };

using TileId = std::uint8_t;

/// Characters of each game's tileset, indexed by tile id.
inline std::string_view tile_chars(Game g) {
  switch (g) {
    case Game::sokoban: return " #@$.*+";
    case Game::zelda: return ".wA+g123";
    case Game::dave: return ".#A+g$^";
  }
  return {};
}

inline std::size_t tile_count(Game g) { return tile_chars(g).size(); }

inline std::string game_name(Game g) {
  switch (g) {
    case Game::sokoban: return "sokoban";
    case Game::zelda: return "zelda";
    case Game::dave: return "dave";
  }
  return "unknown";
}

inline Game parse_game(std::string_view name) {
  if (name == "sokoban") return Game::sokoban;
  if (name == "zelda") return Game::zelda;
  if (name == "dave" || name == "danger-dave" || name == "dangerdave") return Game::dave;
  throw ConfigError("game", "unknown game '" + std::string(name) + "'");
}

namespace sokoban {
enum Tile : TileId { empty, wall, player, crate, goal, crate_on_goal, player_on_goal };
}
namespace zelda {
enum Tile : TileId { empty, wall, player, key, door, bat, spider, scorpion };
}
namespace dave {
enum Tile : TileId { empty, wall, player, key, door, diamond, spike };
}

struct Level {
  Game game = Game::sokoban;
  int width = 0;
  int height = 0;
  std::vector<TileId> cells;  // row-major, height x width

  Level() = default;
  Level(Game g, int w, int h, TileId fill = 0)
      : game(g), width(w), height(h), cells(static_cast<std::size_t>(w) * h, fill) {}

  TileId at(int row, int col) const { return cells[static_cast<std::size_t>(row) * width + col]; }
  TileId& at(int row, int col) { return cells[static_cast<std::size_t>(row) * width + col]; }
  bool inside(int row, int col) const { return row >= 0 && col >= 0 && row < height && col < width; }
  int area() const { return width * height; }

  bool operator==(const Level&) const = default;
};

inline Level parse_level(std::string_view text, Game game) {
  const std::string_view chars = tile_chars(game);
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  if (text.empty()) throw ParseError("empty level");
  std::vector<std::string_view> rows;
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = text.find('\n', start);
    std::string_view row = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    rows.push_back(row);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  const std::size_t w = rows[0].size();
  if (w == 0) throw ParseError("empty row", 0);
  Level level(game, static_cast<int>(w), static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != w)
      throw ParseError("ragged rows: expected " + std::to_string(w) + " columns, got " +
                           std::to_string(rows[r].size()),
                       static_cast<int>(r));
    for (std::size_t c = 0; c < w; ++c) {
      const auto pos = chars.find(rows[r][c]);
      if (pos == std::string_view::npos)
        throw ParseError(std::string("unknown character '") + rows[r][c] + "' for " +
                             game_name(game),
                         static_cast<int>(r), static_cast<int>(c));
      level.at(static_cast<int>(r), static_cast<int>(c)) = static_cast<TileId>(pos);
    }
  }
  return level;
}

/// Rows joined by newlines, no trailing newline.
inline std::string render_level(const Level& level) {
  const std::string_view chars = tile_chars(level.game);
  std::string out;
  out.reserve(static_cast<std::size_t>(level.width + 1) * level.height);
  for (int r = 0; r < level.height; ++r) {
    if (r) out.push_back('\n');
    for (int c = 0; c < level.width; ++c) out.push_back(chars[level.at(r, c)]);
  }
  return out;
}

inline std::size_t count_tiles(const Level& level, std::initializer_list<TileId> ids) {
  std::size_t n = 0;
  for (TileId t : level.cells)
    for (TileId id : ids)
      if (t == id) ++n;
  return n;
}

struct Size {
  int width = 0;
  int height = 0;
  int area() const { return width * height; }
  auto operator<=>(const Size&) const = default;
};

inline std::string size_string(Size s) {
  return std::to_string(s.width) + "x" + std::to_string(s.height);
}

/// Parses "WxH".
inline Size parse_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  auto number = [&](std::string_view part) {
    if (part.empty() || part.size() > 4) throw ConfigError("size", "expected WxH, got '" + std::string(text) + "'");
    int v = 0;
    for (char ch : part) {
      if (ch < '0' || ch > '9') throw ConfigError("size", "expected WxH, got '" + std::string(text) + "'");
      v = v * 10 + (ch - '0');
    }
    if (v < 1) throw ConfigError("size", "dimensions must be positive");
    return v;
  };
  if (x == std::string_view::npos) throw ConfigError("size", "expected WxH, got '" + std::string(text) + "'");
  return {number(text.substr(0, x)), number(text.substr(x + 1))};
}

}  // namespace msgfn
