#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgfn/games/analysis.hpp"
#include "msgfn/games/level.hpp"
#include "msgfn/games/sokoban.hpp"

namespace msgfn {

/// A user-facing level property. Values are integers in property units;
/// the network sees them divided by den(w, h).
struct ControlSpec {
  std::string name;
  std::function<double(int, int)> den;
  double noise_lo = 0;  // training noise, property units
  double noise_hi = 0;
  std::function<int(int, int)> min_value;
  std::function<int(int, int)> max_value;  // INT_MAX when unbounded
  int n_test = 100;
  std::function<int(int, int)> test_lo;
  std::function<int(int, int)> test_hi;
  int tolerance = 0;  // |requested - measured| counted as a hit

  int clamp_value(int v, int w, int h) const {
    const int lo = min_value(w, h);
    const int hi = std::max(lo, max_value(w, h));
    return std::clamp(v, lo, hi);
  }
  int to_value(double u, int w, int h) const {
    return clamp_value(static_cast<int>(std::lround(u * den(w, h))), w, h);
  }
  double normalize(double value, int w, int h) const { return value / den(w, h); }
  double snap(double u, int w, int h) const { return normalize(to_value(u, w, h), w, h); }

  /// Requested values used for control evaluation at size (w, h).
  std::vector<int> test_grid(int w, int h) const {
    std::vector<int> out;
    for (int v = test_lo(w, h); v <= test_hi(w, h); ++v) out.push_back(v);
    if (out.empty()) out.push_back(test_lo(w, h));
    return out;
  }
};

namespace detail {
inline int area(int w, int h) { return w * h; }
inline int longest(int w, int h) { return std::max(w, h); }
inline int unbounded(int, int) { return INT_MAX; }
inline std::function<int(int, int)> constant(int v) {
  return [v](int, int) { return v; };
}
}  // namespace detail

inline std::vector<ControlSpec> control_specs(Game game) {
  using detail::constant;
  const auto area_den = [](int w, int h) { return static_cast<double>(w * h); };
  switch (game) {
    case Game::sokoban:
      return {
          {"pushed_crates", [](int w, int h) { return (w + h) / 2.0; }, -1, 1, constant(1),
           [](int w, int h) { return w * h - 2; }, 1000, constant(1), constant(10), 2},
          {"solution_length", area_den, -5, 10, constant(1), detail::unbounded, 100, constant(1),
           constant(100), 10},
      };
    case Game::zelda:
      return {
          {"nearest_enemy", area_den, -2, 5, constant(1), [](int w, int h) { return w * h - 1; }, 100,
           constant(1), [](int w, int h) { return w * h / 2; }, 2},
          {"path_length", area_den, -5, 10, constant(2), detail::unbounded, 100, constant(2), detail::area,
           10},
          {"enemies", area_den, -1, 2, constant(1), detail::longest, 1000, constant(1), detail::longest, 2},
      };
    case Game::dave:
      return {
          {"solution_length", area_den, -5, 10, constant(1), detail::unbounded, 100, constant(2),
           detail::area, 10},
          {"jumps", [](int w, int h) { return static_cast<double>(std::max(w, h)); }, -1, 2, constant(0),
           detail::unbounded, 100, constant(1), [](int w, int h) { return w * h / 4; }, 2},
          {"spikes", area_den, -1, 1, constant(0),
           [](int w, int h) { return std::max(0, (w - 1) * (h / 2) - 1); }, 1000, constant(1),
           detail::longest, 2},
      };
  }
  return {};
}

inline int control_index(const std::vector<ControlSpec>& specs, const std::string& name) {
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (specs[i].name == name) return static_cast<int>(i);
  return -1;
}

/// Measured properties divided by their size denominators.
inline std::vector<double> measure_controls(const Level& level, const Analysis& analysis,
                                            const std::vector<ControlSpec>& specs) {
  std::vector<double> u;
  u.reserve(specs.size());
  for (const auto& spec : specs) {
    auto it = analysis.properties.find(spec.name);
    if (it == analysis.properties.end()) throw std::invalid_argument("missing property " + spec.name);
    u.push_back(spec.normalize(it->second, level.width, level.height));
  }
  return u;
}

using ClusterKey = std::vector<std::int64_t>;

/// Coarsened properties identifying a replay cluster. With `use_signature`,
/// Sokoban levels are keyed by their solution signature instead.
inline ClusterKey cluster_key(const Level& level, const Analysis& a, bool use_signature = false) {
  const int w = level.width, h = level.height;
  const int g = std::max(1, (w + h) / 2);
  switch (level.game) {
    case Game::sokoban: {
      if (use_signature && a.solution) {
        ClusterKey key;
        for (const auto& [id, dir] : sokoban::solution_signature(level, *a.solution)) {
          key.push_back(id);
          key.push_back(dir);
        }
        return key;
      }
      return {a.property("pushed_crates"), a.property("solution_length") / (w + h)};
    }
    case Game::zelda: return {a.property("nearest_enemy") / g, a.property("path_length") / g};
    case Game::dave: return {a.property("jumps"), a.property("solution_length") / g};
  }
  return {};
}

}  // namespace msgfn
