#pragma once

#include <vector>

#include "msgfn/games/game.hpp"
#include "msgfn/training/replay.hpp"
#include "msgfn/util/rng.hpp"

namespace msgfn {

/// Requested controls for one rollout.
struct Conditions {
  std::vector<double> u;  // snapped, normalized
  std::vector<int> values;
};

inline Conditions snap_values(const std::vector<double>& raw, Size size, const std::vector<ControlSpec>& specs) {
  Conditions c;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const int v = specs[i].clamp_value(static_cast<int>(std::lround(raw[i])), size.width, size.height);
    c.values.push_back(v);
    c.u.push_back(specs[i].normalize(v, size.width, size.height));
  }
  return c;
}

/// Property values of a replay level from the buffer of `size` (or the
/// closest populated size) plus uniform noise, rounded and clamped. With
/// every buffer empty each control is drawn uniformly in normalized space.
inline Conditions sample_conditions(const ReplayBuffer& buffer, Size size, const std::vector<ControlSpec>& specs,
                                    Rng& rng, bool diversity = true) {
  const SizeBuffer* source = buffer.find(size);
  if (!source) {
    if (auto near = buffer.closest_populated(size)) source = buffer.find(*near);
  }
  std::vector<double> raw(specs.size());
  if (!source) {
    for (std::size_t i = 0; i < specs.size(); ++i)
      raw[i] = uniform01(rng) * specs[i].den(size.width, size.height);
    return snap_values(raw, size, specs);
  }
  const ReplayEntry& e = diversity ? source->diversity_sample(rng) : source->uniform_sample(rng);
  for (std::size_t i = 0; i < specs.size(); ++i)
    raw[i] = e.properties.at(specs[i].name) + uniform(rng, specs[i].noise_lo, specs[i].noise_hi);
  return snap_values(raw, size, specs);
}

/// Flips each axis the game allows with probability 1/2.
inline Level augment(const Level& level, const GameSpec& spec, Rng& rng) {
  bool h = false, v = false;
  if (spec.allows(FlipAxis::horizontal)) h = uniform01(rng) < 0.5;
  if (spec.allows(FlipAxis::vertical)) v = uniform01(rng) < 0.5;
  return h || v ? flip_level(level, h, v) : level;
}

}  // namespace msgfn
