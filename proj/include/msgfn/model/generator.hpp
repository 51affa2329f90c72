#pragma once

#include <functional>
#include <vector>

#include "msgfn/games/level.hpp"
#include "msgfn/model/policy.hpp"
#include "msgfn/util/rng.hpp"

namespace msgfn {

/// Maps a batch of normalized condition vectors to levels. Row b must draw
/// only from rngs[b] so results do not depend on batching.
using GenerateFn =
    std::function<std::vector<Level>(const std::vector<std::vector<double>>& u, Size size, std::vector<Rng>& rngs)>;

inline GenerateFn policy_generator(const Policy& policy, Game game, std::size_t threads = 1) {
  return [&policy, game, threads](const std::vector<std::vector<double>>& u, Size size, std::vector<Rng>& rngs) {
    std::vector<Level> out;
    out.reserve(u.size());
    for (const Trajectory& t : rollout_batch(policy, u, size, rngs, threads))
      out.push_back(sequence_to_level(t.tiles, size, game));
    return out;
  };
}

}  // namespace msgfn
