#pragma once

#include <map>
#include <set>
#include <vector>

#include "msgfn/games/level.hpp"

namespace msgfn {

/// Which sizes receive loss terms. Seed sizes are always active; any other
/// size becomes active after its first playable rollout and stays active.
struct CurriculumState {
  std::vector<Size> seed_sizes;
  std::vector<Size> sizes;  // every configured size, in config order
  std::set<Size> active;
  std::map<Size, int> first_playable;  // iteration of the first playable rollout

  CurriculumState() = default;
  CurriculumState(std::vector<Size> seeds, std::vector<Size> all)
      : seed_sizes(std::move(seeds)), sizes(std::move(all)), active(seed_sizes.begin(), seed_sizes.end()) {}

  bool is_active(Size s) const { return active.count(s) != 0; }

  void record_playable(Size s, int iteration) { first_playable.try_emplace(s, iteration); }

  /// Activates every size that has produced a playable level. Returns the
  /// sizes that were newly added.
  std::vector<Size> activate_discovered() {
    std::vector<Size> added;
    for (Size s : sizes)
      if (first_playable.count(s) && active.insert(s).second) added.push_back(s);
    return added;
  }

  friend bool operator==(const CurriculumState&, const CurriculumState&) = default;
};

}  // namespace msgfn
