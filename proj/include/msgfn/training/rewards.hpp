#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "msgfn/games/game.hpp"
#include "msgfn/training/replay.hpp"
#include "msgfn/util/errors.hpp"

namespace msgfn {

struct RewardConfig {
  bool diversity = true;
  bool property = true;
  bool use_signature = false;
};

/// log R- = -wh ln|A|.
inline double unplayable_log_reward(Size size, std::size_t tiles) {
  return -static_cast<double>(size.area()) * std::log(static_cast<double>(tiles));
}

/// 0 when playable and every measured property equals the requested value,
/// otherwise log R-.
inline double log_reward(const Level& level, const std::vector<double>& u_requested, const Analysis& analysis,
                         const std::vector<ControlSpec>& specs) {
  const double miss = unplayable_log_reward({level.width, level.height}, tile_count(level.game));
  if (!analysis.playable) return miss;
  if (u_requested.size() != specs.size()) throw DimensionError("log_reward: control count mismatch");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto it = analysis.properties.find(specs[i].name);
    if (it == analysis.properties.end()) return miss;
    if (specs[i].to_value(u_requested[i], level.width, level.height) != it->second) return miss;
  }
  return 0.0;
}

/// ln(max cluster) - ln(own cluster), where the level counts as a member of
/// its own cluster whether or not it is stored yet.
inline double diversity_log_reward(const Level& level, const ClusterKey& key, const SizeBuffer* buffer) {
  if (!buffer) return 0.0;
  const std::size_t own = buffer->cluster_size(key) + (buffer->contains(level) ? 0 : 1);
  const std::size_t largest = std::max(buffer->max_cluster_size(), own);
  return std::log(static_cast<double>(largest)) - std::log(static_cast<double>(own));
}

/// Name of the property whose logarithm is added as a bonus, or empty.
inline std::string property_reward_name(Game game) {
  switch (game) {
    case Game::sokoban: return "solution_length";
    case Game::zelda: return "path_length";
    case Game::dave: return "";
  }
  return "";
}

inline double property_log_reward(Game game, const std::map<std::string, int>& properties) {
  const std::string name = property_reward_name(game);
  if (name.empty()) return 0.0;
  auto it = properties.find(name);
  if (it == properties.end() || it->second < 1) return 0.0;
  return std::log(static_cast<double>(it->second));
}

/// Match reward plus diversity and property bonuses. Bonuses only apply to
/// playable levels.
inline double total_log_reward(const Level& level, const std::vector<double>& u_requested,
                               const Analysis& analysis, const ReplayBuffer& buffer,
                               const std::vector<ControlSpec>& specs, const RewardConfig& cfg) {
  double r = log_reward(level, u_requested, analysis, specs);
  if (!analysis.playable) return r;
  if (cfg.diversity)
    r += diversity_log_reward(level, cluster_key(level, analysis, cfg.use_signature),
                              buffer.find({level.width, level.height}));
  if (cfg.property) r += property_log_reward(level.game, analysis.properties);
  return r;
}

/// (log z0 + log Pf - log R)^2.
inline double tb_loss(double log_z0, double log_pf, double log_r) {
  if (!std::isfinite(log_z0) || !std::isfinite(log_pf) || !std::isfinite(log_r))
    throw NonFiniteError("tb_loss: non-finite input");
  const double d = log_z0 + log_pf - log_r;
  return d * d;
}

}  // namespace msgfn
