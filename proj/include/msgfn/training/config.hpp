#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msgfn/games/level.hpp"
#include "msgfn/util/errors.hpp"

namespace msgfn {

struct TrainConfig {
  Game game = Game::sokoban;
  std::vector<Size> seed_sizes;
  std::vector<Size> intermediate_sizes;
  std::vector<Size> desired_sizes;
  int iterations = 10000;
  int batch_size = 32;
  int replay_batch = 16;
  double lr_policy = 1e-3;
  double lr_flow = 1e-2;
  double rms_alpha = 0.99;
  double rms_eps = 1e-8;
  double clip_norm = 0.0;
  bool diversity_sampling = true;
  bool diversity_reward = true;
  bool property_reward = true;
  bool augmentation = true;
  bool signature_key = false;
  std::uint64_t seed = 0;
  int checkpoint_every = 500;
  std::string output_dir;

  /// Seed, intermediate, then desired sizes.
  std::vector<Size> all_sizes() const {
    std::vector<Size> out = seed_sizes;
    out.insert(out.end(), intermediate_sizes.begin(), intermediate_sizes.end());
    out.insert(out.end(), desired_sizes.begin(), desired_sizes.end());
    return out;
  }

  void validate() const {
    if (seed_sizes.empty()) throw ConfigError("sizes.seed", "at least one seed size is required");
    std::set<Size> seen;
    for (Size s : all_sizes()) {
      if (s.width < 1 || s.height < 1) throw ConfigError("sizes", "sizes must be at least 1x1");
      if (!seen.insert(s).second) throw ConfigError("sizes", "duplicate size " + size_string(s));
    }
    if (iterations < 0) throw ConfigError("iterations", "must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
    if (replay_batch < 0) throw ConfigError("replay_batch", "must be >= 0");
    if (!(lr_policy > 0)) throw ConfigError("lr_policy", "must be positive");
    if (!(lr_flow > 0)) throw ConfigError("lr_flow", "must be positive");
    if (!(rms_alpha >= 0 && rms_alpha < 1)) throw ConfigError("rms_alpha", "must be in [0, 1)");
    if (!(rms_eps > 0)) throw ConfigError("rms_eps", "must be positive");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every", "must be >= 0");
    if (signature_key && game != Game::sokoban) throw ConfigError("signature_key", "only defined for sokoban");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Default sizes and toggles for each game.
inline TrainConfig preset_config(Game game) {
  TrainConfig c;
  c.game = game;
  if (game == Game::sokoban) {
    c.seed_sizes = {{3, 3}};
    c.intermediate_sizes = {{4, 4}, {5, 5}, {6, 6}};
    c.desired_sizes = {{7, 7}};
  } else {
    c.seed_sizes = {{3, 4}};
    c.intermediate_sizes = {{3, 6}, {5, 4}, {5, 6}, {7, 6}};
    c.desired_sizes = {{5, 11}, {7, 11}};
  }
  c.property_reward = game != Game::dave;
  return c;
}

namespace detail {

inline nlohmann::json sizes_json(const std::vector<Size>& sizes) {
  auto a = nlohmann::json::array();
  for (Size s : sizes) a.push_back(size_string(s));
  return a;
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(field, std::string("wrong type (") + j.type_name() + ")");
  }
}

inline std::vector<Size> parse_sizes(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected a list of \"WxH\" strings");
  std::vector<Size> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(field, "expected a list of \"WxH\" strings");
    try {
      out.push_back(parse_size(v.get<std::string>()));
    } catch (const ConfigError& e) {
      throw ConfigError(field, e.what());
    }
  }
  return out;
}

}  // namespace detail

inline nlohmann::json config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["game"] = game_name(c.game);
  j["sizes"] = {{"seed", detail::sizes_json(c.seed_sizes)},
                {"intermediate", detail::sizes_json(c.intermediate_sizes)},
                {"desired", detail::sizes_json(c.desired_sizes)}};
  j["iterations"] = c.iterations;
  j["batch_size"] = c.batch_size;
  j["replay_batch"] = c.replay_batch;
  j["lr_policy"] = c.lr_policy;
  j["lr_flow"] = c.lr_flow;
  j["rms_alpha"] = c.rms_alpha;
  j["rms_eps"] = c.rms_eps;
  j["clip_norm"] = c.clip_norm;
  j["diversity_sampling"] = c.diversity_sampling;
  j["diversity_reward"] = c.diversity_reward;
  j["property_reward"] = c.property_reward;
  j["augmentation"] = c.augmentation;
  j["signature_key"] = c.signature_key;
  j["seed"] = c.seed;
  j["checkpoint_every"] = c.checkpoint_every;
  j["output_dir"] = c.output_dir;
  return j;
}

/// Fields missing from the document keep the game preset's values. Unknown
/// keys are rejected.
inline TrainConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected an object");
  if (!j.contains("game")) throw ConfigError("game", "required");
  const std::string game = detail::get_field<std::string>(j["game"], "game");
  TrainConfig c;
  try {
    c = preset_config(parse_game(game));
  } catch (const std::invalid_argument&) {
    throw ConfigError("game", "unknown game '" + game + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "game") continue;
    if (k == "sizes") {
      if (!v.is_object()) throw ConfigError("sizes", "expected an object");
      for (auto s = v.begin(); s != v.end(); ++s) {
        const std::string field = "sizes." + s.key();
        if (s.key() == "seed") c.seed_sizes = detail::parse_sizes(s.value(), field);
        else if (s.key() == "intermediate") c.intermediate_sizes = detail::parse_sizes(s.value(), field);
        else if (s.key() == "desired") c.desired_sizes = detail::parse_sizes(s.value(), field);
        else throw ConfigError(field, "unknown key");
      }
    } else if (k == "iterations") c.iterations = detail::get_field<int>(v, k);
    else if (k == "batch_size") c.batch_size = detail::get_field<int>(v, k);
    else if (k == "replay_batch") c.replay_batch = detail::get_field<int>(v, k);
    else if (k == "lr_policy") c.lr_policy = detail::get_field<double>(v, k);
    else if (k == "lr_flow") c.lr_flow = detail::get_field<double>(v, k);
    else if (k == "rms_alpha") c.rms_alpha = detail::get_field<double>(v, k);
    else if (k == "rms_eps") c.rms_eps = detail::get_field<double>(v, k);
    else if (k == "clip_norm") c.clip_norm = detail::get_field<double>(v, k);
    else if (k == "diversity_sampling") c.diversity_sampling = detail::get_field<bool>(v, k);
    else if (k == "diversity_reward") c.diversity_reward = detail::get_field<bool>(v, k);
    else if (k == "property_reward") c.property_reward = detail::get_field<bool>(v, k);
    else if (k == "augmentation") c.augmentation = detail::get_field<bool>(v, k);
    else if (k == "signature_key") c.signature_key = detail::get_field<bool>(v, k);
    else if (k == "seed") c.seed = detail::get_field<std::uint64_t>(v, k);
    else if (k == "checkpoint_every") c.checkpoint_every = detail::get_field<int>(v, k);
    else if (k == "output_dir") c.output_dir = detail::get_field<std::string>(v, k);
    else throw ConfigError(k, "unknown key");
  }
  c.validate();
  return c;
}

inline std::string render_config(const TrainConfig& c) { return config_to_json(c).dump(2) + "\n"; }

inline TrainConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace msgfn
