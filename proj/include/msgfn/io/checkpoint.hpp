#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msgfn/condmodel/gmm.hpp"
#include "msgfn/io/binary.hpp"
#include "msgfn/numerics/serialize.hpp"
#include "msgfn/training/trainer.hpp"

namespace msgfn {

// Checkpoint layout, all little-endian:
//   "MSGFNCKP", u32 version, string JSON header,
//   parameter values segment, parameter accumulator segment,
//   replay buffer, u32 GMM count, GMM models.
// The JSON header is dumped with sorted keys and holds neither timestamps nor
// the output directory, so equal training states give equal bytes.

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  int iteration = 0;
  Policy policy;
  ReplayBuffer buffer;
  CurriculumState curriculum;
  std::map<Size, GmmModel> gmms;
};

namespace detail {

inline nlohmann::json size_list(const std::vector<Size>& sizes) {
  auto a = nlohmann::json::array();
  for (Size s : sizes) a.push_back(size_string(s));
  return a;
}

inline std::vector<Size> read_size_list(const nlohmann::json& j) {
  std::vector<Size> out;
  for (const auto& v : j) out.push_back(parse_size(v.get<std::string>()));
  return out;
}

inline void write_replay(std::ostream& os, const ReplayBuffer& buffer) {
  const auto sizes = buffer.sizes();
  io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(sizes.size()));
  for (Size s : sizes) {
    const SizeBuffer& b = *buffer.find(s);
    io::write_pod<std::int32_t>(os, s.width);
    io::write_pod<std::int32_t>(os, s.height);
    io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(b.size()));
    for (const ReplayEntry& e : b.entries()) {
      io::write_bytes(os, e.level.cells.data(), e.level.cells.size());
      io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.properties.size()));
      for (const auto& [name, value] : e.properties) {
        io::write_string(os, name);
        io::write_pod<std::int32_t>(os, value);
      }
      io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.u.size()));
      for (double v : e.u) io::write_pod<double>(os, v);
      io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.key.size()));
      for (std::int64_t k : e.key) io::write_pod<std::int64_t>(os, k);
    }
  }
}

inline ReplayBuffer read_replay(std::istream& is, Game game) {
  ReplayBuffer buffer;
  const auto count = io::read_pod<std::uint32_t>(is);
  const std::size_t tiles = tile_count(game);
  for (std::uint32_t i = 0; i < count; ++i) {
    const int w = io::read_pod<std::int32_t>(is);
    const int h = io::read_pod<std::int32_t>(is);
    if (w < 1 || h < 1 || w > 1024 || h > 1024) throw FormatError("replay: bad level size");
    const auto entries = io::read_pod<std::uint32_t>(is);
    for (std::uint32_t k = 0; k < entries; ++k) {
      ReplayEntry e{Level(game, w, h), {}, {}, {}};
      io::read_bytes(is, e.level.cells.data(), e.level.cells.size());
      for (TileId t : e.level.cells)
        if (t >= tiles) throw FormatError("replay: tile id out of range");
      const auto props = io::read_pod<std::uint32_t>(is);
      if (props > 64) throw FormatError("replay: too many properties");
      for (std::uint32_t p = 0; p < props; ++p) {
        std::string name = io::read_string(is, 256);
        e.properties[name] = io::read_pod<std::int32_t>(is);
      }
      const auto dims = io::read_pod<std::uint32_t>(is);
      if (dims > 64) throw FormatError("replay: too many controls");
      for (std::uint32_t d = 0; d < dims; ++d) e.u.push_back(io::read_pod<double>(is));
      const auto keys = io::read_pod<std::uint32_t>(is);
      if (keys > 1u << 20) throw FormatError("replay: cluster key too long");
      for (std::uint32_t d = 0; d < keys; ++d) e.key.push_back(io::read_pod<std::int64_t>(is));
      if (!buffer.insert(std::move(e))) throw FormatError("replay: duplicate level");
    }
  }
  return buffer;
}

}  // namespace detail

/// Rounds parameters and accumulators to the 32-bit precision checkpoints
/// store, so a run that keeps going matches one resumed from its checkpoint.
inline void round_to_checkpoint_precision(ParamStore& store) {
  for (auto& p : store) {
    for (double& v : p.value.values()) v = static_cast<double>(static_cast<float>(v));
    for (double& v : p.accumulator.values()) v = static_cast<double>(static_cast<float>(v));
  }
}

inline void write_checkpoint(std::ostream& os, const TrainConfig& config, int iteration, const Policy& policy,
                             const ReplayBuffer& buffer, const CurriculumState& curriculum,
                             const std::map<Size, GmmModel>& gmms) {
  const GameSpec spec = game_spec(config.game);
  nlohmann::json h;
  h["format_version"] = kCheckpointVersion;
  h["game"] = spec.name;
  h["tileset"] = spec.tiles;
  auto controls = nlohmann::json::array();
  for (const auto& c : spec.controls)
    controls.push_back({{"name", c.name}, {"noise", {c.noise_lo, c.noise_hi}}, {"tolerance", c.tolerance}});
  h["controls"] = controls;
  TrainConfig stored = config;
  stored.output_dir.clear();
  h["config"] = config_to_json(stored);
  h["seed"] = config.seed;
  h["iteration"] = iteration;
  std::vector<Size> heads;
  for (const auto& p : policy.params())
    if (p.name.rfind("flow.", 0) == 0 && p.name.size() > 9 && p.name.compare(p.name.size() - 9, 9, ".0.weight") == 0)
      heads.push_back(parse_size(p.name.substr(5, p.name.size() - 14)));
  h["flow_heads"] = detail::size_list(heads);
  h["active_sizes"] = detail::size_list(std::vector<Size>(curriculum.active.begin(), curriculum.active.end()));
  nlohmann::json first = nlohmann::json::object();
  for (const auto& [s, it] : curriculum.first_playable) first[size_string(s)] = it;
  h["first_playable"] = first;

  io::write_bytes(os, "MSGFNCKP", 8);
  io::write_pod<std::uint32_t>(os, kCheckpointVersion);
  io::write_string(os, h.dump());
  write_params(os, policy.params());
  detail::write_replay(os, buffer);
  io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(gmms.size()));
  for (const auto& [s, m] : gmms) write_gmm(os, m);
}

inline void write_checkpoint(std::ostream& os, const Trainer& t, const std::map<Size, GmmModel>& gmms = {}) {
  write_checkpoint(os, t.config(), t.iteration(), t.policy(), t.buffer(), t.curriculum(), gmms);
}

inline Checkpoint read_checkpoint(std::istream& is) {
  io::expect_magic(is, "MSGFNCKP");
  const auto version = io::read_pod<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(io::read_string(is, 1u << 24));
    TrainConfig config = config_from_json(h.at("config"));
    const GameSpec spec = game_spec(config.game);
    if (h.at("tileset").get<std::string>() != spec.tiles) throw FormatError("checkpoint tileset mismatch");
    Rng rng(0);
    Policy policy(spec.tile_count(), spec.controls.size(), rng);
    for (Size s : detail::read_size_list(h.at("flow_heads"))) policy.add_flow_head(s, rng);
    read_params(is, policy.params());
    CurriculumState curriculum(config.seed_sizes, config.all_sizes());
    for (Size s : detail::read_size_list(h.at("active_sizes"))) curriculum.active.insert(s);
    for (const auto& [k, v] : h.at("first_playable").items()) curriculum.first_playable[parse_size(k)] = v.get<int>();
    ReplayBuffer buffer = detail::read_replay(is, config.game);
    std::map<Size, GmmModel> gmms;
    const auto n = io::read_pod<std::uint32_t>(is);
    for (std::uint32_t i = 0; i < n; ++i) {
      GmmModel m = read_gmm(is);
      gmms.emplace(m.size, std::move(m));
    }
    return {std::move(config), h.at("iteration").get<int>(), std::move(policy), std::move(buffer),
            std::move(curriculum), std::move(gmms)};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
}

inline void save_checkpoint(const std::string& path, const Trainer& t, const std::map<Size, GmmModel>& gmms = {}) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_checkpoint(os, t, gmms);
  if (!os) throw std::runtime_error("error writing " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path);
  return read_checkpoint(is);
}

inline std::string checkpoint_bytes(const Checkpoint& c) {
  std::ostringstream os;
  write_checkpoint(os, c.config, c.iteration, c.policy, c.buffer, c.curriculum, c.gmms);
  return os.str();
}

/// Continues training from a loaded checkpoint.
inline Trainer resume_trainer(Checkpoint c, std::size_t threads = 1) {
  return Trainer(std::move(c.config), std::move(c.policy), std::move(c.buffer), std::move(c.curriculum), c.iteration,
                 threads);
}

}  // namespace msgfn
