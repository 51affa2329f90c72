#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "msgfn/condmodel/gmm.hpp"
#include "msgfn/io/checkpoint.hpp"
#include "msgfn/training/trainer.hpp"

namespace msgfn {

inline constexpr std::size_t kGmmComponents = 16;
inline constexpr int kGmmIterations = 100;

/// One GMM per size over the measured controls stored in the replay buffer.
inline std::map<Size, GmmModel> fit_buffer_gmms(const ReplayBuffer& buffer, const std::vector<Size>& sizes,
                                                const GameSpec& spec, std::uint64_t seed) {
  std::map<Size, GmmModel> out;
  for (Size s : sizes) {
    const SizeBuffer* b = buffer.find(s);
    if (!b) continue;
    std::vector<std::vector<double>> points;
    for (const auto& e : b->entries()) points.push_back(e.u);
    Rng rng = make_stream(seed, {kGmmStream, static_cast<std::uint64_t>(s.width), static_cast<std::uint64_t>(s.height)});
    GmmModel m = fit_gmm(points, kGmmComponents, kGmmIterations, rng).model;
    m.size = s;
    m.labels.clear();
    m.denominators.clear();
    for (const auto& c : spec.controls) {
      m.labels.push_back(c.name);
      m.denominators.push_back(c.den(s.width, s.height));
    }
    out.emplace(s, std::move(m));
  }
  return out;
}

namespace detail {

/// Header plus the lines of an existing log before `iteration`, so a resumed
/// run does not duplicate the iterations after its checkpoint.
inline std::vector<std::string> log_lines_until(const std::filesystem::path& path, int iteration) {
  std::vector<std::string> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (out.empty()) {
      out.push_back(line);
      continue;
    }
    if (std::stoi(line.substr(0, line.find('\t'))) >= iteration) break;
    out.push_back(line);
  }
  return out;
}

}  // namespace detail

struct RunOptions {
  std::size_t threads = 1;
  std::ostream* progress = nullptr;
  int progress_every = 100;
};

inline std::string checkpoint_name(int iteration) {
  std::ostringstream os;
  os << "checkpoint_" << std::setw(6) << std::setfill('0') << iteration << ".ckpt";
  return os.str();
}

struct RunResult {
  Trainer trainer;
  std::map<Size, GmmModel> gmms;
  std::string final_checkpoint;
};

/// Trains until config.iterations, writing into `out_dir`: config.json,
/// train_log.tsv, periodic checkpoints and final.ckpt with the fitted GMMs.
/// With `resume` the run continues from that state; the log keeps the lines
/// up to the checkpoint iteration.
inline RunResult run_training(const TrainConfig& config, const std::string& out_dir, const RunOptions& opt = {},
                              std::optional<Checkpoint> resume = std::nullopt) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw std::runtime_error("cannot create output directory " + out_dir);
  const fs::path dir(out_dir);
  {
    std::ofstream cfg(dir / "config.json");
    if (!cfg) throw std::runtime_error("cannot write into " + out_dir);
    cfg << render_config(config);
  }
  const bool resuming = resume.has_value();
  if (resuming) {
    resume->config.iterations = config.iterations;
    resume->config.checkpoint_every = config.checkpoint_every;
    resume->config.output_dir = config.output_dir;
  }
  Trainer trainer = resuming ? resume_trainer(std::move(*resume), opt.threads) : Trainer(config, opt.threads);
  const fs::path log_path = dir / "train_log.tsv";
  std::vector<std::string> kept;
  if (resuming) kept = detail::log_lines_until(log_path, trainer.iteration());
  std::ofstream log(log_path, std::ios::trunc);
  if (kept.empty()) write_log_header(log, trainer.curriculum().sizes);
  for (const auto& line : kept) log << line << '\n';

  while (trainer.iteration() < config.iterations) {
    const IterationStats stats = trainer.step();
    write_log_line(log, stats);
    const int done = trainer.iteration();
    if (opt.progress && opt.progress_every > 0 && done % opt.progress_every == 0) {
      *opt.progress << "iteration " << done << " loss " << stats.loss;
      for (const auto& s : stats.sizes)
        *opt.progress << " " << size_string(s.size) << (s.active ? "*" : "") << ":" << s.playable << "/" << s.rollouts;
      *opt.progress << std::endl;
    }
    if (config.checkpoint_every > 0 && done % config.checkpoint_every == 0 && done < config.iterations) {
      log.flush();
      round_to_checkpoint_precision(trainer.policy().params());
      save_checkpoint((dir / checkpoint_name(done)).string(), trainer);
    }
  }
  round_to_checkpoint_precision(trainer.policy().params());
  std::vector<Size> trained(trainer.curriculum().active.begin(), trainer.curriculum().active.end());
  auto gmms = fit_buffer_gmms(trainer.buffer(), trained, trainer.spec(), config.seed);
  const std::string final_path = (dir / "final.ckpt").string();
  save_checkpoint(final_path, trainer, gmms);
  return {std::move(trainer), std::move(gmms), final_path};
}

}  // namespace msgfn
