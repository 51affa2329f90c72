#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "msgfn/games/game.hpp"
#include "msgfn/model/policy.hpp"
#include "msgfn/numerics/rmsprop.hpp"
#include "msgfn/training/conditions.hpp"
#include "msgfn/training/config.hpp"
#include "msgfn/training/curriculum.hpp"
#include "msgfn/training/replay.hpp"
#include "msgfn/training/rewards.hpp"
#include "msgfn/util/parallel.hpp"

namespace msgfn {

/// Stream tags; every random draw in training comes from
/// make_stream(seed, {tag, ...}).
enum StreamTag : std::uint64_t {
  kInitStream = 1,
  kFlowStream = 2,
  kRolloutStream = 3,
  kConditionStream = 4,
  kReplayStream = 5,
  kGmmStream = 6,
};

struct SizeStats {
  Size size;
  bool active = false;
  double loss = std::numeric_limits<double>::quiet_NaN();  // mean over the size's loss rows
  int rollouts = 0;
  int playable = 0;
  int inserted = 0;
  int replayed = 0;
  std::size_t buffer = 0;
  std::size_t clusters = 0;
};

struct IterationStats {
  int iteration = 0;
  double loss = 0.0;  // mean over every loss row of the iteration
  std::vector<SizeStats> sizes;
  std::vector<Size> activated;  // sizes that become active from the next iteration on
};

inline RewardConfig reward_config(const TrainConfig& c) {
  return {c.diversity_reward, c.property_reward, c.signature_key};
}

/// scale * sum_b (log z0_b + log Pf_b - log R_b)^2 for one batch of a single
/// size. raw_sum accumulates the unscaled squared residuals.
inline Tape::Node trajectory_balance_loss(Tape& tape, const Policy& policy, Tape::Node cond, Tape::Node log_pf,
                                          Size size, const std::vector<double>& log_r, double scale,
                                          double& raw_sum) {
  for (double v : log_r)
    if (!std::isfinite(v)) throw NonFiniteError("trajectory_balance_loss: non-finite log reward");
  const Tape::Node z = policy.log_z0(tape, cond, size);
  const Tape::Node r = tape.input(Tensor({log_r.size(), 1}, log_r));
  const Tape::Node sq = tape.square(tape.sub(tape.add(z, log_pf), r));
  for (double v : tape.value(sq).values()) raw_sum += v;
  return tape.sum(sq, scale);
}

class Trainer {
 public:
  explicit Trainer(TrainConfig config, std::size_t threads = 1)
      : config_(validated(std::move(config))),
        spec_(game_spec(config_.game)),
        policy_(make_policy(config_, spec_)),
        curriculum_(config_.seed_sizes, config_.all_sizes()),
        threads_(threads) {
    for (Size s : config_.seed_sizes) add_head(s);
  }

  /// Resumes from saved state.
  Trainer(TrainConfig config, Policy policy, ReplayBuffer buffer, CurriculumState curriculum, int iteration,
          std::size_t threads = 1)
      : config_(std::move(config)),
        spec_(game_spec(config_.game)),
        policy_(std::move(policy)),
        buffer_(std::move(buffer)),
        curriculum_(std::move(curriculum)),
        iteration_(iteration),
        threads_(threads) {
    config_.validate();
  }

  const TrainConfig& config() const { return config_; }
  const GameSpec& spec() const { return spec_; }
  Policy& policy() { return policy_; }
  const Policy& policy() const { return policy_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const CurriculumState& curriculum() const { return curriculum_; }
  int iteration() const { return iteration_; }
  void set_threads(std::size_t n) { threads_ = n; }

  IterationStats step() {
    try {
      return step_impl();
    } catch (const NonFiniteError& e) {
      throw NonFiniteError("iteration " + std::to_string(iteration_) + ": " + e.what());
    }
  }

 private:
  struct SizeWork {
    Size size;
    bool active = false;
    std::unique_ptr<Tape> tape;
    Tape::Node cond = 0;
    Pass pass;
    std::vector<Conditions> conditions;
    std::vector<Level> levels;
    std::vector<Analysis> analyses;
    std::vector<const ReplayEntry*> replay;
    Gradients grads;
    double loss_sum = 0.0;
  };

  static TrainConfig validated(TrainConfig c) {
    c.validate();
    return c;
  }

  static Policy make_policy(const TrainConfig& c, const GameSpec& spec) {
    Rng rng = make_stream(c.seed, {kInitStream});
    return Policy(spec.tile_count(), spec.controls.size(), rng);
  }

  void add_head(Size s) {
    Rng rng = make_stream(config_.seed, {kFlowStream, static_cast<std::uint64_t>(s.width),
                                         static_cast<std::uint64_t>(s.height)});
    policy_.add_flow_head(s, rng);
  }

  void generate(SizeWork& w, std::size_t index) const {
    const auto t = static_cast<std::uint64_t>(iteration_);
    const std::size_t n = static_cast<std::size_t>(config_.batch_size);
    Rng crng = make_stream(config_.seed, {kConditionStream, t, index});
    std::vector<std::vector<double>> u;
    std::vector<Rng> rngs;
    for (std::size_t b = 0; b < n; ++b) {
      w.conditions.push_back(sample_conditions(buffer_, w.size, spec_.controls, crng, config_.diversity_sampling));
      u.push_back(w.conditions.back().u);
      rngs.push_back(make_stream(config_.seed, {kRolloutStream, t, index, b}));
    }
    w.tape = std::make_unique<Tape>(policy_.params());
    w.cond = policy_.condition_input(*w.tape, u, w.size);
    w.pass = policy_.forward(*w.tape, w.cond, w.size, std::vector<const std::vector<TileId>*>(n), &rngs);
    for (std::size_t b = 0; b < n; ++b) {
      w.levels.push_back(sequence_to_level(w.pass.tiles[b], w.size, config_.game));
      w.analyses.push_back(analyze(w.levels.back()));
    }
    if (!w.active) w.tape.reset();
  }

  void train_size(SizeWork& w, std::size_t index, double scale) const {
    Tape& tape = *w.tape;
    const RewardConfig rcfg = reward_config(config_);
    std::vector<double> log_r;
    for (std::size_t b = 0; b < w.levels.size(); ++b)
      log_r.push_back(
          total_log_reward(w.levels[b], w.conditions[b].u, w.analyses[b], buffer_, spec_.controls, rcfg));
    Tape::Node loss = trajectory_balance_loss(tape, policy_, w.cond, w.pass.log_pf, w.size, log_r, scale, w.loss_sum);
    if (!w.replay.empty()) {
      Rng rng = make_stream(config_.seed, {kReplayStream, static_cast<std::uint64_t>(iteration_), index});
      const SizeBuffer* buf = buffer_.find(w.size);
      std::vector<std::vector<TileId>> seqs;
      std::vector<std::vector<double>> u;
      std::vector<double> rr;
      for (const ReplayEntry* e : w.replay) {
        const Level l = config_.augmentation ? augment(e->level, spec_, rng) : e->level;
        seqs.push_back(level_to_sequence(l));
        u.push_back(e->u);
        double r = 0.0;
        if (rcfg.diversity) r += diversity_log_reward(e->level, e->key, buf);
        if (rcfg.property) r += property_log_reward(config_.game, e->properties);
        rr.push_back(r);
      }
      std::vector<const std::vector<TileId>*> forced;
      for (const auto& s : seqs) forced.push_back(&s);
      const Tape::Node cond = policy_.condition_input(tape, u, w.size);
      const Pass pass = policy_.forward(tape, cond, w.size, forced, nullptr);
      loss = tape.add(loss, trajectory_balance_loss(tape, policy_, cond, pass.log_pf, w.size, rr, scale, w.loss_sum));
    }
    w.grads = tape.backward(loss);
  }

  IterationStats step_impl() {
    const std::vector<Size> sizes = curriculum_.sizes;
    std::vector<SizeWork> work(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      work[i].size = sizes[i];
      work[i].active = curriculum_.is_active(sizes[i]);
    }

    parallel_for(work.size(), threads_, [&](std::size_t i) { generate(work[i], i); });

    IterationStats stats;
    stats.iteration = iteration_;
    for (auto& w : work) {
      SizeStats s{w.size, w.active};
      s.rollouts = static_cast<int>(w.levels.size());
      for (std::size_t b = 0; b < w.levels.size(); ++b) {
        if (!w.analyses[b].playable) continue;
        ++s.playable;
        curriculum_.record_playable(w.size, iteration_);
        if (buffer_.insert(w.levels[b], w.analyses[b], spec_.controls, config_.signature_key)) ++s.inserted;
      }
      stats.sizes.push_back(s);
    }

    std::size_t rows = 0;
    for (std::size_t i = 0; i < work.size(); ++i) {
      SizeWork& w = work[i];
      if (!w.active) continue;
      if (const SizeBuffer* buf = buffer_.find(w.size); buf && config_.replay_batch > 0) {
        Rng rng = make_stream(config_.seed, {kReplayStream, static_cast<std::uint64_t>(iteration_), i, 1});
        for (int k = 0; k < config_.replay_batch; ++k)
          w.replay.push_back(config_.diversity_sampling ? &buf->diversity_sample(rng) : &buf->uniform_sample(rng));
      }
      rows += w.levels.size() + w.replay.size();
    }
    const double scale = 1.0 / static_cast<double>(rows);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < work.size(); ++i)
      if (work[i].active) active.push_back(i);
    parallel_for(active.size(), threads_, [&](std::size_t k) { train_size(work[active[k]], active[k], scale); });

    Gradients total = policy_.params().zero_gradients();
    double loss_sum = 0.0;
    for (std::size_t i : active) {
      add_into(total, work[i].grads);
      loss_sum += work[i].loss_sum;
      SizeStats& s = stats.sizes[i];
      s.replayed = static_cast<int>(work[i].replay.size());
      s.loss = work[i].loss_sum / static_cast<double>(work[i].levels.size() + work[i].replay.size());
    }
    stats.loss = loss_sum * scale;
    if (!std::isfinite(stats.loss)) throw NonFiniteError("training loss is not finite");
    RmsPropConfig opt{config_.rms_alpha, config_.rms_eps, config_.clip_norm};
    rmsprop_step(
        policy_.params(), total,
        [&](const Parameter& p) { return p.group == "flow" ? config_.lr_flow : config_.lr_policy; }, opt);

    for (auto& s : stats.sizes) {
      if (const SizeBuffer* b = buffer_.find(s.size)) {
        s.buffer = b->size();
        s.clusters = b->cluster_count();
      }
    }
    stats.activated = curriculum_.activate_discovered();
    for (Size s : stats.activated) add_head(s);
    ++iteration_;
    return stats;
  }

  TrainConfig config_;
  GameSpec spec_;
  Policy policy_;
  ReplayBuffer buffer_;
  CurriculumState curriculum_;
  int iteration_ = 0;
  std::size_t threads_ = 1;
};

/// Tab-separated training log: a header line, then one line per iteration.
inline void write_log_header(std::ostream& os, const std::vector<Size>& sizes) {
  os << "iteration\tloss\tactive";
  for (Size s : sizes) {
    const std::string n = size_string(s);
    os << "\tloss_" << n << "\tplayable_" << n << "\tinserted_" << n << "\tbuffer_" << n << "\tclusters_" << n;
  }
  os << "\n";
}

inline void write_log_line(std::ostream& os, const IterationStats& st) {
  os << st.iteration << "\t" << st.loss << "\t";
  bool first = true;
  for (const auto& s : st.sizes) {
    if (!s.active) continue;
    os << (first ? "" : ",") << size_string(s.size);
    first = false;
  }
  for (const auto& s : st.sizes) {
    os << "\t";
    if (s.active) os << s.loss;
    else os << "-";
    os << "\t" << s.playable << "\t" << s.inserted << "\t" << s.buffer << "\t" << s.clusters;
  }
  os << "\n";
}

}  // namespace msgfn
