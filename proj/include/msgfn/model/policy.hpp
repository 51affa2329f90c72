#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "msgfn/games/level.hpp"
#include "msgfn/numerics/layers.hpp"
#include "msgfn/numerics/tape.hpp"
#include "msgfn/util/parallel.hpp"
#include "msgfn/util/rng.hpp"

namespace msgfn {

inline constexpr std::size_t kEmbedHidden = 16;
inline constexpr std::size_t kEmbed = 32;
inline constexpr std::size_t kHidden = 128;
inline constexpr std::size_t kActionHidden = 32;
inline constexpr std::size_t kFlowHidden = 32;
inline constexpr double kSizeScale = 0.1;

/// Boustrophedon order: row 0 left to right, row 1 right to left, and so on.
inline std::vector<std::pair<int, int>> scan_order(int w, int h) {
  std::vector<std::pair<int, int>> order;
  order.reserve(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r)
    for (int i = 0; i < w; ++i) order.emplace_back(r, r % 2 == 0 ? i : w - 1 - i);
  return order;
}

/// True when step `index` (zero-based) starts a new row.
inline bool row_changed(std::size_t index, int w) { return index > 0 && index % w == 0; }

/// Level cells listed in scan order.
inline std::vector<TileId> level_to_sequence(const Level& level) {
  std::vector<TileId> seq;
  seq.reserve(level.cells.size());
  for (auto [r, c] : scan_order(level.width, level.height)) seq.push_back(level.at(r, c));
  return seq;
}

inline Level sequence_to_level(const std::vector<TileId>& seq, Size size, Game game) {
  if (seq.size() != static_cast<std::size_t>(size.area()))
    throw DimensionError("sequence length " + std::to_string(seq.size()) + " does not match size " +
                         size_string(size));
  Level level(game, size.width, size.height);
  const auto order = scan_order(size.width, size.height);
  for (std::size_t i = 0; i < seq.size(); ++i) level.at(order[i].first, order[i].second) = seq[i];
  return level;
}

/// [embedding | one-hot previous tile over tiles + 1 slots (last = BOS) | row flag].
inline std::vector<double> step_input(const std::vector<double>& embedding, int prev_tile, bool changed,
                                      std::size_t tiles) {
  if (prev_tile < 0 || static_cast<std::size_t>(prev_tile) > tiles)
    throw DimensionError("previous tile out of range");
  std::vector<double> x(embedding);
  x.resize(embedding.size() + tiles + 2, 0.0);
  x[embedding.size() + prev_tile] = 1.0;
  x.back() = changed ? 1.0 : 0.0;
  return x;
}

inline std::string flow_prefix(Size s) { return "flow." + size_string(s); }

/// Output of one batched generation pass.
struct Pass {
  Tape::Node log_pf = 0;                          // batch x 1
  std::vector<std::vector<TileId>> tiles;         // per row, scan order
  std::vector<std::vector<double>> step_log_probs;
};

/// Auto-regressive tile policy with per-size source-flow heads.
class Policy {
 public:
  Policy(std::size_t tiles, std::size_t controls, Rng& rng) : tiles_(tiles), controls_(controls) {
    if (tiles < 2) throw DimensionError("policy needs at least two tiles");
    const std::size_t in = step_input_size();
    embed0_ = make_linear(store_, "embed.0", "policy", controls + 2, kEmbedHidden, rng);
    embed1_ = make_linear(store_, "embed.1", "policy", kEmbedHidden, kEmbed, rng);
    gru1_ = make_gru(store_, "gru1", "policy", in, kHidden, rng);
    gru2_ = make_gru(store_, "gru2", "policy", in + kHidden, kHidden, rng);
    action0_ = make_linear(store_, "action.0", "policy", in + 2 * kHidden, kActionHidden, rng);
    action1_ = make_linear(store_, "action.1", "policy", kActionHidden, tiles, rng, true);
  }

  /// Wraps parameters loaded from disk.
  Policy(ParamStore store, std::size_t tiles, std::size_t controls)
      : tiles_(tiles), controls_(controls), store_(std::move(store)) {
    embed0_ = find_linear(store_, "embed.0");
    embed1_ = find_linear(store_, "embed.1");
    gru1_ = find_gru(store_, "gru1");
    gru2_ = find_gru(store_, "gru2");
    action0_ = find_linear(store_, "action.0");
    action1_ = find_linear(store_, "action.1");
    const auto& w0 = store_[embed0_.weight].value;
    const auto& w1 = store_[action1_.weight].value;
    if (w0.cols() != controls + 2 || w1.rows() != tiles || store_[gru1_.wx].value.cols() != step_input_size())
      throw DimensionError("stored parameters do not match tiles=" + std::to_string(tiles) +
                           ", controls=" + std::to_string(controls));
  }

  std::size_t tiles() const { return tiles_; }
  std::size_t controls() const { return controls_; }
  std::size_t step_input_size() const { return kEmbed + tiles_ + 2; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  bool has_flow_head(Size s) const { return store_.contains(flow_prefix(s) + ".1.weight"); }

  void add_flow_head(Size s, Rng& rng) {
    if (has_flow_head(s)) return;
    make_linear(store_, flow_prefix(s) + ".0", "flow", controls_ + 2, kFlowHidden, rng);
    make_linear(store_, flow_prefix(s) + ".1", "flow", kFlowHidden, 1, rng, true);
  }

  std::vector<Size> flow_sizes() const {
    std::vector<Size> out;
    for (const auto& p : store_) {
      if (p.name.rfind("flow.", 0) != 0 || p.name.size() < 15 ||
          p.name.compare(p.name.size() - 9, 9, ".1.weight") != 0)
        continue;
      out.push_back(parse_size(p.name.substr(5, p.name.size() - 14)));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// [u | w/10 | h/10] per row.
  Tape::Node condition_input(Tape& tape, const std::vector<std::vector<double>>& u, Size size) const {
    Tensor x = Tensor::matrix(u.size(), controls_ + 2);
    for (std::size_t b = 0; b < u.size(); ++b) {
      if (u[b].size() != controls_)
        throw DimensionError("expected " + std::to_string(controls_) + " controls, got " +
                             std::to_string(u[b].size()));
      for (std::size_t j = 0; j < controls_; ++j) x.at(b, j) = u[b][j];
      x.at(b, controls_) = size.width * kSizeScale;
      x.at(b, controls_ + 1) = size.height * kSizeScale;
    }
    return tape.input(std::move(x));
  }

  Tape::Node embed(Tape& tape, Tape::Node cond) const {
    return tape.linear(tape.linear(cond, embed0_, Activation::leaky_relu), embed1_, Activation::identity);
  }

  /// log z0 per row from the flow head of `size`.
  Tape::Node log_z0(Tape& tape, Tape::Node cond, Size size) const {
    if (!has_flow_head(size)) throw std::out_of_range("no flow head for size " + size_string(size));
    const LinearLayer l0 = find_linear(store_, flow_prefix(size) + ".0");
    const LinearLayer l1 = find_linear(store_, flow_prefix(size) + ".1");
    return tape.linear(tape.linear(cond, l0, Activation::leaky_relu), l1, Activation::identity);
  }

  /// Generates (or scores) one batch of levels of a single size. Row b
  /// follows forced[b] when it is non-null and otherwise samples with
  /// rngs[b]. Sampling and scoring share every operation, so forcing a
  /// sampled sequence reproduces its log-probabilities exactly.
  Pass forward(Tape& tape, Tape::Node cond, Size size, const std::vector<const std::vector<TileId>*>& forced,
               std::vector<Rng>* rngs) const {
    const std::size_t batch = forced.size();
    const std::size_t steps = static_cast<std::size_t>(size.area());
    if (tape.value(cond).rows() != batch) throw DimensionError("forward: condition rows != batch");
    for (std::size_t b = 0; b < batch; ++b) {
      if (forced[b] && forced[b]->size() != steps) throw DimensionError("forced sequence length mismatch");
      if (!forced[b] && (!rngs || rngs->size() != batch)) throw std::invalid_argument("missing rng for sampled row");
    }
    Pass pass;
    pass.tiles.assign(batch, std::vector<TileId>(steps));
    pass.step_log_probs.assign(batch, std::vector<double>(steps));
    const Tape::Node emb = embed(tape, cond);
    Tape::Node h1 = tape.input(Tensor::matrix(batch, kHidden));
    Tape::Node h2 = tape.input(Tensor::matrix(batch, kHidden));
    std::vector<int> prev(batch, static_cast<int>(tiles_));
    std::vector<Tape::Node> picks;
    picks.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      Tensor onehot = Tensor::matrix(batch, tiles_ + 2);
      for (std::size_t b = 0; b < batch; ++b) {
        onehot.at(b, static_cast<std::size_t>(prev[b])) = 1.0;
        onehot.at(b, tiles_ + 1) = row_changed(i, size.width) ? 1.0 : 0.0;
      }
      const Tape::Node x = tape.concat({emb, tape.input(std::move(onehot))});
      h1 = tape.gru(x, h1, gru1_);
      h2 = tape.gru(tape.concat({x, h1}), h2, gru2_);
      const Tape::Node hidden = tape.linear(tape.concat({x, h1, h2}), action0_, Activation::leaky_relu);
      const Tape::Node logp = tape.linear(hidden, action1_, Activation::log_softmax);
      const Tensor& lp = tape.value(logp);
      std::vector<int> chosen(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        int t;
        if (forced[b]) {
          t = (*forced[b])[i];
          if (t < 0 || static_cast<std::size_t>(t) >= tiles_) throw DimensionError("forced tile out of range");
        } else {
          t = sample_categorical(lp.row(b), (*rngs)[b]);
        }
        chosen[b] = t;
        prev[b] = t;
        pass.tiles[b][i] = static_cast<TileId>(t);
        pass.step_log_probs[b][i] = lp.at(b, static_cast<std::size_t>(t));
      }
      picks.push_back(tape.pick(logp, std::move(chosen)));
    }
    Tape::Node total = picks[0];
    for (std::size_t i = 1; i < picks.size(); ++i) total = tape.add(total, picks[i]);
    pass.log_pf = total;
    return pass;
  }

  static int sample_categorical(std::span<const double> log_probs, Rng& rng) {
    const double x = uniform01(rng);
    double cum = 0.0;
    for (std::size_t k = 0; k < log_probs.size(); ++k) {
      cum += std::exp(log_probs[k]);
      if (x < cum) return static_cast<int>(k);
    }
    return static_cast<int>(log_probs.size()) - 1;
  }

 private:
  std::size_t tiles_;
  std::size_t controls_;
  ParamStore store_;
  LinearLayer embed0_, embed1_, action0_, action1_;
  GruLayer gru1_, gru2_;
};

struct Trajectory {
  Size size;
  std::vector<double> u;
  std::vector<TileId> tiles;  // scan order
  std::vector<double> step_log_probs;
  double log_pf = 0.0;
};

/// Samples one trajectory per entry of u. Row b draws from rngs[b]. Rows are
/// processed in chunks on up to `threads` threads; the result does not depend
/// on the chunking.
inline std::vector<Trajectory> rollout_batch(const Policy& policy, const std::vector<std::vector<double>>& u,
                                             Size size, std::vector<Rng>& rngs, std::size_t threads = 1,
                                             std::size_t chunk = 64) {
  if (rngs.size() != u.size()) throw std::invalid_argument("one rng per row required");
  std::vector<Trajectory> out(u.size());
  const std::size_t chunks = (u.size() + chunk - 1) / chunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = c * chunk, hi = std::min(u.size(), lo + chunk);
    std::vector<std::vector<double>> cu(u.begin() + lo, u.begin() + hi);
    std::vector<Rng> crng(rngs.begin() + lo, rngs.begin() + hi);
    Tape tape(policy.params());
    const Tape::Node cond = policy.condition_input(tape, cu, size);
    const Pass pass = policy.forward(tape, cond, size, std::vector<const std::vector<TileId>*>(hi - lo), &crng);
    for (std::size_t b = lo; b < hi; ++b) {
      Trajectory& t = out[b];
      t.size = size;
      t.u = u[b];
      t.tiles = pass.tiles[b - lo];
      t.step_log_probs = pass.step_log_probs[b - lo];
      t.log_pf = tape.value(pass.log_pf)[b - lo];
      rngs[b] = crng[b - lo];
    }
  });
  return out;
}

inline Trajectory rollout(const Policy& policy, const std::vector<double>& u, Size size, Rng& rng) {
  std::vector<Rng> rngs{rng};
  auto out = rollout_batch(policy, {u}, size, rngs);
  rng = rngs[0];
  return std::move(out[0]);
}

/// Total log-probability of generating `level` under conditions u.
inline double teacher_force(const Policy& policy, const Level& level, const std::vector<double>& u) {
  const Size size{level.width, level.height};
  const std::vector<TileId> seq = level_to_sequence(level);
  Tape tape(policy.params());
  const Tape::Node cond = policy.condition_input(tape, {u}, size);
  const Pass pass = policy.forward(tape, cond, size, {&seq}, nullptr);
  return tape.value(pass.log_pf)[0];
}

inline double log_z0(const Policy& policy, const std::vector<double>& u, Size size) {
  Tape tape(policy.params());
  return tape.value(policy.log_z0(tape, policy.condition_input(tape, {u}, size), size))[0];
}

}  // namespace msgfn
