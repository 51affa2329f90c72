#pragma once

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgfn/eval/generate.hpp"
#include "msgfn/games/controls.hpp"
#include "msgfn/games/sokoban.hpp"
#include "msgfn/util/errors.hpp"

namespace msgfn {

/// Mean pairwise Hamming distance divided by the area, counted per cell
/// from tile frequencies instead of pair by pair.
inline double tile_diversity(const std::vector<Level>& levels) {
  if (levels.size() < 2) throw std::invalid_argument("tile diversity needs at least two levels");
  const Level& first = levels.front();
  for (const Level& l : levels)
    if (l.width != first.width || l.height != first.height || l.game != first.game)
      throw DimensionError("tile diversity needs levels of one size");
  const std::size_t cells = first.cells.size();
  const std::size_t tiles = tile_count(first.game);
  const double n = static_cast<double>(levels.size());
  const double pairs = n * (n - 1) / 2;
  std::vector<std::size_t> counts(tiles);
  double agreements = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const Level& l : levels) ++counts[l.cells[c]];
    for (std::size_t k : counts) agreements += static_cast<double>(k) * static_cast<double>(k > 0 ? k - 1 : 0) / 2;
  }
  return 1.0 - agreements / (pairs * static_cast<double>(cells));
}

/// Property reported as the solution length of a game.
inline std::string length_property(Game game) { return game == Game::zelda ? "path_length" : "solution_length"; }

struct QualityReport {
  Size size;
  std::size_t samples = 0;
  std::size_t playable = 0;
  std::size_t unique_playable = 0;
  std::size_t unique_signatures = 0;  // Sokoban only
  std::size_t clusters = 0;           // distinct cluster keys among playable levels
  double playable_fraction = 0;
  double tile_diversity = 0;       // over playable levels, 0 with fewer than two
  double duplicate_fraction = 0;   // playable levels repeating an earlier one
  double signature_fraction = 0;   // unique signatures / playable
  double length_mean = std::numeric_limits<double>::quiet_NaN();
  double length_std = std::numeric_limits<double>::quiet_NaN();
};

inline QualityReport quality_report(const std::vector<Sample>& samples, Size size) {
  QualityReport r;
  r.size = size;
  r.samples = samples.size();
  std::vector<Level> playable;
  std::set<std::vector<TileId>> grids;
  std::set<ClusterKey> keys;
  std::set<sokoban::Signature> signatures;
  std::vector<double> lengths;
  for (const Sample& s : samples) {
    if (!s.analysis.playable) continue;
    playable.push_back(s.level);
    keys.insert(cluster_key(s.level, s.analysis));
    if (s.level.game == Game::sokoban && s.analysis.solution)
      signatures.insert(sokoban::solution_signature(s.level, *s.analysis.solution));
    if (grids.insert(s.level.cells).second) lengths.push_back(s.analysis.property(length_property(s.level.game)));
  }
  r.playable = playable.size();
  r.unique_playable = grids.size();
  r.unique_signatures = signatures.size();
  r.clusters = keys.size();
  if (r.samples) r.playable_fraction = static_cast<double>(r.playable) / static_cast<double>(r.samples);
  if (r.playable >= 2) r.tile_diversity = tile_diversity(playable);
  if (r.playable) {
    const double p = static_cast<double>(r.playable);
    r.duplicate_fraction = static_cast<double>(r.playable - r.unique_playable) / p;
    r.signature_fraction = static_cast<double>(r.unique_signatures) / p;
  }
  if (!lengths.empty()) {
    double sum = 0;
    for (double v : lengths) sum += v;
    r.length_mean = sum / static_cast<double>(lengths.size());
    double ss = 0;
    for (double v : lengths) ss += (v - r.length_mean) * (v - r.length_mean);
    r.length_std = std::sqrt(ss / static_cast<double>(lengths.size()));
  }
  return r;
}

inline QualityReport quality_eval(const GenerateFn& generate, const ConditionSource& source, std::size_t n,
                                  std::uint64_t seed, std::size_t threads = 1) {
  return quality_report(sample_unconditional(generate, source, n, seed, threads), source.target);
}

/// 1 - SS_res / SS_tot of measured against requested values, NaN when the
/// requests are all equal.
inline double r_squared(const std::vector<double>& requested, const std::vector<double>& measured) {
  if (requested.size() != measured.size()) throw DimensionError("r_squared: length mismatch");
  if (requested.empty()) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0;
  for (double c : requested) mean += c;
  mean /= static_cast<double>(requested.size());
  double res = 0, tot = 0;
  for (std::size_t i = 0; i < requested.size(); ++i) {
    res += (measured[i] - requested[i]) * (measured[i] - requested[i]);
    tot += (requested[i] - mean) * (requested[i] - mean);
  }
  if (tot == 0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - res / tot;
}

struct ControlReport {
  Size size;
  std::string control;
  std::vector<int> requested;  // tested values
  std::size_t per_value = 0;
  std::size_t samples = 0;
  std::size_t playable = 0;
  double playable_fraction = 0;
  double mae = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double score = 0;
};

/// Requests for one control: each tested value appears `per_value` times and
/// the other controls are drawn conditionally from `source`.
inline std::vector<Request> control_requests(const ConditionSource& source, std::size_t index,
                                             const std::vector<int>& values, std::size_t per_value,
                                             std::uint64_t seed) {
  std::vector<Request> out;
  for (std::size_t v = 0; v < values.size(); ++v)
    for (std::size_t k = 0; k < per_value; ++k) {
      Rng rng = make_stream(seed, {kControlStream, index, v, k});
      Request r;
      r.controlled[index] = values[v];
      r.u = source.sample_given(r.controlled, rng);
      out.push_back(std::move(r));
    }
  return out;
}

/// Scores samples generated for control_requests(..., values, per_value, ...)
/// in the same order.
inline ControlReport control_report(const std::vector<Sample>& samples, Size size, const ControlSpec& spec,
                                    const std::vector<int>& values, std::size_t per_value) {
  if (samples.size() != values.size() * per_value) throw DimensionError("control_report: sample count mismatch");
  ControlReport r;
  r.size = size;
  r.control = spec.name;
  r.requested = values;
  r.per_value = per_value;
  r.samples = samples.size();
  std::vector<double> req, got;
  double abs_sum = 0, score = 0;
  for (std::size_t v = 0; v < values.size(); ++v) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < per_value; ++k) {
      const Sample& s = samples[v * per_value + k];
      if (!s.analysis.playable) continue;
      const int m = s.analysis.property(spec.name);
      req.push_back(values[v]);
      got.push_back(m);
      abs_sum += std::abs(m - values[v]);
      if (std::abs(m - values[v]) <= spec.tolerance) ++hits;
    }
    if (per_value) score += static_cast<double>(hits) / static_cast<double>(per_value);
  }
  r.playable = req.size();
  if (r.samples) r.playable_fraction = static_cast<double>(r.playable) / static_cast<double>(r.samples);
  if (r.playable) r.mae = abs_sum / static_cast<double>(r.playable);
  r.r2 = r_squared(req, got);
  if (!values.empty()) r.score = score / static_cast<double>(values.size());
  return r;
}

/// Tests control `index` at its grid of values with `per_value` levels each
/// (0 uses the control's own test count).
inline ControlReport control_eval(const GenerateFn& generate, const ConditionSource& source, std::size_t index,
                                  std::size_t per_value, std::uint64_t seed, std::size_t threads = 1) {
  const ControlSpec& spec = source.specs.at(index);
  const Size s = source.target;
  if (per_value == 0) per_value = static_cast<std::size_t>(spec.n_test);
  const std::vector<int> values = spec.test_grid(s.width, s.height);
  const std::vector<Request> requests = control_requests(source, index, values, per_value, seed);
  std::vector<std::vector<double>> u;
  std::vector<Rng> rngs;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    u.push_back(requests[i].u);
    rngs.push_back(make_stream(seed, {kControlStream, index, 1u << 20, i}));
  }
  return control_report(generate_samples(generate, u, s, rngs, threads), s, spec, values, per_value);
}

}  // namespace msgfn
