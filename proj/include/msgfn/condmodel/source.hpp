#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgfn/condmodel/gmm.hpp"
#include "msgfn/games/game.hpp"
#include "msgfn/model/generator.hpp"
#include "msgfn/util/parallel.hpp"

namespace msgfn {

enum class SourceKind { trained, closest, tailored, uniform };

inline std::string source_kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::trained: return "trained";
    case SourceKind::closest: return "closest";
    case SourceKind::tailored: return "tailored";
    case SourceKind::uniform: return "uniform";
  }
  return "unknown";
}

/// Draws snapped condition vectors for one target size. The model lives in
/// normalized control space, so a model fit at another size still applies.
struct ConditionSource {
  Size target;
  std::vector<ControlSpec> specs;
  std::optional<GmmModel> model;  // empty: uniform in normalized space
  SourceKind kind = SourceKind::uniform;
  std::string warning;

  std::vector<int> values(const std::vector<double>& u) const {
    std::vector<int> v;
    for (std::size_t i = 0; i < specs.size(); ++i) v.push_back(specs[i].to_value(u[i], target.width, target.height));
    return v;
  }

  std::vector<double> snap(const std::vector<double>& u) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < specs.size(); ++i) out.push_back(specs[i].snap(u[i], target.width, target.height));
    return out;
  }

  std::vector<double> sample(Rng& rng) const {
    if (!model) {
      std::vector<double> u;
      for (std::size_t i = 0; i < specs.size(); ++i) u.push_back(uniform01(rng));
      return snap(u);
    }
    return snap(sample_gmm(*model, rng));
  }

  /// Controls in `fixed` (index -> property value) are held; the rest are
  /// drawn conditionally.
  std::vector<double> sample_given(const std::map<std::size_t, int>& fixed, Rng& rng) const {
    std::map<std::size_t, double> fu;
    for (const auto& [i, v] : fixed) {
      if (i >= specs.size()) throw DimensionError("control index out of range");
      fu[i] = specs[i].normalize(v, target.width, target.height);
    }
    std::vector<double> u;
    if (fixed.size() == specs.size()) {
      for (const auto& [i, x] : fu) u.push_back(x);
      return u;
    }
    if (model) {
      u = conditional_sample_gmm(*model, fu, rng).u;
    } else {
      for (std::size_t i = 0; i < specs.size(); ++i) u.push_back(uniform01(rng));
    }
    u = snap(u);
    for (const auto& [i, x] : fu) u[i] = x;
    return u;
  }
};

/// The fitted size closest to `target` by |dw| + |dh|; ties go to the smaller area.
inline std::optional<Size> closest_model_size(const std::map<Size, GmmModel>& models, Size target) {
  std::optional<Size> best;
  int best_dist = 0;
  for (const auto& [s, m] : models) {
    const int d = std::abs(s.width - target.width) + std::abs(s.height - target.height);
    if (!best || d < best_dist || (d == best_dist && s.area() < best->area())) {
      best = s;
      best_dist = d;
    }
  }
  return best;
}

inline constexpr std::size_t kTailoredSamples = 1000;
inline constexpr std::uint64_t kTailoredStream = 21;

/// Fits a model for `target` on the playable part of a sample generated with
/// conditions from `base`. Throws when nothing in the sample is playable.
inline GmmModel tailored_gmm(const GenerateFn& generate, const GmmModel& base, Game game, Size target,
                             std::size_t sample_n, std::uint64_t seed, std::size_t threads = 1) {
  const GameSpec spec = game_spec(game);
  ConditionSource source{target, spec.controls, base, SourceKind::closest, {}};
  const auto w = static_cast<std::uint64_t>(target.width), h = static_cast<std::uint64_t>(target.height);
  Rng crng = make_stream(seed, {kTailoredStream, w, h, 0});
  std::vector<std::vector<double>> u(sample_n);
  std::vector<Rng> rngs;
  for (std::size_t i = 0; i < sample_n; ++i) {
    u[i] = source.sample(crng);
    rngs.push_back(make_stream(seed, {kTailoredStream, w, h, 1, i}));
  }
  const std::vector<Level> levels = generate(u, target, rngs);
  std::vector<Analysis> analyses(levels.size());
  parallel_for(levels.size(), threads, [&](std::size_t i) { analyses[i] = analyze(levels[i]); });
  std::vector<std::vector<double>> points;
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (analyses[i].playable) points.push_back(measure_controls(levels[i], analyses[i], spec.controls));
  if (points.empty())
    throw std::runtime_error("no playable level in the tailoring sample at " + size_string(target) +
                             "; use the closest-size model instead");
  Rng frng = make_stream(seed, {kTailoredStream, w, h, 2});
  GmmModel m = fit_gmm(points, 16, 100, frng).model;
  m.size = target;
  m.labels.clear();
  m.denominators.clear();
  for (const auto& c : spec.controls) {
    m.labels.push_back(c.name);
    m.denominators.push_back(c.den(target.width, target.height));
  }
  return m;
}

/// Condition source for generation at `target`: the model fit at that size
/// if there is one, else the closest-size model (Sokoban) or a tailored model
/// (Zelda, Dave), falling back to the closest-size model if tailoring fails.
inline ConditionSource condition_source(const std::map<Size, GmmModel>& models, Game game, Size target,
                                        const GenerateFn& generate, std::uint64_t seed, std::size_t threads = 1,
                                        std::size_t tailored_samples = kTailoredSamples) {
  const GameSpec spec = game_spec(game);
  ConditionSource s{target, spec.controls, std::nullopt, SourceKind::uniform, {}};
  if (auto it = models.find(target); it != models.end()) {
    s.model = it->second;
    s.kind = SourceKind::trained;
    return s;
  }
  const auto near = closest_model_size(models, target);
  if (!near) {
    s.warning = "no condition model available; sampling controls uniformly";
    return s;
  }
  const GmmModel& base = models.at(*near);
  s.model = base;
  s.kind = SourceKind::closest;
  if (game == Game::sokoban) return s;
  try {
    s.model = tailored_gmm(generate, base, game, target, tailored_samples, seed, threads);
    s.kind = SourceKind::tailored;
  } catch (const std::runtime_error& e) {
    s.warning = std::string(e.what()) + "; using the " + size_string(*near) + " model";
  }
  return s;
}

}  // namespace msgfn
