#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "msgfn/condmodel/source.hpp"
#include "msgfn/games/game.hpp"
#include "msgfn/model/generator.hpp"
#include "msgfn/util/parallel.hpp"

namespace msgfn {

enum EvalStream : std::uint64_t {
  kEvalConditionStream = 31,
  kEvalRolloutStream = 32,
  kControlStream = 33,
  kRetryStream = 34,
  kTimingStream = 35,
};

struct Sample {
  std::vector<double> u;
  Level level;
  Analysis analysis;
};

inline std::vector<Analysis> analyze_all(const std::vector<Level>& levels, std::size_t threads) {
  std::vector<Analysis> out(levels.size());
  parallel_for(levels.size(), threads, [&](std::size_t i) { out[i] = analyze(levels[i]); });
  return out;
}

/// Generates and analyzes one level per condition vector.
inline std::vector<Sample> generate_samples(const GenerateFn& generate, const std::vector<std::vector<double>>& u,
                                            Size size, std::vector<Rng>& rngs, std::size_t threads = 1) {
  std::vector<Level> levels = generate(u, size, rngs);
  std::vector<Analysis> analyses = analyze_all(levels, threads);
  std::vector<Sample> out;
  out.reserve(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out.push_back({u[i], std::move(levels[i]), std::move(analyses[i])});
  return out;
}

/// n levels with controls sampled unconditionally from `source`.
inline std::vector<Sample> sample_unconditional(const GenerateFn& generate, const ConditionSource& source,
                                                std::size_t n, std::uint64_t seed, std::size_t threads = 1) {
  std::vector<std::vector<double>> u;
  std::vector<Rng> rngs;
  for (std::size_t i = 0; i < n; ++i) {
    Rng c = make_stream(seed, {kEvalConditionStream, i});
    u.push_back(source.sample(c));
    rngs.push_back(make_stream(seed, {kEvalRolloutStream, i}));
  }
  return generate_samples(generate, u, source.target, rngs, threads);
}

struct Request {
  std::vector<double> u;
  std::map<std::size_t, int> controlled;  // control index -> requested value
};

struct RetryResult {
  Sample sample;
  int trials = 0;
  double error = 0;  // summed |measured - requested| over controlled entries
};

inline double control_error(const Analysis& a, const Request& r, const std::vector<ControlSpec>& specs) {
  double e = 0;
  for (const auto& [i, v] : r.controlled) e += std::abs(a.property(specs[i].name) - v);
  return e;
}

/// Up to `trials` attempts per request, all rows advancing in lockstep. A row
/// without controlled entries stops at its first playable level; a controlled
/// row keeps the playable attempt with the smallest error and stops early at
/// error 0. When no attempt is playable the last attempt is returned.
inline std::vector<RetryResult> generate_with_retries(const GenerateFn& generate, Size size,
                                                      const std::vector<Request>& requests, int trials,
                                                      std::vector<Rng>& rngs, const std::vector<ControlSpec>& specs,
                                                      std::size_t threads = 1) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (rngs.size() != requests.size()) throw std::invalid_argument("one rng per request required");
  std::vector<RetryResult> out(requests.size());
  std::vector<bool> done(requests.size(), false), found(requests.size(), false);
  for (int t = 0; t < trials; ++t) {
    std::vector<std::size_t> rows;
    std::vector<std::vector<double>> u;
    std::vector<Rng> batch_rngs;
    for (std::size_t i = 0; i < requests.size(); ++i)
      if (!done[i]) {
        rows.push_back(i);
        u.push_back(requests[i].u);
        batch_rngs.push_back(rngs[i]);
      }
    if (rows.empty()) break;
    std::vector<Sample> samples = generate_samples(generate, u, size, batch_rngs, threads);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const std::size_t i = rows[k];
      rngs[i] = batch_rngs[k];
      RetryResult& r = out[i];
      r.trials = t + 1;
      Sample& s = samples[k];
      if (!s.analysis.playable) {
        if (!found[i]) {
          r.sample = std::move(s);
          r.error = std::numeric_limits<double>::infinity();
        }
        continue;
      }
      const double e = control_error(s.analysis, requests[i], specs);
      if (!found[i] || e < r.error) {
        r.sample = std::move(s);
        r.error = e;
        found[i] = true;
      }
      if (requests[i].controlled.empty() || r.error == 0) done[i] = true;
    }
  }
  return out;
}

inline RetryResult generate_with_retries(const GenerateFn& generate, Size size, const Request& request, int trials,
                                         Rng& rng, const std::vector<ControlSpec>& specs) {
  std::vector<Rng> rngs{rng};
  auto out = generate_with_retries(generate, size, {request}, trials, rngs, specs);
  rng = rngs[0];
  return std::move(out[0]);
}

}  // namespace msgfn
