#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "msgfn/eval/generate.hpp"

namespace msgfn {

struct SeriesStats {
  double mean = 0, std = 0, min = 0, max = 0;
};

inline SeriesStats series_stats(const std::vector<double>& v) {
  SeriesStats s;
  if (v.empty()) return s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(s.std / static_cast<double>(v.size() - 1)) : 0;
  return s;
}

struct TimingRow {
  Size size;
  std::size_t batches = 0, batch_size = 0;
  SeriesStats batch_seconds;     // generation and verification of one batch
  SeriesStats generate_seconds;  // generation only
  double level_ms = 0;           // mean generation time per level
};

/// Times `batches` batches of `batch_size` levels per size.
inline std::vector<TimingRow> timing_report(const GenerateFn& generate, const std::vector<ConditionSource>& sources,
                                            std::size_t batches, std::size_t batch_size, std::uint64_t seed,
                                            std::size_t threads = 1) {
  using clock = std::chrono::steady_clock;
  std::vector<TimingRow> out;
  for (const ConditionSource& src : sources) {
    const auto w = static_cast<std::uint64_t>(src.target.width), h = static_cast<std::uint64_t>(src.target.height);
    std::vector<double> total, gen;
    for (std::size_t b = 0; b < batches; ++b) {
      std::vector<std::vector<double>> u;
      std::vector<Rng> rngs;
      for (std::size_t i = 0; i < batch_size; ++i) {
        Rng c = make_stream(seed, {kTimingStream, w, h, b, i, 0});
        u.push_back(src.sample(c));
        rngs.push_back(make_stream(seed, {kTimingStream, w, h, b, i, 1}));
      }
      const auto t0 = clock::now();
      const std::vector<Level> levels = generate(u, src.target, rngs);
      const auto t1 = clock::now();
      analyze_all(levels, threads);
      const auto t2 = clock::now();
      gen.push_back(std::chrono::duration<double>(t1 - t0).count());
      total.push_back(std::chrono::duration<double>(t2 - t0).count());
    }
    TimingRow row{src.target, batches, batch_size, series_stats(total), series_stats(gen), 0};
    if (batch_size) row.level_ms = 1000.0 * row.generate_seconds.mean / static_cast<double>(batch_size);
    out.push_back(row);
  }
  return out;
}

/// Median wall time of `calls` single-level generations at `size`.
inline double median_call_seconds(const GenerateFn& generate, const ConditionSource& source, std::size_t calls,
                                  std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  std::vector<double> t;
  for (std::size_t i = 0; i < calls; ++i) {
    Rng c = make_stream(seed, {kTimingStream, 0, i, 0});
    std::vector<std::vector<double>> u{source.sample(c)};
    std::vector<Rng> rngs{make_stream(seed, {kTimingStream, 0, i, 1})};
    const auto t0 = clock::now();
    generate(u, source.target, rngs);
    t.push_back(std::chrono::duration<double>(clock::now() - t0).count());
  }
  if (t.empty()) return 0;
  std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2), t.end());
  return t[t.size() / 2];
}

/// Pearson correlation and least-squares line y = slope x + intercept.
struct LinearFit {
  double slope = 0, intercept = 0, r = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  const double n = static_cast<double>(x.size());
  if (x.size() < 2 || x.size() != y.size()) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r = sxy / std::sqrt(sxx * syy);
  return f;
}

}  // namespace msgfn
