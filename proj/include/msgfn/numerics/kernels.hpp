#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <limits>
#include <span>
#include <vector>

namespace msgfn::kernels {

// Every kernel computes each output row from its own input row with a fixed
// summation order, so results for one row never depend on the batch size or
// on the other rows. Rollout and teacher forcing rely on this to agree
// bit-for-bit.

inline constexpr std::size_t kChunk = 8;

namespace detail {

using Vec = double __attribute__((vector_size(kChunk * sizeof(double))));

inline Vec load(const double* p) {
  Vec v;
  std::memcpy(&v, p, sizeof(Vec));
  return v;
}

inline void store(double* p, const Vec& v) { std::memcpy(p, &v, sizeof(Vec)); }

// R rows share each load of m. The per-row operation sequence is the same
// for every R, so a row's result does not depend on how rows are blocked.
template <std::size_t R>
inline void rows_times_block(const double* x, std::size_t inner, const double* m, std::size_t n,
                             double* out, const double* bias, bool accumulate) {
  std::size_t j0 = 0;
  for (; j0 + kChunk <= n; j0 += kChunk) {
    Vec acc[R];
    if (accumulate) {
      for (std::size_t r = 0; r < R; ++r) acc[r] = load(out + r * n + j0);
    } else {
      Vec start = {};
      if (bias) start = load(bias + j0);
      for (std::size_t r = 0; r < R; ++r) acc[r] = start;
    }
    const double* mp = m + j0;
    for (std::size_t k = 0; k < inner; ++k, mp += n) {
      const Vec mv = load(mp);
      for (std::size_t r = 0; r < R; ++r) acc[r] += x[r * inner + k] * mv;
    }
    for (std::size_t r = 0; r < R; ++r) store(out + r * n + j0, acc[r]);
  }
  for (; j0 < n; ++j0) {
    for (std::size_t r = 0; r < R; ++r) {
      double acc = accumulate ? out[r * n + j0] : (bias ? bias[j0] : 0.0);
      for (std::size_t k = 0; k < inner; ++k) acc += x[r * inner + k] * m[k * n + j0];
      out[r * n + j0] = acc;
    }
  }
}

}  // namespace detail

/// out[b, :] = start[b, :] + sum_k x[b, k] * m[k, :], with k ascending.
/// start is out itself when accumulate is set, otherwise bias (or zero).
inline void rows_times(const double* x, std::size_t batch, std::size_t inner, const double* m,
                       std::size_t n, double* out, const double* bias, bool accumulate) {
  std::size_t b = 0;
  for (; b + 8 <= batch; b += 8)
    detail::rows_times_block<8>(x + b * inner, inner, m, n, out + b * n, bias, accumulate);
  for (; b + 4 <= batch; b += 4)
    detail::rows_times_block<4>(x + b * inner, inner, m, n, out + b * n, bias, accumulate);
  for (; b < batch; ++b)
    detail::rows_times_block<1>(x + b * inner, inner, m, n, out + b * n, bias, accumulate);
}

/// dw[j, :] += sum_b dy[b, j] * x[b, :], with b ascending.
inline void accumulate_outer(const double* dy, const double* x, std::size_t batch, std::size_t n,
                             std::size_t inner, double* dw) {
  std::vector<double> g(batch);
  for (std::size_t j = 0; j < n; ++j) {
    bool any = false;
    for (std::size_t b = 0; b < batch; ++b) {
      g[b] = dy[b * n + j];
      any = any || g[b] != 0.0;
    }
    if (!any) continue;
    double* w = dw + j * inner;
    std::size_t k0 = 0;
    for (; k0 + kChunk <= inner; k0 += kChunk) {
      detail::Vec acc = detail::load(w + k0);
      for (std::size_t b = 0; b < batch; ++b) acc += g[b] * detail::load(x + b * inner + k0);
      detail::store(w + k0, acc);
    }
    for (; k0 < inner; ++k0) {
      double acc = w[k0];
      for (std::size_t b = 0; b < batch; ++b) acc += g[b] * x[b * inner + k0];
      w[k0] = acc;
    }
  }
}

/// dbias[j] += sum_b dy[b, j].
inline void accumulate_rows(const double* dy, std::size_t batch, std::size_t n, double* db) {
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t j = 0; j < n; ++j) db[j] += dy[b * n + j];
}

/// Row-major rows x cols -> cols x rows.
inline void transpose(const double* src, std::size_t rows, std::size_t cols, double* dst) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}

inline constexpr double kLeakySlope = 0.01;

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline void log_softmax_inplace(std::span<double> row) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : row) mx = std::max(mx, v);
  double s = 0.0;
  for (double v : row) s += std::exp(v - mx);
  const double lse = mx + std::log(s);
  for (double& v : row) v -= lse;
}

}  // namespace msgfn::kernels
