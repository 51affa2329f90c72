#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "msgfn/games/level.hpp"
#include "msgfn/io/binary.hpp"
#include "msgfn/util/errors.hpp"
#include "msgfn/util/rng.hpp"

namespace msgfn {

inline constexpr double kCovarianceRidge = 1e-6;
inline constexpr double kPruneWeight = 1e-6;

/// Gaussian mixture over normalized control vectors.
struct GmmModel {
  Size size;                        // level size the data came from
  std::vector<std::string> labels;  // control names
  std::vector<double> denominators; // den(w, h) of each control at `size`
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;

  std::size_t dim() const { return labels.size(); }
  std::size_t components() const { return weights.size(); }

  friend bool operator==(const GmmModel& a, const GmmModel& b) {
    if (a.size != b.size || a.labels != b.labels || a.denominators != b.denominators || a.weights != b.weights ||
        a.means.size() != b.means.size())
      return false;
    for (std::size_t k = 0; k < a.means.size(); ++k)
      if (a.means[k] != b.means[k] || a.covariances[k] != b.covariances[k]) return false;
    return true;
  }
};

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// log N(x; mean, L L^T) given the lower Cholesky factor.
inline double log_normal(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol) {
  const Eigen::VectorXd z = chol.triangularView<Eigen::Lower>().solve(x - mean);
  const double log_det = 2.0 * chol.diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + log_det + static_cast<double>(x.size()) * std::log(2.0 * M_PI));
}

inline Eigen::MatrixXd cholesky(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    Eigen::LLT<Eigen::MatrixXd> ridge(cov + kCovarianceRidge * Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
    if (ridge.info() != Eigen::Success) throw NonFiniteError("covariance is not positive definite");
    return ridge.matrixL();
  }
  return llt.matrixL();
}

inline Eigen::VectorXd standard_normal_vector(std::size_t d, Rng& rng) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
  return z;
}

inline std::size_t sample_index(const std::vector<double>& weights, Rng& rng) {
  const double x = uniform01(rng);
  double cum = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cum += weights[k];
    if (x < cum) return k;
  }
  return weights.size() - 1;
}

}  // namespace detail

/// Total log-likelihood of the points.
inline double gmm_log_likelihood(const GmmModel& m, const std::vector<Eigen::VectorXd>& points) {
  std::vector<Eigen::MatrixXd> chol;
  for (const auto& c : m.covariances) chol.push_back(detail::cholesky(c));
  double ll = 0;
  std::vector<double> terms(m.components());
  for (const auto& x : points) {
    for (std::size_t k = 0; k < m.components(); ++k)
      terms[k] = std::log(m.weights[k]) + detail::log_normal(x, m.means[k], chol[k]);
    ll += detail::log_sum_exp(terms);
  }
  return ll;
}

struct GmmFit {
  GmmModel model;
  std::vector<double> log_likelihood;  // before each EM iteration, then after the last
};

/// k-means++ initialization followed by `iterations` EM steps with full
/// covariances. K is reduced to the number of distinct points. Components
/// whose weight ends below 1e-6 are dropped.
inline GmmFit fit_gmm(const std::vector<std::vector<double>>& data, std::size_t k_max, int iterations, Rng& rng) {
  if (data.empty()) throw std::invalid_argument("fit_gmm: no points");
  const std::size_t d = data[0].size();
  if (d == 0) throw DimensionError("fit_gmm: zero-dimensional points");
  std::vector<Eigen::VectorXd> x;
  for (const auto& p : data) {
    if (p.size() != d) throw DimensionError("fit_gmm: ragged points");
    x.push_back(Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(d)));
  }
  const std::size_t n = x.size();
  const std::size_t distinct = std::set<std::vector<double>>(data.begin(), data.end()).size();
  const std::size_t K = std::max<std::size_t>(1, std::min(k_max, distinct));
  const Eigen::MatrixXd ridge = kCovarianceRidge * Eigen::MatrixXd::Identity(d, d);

  // k-means++ centers.
  std::vector<Eigen::VectorXd> centers{x[uniform_index(rng, n)]};
  std::vector<double> dist(n);
  while (centers.size() < K) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, (x[i] - c).squaredNorm());
      dist[i] = best;
      total += best;
    }
    if (total <= 0) break;
    double target = uniform01(rng) * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i] <= 0) continue;
      target -= dist[i];
      if (target < 0) {
        pick = i;
        break;
      }
    }
    while (dist[pick] <= 0) --pick;
    centers.push_back(x[pick]);
  }
  const std::size_t k_count = centers.size();

  // Responsibilities start as hard nearest-center assignments.
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k_count));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < k_count; ++k)
      if ((x[i] - centers[k]).squaredNorm() < (x[i] - centers[best]).squaredNorm()) best = k;
    resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best)) = 1.0;
  }

  GmmFit fit;
  GmmModel& m = fit.model;
  m.weights.assign(k_count, 0);
  m.means.assign(k_count, Eigen::VectorXd::Zero(d));
  m.covariances.assign(k_count, Eigen::MatrixXd::Zero(d, d));

  auto m_step = [&] {
    for (std::size_t k = 0; k < k_count; ++k) {
      const Eigen::Index kk = static_cast<Eigen::Index>(k);
      const double nk = resp.col(kk).sum();
      m.weights[k] = nk / static_cast<double>(n);
      if (nk <= 0) {
        m.covariances[k] = ridge;
        continue;
      }
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
      for (std::size_t i = 0; i < n; ++i) mean += resp(static_cast<Eigen::Index>(i), kk) * x[i];
      mean /= nk;
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
      for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd c = x[i] - mean;
        cov += resp(static_cast<Eigen::Index>(i), kk) * c * c.transpose();
      }
      m.means[k] = mean;
      m.covariances[k] = cov / nk + ridge;
    }
  };

  auto e_step = [&] {
    std::vector<Eigen::MatrixXd> chol;
    for (const auto& c : m.covariances) chol.push_back(detail::cholesky(c));
    double ll = 0;
    std::vector<double> terms(k_count);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < k_count; ++k)
        terms[k] = m.weights[k] > 0 ? std::log(m.weights[k]) + detail::log_normal(x[i], m.means[k], chol[k])
                                    : -std::numeric_limits<double>::infinity();
      const double lse = detail::log_sum_exp(terms);
      ll += lse;
      for (std::size_t k = 0; k < k_count; ++k)
        resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = std::exp(terms[k] - lse);
    }
    return ll;
  };

  m_step();
  for (int it = 0; it < iterations; ++it) {
    fit.log_likelihood.push_back(e_step());
    m_step();
  }
  fit.log_likelihood.push_back(gmm_log_likelihood(m, x));

  GmmModel pruned;
  double total = 0;
  for (std::size_t k = 0; k < k_count; ++k)
    if (m.weights[k] >= kPruneWeight) total += m.weights[k];
  for (std::size_t k = 0; k < k_count; ++k) {
    if (m.weights[k] < kPruneWeight) continue;
    pruned.weights.push_back(m.weights[k] / total);
    pruned.means.push_back(m.means[k]);
    pruned.covariances.push_back(m.covariances[k]);
  }
  pruned.labels.assign(d, "");
  pruned.denominators.assign(d, 1.0);
  m = std::move(pruned);
  return fit;
}

inline std::vector<double> sample_gmm(const GmmModel& m, Rng& rng) {
  const std::size_t k = detail::sample_index(m.weights, rng);
  const Eigen::VectorXd x =
      m.means[k] + detail::cholesky(m.covariances[k]) * detail::standard_normal_vector(m.dim(), rng);
  return {x.data(), x.data() + x.size()};
}

struct ConditionalSample {
  std::vector<double> u;
  std::size_t component = 0;
  bool fallback = false;  // every reweighted component underflowed
};

/// Samples the free dimensions given fixed values for some of them. The
/// component is chosen with probability proportional to w_k N(v; mu_kF,
/// S_kFF) and the free part from that component's conditional normal.
inline ConditionalSample conditional_sample_gmm(const GmmModel& m, const std::map<std::size_t, double>& fixed,
                                                Rng& rng) {
  const std::size_t d = m.dim();
  if (fixed.size() >= d) throw DimensionError("conditional_sample_gmm: no free dimensions");
  std::vector<Eigen::Index> fi, ri;
  for (std::size_t j = 0; j < d; ++j) {
    if (fixed.count(j)) fi.push_back(static_cast<Eigen::Index>(j));
    else ri.push_back(static_cast<Eigen::Index>(j));
  }
  for (const auto& [j, v] : fixed)
    if (j >= d) throw DimensionError("conditional_sample_gmm: fixed index out of range");
  Eigen::VectorXd v(static_cast<Eigen::Index>(fi.size()));
  for (std::size_t a = 0; a < fi.size(); ++a) v[static_cast<Eigen::Index>(a)] = fixed.at(static_cast<std::size_t>(fi[a]));

  ConditionalSample out;
  out.u.assign(d, 0.0);
  for (const auto& [j, val] : fixed) out.u[j] = val;
  if (fi.empty()) {
    out.u = sample_gmm(m, rng);
    return out;
  }
  const std::size_t K = m.components();
  std::vector<double> logw(K);
  std::vector<Eigen::MatrixXd> chol_ff(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Eigen::MatrixXd sff = m.covariances[k](fi, fi);
    chol_ff[k] = detail::cholesky(sff);
    logw[k] = std::log(m.weights[k]) + detail::log_normal(v, m.means[k](fi), chol_ff[k]);
  }
  const double lse = detail::log_sum_exp(logw);
  std::size_t k = 0;
  if (!std::isfinite(lse)) {
    out.fallback = true;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < K; ++c) {
      // Standardized L1 distance; squares would overflow for the values
      // that get here.
      double dist = 0;
      for (std::size_t a = 0; a < fi.size(); ++a)
        dist += std::abs(v[static_cast<Eigen::Index>(a)] - m.means[c][fi[a]]) / std::sqrt(m.covariances[c](fi[a], fi[a]));
      if (dist < best) {
        best = dist;
        k = c;
      }
    }
  } else {
    std::vector<double> w(K);
    for (std::size_t c = 0; c < K; ++c) w[c] = std::exp(logw[c] - lse);
    k = detail::sample_index(w, rng);
  }
  out.component = k;
  const Eigen::MatrixXd& s = m.covariances[k];
  const Eigen::MatrixXd srf = s(ri, fi);
  const Eigen::LLT<Eigen::MatrixXd> llt(s(fi, fi));
  const Eigen::VectorXd mean = m.means[k](ri) + srf * llt.solve(v - m.means[k](fi));
  const Eigen::MatrixXd cov = s(ri, ri) - srf * llt.solve(srf.transpose());
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  const Eigen::VectorXd x = mean + detail::cholesky(sym) * detail::standard_normal_vector(ri.size(), rng);
  for (std::size_t a = 0; a < ri.size(); ++a) out.u[static_cast<std::size_t>(ri[a])] = x[static_cast<Eigen::Index>(a)];
  return out;
}

// Model file: magic "MSGFNGMM", u32 version, i32 width, i32 height, u32 dim,
// per dim (string label, f64 denominator), u32 K, then per component f64
// weight, f64 mean[dim], f64 covariance[dim * dim] (row-major).

inline constexpr std::uint32_t kGmmVersion = 1;

inline void write_gmm(std::ostream& os, const GmmModel& m) {
  io::write_bytes(os, "MSGFNGMM", 8);
  io::write_pod<std::uint32_t>(os, kGmmVersion);
  io::write_pod<std::int32_t>(os, m.size.width);
  io::write_pod<std::int32_t>(os, m.size.height);
  io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(m.dim()));
  for (std::size_t j = 0; j < m.dim(); ++j) {
    io::write_string(os, m.labels[j]);
    io::write_pod<double>(os, m.denominators[j]);
  }
  io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(m.components()));
  for (std::size_t k = 0; k < m.components(); ++k) {
    io::write_pod<double>(os, m.weights[k]);
    for (Eigen::Index a = 0; a < m.means[k].size(); ++a) io::write_pod<double>(os, m.means[k][a]);
    for (Eigen::Index r = 0; r < m.covariances[k].rows(); ++r)
      for (Eigen::Index c = 0; c < m.covariances[k].cols(); ++c) io::write_pod<double>(os, m.covariances[k](r, c));
  }
}

inline GmmModel read_gmm(std::istream& is) {
  io::expect_magic(is, "MSGFNGMM");
  const auto version = io::read_pod<std::uint32_t>(is);
  if (version != kGmmVersion) throw FormatError("unsupported GMM version " + std::to_string(version));
  GmmModel m;
  m.size.width = io::read_pod<std::int32_t>(is);
  m.size.height = io::read_pod<std::int32_t>(is);
  const auto d = io::read_pod<std::uint32_t>(is);
  if (d == 0 || d > 64) throw FormatError("GMM dimension out of range");
  for (std::uint32_t j = 0; j < d; ++j) {
    m.labels.push_back(io::read_string(is, 256));
    m.denominators.push_back(io::read_pod<double>(is));
  }
  const auto K = io::read_pod<std::uint32_t>(is);
  if (K == 0 || K > 4096) throw FormatError("GMM component count out of range");
  for (std::uint32_t k = 0; k < K; ++k) {
    m.weights.push_back(io::read_pod<double>(is));
    Eigen::VectorXd mean(d);
    for (std::uint32_t a = 0; a < d; ++a) mean[a] = io::read_pod<double>(is);
    Eigen::MatrixXd cov(d, d);
    for (std::uint32_t r = 0; r < d; ++r)
      for (std::uint32_t c = 0; c < d; ++c) cov(r, c) = io::read_pod<double>(is);
    m.means.push_back(std::move(mean));
    m.covariances.push_back(std::move(cov));
  }
  return m;
}

inline void save_gmm(const std::string& path, const GmmModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_gmm(os, m);
}

inline GmmModel load_gmm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_gmm(is);
}

}  // namespace msgfn
