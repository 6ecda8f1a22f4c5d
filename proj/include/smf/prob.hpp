#pragma once

/// \file prob.hpp
/// Integer-shape Gamma law, exponential-sum tail bounds, a binomial
/// lower-tail bound and the Dirichlet bridge sampler.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "smf/errors.hpp"
#include "smf/rng.hpp"

namespace smf {

/// Gamma(shape, rate) with integer shape.
struct GammaSpec {
  std::size_t shape = 1;
  double rate = 1.0;

  void validate() const {
    if (shape < 1) throw std::invalid_argument("gamma shape must be >= 1");
    if (!(rate > 0.0) || !std::isfinite(rate))
      throw std::invalid_argument("gamma rate must be positive");
  }
};

namespace detail {

inline double log_sum_exp(double a, double b) noexcept {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// ln P(Gamma(k,1) <= x) via the series sum_{j>=k} x^j/j! e^{-x}; stable for
/// x below about k.
inline double log_lower_series(std::size_t k, double x) {
  const double kd = static_cast<double>(k);
  const double lead = kd * std::log(x) - x - std::lgamma(kd + 1.0);
  double term = 1.0;
  double sum = 1.0;
  for (std::size_t j = 1; j < 100000; ++j) {
    term *= x / (kd + static_cast<double>(j));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return lead + std::log(sum);
}

/// ln P(Gamma(k,1) > x) = ln(e^{-x} sum_{i<k} x^i/i!), summed in log-space.
inline double log_upper_sum(std::size_t k, double x) {
  const double lx = std::log(x);
  double acc = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const double di = static_cast<double>(i);
    acc = log_sum_exp(acc, di * lx - x - std::lgamma(di + 1.0));
  }
  return acc;
}

}  // namespace detail

/// ln f_{rate,k}(z) = k ln(rate) + (k-1) ln z - rate z - ln (k-1)!.
inline double gamma_log_pdf(const GammaSpec& spec, double z) {
  spec.validate();
  if (!(z >= 0.0)) throw std::invalid_argument("gamma density needs z >= 0");
  const double k = static_cast<double>(spec.shape);
  if (z == 0.0)
    return spec.shape == 1 ? std::log(spec.rate) : -std::numeric_limits<double>::infinity();
  return k * std::log(spec.rate) + (k - 1.0) * std::log(z) - spec.rate * z - std::lgamma(k);
}

inline double gamma_pdf(const GammaSpec& spec, double z) {
  return std::exp(gamma_log_pdf(spec, z));
}

/// P(Gamma(k, rate) <= z) through the integer-shape identity
/// 1 - e^{-x} sum_{i<k} x^i / i!, x = rate * z. The complement that is not
/// close to 1 is summed directly so neither tail cancels.
inline double gamma_cdf(const GammaSpec& spec, double z) {
  spec.validate();
  if (!(z >= 0.0)) throw std::invalid_argument("gamma cdf needs z >= 0");
  if (z == 0.0) return 0.0;
  const double x = spec.rate * z;
  if (std::isinf(x)) return 1.0;
  const auto k = spec.shape;
  if (x < static_cast<double>(k)) return std::min(1.0, std::exp(detail::log_lower_series(k, x)));
  return std::max(0.0, -std::expm1(detail::log_upper_sum(k, x)));
}

/// Number of summands and deviation for the exponential-sum tail bounds.
struct TailBoundQuery {
  std::size_t summands = 1;
  double deviation = 1.0;
};

/// e^{-a^2/4N}, an upper bound on P(S_N >= N + a) for a sum of N mean-one
/// exponentials. Only valid for 0 < a <= (2 - sqrt 2) N.
inline double exp_tail_upper(const TailBoundQuery& q) {
  if (q.summands < 1) throw std::invalid_argument("tail bound needs N >= 1");
  const double n = static_cast<double>(q.summands);
  if (!(q.deviation > 0.0) || q.deviation > (2.0 - std::numbers::sqrt2) * n)
    throw range_error("upper tail bound requires 0 < alpha <= (2 - sqrt 2) N");
  return std::exp(-q.deviation * q.deviation / (4.0 * n));
}

/// e^{-a^2/2N}, an upper bound on P(S_N <= N - a).
inline double exp_tail_lower(const TailBoundQuery& q) {
  if (q.summands < 1) throw std::invalid_argument("tail bound needs N >= 1");
  if (!(q.deviation > 0.0)) throw std::invalid_argument("tail bound needs alpha > 0");
  const double n = static_cast<double>(q.summands);
  return std::exp(-q.deviation * q.deviation / (2.0 * n));
}

/// Chernoff lower tail exp(-(tp - x)^2 / (2 tp)) for P(Bin(t, p) <= x).
inline double binomial_lower_tail_bound(std::size_t trials, double p, double threshold) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be a probability");
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be nonnegative");
  const double mean = static_cast<double>(trials) * p;
  if (threshold > mean) throw range_error("lower-tail bound requires threshold <= trials * p");
  if (mean == 0.0) return 1.0;
  const double gap = mean - threshold;
  return std::exp(-gap * gap / (2.0 * mean));
}

/// Exact P(Bin(trials, p) <= x) for x = 0..trials, from log-space pmf terms.
inline std::vector<double> binomial_cdf_table(std::size_t trials, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be a probability");
  std::vector<double> cdf(trials + 1, 1.0);
  if (p == 0.0) return cdf;
  if (p == 1.0) {
    std::fill(cdf.begin(), cdf.end() - 1, 0.0);
    return cdf;
  }
  const double t = static_cast<double>(trials);
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  double acc = 0.0;
  for (std::size_t x = 0; x <= trials; ++x) {
    const double xd = static_cast<double>(x);
    const double lpmf = std::lgamma(t + 1.0) - std::lgamma(xd + 1.0) - std::lgamma(t - xd + 1.0) +
                        xd * lp + (t - xd) * lq;
    acc += std::exp(lpmf);
    cdf[x] = std::min(1.0, acc);
  }
  cdf[trials] = 1.0;
  return cdf;
}

/// Draws m positive increments with the law of m i.i.d. exponentials
/// conditioned on their sum being `total`: total * Dirichlet(1,...,1).
/// `base_mean` only scales the raw draws and cancels in the rescaling.
inline std::vector<double> dirichlet_bridge_sample(std::size_t m, double total, CounterRng& rng,
                                                   double base_mean = 1.0) {
  if (m < 1) throw std::invalid_argument("bridge sample needs m >= 1");
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::invalid_argument("bridge total must be positive");
  std::vector<double> x(m);
  double sum = 0.0;
  for (auto& v : x) {
    v = rng.exponential(base_mean);
    sum += v;
  }
  const double scale = total / sum;
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    x[i] *= scale;
    head += x[i];
  }
  // The last increment closes the sum unless rounding would make it nonpositive.
  const double closing = total - head;
  x[m - 1] = closing > 0.0 ? closing : x[m - 1] * scale;
  return x;
}

inline std::vector<double> dirichlet_bridge_sample(std::size_t m, double total,
                                                   std::uint64_t seed, double base_mean = 1.0) {
  CounterRng rng(seed);
  return dirichlet_bridge_sample(m, total, rng, base_mean);
}

/// n (n-1) ... (n-len): ordered tuples of len+1 distinct vertices.
inline double ordered_path_count(std::size_t n, std::size_t len) {
  if (len + 1 > n) return 0.0;
  double c = 1.0;
  for (std::size_t i = 0; i <= len; ++i) c *= static_cast<double>(n - i);
  return c;
}

/// Expected number of ordered (lambda, C)-light paths of length ell in K_n
/// with exponential(mean) weights. Exact at finite n. mean <= 0 selects n.
inline double expected_light_count(std::size_t n, std::size_t ell, double lambda, double c = 1.0,
                                   double mean = 0.0) {
  if (ell < 1) throw std::invalid_argument("path length must be >= 1");
  if (mean <= 0.0) mean = static_cast<double>(n);
  const double ld = static_cast<double>(ell);
  const double threshold = lambda * ld - c * std::sqrt(ld);
  if (!(threshold > 0.0)) return 0.0;
  return ordered_path_count(n, ell) * gamma_cdf(GammaSpec{ell, 1.0 / mean}, threshold);
}

}  // namespace smf
