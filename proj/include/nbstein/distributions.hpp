#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nbstein/errors.hpp"
#include "nbstein/numerics.hpp"
#include "nbstein/rng.hpp"

namespace nbstein {

// ---------------------------------------------------------------------------
// Parameter types
// ---------------------------------------------------------------------------

/// NB(r, p){k} = Γ(r+k) / (Γ(r) k!) (1-p)^r p^k.
struct NegBinParams {
  double r;
  double p;

  NegBinParams(double shape, double prob) : r(shape), p(prob) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw DomainError("NegBinParams: r must be > 0, got " + std::to_string(r));
    }
    if (!(p > 0.0 && p < 1.0)) {
      throw DomainError("NegBinParams: p must lie in (0, 1), got " +
                        std::to_string(p));
    }
  }

  double mean() const { return r * p / (1.0 - p); }
  double variance() const { return r * p / ((1.0 - p) * (1.0 - p)); }
  /// NB{k+1} / NB{k}.
  double ratio(std::int64_t k) const {
    return p * (r + static_cast<double>(k)) / static_cast<double>(k + 1);
  }
};

/// Kendall's time-dependent parameters of a single-ancestor birth-death
/// process with per-capita birth rate b and unit death rate.
struct KendallParams {
  double lambda;          // Λ_t(b) = exp(-(1-b) t)
  double theta;           // θ_t(b) = b (1-Λ) / (1 - bΛ)
  double one_minus_theta;
  double u;               // (1-Λ)/(1-b), equal to t when b = 1
};

namespace detail {

// (1 - exp(-x)) / x, continuous through x = 0.
inline double one_minus_exp_over_x(double x) {
  if (std::abs(x) < 1e-5) return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
  return -std::expm1(-x) / x;
}

}  // namespace detail

/// Λ_t(b) and θ_t(b). With u = (1-Λ)/(1-b), θ = bu/(1+bu) and 1-θ = 1/(1+bu);
/// u is evaluated through an expm1 form so b = 1 needs no special case.
inline KendallParams lambda_theta(double b, double t) {
  if (!(b >= 0.0) || !std::isfinite(b)) {
    throw DomainError("lambda_theta: b must be finite and >= 0");
  }
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("lambda_theta: t must be finite and >= 0");
  }
  const double x = (1.0 - b) * t;
  const double u = t * detail::one_minus_exp_over_x(x);
  const double bu = b * u;
  return KendallParams{std::exp(-x), bu / (1.0 + bu), 1.0 / (1.0 + bu), u};
}

/// Law of Y_1^{[b]}(t): one ancestor, birth rate b, death rate 1.
struct ModGeomParams {
  double b;
  double t;
  KendallParams k;

  ModGeomParams(double birth, double time)
      : b(birth), t(time), k(lambda_theta(birth, time)) {
    if (!(t > 0.0)) throw DomainError("ModGeomParams: t must be > 0");
  }

  /// P[Y = 0] = θ/b, written as (1-Λ)/(1-bΛ) = u/(1+bu) so b = 0 is defined.
  double p0() const { return k.u * k.one_minus_theta; }
};

// ---------------------------------------------------------------------------
// Materialized laws on Z+
// ---------------------------------------------------------------------------

/// A law on the integers stored on [offset, offset + weights.size()),
/// with certified information about the mass beyond the stored support.
struct Pmf {
  std::int64_t offset = 0;
  std::vector<double> weights;
  double tail_mass = 0.0;    // P(X > last())
  double tail_excess = 0.0;  // E[(X - last() - 1)^+], bounds Σ_{k>last} P(X>k)

  std::int64_t last() const {
    return offset + static_cast<std::int64_t>(weights.size()) - 1;
  }
  double mass(std::int64_t k) const {
    if (k < offset || k > last()) return 0.0;
    return weights[static_cast<std::size_t>(k - offset)];
  }
  double stored_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      m += weights[i] * static_cast<double>(offset + static_cast<std::int64_t>(i));
    }
    return m;
  }
};

/// Point mass at k.
inline Pmf dirac(std::int64_t k) {
  Pmf d;
  d.offset = k;
  d.weights = {1.0};
  return d;
}

namespace detail {

// Mass and excess beyond index K for a law whose pmf ratio π_{k+1}/π_k for
// k >= K is given by `ratio` and bounded above by rho_sup < 1.
template <class Ratio>
void certified_tail(double pi_K, std::int64_t K, Ratio&& ratio, double rho_sup,
                    double& tail_mass, double& tail_excess) {
  tail_mass = 0.0;
  tail_excess = 0.0;
  double term = pi_K;
  std::int64_t k = K;
  for (int step = 0; step < 100000; ++step) {
    term *= ratio(k);
    ++k;
    if (term == 0.0) return;
    tail_mass += term;
    tail_excess += static_cast<double>(k - K - 1) * term;
    if (term < 1e-18 * tail_mass) break;
  }
  // Geometric remainder beyond the last summed term.
  const double rem = term * rho_sup / (1.0 - rho_sup);
  const double m = static_cast<double>(k - K);
  tail_mass += rem;
  tail_excess += term * rho_sup * (m + rho_sup / (1.0 - rho_sup)) / (1.0 - rho_sup);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Negative binomial
// ---------------------------------------------------------------------------

inline double nb_log_pmf(const NegBinParams& nb, std::int64_t k) {
  if (k < 0) throw DomainError("nb_log_pmf: k must be >= 0");
  const double kd = static_cast<double>(k);
  return log_gamma(nb.r + kd) - log_gamma(nb.r) - log_gamma(kd + 1.0) +
         nb.r * std::log1p(-nb.p) + kd * std::log(nb.p);
}

inline double nb_pmf(const NegBinParams& nb, std::int64_t k) {
  return k < 0 ? 0.0 : std::exp(nb_log_pmf(nb, k));
}

struct Moments {
  double mean;
  double variance;
};

inline Moments nb_moments(const NegBinParams& nb) {
  return {nb.mean(), nb.variance()};
}

struct PmfMax {
  std::int64_t argmax;
  double value;
};

/// Exact maximum of the pmf; the smallest maximizer on ties.
inline PmfMax nb_pmf_max(const NegBinParams& nb) {
  std::int64_t k = 0;
  while (nb.p * (nb.r + static_cast<double>(k)) > static_cast<double>(k + 1)) ++k;
  return {k, nb_pmf(nb, k)};
}

/// Upper bound on sup_{k >= K} NB{k+1}/NB{k}; < 1 once K is past the mode.
inline double nb_ratio_sup(const NegBinParams& nb, std::int64_t K) {
  return std::max(nb.ratio(K), nb.p);
}

/// Truncation point K: at least ceil(mean + 12 sd) + 64, extended until the
/// certified mass beyond K is below 1e-13.
inline std::int64_t nb_truncation(const NegBinParams& nb) {
  const double sd = std::sqrt(nb.variance());
  auto K = static_cast<std::int64_t>(std::ceil(nb.mean() + 12.0 * sd)) + 64;
  for (;;) {
    const double rho = nb_ratio_sup(nb, K);
    if (rho < 1.0) {
      const double bound = nb_pmf(nb, K) * rho / (1.0 - rho);
      if (bound <= 1e-13) return K;
    }
    K += std::max<std::int64_t>(16, K / 8);
  }
}

/// NB{0..K}, anchored at the mode through log_gamma and extended outward
/// with the exact likelihood ratios.
inline std::vector<double> nb_pmf_table(const NegBinParams& nb, std::int64_t K) {
  if (K < 0) throw DomainError("nb_pmf_table: K must be >= 0");
  std::vector<double> pi(static_cast<std::size_t>(K + 1), 0.0);
  const std::int64_t mode = std::min(nb_pmf_max(nb).argmax, K);
  pi[static_cast<std::size_t>(mode)] = nb_pmf(nb, mode);
  for (std::int64_t k = mode; k < K; ++k) {
    pi[static_cast<std::size_t>(k + 1)] = pi[static_cast<std::size_t>(k)] * nb.ratio(k);
  }
  for (std::int64_t k = mode; k > 0; --k) {
    pi[static_cast<std::size_t>(k - 1)] = pi[static_cast<std::size_t>(k)] / nb.ratio(k - 1);
  }
  return pi;
}

inline double nb_cdf(const NegBinParams& nb, std::int64_t k) {
  if (k < 0) return 0.0;
  const auto pi = nb_pmf_table(nb, k);
  double s = 0.0;
  for (double v : pi) s += v;
  return std::min(s, 1.0);
}

inline Pmf nb_materialize(const NegBinParams& nb) {
  const std::int64_t K = nb_truncation(nb);
  Pmf out;
  out.weights = nb_pmf_table(nb, K);
  detail::certified_tail(
      out.weights.back(), K, [&](std::int64_t k) { return nb.ratio(k); },
      nb_ratio_sup(nb, K), out.tail_mass, out.tail_excess);
  return out;
}

struct MaxPmfBounds {
  std::optional<double> phillips;  // √((1-q)/(2erq)) K_r, only for r > 1/2
  std::optional<double> K_r;       // √r Γ(r-1/2)/Γ(r), only for r > 1/2
  double bound;                    // phillips, or the trivial bound 1
};

inline double k_r(double r) {
  if (!(r > 0.5)) throw DomainError("k_r: requires r > 1/2");
  return std::sqrt(r) * std::exp(log_gamma(r - 0.5) - log_gamma(r));
}

/// Bounds on P(r, q) = max_k NB(r, q){k} through the mixed-Poisson route.
inline MaxPmfBounds pmf_max_bounds(const NegBinParams& nb) {
  if (nb.r <= 0.5) return {std::nullopt, std::nullopt, 1.0};
  const double kr = k_r(nb.r);
  const double ph = std::sqrt((1.0 - nb.p) / (2.0 * M_E * nb.r * nb.p)) * kr;
  return {ph, kr, ph};
}

/// max_k Po(λ){k} <= 1/√(2eλ).
inline double poisson_max_pmf_bound(double lambda) {
  if (!(lambda > 0.0)) throw DomainError("poisson_max_pmf_bound: λ must be > 0");
  return 1.0 / std::sqrt(2.0 * M_E * lambda);
}

// ---------------------------------------------------------------------------
// Poisson
// ---------------------------------------------------------------------------

inline double poisson_log_pmf(double lambda, std::int64_t k) {
  if (k < 0) throw DomainError("poisson_log_pmf: k must be >= 0");
  if (!(lambda > 0.0)) throw DomainError("poisson_log_pmf: λ must be > 0");
  const double kd = static_cast<double>(k);
  return kd * std::log(lambda) - lambda - log_gamma(kd + 1.0);
}

inline Pmf poisson_materialize(double lambda) {
  if (!(lambda > 0.0)) throw DomainError("poisson_materialize: λ must be > 0");
  auto ratio = [lambda](std::int64_t k) { return lambda / static_cast<double>(k + 1); };
  auto K = static_cast<std::int64_t>(std::ceil(lambda + 12.0 * std::sqrt(lambda))) + 64;
  while (std::exp(poisson_log_pmf(lambda, K)) * ratio(K) / (1.0 - ratio(K)) > 1e-13) {
    K += std::max<std::int64_t>(16, K / 8);
  }
  const auto mode = static_cast<std::int64_t>(std::floor(lambda));
  Pmf out;
  out.weights.assign(static_cast<std::size_t>(K + 1), 0.0);
  out.weights[static_cast<std::size_t>(mode)] = std::exp(poisson_log_pmf(lambda, mode));
  for (std::int64_t k = mode; k < K; ++k) {
    out.weights[static_cast<std::size_t>(k + 1)] = out.weights[static_cast<std::size_t>(k)] * ratio(k);
  }
  for (std::int64_t k = mode; k > 0; --k) {
    out.weights[static_cast<std::size_t>(k - 1)] = out.weights[static_cast<std::size_t>(k)] / ratio(k - 1);
  }
  detail::certified_tail(out.weights.back(), K, ratio, ratio(K), out.tail_mass,
                         out.tail_excess);
  return out;
}

// ---------------------------------------------------------------------------
// Modified geometric law of Y_1^{[b]}(t)
// ---------------------------------------------------------------------------

inline double modgeom_pmf(const ModGeomParams& mg, std::int64_t k) {
  if (k < 0) throw DomainError("modgeom_pmf: k must be >= 0");
  if (k == 0) return mg.p0();
  const double omt = mg.k.one_minus_theta;
  return mg.k.lambda * omt * omt * std::pow(mg.k.theta, static_cast<double>(k - 1));
}

struct RawMoments {
  double m1;
  double m2;
};

/// First two raw moments: Λ and Λ(1+b-2bΛ)/(1-b), written as Λ(1 + 2bu),
/// which is 1 + 2t at b = 1.
inline RawMoments modgeom_moments(const ModGeomParams& mg) {
  const double lam = mg.k.lambda;
  return {lam, lam * (1.0 + 2.0 * mg.b * mg.k.u)};
}

inline Pmf modgeom_materialize(const ModGeomParams& mg) {
  const double theta = mg.k.theta;
  std::int64_t K = 1;
  if (theta > 0.0) {
    K = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(std::log(1e-17) / std::log(theta))) + 1);
  }
  Pmf out;
  out.weights.resize(static_cast<std::size_t>(K + 1));
  for (std::int64_t k = 0; k <= K; ++k) {
    out.weights[static_cast<std::size_t>(k)] = modgeom_pmf(mg, k);
  }
  const double th_K = std::pow(theta, static_cast<double>(K));
  out.tail_mass = mg.k.lambda * mg.k.one_minus_theta * th_K;
  out.tail_excess = mg.k.lambda * th_K * theta;
  return out;
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

/// Gamma(shape, scale) by the Marsaglia-Tsang squeeze; shape < 1 is boosted
/// through Gamma(shape + 1) * U^{1/shape}.
inline double gamma_sample(RngStream& rng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw DomainError("gamma_sample: shape and scale must be > 0");
  }
  if (shape < 1.0) {
    const double g = gamma_sample(rng, shape + 1.0, scale);
    return g * std::pow(rng.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

/// Poisson(mean): sequential inversion below 10, Hörmann's PTRS above.
inline std::int64_t poisson_sample(RngStream& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("poisson_sample: mean must be finite and >= 0");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    const auto cap = static_cast<std::int64_t>(mean) + 200;
    while (u > cdf && k < cap) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double U = rng.uniform() - 0.5;
    const double V = rng.uniform();
    const double us = 0.5 - std::abs(U);
    const double k = std::floor((2.0 * a / us + b) * U + mean + 0.43);
    if (us >= 0.07 && V <= vr) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && V > us)) continue;
    if (std::log(V) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - log_gamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

/// NB(r, p) as a Gamma(r, scale p/(1-p)) mixed Poisson.
inline std::int64_t nb_sample(const NegBinParams& nb, RngStream& rng) {
  return poisson_sample(rng, gamma_sample(rng, nb.r, nb.p / (1.0 - nb.p)));
}

/// Zero with probability 1 - Λ(1-θ), otherwise 1 + Geometric(θ) on {0,1,...}.
inline std::int64_t modgeom_sample(const ModGeomParams& mg, RngStream& rng) {
  if (rng.uniform() < mg.p0()) return 0;
  const double theta = mg.k.theta;
  if (theta <= 0.0) return 1;
  const double g = std::floor(std::log(rng.uniform()) / std::log(theta));
  return 1 + static_cast<std::int64_t>(std::min(g, 9.0e15));
}

}  // namespace nbstein
