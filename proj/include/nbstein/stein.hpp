#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nbstein/distributions.hpp"
#include "nbstein/errors.hpp"
#include "nbstein/numerics.hpp"

namespace nbstein {

// ---------------------------------------------------------------------------
// Lipschitz test functions
// ---------------------------------------------------------------------------

/// A member of F_W = {f : |f(x) - f(y)| <= |x - y|}: f(0), the increments
/// f(k+1) - f(k) for k < N_f, and a linear tail beyond N_f.
class LipschitzFn {
 public:
  LipschitzFn(double f0, std::vector<double> increments, double tail_slope)
      : increments_(std::move(increments)), tail_slope_(tail_slope) {
    if (!std::isfinite(f0)) throw DomainError("LipschitzFn: f0 must be finite");
    if (!(std::abs(tail_slope_) <= 1.0)) {
      throw DomainError("LipschitzFn: |tail_slope| must be <= 1");
    }
    values_.reserve(increments_.size() + 1);
    values_.push_back(f0);
    for (double d : increments_) {
      if (!(std::abs(d) <= 1.0)) {
        throw DomainError("LipschitzFn: increments must lie in [-1, 1]");
      }
      values_.push_back(values_.back() + d);
    }
  }

  static LipschitzFn linear(double f0, double slope) { return {f0, {}, slope}; }
  static LipschitzFn constant(double c) { return {c, {}, 0.0}; }

  double operator()(std::int64_t k) const {
    if (k < 0) throw DomainError("LipschitzFn: argument must be >= 0");
    const auto n = static_cast<std::int64_t>(increments_.size());
    if (k <= n) return values_[static_cast<std::size_t>(k)];
    return values_.back() + tail_slope_ * static_cast<double>(k - n);
  }

  /// f(k+1) - f(k).
  double increment(std::int64_t k) const {
    if (k < static_cast<std::int64_t>(increments_.size())) {
      return increments_[static_cast<std::size_t>(k)];
    }
    return tail_slope_;
  }

  std::int64_t n_f() const { return static_cast<std::int64_t>(increments_.size()); }
  double f0() const { return values_.front(); }
  double tail_slope() const { return tail_slope_; }
  const std::vector<double>& increments() const { return increments_; }

 private:
  std::vector<double> increments_;
  double tail_slope_;
  std::vector<double> values_;  // f(0..N_f)
};

/// alpha f + beta h; must stay in F_W.
inline LipschitzFn combine(double alpha, const LipschitzFn& f, double beta,
                           const LipschitzFn& h) {
  const std::int64_t n = std::max(f.n_f(), h.n_f());
  std::vector<double> inc(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    inc[static_cast<std::size_t>(k)] = alpha * f.increment(k) + beta * h.increment(k);
  }
  return {alpha * f.f0() + beta * h.f0(), std::move(inc),
          alpha * f.tail_slope() + beta * h.tail_slope()};
}

/// f_i(j) = -|j - i|, the maximizer of Δg_f(i).
inline LipschitzFn extremal_f(std::int64_t i) {
  if (i < 0) throw DomainError("extremal_f: i must be >= 0");
  return {-static_cast<double>(i), std::vector<double>(static_cast<std::size_t>(i), 1.0),
          -1.0};
}

/// NB(r,p){f} = E f(Z). The linear tail of f is summed in closed form from the
/// tail mass P(Z > N_f) and tail moment E[Z; Z > N_f].
inline double nb_expectation_lipschitz(const LipschitzFn& f, const NegBinParams& nb) {
  const std::int64_t n = f.n_f();
  const auto pi = nb_pmf_table(nb, n);
  double head = 0.0;
  double mass = 0.0;
  double moment = 0.0;
  for (std::int64_t k = 0; k <= n; ++k) {
    const double w = pi[static_cast<std::size_t>(k)];
    head += w * f(k);
    mass += w;
    moment += w * static_cast<double>(k);
  }
  const double q = std::max(0.0, 1.0 - mass);
  const double m = std::max(0.0, nb.mean() - moment);
  return head + f(n) * q + f.tail_slope() * (m - static_cast<double>(n) * q);
}

// ---------------------------------------------------------------------------
// Stein equation p(r+i) g(i+1) - i g(i) = f(i) - NB(r,p){f}
// ---------------------------------------------------------------------------

struct SteinSolution {
  NegBinParams params;
  std::vector<double> g;  // g[0..N+1]; g[0] := g[1] by convention
  std::int64_t N = 0;
  double mu_f = 0.0;
  double residual_max = 0.0;
  double tail_note = 0.0;  // bound on the influence of the truncated tail sums
  double scale = 1.0;      // max(1, max_{i<=N} |f(i) - mu_f|)
};

/// Residual tolerance relative to SteinSolution::scale.
inline constexpr double kSteinResidualTol = 1e-10;

inline double stein_residual(const SteinSolution& sol, const LipschitzFn& f) {
  const double p = sol.params.p;
  const double r = sol.params.r;
  double worst = 0.0;
  for (std::int64_t i = 0; i <= sol.N; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double lhs = p * (r + static_cast<double>(i)) * sol.g[ui + 1] -
                       static_cast<double>(i) * sol.g[ui];
    worst = std::max(worst, std::abs(lhs - (f(i) - sol.mu_f)));
  }
  return worst;
}

/// Solves the Stein equation on 0..N through
///   g(j+1) = Σ_{k<=j} π_k (f(k) - μ_f) / (p (r+j) π_j)
///          = -Σ_{k>j} π_k (f(k) - μ_f) / (p (r+j) π_j).
/// Both sums are accumulated with exact pmf ratios; for each j the form with
/// the smaller absolute sum (the smaller rounding scale) is used.
inline SteinSolution solve_stein(const LipschitzFn& f, const NegBinParams& nb,
                                 std::int64_t N) {
  if (N < 1) throw DomainError("solve_stein: N must be >= 1");
  const double p = nb.p;
  const double r = nb.r;
  const double mu = nb_expectation_lipschitz(f, nb);

  double scale = 1.0;
  for (std::int64_t i = 0; i <= N; ++i) scale = std::max(scale, std::abs(f(i) - mu));

  // Extend the tail sums to K so the neglected part Σ_{k>K} π_k |d_k| is
  // negligible relative to min_{j<=N} π_j.
  const double log_pi_min = std::min(nb_log_pmf(nb, 0), nb_log_pmf(nb, N));
  std::int64_t K = N + 1;
  double neglected = 0.0;
  for (;; ++K) {
    const double rho = nb_ratio_sup(nb, K);
    if (rho < 1.0) {
      const double dK = std::abs(f(K) - mu);
      const double factor = dK * rho / (1.0 - rho) + rho / ((1.0 - rho) * (1.0 - rho));
      neglected = std::exp(nb_log_pmf(nb, K) - log_pi_min) * factor;
      if (neglected <= 1e-17 * scale) break;
    }
    if (K > N + 1000000) {
      throw AccuracyError("solve_stein: tail sums did not converge", 0.0);
    }
  }

  const auto size = static_cast<std::size_t>(K + 1);
  std::vector<double> d(size);
  for (std::int64_t k = 0; k <= K; ++k) d[static_cast<std::size_t>(k)] = f(k) - mu;

  std::vector<double> head(size), head_abs(size), tail(size), tail_abs(size);
  head[0] = d[0];
  head_abs[0] = std::abs(d[0]);
  for (std::size_t j = 1; j < size; ++j) {
    const double back = 1.0 / nb.ratio(static_cast<std::int64_t>(j) - 1);  // π_{j-1}/π_j
    head[j] = d[j] + back * head[j - 1];
    head_abs[j] = std::abs(d[j]) + back * head_abs[j - 1];
  }
  tail[size - 1] = 0.0;
  tail_abs[size - 1] = 0.0;
  for (std::size_t j = size - 1; j-- > 0;) {
    const double fwd = nb.ratio(static_cast<std::int64_t>(j));  // π_{j+1}/π_j
    tail[j] = fwd * (d[j + 1] + tail[j + 1]);
    tail_abs[j] = fwd * (std::abs(d[j + 1]) + tail_abs[j + 1]);
  }

  SteinSolution sol{nb, std::vector<double>(static_cast<std::size_t>(N + 2)), N, mu,
                    0.0, 0.0, scale};
  for (std::int64_t j = 0; j <= N; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const double s = head_abs[uj] <= tail_abs[uj] ? head[uj] : -tail[uj];
    sol.g[uj + 1] = s / (p * (r + static_cast<double>(j)));
  }
  sol.g[0] = sol.g[1];
  sol.tail_note = neglected / (p * r);
  sol.residual_max = stein_residual(sol, f);
  if (!(sol.residual_max <= kSteinResidualTol * scale)) {
    throw AccuracyError("solve_stein: residual " + std::to_string(sol.residual_max) +
                            " exceeds certification threshold",
                        sol.residual_max);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// r0 and the Theorem 1.1 bounds
// ---------------------------------------------------------------------------

/// Right-hand side of Γ(r - 1/2)/Γ(r) = 3√(2e)/8.
inline double r0_target() { return 3.0 * std::sqrt(2.0 * M_E) / 8.0; }

inline double gamma_ratio_half(double r) {
  return std::exp(log_gamma(r - 0.5) - log_gamma(r));
}

/// Bracket of width <= tol around r0 on [1, 4], where r ↦ Γ(r-1/2)/Γ(r) is
/// strictly decreasing.
inline Bracket r0_bracket(double tol) {
  return bisect([](double r) { return gamma_ratio_half(r) - r0_target(); }, 1.0, 4.0,
                tol);
}

inline double compute_r0(double tol = 1e-12) { return r0_bracket(tol).midpoint(); }

struct Theorem1Bound {
  double G1_bound;
  std::array<double, 3> components;  // 2/(1-p), (1+p)/(1-p)^2, √(r0/(rp(1-p)^3))
  double G2_bound;
};

inline Theorem1Bound theorem1_bound(const NegBinParams& nb, double r0) {
  if (!(r0 > 0.5)) throw DomainError("theorem1_bound: r0 must exceed 1/2");
  const double p = nb.p;
  const double q = 1.0 - p;
  const std::array<double, 3> c = {2.0 / q, (1.0 + p) / (q * q),
                                   std::sqrt(r0 / (nb.r * p * q * q * q))};
  return {1.0 / q, c, std::min({c[0], c[1], c[2]})};
}

// ---------------------------------------------------------------------------
// Measured Stein factors
// ---------------------------------------------------------------------------

struct SteinFactorReport {
  double G1_measured = 0.0;
  double G2_measured = 0.0;
  double G1_bound = 0.0;
  std::array<double, 3> G2_bound_components{};
  double G2_bound = 0.0;
  std::int64_t argmax_i = 0;
  std::int64_t i_max = 0;
  std::int64_t N = 0;
  double delta_at_i_max = 0.0;  // Δg_{f_i}(i) at the end of the sweep
  double residual_max = 0.0;    // worst residual over all solves
  double worst_scaled_residual = 0.0;
};

/// Minimum gap between the truncation N and the sweep end i_max.
inline constexpr std::int64_t kFactorMargin = 50;

inline std::int64_t default_i_max(const NegBinParams& nb) {
  const auto sweep = nb_pmf_max(nb).argmax +
                     static_cast<std::int64_t>(std::ceil(10.0 * std::sqrt(nb.variance())));
  return std::max<std::int64_t>(1, sweep);
}

inline std::int64_t default_truncation(const NegBinParams& nb, std::int64_t i_max) {
  const auto base = static_cast<std::int64_t>(
                        std::ceil(nb.mean() + 12.0 * std::sqrt(nb.variance()))) +
                    64;
  return std::max(base, i_max + kFactorMargin);
}

/// G1 from f(x) = -x; G2 as max_{i <= i_max} Δg_{f_i}(i) with f_i(j) = -|j - i|.
/// Δg(0) = 0 through the g(0) := g(1) convention.
inline SteinFactorReport measure_factors(const NegBinParams& nb, std::int64_t N,
                                         std::int64_t i_max, double r0) {
  if (i_max < 1) throw DomainError("measure_factors: i_max must be >= 1");
  if (N < i_max + kFactorMargin) {
    throw AccuracyError("measure_factors: truncation N=" + std::to_string(N) +
                            " not certified for i_max=" + std::to_string(i_max),
                        0.0);
  }
  SteinFactorReport rep;
  rep.N = N;
  rep.i_max = i_max;
  const auto track = [&rep](const SteinSolution& s) {
    rep.residual_max = std::max(rep.residual_max, s.residual_max);
    rep.worst_scaled_residual =
        std::max(rep.worst_scaled_residual, s.residual_max / s.scale);
  };

  const SteinSolution lin = solve_stein(extremal_f(0), nb, N);
  track(lin);
  rep.G1_measured = *std::max_element(lin.g.begin() + 1, lin.g.end());

  rep.G2_measured = 0.0;  // Δg_{f_0}(0) = 0
  rep.argmax_i = 0;
  for (std::int64_t i = 1; i <= i_max; ++i) {
    const SteinSolution s = solve_stein(extremal_f(i), nb, N);
    track(s);
    const auto ui = static_cast<std::size_t>(i);
    const double delta = s.g[ui + 1] - s.g[ui];
    if (delta > rep.G2_measured) {
      rep.G2_measured = delta;
      rep.argmax_i = i;
    }
    if (i == i_max) rep.delta_at_i_max = delta;
  }

  const Theorem1Bound b = theorem1_bound(nb, r0);
  rep.G1_bound = b.G1_bound;
  rep.G2_bound_components = b.components;
  rep.G2_bound = b.G2_bound;
  return rep;
}

inline SteinFactorReport measure_factors(const NegBinParams& nb, double r0) {
  const std::int64_t i_max = default_i_max(nb);
  return measure_factors(nb, default_truncation(nb, i_max), i_max, r0);
}

}  // namespace nbstein
