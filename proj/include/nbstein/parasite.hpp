#pragma once

// Parasite burden model: a host of age T ingests larvae at rate a_s; each
// larva founds an independent birth-death line (birth b < 1, death 1) and W
// is the total burden at time T.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "nbstein/distributions.hpp"
#include "nbstein/errors.hpp"
#include "nbstein/ibd.hpp"
#include "nbstein/metrics.hpp"
#include "nbstein/monte_carlo.hpp"
#include "nbstein/numerics.hpp"
#include "nbstein/rng.hpp"

namespace nbstein {

// ---------------------------------------------------------------------------
// Ingestion rates
// ---------------------------------------------------------------------------

struct ConstantRate {
  double abar;
};

/// base (1 + amplitude_fraction sin(2πs/period + phase))
struct SinusoidRate {
  double base;
  double amplitude_fraction;
  double period;
  double phase = 0.0;
};

/// levels[i] on [breakpoints[i-1], breakpoints[i]); levels.size() == breakpoints.size() + 1.
struct PiecewiseRate {
  std::vector<double> breakpoints;
  std::vector<double> levels;
};

/// Linear interpolation through (knots, values), clamped outside the knots.
struct TableRate {
  std::vector<double> knots;
  std::vector<double> values;
};

using IngestionRate = std::variant<ConstantRate, SinusoidRate, PiecewiseRate, TableRate>;

inline void validate_rate(const IngestionRate& rate) {
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ConstantRate>) {
          if (!nonneg(r.abar)) throw DomainError("constant rate must be finite and >= 0");
        } else if constexpr (std::is_same_v<R, SinusoidRate>) {
          if (!nonneg(r.base)) throw DomainError("sinusoid base must be finite and >= 0");
          if (!(std::abs(r.amplitude_fraction) <= 1.0)) {
            throw DomainError("sinusoid requires |amplitude_fraction| <= 1");
          }
          if (!(r.period > 0.0) || !std::isfinite(r.period)) {
            throw DomainError("sinusoid period must be finite and > 0");
          }
          if (!std::isfinite(r.phase)) throw DomainError("sinusoid phase must be finite");
        } else if constexpr (std::is_same_v<R, PiecewiseRate>) {
          if (r.levels.size() != r.breakpoints.size() + 1) {
            throw DomainError("piecewise rate needs one more level than breakpoints");
          }
          for (double v : r.levels) {
            if (!nonneg(v)) throw DomainError("piecewise levels must be finite and >= 0");
          }
          for (std::size_t i = 0; i < r.breakpoints.size(); ++i) {
            if (!std::isfinite(r.breakpoints[i]) ||
                (i > 0 && !(r.breakpoints[i] > r.breakpoints[i - 1]))) {
              throw DomainError("piecewise breakpoints must be finite and increasing");
            }
          }
        } else {
          if (r.knots.empty() || r.knots.size() != r.values.size()) {
            throw DomainError("table rate needs matching, nonempty knots and values");
          }
          for (std::size_t i = 0; i < r.knots.size(); ++i) {
            if (!std::isfinite(r.knots[i]) || (i > 0 && !(r.knots[i] > r.knots[i - 1]))) {
              throw DomainError("table knots must be finite and increasing");
            }
            if (!nonneg(r.values[i])) throw DomainError("table values must be finite and >= 0");
          }
        }
      },
      rate);
}

namespace detail {

inline double rate_value(const IngestionRate& rate, double s) {
  return std::visit(
      [s](const auto& r) -> double {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ConstantRate>) {
          return r.abar;
        } else if constexpr (std::is_same_v<R, SinusoidRate>) {
          const double v = r.base * (1.0 + r.amplitude_fraction *
                                               std::sin(2.0 * std::numbers::pi * s / r.period +
                                                        r.phase));
          return std::max(0.0, v);
        } else if constexpr (std::is_same_v<R, PiecewiseRate>) {
          const auto it = std::upper_bound(r.breakpoints.begin(), r.breakpoints.end(), s);
          return r.levels[static_cast<std::size_t>(it - r.breakpoints.begin())];
        } else {
          if (s <= r.knots.front()) return r.values.front();
          if (s >= r.knots.back()) return r.values.back();
          const auto it = std::upper_bound(r.knots.begin(), r.knots.end(), s);
          const std::size_t i = static_cast<std::size_t>(it - r.knots.begin());
          const double w = (s - r.knots[i - 1]) / (r.knots[i] - r.knots[i - 1]);
          return r.values[i - 1] + w * (r.values[i] - r.values[i - 1]);
        }
      },
      rate);
}

}  // namespace detail

/// a_s for s in [0, T].
inline double rate_eval(const IngestionRate& rate, double s, double T) {
  if (!(s >= 0.0 && s <= T)) {
    throw DomainError("rate_eval: s=" + std::to_string(s) + " outside [0, T]");
  }
  return detail::rate_value(rate, s);
}

/// sup of a_s over the horizon (over all s for the bounded variants).
inline double rate_max(const IngestionRate& rate) {
  return std::visit(
      [](const auto& r) -> double {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ConstantRate>) {
          return r.abar;
        } else if constexpr (std::is_same_v<R, SinusoidRate>) {
          return r.base * (1.0 + std::abs(r.amplitude_fraction));
        } else if constexpr (std::is_same_v<R, PiecewiseRate>) {
          return *std::max_element(r.levels.begin(), r.levels.end());
        } else {
          return *std::max_element(r.values.begin(), r.values.end());
        }
      },
      rate);
}

/// Points of (0, T) where a_s has a jump or a kink.
inline std::vector<double> rate_breaks(const IngestionRate& rate, double T) {
  std::vector<double> out;
  auto take = [&](const std::vector<double>& pts) {
    for (double x : pts) {
      if (x > 0.0 && x < T) out.push_back(x);
    }
  };
  if (const auto* p = std::get_if<PiecewiseRate>(&rate)) take(p->breakpoints);
  if (const auto* p = std::get_if<TableRate>(&rate)) take(p->knots);
  return out;
}

// ---------------------------------------------------------------------------
// Scenario and exposure functionals
// ---------------------------------------------------------------------------

struct ScenarioParams {
  IngestionRate rate = ConstantRate{1.0};
  double abar = 1.0;
  double b = 0.5;
  double T = 1.0;

  void validate() const {
    if (!(abar > 0.0) || !std::isfinite(abar)) throw DomainError("scenario: abar must be > 0");
    if (!(b > 0.0 && b < 1.0)) throw DomainError("scenario: b must lie in (0, 1)");
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("scenario: T must be finite and > 0");
    validate_rate(rate);
  }
};

struct ExposureSummary {
  double A_T = 0.0;
  double A_star = 0.0;
  double R_T = 0.0;
  double R_a_star = 0.0;
  double theta_T = 0.0;
  double mu_T = 0.0;
  double b = 0.0;
  // (t, A_t) at every point used for A_star: the grid plus refined extrema.
  std::vector<double> grid_t;
  std::vector<double> grid_A;
};

inline constexpr std::size_t kExposureGridPoints = 1024;

/// A_t = ∫_0^t (a_{T-s} - ā) e^{-(1-b)s} ds, R_T, μ_T and A_T* = sup |A_t|.
/// A_t is accumulated panel by panel on a uniform grid that also contains
/// every rate break; its extrema sit where a_{T-t} - ā changes sign, and
/// those points are located by bisection and added.
inline ExposureSummary compute_exposure(const ScenarioParams& sc,
                                        const QuadratureSpec& spec = {}) {
  sc.validate();
  const double T = sc.T;
  const double c = 1.0 - sc.b;
  const IngestionRate& rate = sc.rate;
  auto a_back = [&](double t) { return detail::rate_value(rate, T - t); };
  auto dA = [&](double t) { return (a_back(t) - sc.abar) * std::exp(-c * t); };

  std::vector<double> grid;
  grid.reserve(kExposureGridPoints + 16);
  for (std::size_t i = 0; i <= kExposureGridPoints; ++i) {
    grid.push_back(T * static_cast<double>(i) / static_cast<double>(kExposureGridPoints));
  }
  for (double x : rate_breaks(rate, T)) grid.push_back(T - x);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.back() = T;

  auto piece = [&](double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    return integrate_pieces(dA, {lo, hi}, spec).value;
  };

  ExposureSummary out;
  out.b = sc.b;
  out.grid_t.push_back(0.0);
  out.grid_A.push_back(0.0);
  double A = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double lo = grid[i];
    const double hi = grid[i + 1];
    // Sign changes of the derivative inside the open panel; the rate is
    // continuous there because breaks are grid points.
    const double shrink = 1e-12 * (hi - lo);
    const std::array<double, 3> probe = {lo + shrink, 0.5 * (lo + hi), hi - shrink};
    std::vector<double> roots;
    for (std::size_t k = 0; k + 1 < probe.size(); ++k) {
      const double g0 = a_back(probe[k]) - sc.abar;
      const double g1 = a_back(probe[k + 1]) - sc.abar;
      if ((g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0)) {
        const Bracket br = bisect([&](double t) { return a_back(t) - sc.abar; }, probe[k],
                                  probe[k + 1], 1e-14 * std::max(1.0, T));
        roots.push_back(br.midpoint());
      }
    }
    double prev = lo;
    double A_prev = A;
    for (double x : roots) {
      const double Ax = A_prev + piece(prev, x);
      out.grid_t.push_back(x);
      out.grid_A.push_back(Ax);
      prev = x;
      A_prev = Ax;
    }
    A = A_prev + piece(prev, hi);
    out.grid_t.push_back(hi);
    out.grid_A.push_back(A);
  }
  out.A_T = A;
  for (double v : out.grid_A) out.A_star = std::max(out.A_star, std::abs(v));

  // Independent quadratures for R_T and μ_T, over s in [0, T] with a_s direct.
  std::vector<double> breaks{0.0};
  for (double x : rate_breaks(rate, T)) breaks.push_back(x);
  breaks.push_back(T);
  const double exposure =
      integrate_pieces([&](double s) { return detail::rate_value(rate, s) * std::exp(-c * (T - s)); },
                       breaks, spec)
          .value;
  const KendallParams k = lambda_theta(sc.b, T);
  // (1-b)/(b(1-e^{-(1-b)T})) = 1/(b u_T)
  out.R_T = exposure / (sc.b * k.u);
  out.R_a_star = sc.abar / sc.b;
  out.theta_T = k.theta;
  out.mu_T =
      integrate_pieces([&](double s) { return detail::rate_value(rate, s) * std::exp(-(T - s)); },
                       breaks, spec)
          .value;
  return out;
}

// ---------------------------------------------------------------------------
// Wasserstein bound for a single host
// ---------------------------------------------------------------------------

struct BoundReport {
  double bound_total = 0.0;
  double term_A = 0.0;
  double term_main = 0.0;
  double delta_g_factor = 0.0;
  double delta_g_c1 = 0.0;  // 2/(1-θ)
  double delta_g_c2 = 0.0;  // 3/(2√(R* θ (1-θ)^3))
  double log_factor = 0.0;
  double constant = 16.0;
};

/// |A_T| + 16 θ A* (1 + ln(1/(1-θ))) min{2/(1-θ), 3/(2√(R* θ (1-θ)^3))}
inline BoundReport theorem31_bound(const ExposureSummary& s) {
  const double th = s.theta_T;
  if (!(th > 0.0 && th < 1.0)) throw DomainError("theorem31_bound: theta_T must lie in (0, 1)");
  if (!(s.R_a_star > 0.0)) throw DomainError("theorem31_bound: R_a_star must be > 0");
  BoundReport rep;
  const double om = 1.0 - th;
  rep.log_factor = 1.0 - std::log1p(-th);
  rep.delta_g_c1 = 2.0 / om;
  rep.delta_g_c2 = 3.0 / (2.0 * std::sqrt(s.R_a_star * th * om * om * om));
  rep.delta_g_factor = std::min(rep.delta_g_c1, rep.delta_g_c2);
  rep.term_A = std::abs(s.A_T);
  rep.term_main = rep.constant * th * s.A_star * rep.log_factor * rep.delta_g_factor;
  rep.bound_total = rep.term_A + rep.term_main;
  return rep;
}

// ---------------------------------------------------------------------------
// Exact sampling of W
// ---------------------------------------------------------------------------

/// Ingestion times are a Poisson process of intensity a_max on [0, T] thinned
/// by a_s / a_max; a larva ingested at τ contributes Y_1^{[b]}(T - τ).
inline std::int64_t sample_W(const ScenarioParams& sc, RngStream& rng) {
  const double a_max = rate_max(sc.rate);
  if (!std::isfinite(a_max)) throw DomainError("sample_W: unbounded rate");
  if (a_max <= 0.0) return 0;
  std::int64_t w = 0;
  double tau = 0.0;
  for (;;) {
    tau += rng.exponential(a_max);
    if (tau >= sc.T) return w;
    const double u = rng.uniform() * a_max;
    if (u < detail::rate_value(sc.rate, tau)) {
      w += modgeom_sample(ModGeomParams(sc.b, sc.T - tau), rng);
    }
  }
}

inline EmpiricalDist sample_W_many(const ScenarioParams& sc, std::uint64_t n,
                                   const RngStream& base, unsigned workers = 1) {
  sc.validate();
  return replicate(n, base, workers, [&](RngStream& rng) { return sample_W(sc, rng); });
}

// ---------------------------------------------------------------------------
// Monte Carlo validation
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kMinValidationSamples = 10'000;
inline constexpr int kBootstrapResamples = 50;

struct ValidationReport {
  double empirical_dW = 0.0;
  double bound = 0.0;
  double mc_halfwidth = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  ExposureSummary exposure;
  BoundReport bound_report;
};

/// Bootstrap scale of d_W(F_n, law): the largest d_W(F*_b, F_n) over the
/// resamples. Resample b draws from base.substream(offset + b).
inline double bootstrap_halfwidth(const EmpiricalDist& sample, const RngStream& base,
                                  std::uint64_t offset, int resamples = kBootstrapResamples) {
  const Pmf centre = sample.to_pmf();
  std::vector<std::int64_t> values;
  values.reserve(sample.n());
  for (const auto& [v, c] : sample.counts()) values.insert(values.end(), c, v);
  const double inv_n = 1.0 / static_cast<double>(values.size());
  std::vector<std::uint64_t> counts(centre.weights.size());
  Pmf star;
  star.offset = centre.offset;
  star.weights.resize(counts.size());
  double worst = 0.0;
  for (int b = 0; b < resamples; ++b) {
    RngStream rng = base.substream(offset + static_cast<std::uint64_t>(b));
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::int64_t v = values[static_cast<std::size_t>(rng.uniform_int(values.size()))];
      ++counts[static_cast<std::size_t>(v - centre.offset)];
    }
    for (std::size_t k = 0; k < counts.size(); ++k) {
      star.weights[k] = static_cast<double>(counts[k]) * inv_n;
    }
    worst = std::max(worst, wasserstein_pmf(star, centre).value);
  }
  return worst;
}

/// n exact draws of W against NB(R_a*, θ_T). Replicates use base.substream(i)
/// for i < n and the bootstrap uses the streams after them.
inline ValidationReport validate_scenario(const ScenarioParams& sc, std::uint64_t n,
                                          const RngStream& base, unsigned workers = 1,
                                          const QuadratureSpec& spec = {}) {
  if (n < kMinValidationSamples) {
    throw PrecisionError("validate_scenario: need n >= 10000, got " + std::to_string(n));
  }
  ValidationReport rep;
  rep.seed = base.seed();
  rep.n = n;
  rep.exposure = compute_exposure(sc, spec);
  rep.bound_report = theorem31_bound(rep.exposure);
  rep.bound = rep.bound_report.bound_total;
  const EmpiricalDist sample = sample_W_many(sc, n, base, workers);
  const Pmf target = nb_materialize(NegBinParams(rep.exposure.R_a_star, rep.exposure.theta_T));
  rep.empirical_dW = wasserstein_empirical(sample, target).value;
  rep.mc_halfwidth = bootstrap_halfwidth(sample, base, n);
  rep.pass = rep.empirical_dW <= rep.bound + rep.mc_halfwidth;
  return rep;
}

/// d_W(NB(R_T, θ_T), NB(R_a*, θ_T)) next to (θ/(1-θ))|R_T - R_a*| and |A_T|.
struct NbShiftCheck {
  double dW = 0.0;
  double dW_error_bar = 0.0;
  double rhs = 0.0;
  double abs_A_T = 0.0;
};

inline NbShiftCheck nb_shift_check(const ExposureSummary& s) {
  const Distance d = wasserstein_pmf(nb_materialize(NegBinParams(s.R_T, s.theta_T)),
                                     nb_materialize(NegBinParams(s.R_a_star, s.theta_T)));
  return {d.value, d.error_bar, s.theta_T / (1.0 - s.theta_T) * std::abs(s.R_T - s.R_a_star),
          std::abs(s.A_T)};
}

// ---------------------------------------------------------------------------
// Several hosts
// ---------------------------------------------------------------------------

/// 24 (1 + ln(1/(1-θ))) √θ / ((1-θ)^{3/2} √(n R̄)) Σ_i A*_i, valid when n R̄ > r0.
inline double aggregate_bound(std::span<const ExposureSummary> hosts, std::size_t n_hosts,
                              double r0) {
  if (hosts.empty() || hosts.size() != n_hosts) {
    throw DomainError("aggregate_bound: n_hosts must equal the number of summaries");
  }
  const double th = hosts.front().theta_T;
  const double b = hosts.front().b;
  if (!(th > 0.0 && th < 1.0)) throw DomainError("aggregate_bound: theta_T must lie in (0, 1)");
  double sum_R = 0.0;
  double sum_A = 0.0;
  for (const auto& h : hosts) {
    if (std::abs(h.theta_T - th) > 1e-14 * th || h.b != b) {
      throw DomainError("aggregate_bound: hosts must share theta_T and b");
    }
    sum_R += h.R_T;
    sum_A += h.A_star;
  }
  const double nR = sum_R;  // n R̄
  if (!(nR > r0)) {
    throw PreconditionError("aggregate_bound: n*Rbar=" + std::to_string(nR) +
                            " does not exceed r0=" + std::to_string(r0));
  }
  const double om = 1.0 - th;
  return 24.0 * (1.0 - std::log1p(-th)) * std::sqrt(th) / (om * std::sqrt(om) * std::sqrt(nR)) *
         sum_A;
}

// ---------------------------------------------------------------------------
// Constant K_1: Σ_{j>=2} (j-1) ∫_0^{θ_T} |f_j'(θ)| dθ
// ---------------------------------------------------------------------------

/// f_j(θ) = (θ_T(j-1) - jθ) θ^{j-2} (1-θ)^2
inline double f_j(double theta, double theta_T, int j) {
  if (j < 2) throw DomainError("f_j: j must be >= 2");
  return (theta_T * (j - 1) - j * theta) * std::pow(theta, j - 2) * (1.0 - theta) * (1.0 - theta);
}

inline double f_j_prime(double theta, double theta_T, int j) {
  if (j < 2) throw DomainError("f_j_prime: j must be >= 2");
  if (j == 2) return 2.0 * (1.0 - theta) * (3.0 * theta - 1.0 - theta_T);
  const double jj = j;
  const double d = theta_T - theta;
  const double brace = jj * (jj - 1.0) * (d * d + d * (1.0 - theta_T)) -
                       2.0 * jj * (theta_T - theta * theta) + 2.0 * theta_T;
  return std::pow(theta, j - 3) * (1.0 - theta) * brace;
}

/// Zeros of f_j' in (0, θ_T). The brace equals
/// j(j+1)θ² - j(j-1)(1+θ_T)θ + (j-1)(j-2)θ_T.
inline std::vector<double> f_j_prime_roots(double theta_T, int j) {
  const double jj = j;
  const double A = jj * (jj + 1.0);
  const double B = -jj * (jj - 1.0) * (1.0 + theta_T);
  const double C = (jj - 1.0) * (jj - 2.0) * theta_T;
  std::vector<double> out;
  const double disc = B * B - 4.0 * A * C;
  if (disc >= 0.0) {
    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
    for (double x : {q / A, q != 0.0 ? C / q : std::numeric_limits<double>::quiet_NaN()}) {
      if (x > 0.0 && x < theta_T) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct AppendixReport {
  double theta_T = 0.0;
  double lhs = 0.0;
  double lhs_error = 0.0;  // quadrature estimate plus certified tail of the j-sum
  int j_max = 0;
  double rhs_closed = 0.0;   // -6θ + 14θ² - (14/3)θ³ - 8(θ+1) ln(1-θ)
  double rhs_relaxed = 0.0;  // 2θ + 14θ² - (14/3)θ³ + 16θ ln(1/(1-θ))
  double rhs_K1_main = 0.0;      // θ(34/3 + 16 ln(1/(1-θ)))
  double rhs_K1_appendix = 0.0;  // θ(37/3 + 16 ln(1/(1-θ)))
  double f2_integral = 0.0;
  double f2_bound = 0.0;  // 4θ² + 2θ - 3θ³
  double geometric_sum = 0.0;
  bool lhs_ok = false;
  bool chain_ok = false;
  bool f2_ok = false;
  bool geometric_ok = false;
  bool pass = false;
};

inline constexpr int kAppendixMaxTerms = 100'000;

inline double abs_f_j_prime_integral(double theta_T, int j, const QuadratureSpec& spec,
                                     double* err = nullptr) {
  std::vector<double> breaks{0.0};
  if (j == 2) {
    const double x = (1.0 + theta_T) / 3.0;
    if (x < theta_T) breaks.push_back(x);
  } else {
    for (double x : f_j_prime_roots(theta_T, j)) breaks.push_back(x);
  }
  breaks.push_back(theta_T);
  const QuadResult q = integrate_pieces(
      [&](double th) { return std::abs(f_j_prime(th, theta_T, j)); }, breaks, spec);
  if (err) *err = q.err_est;
  return q.value;
}

/// Evaluates the K_1 chain at θ_T. The j-sum stops at the first J whose tail
/// bound Σ_{j>=J} 4j²(j-1)/(j-2) θ_T^{j-1} is below tol; that bound follows
/// from |brace| <= 4j²θ_T and ∫_0^{θ_T} θ^{j-3} dθ = θ_T^{j-2}/(j-2).
inline AppendixReport appendix_check(double theta_T, double tol,
                                     const QuadratureSpec& spec = {}) {
  if (!(theta_T > 0.0 && theta_T < 1.0)) {
    throw DomainError("appendix_check: theta_T must lie in (0, 1)");
  }
  if (!(tol > 0.0)) throw DomainError("appendix_check: tol must be > 0");
  const double th = theta_T;
  AppendixReport rep;
  rep.theta_T = th;

  auto tail_term = [th](int j) {
    const double jj = j;
    return 4.0 * jj * jj * (jj - 1.0) / (jj - 2.0) * std::pow(th, jj - 1.0);
  };
  double sum = 0.0;
  double qerr = 0.0;
  double tail = std::numeric_limits<double>::infinity();
  int j = 2;
  for (; j <= kAppendixMaxTerms; ++j) {
    if (j >= 3) {
      const double rho = th * (j + 1.0) * (j + 1.0) / (static_cast<double>(j) * j);
      if (rho < 1.0) {
        tail = tail_term(j) / (1.0 - rho);
        if (tail <= tol) break;
      }
    }
    double e = 0.0;
    sum += (j - 1.0) * abs_f_j_prime_integral(th, j, spec, &e);
    qerr += (j - 1.0) * e;
  }
  if (j > kAppendixMaxTerms) {
    throw AccuracyError("appendix_check: j-sum did not reach tolerance", sum);
  }
  rep.j_max = j - 1;
  rep.lhs = sum;
  rep.lhs_error = qerr + tail;

  const double L = -std::log1p(-th);  // ln(1/(1-θ))
  const double th2 = th * th;
  const double th3 = th2 * th;
  rep.rhs_closed = -6.0 * th + 14.0 * th2 - 14.0 / 3.0 * th3 + 8.0 * (th + 1.0) * L;
  rep.rhs_relaxed = 2.0 * th + 14.0 * th2 - 14.0 / 3.0 * th3 + 16.0 * th * L;
  rep.rhs_K1_main = th * (34.0 / 3.0 + 16.0 * L);
  rep.rhs_K1_appendix = th * (37.0 / 3.0 + 16.0 * L);

  rep.f2_integral = abs_f_j_prime_integral(th, 2, spec);
  rep.f2_bound = 4.0 * th2 + 2.0 * th - 3.0 * th3;

  double g = 0.0;
  const double w = (1.0 - th) * (1.0 - th);
  double pw = th;  // θ^{j-1}
  for (int m = 2; m <= kAppendixMaxTerms; ++m) {
    const double term = (m - 1.0) * w * pw;
    g += term;
    if (term < 1e-18 * g) break;
    pw *= th;
  }
  rep.geometric_sum = g;

  const double slack = tol + rep.lhs_error;
  rep.lhs_ok = rep.lhs <= rep.rhs_closed + slack;
  rep.chain_ok = rep.lhs_ok && rep.rhs_closed <= rep.rhs_relaxed &&
                 rep.rhs_relaxed <= rep.rhs_K1_main && rep.rhs_K1_main <= rep.rhs_K1_appendix;
  rep.f2_ok = rep.f2_integral <= rep.f2_bound + tol;
  rep.geometric_ok = std::abs(rep.geometric_sum - th) <= 1e-12;
  rep.pass = rep.chain_ok && rep.f2_ok && rep.geometric_ok;
  return rep;
}

// ---------------------------------------------------------------------------
// Small-b limit
// ---------------------------------------------------------------------------

/// W against Poisson(μ_T).
inline LawCheckReport poisson_limit_check(const ScenarioParams& sc, std::uint64_t n,
                                          const RngStream& base, unsigned workers,
                                          double threshold, const QuadratureSpec& spec = {}) {
  const ExposureSummary ex = compute_exposure(sc, spec);
  const EmpiricalDist sample = sample_W_many(sc, n, base, workers);
  return check_law(sample, poisson_materialize(ex.mu_T), threshold);
}

}  // namespace nbstein
