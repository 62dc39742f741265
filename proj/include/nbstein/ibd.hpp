#pragma once

// Immigration-birth-death processes Z^{[a,b]}: immigration at rate a_s,
// per-capita birth rate b, per-capita death rate 1.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "nbstein/distributions.hpp"
#include "nbstein/errors.hpp"
#include "nbstein/metrics.hpp"
#include "nbstein/monte_carlo.hpp"
#include "nbstein/numerics.hpp"
#include "nbstein/rng.hpp"

namespace nbstein {

/// Immigration intensity s ↦ a_s >= 0 with a finite bound a_max on the horizon.
class ImmigrationRate {
 public:
  static ImmigrationRate constant(double a) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw DomainError("ImmigrationRate: constant rate must be finite and >= 0");
    }
    ImmigrationRate out;
    out.a_max_ = a;
    return out;
  }

  static ImmigrationRate varying(std::function<double(double)> rate, double a_max) {
    if (!(a_max >= 0.0) || !std::isfinite(a_max)) {
      throw DomainError("ImmigrationRate: a_max must be finite and >= 0");
    }
    ImmigrationRate out;
    out.rate_ = std::move(rate);
    out.a_max_ = a_max;
    return out;
  }

  bool is_constant() const { return !rate_; }
  double a_max() const { return a_max_; }
  double operator()(double s) const { return rate_ ? rate_(s) : a_max_; }

 private:
  std::function<double(double)> rate_;
  double a_max_ = 0.0;
};

struct IBDParams {
  ImmigrationRate immigration = ImmigrationRate::constant(0.0);
  double b = 0.0;
  std::int64_t z0 = 0;
};

inline constexpr std::int64_t kPopulationCap = 10'000'000;

/// Exact jump-chain simulation of Z(t_end). In state n at time s the total
/// rate is a + n(b+1); a time-varying a_s is thinned against a_max, with the
/// same uniform deciding the event type and the acceptance.
inline std::int64_t simulate_ibd(const IBDParams& params, double t_end, RngStream& rng) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw DomainError("simulate_ibd: t_end must be finite and > 0");
  }
  if (!(params.b >= 0.0) || params.z0 < 0) {
    throw DomainError("simulate_ibd: need b >= 0 and z0 >= 0");
  }
  const ImmigrationRate& imm = params.immigration;
  const double a_max = imm.a_max();
  const double b = params.b;
  std::int64_t n = params.z0;
  double s = 0.0;
  for (;;) {
    const double nd = static_cast<double>(n);
    const double rate = a_max + nd * (b + 1.0);
    if (rate <= 0.0) return n;
    s += rng.exponential(rate);
    if (s >= t_end) return n;
    const double u = rng.uniform() * rate;
    if (u < a_max) {
      if (imm.is_constant()) {
        ++n;
      } else {
        const double a_s = imm(s);
        if (!(a_s >= 0.0 && a_s <= a_max)) {
          throw DomainError("simulate_ibd: immigration rate " + std::to_string(a_s) +
                            " at s=" + std::to_string(s) + " outside [0, a_max]");
        }
        if (u < a_s) ++n;
      }
    } else if (u < a_max + nd * b) {
      ++n;
    } else {
      --n;
    }
    if (n > kPopulationCap) {
      throw SupercriticalError("simulate_ibd: population exceeded " +
                               std::to_string(kPopulationCap));
    }
  }
}

// ---------------------------------------------------------------------------
// Law checks
// ---------------------------------------------------------------------------

struct LawCheckReport {
  double tv = 0.0;
  std::uint64_t n = 0;
  double worst_cell_z = 0.0;  // max_k |p̂_k - p_k| / √(p_k(1-p_k)/n)
  double threshold = 0.0;
  bool pass = false;
};

inline constexpr std::uint64_t kMinLawCheckSamples = 1000;

inline LawCheckReport check_law(const EmpiricalDist& samples, const Pmf& law,
                                double threshold) {
  if (samples.n() < kMinLawCheckSamples) {
    throw PrecisionError("check_law: need at least 1000 samples, got " +
                         std::to_string(samples.n()));
  }
  LawCheckReport rep;
  rep.n = samples.n();
  rep.threshold = threshold;
  const Pmf emp = samples.to_pmf();
  rep.tv = tv_distance(emp, law);
  const double nd = static_cast<double>(samples.n());
  const std::int64_t lo = std::min(emp.offset, law.offset);
  const std::int64_t hi = std::max(emp.last(), law.last());
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double p = law.mass(k);
    const double ph = emp.mass(k);
    double z = 0.0;
    if (p > 0.0 && p < 1.0) {
      z = std::abs(ph - p) / std::sqrt(p * (1.0 - p) / nd);
    } else if (p == 0.0 && ph > 0.0) {
      z = std::numeric_limits<double>::infinity();
    }
    rep.worst_cell_z = std::max(rep.worst_cell_z, z);
  }
  rep.pass = rep.tv <= threshold;
  return rep;
}

/// Two-sample comparison of Z_i(t) against Z_{i-1}(t) + Y_1(t) with independent
/// components. Replicate k of the direct side uses base.substream(k); the
/// coupled side uses base.substream(n + k).
inline LawCheckReport coupling_check(std::int64_t i, double a, double b, double t,
                                     std::uint64_t n, const RngStream& base,
                                     unsigned workers = 1, double threshold = 0.02) {
  if (i < 1) throw DomainError("coupling_check: i must be >= 1");
  if (n < kMinLawCheckSamples) {
    throw PrecisionError("coupling_check: need at least 1000 samples");
  }
  const IBDParams direct{ImmigrationRate::constant(a), b, i};
  const IBDParams lower{ImmigrationRate::constant(a), b, i - 1};
  const ModGeomParams single(b, t);
  const EmpiricalDist lhs = replicate(n, base, workers, [&](RngStream& rng) {
    return simulate_ibd(direct, t, rng);
  });
  const EmpiricalDist rhs = replicate(n, base.substream(n), workers, [&](RngStream& rng) {
    const std::int64_t z = simulate_ibd(lower, t, rng);
    return z + modgeom_sample(single, rng);
  });
  LawCheckReport rep = check_law(lhs, rhs.to_pmf(), threshold);
  return rep;
}

/// Y_1^{[b]}(t) against its modified geometric law plus the two moments.
struct Lemma21Report {
  LawCheckReport law;
  double mean = 0.0, mean_expected = 0.0, mean_se = 0.0;
  double m2 = 0.0, m2_expected = 0.0, m2_se = 0.0;
  bool moments_ok = false;
};

inline Lemma21Report lemma21_check(double b, double t, std::uint64_t n,
                                   const RngStream& base, unsigned workers,
                                   double threshold) {
  const ModGeomParams mg(b, t);
  const IBDParams single{ImmigrationRate::constant(0.0), b, 1};
  const EmpiricalDist sample = replicate(
      n, base, workers, [&](RngStream& rng) { return simulate_ibd(single, t, rng); });
  const Pmf law = modgeom_materialize(mg);
  Lemma21Report rep;
  rep.law = check_law(sample, law, threshold);
  const RawMoments mom = modgeom_moments(mg);
  rep.mean_expected = mom.m1;
  rep.m2_expected = mom.m2;
  double m4 = 0.0;
  for (std::size_t k = 0; k < law.weights.size(); ++k) {
    const double k2 = static_cast<double>(k) * static_cast<double>(k);
    m4 += law.weights[k] * k2 * k2;
  }
  const double nd = static_cast<double>(n);
  rep.mean_se = std::sqrt(std::max(0.0, mom.m2 - mom.m1 * mom.m1) / nd);
  rep.m2_se = std::sqrt(std::max(0.0, m4 - mom.m2 * mom.m2) / nd);
  double s1 = 0.0, s2 = 0.0;
  for (const auto& [v, c] : sample.counts()) {
    const double x = static_cast<double>(v);
    s1 += x * static_cast<double>(c);
    s2 += x * x * static_cast<double>(c);
  }
  rep.mean = s1 / nd;
  rep.m2 = s2 / nd;
  rep.moments_ok = std::abs(rep.mean - rep.mean_expected) <= 3.0 * rep.mean_se &&
                   std::abs(rep.m2 - rep.m2_expected) <= 3.0 * rep.m2_se;
  return rep;
}

/// Z_0^{[a,b]}(t) against NB(a/b, θ_t(b)).
inline LawCheckReport lemma22_check(double a, double b, double t, std::uint64_t n,
                                    const RngStream& base, unsigned workers,
                                    double threshold) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("lemma22_check: need a > 0, b > 0");
  const KendallParams k = lambda_theta(b, t);
  const IBDParams proc{ImmigrationRate::constant(a), b, 0};
  const EmpiricalDist sample = replicate(
      n, base, workers, [&](RngStream& rng) { return simulate_ibd(proc, t, rng); });
  return check_law(sample, nb_materialize(NegBinParams(a / b, k.theta)), threshold);
}

// ---------------------------------------------------------------------------
// ∫ Λ_t/√(1-Λ_t) dt = 2/(1-p) and ∫ Λ_t²/√(1-Λ_t) dt = 4/(3(1-p))
// ---------------------------------------------------------------------------

struct IntegralIdentities {
  double I1 = 0.0;
  double I2 = 0.0;
  double I1_err = 0.0;
  double I2_err = 0.0;
};

inline IntegralIdentities verify_integral_identities(double p,
                                                     const QuadratureSpec& spec = {}) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("verify_integral_identities: p must lie in (0, 1)");
  }
  // t = w²: the 1/√t endpoint singularity becomes the smooth factor
  // 2w/√(1-Λ) -> 2/√c at w = 0.
  const double c = 1.0 - p;
  auto weight = [c](double w) {
    const double x = c * w * w;
    if (x == 0.0) return 2.0 / std::sqrt(c);
    return 2.0 * w / std::sqrt(-std::expm1(-x));
  };
  auto first = [&](double w) { return std::exp(-c * w * w) * weight(w); };
  auto second = [&](double w) { return std::exp(-2.0 * c * w * w) * weight(w); };
  const double inf = std::numeric_limits<double>::infinity();
  const QuadResult a = integrate(first, 0.0, inf, spec);
  const QuadResult b = integrate(second, 0.0, inf, spec);
  return {a.value, b.value, a.err_est, b.err_est};
}

}  // namespace nbstein
