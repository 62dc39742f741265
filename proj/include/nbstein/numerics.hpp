#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "nbstein/errors.hpp"

namespace nbstein {

// ---------------------------------------------------------------------------
// Log-gamma
// ---------------------------------------------------------------------------

namespace detail {

// Lanczos approximation with g = 6.024680040776729583740234375 and N = 13,
// written as a rational function num(x)/den(x) where
// den(x) = x (x+1) ... (x+11). Coefficients as published with CPython's
// math.lgamma (Modules/mathmodule.c); accurate to a few ulps for x > 0.
inline constexpr double kLanczosG = 6.024680040776729583740234375;
inline constexpr std::array<double, 13> kLanczosNum = {
    23531376880.410759688572007674451636754734846804940,
    42919803642.649098768957899047001988850926355848959,
    35711959237.355668049440185451547166705960488635843,
    17921034426.037209699919755754458931112671403265390,
    6039542586.3520280050642916443072979210699388420708,
    1439720407.3117216736632230727949123939715485786772,
    248874557.86205415651146038641322942321632125127801,
    31426415.585400194380614231628318205362874684987640,
    2876370.6289353724412254090516208496135991145378768,
    186056.26539522349504029498971604569928220784236328,
    8071.6720023658162106380029022722506138218516325024,
    210.82427775157934587250973392071336271166969580291,
    2.5066282746310002701649081771338373386264310793408};
inline constexpr std::array<double, 13> kLanczosDen = {
    0.0,       39916800.0, 120543840.0, 150917976.0, 105258076.0,
    45995730.0, 13339535.0, 2637558.0,  357423.0,    32670.0,
    1925.0,    66.0,       1.0};

inline double lanczos_sum(double x) {
  double num = 0.0;
  double den = 0.0;
  if (x < 5.0) {
    for (int i = 12; i >= 0; --i) {
      num = num * x + kLanczosNum[i];
      den = den * x + kLanczosDen[i];
    }
  } else {
    // Evaluate in 1/x to avoid overflow for large x.
    for (int i = 0; i < 13; ++i) {
      num = num / x + kLanczosNum[i];
      den = den / x + kLanczosDen[i];
    }
  }
  return num / den;
}

}  // namespace detail

/// ln Γ(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite, got " +
                      std::to_string(x));
  }
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 1e-20) return -std::log(x);
  double r = std::log(detail::lanczos_sum(x)) - detail::kLanczosG;
  r += (x - 0.5) * (std::log(x + detail::kLanczosG - 0.5) - 1.0);
  return r;
}

// ---------------------------------------------------------------------------
// Adaptive quadrature
// ---------------------------------------------------------------------------

struct QuadratureSpec {
  double abs_tol = 1e-11;
  double rel_tol = 1e-12;
  int max_depth = 64;  // maximum bisection depth of any panel

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol >= 0.0) || max_depth < 1) {
      throw DomainError(
          "QuadratureSpec requires abs_tol > 0, rel_tol >= 0, max_depth >= 1");
    }
  }
};

struct QuadResult {
  double value = 0.0;
  double err_est = 0.0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double err;
  int depth;
  bool operator<(const Panel& other) const { return err < other.err; }
};

template <class F>
Panel gauss_kronrod15(F& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return Panel{a, b, kronrod, std::abs(kronrod - gauss), depth};
}

/// Global adaptive Gauss-Kronrod over finite panels. The integrand is never
/// evaluated at panel endpoints, so integrable endpoint singularities are
/// resolved by repeated bisection of the panel that touches them.
template <class F>
QuadResult adaptive_gk(F& f, const std::vector<double>& breaks,
                       const QuadratureSpec& spec) {
  constexpr std::size_t kMaxPanels = 1u << 16;
  std::priority_queue<Panel> active;
  std::vector<Panel> frozen;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) {
      active.push(gauss_kronrod15(f, breaks[i], breaks[i + 1], 0));
    }
  }
  std::size_t panels = active.size();

  auto totals = [&]() {
    QuadResult total;
    auto copy = active;
    while (!copy.empty()) {
      total.value += copy.top().value;
      total.err_est += copy.top().err;
      copy.pop();
    }
    for (const auto& p : frozen) {
      total.value += p.value;
      total.err_est += p.err;
    }
    return total;
  };

  double run_value = 0.0;
  double run_err = 0.0;
  {
    const QuadResult t = totals();
    run_value = t.value;
    run_err = t.err_est;
  }
  for (;;) {
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(run_value));
    if (run_err <= tol) {
      const QuadResult exact = totals();
      if (exact.err_est <= std::max(spec.abs_tol,
                                    spec.rel_tol * std::abs(exact.value))) {
        return exact;
      }
      run_value = exact.value;
      run_err = exact.err_est;
    }
    if (active.empty() || panels >= kMaxPanels) {
      const QuadResult best = totals();
      throw AccuracyError("integrate: no convergence (error estimate " +
                              std::to_string(best.err_est) + ")",
                          best.value);
    }
    const Panel worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.depth >= spec.max_depth || !(mid > worst.a && mid < worst.b)) {
      frozen.push_back(worst);
      continue;
    }
    const Panel left = gauss_kronrod15(f, worst.a, mid, worst.depth + 1);
    const Panel right = gauss_kronrod15(f, mid, worst.b, worst.depth + 1);
    run_value += left.value + right.value - worst.value;
    run_err += left.err + right.err - worst.err;
    active.push(left);
    active.push(right);
    ++panels;
  }
}

}  // namespace detail

/// Integrates f over [lo, hi]; hi may be +infinity. The semi-infinite part
/// [lo + 1, inf) is mapped onto a finite panel by t = lo + 1 + s/(1 - s).
template <class F>
QuadResult integrate(F&& f, double lo, double hi,
                     const QuadratureSpec& spec = {}) {
  spec.validate();
  if (!std::isfinite(lo)) throw DomainError("integrate: lo must be finite");
  if (std::isinf(hi) && hi > 0) {
    auto mapped = [&](double x) {
      if (x <= 1.0) return static_cast<double>(f(lo + x));
      const double s = x - 1.0;
      const double w = 1.0 - s;
      return static_cast<double>(f(lo + 1.0 + s / w)) / (w * w);
    };
    return detail::adaptive_gk(mapped, {0.0, 1.0, 2.0}, spec);
  }
  if (!std::isfinite(hi)) throw DomainError("integrate: hi must be finite or +inf");
  if (hi < lo) {
    QuadResult r = integrate(f, hi, lo, spec);
    r.value = -r.value;
    return r;
  }
  auto plain = [&](double x) { return static_cast<double>(f(x)); };
  return detail::adaptive_gk(plain, {lo, hi}, spec);
}

/// Integrates f over [breaks.front(), breaks.back()] with the given interior
/// points as fixed panel edges (kinks, jumps). Breaks must be nondecreasing.
template <class F>
QuadResult integrate_pieces(F&& f, const std::vector<double>& breaks,
                            const QuadratureSpec& spec = {}) {
  spec.validate();
  if (breaks.size() < 2) throw DomainError("integrate_pieces: need at least two breaks");
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    if (!std::isfinite(breaks[i]) || (i > 0 && breaks[i] < breaks[i - 1])) {
      throw DomainError("integrate_pieces: breaks must be finite and nondecreasing");
    }
  }
  auto plain = [&](double x) { return static_cast<double>(f(x)); };
  return detail::adaptive_gk(plain, breaks, spec);
}

// ---------------------------------------------------------------------------
// Bisection
// ---------------------------------------------------------------------------

struct Bracket {
  double lo;
  double hi;
  double width() const { return hi - lo; }
  double midpoint() const { return lo + 0.5 * (hi - lo); }
};

/// Shrinks [lo, hi] around a sign change of f until its width is <= tol
/// (or one ulp, whichever is larger).
template <class F>
Bracket bisect(F&& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw DomainError("bisect: tol must be positive");
  if (!(lo < hi)) throw DomainError("bisect: need lo < hi");
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return {lo, lo};
  if (fhi == 0.0) return {hi, hi};
  if (!((flo < 0.0) != (fhi < 0.0))) {
    throw BracketError("bisect: no sign change on [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "]");
  }
  while (hi - lo > tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return {mid, mid};
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

template <class F>
double find_root(F&& f, double lo, double hi, double tol) {
  return bisect(f, lo, hi, tol).midpoint();
}

}  // namespace nbstein
