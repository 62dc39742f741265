#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "nbstein/distributions.hpp"
#include "nbstein/errors.hpp"

namespace nbstein {

/// Counting measure of a sample on Z+.
class EmpiricalDist {
 public:
  EmpiricalDist() = default;

  explicit EmpiricalDist(std::span<const std::int64_t> values) {
    for (auto v : values) add(v);
  }

  void add(std::int64_t value, std::uint64_t count = 1) {
    if (value < 0) throw DomainError("EmpiricalDist: values must be >= 0");
    if (count == 0) return;
    counts_[value] += count;
    n_ += count;
  }

  void merge(const EmpiricalDist& other) {
    for (const auto& [v, c] : other.counts_) add(v, c);
  }

  std::uint64_t n() const noexcept { return n_; }
  const std::map<std::int64_t, std::uint64_t>& counts() const noexcept {
    return counts_;
  }
  std::uint64_t count(std::int64_t value) const {
    auto it = counts_.find(value);
    return it == counts_.end() ? 0 : it->second;
  }

  double mean() const {
    double s = 0.0;
    for (const auto& [v, c] : counts_) s += static_cast<double>(v) * static_cast<double>(c);
    return s / static_cast<double>(n_);
  }

  /// Exact law of the sample (no tail).
  Pmf to_pmf() const {
    if (n_ == 0) throw DomainError("EmpiricalDist: empty sample");
    Pmf out;
    out.offset = counts_.begin()->first;
    const std::int64_t last = counts_.rbegin()->first;
    out.weights.assign(static_cast<std::size_t>(last - out.offset + 1), 0.0);
    for (const auto& [v, c] : counts_) {
      out.weights[static_cast<std::size_t>(v - out.offset)] =
          static_cast<double>(c) / static_cast<double>(n_);
    }
    return out;
  }

  bool operator==(const EmpiricalDist&) const = default;

 private:
  std::map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

/// A distance together with a certified bound on its truncation error.
struct Distance {
  double value = 0.0;
  double error_bar = 0.0;
};

/// Largest truncation error accepted by wasserstein_pmf.
inline constexpr double kWassersteinTailTolerance = 1e-10;

/// d_W on Z+ as Σ_k |F_mu(k) - F_nu(k)| (closed-form 1-D optimal transport).
/// Beyond a law's stored support its CDF is frozen at the stored value and the
/// resulting error is folded into `error_bar`.
inline Distance wasserstein_pmf(const Pmf& mu, const Pmf& nu) {
  if (mu.weights.empty() || nu.weights.empty()) {
    throw DomainError("wasserstein_pmf: empty law");
  }
  const std::int64_t lo = std::min<std::int64_t>({mu.offset, nu.offset, 0});
  const std::int64_t hi = std::max(mu.last(), nu.last());
  double F_mu = 0.0;
  double F_nu = 0.0;
  double total = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    F_mu += mu.mass(k);
    F_nu += nu.mass(k);
    total += std::abs(F_mu - F_nu);
  }
  auto slack = [hi](const Pmf& law) {
    return static_cast<double>(hi - law.last()) * law.tail_mass + law.tail_excess;
  };
  Distance d{total, slack(mu) + slack(nu)};
  if (!(d.error_bar <= kWassersteinTailTolerance)) {
    throw AccuracyError("wasserstein_pmf: tail too heavy to certify (error bar " +
                            std::to_string(d.error_bar) + ")",
                        d.value);
  }
  return d;
}

inline Distance wasserstein_empirical(const EmpiricalDist& sample, const Pmf& nu) {
  if (sample.n() == 0) throw DomainError("wasserstein_empirical: empty sample");
  return wasserstein_pmf(sample.to_pmf(), nu);
}

/// (1/2) Σ_k |mu(k) - nu(k)| plus half the unmatched tail mass.
inline double tv_distance(const Pmf& mu, const Pmf& nu) {
  const std::int64_t lo = std::min(mu.offset, nu.offset);
  const std::int64_t hi = std::max(mu.last(), nu.last());
  double s = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) s += std::abs(mu.mass(k) - nu.mass(k));
  return std::min(1.0, 0.5 * s + 0.5 * std::abs(mu.tail_mass - nu.tail_mass));
}

/// TV between two empirical laws.
inline double tv_two_sample(const EmpiricalDist& a, const EmpiricalDist& b) {
  return tv_distance(a.to_pmf(), b.to_pmf());
}

}  // namespace nbstein
