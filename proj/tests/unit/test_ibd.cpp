#include <gtest/gtest.h>

#include <cmath>

#include "nbstein/ibd.hpp"
#include "nbstein/monte_carlo.hpp"

using namespace nbstein;

namespace {

// Pure death from z0: each individual survives to t independently, Bin(z0, e^{-t}).
Pmf binomial_law(std::int64_t n, double q) {
  Pmf out;
  out.weights.resize(static_cast<std::size_t>(n + 1));
  for (std::int64_t k = 0; k <= n; ++k) {
    out.weights[static_cast<std::size_t>(k)] =
        std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                 k * std::log(q) + (n - k) * std::log1p(-q));
  }
  return out;
}

}  // namespace

TEST(ImmigrationRate, Validation) {
  EXPECT_THROW(ImmigrationRate::constant(-1.0), DomainError);
  EXPECT_THROW(ImmigrationRate::varying([](double) { return 1.0; }, -2.0), DomainError);
  const auto c = ImmigrationRate::constant(2.5);
  EXPECT_TRUE(c.is_constant());
  EXPECT_DOUBLE_EQ(c(7.0), 2.5);
  const auto v = ImmigrationRate::varying([](double s) { return s; }, 3.0);
  EXPECT_FALSE(v.is_constant());
  EXPECT_DOUBLE_EQ(v(1.5), 1.5);
}

TEST(SimulateIbd, PureDeathIsBinomial) {
  const IBDParams p{ImmigrationRate::constant(0.0), 0.0, 6};
  const EmpiricalDist d = replicate(50000, rng_stream(21, 0), 1,
                                    [&](RngStream& r) { return simulate_ibd(p, 0.8, r); });
  EXPECT_LE(tv_distance(d.to_pmf(), binomial_law(6, std::exp(-0.8))), 0.01);
}

TEST(SimulateIbd, PureImmigrationWithoutBirthIsPoisson) {
  // b = 0: M/M/∞ from empty, Po(a(1 - e^{-t})).
  const IBDParams p{ImmigrationRate::constant(3.0), 0.0, 0};
  const EmpiricalDist d = replicate(50000, rng_stream(22, 0), 1,
                                    [&](RngStream& r) { return simulate_ibd(p, 2.0, r); });
  EXPECT_LE(tv_distance(d.to_pmf(), poisson_materialize(3.0 * (1.0 - std::exp(-2.0)))), 0.012);
}

TEST(SimulateIbd, DeterministicAndWorkerInvariant) {
  const IBDParams p{ImmigrationRate::constant(1.0), 0.5, 2};
  auto draw = [&](RngStream& r) { return simulate_ibd(p, 1.5, r); };
  const EmpiricalDist a = replicate(4000, rng_stream(5, 3), 1, draw);
  const EmpiricalDist b = replicate(4000, rng_stream(5, 3), 1, draw);
  const EmpiricalDist c = replicate(4000, rng_stream(5, 3), 3, draw);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  const EmpiricalDist d = replicate(4000, rng_stream(6, 3), 1, draw);
  EXPECT_NE(a, d);
}

TEST(SimulateIbd, SupercriticalCapRaises) {
  const IBDParams p{ImmigrationRate::constant(0.0), 5.0, 5'000'000};
  RngStream rng(1, 0);
  EXPECT_THROW(simulate_ibd(p, 10.0, rng), SupercriticalError);
}

TEST(SimulateIbd, InputValidation) {
  RngStream rng(1, 0);
  EXPECT_THROW(simulate_ibd({ImmigrationRate::constant(1.0), 0.5, 0}, 0.0, rng), DomainError);
  EXPECT_THROW(simulate_ibd({ImmigrationRate::constant(1.0), -0.5, 0}, 1.0, rng), DomainError);
  EXPECT_THROW(simulate_ibd({ImmigrationRate::constant(1.0), 0.5, -1}, 1.0, rng), DomainError);
}

TEST(SimulateIbd, RateAboveDeclaredMaximumRaises) {
  const IBDParams p{ImmigrationRate::varying([](double) { return 5.0; }, 1.0), 0.2, 0};
  RngStream rng(2, 0);
  EXPECT_THROW(
      {
        for (int i = 0; i < 100; ++i) simulate_ibd(p, 5.0, rng);
      },
      DomainError);
}

TEST(SimulateIbd, ThinnedConstantRateMatchesDirectLaw) {
  const IBDParams direct{ImmigrationRate::constant(1.2), 0.5, 0};
  const IBDParams thinned{ImmigrationRate::varying([](double) { return 1.2; }, 3.0), 0.5, 0};
  const EmpiricalDist a = replicate(40000, rng_stream(7, 0), 1,
                                    [&](RngStream& r) { return simulate_ibd(direct, 2.0, r); });
  const EmpiricalDist b = replicate(40000, rng_stream(7, 1 << 20), 1,
                                    [&](RngStream& r) { return simulate_ibd(thinned, 2.0, r); });
  EXPECT_LE(tv_two_sample(a, b), 0.02);
  const NegBinParams nb(1.2 / 0.5, lambda_theta(0.5, 2.0).theta);
  EXPECT_LE(tv_distance(b.to_pmf(), nb_materialize(nb)), 0.015);
}

TEST(LawChecks, TooFewSamplesIsPrecisionError) {
  EmpiricalDist d;
  d.add(0, 999);
  EXPECT_THROW(check_law(d, dirac(0), 0.1), PrecisionError);
  EXPECT_THROW(coupling_check(1, 1.0, 0.5, 1.0, 10, rng_stream(1, 0)), PrecisionError);
  EXPECT_THROW(coupling_check(0, 1.0, 0.5, 1.0, 5000, rng_stream(1, 0)), DomainError);
}

TEST(LawChecks, WorstCellZFlagsImpossibleValues) {
  EmpiricalDist d;
  d.add(0, 999);
  d.add(4, 1);
  const LawCheckReport rep = check_law(d, dirac(0), 0.1);
  EXPECT_TRUE(std::isinf(rep.worst_cell_z));
  EXPECT_NEAR(rep.tv, 0.001, 1e-15);
  EXPECT_TRUE(rep.pass);
}

TEST(Lemma21, SmallSampleCheckPasses) {
  for (auto [b, t] : std::vector<std::pair<double, double>>{{0.5, 2.0}, {1.0, 0.5}, {1.5, 1.0}}) {
    const Lemma21Report rep = lemma21_check(b, t, 30000, rng_stream(31, 0), 1, 0.02);
    EXPECT_TRUE(rep.law.pass) << b << " " << t << " tv=" << rep.law.tv;
    EXPECT_TRUE(rep.moments_ok) << rep.mean << " vs " << rep.mean_expected;
  }
}

TEST(Lemma22, SmallSampleCheckPasses) {
  const LawCheckReport rep = lemma22_check(2.0, 0.3, 3.0, 30000, rng_stream(32, 0), 1, 0.02);
  EXPECT_TRUE(rep.pass) << rep.tv;
}

TEST(Coupling, SmallSampleCheckPasses) {
  const LawCheckReport rep = coupling_check(3, 1.0, 0.5, 1.0, 20000, rng_stream(33, 0), 1, 0.03);
  EXPECT_TRUE(rep.pass) << rep.tv;
}

TEST(Coupling, VanishingTimeIsIdentity) {
  // At t ≈ 0 both sides are the point mass at i.
  const LawCheckReport rep = coupling_check(2, 1.0, 0.5, 1e-9, 2000, rng_stream(34, 0));
  EXPECT_EQ(rep.tv, 0.0);
}

TEST(IntegralIdentities, ClosedFormsAcrossP) {
  for (double p : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    const IntegralIdentities id = verify_integral_identities(p);
    EXPECT_NEAR(id.I1, 2.0 / (1.0 - p), 1e-8) << p;
    EXPECT_NEAR(id.I2, 4.0 / (3.0 * (1.0 - p)), 1e-8) << p;
  }
  EXPECT_THROW(verify_integral_identities(1.0), DomainError);
  EXPECT_THROW(verify_integral_identities(0.0), DomainError);
}
