#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "nbstein/parasite.hpp"
#include "nbstein/scenario_json.hpp"
#include "nbstein/stein.hpp"

using namespace nbstein;

namespace {

ScenarioParams sinusoid(double amp, double period, double T = 4.0) {
  ScenarioParams sc;
  sc.abar = 2.0;
  sc.b = 0.5;
  sc.T = T;
  sc.rate = SinusoidRate{2.0, amp, period, 0.0};
  return sc;
}

ScenarioParams constant(double abar, double b, double T) {
  ScenarioParams sc;
  sc.abar = abar;
  sc.b = b;
  sc.T = T;
  sc.rate = ConstantRate{abar};
  return sc;
}

// Midpoint rule for A_t on m panels, plus the running sup of |A_t|.
struct RiemannOracle {
  double A_T = 0.0;
  double A_star = 0.0;
};

RiemannOracle riemann_exposure(const ScenarioParams& sc, int m) {
  const double h = sc.T / m;
  const double c = 1.0 - sc.b;
  RiemannOracle o;
  double A = 0.0;
  for (int i = 0; i < m; ++i) {
    const double t = (i + 0.5) * h;
    A += h * (rate_eval(sc.rate, sc.T - t, sc.T) - sc.abar) * std::exp(-c * t);
    o.A_star = std::max(o.A_star, std::abs(A));
  }
  o.A_T = A;
  return o;
}

ExposureSummary summary(double A_T, double A_star, double R, double theta) {
  ExposureSummary s;
  s.A_T = A_T;
  s.A_star = A_star;
  s.R_T = R;
  s.R_a_star = R;
  s.theta_T = theta;
  s.b = 0.5;
  return s;
}

std::string data_file(const char* name) { return std::string(NBSTEIN_TEST_DATA_DIR) + "/" + name; }

}  // namespace

TEST(Rates, Evaluation) {
  const IngestionRate s = SinusoidRate{2.0, 0.5, 4.0, 0.0};
  EXPECT_NEAR(rate_eval(s, 1.0, 4.0), 3.0, 1e-15);
  EXPECT_NEAR(rate_eval(s, 3.0, 4.0), 1.0, 1e-15);
  EXPECT_THROW(rate_eval(s, 4.5, 4.0), DomainError);
  EXPECT_THROW(rate_eval(s, -0.1, 4.0), DomainError);
  EXPECT_DOUBLE_EQ(rate_max(s), 3.0);

  const IngestionRate pw = PiecewiseRate{{1.0, 2.0}, {5.0, 0.0, 7.0}};
  EXPECT_EQ(rate_eval(pw, 0.5, 3.0), 5.0);
  EXPECT_EQ(rate_eval(pw, 1.0, 3.0), 0.0);  // right-continuous
  EXPECT_EQ(rate_eval(pw, 2.5, 3.0), 7.0);
  EXPECT_EQ(rate_breaks(pw, 3.0), (std::vector<double>{1.0, 2.0}));

  const IngestionRate tb = TableRate{{0.0, 2.0}, {1.0, 3.0}};
  EXPECT_DOUBLE_EQ(rate_eval(tb, 0.5, 4.0), 1.5);
  EXPECT_DOUBLE_EQ(rate_eval(tb, 3.0, 4.0), 3.0);
}

TEST(Rates, Validation) {
  EXPECT_THROW(validate_rate(SinusoidRate{2.0, 1.5, 1.0, 0.0}), DomainError);
  EXPECT_THROW(validate_rate(SinusoidRate{2.0, 0.5, 0.0, 0.0}), DomainError);
  EXPECT_THROW(validate_rate(PiecewiseRate{{1.0}, {1.0}}), DomainError);
  EXPECT_THROW(validate_rate(PiecewiseRate{{2.0, 1.0}, {1.0, 1.0, 1.0}}), DomainError);
  EXPECT_THROW(validate_rate(TableRate{{0.0, 1.0}, {1.0, -1.0}}), DomainError);
  EXPECT_THROW(validate_rate(ConstantRate{-1.0}), DomainError);
  ScenarioParams sc = constant(1.0, 1.0, 1.0);
  EXPECT_THROW(sc.validate(), DomainError);
}

TEST(Exposure, ConstantRateIsNeutral) {
  const ScenarioParams sc = constant(2.0, 0.5, 5.0);
  const ExposureSummary e = compute_exposure(sc);
  EXPECT_NEAR(e.A_T, 0.0, 1e-14);
  EXPECT_NEAR(e.A_star, 0.0, 1e-14);
  EXPECT_NEAR(e.R_T, 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(e.R_a_star, 4.0);
  EXPECT_NEAR(e.theta_T, lambda_theta(0.5, 5.0).theta, 1e-15);
  EXPECT_NEAR(e.mu_T, 2.0 * (1.0 - std::exp(-5.0)), 1e-12);
  EXPECT_DOUBLE_EQ(theorem31_bound(e).bound_total, 0.0);
}

TEST(Exposure, MatchesRiemannOracle) {
  for (auto [amp, period] : std::vector<std::pair<double, double>>{{0.5, 1.0}, {0.9, 4.0}, {0.3, 1.7}}) {
    const ScenarioParams sc = sinusoid(amp, period);
    const ExposureSummary e = compute_exposure(sc);
    const RiemannOracle o = riemann_exposure(sc, 1'000'000);
    EXPECT_NEAR(e.A_T, o.A_T, 1e-8) << amp << " " << period;
    EXPECT_NEAR(e.A_star, o.A_star, 1e-8) << amp << " " << period;
  }
}

TEST(Exposure, FrozenSinusoidValues) {
  const ExposureSummary e = compute_exposure(sinusoid(0.5, 1.0));
  EXPECT_NEAR(e.A_T, -0.136749686285226, 1e-12);
  EXPECT_NEAR(e.A_star, 0.281323435931864, 1e-12);
  EXPECT_NEAR(e.R_T, 3.841846575170654, 1e-12);
  EXPECT_NEAR(e.mu_T, 1.810988636263877, 1e-12);
}

TEST(Exposure, IdentityBetweenATAndRT) {
  // θ/(1-θ) (R_T - R_a*) = A_T for every rate.
  for (const auto& sc : {sinusoid(0.5, 1.0), sinusoid(0.9, 4.0)}) {
    const ExposureSummary e = compute_exposure(sc);
    EXPECT_NEAR(e.theta_T / (1.0 - e.theta_T) * (e.R_T - e.R_a_star), e.A_T, 1e-12);
  }
}

TEST(Exposure, SupDominatesEveryGridValueAndPiecewiseOracle) {
  const auto battery = battery_from_json(read_json_file(data_file("battery_v1.json")));
  for (const auto& item : battery) {
    const ExposureSummary e = compute_exposure(item.scenario);
    for (double a : e.grid_A) EXPECT_LE(std::abs(a), e.A_star);
    const RiemannOracle o = riemann_exposure(item.scenario, 400'000);
    EXPECT_NEAR(e.A_T, o.A_T, 1e-7) << item.name;
    EXPECT_NEAR(e.A_star, o.A_star, 1e-6) << item.name;
  }
}

TEST(Theorem31Bound, WorkedExample) {
  const BoundReport r = theorem31_bound(summary(0.1, 0.2, 4.0, 0.5));
  EXPECT_NEAR(r.log_factor, 1.0 + std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(r.delta_g_c1, 4.0);
  EXPECT_NEAR(r.delta_g_c2, 3.0, 1e-15);
  EXPECT_NEAR(r.delta_g_factor, 3.0, 1e-15);
  EXPECT_NEAR(r.bound_total, 0.1 + 4.8 * (1.0 + std::log(2.0)), 1e-13);
  EXPECT_NEAR(r.bound_total, 8.227, 5e-4);
}

TEST(Theorem31Bound, LinearInSup) {
  const BoundReport a = theorem31_bound(summary(0.1, 0.2, 4.0, 0.5));
  const BoundReport b = theorem31_bound(summary(0.1, 0.4, 4.0, 0.5));
  EXPECT_NEAR(b.term_main, 2.0 * a.term_main, 1e-14);
  EXPECT_DOUBLE_EQ(a.term_A, b.term_A);
  EXPECT_THROW(theorem31_bound(summary(0.0, 0.0, 4.0, 1.0)), DomainError);
}

TEST(NbShift, EqualsAbsAT) {
  const ExposureSummary e = compute_exposure(sinusoid(0.9, 1.0));
  const NbShiftCheck c = nb_shift_check(e);
  EXPECT_NEAR(c.dW, c.rhs, 1e-9);
  EXPECT_NEAR(c.rhs, c.abs_A_T, 1e-12);
}

TEST(AggregateBound, SingleHostValue) {
  const double r0 = compute_r0();
  const std::vector<ExposureSummary> one{summary(0.0, 0.2, 4.0, 0.5)};
  const double ref =
      24.0 * (1.0 + std::log(2.0)) * std::sqrt(0.5) / (std::pow(0.5, 1.5) * 2.0) * 0.2;
  EXPECT_NEAR(aggregate_bound(one, 1, r0), ref, 1e-13);
  EXPECT_NEAR(aggregate_bound(one, 1, r0), 8.1271, 1e-4);
}

TEST(AggregateBound, GrowsLikeRootN) {
  const double r0 = compute_r0();
  const std::vector<ExposureSummary> one{summary(0.0, 0.2, 4.0, 0.5)};
  const std::vector<ExposureSummary> nine(9, summary(0.0, 0.2, 4.0, 0.5));
  EXPECT_NEAR(aggregate_bound(nine, 9, r0), 3.0 * aggregate_bound(one, 1, r0), 1e-12);
  const std::vector<ExposureSummary> zero(3, summary(0.0, 0.0, 4.0, 0.5));
  EXPECT_EQ(aggregate_bound(zero, 3, r0), 0.0);
}

TEST(AggregateBound, Preconditions) {
  const double r0 = compute_r0();
  const std::vector<ExposureSummary> small{summary(0.0, 0.2, 1.0, 0.5)};
  EXPECT_THROW(aggregate_bound(small, 1, r0), PreconditionError);
  std::vector<ExposureSummary> mixed{summary(0.0, 0.2, 4.0, 0.5), summary(0.0, 0.2, 4.0, 0.4)};
  EXPECT_THROW(aggregate_bound(mixed, 2, r0), DomainError);
  EXPECT_THROW(aggregate_bound(mixed, 3, r0), DomainError);
}

TEST(Appendix, DerivativeMatchesFiniteDifferences) {
  const double h = 1e-5;
  for (int j : {2, 3, 7}) {
    for (double th : {0.1, 0.4}) {
      const double fd = (f_j(th + h, 0.5, j) - f_j(th - h, 0.5, j)) / (2.0 * h);
      EXPECT_NEAR(f_j_prime(th, 0.5, j), fd, 1e-8) << j << " " << th;
    }
  }
}

TEST(Appendix, DerivativeAtThetaT) {
  // At θ = θ_T the brace reduces to 2θ_T(1 - j + jθ_T).
  for (int j : {3, 5, 9}) {
    const double tt = 0.6;
    const double ref = std::pow(tt, j - 3) * (1.0 - tt) * 2.0 * tt * (1.0 - j + j * tt);
    EXPECT_NEAR(f_j_prime(tt, tt, j), ref, 1e-14);
  }
  EXPECT_THROW(f_j_prime(0.1, 0.5, 1), DomainError);
}

TEST(Appendix, RootsAreZerosOfDerivative) {
  for (int j : {3, 4, 10, 40}) {
    for (double tt : {0.2, 0.5, 0.9}) {
      for (double x : f_j_prime_roots(tt, j)) {
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, tt);
        const double scale = std::pow(x, j - 3) * (1.0 - x) * j * j;
        EXPECT_NEAR(f_j_prime(x, tt, j) / scale, 0.0, 1e-12) << j << " " << tt;
      }
    }
  }
}

TEST(Appendix, HalfThetaValues) {
  const AppendixReport r = appendix_check(0.5, 1e-10);
  EXPECT_NEAR(r.rhs_closed, -3.0 + 3.5 - 7.0 / 12.0 - 12.0 * std::log(0.5), 1e-13);
  EXPECT_NEAR(r.rhs_closed, 8.234, 5e-4);
  EXPECT_LE(r.lhs, r.rhs_closed);
  EXPECT_NEAR(r.lhs, 1.46390, 1e-5);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.f2_integral, r.f2_bound);
}

TEST(Appendix, LhsAgreesWithTotalVariationOracle) {
  // ∫|f_j'| is the total variation of f_j on [0, θ_T]; sum |Δf| on a fine grid.
  const double tt = 0.5;
  const AppendixReport r = appendix_check(tt, 1e-12);
  double oracle = 0.0;
  const int m = 20000;
  for (int j = 2; j <= r.j_max; ++j) {
    double tv = 0.0;
    double prev = f_j(0.0, tt, j);
    for (int i = 1; i <= m; ++i) {
      const double cur = f_j(tt * i / m, tt, j);
      tv += std::abs(cur - prev);
      prev = cur;
    }
    oracle += (j - 1) * tv;
  }
  EXPECT_NEAR(r.lhs, oracle, 1e-7);
}

TEST(Appendix, SmallAndLargeTheta) {
  for (double tt : {1e-3, 0.1, 0.9}) {
    const AppendixReport r = appendix_check(tt, 1e-10);
    EXPECT_TRUE(r.pass) << tt;
    EXPECT_LE(r.rhs_closed, r.rhs_relaxed);
    EXPECT_LE(r.rhs_relaxed, r.rhs_K1_main);
  }
  EXPECT_LE(appendix_check(1e-3, 1e-12).lhs, 1e-2);
  EXPECT_THROW(appendix_check(1.0, 1e-10), DomainError);
}

TEST(Appendix, GeometricIdentity) {
  EXPECT_NEAR(appendix_check(0.3, 1e-10).geometric_sum, 0.3, 1e-12);
}

TEST(SampleW, ConstantRateIsNegativeBinomial) {
  const ScenarioParams sc = constant(2.0, 0.5, 3.0);
  const EmpiricalDist d = sample_W_many(sc, 50000, rng_stream(41, 0));
  const ExposureSummary e = compute_exposure(sc);
  EXPECT_LE(tv_distance(d.to_pmf(), nb_materialize(NegBinParams(e.R_a_star, e.theta_T))), 0.015);
}

TEST(SampleW, SmallBirthRateIsPoisson) {
  const LawCheckReport r = poisson_limit_check(constant(2.0, 1e-4, 3.0), 50000, rng_stream(42, 0), 1, 0.02);
  EXPECT_TRUE(r.pass) << r.tv;
}

TEST(SampleW, WorkerInvariant) {
  const ScenarioParams sc = sinusoid(0.9, 1.0);
  EXPECT_EQ(sample_W_many(sc, 3000, rng_stream(43, 0), 1), sample_W_many(sc, 3000, rng_stream(43, 0), 4));
}

TEST(Validate, RejectsSmallSamples) {
  EXPECT_THROW(validate_scenario(constant(2.0, 0.5, 3.0), 10, rng_stream(1, 0)), PrecisionError);
}

TEST(Validate, SinusoidPassesWithSlack) {
  const ValidationReport r = validate_scenario(sinusoid(0.5, 1.0), 20000, rng_stream(44, 0));
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.mc_halfwidth, 0.0);
  EXPECT_LT(r.empirical_dW, r.bound);
}

TEST(ScenarioJson, RoundTrip) {
  const ScenarioParams sc = sinusoid(0.9, 4.0);
  const ScenarioParams back = scenario_from_json(nlohmann::json::parse(scenario_to_json(sc).dump()));
  EXPECT_EQ(back.abar, sc.abar);
  EXPECT_EQ(back.T, sc.T);
  const auto& s = std::get<SinusoidRate>(back.rate);
  EXPECT_EQ(s.amplitude_fraction, 0.9);
  EXPECT_EQ(s.period, 4.0);
}

TEST(ScenarioJson, Rejections) {
  using nlohmann::json;
  EXPECT_THROW(scenario_from_json(json::parse(R"({"rate":{"kind":"constant","abar":1},"b":0.5})")),
               DomainError);
  EXPECT_THROW(scenario_from_json(json::parse(
                   R"({"rate":{"kind":"constant","abar":1},"b":0.5,"T":1,"extra":2})")),
               DomainError);
  EXPECT_THROW(scenario_from_json(json::parse(
                   R"({"rate":{"kind":"sinusoid","abar":1,"amp":2,"period":1},"b":0.5,"T":1})")),
               DomainError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"rate":{"kind":"wave","abar":1},"b":0.5,"T":1})")),
               DomainError);
  EXPECT_THROW(scenario_from_json(json::parse(
                   R"({"rate":{"kind":"constant","abar":"x"},"b":0.5,"T":1})")),
               DomainError);
  EXPECT_THROW(read_json_file("/nonexistent/scenario.json"), IoError);
}

TEST(ScenarioJson, BatteryFile) {
  const auto battery = battery_from_json(read_json_file(data_file("battery_v1.json")));
  ASSERT_EQ(battery.size(), 7u);
  EXPECT_EQ(battery.front().name, "constant");
  EXPECT_TRUE(std::holds_alternative<TableRate>(battery.back().scenario.rate));
}
