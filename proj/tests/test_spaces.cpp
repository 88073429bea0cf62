#include <gtest/gtest.h>

#include <cmath>
#include <tuple>
#include <vector>

#include "ncmax/ncmax.hpp"
#include "oracles.hpp"

using namespace ncmax;

TEST(Spaces, Descriptors) {
  EXPECT_EQ(SpaceDescriptor::lp(2.0).describe(), "L^2");
  EXPECT_EQ(SpaceDescriptor::lorentz(2.0, 1.0).describe(), "L^{2,1}");
  EXPECT_TRUE(SpaceDescriptor::lorentz(2.0, 1.0).fully_symmetric());
  EXPECT_FALSE(SpaceDescriptor::lorentz(2.0, 4.0).fully_symmetric());
  EXPECT_TRUE(SpaceDescriptor::orlicz(OrliczFunction::power_mix(1.5, 3.0)).fully_symmetric());
  const auto b = SpaceDescriptor::orlicz(OrliczFunction::power_mix(1.5, 3.0)).boyd_indices();
  ASSERT_TRUE(b);
  EXPECT_EQ(b->first, 1.5);
  EXPECT_EQ(b->second, 3.0);
  EXPECT_THROW(SpaceDescriptor::lp(0.5), ConfigError);
  EXPECT_THROW(OrliczFunction::power(0.5), ConfigError);
  EXPECT_THROW(OrliczFunction::power_mix(3.0, 2.0), ConfigError);
}

TEST(Norms, Examples) {
  for (double s : {0.3, 1.0, 5.0}) {
    for (double r : {1.0, 2.0, 3.5}) {
      EXPECT_NEAR(norm(StepFunction::indicator(s), SpaceDescriptor::lp(r)), std::pow(s, 1.0 / r), 1e-14);
    }
  }
  EXPECT_NEAR(norm(StepFunction::indicator(1.0), SpaceDescriptor::lorentz(2.0, 1.0)), 2.0, 1e-12);
  EXPECT_NEAR(norm(StepFunction::indicator(1.0), SpaceDescriptor::lorentz(3.0, 1.0)), 3.0, 1e-12);
  EXPECT_NEAR(norm(StepFunction::indicator(1.0), SpaceDescriptor::orlicz(OrliczFunction::power(2.0))), 1.0, 1e-9);
  EXPECT_NEAR(norm(StepFunction::indicator(4.0, 3.0), SpaceDescriptor::lorentz(2.0, kInf)), 6.0, 1e-12);
  EXPECT_EQ(norm(StepFunction({1.0}, {1.0}, 1.0), SpaceDescriptor::lp(2.0)), kInf);
}

TEST(Norms, LorentzAgainstQuadrature) {
  Rng rng(31);
  for (int i = 0; i < 40; ++i) {
    const auto g = random_step_function(rng, 4);
    const double p = 1.5, q = 3.0;
    // ||g||_{p,q} = (int_0^inf (t^{1/p} g(t))^q dt/t)^{1/q}
    double acc = 0.0, lo = 0.0;
    for (double b : g.breakpoints()) {
      acc += oracle::integrate([&](double t) { return std::pow(std::pow(t, 1.0 / p) * g(t), q) / t; }, lo, b);
      lo = b;
    }
    EXPECT_NEAR(norm(g, SpaceDescriptor::lorentz(p, q)), std::pow(acc, 1.0 / q), 1e-9 * std::pow(acc, 1.0 / q));
  }
}

TEST(Norms, LuxemburgAgainstDefinition) {
  Rng rng(37);
  const auto phi = OrliczFunction::power_mix(1.5, 3.0);
  for (int i = 0; i < 30; ++i) {
    const auto g = random_step_function(rng, 4);
    const double k = norm(g, SpaceDescriptor::orlicz(phi));
    auto modular = [&](double kk) {
      double m = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) m += (g.breakpoints()[j] - g.left(j)) * phi(g.values()[j] / kk);
      return m;
    };
    EXPECT_NEAR(modular(k), 1.0, 1e-8);
  }
}

TEST(Norms, CalderonNormMatchesQuadrature) {
  Rng rng(41);
  for (int i = 0; i < 20; ++i) {
    const auto g = random_step_function(rng, 3);
    for (auto [p, q] : std::vector<std::pair<double, double>>{{1.0, 4.0}, {1.5, kInf}}) {
      const auto h = calderon_apply(g, p, q);
      const double r = 2.0;
      auto f = [&](double t) { return std::pow(h(t), r); };
      std::vector<double> cuts = h.scales();
      double acc = 0.0, lo = 0.0;
      for (double c : cuts) {
        acc += oracle::integrate(f, lo, c);
        lo = c;
      }
      acc += oracle::integrate(f, lo, kInf);
      EXPECT_NEAR(norm(h, SpaceDescriptor::lp(r)), std::pow(acc, 1.0 / r), 1e-7 * std::pow(acc, 1.0 / r));
    }
  }
}

TEST(Norms, HardyBoundForCalderon) {
  Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    const auto g = random_step_function(rng, 5);
    for (auto [pp, r, qq] : std::vector<std::tuple<double, double, double>>{{1.5, 2.0, 3.0}, {1.25, 1.5, 2.75}, {2.0, 3.0, 3.5}}) {
      const double lhs = norm(calderon_apply(g, pp, qq), SpaceDescriptor::lp(r));
      EXPECT_LE(lhs, calderon_lr_bound(r, pp, qq) * norm(g, SpaceDescriptor::lp(r)) * (1.0 + 1e-9));
    }
  }
}

TEST(Dilation, Examples) {
  Rng rng(47);
  std::vector<StepFunction> probes{StepFunction::indicator(1.0)};
  const auto l2 = dilation_norm_estimate(SpaceDescriptor::lp(2.0), 4.0, probes);
  EXPECT_DOUBLE_EQ(l2.value, 2.0);
  EXPECT_TRUE(l2.analytic);
  EXPECT_DOUBLE_EQ(dilation_norm_estimate(SpaceDescriptor::lp(1.0), 1.0, probes).value, 1.0);
  const auto one = dilation_norm_estimate(SpaceDescriptor::lorentz(2.0, 1.0), 4.0, probes);
  EXPECT_NEAR(one.value, 2.0, 1e-9);
  for (int i = 0; i < 49; ++i) probes.push_back(random_step_function(rng, 4));
  EXPECT_NEAR(dilation_norm_estimate(SpaceDescriptor::lorentz(2.0, 1.0), 4.0, probes).value, 2.0, 1e-9);
  const std::vector<StepFunction> zero{StepFunction()};
  EXPECT_THROW(dilation_norm_estimate(SpaceDescriptor::lorentz(2.0, 1.0), 4.0, zero), Error);
}

TEST(Orlicz, DeltaTwo) {
  const auto phi = OrliczFunction::power(3.0);
  const std::vector<double> samples{0.01, 0.5, 1.0, 7.0, 100.0};
  EXPECT_TRUE(phi.check_delta2(samples));
  ASSERT_TRUE(phi.indices());
  EXPECT_EQ(phi.indices()->first, 3.0);
}
