#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ncmax/ncmax.hpp"

using namespace ncmax;

namespace {

double max_diff(const TracialOperator& x, const TracialOperator& y) { return (x - y).max_abs_entry(); }

// Classical stopping set on 2^d equal atoms: atoms whose every dyadic
// ancestor average stays at or below theta.
std::vector<int> stopping_set(const std::vector<double>& f, int depth, double theta) {
  const int n = 1 << depth;
  std::vector<int> keep(static_cast<std::size_t>(n), 1);
  for (int j = 0; j <= depth; ++j) {
    const int size = 1 << (depth - j);
    for (int start = 0; start < n; start += size) {
      double avg = 0.0;
      for (int i = start; i < start + size; ++i) avg += f[static_cast<std::size_t>(i)];
      avg /= size;
      if (avg > theta) {
        for (int i = start; i < start + size; ++i) keep[static_cast<std::size_t>(i)] = 0;
      }
    }
  }
  return keep;
}

}  // namespace

TEST(Filtration, DyadicMatrixExpectations) {
  const auto f = Filtration::dyadic_matrix(2);
  ASSERT_EQ(f.size(), 3u);
  Rng rng(1);
  const auto x = random_hermitian(rng, f.algebra());
  const auto e0 = f.expectation(0, x);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_EQ(e0.block(0)(i, j), i == j ? x.block(0)(i, j) : Complex(0.0));
    }
  }
  EXPECT_LT(max_diff(f.expectation(2, x), x), 1e-15);
  const auto e1 = f.expectation(1, x);
  EXPECT_EQ(e1.block(0)(0, 1), x.block(0)(0, 1));
  EXPECT_EQ(e1.block(0)(0, 2), Complex(0.0));
}

TEST(Filtration, TowerTraceAndContractivity) {
  Rng rng(2);
  const auto f = Filtration::dyadic_matrix(3);
  for (int t = 0; t < 20; ++t) {
    const auto x = random_hermitian(rng, f.algebra());
    for (std::size_t m = 0; m < f.size(); ++m) {
      const auto em = f.expectation(m, x);
      EXPECT_NEAR(em.trace(), x.trace(), 1e-10);
      EXPECT_LE(em.operator_norm(), x.operator_norm() + 1e-12);
      for (std::size_t n = 0; n < f.size(); ++n) {
        const auto both = f.expectation(m, f.expectation(n, x));
        EXPECT_LT(max_diff(both, f.expectation(std::min(m, n), x)), 1e-12);
      }
    }
  }
}

TEST(Filtration, WeightedAtomsAverage) {
  const auto f = Filtration::dyadic_atoms(1, {1.0, 3.0});
  const auto x = TracialOperator::diagonal(f.algebra(), {4.0, 0.0});
  const auto e = f.expectation(0, x);
  EXPECT_NEAR(e.block(0)(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(e.block(1)(0, 0).real(), 1.0, 1e-15);
}

TEST(Filtration, RejectsBadLevels) {
  const auto a = Algebra::matrix(4);
  const SubalgebraLevel diag{SiteGroup::full(0, {0}), SiteGroup::full(0, {1}), SiteGroup::full(0, {2}),
                             SiteGroup::full(0, {3})};
  const SubalgebraLevel halves{SiteGroup::full(0, {0, 1}), SiteGroup::full(0, {2, 3})};
  EXPECT_NO_THROW(Filtration(a, {diag, halves}));
  EXPECT_THROW(Filtration(a, {halves, diag}), ConfigError);
  const SubalgebraLevel overlap{SiteGroup::full(0, {0, 1}), SiteGroup::full(0, {1, 2, 3})};
  EXPECT_THROW(Filtration(a, {overlap}), ConfigError);
  const SubalgebraLevel missing{SiteGroup::full(0, {0, 1, 2})};
  EXPECT_THROW(Filtration(a, {missing}), ConfigError);
  EXPECT_THROW(Filtration(a, {}), ConfigError);
}

TEST(Cuculescu, Examples) {
  const double theta = 0.75;
  // trivial filtration: the projection is chi_[0,theta](x)
  const auto a = Algebra::matrix(2);
  const auto x = TracialOperator::diagonal(a, {2.0 * theta, 0.0});
  const auto e = cuculescu_witness(Filtration::trivial(a), x, theta);
  EXPECT_LT(max_diff(e.op(), TracialOperator::diagonal(a, {0.0, 1.0})), 1e-14);
  EXPECT_LE(e.complement().trace(), x.trace() / theta);
  // two atoms: the coarse average theta passes, the fine level stops atom 0
  const auto fa = Filtration::dyadic_atoms(1);
  const auto y = TracialOperator::diagonal(fa.algebra(), {2.0 * theta, 0.0});
  const auto ea = cuculescu_witness(fa, y, theta);
  EXPECT_LT(max_diff(ea.op(), TracialOperator::diagonal(fa.algebra(), {0.0, 1.0})), 1e-14);
  // below every threshold nothing is cut
  EXPECT_TRUE(cuculescu_witness(fa, y, 10.0).is_identity());
  EXPECT_THROW(cuculescu_witness(fa, y * -1.0, 1.0), InputError);
}

TEST(Cuculescu, ClassicalStoppingSet) {
  Rng rng(3);
  const int depth = 4;
  const auto f = Filtration::dyadic_atoms(depth);
  std::exponential_distribution<double> ex(1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> vals;
    for (int i = 0; i < (1 << depth); ++i) vals.push_back(ex(rng));
    const auto x = TracialOperator::diagonal(f.algebra(), vals);
    for (double theta : {0.5, 1.0, 2.0}) {
      const auto e = cuculescu_witness(f, x, theta);
      const auto keep = stopping_set(vals, depth, theta);
      for (int i = 0; i < (1 << depth); ++i) {
        EXPECT_NEAR(e.op().block(static_cast<std::size_t>(i))(0, 0).real(), keep[static_cast<std::size_t>(i)], 1e-12);
      }
    }
  }
}

TEST(Cuculescu, WeakTypeOnRandomMatrices) {
  Rng rng(4);
  const auto f = Filtration::dyadic_matrix(3);
  std::uniform_real_distribution<double> th(0.05, 2.0);
  for (int t = 0; t < 30; ++t) {
    const auto x = random_psd(rng, f.algebra());
    const double theta = th(rng);
    const auto e = cuculescu_witness(f, x, theta);
    EXPECT_LE(e.complement().trace(), x.trace() / theta * (1.0 + 1e-9));
    for (std::size_t n = 0; n < f.size(); ++n) {
      const auto c = (e.op() * f.expectation(n, x) * e.op()).hermitian_part();
      EXPECT_GE(order_margin(c, theta * e.op()), -1e-9);
    }
  }
}

TEST(Witness, MemoizedAndBitwiseDeterministic) {
  Rng rng(5);
  const auto filt = Filtration::dyadic_matrix(3);
  const auto x = random_psd(rng, filt.algebra());
  const auto net1 = conditional_expectation_net(filt);
  const auto net2 = conditional_expectation_net(filt);
  const auto g1 = net1.m_weak_witness(1.0);
  ASSERT_TRUE(g1);
  const auto e1 = (*g1)(x, 0.3);
  EXPECT_EQ(g1->cache_size(), 1u);
  const auto again = (*g1)(x, 0.3);
  EXPECT_EQ(g1->cache_size(), 1u);
  EXPECT_TRUE(e1.op() == again.op());
  const auto e2 = (*net2.m_weak_witness(1.0))(x, 0.3);
  EXPECT_TRUE(e1.op() == e2.op());
  net1.clear_witness_caches();
  EXPECT_EQ(g1->cache_size(), 0u);
  EXPECT_TRUE((*g1)(x, 0.3).op() == e1.op());
}

TEST(Witness, CorruptedConstantIsDetected) {
  const auto filt = Filtration::dyadic_matrix(2);
  const auto net = conditional_expectation_net(filt, 0.01);
  const auto x = TracialOperator::diagonal(filt.algebra(), {4.0, 0.0, 0.0, 0.0});
  EXPECT_THROW((*net.m_weak_witness(1.0))(x, 1.0), CertificateViolation);
  const auto good = conditional_expectation_net(filt);
  EXPECT_NO_THROW((*good.m_weak_witness(1.0))(x, 1.0));
}

TEST(Witness, RestrictedExamples) {
  const auto filt = Filtration::dyadic_matrix(2);
  const auto net = conditional_expectation_net(filt);
  const auto r1 = net.restricted_witness(1.0);
  ASSERT_TRUE(r1);
  EXPECT_EQ(r1->domain(), WitnessGenerator::Domain::kProjections);
  EXPECT_EQ(r1->constant(), 1.0);
  const auto r2 = net.restricted_witness(2.0);
  EXPECT_EQ(r2->exponent(), 2.0);
  EXPECT_EQ(r2->constant(), 1.0);
  Rng rng(6);
  const auto f = random_projection(rng, filt.algebra());
  EXPECT_TRUE((*r2)(f.op(), 1.0).is_identity());
  const auto e = (*r2)(f.op(), 0.5);
  EXPECT_LE(e.complement().trace(), std::pow(1.0 / 0.5, 2.0) * f.trace() * (1.0 + 1e-9));
  EXPECT_THROW((*r2)(f.op() * 2.0, 0.5), InputError);
  EXPECT_EQ(net.restricted_witness(2.0), r2);

  MaximalNet bare(filt.algebra(), filt.algebra(), {[](const TracialOperator& y) { return y; }}, {}, "identity");
  EXPECT_THROW(bare.restricted_witness(1.0), ConfigError);
  EXPECT_EQ(bare.m_weak_witness(1.0), nullptr);
}

TEST(Pinching, Examples) {
  const auto a = Algebra::matrix(3);
  const SubalgebraLevel part{SiteGroup::full(0, {0, 2}), SiteGroup::full(0, {1})};
  const auto net = pinching_net(a, {part});
  auto x = TracialOperator::zero(a);
  x.block(0) << 1, 1, 1, 1, 1, 1, 1, 1, 1;
  const auto y = net.apply(0, x);
  EXPECT_EQ(y.block(0)(0, 1), Complex(0.0));
  EXPECT_EQ(y.block(0)(0, 2), Complex(1.0));
  EXPECT_EQ(y.block(0)(1, 1), Complex(1.0));
  // single pinching: the witness is the sublevel projection of T(x)
  const auto e = (*net.m_weak_witness(1.0))(x, 1.5);
  EXPECT_LT(max_diff(e.op(), spectral_sublevel(y, 1.5).op()), 1e-12);
  EXPECT_EQ(e.total_rank(), 2);
  const SubalgebraLevel diag{SiteGroup::full(0, {0}), SiteGroup::full(0, {1}), SiteGroup::full(0, {2})};
  const auto two = pinching_net(a, {part, diag});
  EXPECT_EQ(two.m_weak_witness(1.0)->constant(), 2.0);
  Rng rng(7);
  for (int t = 0; t < 20; ++t) EXPECT_NO_THROW((*two.m_weak_witness(1.0))(random_psd(rng, a), 0.4));
  const SubalgebraLevel avg{SiteGroup::average({{0, 0}, {0, 1}, {0, 2}})};
  EXPECT_THROW(pinching_net(a, {avg}), ConfigError);
}

TEST(Properties, GenuineNetsPass) {
  Rng rng(8);
  const auto cond = conditional_expectation_net(Filtration::dyadic_matrix(2));
  EXPECT_TRUE(verify_properties(cond, rng, 20).all());
  const auto a = Algebra::matrix(3);
  const auto pin = pinching_net(a, {{SiteGroup::full(0, {0, 2}), SiteGroup::full(0, {1})}});
  EXPECT_TRUE(verify_properties(pin, rng, 20).all());
}

TEST(Properties, SquareMapIsNotOrderPreserving) {
  Rng rng(9);
  const auto a = Algebra::matrix(3);
  MaximalNet sq(a, a, {[](const TracialOperator& y) { return y * y; }}, {}, "square");
  const auto rep = verify_properties(sq, rng, 50);
  EXPECT_FALSE(rep.order_preserving);
  EXPECT_TRUE(rep.positive);
}
