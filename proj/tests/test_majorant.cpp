#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ncmax/ncmax.hpp"
#include "oracles.hpp"

using namespace ncmax;

namespace {

// sum_{k<=0} 2^{(k-1)(1-p/p')} summed term by term
double gamma_series(double p, double pp) {
  double acc = 0.0;
  for (int k = 0; k > -200000; --k) {
    const double t = std::exp2((k - 1) * (1.0 - p / pp));
    acc += t;
    if (t < 1e-18 * acc) break;
  }
  return acc;
}

double delta_series(double q, double qp) {
  double acc = 0.0;
  for (int k = 1; k < 200000; ++k) {
    const double t = std::exp2((k - 1) * (1.0 - q / qp));
    acc += t;
    if (t < 1e-18 * acc) break;
  }
  return acc;
}

const ExponentWindow kInfWindow = ExponentWindow::make(1.0, 2.0, kInf);
const ExponentWindow kFiniteWindow = ExponentWindow::make(1.0, 2.0, 4.0, 3.0);

double pointwise_max_average(const std::vector<double>& f, int depth, int atom) {
  double best = 0.0;
  for (int j = 0; j <= depth; ++j) {
    const int size = 1 << (depth - j);
    const int start = atom / size * size;
    double avg = 0.0;
    for (int i = start; i < start + size; ++i) avg += f[static_cast<std::size_t>(i)];
    best = std::max(best, avg / size);
  }
  return best;
}

MaximalNet squaring_net(const Algebra& a) {
  MaximalNet net(a, a, {[](const TracialOperator& y) { return y * y; }}, {}, "square");
  net.set_uniform_bound(1.0);
  auto maps = net.maps();
  auto raw = [maps, a](const TracialOperator& x, double theta) { return sequential_witness(*maps, a, x, theta); };
  net.add_witness(std::make_shared<WitnessGenerator>(maps, raw, 1.0, 1.0, WitnessGenerator::Domain::kProjections,
                                                     "square"));
  return net;
}

}  // namespace

TEST(Window, Validation) {
  EXPECT_THROW(ExponentWindow::make(0.5, 2.0, kInf), WindowError);
  EXPECT_THROW(ExponentWindow::make(2.0, 1.5, kInf), WindowError);
  EXPECT_THROW(ExponentWindow::make(1.0, 2.0, 4.0, 5.0), WindowError);
  EXPECT_THROW(ExponentWindow::make(1.0, 3.0, 4.0, 2.0), WindowError);
  EXPECT_NO_THROW(ExponentWindow::make(1.0, 2.0, 4.0, 3.0));
  EXPECT_TRUE(std::isinf(ExponentWindow::make(1.0, 2.0, kInf, 7.0).q_prime));
}

TEST(Constants, Examples) {
  const auto c = constants(kInfWindow, 1.0, 1.0);
  EXPECT_NEAR(c.kappa, 2.0, 1e-15);
  EXPECT_NEAR(c.gamma, 1.0 / (std::sqrt(2.0) - 1.0), 1e-13);
  EXPECT_NEAR(c.K, 9.65685, 1e-5);
  const auto d = constants(kFiniteWindow, 1.0, 1.0);
  EXPECT_NEAR(d.kappa, 4.0, 1e-14);
  EXPECT_NEAR(d.delta, 4.84732, 1e-5);
  EXPECT_NEAR(d.K, 19.3893, 1e-4);
  EXPECT_THROW(constants(kInfWindow, 0.0, 1.0), ConfigError);
}

TEST(Constants, AgainstSeries) {
  for (double pp : {1.1, 1.5, 2.0, 3.0}) EXPECT_NEAR(gamma_constant(1.0, pp), gamma_series(1.0, pp), 1e-9 * gamma_series(1.0, pp));
  for (auto [q, qp] : std::vector<std::pair<double, double>>{{4.0, 3.0}, {8.0, 2.5}, {3.0, 2.9}})
    EXPECT_NEAR(delta_constant(q, qp), delta_series(q, qp), 1e-9 * delta_series(q, qp));
}

TEST(Constants, GammaBlowsUpLikeInverseGap) {
  for (double eps : {0.1, 0.01, 0.001, 0.0001}) {
    const double g = gamma_constant(1.0, 1.0 + eps);
    // gamma ~ p' / (ln 2 (p' - p))
    EXPECT_NEAR(g * eps / (1.0 + eps), 1.0 / std::log(2.0), 0.06);
  }
}

TEST(Constants, FromNet) {
  const auto net = conditional_expectation_net(Filtration::dyadic_matrix(2));
  const auto c = net_constants(net, kInfWindow);
  EXPECT_EQ(c.c_p, 1.0);
  EXPECT_EQ(c.c_q, 1.0);
  EXPECT_NEAR(c.kappa, 2.0, 1e-15);
}

TEST(Ladder, IdentityNetExample) {
  // one map T = id: witnesses are f^perp for theta < 1, 1 otherwise
  const auto a = Algebra::matrix(4);
  const auto net = conditional_expectation_net(Filtration::trivial(a));
  const auto c = net_constants(net, kInfWindow);
  const auto f = Projection::from_operator(TracialOperator::diagonal(a, {1, 1, 0, 0}));
  const auto res = majorant_for_projection(net, f, kInfWindow, c);
  EXPECT_EQ(res.k_max, 1);
  EXPECT_EQ(res.k_floor, -40);
  ASSERT_TRUE(res.e_minus_inf);
  EXPECT_LT((res.e_minus_inf->op() - f.complement().op()).max_abs_entry(), 1e-12);
  ASSERT_TRUE(res.top);
  EXPECT_TRUE(res.top->is_zero());
  const double head = c.kappa * c.K / 2.0;
  const double tail = c.kappa * c.K * std::exp2((-40 - 1) / 2.0);
  EXPECT_LT((res.a - TracialOperator::diagonal(a, {head, head, tail, tail})).max_abs_entry(), 1e-10);
}

TEST(Ladder, StructureOnRandomProjections) {
  Rng rng(1);
  const auto filt = Filtration::dyadic_matrix(3);
  for (const auto& w : {kInfWindow, kFiniteWindow}) {
    const auto net = conditional_expectation_net(filt);
    const auto c = net_constants(net, w);
    for (int t = 0; t < 15; ++t) {
      const auto f = random_projection(rng, filt.algebra());
      const auto res = majorant_for_projection(net, f, w, c);
      EXPECT_TRUE(res.certificate.holds);
      std::vector<TracialOperator> parts;
      for (const auto& st : res.ladder) parts.push_back(st.d.op());
      if (res.e_minus_inf) parts.push_back(res.e_minus_inf->op());
      if (res.top) parts.push_back(res.top->op());
      auto sum = TracialOperator::zero(filt.algebra());
      for (std::size_t i = 0; i < parts.size(); ++i) {
        sum += parts[i];
        for (std::size_t j = i + 1; j < parts.size(); ++j) EXPECT_LT((parts[i] * parts[j]).max_abs_entry(), 1e-9);
      }
      EXPECT_LT((sum - TracialOperator::identity(filt.algebra())).max_abs_entry(), 1e-9);
      for (const auto& st : res.ladder) {
        const double bound = st.k > 0 ? std::exp2(-st.k * w.q) * f.trace() : std::exp2(-st.k * w.p) * f.trace();
        EXPECT_LE(st.e.complement().trace(), bound * (1.0 + 1e-9));
      }
      if (!w.q_infinite()) {
        for (std::size_t i = 1; i < res.ladder.size(); ++i)
          EXPECT_GT(res.ladder[i].coefficient, res.ladder[i - 1].coefficient);
      }
      for (std::size_t al = 0; al < net.size(); ++al) EXPECT_GE(order_margin(net.apply(al, f.op()), res.a), -1e-8 * res.a.operator_norm());
    }
  }
}

TEST(Commutative, WithinOneDyadicLevelOfMaximalFunction) {
  Rng rng(2);
  const int depth = 3;
  const auto filt = Filtration::dyadic_atoms(depth);
  const auto net = conditional_expectation_net(filt);
  const auto c = net_constants(net, kInfWindow);
  std::bernoulli_distribution coin(0.4);
  for (int t = 0; t < 40; ++t) {
    std::vector<double> f;
    for (int i = 0; i < (1 << depth); ++i) f.push_back(coin(rng) ? 1.0 : 0.0);
    if (std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; })) f[0] = 1.0;
    const auto proj = Projection::from_operator(TracialOperator::diagonal(filt.algebra(), f));
    const auto res = majorant_commutative(net, proj, kInfWindow, c);
    EXPECT_LE(res.certificate.commutation_residue, 1e-9);
    for (int i = 0; i < (1 << depth); ++i) {
      const double m = pointwise_max_average(f, depth, i);
      const double ai = res.a.block(static_cast<std::size_t>(i))(0, 0).real();
      EXPECT_GE(ai, 2.0 * m - 1e-12);
      if (m > 0.0) {
        EXPECT_LE(ai, 4.0 * m + 1e-12);
      }
    }
  }
}

TEST(Commutative, NoncommutativeRangeIsRejected) {
  Rng rng(3);
  const auto filt = Filtration::dyadic_matrix(2);
  const auto net = conditional_expectation_net(filt);
  const auto c = net_constants(net, kInfWindow);
  int rejected = 0;
  for (int t = 0; t < 10; ++t) {
    try {
      majorant_commutative(net, random_projection(rng, filt.algebra()), kInfWindow, c);
    } catch (const CertificateViolation&) {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(General, DyadicMultipleOfProjection) {
  Rng rng(4);
  const auto filt = Filtration::dyadic_matrix(3);
  const auto net = conditional_expectation_net(filt);
  const auto c = net_constants(net, kFiniteWindow);
  for (int j : {-3, 0, 2, 5}) {
    const auto f = random_projection(rng, filt.algebra());
    const auto x = std::exp2(j) * f.op();
    const auto res = majorant_general(net, x, kFiniteWindow, c);
    ASSERT_EQ(res.groups.size(), 1u);
    EXPECT_EQ(res.groups[0].coefficient, std::exp2(j));
    EXPECT_LT((*res.x_hat - x).max_abs_entry(), 1e-12 * std::exp2(j));
    const auto pf = majorant_for_projection(net, f, kFiniteWindow, c);
    EXPECT_LT((res.a - std::exp2(j) * pf.a).max_abs_entry(), 1e-9 * std::exp2(j) * pf.a.operator_norm());
  }
}

TEST(General, CertificatesOnRandomOperators) {
  Rng rng(5);
  const auto filt = Filtration::dyadic_matrix(3);
  const auto net = conditional_expectation_net(filt);
  for (const auto& w : {kInfWindow, kFiniteWindow}) {
    const auto c = net_constants(net, w);
    for (int t = 0; t < 10; ++t) {
      const auto x = random_psd(rng, filt.algebra());
      const auto res = majorant_general(net, x, w, c);
      EXPECT_TRUE(res.certificate.holds);
      EXPECT_GE(order_margin(x, *res.x_hat), -1e-9);
      EXPECT_GE(order_margin(*res.x_hat, 2.0 * x), -1e-9);
      EXPECT_LE(res.certificate.identity_error, 1e-9);
      // mu(a) <<(sub) 4 kappa K S_{p',q'} mu(x), with mu(a) from the distribution oracle
      const auto pieces = oracle::singular_pieces(res.a.blocks(), {1.0});
      const auto s = calderon_apply(mu(x), w.p_prime, w.q_prime);
      for (double tt : {0.5, 1.0, 2.0, 3.5, 6.0, 8.0}) {
        std::vector<double> vals;
        for (const auto& pc : pieces) vals.push_back(pc.first);
        std::sort(vals.begin(), vals.end(), std::greater<>());
        double lhs = 0.0;
        for (int i = 0; i < static_cast<int>(vals.size()) && i < tt; ++i) lhs += vals[static_cast<std::size_t>(i)] * std::min(1.0, tt - i);
        EXPECT_LE(lhs, res.bound_factor * s.integral(tt) * (1.0 + 1e-8));
      }
      for (std::size_t al = 0; al < net.size(); ++al) EXPECT_GE(order_margin(net.apply(al, x), res.a), -1e-8 * res.a.operator_norm());
    }
  }
}

TEST(General, SplitAtOne) {
  Rng rng(6);
  const auto filt = Filtration::dyadic_matrix(3);
  const auto net = conditional_expectation_net(filt);
  const auto c = net_constants(net, kInfWindow);
  const auto x = random_with_spectrum(rng, filt.algebra(), {4.0, 3.0, 1.5, 0.7, 0.2, 0.1, 0.0, 0.0});
  const auto res = majorant_general(net, x, kInfWindow, c, {-40, 1e-8, true});
  EXPECT_TRUE(res.certificate.holds);
  EXPECT_GE(order_margin(x, *res.x_hat), -1e-9);
}

TEST(General, ScaleEquivariance) {
  Rng rng(7);
  const auto filt = Filtration::dyadic_matrix(2);
  const auto net = conditional_expectation_net(filt);
  const auto c = net_constants(net, kInfWindow);
  for (int t = 0; t < 10; ++t) {
    const auto x = random_psd(rng, filt.algebra());
    const auto a1 = majorant_general(net, x, kInfWindow, c).a;
    for (int m : {-2, 1, 3}) {
      const auto am = majorant_general(net, std::exp2(m) * x, kInfWindow, c).a;
      EXPECT_LT((am - std::exp2(m) * a1).max_abs_entry(), 1e-9 * std::exp2(m) * a1.operator_norm());
    }
  }
}

TEST(General, RejectsBadInput) {
  const auto filt = Filtration::dyadic_matrix(2);
  const auto net = conditional_expectation_net(filt);
  const auto c = net_constants(net, kInfWindow);
  EXPECT_THROW(majorant_general(net, TracialOperator::zero(filt.algebra()), kInfWindow, c), InputError);
  EXPECT_THROW(majorant_general(net, TracialOperator::diagonal(filt.algebra(), {1, -1, 0, 0}), kInfWindow, c), InputError);
  EXPECT_THROW(majorant_general(net, TracialOperator::identity(Algebra::matrix(3)), kInfWindow, c), AlgebraMismatch);
  EXPECT_THROW(majorant_for_projection(net, Projection::zero(filt.algebra()), kInfWindow, c), InputError);
}

TEST(NormBounds, Sandwich) {
  Rng rng(8);
  const auto filt = Filtration::dyadic_matrix(3);
  const auto net = conditional_expectation_net(filt);
  const auto c = net_constants(net, kInfWindow);
  for (const auto& space : {SpaceDescriptor::lp(3.0), SpaceDescriptor::lorentz(3.0, 2.0),
                            SpaceDescriptor::orlicz(OrliczFunction::power_mix(2.5, 4.0))}) {
    for (int t = 0; t < 5; ++t) {
      const auto x = random_psd(rng, filt.algebra());
      const auto nb = linf_norm_bounds(net, x, space, kInfWindow, c);
      EXPECT_LE(nb.lower, nb.upper * (1.0 + 1e-9));
      EXPECT_LE(nb.upper, nb.certified * (1.0 + 1e-8));
    }
  }
  EXPECT_THROW(linf_norm_bounds(net, random_psd(rng, filt.algebra()), SpaceDescriptor::lp(2.0), kInfWindow, c),
               WindowError);
  EXPECT_THROW(linf_norm_bounds(net, random_psd(rng, filt.algebra()), SpaceDescriptor::lp(3.0), kFiniteWindow,
                                net_constants(net, kFiniteWindow)),
               WindowError);
}

TEST(Orlicz, MomentBound) {
  Rng rng(9);
  const auto filt = Filtration::dyadic_matrix(3);
  const auto net = conditional_expectation_net(filt);
  const auto w = ExponentWindow::make(1.0, 1.5, kInf);
  const auto c = net_constants(net, w);
  const double bound = std::pow(4.0 * c.kappa * c.K * calderon_lr_bound(2.0, 1.5, kInf), 2.0);
  for (int t = 0; t < 10; ++t) {
    const auto m = orlicz_moment_check(net, random_psd(rng, filt.algebra()), OrliczFunction::power(2.0), w, c);
    EXPECT_LE(m.ratio, bound);
    EXPECT_GE(m.ratio, 1.0 - 1e-9);
  }
  EXPECT_THROW(orlicz_moment_check(net, random_psd(rng, filt.algebra()), OrliczFunction::power(1.0), w, c), WindowError);
}

TEST(NegativeControl, SquaringMapBreaksDomination) {
  Rng rng(10);
  const auto a = Algebra::matrix(4);
  const auto net = squaring_net(a);
  const auto c = net_constants(net, kInfWindow);
  const auto f = random_projection(rng, a, 2);
  EXPECT_NO_THROW(majorant_for_projection(net, f, kInfWindow, c));
  EXPECT_THROW(majorant_general(net, std::exp2(8) * f.op(), kInfWindow, c), CertificateViolation);
}
