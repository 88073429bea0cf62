#pragma once

// Majorants for maximal nets of restricted weak types (p,p) and (q,q):
// interpolation constants, the projection ladder, its commutative variant,
// the dyadic-discretization majorant for general positive operators, and
// norm/moment bounds built from the majorant.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ncmax/errors.hpp"
#include "ncmax/nets.hpp"
#include "ncmax/spaces.hpp"
#include "ncmax/step_function.hpp"
#include "ncmax/tolerance.hpp"
#include "ncmax/tracial.hpp"

namespace ncmax {

/// (p, p', q', q) with 1 <= p < p' < q' < q <= inf, or q = q' = inf.
struct ExponentWindow {
  double p = 1.0;
  double p_prime = 2.0;
  double q_prime = kInf;
  double q = kInf;

  static ExponentWindow make(double p, double p_prime, double q, double q_prime = kInf) {
    ExponentWindow w{p, p_prime, std::isinf(q) ? kInf : q_prime, q};
    w.validate();
    return w;
  }

  bool q_infinite() const { return std::isinf(q); }

  void validate() const {
    std::ostringstream os;
    os << "inadmissible exponent window (p=" << p << ", p'=" << p_prime << ", q'=" << q_prime << ", q=" << q << ")";
    if (!(p >= 1.0) || !(p < p_prime) || !std::isfinite(p_prime)) throw WindowError(os.str() + ": need 1 <= p < p' < inf");
    if (q_infinite()) {
      if (!std::isinf(q_prime)) throw WindowError(os.str() + ": q = inf forces q' = inf");
    } else if (!(p_prime < q_prime) || !(q_prime < q)) {
      throw WindowError(os.str() + ": need p' < q' < q");
    }
  }
};

struct InterpolationConstants {
  double c_p = 1.0;
  double c_q = 1.0;  // C_inf when q = inf
  double kappa = 0.0;
  double gamma = 0.0;
  double delta = 0.0;  // 0 when q = inf
  double K = 0.0;
};

/// sum_{k<=0} 2^{(k-1)(1-p/p')} = 1 / (2^{1-p/p'} - 1)
inline double gamma_constant(double p, double p_prime) { return 1.0 / (std::exp2(1.0 - p / p_prime) - 1.0); }

/// sum_{k>0} 2^{(k-1)(1-q/q')} = 1 / (1 - 2^{1-q/q'})
inline double delta_constant(double q, double q_prime) { return 1.0 / (1.0 - std::exp2(1.0 - q / q_prime)); }

inline InterpolationConstants constants(const ExponentWindow& w, double c_p, double c_q) {
  w.validate();
  if (!(c_p > 0.0) || !(c_q > 0.0)) throw ConfigError("weak-type constants must be positive");
  InterpolationConstants c;
  c.c_p = c_p;
  c.c_q = c_q;
  const double ap = c_p * std::pow(1.0 - std::exp2(-w.p), -1.0 / w.p);
  c.gamma = gamma_constant(w.p, w.p_prime);
  if (w.q_infinite()) {
    c.kappa = std::max(ap, c_q);
    c.delta = 0.0;
    c.K = 4.0 * c.gamma;
  } else {
    const double aq = c_q * std::pow(1.0 - std::exp2(-w.q), -1.0 / w.q);
    c.kappa = std::exp2(1.0 / w.p) * std::max(ap, aq);
    c.delta = delta_constant(w.q, w.q_prime);
    c.K = 4.0 * std::max(c.gamma, c.delta);
  }
  return c;
}

/// Constants read off the net: C_p, C_q from its restricted witness
/// generators, C_inf from its uniform bound when q = inf.
inline InterpolationConstants net_constants(const MaximalNet& net, const ExponentWindow& w) {
  const double cp = net.restricted_witness(w.p)->constant();
  double cq;
  if (w.q_infinite()) {
    if (!net.uniform_bound()) throw ConfigError(net.name() + ": q = inf needs a uniform bound C_inf");
    cq = *net.uniform_bound();
  } else {
    cq = net.restricted_witness(w.q)->constant();
  }
  return constants(w, cp, cq);
}

struct MajorantOptions {
  int k_floor = -40;
  double tol = 1e-8;  // certificate slack, relative
  bool split = false;
};

struct LadderStep {
  int k = 0;
  Projection e;
  Projection d;
  double coefficient = 0.0;
};

/// Certificate outcomes. order_margins[a] = min eigenvalue of (a - T_a(x)) / ||a||;
/// mu_excess = max relative excess of mu(a) over its bound (<= 0 when it holds).
struct CertificateRecord {
  std::vector<double> order_margins;
  double mu_excess = -kInf;
  double mu_excess_t = 0.0;
  double trace_bound_excess = -kInf;
  double commutation_residue = 0.0;
  double sandwich_margin = kInf;
  double identity_error = 0.0;
  bool holds = true;
};

/// One dyadic group: levels k_lo..k_hi share f.
struct DyadicGroup {
  int k_lo = 0;
  int k_hi = 0;
  double coefficient = 0.0;  // sum of 2^k over the group
  double tau_f = 0.0;
};

struct MajorantResult {
  enum class Kind { kProjection, kCommutative, kGeneral };
  Kind kind = Kind::kProjection;
  TracialOperator a;
  std::vector<LadderStep> ladder;  // increasing k
  std::optional<Projection> e_minus_inf;
  double e_minus_inf_coefficient = 0.0;
  std::optional<Projection> top;  // e_0^perp when q = inf
  double top_coefficient = 0.0;
  ExponentWindow window;
  InterpolationConstants constants;
  double bound_factor = 0.0;  // kappa*K, 4*kappa or 4*kappa*K
  int k_max = 0;
  int k_floor = 0;
  std::vector<DyadicGroup> groups;
  std::optional<TracialOperator> x_hat;
  CertificateRecord certificate;
};

namespace detail {

inline std::string describe_window(const ExponentWindow& w) {
  std::ostringstream os;
  os << "(p=" << w.p << ", p'=" << w.p_prime << ", q'=" << w.q_prime << ", q=" << w.q << ")";
  return os.str();
}

inline void require_nonzero_projection(const MaximalNet& net, const Projection& f) {
  if (!(f.algebra() == net.domain())) throw AlgebraMismatch("projection is not in the net's domain algebra");
  if (f.is_zero()) throw InputError("majorant needs a nonzero projection");
}

inline double max_output_norm(const MaximalNet& net, const TracialOperator& x) {
  double m = 0.0;
  for (std::size_t a = 0; a < net.size(); ++a) m = std::max(m, net.apply(a, x).operator_norm());
  return m;
}

/// Certificate (i): a - T_a(x) >= -tol * ||a|| for every map.
inline void certify_order(const MaximalNet& net, const TracialOperator& x, const TracialOperator& a, double tol,
                          CertificateRecord& rec) {
  const double an = std::max(a.operator_norm(), std::numeric_limits<double>::min());
  rec.order_margins.clear();
  for (std::size_t k = 0; k < net.size(); ++k) {
    const auto tx = net.apply(k, x).hermitian_part();
    const double m = order_margin(tx, a) / an;
    rec.order_margins.push_back(m);
    if (m < -tol) {
      rec.holds = false;
      std::ostringstream os;
      os.precision(17);
      os << net.name() << ": majorant fails to dominate map " << k << " (min eigenvalue of a - T(x) is " << m * an
         << ", ||a|| = " << an << ")";
      throw CertificateViolation(os.str());
    }
  }
}

/// Pointwise bound mu_t(a) <= factor * theta_{s,r}(t / tau) checked at the right end of
/// every piece of mu(a) (theta is continuous and decreasing, so this is the worst point).
inline void certify_theta_bound(const StepFunction& mu_a, double factor, double s, double r, double tau, double tol,
                                CertificateRecord& rec) {
  for (std::size_t j = 0; j < mu_a.size(); ++j) {
    const double t = mu_a.breakpoints()[j];
    const double bound = factor * theta(s, r, t / tau);
    const double excess = (mu_a.values()[j] - bound) / bound;
    if (excess > rec.mu_excess) {
      rec.mu_excess = excess;
      rec.mu_excess_t = t;
    }
  }
  if (rec.mu_excess > tol) {
    rec.holds = false;
    std::ostringstream os;
    os.precision(17);
    os << "rearrangement bound violated at t=" << rec.mu_excess_t << ": relative excess " << rec.mu_excess;
    throw CertificateViolation(os.str());
  }
}

inline void record_trace_bound(double lost, double bound, double tol, int k, CertificateRecord& rec) {
  const double excess = (lost - bound) / std::max(bound, 1e-300);
  rec.trace_bound_excess = std::max(rec.trace_bound_excess, excess);
  if (lost > bound * (1.0 + tol) + 1e-12) {
    rec.holds = false;
    std::ostringstream os;
    os.precision(17);
    os << "ladder trace bound violated at k=" << k << ": sigma(e_k^perp)=" << lost << " > " << bound;
    throw CertificateViolation(os.str());
  }
}

struct Ladder {
  std::vector<std::pair<int, Projection>> e;  // (k, e_k), increasing k, last one has e = 1 (or e_0 when q = inf)
  std::optional<Projection> e_minus_inf;
  int k_max = 0;
  int k_floor = 0;
};

/// e_k from rescaled witnesses e~^{(2^l)} = e^{(kappa 2^l)}: for k > 0 the meet of
/// q-witnesses over l >= k; for k <= 0 additionally the p-witnesses over 0 >= l >= k.
/// Witnesses for 2^l >= max ||T~(f)|| are replaced by 1. Stops at k_floor or at 0.
inline Ladder build_ladder(const MaximalNet& net, const Projection& f, const ExponentWindow& w,
                           const InterpolationConstants& c, int k_floor) {
  if (k_floor > 0) throw ConfigError("k_floor must be <= 0");
  const auto& range = net.range();
  const double top = max_output_norm(net, f.op()) / c.kappa;
  int k_max = 1;
  while (std::exp2(k_max) < top) ++k_max;
  auto gen_p = net.restricted_witness(w.p);
  std::shared_ptr<WitnessGenerator> gen_q;
  if (!w.q_infinite()) gen_q = net.restricted_witness(w.q);

  Ladder lad;
  lad.k_max = k_max;
  lad.k_floor = k_floor;
  std::vector<std::pair<int, Projection>> desc;
  Projection cur = Projection::identity(range);
  if (!w.q_infinite()) {
    desc.emplace_back(k_max, cur);
    for (int k = k_max - 1; k >= 1; --k) {
      cur = lattice_meet(cur, (*gen_q)(f.op(), c.kappa * std::exp2(k)));
      desc.emplace_back(k, cur);
    }
    cur = lattice_meet(cur, (*gen_q)(f.op(), c.kappa));
  }
  cur = lattice_meet(cur, (*gen_p)(f.op(), c.kappa));
  desc.emplace_back(0, cur);
  int k = 0;
  while (k > k_floor && !cur.is_zero()) {
    --k;
    cur = lattice_meet(cur, (*gen_p)(f.op(), c.kappa * std::exp2(k)));
    desc.emplace_back(k, cur);
  }
  lad.k_floor = k;
  if (!cur.is_zero()) lad.e_minus_inf = cur;
  std::reverse(desc.begin(), desc.end());
  lad.e = std::move(desc);
  return lad;
}

inline Projection difference(const Projection& upper, const Projection& lower) {
  return Projection::from_operator((upper.op() - lower.op()).hermitian_part());
}

}  // namespace detail

/// Majorant for a projection f: T_a(f) <= a for all a and
/// mu_t(a) <= kappa K theta_{p',q'}(t / tau(f)).
inline MajorantResult majorant_for_projection(const MaximalNet& net, const Projection& f, const ExponentWindow& w,
                                              const InterpolationConstants& c, const MajorantOptions& opt = {}) {
  w.validate();
  detail::require_nonzero_projection(net, f);
  const double tau = f.trace();
  auto lad = detail::build_ladder(net, f, w, c, opt.k_floor);

  MajorantResult res;
  res.kind = MajorantResult::Kind::kProjection;
  res.window = w;
  res.constants = c;
  res.bound_factor = c.kappa * c.K;
  res.k_max = lad.k_max;
  res.k_floor = lad.k_floor;
  auto coef = [&](int k) {
    const double base = k <= 0 ? std::exp2((k - 1) * w.p / w.p_prime) : std::exp2((k - 1) * w.q / w.q_prime);
    return c.kappa * c.K * base;
  };

  auto a = TracialOperator::zero(net.range());
  for (std::size_t i = 1; i < lad.e.size(); ++i) {
    const auto& [k, ek] = lad.e[i];
    LadderStep st{k, ek, detail::difference(ek, lad.e[i - 1].second), coef(k)};
    a += st.coefficient * st.d.op();
    res.ladder.push_back(std::move(st));
  }
  // lowest rung: e_{k_floor} itself plays d_{k_floor}, or is 0 when the meets died out
  if (lad.e_minus_inf) {
    res.e_minus_inf = lad.e_minus_inf;
    res.e_minus_inf_coefficient = coef(lad.k_floor);
    a += res.e_minus_inf_coefficient * lad.e_minus_inf->op();
  }
  if (w.q_infinite()) {
    const auto& e0 = lad.e.back().second;
    res.top = e0.complement();
    res.top_coefficient = 2.0 * c.kappa;
    a += res.top_coefficient * res.top->op();
  }
  res.a = a.hermitian_part();

  // sigma(e_k^perp) <= 2^{-kq} tau(f) (k > 0), 2^{-kp} tau(f) (k <= 0)
  for (const auto& [k, ek] : lad.e) {
    const double bound = k > 0 ? std::exp2(-k * w.q) * tau : std::exp2(-k * w.p) * tau;
    detail::record_trace_bound(ek.complement().trace(), bound, opt.tol, k, res.certificate);
  }
  detail::certify_order(net, f.op(), res.a, opt.tol, res.certificate);
  detail::certify_theta_bound(mu(res.a), res.bound_factor, w.p_prime, w.q_prime, tau, opt.tol, res.certificate);
  return res;
}

/// Commutative-range majorant a = kappa * sum_k 2^{k+1} d_k with
/// mu_t(a) <= 4 kappa theta_{p,q}(t / tau(f)) (unprimed exponents).
inline MajorantResult majorant_commutative(const MaximalNet& net, const Projection& f, const ExponentWindow& w,
                                           const InterpolationConstants& c, const MajorantOptions& opt = {}) {
  w.validate();
  detail::require_nonzero_projection(net, f);
  const double tau = f.trace();
  auto lad = detail::build_ladder(net, f, w, c, opt.k_floor);
  if (w.q_infinite()) lad.e.emplace_back(1, Projection::identity(net.range()));

  MajorantResult res;
  res.kind = MajorantResult::Kind::kCommutative;
  res.window = w;
  res.constants = c;
  res.bound_factor = 4.0 * c.kappa;
  res.k_max = w.q_infinite() ? 1 : lad.k_max;
  res.k_floor = lad.k_floor;

  auto a = TracialOperator::zero(net.range());
  std::vector<TracialOperator> parts;
  for (std::size_t i = 1; i < lad.e.size(); ++i) {
    const auto& [k, ek] = lad.e[i];
    LadderStep st{k, ek, detail::difference(ek, lad.e[i - 1].second), c.kappa * std::exp2(k + 1)};
    a += st.coefficient * st.d.op();
    parts.push_back(st.d.op());
    res.ladder.push_back(std::move(st));
  }
  if (lad.e_minus_inf) {
    res.e_minus_inf = lad.e_minus_inf;
    res.e_minus_inf_coefficient = c.kappa * std::exp2(lad.k_floor + 1);
    a += res.e_minus_inf_coefficient * lad.e_minus_inf->op();
    parts.push_back(lad.e_minus_inf->op());
  }
  res.a = a.hermitian_part();

  // off-diagonal blocks d_k T d_l must vanish
  for (std::size_t al = 0; al < net.size(); ++al) {
    const auto tf = net.apply(al, f.op());
    auto diag = TracialOperator::zero(net.range());
    for (const auto& d : parts) diag += d * tf * d;
    const double residue = (tf - diag).max_abs_entry() / std::max(1.0, tf.max_abs_entry());
    res.certificate.commutation_residue = std::max(res.certificate.commutation_residue, residue);
  }
  if (res.certificate.commutation_residue > 1e-9) {
    res.certificate.holds = false;
    std::ostringstream os;
    os.precision(17);
    os << net.name() << ": ladder does not diagonalize T(f) (off-diagonal residue "
       << res.certificate.commutation_residue << "); range is not commutative";
    throw CertificateViolation(os.str());
  }
  detail::certify_order(net, f.op(), res.a, opt.tol, res.certificate);
  detail::certify_theta_bound(mu(res.a), res.bound_factor, w.p, w.q, tau, opt.tol, res.certificate);
  return res;
}

/// Dyadic discretization data of a PSD x: groups of consecutive k sharing
/// f_k = lambda_(2^k, inf)(x), each with its coefficient sum_k 2^k.
struct DyadicDiscretization {
  std::vector<std::pair<DyadicGroup, Projection>> groups;  // decreasing k
  TracialOperator x_hat;
};

inline DyadicDiscretization dyadic_discretization(const TracialOperator& x) {
  const auto s = spectral_decompose(x);
  const double top = s.max_eigenvalue();
  const double scale = std::max(1.0, std::abs(top));
  if (s.min_eigenvalue() < -1e-10 * scale) throw InputError("majorant_general: x must be positive semidefinite");
  double low = kInf;
  for (const auto& b : s.blocks) {
    for (Eigen::Index j = 0; j < b.values.size(); ++j) {
      if (b.values(j) > 1e-13 * scale) low = std::min(low, b.values(j));
    }
  }
  if (std::isinf(low)) throw InputError("majorant_general: x must be nonzero");
  DyadicDiscretization out{{}, TracialOperator::zero(x.algebra())};
  // f_k = 0 once 2^k >= top; f_k = supp(x) once 2^k < low
  int k = static_cast<int>(std::ceil(std::log2(top))) + 1;
  while (!spectral_projection(s, std::exp2(k), kInf).is_zero()) ++k;
  --k;
  const int k_bottom = static_cast<int>(std::floor(std::log2(low))) - 2;
  while (k > k_bottom) {
    auto f = spectral_projection(s, std::exp2(k), kInf);
    int lo = k;
    while (lo - 1 > k_bottom && spectral_projection(s, std::exp2(lo - 1), kInf).total_rank() == f.total_rank()) --lo;
    DyadicGroup g{lo, k, std::exp2(k + 1) - std::exp2(lo), f.trace()};
    k = lo - 1;
    if (!f.is_zero()) out.groups.emplace_back(g, std::move(f));
  }
  // everything at or below k_bottom equals supp(x): sum_{k <= k_bottom} 2^k = 2^{k_bottom+1}
  auto supp = spectral_projection(s, 1e-13 * scale, kInf);
  if (!out.groups.empty() && out.groups.back().second.total_rank() == supp.total_rank()) {
    out.groups.back().first.k_lo = std::numeric_limits<int>::min();
    out.groups.back().first.coefficient = std::exp2(out.groups.back().first.k_hi + 1);
  } else {
    out.groups.emplace_back(DyadicGroup{std::numeric_limits<int>::min(), k_bottom, std::exp2(k_bottom + 1), supp.trace()},
                            std::move(supp));
  }
  for (const auto& [g, f] : out.groups) out.x_hat += g.coefficient * f.op();
  out.x_hat = out.x_hat.hermitian_part();
  return out;
}

namespace detail {

struct GeneralPart {
  TracialOperator a;
  std::vector<DyadicGroup> groups;
  TracialOperator x_hat;
};

inline GeneralPart general_part(const MaximalNet& net, const TracialOperator& x, const ExponentWindow& w,
                                const InterpolationConstants& c, const MajorantOptions& opt,
                                std::map<std::string, TracialOperator>& memo, CertificateRecord& rec) {
  auto disc = dyadic_discretization(x);
  GeneralPart out{TracialOperator::zero(net.range()), {}, disc.x_hat};
  // x <= x_hat <= 2x
  const double xn = std::max(x.operator_norm(), 1e-300);
  const double m1 = order_margin(x, disc.x_hat) / xn;
  const double m2 = order_margin(disc.x_hat, 2.0 * x) / xn;
  rec.sandwich_margin = std::min({rec.sandwich_margin, m1, m2});
  if (std::min(m1, m2) < -opt.tol) {
    rec.holds = false;
    throw CertificateViolation("dyadic discretization violates x <= x_hat <= 2x");
  }
  // mu(x_hat) = sum_k 2^k mu(f_k)
  StepFunction rhs = StepFunction::indicator(0.0);
  for (const auto& [g, f] : disc.groups) rhs = rhs + StepFunction::indicator(f.trace(), g.coefficient);
  const auto lhs = mu(disc.x_hat);
  double err = 0.0;
  for (double t : lhs.breakpoints()) err = std::max(err, std::abs(lhs.integral(t) - rhs.integral(t)));
  for (double t : rhs.breakpoints()) err = std::max(err, std::abs(lhs.integral(t) - rhs.integral(t)));
  err /= std::max(rhs.total_integral(), 1e-300);
  rec.identity_error = std::max(rec.identity_error, err);
  if (err > 1e-9) {
    rec.holds = false;
    throw CertificateViolation("rearrangement identity for the dyadic discretization fails");
  }
  for (const auto& [g, f] : disc.groups) {
    const auto key = operator_key(f.op(), 0.0);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, majorant_for_projection(net, f, w, c, opt).a).first;
    out.a += g.coefficient * it->second;
    out.groups.push_back(g);
  }
  out.a = out.a.hermitian_part();
  return out;
}

}  // namespace detail

/// Majorant for PSD x: a = sum_k 2^k a(f_k) with T_a(x) <= a and
/// mu(a) <<(sub) 4 kappa K S_{p',q'} mu(x). With `split`, x is cut at
/// eigenvalue 1 and the two parts are majorized separately.
inline MajorantResult majorant_general(const MaximalNet& net, const TracialOperator& x, const ExponentWindow& w,
                                       const InterpolationConstants& c, const MajorantOptions& opt = {}) {
  w.validate();
  if (!(x.algebra() == net.domain())) throw AlgebraMismatch("operator is not in the net's domain algebra");
  if (!x.is_hermitian(1e-10)) throw InputError("majorant_general: x must be Hermitian");
  const auto xh = x.hermitian_part();

  MajorantResult res;
  res.kind = MajorantResult::Kind::kGeneral;
  res.window = w;
  res.constants = c;
  res.bound_factor = 4.0 * c.kappa * c.K;
  res.k_floor = opt.k_floor;
  std::map<std::string, TracialOperator> memo;
  if (opt.split) {
    const auto s = spectral_decompose(xh);
    const auto x1 = s.apply([](double v) { return v > 1.0 ? v : 0.0; });
    const auto x2 = s.apply([](double v) { return v > 1.0 ? 0.0 : std::max(v, 0.0); });
    res.a = TracialOperator::zero(net.range());
    res.x_hat = TracialOperator::zero(net.domain());
    for (const auto* part : {&x1, &x2}) {
      if (part->max_abs_entry() <= 1e-13 * std::max(1.0, xh.max_abs_entry())) continue;
      auto gp = detail::general_part(net, *part, w, c, opt, memo, res.certificate);
      res.a += gp.a;
      *res.x_hat += gp.x_hat;
      res.groups.insert(res.groups.end(), gp.groups.begin(), gp.groups.end());
    }
  } else {
    auto gp = detail::general_part(net, xh, w, c, opt, memo, res.certificate);
    res.a = gp.a;
    res.x_hat = gp.x_hat;
    res.groups = std::move(gp.groups);
  }
  res.a = res.a.hermitian_part();

  detail::certify_order(net, xh, res.a, opt.tol, res.certificate);
  const auto s_mu = calderon_apply(mu(xh), w.p_prime, w.q_prime);
  const auto chk = check_submajorization(s_mu, res.bound_factor, mu(res.a), Tolerance{opt.tol, 1e-12});
  res.certificate.mu_excess = chk.worst_excess;
  res.certificate.mu_excess_t = chk.worst_t;
  if (!chk.holds) {
    res.certificate.holds = false;
    std::ostringstream os;
    os.precision(17);
    os << net.name() << ": submajorization bound violated at t=" << chk.worst_t << " (relative excess "
       << chk.worst_excess << ")";
    throw CertificateViolation(os.str());
  }
  return res;
}

/// Sandwich for the l-infinity valued norm of (T_a(x))_a:
/// lower = max_a ||T_a(x)||_E <= upper = ||a||_E <= certified = 4 kappa K ||S_{p',q'} mu(x)||_E.
struct NormBounds {
  double lower = 0.0;
  double upper = 0.0;
  double certified = kInf;
};

inline void check_space_window(const SpaceDescriptor& space, const ExponentWindow& w) {
  const auto& idx = space.boyd_indices();
  if (!idx) throw ConfigError("space " + space.describe() + " has no declared Boyd indices");
  const auto [pe, qe] = *idx;
  if (!(w.p_prime < pe) || !(w.q_infinite() || qe < w.q_prime)) {
    std::ostringstream os;
    os << "window " << detail::describe_window(w) << " incompatible with Boyd indices (" << pe << ", " << qe
       << ") of " << space.describe();
    throw WindowError(os.str());
  }
}

inline NormBounds linf_norm_bounds(const MaximalNet& net, const TracialOperator& x, const SpaceDescriptor& space,
                                   const ExponentWindow& w, const InterpolationConstants& c,
                                   const MajorantOptions& opt = {}, const MajorantResult* pre = nullptr) {
  check_space_window(space, w);
  std::optional<MajorantResult> own;
  if (!pre) {
    own = majorant_general(net, x, w, c, opt);
    pre = &*own;
  }
  NormBounds nb;
  for (std::size_t a = 0; a < net.size(); ++a) nb.lower = std::max(nb.lower, norm(mu(net.apply(a, x)), space));
  nb.upper = norm(mu(pre->a), space);
  nb.certified = pre->bound_factor * norm(calderon_apply(mu(x.hermitian_part()), w.p_prime, w.q_prime), space);
  if (!kDefaultTolerance.leq(nb.lower, nb.upper) || !Tolerance{opt.tol, 1e-12}.leq(nb.lower, nb.upper)) {
    throw CertificateViolation("norm sandwich violated: lower bound exceeds majorant norm");
  }
  if (space.fully_symmetric() && !Tolerance{opt.tol, 1e-12}.leq(nb.upper, nb.certified)) {
    std::ostringstream os;
    os.precision(17);
    os << "majorant norm " << nb.upper << " exceeds certified bound " << nb.certified << " in " << space.describe();
    throw CertificateViolation(os.str());
  }
  return nb;
}

struct MomentCheck {
  double lhs = 0.0;  // sigma(Phi(a))
  double rhs = 0.0;  // tau(Phi(x))
  double ratio = 0.0;
};

inline MomentCheck orlicz_moment_check(const MaximalNet& net, const TracialOperator& x, const OrliczFunction& phi,
                                       const ExponentWindow& w, const InterpolationConstants& c,
                                       const MajorantOptions& opt = {}) {
  if (const auto& idx = phi.indices()) {
    if (!(w.p < idx->first) || !(w.q_infinite() || idx->second < w.q)) {
      std::ostringstream os;
      os << "Orlicz indices (" << idx->first << ", " << idx->second << ") of " << phi.name()
         << " incompatible with window " << detail::describe_window(w);
      throw WindowError(os.str());
    }
  }
  const auto res = majorant_general(net, x, w, c, opt);
  MomentCheck m;
  m.lhs = phi_trace(res.a, phi);
  m.rhs = phi_trace(x.hermitian_part(), phi);
  m.ratio = m.lhs / m.rhs;
  if (!std::isfinite(m.ratio)) throw CertificateViolation("Orlicz moment ratio is not finite");
  return m;
}

}  // namespace ncmax
