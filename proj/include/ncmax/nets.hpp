#pragma once

// Maximal nets: finite ordered families of positive maps between tracial
// algebras, with weak-type witness generators. Concrete nets are towers of
// conditional expectations (noncommutative martingales) and pinchings.

#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ncmax/errors.hpp"
#include "ncmax/random.hpp"
#include "ncmax/tracial.hpp"

namespace ncmax {

using OperatorMap = std::function<TracialOperator(const TracialOperator&)>;

// ---------------------------------------------------------------------------
// Subalgebras given by site groups

/// A group of sites (block, index) carrying a copy of M_m repeated k times:
/// sites are listed copy-major, sites[c*m + a] is row a of copy c, and every
/// copy must lie inside a single block. m = sites.size() gives a full matrix
/// block (pinching), m = 1 gives scalars (weighted averaging).
struct SiteGroup {
  int m = 1;
  std::vector<std::pair<int, int>> sites;

  int copies() const { return static_cast<int>(sites.size()) / m; }

  static SiteGroup full(int block, const std::vector<int>& indices) {
    SiteGroup g;
    g.m = static_cast<int>(indices.size());
    for (int i : indices) g.sites.emplace_back(block, i);
    return g;
  }
  static SiteGroup average(std::vector<std::pair<int, int>> sites) {
    SiteGroup g;
    g.m = 1;
    g.sites = std::move(sites);
    return g;
  }
};

/// A unital *-subalgebra described by groups that partition all sites.
using SubalgebraLevel = std::vector<SiteGroup>;

inline void validate_level(const Algebra& a, const SubalgebraLevel& level) {
  std::vector<std::vector<int>> seen;
  for (const auto& b : a.blocks()) seen.emplace_back(static_cast<std::size_t>(b.dim), 0);
  for (const auto& g : level) {
    if (g.m <= 0 || g.sites.empty() || g.sites.size() % static_cast<std::size_t>(g.m) != 0)
      throw ConfigError("site group size must be a positive multiple of m");
    for (int c = 0; c < g.copies(); ++c) {
      const int blk = g.sites[static_cast<std::size_t>(c * g.m)].first;
      for (int r = 0; r < g.m; ++r) {
        const auto [b, i] = g.sites[static_cast<std::size_t>(c * g.m + r)];
        if (b < 0 || static_cast<std::size_t>(b) >= a.num_blocks() || i < 0 || i >= a.dim(static_cast<std::size_t>(b)))
          throw ConfigError("site outside the algebra");
        if (b != blk) throw ConfigError("every copy of a site group must lie inside one block");
        ++seen[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
      }
    }
  }
  for (const auto& blk : seen) {
    for (int s : blk) {
      if (s != 1) throw ConfigError("site groups must partition the sites (complete and disjoint)");
    }
  }
}

/// Trace-preserving conditional expectation onto the subalgebra of `level`.
inline TracialOperator level_expectation(const SubalgebraLevel& level, const TracialOperator& x) {
  const auto& a = x.algebra();
  auto out = TracialOperator::zero(a);
  for (const auto& g : level) {
    const int k = g.copies();
    Matrix avg = Matrix::Zero(g.m, g.m);
    double wsum = 0.0;
    for (int c = 0; c < k; ++c) {
      const int blk = g.sites[static_cast<std::size_t>(c * g.m)].first;
      const double w = a.weight(static_cast<std::size_t>(blk));
      wsum += w;
      for (int r = 0; r < g.m; ++r) {
        for (int s = 0; s < g.m; ++s) {
          avg(r, s) += w * x.block(static_cast<std::size_t>(blk))(g.sites[static_cast<std::size_t>(c * g.m + r)].second,
                                                                g.sites[static_cast<std::size_t>(c * g.m + s)].second);
        }
      }
    }
    avg /= wsum;
    for (int c = 0; c < k; ++c) {
      const int blk = g.sites[static_cast<std::size_t>(c * g.m)].first;
      for (int r = 0; r < g.m; ++r) {
        for (int s = 0; s < g.m; ++s) {
          out.block(static_cast<std::size_t>(blk))(g.sites[static_cast<std::size_t>(c * g.m + r)].second,
                                                   g.sites[static_cast<std::size_t>(c * g.m + s)].second) = avg(r, s);
        }
      }
    }
  }
  return out;
}

/// Increasing sequence of subalgebras N_1 ⊂ N_2 ⊂ ... with their
/// trace-preserving conditional expectations E_n.
class Filtration {
 public:
  Filtration(Algebra algebra, std::vector<SubalgebraLevel> levels)
      : algebra_(std::move(algebra)), levels_(std::move(levels)) {
    if (levels_.empty()) throw ConfigError("filtration needs at least one level");
    for (const auto& l : levels_) validate_level(algebra_, l);
    check_nested();
  }

  /// One level equal to the whole algebra; E_1 is the identity.
  static Filtration trivial(const Algebra& a) {
    SubalgebraLevel l;
    for (std::size_t b = 0; b < a.num_blocks(); ++b) {
      std::vector<int> idx(static_cast<std::size_t>(a.dim(b)));
      for (int i = 0; i < a.dim(b); ++i) idx[static_cast<std::size_t>(i)] = i;
      l.push_back(SiteGroup::full(static_cast<int>(b), idx));
    }
    return {a, {l}};
  }

  /// M_{2^depth}: level j is block-diagonal with full blocks of size 2^j,
  /// j = first .. depth (the last level is the whole matrix algebra).
  static Filtration dyadic_matrix(int depth, int first = 0, double weight = 1.0) {
    const int n = 1 << depth;
    const auto a = Algebra::matrix(n, weight);
    std::vector<SubalgebraLevel> levels;
    for (int j = first; j <= depth; ++j) {
      const int size = 1 << j;
      SubalgebraLevel l;
      for (int start = 0; start < n; start += size) {
        std::vector<int> idx;
        for (int i = start; i < start + size; ++i) idx.push_back(i);
        l.push_back(SiteGroup::full(0, idx));
      }
      levels.push_back(std::move(l));
    }
    return {a, std::move(levels)};
  }

  /// Classical dyadic martingale on 2^depth atoms (1x1 blocks): level j
  /// averages over consecutive groups of 2^{depth-j} atoms, j = 0 .. depth.
  static Filtration dyadic_atoms(int depth, std::vector<double> weights = {}) {
    const int n = 1 << depth;
    if (weights.empty()) weights.assign(static_cast<std::size_t>(n), 1.0);
    if (static_cast<int>(weights.size()) != n) throw ConfigError("dyadic_atoms: need 2^depth weights");
    const auto a = Algebra::atoms(weights);
    std::vector<SubalgebraLevel> levels;
    for (int j = 0; j <= depth; ++j) {
      const int size = 1 << (depth - j);
      SubalgebraLevel l;
      for (int start = 0; start < n; start += size) {
        std::vector<std::pair<int, int>> sites;
        for (int i = start; i < start + size; ++i) sites.emplace_back(i, 0);
        l.push_back(SiteGroup::average(std::move(sites)));
      }
      levels.push_back(std::move(l));
    }
    return {a, std::move(levels)};
  }

  const Algebra& algebra() const { return algebra_; }
  const std::vector<SubalgebraLevel>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }

  /// E_n(x), n zero-based.
  TracialOperator expectation(std::size_t n, const TracialOperator& x) const {
    if (!(x.algebra() == algebra_)) throw AlgebraMismatch("conditional expectation applied outside its algebra");
    return level_expectation(levels_.at(n), x);
  }

 private:
  // N_n ⊂ N_{n+1}: E_{n+1} fixes E_n of every matrix unit.
  void check_nested() const {
    for (std::size_t n = 0; n + 1 < levels_.size(); ++n) {
      for (std::size_t b = 0; b < algebra_.num_blocks(); ++b) {
        const int d = algebra_.dim(b);
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) {
            auto u = TracialOperator::zero(algebra_);
            u.block(b)(i, j) = 1.0;
            const auto en = level_expectation(levels_[n], u);
            const auto enn = level_expectation(levels_[n + 1], en);
            if ((en - enn).max_abs_entry() > 1e-12)
              throw ConfigError("filtration is not nested: level " + std::to_string(n + 2) +
                                " does not contain level " + std::to_string(n + 1));
          }
        }
      }
    }
  }

  Algebra algebra_;
  std::vector<SubalgebraLevel> levels_;
};

// ---------------------------------------------------------------------------
// Witnesses

namespace detail {

inline std::string operator_key(const TracialOperator& x, double theta) {
  std::string key(reinterpret_cast<const char*>(&theta), sizeof theta);
  for (const auto& b : x.blocks()) key.append(reinterpret_cast<const char*>(b.data()), sizeof(Complex) * static_cast<std::size_t>(b.size()));
  return key;
}

inline bool looks_like_projection(const TracialOperator& x) {
  if (!x.is_hermitian(1e-10)) return false;
  return (x * x - x).max_abs_entry() <= 1e-10;
}

}  // namespace detail

/// q_0 = 1, q_n = q_{n-1} ∧ chi_[0,theta](q_{n-1} T_n(x) q_{n-1}); returns q_N.
/// Each q_n compresses T_1(x), ..., T_n(x) below theta.
inline Projection sequential_witness(const std::vector<OperatorMap>& maps, const Algebra& range,
                                     const TracialOperator& x, double theta) {
  auto q = Projection::identity(range);
  for (const auto& t : maps) {
    const auto y = (q.op() * t(x) * q.op()).hermitian_part();
    q = lattice_meet(q, spectral_sublevel(y, theta));
    if (q.is_zero()) break;
  }
  return q;
}

/// Deterministic map (x, theta) -> e certifying the weak-type inequality
///   sigma(e^perp) <= (C_r / theta)^r ||x||_r^r  and  e T_a(x) e <= theta e  for all a.
/// Outputs are memoized per (x, theta) and every fresh output is verified.
class WitnessGenerator {
 public:
  using Raw = std::function<Projection(const TracialOperator&, double)>;
  enum class Domain { kPositive, kProjections };

  WitnessGenerator(std::shared_ptr<const std::vector<OperatorMap>> maps, Raw raw, double exponent,
                   double constant, Domain domain, std::string name)
      : maps_(std::move(maps)),
        raw_(std::move(raw)),
        exponent_(exponent),
        constant_(constant),
        domain_(domain),
        name_(std::move(name)) {
    if (!(exponent_ >= 1.0) || std::isinf(exponent_)) throw ConfigError("witness exponent must be finite and >= 1");
    if (!(constant_ > 0.0)) throw ConfigError("witness constant must be positive");
  }

  double exponent() const { return exponent_; }
  double constant() const { return constant_; }
  Domain domain() const { return domain_; }
  const std::string& name() const { return name_; }
  const Raw& raw() const { return raw_; }
  const std::shared_ptr<const std::vector<OperatorMap>>& maps() const { return maps_; }

  std::size_t cache_size() const {
    std::lock_guard lock(mutex_);
    return memo_.size();
  }
  void clear_cache() const {
    std::lock_guard lock(mutex_);
    memo_.clear();
  }

  Projection operator()(const TracialOperator& x, double theta) const {
    if (!(theta > 0.0)) throw DomainError("witness threshold must be positive");
    const auto key = detail::operator_key(x, theta);
    {
      std::lock_guard lock(mutex_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    auto e = raw_(x, theta);
    verify(x, theta, e);
    std::lock_guard lock(mutex_);
    return memo_.emplace(key, std::move(e)).first->second;
  }

  /// Checks both witness inequalities; throws CertificateViolation.
  void verify(const TracialOperator& x, double theta, const Projection& e) const {
    double norm_r;
    if (domain_ == Domain::kProjections) {
      if (!detail::looks_like_projection(x)) throw InputError(name_ + ": restricted witness needs a projection");
      norm_r = x.trace();
    } else {
      norm_r = std::pow(norm(mu(x), SpaceDescriptor::lp(exponent_)), exponent_);
    }
    const double budget = std::pow(constant_ / theta, exponent_) * norm_r;
    const double lost = e.complement().trace();
    if (!kDefaultTolerance.leq(lost, budget)) {
      std::ostringstream os;
      os.precision(17);
      os << name_ << ": trace bound violated at theta=" << theta << ": sigma(e^perp)=" << lost
         << " > (C/theta)^r ||x||^r=" << budget << " (C=" << constant_ << ", r=" << exponent_ << ")";
      throw CertificateViolation(os.str());
    }
    for (std::size_t a = 0; a < maps_->size(); ++a) {
      const auto y = (*maps_)[a](x);
      const auto c = (e.op() * y * e.op()).hermitian_part();
      const double margin = order_margin(c, theta * e.op());
      const double slack = 1e-8 * theta + 1e-13 * std::max(1.0, y.operator_norm());
      if (margin < -slack) {
        std::ostringstream os;
        os.precision(17);
        os << name_ << ": compression bound violated for map " << a << " at theta=" << theta
           << " (min eigenvalue of theta e - e T e = " << margin << ")";
        throw CertificateViolation(os.str());
      }
    }
  }

 private:
  std::shared_ptr<const std::vector<OperatorMap>> maps_;
  Raw raw_;
  double exponent_;
  double constant_;
  Domain domain_;
  std::string name_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, Projection> memo_;
};

/// Same witnesses and constants, restricted to projection inputs (for which
/// ||f||_r^r = tau(f)).
inline std::shared_ptr<WitnessGenerator> restricted_witness_from_mweak(const WitnessGenerator& gen) {
  return std::make_shared<WitnessGenerator>(gen.maps(), gen.raw(), gen.exponent(), gen.constant(),
                                            WitnessGenerator::Domain::kProjections, gen.name() + "/restricted");
}

// ---------------------------------------------------------------------------
// Nets

struct NetProperties {
  bool positive = true;
  bool sublinear = true;
  bool order_preserving = true;
};

/// Finite ordered family of maps T_a from M_+ to N_+ with declared weak-type data.
class MaximalNet {
 public:
  MaximalNet(Algebra domain, Algebra range, std::vector<OperatorMap> maps, NetProperties declared, std::string name)
      : domain_(std::move(domain)),
        range_(std::move(range)),
        maps_(std::make_shared<const std::vector<OperatorMap>>(std::move(maps))),
        declared_(declared),
        name_(std::move(name)) {
    if (maps_->empty()) throw ConfigError("a maximal net needs at least one map");
  }

  const Algebra& domain() const { return domain_; }
  const Algebra& range() const { return range_; }
  const std::shared_ptr<const std::vector<OperatorMap>>& maps() const { return maps_; }
  std::size_t size() const { return maps_->size(); }
  const NetProperties& declared() const { return declared_; }
  const std::string& name() const { return name_; }

  TracialOperator apply(std::size_t a, const TracialOperator& x) const {
    auto y = (*maps_)[a](x);
    if (!(y.algebra() == range_)) throw AlgebraMismatch("net map produced an operator outside the range algebra");
    return y;
  }

  /// Restricted weak type (inf, inf): sup_a ||T_a(f)|| <= C_inf for projections f.
  void set_uniform_bound(double c_inf) {
    if (!(c_inf > 0.0)) throw ConfigError("uniform bound must be positive");
    uniform_bound_ = c_inf;
  }
  const std::optional<double>& uniform_bound() const { return uniform_bound_; }

  void clear_witness_caches() const {
    std::lock_guard lock(*mutex_);
    for (const auto& g : generators_) g->clear_cache();
  }

  void add_witness(std::shared_ptr<WitnessGenerator> gen) {
    std::lock_guard lock(*mutex_);
    generators_.push_back(std::move(gen));
  }

  /// Witness generator of M-weak type (r, r), if declared.
  std::shared_ptr<WitnessGenerator> m_weak_witness(double r) const {
    std::lock_guard lock(*mutex_);
    for (const auto& g : generators_) {
      if (g->exponent() == r && g->domain() == WitnessGenerator::Domain::kPositive) return g;
    }
    return nullptr;
  }

  /// Witness generator of restricted weak type (r, r). Falls back to the
  /// restriction of an M-weak generator, and for r above a declared exponent
  /// r0 with a uniform bound C_inf, to the endpoint combination
  ///   e = 1 for theta >= C_inf, e = e_{r0} otherwise,  C_r = max(C_{r0}, C_inf).
  /// Throws ConfigError when no route exists.
  std::shared_ptr<WitnessGenerator> restricted_witness(double r) const {
    std::lock_guard lock(*mutex_);
    for (const auto& g : generators_) {
      if (g->exponent() == r && g->domain() == WitnessGenerator::Domain::kProjections) return g;
    }
    for (const auto& g : generators_) {
      if (g->exponent() == r && g->domain() == WitnessGenerator::Domain::kPositive) {
        auto out = restricted_witness_from_mweak(*g);
        generators_.push_back(out);
        return out;
      }
    }
    if (uniform_bound_) {
      std::shared_ptr<WitnessGenerator> base;
      for (const auto& g : generators_) {
        if (g->exponent() < r && (!base || g->exponent() > base->exponent())) base = g;
      }
      if (base) {
        const double c_inf = *uniform_bound_;
        auto base_raw = base->raw();
        const auto range = range_;
        auto raw = [base_raw, c_inf, range](const TracialOperator& f, double theta) {
          return theta >= c_inf ? Projection::identity(range) : base_raw(f, theta);
        };
        std::ostringstream name;
        name << base->name() << "+uniform->(" << r << "," << r << ")";
        auto out = std::make_shared<WitnessGenerator>(maps_, raw, r, std::max(base->constant(), c_inf),
                                                      WitnessGenerator::Domain::kProjections, name.str());
        generators_.push_back(out);
        return out;
      }
    }
    std::ostringstream os;
    os << name_ << ": no restricted weak type (" << r << "," << r << ") witness generator available";
    throw ConfigError(os.str());
  }

 private:
  Algebra domain_;
  Algebra range_;
  std::shared_ptr<const std::vector<OperatorMap>> maps_;
  NetProperties declared_;
  std::string name_;
  std::optional<double> uniform_bound_;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
  mutable std::vector<std::shared_ptr<WitnessGenerator>> generators_;
};

/// Cuculescu's projection for the martingale (E_n(x))_n, without verification.
inline Projection cuculescu_projection(const Filtration& filtration, const TracialOperator& x, double theta) {
  std::vector<OperatorMap> maps;
  for (std::size_t n = 0; n < filtration.size(); ++n)
    maps.push_back([&filtration, n](const TracialOperator& y) { return filtration.expectation(n, y); });
  return sequential_witness(maps, filtration.algebra(), x, theta);
}

/// Cuculescu's projection with its weak-(1,1) certificate verified:
///   tau(1 - e) <= tau(x) / theta  and  e E_n(x) e <= theta e  for all n.
inline Projection cuculescu_witness(const Filtration& filtration, const TracialOperator& x, double theta) {
  if (!x.is_hermitian() || spectral_decompose(x).min_eigenvalue() < -1e-10 * std::max(1.0, x.operator_norm()))
    throw InputError("cuculescu_witness: x must be positive semidefinite");
  std::vector<OperatorMap> maps;
  for (std::size_t n = 0; n < filtration.size(); ++n)
    maps.push_back([filtration, n](const TracialOperator& y) { return filtration.expectation(n, y); });
  auto shared = std::make_shared<const std::vector<OperatorMap>>(std::move(maps));
  WitnessGenerator check(shared, WitnessGenerator::Raw{}, 1.0, 1.0, WitnessGenerator::Domain::kPositive, "cuculescu");
  auto e = cuculescu_projection(filtration, x, theta);
  check.verify(x, theta, e);
  return e;
}

/// Net (E_n)_n of a filtration: positive, linear, unital; strong type
/// (inf, inf) with C_inf = 1 and M-weak type (1,1) through Cuculescu's
/// projections, declared with constant `c1` (1 for a genuine martingale).
inline MaximalNet conditional_expectation_net(const Filtration& filtration, double c1 = 1.0) {
  auto f = std::make_shared<const Filtration>(filtration);
  std::vector<OperatorMap> maps;
  for (std::size_t n = 0; n < f->size(); ++n)
    maps.push_back([f, n](const TracialOperator& y) { return f->expectation(n, y); });
  MaximalNet net(f->algebra(), f->algebra(), maps, {}, "conditional_expectation");
  net.set_uniform_bound(1.0);
  auto raw = [f](const TracialOperator& x, double theta) { return cuculescu_projection(*f, x, theta); };
  auto gen = std::make_shared<WitnessGenerator>(net.maps(), raw, 1.0, c1, WitnessGenerator::Domain::kPositive,
                                                "cuculescu");
  net.add_witness(gen);
  net.add_witness(restricted_witness_from_mweak(*gen));
  return net;
}

/// Net of pinchings x -> sum_i p_i x p_i, one per partition. Each partition
/// must consist of full site groups covering every site exactly once.
/// Witnesses: chi_[0,theta](T(x)) for a single pinching, and the sequential
/// construction across several, with M-weak (1,1) constant = number of maps
/// (union bound over trace-preserving maps).
inline MaximalNet pinching_net(const Algebra& algebra, const std::vector<SubalgebraLevel>& partitions) {
  if (partitions.empty()) throw ConfigError("pinching_net needs at least one partition");
  std::vector<OperatorMap> maps;
  for (const auto& part : partitions) {
    validate_level(algebra, part);
    for (const auto& g : part) {
      if (g.copies() != 1) throw ConfigError("pinching partitions must use full groups (one copy each)");
    }
    maps.push_back([part](const TracialOperator& y) { return level_expectation(part, y); });
  }
  MaximalNet net(algebra, algebra, maps, {}, "pinching");
  net.set_uniform_bound(1.0);
  auto shared = net.maps();
  auto raw = [shared, algebra](const TracialOperator& x, double theta) {
    return sequential_witness(*shared, algebra, x, theta);
  };
  auto gen = std::make_shared<WitnessGenerator>(shared, raw, 1.0, static_cast<double>(partitions.size()),
                                                WitnessGenerator::Domain::kPositive, "pinching");
  net.add_witness(gen);
  net.add_witness(restricted_witness_from_mweak(*gen));
  return net;
}

// ---------------------------------------------------------------------------
// Property spot checks

struct PropertyReport {
  bool positive = true;
  bool sublinear = true;
  bool order_preserving = true;
  double worst_positive_margin = kInf;
  double worst_sublinear_margin = kInf;
  double worst_order_margin = kInf;

  bool all() const { return positive && sublinear && order_preserving; }
};

/// Spot-checks positivity, T(cx + dy) <= cT(x) + dT(y), and x <= y => T(x) <= T(y)
/// on random PSD inputs.
inline PropertyReport verify_properties(const MaximalNet& net, Rng& rng, int trials, double tol = 1e-9) {
  PropertyReport rep;
  std::uniform_real_distribution<double> coef(0.0, 2.0);
  for (int t = 0; t < trials; ++t) {
    const auto x = random_psd(rng, net.domain());
    const auto y = random_psd(rng, net.domain());
    const auto z = random_psd(rng, net.domain());
    const double c = coef(rng);
    const double d = coef(rng);
    const auto bigger = x + z;
    for (std::size_t a = 0; a < net.size(); ++a) {
      const auto tx = net.apply(a, x);
      const auto ty = net.apply(a, y);
      const double scale = std::max(1.0, tx.operator_norm() + ty.operator_norm());
      const double pos = spectral_decompose(tx.hermitian_part()).min_eigenvalue() / scale;
      const double sub = order_margin(net.apply(a, c * x + d * y).hermitian_part(), (c * tx + d * ty).hermitian_part()) / scale;
      const double ord = order_margin(tx.hermitian_part(), net.apply(a, bigger).hermitian_part()) / scale;
      rep.worst_positive_margin = std::min(rep.worst_positive_margin, pos);
      rep.worst_sublinear_margin = std::min(rep.worst_sublinear_margin, sub);
      rep.worst_order_margin = std::min(rep.worst_order_margin, ord);
    }
  }
  rep.positive = rep.worst_positive_margin >= -tol;
  rep.sublinear = rep.worst_sublinear_margin >= -tol;
  rep.order_preserving = rep.worst_order_margin >= -tol;
  return rep;
}

}  // namespace ncmax
