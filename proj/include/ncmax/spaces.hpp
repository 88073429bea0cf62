#pragma once

// Symmetric function spaces on R_+ (L^r, Lorentz L^{p,q}, Orlicz with the
// Luxemburg norm) and their norms on step functions and Calderon evaluations.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ncmax/errors.hpp"
#include "ncmax/step_function.hpp"

namespace ncmax {

/// Convex, increasing Phi: [0, inf) -> [0, inf] with Phi(0) = 0.
class OrliczFunction {
 public:
  using Evaluator = std::function<double(double)>;

  OrliczFunction(Evaluator evaluator, std::string name,
                 std::optional<std::pair<double, double>> indices = std::nullopt,
                 std::optional<double> delta2_constant = std::nullopt)
      : evaluator_(std::move(evaluator)),
        name_(std::move(name)),
        indices_(indices),
        delta2_(delta2_constant) {
    if (!evaluator_) throw ConfigError("OrliczFunction needs an evaluator");
    if (indices_ && !(indices_->first >= 1.0 && indices_->first <= indices_->second))
      throw ConfigError("OrliczFunction indices must satisfy 1 <= p_Phi <= q_Phi");
  }

  /// Phi(t) = t^r.
  static OrliczFunction power(double r) {
    if (!(r >= 1.0)) throw ConfigError("power Orlicz function needs r >= 1");
    std::ostringstream os;
    os << "t^" << r;
    return OrliczFunction([r](double t) { return std::pow(t, r); }, os.str(), std::make_pair(r, r),
                          std::pow(2.0, r));
  }

  /// Phi(t) = t^r1 + t^r2 with r1 <= r2; indices (r1, r2).
  static OrliczFunction power_mix(double r1, double r2) {
    if (!(r1 >= 1.0 && r1 <= r2)) throw ConfigError("power_mix needs 1 <= r1 <= r2");
    std::ostringstream os;
    os << "t^" << r1 << "+t^" << r2;
    return OrliczFunction([r1, r2](double t) { return std::pow(t, r1) + std::pow(t, r2); }, os.str(),
                          std::make_pair(r1, r2), std::pow(2.0, r2));
  }

  double operator()(double t) const {
    if (t < 0.0) throw DomainError("Orlicz function evaluated at negative t");
    return t == 0.0 ? 0.0 : evaluator_(t);
  }

  const std::string& name() const { return name_; }
  const std::optional<std::pair<double, double>>& indices() const { return indices_; }
  const std::optional<double>& delta2_constant() const { return delta2_; }

  /// Sampled check of Phi(2t) <= C * Phi(t) at the given points.
  bool check_delta2(std::span<const double> samples, const Tolerance& tol = kDefaultTolerance) const {
    if (!delta2_) return false;
    return std::all_of(samples.begin(), samples.end(), [&](double t) {
      return tol.leq((*this)(2.0 * t), *delta2_ * (*this)(t));
    });
  }

 private:
  Evaluator evaluator_;
  std::string name_;
  std::optional<std::pair<double, double>> indices_;
  std::optional<double> delta2_;
};

struct LpSpace {
  double r;
};
struct LorentzSpace {
  double p;
  double q;
};
struct OrliczSpace {
  OrliczFunction phi;
};

/// One of the three concrete symmetric spaces, with declared Boyd indices.
class SpaceDescriptor {
 public:
  using Kind = std::variant<LpSpace, LorentzSpace, OrliczSpace>;

  static SpaceDescriptor lp(double r) {
    if (!(r >= 1.0)) throw ConfigError("L^r needs r >= 1");
    return SpaceDescriptor(LpSpace{r}, std::make_pair(r, r));
  }
  static SpaceDescriptor lorentz(double p, double q) {
    if (!(p > 0.0) || std::isinf(p) || !(q > 0.0)) throw ConfigError("Lorentz space needs 0 < p < inf, q > 0");
    return SpaceDescriptor(LorentzSpace{p, q}, std::make_pair(p, p));
  }
  static SpaceDescriptor orlicz(OrliczFunction phi) {
    auto idx = phi.indices();
    return SpaceDescriptor(OrliczSpace{std::move(phi)}, idx);
  }

  const Kind& kind() const { return kind_; }
  const std::optional<std::pair<double, double>>& boyd_indices() const { return boyd_; }

  /// Norm monotone under submajorization (so the majorant bound transfers).
  bool fully_symmetric() const {
    return std::visit(
        [](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, LorentzSpace>) {
            return k.p >= 1.0 && k.q >= 1.0 && k.q <= k.p;
          } else {
            return true;
          }
        },
        kind_);
  }

  std::string describe() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, LpSpace>) {
            os << "L^" << k.r;
          } else if constexpr (std::is_same_v<K, LorentzSpace>) {
            os << "L^{" << k.p << "," << k.q << "}";
          } else {
            os << "L_Phi[" << k.phi.name() << "]";
          }
        },
        kind_);
    return os.str();
  }

 private:
  SpaceDescriptor(Kind kind, std::optional<std::pair<double, double>> boyd)
      : kind_(std::move(kind)), boyd_(boyd) {
    if (boyd_ && !(boyd_->first >= 1.0 && boyd_->first <= boyd_->second))
      throw ConfigError("Boyd indices must satisfy 1 <= p_E <= q_E");
  }

  Kind kind_;
  std::optional<std::pair<double, double>> boyd_;
};

namespace detail {

/// Luxemburg gauge inf{k > 0 : modular(k) <= 1} for a modular decreasing in k.
template <class Modular>
double luxemburg(Modular&& modular, double scale_guess) {
  double hi = scale_guess > 0.0 && std::isfinite(scale_guess) ? scale_guess : 1.0;
  int guard = 0;
  while (!(modular(hi) <= 1.0)) {
    hi *= 2.0;
    if (++guard > 2100) return kInf;
  }
  double lo = hi / 2.0;
  guard = 0;
  while (modular(lo) <= 1.0) {
    lo /= 2.0;
    if (++guard > 2100) return 0.0;
  }
  while (hi - lo > 1e-10 * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    if (modular(mid) <= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// integral_lo^hi c * t^e dt with lo possibly 0 and hi possibly inf.
inline double power_integral(double c, double e, double lo, double hi) {
  if (c == 0.0 || hi <= lo) return 0.0;
  if (e == -1.0) {
    if (lo == 0.0 || std::isinf(hi)) return kInf;
    return c * std::log(hi / lo);
  }
  const double f = e + 1.0;
  if (lo == 0.0 && f <= 0.0) return kInf;
  if (std::isinf(hi) && f >= 0.0) return kInf;
  const double up = std::isinf(hi) ? 0.0 : std::pow(hi, f);
  const double down = lo == 0.0 ? 0.0 : std::pow(lo, f);
  return c * (up - down) / f;
}

inline double finite_quadrature(const std::function<double(double)>& f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, 1e-12);
}

inline double half_line_quadrature(const std::function<double(double)>& f) {
  try {
    boost::math::quadrature::exp_sinh<double> integrator;
    const double v = integrator.integrate(f, 0.0, kInf, 1e-12);
    return std::isfinite(v) ? v : kInf;
  } catch (const std::exception&) {
    return kInf;
  }
}

inline double inv_or_zero(double q) { return std::isinf(q) ? 0.0 : 1.0 / q; }

}  // namespace detail

/// Norm of a decreasing step function (it is its own rearrangement).
/// Divergent integrals yield +inf.
inline double norm(const StepFunction& g, const SpaceDescriptor& space) {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        const auto& v = g.values();
        const auto& b = g.breakpoints();
        if constexpr (std::is_same_v<K, LpSpace>) {
          if (std::isinf(k.r)) return g.sup();
          if (g.tail() > 0.0) return kInf;
          double acc = 0.0;
          for (std::size_t j = 0; j < v.size(); ++j) acc += std::pow(v[j], k.r) * (b[j] - g.left(j));
          return std::pow(acc, 1.0 / k.r);
        } else if constexpr (std::is_same_v<K, LorentzSpace>) {
          if (g.tail() > 0.0) return kInf;
          if (std::isinf(k.q)) {
            double best = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) best = std::max(best, v[j] * std::pow(b[j], 1.0 / k.p));
            return best;
          }
          const double e = k.q / k.p;
          double acc = 0.0;
          for (std::size_t j = 0; j < v.size(); ++j)
            acc += std::pow(v[j], k.q) * (std::pow(b[j], e) - std::pow(g.left(j), e)) / e;
          return std::pow(acc, 1.0 / k.q);
        } else {
          if (g.is_zero()) return 0.0;
          auto modular = [&](double scale) {
            if (g.tail() > 0.0 && k.phi(g.tail() / scale) > 0.0) return kInf;
            double acc = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) acc += k.phi(v[j] / scale) * (b[j] - g.left(j));
            return acc;
          };
          return detail::luxemburg(modular, g.sup());
        }
      },
      space.kind());
}

/// Norm of a Calderon evaluation. Outer pieces are single power laws and are
/// integrated in closed form; interior pieces a*t^-alpha + b*t^-beta are
/// integrated by Gauss-Kronrod (closed form whenever one coefficient vanishes).
inline double norm(const CalderonEvaluation& h, const SpaceDescriptor& space) {
  const auto pieces = h.pieces();
  if (pieces.empty()) return 0.0;
  const double alpha = 1.0 / h.p();
  const double beta = detail::inv_or_zero(h.q());
  auto value = [&](const CalderonEvaluation::PowerPiece& pc, double t) {
    return pc.a * std::pow(t, -alpha) + pc.b * std::pow(t, -beta);
  };
  // integral over all pieces of weight(t) * value^power, weight(t) = t^w.
  auto power_norm_integral = [&](double power, double w) {
    double acc = 0.0;
    for (const auto& pc : pieces) {
      if (pc.a == 0.0 || pc.b == 0.0) {
        const double c = pc.a == 0.0 ? pc.b : pc.a;
        const double ex = pc.a == 0.0 ? -beta : -alpha;
        acc += detail::power_integral(std::pow(c, power), w + ex * power, pc.lo, pc.hi);
      } else {
        acc += detail::finite_quadrature(
            [&](double t) { return std::pow(t, w) * std::pow(value(pc, t), power); }, pc.lo, pc.hi);
      }
      if (std::isinf(acc)) return kInf;
    }
    return acc;
  };
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LpSpace>) {
          if (std::isinf(k.r)) return beta > 0.0 ? kInf : pieces.front().b;
          return std::pow(power_norm_integral(k.r, 0.0), 1.0 / k.r);
        } else if constexpr (std::is_same_v<K, LorentzSpace>) {
          if (!std::isinf(k.q)) return std::pow(power_norm_integral(k.q, k.q / k.p - 1.0), 1.0 / k.q);
          // sup_t t^{1/P} (a t^-alpha + b t^-beta), endpoints and the interior critical point.
          const double s = 1.0 / k.p;
          double best = 0.0;
          auto g = [&](const CalderonEvaluation::PowerPiece& pc, double t) {
            return pc.a * std::pow(t, s - alpha) + pc.b * std::pow(t, s - beta);
          };
          auto edge = [&](double c, double e, bool at_zero) {
            if (c == 0.0) return 0.0;
            if (e == 0.0) return c;
            return (at_zero ? e < 0.0 : e > 0.0) ? kInf : 0.0;
          };
          for (const auto& pc : pieces) {
            if (pc.lo == 0.0) {
              best = std::max(best, edge(pc.b, s - beta, true) + edge(pc.a, s - alpha, true));
            } else {
              best = std::max(best, g(pc, pc.lo));
            }
            if (std::isinf(pc.hi)) {
              best = std::max(best, edge(pc.a, s - alpha, false) + edge(pc.b, s - beta, false));
            } else {
              best = std::max(best, g(pc, pc.hi));
            }
            if (pc.a > 0.0 && pc.b > 0.0 && alpha != beta && s != alpha) {
              const double ratio = -pc.b * (s - beta) / (pc.a * (s - alpha));
              if (ratio > 0.0) {
                const double t = std::pow(ratio, 1.0 / (beta - alpha));
                if (t > pc.lo && t < pc.hi) best = std::max(best, g(pc, t));
              }
            }
          }
          return best;
        } else {
          auto modular = [&](double scale) {
            double acc = 0.0;
            for (const auto& pc : pieces) {
              if (pc.lo == 0.0) {
                const double hi = pc.hi;
                acc += detail::half_line_quadrature([&](double u) {
                  const double t = hi * std::exp(-u);
                  return k.phi(value(pc, t) / scale) * t;
                });
              } else if (std::isinf(pc.hi)) {
                const double lo = pc.lo;
                acc += detail::half_line_quadrature([&](double u) {
                  const double t = lo * std::exp(u);
                  return k.phi(value(pc, t) / scale) * t;
                });
              } else {
                acc += detail::finite_quadrature([&](double t) { return k.phi(value(pc, t) / scale); },
                                                 pc.lo, pc.hi);
              }
              if (std::isinf(acc)) return kInf;
            }
            return acc;
          };
          return detail::luxemburg(modular, h(pieces.front().hi));
        }
      },
      space.kind());
}

/// Lower estimate of the operator norm of the dilation D_{1/s} on E.
struct DilationEstimate {
  double value;
  bool analytic;  // exact closed form used (L^r)
};

inline DilationEstimate dilation_norm_estimate(const SpaceDescriptor& space, double s,
                                               std::span<const StepFunction> probes) {
  if (!(s > 0.0)) throw DomainError("dilation factor must be positive");
  bool any = false;
  double best = 0.0;
  for (const auto& g : probes) {
    const double base = norm(g, space);
    if (!(base > 0.0) || std::isinf(base)) continue;
    any = true;
    best = std::max(best, norm(g.dilated(s), space) / base);
  }
  if (!any) throw DomainError("dilation_norm_estimate: every probe has zero norm");
  if (const auto* lp = std::get_if<LpSpace>(&space.kind())) {
    return {std::isinf(lp->r) ? 1.0 : std::pow(s, 1.0 / lp->r), true};
  }
  return {best, false};
}

/// Hardy-inequality bound on ||S_{p,q}||_{L^r -> L^r} for p < r < q:
/// r/(r-p) + r/(q-r), the second term vanishing for q = inf.
inline double calderon_lr_bound(double r, double p, double q) {
  if (!(p < r && r < q)) throw WindowError("Hardy bound needs p < r < q");
  return r / (r - p) + (std::isinf(q) ? 0.0 : r / (q - r));
}

}  // namespace ncmax
