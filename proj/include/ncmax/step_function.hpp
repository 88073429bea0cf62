#pragma once

// Exact calculus of nonincreasing, nonnegative step functions on [0, inf):
// decreasing rearrangements, the Hardy-Littlewood average, submajorization,
// and Calderon operators applied to step functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ncmax/errors.hpp"
#include "ncmax/tolerance.hpp"

namespace ncmax {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Nonincreasing step function: value values[j] on [breakpoints[j-1], breakpoints[j])
/// (with breakpoints[-1] = 0), and tail() on [breakpoints.back(), inf).
class StepFunction {
 public:
  StepFunction() = default;

  StepFunction(std::vector<double> breakpoints, std::vector<double> values, double tail = 0.0)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)), tail_(tail) {
    validate();
  }

  /// height * indicator of [0, s).
  static StepFunction indicator(double s, double height = 1.0) {
    if (s <= 0.0 || height == 0.0) return {};
    return StepFunction({s}, {height});
  }

  /// Builds the decreasing rearrangement of a finite family of (value, length)
  /// pieces. Values within `merge_tol * max_value` of the previous distinct
  /// value are merged into it; values <= `zero_tol * max_value` are dropped.
  static StepFunction rearrange(std::vector<std::pair<double, double>> pieces,
                                double merge_tol = 0.0, double zero_tol = 0.0) {
    std::erase_if(pieces, [](const auto& pc) { return !(pc.first > 0.0) || !(pc.second > 0.0); });
    if (pieces.empty()) return {};
    std::stable_sort(pieces.begin(), pieces.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const double top = pieces.front().first;
    std::vector<double> bps;
    std::vector<double> vals;
    double acc = 0.0;
    for (const auto& [v, len] : pieces) {
      if (v <= zero_tol * top) break;
      acc += len;
      if (!vals.empty() && vals.back() - v <= merge_tol * top) {
        bps.back() = acc;
      } else {
        vals.push_back(v);
        bps.push_back(acc);
      }
    }
    if (vals.empty()) return {};
    return StepFunction(std::move(bps), std::move(vals));
  }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  double tail() const { return tail_; }
  std::size_t size() const { return values_.size(); }
  bool is_zero() const {
    return tail_ == 0.0 && std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }

  /// Left endpoint of piece j.
  double left(std::size_t j) const { return j == 0 ? 0.0 : breakpoints_[j - 1]; }

  /// Value at t >= 0 (right-continuous).
  double operator()(double t) const {
    if (t < 0.0) throw DomainError("StepFunction evaluated at negative t");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    if (it == breakpoints_.end()) return tail_;
    return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
  }

  /// Integral over [0, t]; exact (piecewise linear in t).
  double integral(double t) const {
    if (t < 0.0) throw DomainError("StepFunction integral over negative range");
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) {
      if (t <= breakpoints_[j]) return acc + values_[j] * (t - prev);
      acc += values_[j] * (breakpoints_[j] - prev);
      prev = breakpoints_[j];
    }
    if (tail_ == 0.0) return acc;
    return acc + tail_ * (t - prev);
  }

  double total_integral() const { return tail_ > 0.0 ? kInf : integral(support_end()); }

  /// sup of the function (its value at 0).
  double sup() const { return values_.empty() ? tail_ : values_.front(); }

  /// Last breakpoint, or 0 for the empty function.
  double support_end() const { return breakpoints_.empty() ? 0.0 : breakpoints_.back(); }

  StepFunction scaled(double c) const {
    if (c < 0.0) throw DomainError("StepFunction scaled by a negative factor");
    if (c == 0.0) return {};
    std::vector<double> vals(values_);
    for (double& v : vals) v *= c;
    return StepFunction(breakpoints_, std::move(vals), tail_ * c);
  }

  /// t -> g(t / s), the dilation D_{1/s}.
  StepFunction dilated(double s) const {
    if (!(s > 0.0)) throw DomainError("dilation factor must be positive");
    std::vector<double> bps(breakpoints_);
    for (double& b : bps) b *= s;
    return StepFunction(std::move(bps), values_, tail_);
  }

  /// Merges equal neighbouring values and strips zero pieces at the end.
  StepFunction canonical() const {
    std::vector<double> bps;
    std::vector<double> vals;
    for (std::size_t j = 0; j < values_.size(); ++j) {
      if (!vals.empty() && vals.back() == values_[j]) {
        bps.back() = breakpoints_[j];
      } else {
        vals.push_back(values_[j]);
        bps.push_back(breakpoints_[j]);
      }
    }
    if (tail_ == 0.0) {
      while (!vals.empty() && vals.back() == 0.0) {
        vals.pop_back();
        bps.pop_back();
      }
    } else if (!vals.empty() && vals.back() == tail_) {
      vals.pop_back();
      bps.pop_back();
    }
    StepFunction out;
    out.breakpoints_ = std::move(bps);
    out.values_ = std::move(vals);
    out.tail_ = tail_;
    return out;
  }

  friend StepFunction operator+(const StepFunction& a, const StepFunction& b) {
    std::vector<double> bps;
    bps.reserve(a.size() + b.size());
    std::merge(a.breakpoints_.begin(), a.breakpoints_.end(), b.breakpoints_.begin(),
               b.breakpoints_.end(), std::back_inserter(bps));
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    std::vector<double> vals;
    vals.reserve(bps.size());
    double prev = 0.0;
    for (double bp : bps) {
      const double mid = 0.5 * (prev + bp);
      vals.push_back(a(mid) + b(mid));
      prev = bp;
    }
    // Pointwise sums of nonincreasing functions stay nonincreasing; clamp
    // rounding so validation is exact.
    for (std::size_t j = 1; j < vals.size(); ++j) vals[j] = std::min(vals[j], vals[j - 1]);
    double tail = a.tail_ + b.tail_;
    if (!vals.empty()) tail = std::min(tail, vals.back());
    return StepFunction(std::move(bps), std::move(vals), tail).canonical();
  }

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  void validate() const {
    if (breakpoints_.size() != values_.size())
      throw DomainError("StepFunction: breakpoints and values differ in length");
    double prev_bp = 0.0;
    double prev_v = kInf;
    for (std::size_t j = 0; j < values_.size(); ++j) {
      const double bp = breakpoints_[j];
      const double v = values_[j];
      if (!std::isfinite(bp) || !(bp > prev_bp))
        throw DomainError("StepFunction: breakpoints must be finite and strictly increasing from 0");
      if (!std::isfinite(v) || v < 0.0 || v > prev_v)
        throw DomainError("StepFunction: values must be finite, nonnegative and nonincreasing");
      prev_bp = bp;
      prev_v = v;
    }
    if (!std::isfinite(tail_) || tail_ < 0.0 || tail_ > prev_v)
      throw DomainError("StepFunction: tail must be finite, nonnegative and <= last value");
  }

  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double tail_ = 0.0;
};

/// Hardy-Littlewood average (1/t) * integral_0^t of g.
inline double hardy_littlewood(const StepFunction& g, double t) {
  if (!(t > 0.0)) throw DomainError("hardy_littlewood: t must be positive");
  return g.integral(t) / t;
}

/// Outcome of a submajorization check. `worst_excess` is the largest value of
/// (lhs - rhs) / max(rhs, tiny) over the tested points.
struct SubmajorizationCheck {
  bool holds = true;
  double worst_excess = -kInf;
  double worst_t = 0.0;
};

namespace detail {

inline void record(SubmajorizationCheck& out, double lhs, double rhs, double t, const Tolerance& tol) {
  const double excess = (lhs - rhs) / std::max(std::abs(rhs), 1e-300);
  if (excess > out.worst_excess) {
    out.worst_excess = excess;
    out.worst_t = t;
  }
  if (!tol.leq(lhs, rhs)) out.holds = false;
}

}  // namespace detail

/// Checks g <<(sub) h, i.e. integral_0^t g <= integral_0^t h for all t > 0.
/// Both primitives are piecewise linear, so the union of breakpoints and the
/// slopes past the last one decide the question exactly.
inline SubmajorizationCheck check_submajorization(const StepFunction& h, const StepFunction& g,
                                                  const Tolerance& tol = kDefaultTolerance) {
  SubmajorizationCheck out;
  std::vector<double> pts;
  std::merge(g.breakpoints().begin(), g.breakpoints().end(), h.breakpoints().begin(),
             h.breakpoints().end(), std::back_inserter(pts));
  for (double t : pts) detail::record(out, g.integral(t), h.integral(t), t, tol);
  if (g.tail() > h.tail() * (1.0 + tol.rel)) {
    out.holds = false;
    out.worst_excess = kInf;
    out.worst_t = kInf;
  }
  return out;
}

/// True iff g is submajorized by h.
inline bool submajorizes(const StepFunction& h, const StepFunction& g,
                         const Tolerance& tol = kDefaultTolerance) {
  return check_submajorization(h, g, tol).holds;
}

inline void check_exponent_pair(double p, double q) {
  if (!(p > 0.0) || !(p < q)) throw WindowError("exponents must satisfy 0 < p < q <= inf");
}

/// theta_{p,q}(t): t^{-1/p} on [1, inf), t^{-1/q} on (0, 1); q = inf gives 1 on (0, 1).
inline double theta(double p, double q, double t) {
  check_exponent_pair(p, q);
  if (!(t > 0.0)) throw DomainError("theta: t must be positive");
  if (t >= 1.0) return std::pow(t, -1.0 / p);
  return std::isinf(q) ? 1.0 : std::pow(t, -1.0 / q);
}

/// integral_0^t theta_{p,q}(u) du in closed form; inf when it diverges (q <= 1).
inline double theta_integral(double p, double q, double t) {
  check_exponent_pair(p, q);
  if (t <= 0.0) return 0.0;
  auto lower = [&](double x) {
    if (std::isinf(q)) return x;
    if (q <= 1.0) return kInf;
    const double e = 1.0 - 1.0 / q;
    return std::pow(x, e) / e;
  };
  if (t <= 1.0) return lower(t);
  double upper;
  if (p == 1.0) {
    upper = std::log(t);
  } else {
    const double e = 1.0 - 1.0 / p;
    upper = (std::pow(t, e) - 1.0) / e;
  }
  return lower(1.0) + upper;
}

/// t -> sum_j coefficient_j * theta_{p,q}(t / scale_j): the Calderon operator
/// applied to a decreasing step function, kept symbolic.
class CalderonEvaluation {
 public:
  struct Term {
    double coefficient;
    double scale;
    friend bool operator==(const Term&, const Term&) = default;
  };

  /// One interval [lo, hi) on which the function equals a*t^{-1/p} + b*t^{-1/q}.
  struct PowerPiece {
    double lo;
    double hi;
    double a;
    double b;
  };

  CalderonEvaluation(double p, double q, std::vector<Term> terms = {})
      : p_(p), q_(q), terms_(std::move(terms)) {
    check_exponent_pair(p, q);
    for (const auto& tm : terms_) {
      if (!(tm.coefficient >= 0.0) || !(tm.scale > 0.0) || !std::isfinite(tm.scale))
        throw DomainError("CalderonEvaluation: terms need coefficient >= 0 and scale > 0");
    }
  }

  double p() const { return p_; }
  double q() const { return q_; }
  const std::vector<Term>& terms() const { return terms_; }

  double operator()(double t) const {
    if (!(t > 0.0)) throw DomainError("CalderonEvaluation: t must be positive");
    double acc = 0.0;
    for (const auto& tm : terms_) acc += tm.coefficient * theta(p_, q_, t / tm.scale);
    return acc;
  }

  /// integral_0^t in closed form.
  double integral(double t) const {
    double acc = 0.0;
    for (const auto& tm : terms_) {
      if (tm.coefficient == 0.0) continue;
      acc += tm.coefficient * tm.scale * theta_integral(p_, q_, t / tm.scale);
    }
    return acc;
  }

  CalderonEvaluation scaled(double c) const {
    std::vector<Term> out(terms_);
    for (auto& tm : out) tm.coefficient *= c;
    return {p_, q_, std::move(out)};
  }

  /// Term-union (the sum of two evaluations with the same exponents).
  friend CalderonEvaluation operator+(const CalderonEvaluation& x, const CalderonEvaluation& y) {
    if (x.p_ != y.p_ || x.q_ != y.q_) throw WindowError("adding Calderon evaluations with different exponents");
    std::vector<Term> out(x.terms_);
    out.insert(out.end(), y.terms_.begin(), y.terms_.end());
    return {x.p_, x.q_, std::move(out)};
  }

  /// Sorted distinct scales.
  std::vector<double> scales() const {
    std::vector<double> s;
    for (const auto& tm : terms_) {
      if (tm.coefficient > 0.0) s.push_back(tm.scale);
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }

  /// Power-law pieces covering (0, inf); first piece has a == 0, last has b == 0.
  std::vector<PowerPiece> pieces() const {
    const auto s = scales();
    std::vector<PowerPiece> out;
    if (s.empty()) return out;
    double lo = 0.0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      const double hi = i < s.size() ? s[i] : kInf;
      double a = 0.0;
      double b = 0.0;
      for (const auto& tm : terms_) {
        if (tm.coefficient == 0.0) continue;
        if (tm.scale <= lo) {
          a += tm.coefficient * std::pow(tm.scale, 1.0 / p_);
        } else {
          b += tm.coefficient * (std::isinf(q_) ? 1.0 : std::pow(tm.scale, 1.0 / q_));
        }
      }
      out.push_back({lo, hi, a, b});
      lo = hi;
    }
    return out;
  }

 private:
  double p_;
  double q_;
  std::vector<Term> terms_;
};

/// S_{p,q} applied to a decreasing step function g with zero tail:
/// g = sum_j c_j * indicator[0, s_j) and S_{p,q} indicator[0, s) = theta_{p,q}(. / s).
inline CalderonEvaluation calderon_apply(const StepFunction& g, double p, double q) {
  check_exponent_pair(p, q);
  if (g.tail() > 0.0)
    throw DivergenceError("calderon_apply: input with positive tail makes S_{p,q} diverge");
  std::vector<CalderonEvaluation::Term> terms;
  const auto& v = g.values();
  const auto& b = g.breakpoints();
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double next = j + 1 < v.size() ? v[j + 1] : 0.0;
    const double c = v[j] - next;
    if (c > 0.0) terms.push_back({c, b[j]});
  }
  return {p, q, std::move(terms)};
}

/// Checks g <<(sub) factor * h where h is a Calderon evaluation. On any interval
/// where the primitive of g is linear, the primitive of h is concave, so the
/// difference attains its minimum at breakpoints of g.
inline SubmajorizationCheck check_submajorization(const CalderonEvaluation& h, double factor,
                                                  const StepFunction& g,
                                                  const Tolerance& tol = kDefaultTolerance) {
  SubmajorizationCheck out;
  if (g.tail() > 0.0) {
    out.holds = false;
    out.worst_excess = kInf;
    out.worst_t = kInf;
    return out;
  }
  for (double t : g.breakpoints()) detail::record(out, g.integral(t), factor * h.integral(t), t, tol);
  return out;
}

}  // namespace ncmax
