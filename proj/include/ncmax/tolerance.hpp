#pragma once

#include <cmath>

namespace ncmax {

/// Slack used by every "lhs <= rhs" check: rel * |rhs| + abs.
struct Tolerance {
  double rel = 1e-9;
  double abs = 1e-12;

  double slack(double scale) const { return rel * std::abs(scale) + abs; }
  bool leq(double lhs, double rhs) const { return lhs <= rhs + slack(rhs); }
};

inline constexpr Tolerance kDefaultTolerance{};

/// Eigenvalues within this distance of a spectral cut are snapped onto it.
inline constexpr double kClusterTol = 1e-9;

}  // namespace ncmax
