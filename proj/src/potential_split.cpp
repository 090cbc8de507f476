#include "cgwe/potential_split.hpp"

#include <cmath>

namespace cgwe {

PotentialSplit split_potential(const VectorXr& r, const VectorXr& v,
                               const std::function<Real(Real)>& g, Real range) {
  if (r.size() != v.size() || r.size() == 0) {
    throw std::invalid_argument("split_potential: r and v must be equal-length and non-empty");
  }
  if (!(range > 0.0)) {
    throw std::invalid_argument("split_potential: range must be > 0");
  }
  if (std::abs(g(0.0) - 1.0) > 1e-12) {
    throw std::invalid_argument("split_potential: window must satisfy g(0) = 1");
  }

  PotentialSplit out;
  out.r = r;
  out.short_part.resize(r.size());
  out.long_part.resize(r.size());

  Real prev_x = 0.0;
  Real prev_g = 1.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!(r(i) > 0.0)) {
      throw std::invalid_argument("split_potential: radii must be positive");
    }
    if (i > 0 && r(i) <= r(i - 1)) {
      throw std::invalid_argument("split_potential: radii must be strictly increasing");
    }
    const Real x = r(i) / range;
    const Real gi = g(x);
    if (!std::isfinite(gi) || gi < -1e-12 || gi > 1.0 + 1e-12) {
      throw std::invalid_argument("split_potential: window values must lie in [0, 1]");
    }
    // Monotone non-increasing window, with a little slack for roundoff.
    if (x > prev_x && gi > prev_g + 1e-12) {
      throw std::invalid_argument("split_potential: window must be non-increasing");
    }
    prev_x = x;
    prev_g = gi;

    out.short_part(i) = v(i) * gi;
    out.long_part(i) = v(i) * (1.0 - gi);
  }
  return out;
}

}  // namespace cgwe
