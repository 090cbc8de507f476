#pragma once

#include <functional>

#include "cgwe/types.hpp"

namespace cgwe {

/// Two-body radial potential split into a short-range part v*G and a
/// long-range remainder v*(1-G). The parts sum back to the input pointwise.
struct PotentialSplit {
  VectorXr r;
  VectorXr short_part;
  VectorXr long_part;
};

/// Splits radial samples v(r_i) with the window G(r) = g(r / range).
/// Requires g(0) = 1 and g non-increasing over the sampled radii; the window
/// choice decides how much of the potential is treated as a perturbation.
PotentialSplit split_potential(const VectorXr& r, const VectorXr& v,
                               const std::function<Real(Real)>& g, Real range);

}  // namespace cgwe
