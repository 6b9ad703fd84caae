#pragma once

#include "grid.hpp"

#include <cmath>

namespace idnet {

// Proximal map of gamma*|.|: sgn(x) * max(|x| - gamma, 0).
template <typename Scalar>
Scalar soft_threshold(Scalar x, Scalar gamma)
{
  if (!(gamma >= Scalar(0))) { throw ArgumentError("soft_threshold: gamma must be nonnegative"); }
  Scalar const mag = std::abs(x) - gamma;
  if (mag <= Scalar(0)) { return Scalar(0); }
  return x > Scalar(0) ? mag : -mag;
}

template <typename Derived>
GridT<typename Derived::Scalar> soft_threshold(Eigen::ArrayBase<Derived> const &x, typename Derived::Scalar gamma)
{
  using Scalar = typename Derived::Scalar;
  if (!(gamma >= Scalar(0))) { throw ArgumentError("soft_threshold: gamma must be nonnegative"); }
  return x.unaryExpr([gamma](Scalar xi) {
    Scalar const mag = std::abs(xi) - gamma;
    if (mag <= Scalar(0)) { return Scalar(0); }
    return xi > Scalar(0) ? mag : -mag;
  });
}

} // namespace idnet
