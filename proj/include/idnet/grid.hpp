#pragma once

#include "errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

namespace idnet {

// Pixel (i, j) is (row, column); storage is row-major to match image files.
template <typename Scalar>
using GridT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Grid = GridT<double>;
using Index = Eigen::Index;

template <typename Scalar>
using GridStackT = std::vector<GridT<Scalar>>;

using GridStack = GridStackT<double>;

namespace detail {
inline std::string dims(Index h, Index w) { return std::to_string(h) + "x" + std::to_string(w); }
} // namespace detail

template <typename A, typename B>
void require_same_shape(Eigen::ArrayBase<A> const &a, Eigen::ArrayBase<B> const &b, char const *where)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(where) + ": shape mismatch " + detail::dims(a.rows(), a.cols()) + " vs " +
                     detail::dims(b.rows(), b.cols()));
  }
}

template <typename A, typename B>
typename A::Scalar inner(Eigen::ArrayBase<A> const &a, Eigen::ArrayBase<B> const &b)
{
  require_same_shape(a, b, "inner");
  return (a * b).sum();
}

template <typename A>
typename A::Scalar norm1(Eigen::ArrayBase<A> const &a)
{
  return a.abs().sum();
}

template <typename A>
typename A::Scalar norm2(Eigen::ArrayBase<A> const &a)
{
  return std::sqrt(a.square().sum());
}

template <typename A>
typename A::Scalar norm_inf(Eigen::ArrayBase<A> const &a)
{
  return a.size() == 0 ? typename A::Scalar(0) : a.abs().maxCoeff();
}

// alpha * a + b
template <typename A, typename B>
GridT<typename A::Scalar> axpy(typename A::Scalar alpha, Eigen::ArrayBase<A> const &a, Eigen::ArrayBase<B> const &b)
{
  require_same_shape(a, b, "axpy");
  return alpha * a + b;
}

template <typename A>
bool all_finite(Eigen::ArrayBase<A> const &a)
{
  return a.isFinite().all();
}

// Checks the GridStack invariant: nonempty with uniform channel dimensions.
template <typename Scalar>
void validate_stack(GridStackT<Scalar> const &stack, char const *where)
{
  if (stack.empty()) { throw ShapeError(std::string(where) + ": empty grid stack"); }
  for (auto const &g : stack) {
    require_same_shape(g, stack.front(), where);
  }
}

template <typename Scalar>
GridStackT<Scalar> zero_stack(std::size_t channels, Index height, Index width)
{
  return GridStackT<Scalar>(channels, GridT<Scalar>::Zero(height, width));
}

} // namespace idnet
