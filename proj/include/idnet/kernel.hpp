#pragma once

#include "grid.hpp"

#include <vector>

namespace idnet {

// A (2R+1)x(2R+1) stencil anchored at its center tap. Tap (R + a, R + b)
// weights the pixel at offset (a, b) from the output pixel.
template <typename Scalar>
class KernelT
{
public:
  using Taps = GridT<Scalar>;

  KernelT() = default;

  explicit KernelT(Index radius)
    : radius_{radius}
    , taps_{Taps::Zero(2 * radius + 1, 2 * radius + 1)}
  {
    if (radius < 0) { throw ArgumentError("kernel radius must be nonnegative"); }
  }

  KernelT(Index radius, Taps taps)
    : radius_{radius}
    , taps_{std::move(taps)}
  {
    if (radius < 0) { throw ArgumentError("kernel radius must be nonnegative"); }
    if (taps_.rows() != 2 * radius + 1 || taps_.cols() != 2 * radius + 1) {
      throw ShapeError("kernel taps must be " + detail::dims(2 * radius + 1, 2 * radius + 1) + ", got " +
                       detail::dims(taps_.rows(), taps_.cols()));
    }
    if (!all_finite(taps_)) { throw ArgumentError("kernel taps must be finite"); }
  }

  static KernelT delta(Index radius)
  {
    KernelT k(radius);
    k.taps_(radius, radius) = Scalar(1);
    return k;
  }

  Index radius() const { return radius_; }
  Index size() const { return 2 * radius_ + 1; }
  Taps const &taps() const { return taps_; }

  // Tap weighting offset (a, b), a and b in [-R, R].
  Scalar at(Index a, Index b) const { return taps_(radius_ + a, radius_ + b); }
  Scalar &at(Index a, Index b) { return taps_(radius_ + a, radius_ + b); }

  bool operator==(KernelT const &other) const
  {
    return radius_ == other.radius_ && (taps_ == other.taps_).all();
  }

private:
  Index radius_ = 0;
  Taps taps_ = Taps::Zero(1, 1);
};

using Kernel = KernelT<double>;

// Ordered family K_1..K_M sharing one radius.
class KernelBank
{
public:
  KernelBank() = default;
  explicit KernelBank(std::vector<Kernel> kernels);

  std::size_t width() const { return kernels_.size(); }
  Index radius() const { return kernels_.empty() ? 0 : kernels_.front().radius(); }
  Kernel const &operator[](std::size_t m) const { return kernels_[m]; }
  // Writable tap of kernel m at offset (a, b); radii stay uniform.
  double &tap(std::size_t m, Index a, Index b) { return kernels_.at(m).at(a, b); }
  std::vector<Kernel> const &kernels() const { return kernels_; }

  auto begin() const { return kernels_.begin(); }
  auto end() const { return kernels_.end(); }

  bool operator==(KernelBank const &other) const { return kernels_ == other.kernels_; }

private:
  std::vector<Kernel> kernels_;
};

// Forward differences with periodic wrap:
//   (dx u)(i, j) = u(i, j+1) - u(i, j),   (dy u)(i, j) = u(i+1, j) - u(i, j).
Kernel forward_diff_x(Index radius);
Kernel forward_diff_y(Index radius);

// Alternating {dx, dy, dx, dy, ...} of length M (M even), embedded in radius R.
KernelBank make_diff_bank(std::size_t M, Index R);

} // namespace idnet
