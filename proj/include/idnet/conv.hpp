#pragma once

#include "kernel.hpp"

#include <complex>
#include <memory>

namespace idnet {

namespace detail {

// out(i, j) += t * img((i + di) mod H, (j + dj) mod W)
template <typename Scalar>
void accumulate_shifted(GridT<Scalar> &out, GridT<Scalar> const &img, Scalar t, Index di, Index dj)
{
  Index const H = img.rows();
  Index const W = img.cols();
  Index const sj = ((dj % W) + W) % W;
  for (Index i = 0; i < H; i++) {
    Index const si = (((i + di) % H) + H) % H;
    out.row(i).head(W - sj) += t * img.row(si).tail(W - sj);
    if (sj > 0) { out.row(i).tail(sj) += t * img.row(si).head(sj); }
  }
}

} // namespace detail

// Periodic correlation with the stored taps:
//   out(i, j) = sum_{a,b} k(a, b) * img((i + a) mod H, (j + b) mod W).
template <typename Scalar>
GridT<Scalar> conv_periodic(GridT<Scalar> const &img, KernelT<Scalar> const &k)
{
  GridT<Scalar> out = GridT<Scalar>::Zero(img.rows(), img.cols());
  if (img.size() == 0) { return out; }
  Index const R = k.radius();
  for (Index a = -R; a <= R; a++) {
    for (Index b = -R; b <= R; b++) {
      if (k.at(a, b) != Scalar(0)) { detail::accumulate_shifted(out, img, k.at(a, b), a, b); }
    }
  }
  return out;
}

// K^T: periodic convolution with the same taps (correlation with the flipped stencil).
//   out(i, j) = sum_{a,b} k(a, b) * img((i - a) mod H, (j - b) mod W).
template <typename Scalar>
GridT<Scalar> adjoint_conv(GridT<Scalar> const &img, KernelT<Scalar> const &k)
{
  GridT<Scalar> out = GridT<Scalar>::Zero(img.rows(), img.cols());
  if (img.size() == 0) { return out; }
  Index const R = k.radius();
  for (Index a = -R; a <= R; a++) {
    for (Index b = -R; b <= R; b++) {
      if (k.at(a, b) != Scalar(0)) { detail::accumulate_shifted(out, img, k.at(a, b), -a, -b); }
    }
  }
  return out;
}

using Complex = std::complex<double>;
using Spectrum = GridT<Complex>;

// Fourier symbol of a kernel on an H x W periodic grid, in the frequency
// layout produced by fft2 (bin (0, 0) is DC).
class Otf
{
public:
  Otf() = default;
  explicit Otf(Spectrum values)
    : values_{std::move(values)}
  {
  }

  Index height() const { return values_.rows(); }
  Index width() const { return values_.cols(); }
  Spectrum const &values() const { return values_; }

  // |K^|^2 per frequency.
  Grid power() const { return values_.abs2(); }

private:
  Spectrum values_;
};

Otf kernel_otf(Kernel const &k, Index height, Index width);

// Forward / inverse 2D DFT. Inverse includes the 1/(HW) factor.
Spectrum fft2(Grid const &img);
Spectrum fft2(Spectrum const &img);
Grid ifft2_real(Spectrum const &spec);

// Periodic convolution through the Fourier route: real(ifft2(otf .* fft2(img))).
Grid apply_otf(Grid const &img, Otf const &otf);
// Adjoint through the Fourier route (conjugate symbol).
Grid apply_otf_adjoint(Grid const &img, Otf const &otf);

// Number of distinct (height, width) plans currently held by the process-wide cache.
std::size_t fft_plan_cache_size();

} // namespace idnet
