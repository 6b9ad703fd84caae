#include "idnet/kernel.hpp"

namespace idnet {

KernelBank::KernelBank(std::vector<Kernel> kernels)
  : kernels_{std::move(kernels)}
{
  if (kernels_.empty()) { throw ArgumentError("kernel bank must hold at least one kernel"); }
  for (auto const &k : kernels_) {
    if (k.radius() != kernels_.front().radius()) {
      throw ArgumentError("kernel bank radii differ: " + std::to_string(k.radius()) + " vs " +
                          std::to_string(kernels_.front().radius()));
    }
  }
}

Kernel forward_diff_x(Index radius)
{
  if (radius < 1) { throw ArgumentError("difference stencil needs radius >= 1"); }
  Kernel k(radius);
  k.at(0, 0) = -1.0;
  k.at(0, 1) = 1.0;
  return k;
}

Kernel forward_diff_y(Index radius)
{
  if (radius < 1) { throw ArgumentError("difference stencil needs radius >= 1"); }
  Kernel k(radius);
  k.at(0, 0) = -1.0;
  k.at(1, 0) = 1.0;
  return k;
}

KernelBank make_diff_bank(std::size_t M, Index R)
{
  if (M == 0 || M % 2 != 0) { throw ArgumentError("make_diff_bank: M must be a positive even integer"); }
  if (R < 1) { throw ArgumentError("make_diff_bank: R must be >= 1"); }
  std::vector<Kernel> kernels;
  kernels.reserve(M);
  for (std::size_t m = 0; m < M; m++) {
    kernels.push_back(m % 2 == 0 ? forward_diff_x(R) : forward_diff_y(R));
  }
  return KernelBank(std::move(kernels));
}

} // namespace idnet
