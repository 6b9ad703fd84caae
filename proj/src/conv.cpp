#include "idnet/conv.hpp"

#include <unsupported/Eigen/FFT>

#include <map>
#include <mutex>
#include <shared_mutex>

namespace idnet {

namespace {

// One kissfft-backed plan per (height, width). Eigen::FFT keeps scratch
// buffers inside its plans, so each transform holds the plan's mutex.
struct FftPlan
{
  Eigen::FFT<double> engine;
  std::mutex         lock;
  Eigen::VectorXcd   line_in;
  Eigen::VectorXcd   line_out;

  void transform(Spectrum &data, bool inverse)
  {
    std::lock_guard<std::mutex> guard(lock);
    Index const H = data.rows();
    Index const W = data.cols();
    line_in.resize(W);
    for (Index i = 0; i < H; i++) {
      line_in = data.row(i).transpose();
      if (inverse) {
        engine.inv(line_out, line_in);
      } else {
        engine.fwd(line_out, line_in);
      }
      data.row(i) = line_out.transpose();
    }
    line_in.resize(H);
    for (Index j = 0; j < W; j++) {
      line_in = data.col(j);
      if (inverse) {
        engine.inv(line_out, line_in);
      } else {
        engine.fwd(line_out, line_in);
      }
      data.col(j) = line_out;
    }
  }
};

class PlanCache
{
public:
  std::shared_ptr<FftPlan> get(Index h, Index w)
  {
    auto const key = std::make_pair(h, w);
    {
      std::shared_lock<std::shared_mutex> read(mutex_);
      auto it = plans_.find(key);
      if (it != plans_.end()) { return it->second; }
    }
    std::unique_lock<std::shared_mutex> write(mutex_);
    auto &slot = plans_[key];
    if (!slot) { slot = std::make_shared<FftPlan>(); }
    return slot;
  }

  std::size_t size() const
  {
    std::shared_lock<std::shared_mutex> read(mutex_);
    return plans_.size();
  }

private:
  mutable std::shared_mutex                             mutex_;
  std::map<std::pair<Index, Index>, std::shared_ptr<FftPlan>> plans_;
};

PlanCache &cache()
{
  static PlanCache instance;
  return instance;
}

} // namespace

Spectrum fft2(Spectrum const &img)
{
  Spectrum out = img;
  if (out.size() == 0) { return out; }
  cache().get(out.rows(), out.cols())->transform(out, false);
  return out;
}

Spectrum fft2(Grid const &img) { return fft2(Spectrum(img.cast<Complex>())); }

Grid ifft2_real(Spectrum const &spec)
{
  Spectrum out = spec;
  if (out.size() == 0) { return Grid(out.rows(), out.cols()); }
  cache().get(out.rows(), out.cols())->transform(out, true);
  return out.real();
}

std::size_t fft_plan_cache_size() { return cache().size(); }

Otf kernel_otf(Kernel const &k, Index height, Index width)
{
  if (height < 1 || width < 1) { throw ArgumentError("kernel_otf: grid must be at least 1x1"); }
  if (k.size() > std::min(height, width)) {
    throw ArgumentError("kernel_otf: kernel " + detail::dims(k.size(), k.size()) + " does not fit grid " +
                        detail::dims(height, width));
  }
  // Tap at offset (a, b) goes to (-a, -b) so that the forward DFT yields the
  // symbol of the correlation used by conv_periodic.
  Grid embedded = Grid::Zero(height, width);
  Index const R = k.radius();
  for (Index a = -R; a <= R; a++) {
    for (Index b = -R; b <= R; b++) {
      embedded(((-a) % height + height) % height, ((-b) % width + width) % width) += k.at(a, b);
    }
  }
  return Otf(fft2(embedded));
}

Grid apply_otf(Grid const &img, Otf const &otf)
{
  require_same_shape(img, otf.values().real(), "apply_otf");
  return ifft2_real(fft2(img) * otf.values());
}

Grid apply_otf_adjoint(Grid const &img, Otf const &otf)
{
  require_same_shape(img, otf.values().real(), "apply_otf_adjoint");
  return ifft2_real(fft2(img) * otf.values().conjugate());
}

} // namespace idnet
