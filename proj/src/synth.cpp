#include "idnet/synth.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace idnet {

std::uint64_t SplitMix64::next()
{
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::int64_t SplitMix64::integer(std::int64_t lo, std::int64_t hi)
{
  if (hi < lo) { throw ArgumentError("SplitMix64::integer: empty range"); }
  auto const span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(next() % span);
}

namespace {

std::pair<Index, Index> side_range(Index n)
{
  Index lo = std::max<Index>(1, (n + 2) / 3);
  Index hi = std::max<Index>(lo, (2 * n) / 3);
  return {lo, hi};
}

} // namespace

Scene make_squares_scene(std::uint64_t seed, Index height, Index width, int n_squares, int n_impulses,
                         double impulse_amplitude)
{
  if (height < 1 || width < 1) { throw ArgumentError("make_squares_scene: size must be at least 1x1"); }
  if (n_squares < 0 || n_impulses < 0) { throw ArgumentError("make_squares_scene: counts must be >= 0"); }
  if (!std::isfinite(impulse_amplitude)) { throw ArgumentError("make_squares_scene: amplitude must be finite"); }
  if (static_cast<double>(n_impulses) > 0.05 * static_cast<double>(height * width)) {
    throw ArgumentError("make_squares_scene: " + std::to_string(n_impulses) + " impulses exceed 5% of " +
                        std::to_string(height * width) + " pixels");
  }

  SplitMix64 rng(seed);
  Scene      scene;
  scene.background = Grid::Zero(height, width);
  auto const [hlo, hhi] = side_range(height);
  auto const [wlo, whi] = side_range(width);
  for (int s = 0; s < n_squares; s++) {
    Index const h = rng.integer(hlo, hhi);
    Index const w = rng.integer(wlo, whi);
    Index const top = rng.integer(0, height - h);
    Index const left = rng.integer(0, width - w);
    double const level = rng.uniform(0.2, 0.8);
    scene.background.block(top, left, h, w) += level;
  }

  scene.impulse_map = Grid::Zero(height, width);
  scene.impulse_mask = Grid::Zero(height, width);
  // Partial Fisher-Yates over flat pixel indices gives distinct locations.
  std::vector<Index> order(static_cast<std::size_t>(height * width));
  std::iota(order.begin(), order.end(), Index{0});
  for (int k = 0; k < n_impulses; k++) {
    auto const pick = static_cast<std::size_t>(rng.integer(k, static_cast<std::int64_t>(order.size()) - 1));
    std::swap(order[static_cast<std::size_t>(k)], order[pick]);
    Index const  flat = order[static_cast<std::size_t>(k)];
    double const sign = (rng.next() & 1U) ? 1.0 : -1.0;
    scene.impulse_map(flat / width, flat % width) = sign * impulse_amplitude;
    scene.impulse_mask(flat / width, flat % width) = 1.0;
  }
  scene.image = scene.background + scene.impulse_map;
  return scene;
}

} // namespace idnet
