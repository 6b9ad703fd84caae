#pragma once

#include "grid.hpp"

#include <cstdint>

namespace idnet {

// SplitMix64 (Steele, Lea & Flood 2014). Portable across platforms:
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class SplitMix64
{
public:
  explicit SplitMix64(std::uint64_t seed)
    : state_{seed}
  {
  }

  std::uint64_t next();
  // Top 53 bits scaled to [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // next() mod (hi - lo + 1), offset by lo. Inclusive bounds.
  std::int64_t integer(std::int64_t lo, std::int64_t hi);

private:
  std::uint64_t state_;
};

struct Scene
{
  Grid image;        // background + impulse_map
  Grid background;   // sum of constant rectangles
  Grid impulse_map;  // sparse additive layer
  Grid impulse_mask; // 1 where impulse_map is nonzero by construction
};

// Rectangles have side lengths uniform in [ceil(H/3), floor(2H/3)] (resp. W)
// and intensities uniform in [0.2, 0.8]. Impulses are +-amplitude spikes at
// distinct pixels, sign drawn per impulse.
Scene make_squares_scene(std::uint64_t seed, Index height, Index width, int n_squares, int n_impulses,
                         double impulse_amplitude);

} // namespace idnet
