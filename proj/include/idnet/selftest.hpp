#pragma once

#include "admm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace idnet {

// Explicit HW x HW matrix of conv_periodic with kernel k, assembled from the
// index formula (independent of the FFT route).
Eigen::MatrixXd periodic_conv_matrix(Kernel const &k, Index height, Index width);

// Dense solve of the assembled (2HW) x (2HW) (u, v) system.
std::pair<Grid, Grid> dense_lss_solve(Grid const &f, SolverState const &state, KernelBank const &bank,
                                      ModelParams const &params);

struct SelftestCheck
{
  std::string name;
  bool        passed = false;
  double      worst = 0.0;
  double      limit = 0.0;
};

std::vector<SelftestCheck> run_selftest(std::uint64_t seed = 20221018);

} // namespace idnet
