#include "idnet/selftest.hpp"

#include "idnet/synth.hpp"
#include "idnet/unroll.hpp"

#include <algorithm>

namespace idnet {

Eigen::MatrixXd periodic_conv_matrix(Kernel const &k, Index height, Index width)
{
  Index const     n = height * width;
  Index const     R = k.radius();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < height; i++) {
    for (Index j = 0; j < width; j++) {
      for (Index a = -R; a <= R; a++) {
        for (Index b = -R; b <= R; b++) {
          Index const si = ((i + a) % height + height) % height;
          Index const sj = ((j + b) % width + width) % width;
          C(i * width + j, si * width + sj) += k.at(a, b);
        }
      }
    }
  }
  return C;
}

namespace {

Eigen::VectorXd flat(Grid const &g) { return Eigen::Map<Eigen::VectorXd const>(g.data(), g.size()); }

Grid unflat(Eigen::VectorXd const &x, Index height, Index width)
{
  return Eigen::Map<Grid const>(x.data(), height, width);
}

Grid random_grid(SplitMix64 &rng, Index h, Index w, double scale = 1.0)
{
  Grid g(h, w);
  for (Index i = 0; i < g.size(); i++) { g(i) = rng.uniform(-scale, scale); }
  return g;
}

Kernel random_kernel(SplitMix64 &rng, Index R)
{
  Kernel k(R);
  for (Index a = -R; a <= R; a++) {
    for (Index b = -R; b <= R; b++) { k.at(a, b) = rng.uniform(-1.0, 1.0); }
  }
  return k;
}

SolverState random_state(SplitMix64 &rng, std::size_t M, Index h, Index w)
{
  SolverState s = SolverState::zeros(M, h, w);
  for (std::size_t m = 0; m < M; m++) {
    s.p[m] = random_grid(rng, h, w);
    s.lambda_hat[m] = random_grid(rng, h, w);
  }
  s.q = random_grid(rng, h, w);
  s.mu_hat = random_grid(rng, h, w);
  return s;
}

} // namespace

std::pair<Grid, Grid> dense_lss_solve(Grid const &f, SolverState const &state, KernelBank const &bank,
                                      ModelParams const &params)
{
  Index const     H = f.rows();
  Index const     W = f.cols();
  Index const     n = H * W;
  Eigen::MatrixXd E1 = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b1 = flat(f);
  for (std::size_t m = 0; m < bank.width(); m++) {
    Eigen::MatrixXd const C = periodic_conv_matrix(bank[m], H, W);
    E1 += params.r_p * C.transpose() * C;
    b1 += params.r_p * C.transpose() * flat(state.p[m] - state.lambda_hat[m]);
  }
  Eigen::VectorXd const b2 = flat(f) + params.r_q * flat(state.q - state.mu_hat);

  Eigen::MatrixXd A(2 * n, 2 * n);
  A.topLeftCorner(n, n) = E1;
  A.topRightCorner(n, n).setIdentity();
  A.bottomLeftCorner(n, n).setIdentity();
  A.bottomRightCorner(n, n) = params.e2() * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs(2 * n);
  rhs << b1, b2;
  Eigen::VectorXd const x = A.partialPivLu().solve(rhs);
  return {unflat(x.head(n), H, W), unflat(x.tail(n), H, W)};
}

std::vector<SelftestCheck> run_selftest(std::uint64_t seed)
{
  SplitMix64                 rng(seed);
  std::vector<SelftestCheck> checks;

  {
    SelftestCheck c{"dense-solve equivalence (8x8, 5 cases)", true, 0.0, 1e-8};
    KernelBank const  bank = make_diff_bank(2, 1);
    ModelParams const params{{0.6, 0.6}, 0.1, 0.07, 0.07};
    for (int t = 0; t < 5; t++) {
      Grid const        f = random_grid(rng, 8, 8);
      SolverState const s = random_state(rng, 2, 8, 8);
      auto const [u, v] = lss_solve(f, s, bank, params);
      auto const [ud, vd] = dense_lss_solve(f, s, bank, params);
      c.worst = std::max({c.worst, norm_inf(u - ud), norm_inf(v - vd)});
    }
    c.passed = c.worst <= c.limit;
    checks.push_back(c);
  }

  {
    SelftestCheck c{"adjoint identity (random 8x8, 10 cases)", true, 0.0, 1e-10};
    SelftestCheck d{"FFT vs direct convolution (random 8x8, 10 cases)", true, 0.0, 1e-10};
    for (int t = 0; t < 10; t++) {
      Kernel const k = random_kernel(rng, 2);
      Grid const   u = random_grid(rng, 8, 8);
      Grid const   w = random_grid(rng, 8, 8);
      double const gap = std::abs(inner(conv_periodic(u, k), w) - inner(u, adjoint_conv(w, k)));
      c.worst = std::max(c.worst, gap / (norm2(u) * norm2(w)));
      d.worst = std::max(d.worst, norm_inf(conv_periodic(u, k) - apply_otf(u, kernel_otf(k, 8, 8))));
    }
    c.passed = c.worst <= c.limit;
    d.passed = d.worst <= d.limit;
    checks.push_back(c);
    checks.push_back(d);
  }

  Scene const       scene = make_squares_scene(7, 16, 16, 3, 8, 0.6);
  KernelBank const  bank = make_diff_bank(2, 1);
  ModelParams const params{{0.6, 0.6}, 0.1, 0.07, 0.07};
  {
    SelftestCheck c{"truncation equivalence (L = 1, 4, 16)", true, 0.0, 1e-12};
    for (long L : {1L, 4L, 16L}) {
      auto const solved = admm_solve(scene.image, bank, params, StoppingRule{L, std::nullopt});
      auto const net = idnet_forward(scene.image, constant_bundle(bank, params, static_cast<std::size_t>(L)));
      c.worst = std::max({c.worst, norm_inf(solved.u - net.u), norm_inf(solved.v - net.v)});
    }
    c.passed = c.worst <= c.limit;
    checks.push_back(c);
  }

  {
    SelftestCheck c{"KKT report (16x16 scene, 2000 iterations)", true, 0.0, 1e-4};
    auto const    result = admm_solve(scene.image, bank, params, StoppingRule{2000, std::nullopt});
    c.worst = std::max({result.kkt.feasibility_p, result.kkt.feasibility_q, result.kkt.stationarity_u,
                        result.kkt.multiplier_bound_p, result.kkt.multiplier_bound_q});
    c.passed = c.worst <= c.limit;
    checks.push_back(c);
  }
  return checks;
}

} // namespace idnet
