#include "idnet/conv.hpp"
#include "idnet/prox.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <numbers>
#include <random>
#include <thread>

using namespace idnet;

namespace {

Grid g22(double a, double b, double c, double d)
{
  Grid g(2, 2);
  g << a, b, c, d;
  return g;
}

} // namespace

TEST_CASE("make_diff_bank alternates dx and dy")
{
  KernelBank const bank = make_diff_bank(2, 2);
  REQUIRE(bank.width() == 2);
  CHECK(bank.radius() == 2);
  for (auto const &k : bank) {
    CHECK(k.size() == 5);
    CHECK((k.taps() != 0.0).count() == 2);
    CHECK(k.taps().sum() == 0.0);
    CHECK(k.at(0, 0) == -1.0);
  }
  CHECK(bank[0].at(0, 1) == 1.0);
  CHECK(bank[1].at(1, 0) == 1.0);

  KernelBank const wide = make_diff_bank(4, 1);
  CHECK(wide[0] == wide[2]);
  CHECK(wide[1] == wide[3]);

  CHECK_THROWS_AS(make_diff_bank(3, 2), ArgumentError);
  CHECK_THROWS_AS(make_diff_bank(0, 2), ArgumentError);
  CHECK_THROWS_AS(make_diff_bank(2, 0), ArgumentError);
}

TEST_CASE("kernel bank requires uniform radius")
{
  CHECK_THROWS_AS(KernelBank({Kernel::delta(1), Kernel::delta(2)}), ArgumentError);
  CHECK_THROWS_AS(KernelBank(std::vector<Kernel>{}), ArgumentError);
  CHECK_THROWS_AS(Kernel(1, Kernel::Taps::Zero(2, 3)), ShapeError);
}

TEST_CASE("conv_periodic examples")
{
  KernelBank const bank = make_diff_bank(2, 1);
  for (auto const &k : bank) { CHECK((conv_periodic(Grid(Grid::Constant(5, 7, 3.25)), k) == 0.0).all()); }
  CHECK((conv_periodic(g22(1, 2, 3, 4), bank[0]) == g22(1, -1, 1, -1)).all());
  CHECK((conv_periodic(g22(1, 2, 3, 4), bank[1]) == g22(2, 2, -2, -2)).all());

  std::mt19937_64 gen(3);
  Grid const      img = oracle::random_grid(gen, 6, 9);
  CHECK((conv_periodic(img, Kernel::delta(2)) == img).all());
  CHECK((conv_periodic(Grid(Grid::Zero(4, 4)), oracle::random_kernel(gen, 2)) == 0.0).all());
}

TEST_CASE("conv_periodic matches the sliding-window oracle, including wrap past the image size")
{
  std::mt19937_64 gen(5);
  for (auto [h, w, R] : {std::tuple{8, 8, 2}, {3, 5, 2}, {1, 4, 1}, {7, 2, 3}}) {
    Grid const   img = oracle::random_grid(gen, h, w);
    Kernel const k = oracle::random_kernel(gen, R);
    CHECK(norm_inf(conv_periodic(img, k) - oracle::brute_correlate(img, k)) <= 1e-13);
  }
}

TEST_CASE("adjoint_conv examples")
{
  KernelBank const bank = make_diff_bank(2, 1);
  CHECK((adjoint_conv(g22(1, -1, 1, -1), bank[0]) == g22(-2, 2, -2, 2)).all());
  std::mt19937_64 gen(9);
  Grid const      w = oracle::random_grid(gen, 5, 4);
  CHECK((adjoint_conv(w, Kernel::delta(1)) == w).all());
}

TEST_CASE("adjoint identity on random inputs")
{
  std::mt19937_64 gen(17);
  for (int t = 0; t < 30; t++) {
    Index const  h = 3 + static_cast<Index>(gen() % 10);
    Index const  w = 3 + static_cast<Index>(gen() % 10);
    Kernel const k = oracle::random_kernel(gen, 1 + static_cast<Index>(gen() % 2));
    Grid const   u = oracle::random_grid(gen, h, w);
    Grid const   v = oracle::random_grid(gen, h, w);
    double const gap = std::abs(inner(conv_periodic(u, k), v) - inner(u, adjoint_conv(v, k)));
    CHECK(gap <= 1e-10 * norm2(u) * norm2(v));
  }
}

TEST_CASE("kernel_otf")
{
  Otf const id = kernel_otf(Kernel::delta(2), 6, 8);
  CHECK(norm_inf(Grid(id.values().real() - 1.0)) <= 1e-15);
  CHECK(norm_inf(Grid(id.values().imag())) <= 1e-15);

  Index const W = 8;
  Otf const   dx = kernel_otf(forward_diff_x(1), 4, W);
  for (Index j = 0; j < W; j++) {
    // correlation orientation: symbol exp(+2 pi i j / W) - 1 for every row frequency
    Complex const expected = std::exp(Complex(0.0, 2.0 * std::numbers::pi * static_cast<double>(j) / W)) - 1.0;
    for (Index i = 0; i < 4; i++) { CHECK(std::abs(dx.values()(i, j) - expected) <= 1e-14); }
  }
  CHECK(std::abs(dx.values()(0, 0)) <= 1e-15);
  Grid const power = dx.power();
  CHECK(power.maxCoeff() == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(power(0, W / 2) == doctest::Approx(4.0).epsilon(1e-14));

  CHECK_THROWS_AS(kernel_otf(Kernel::delta(2), 4, 8), ArgumentError);
}

TEST_CASE("FFT route equals direct periodic convolution")
{
  std::mt19937_64 gen(23);
  for (int t = 0; t < 40; t++) {
    Index const  h = 5 + static_cast<Index>(gen() % 28);
    Index const  w = 5 + static_cast<Index>(gen() % 28);
    Kernel const k = oracle::random_kernel(gen, 2);
    Grid const   img = oracle::random_grid(gen, h, w);
    Otf const    otf = kernel_otf(k, h, w);
    CHECK(norm_inf(apply_otf(img, otf) - conv_periodic(img, k)) <= 1e-10);
    CHECK(norm_inf(apply_otf_adjoint(img, otf) - adjoint_conv(img, k)) <= 1e-10);
  }
}

TEST_CASE("FFT plans are cached and usable from several threads")
{
  std::mt19937_64 gen(29);
  Grid const      img = oracle::random_grid(gen, 12, 10);
  Kernel const    k = oracle::random_kernel(gen, 2);
  Grid const      expected = conv_periodic(img, k);
  Otf const       otf = kernel_otf(k, 12, 10);
  std::size_t const before = fft_plan_cache_size();

  std::vector<double>      worst(4, 0.0);
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < worst.size(); t++) {
    workers.emplace_back([&, t] {
      for (int r = 0; r < 25; r++) { worst[t] = std::max(worst[t], norm_inf(apply_otf(img, otf) - expected)); }
    });
  }
  for (auto &w : workers) { w.join(); }
  for (double w : worst) { CHECK(w <= 1e-10); }
  CHECK(fft_plan_cache_size() == before);
}

TEST_CASE("soft_threshold examples")
{
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(2.5, 1.0) == 1.5);
  for (double x : {-4.0, -0.1, 0.0, 0.3, 7.0}) { CHECK(soft_threshold(x, 0.0) == x); }
  CHECK_THROWS_AS(soft_threshold(1.0, -0.5), ArgumentError);
  CHECK_THROWS_AS(soft_threshold(Grid::Ones(2, 2), -0.5), ArgumentError);
}

TEST_CASE("soft_threshold is the prox of gamma |.|")
{
  std::mt19937_64                        gen(31);
  std::uniform_real_distribution<double> xs(-3.0, 3.0);
  std::uniform_real_distribution<double> gs(0.0, 2.0);
  for (int t = 0; t < 200; t++) {
    double const x = xs(gen);
    double const g = gs(gen);
    auto const   cost = [&](double s) { return g * std::abs(s) + 0.5 * (s - x) * (s - x); };
    double       best = cost(0.0);
    for (int i = -40000; i <= 40000; i++) { best = std::min(best, cost(i * 1e-4)); }
    double const s = soft_threshold(x, g);
    CHECK(cost(s) <= best + 1e-12);
  }
}

TEST_CASE("soft_threshold is odd and 1-Lipschitz")
{
  std::mt19937_64                        gen(37);
  std::uniform_real_distribution<double> xs(-5.0, 5.0);
  for (int t = 0; t < 500; t++) {
    double const a = xs(gen);
    double const b = xs(gen);
    double const g = std::abs(xs(gen));
    CHECK(soft_threshold(-a, g) == -soft_threshold(a, g));
    CHECK(std::abs(soft_threshold(a, g) - soft_threshold(b, g)) <= std::abs(a - b) + 1e-15);
  }
  Grid x(1, 3);
  x << -2.0, 0.1, 1.5;
  Grid const y = soft_threshold(x, 0.5);
  CHECK(y(0) == -1.5);
  CHECK(y(1) == 0.0);
  CHECK(y(2) == 1.0);
}
