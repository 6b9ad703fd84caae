#include "idnet/image_io.hpp"
#include "idnet/pipeline.hpp"
#include "idnet/synth.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace idnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(std::string const &name)
{
  fs::path const dir = fs::temp_directory_path() / "idnet_test_pipeline";
  fs::create_directories(dir);
  return dir / name;
}

RunConfig admm_config(std::size_t M = 2, long iters = 30)
{
  RunConfig c;
  c.mode = RunConfig::Mode::admm;
  c.bank = make_diff_bank(M, 1);
  c.params = ModelParams{std::vector<double>(M, 0.3), 0.1, 0.07, 0.07};
  c.stop = StoppingRule{iters, std::nullopt};
  return c;
}

} // namespace

TEST_CASE("PFM round trip is bit-exact at float32")
{
  std::mt19937_64 gen(401);
  Grid const      g = oracle::random_grid(gen, 7, 5, 100.0);
  std::stringstream ss;
  write_pfm(ss, g);
  std::string const bytes = ss.str();
  CHECK(bytes.rfind("Pf\n5 7\n-1.0\n", 0) == 0);
  CHECK(bytes.size() == std::string("Pf\n5 7\n-1.0\n").size() + 4 * 35);

  // first stored scanline is the bottom row
  float first;
  std::memcpy(&first, bytes.data() + 12, 4);
  CHECK(first == static_cast<float>(g(6, 0)));

  GridStack const back = read_pfm(ss);
  REQUIRE(back.size() == 1);
  for (Index i = 0; i < g.size(); i++) { CHECK(back[0](i) == static_cast<double>(static_cast<float>(g(i)))); }

  // a second write/read cycle is the identity
  std::stringstream again;
  write_pfm(again, back[0]);
  CHECK(again.str() == bytes);
}

TEST_CASE("PFM big-endian and color variants")
{
  std::string data = "PF\n2 1\n1.0\n";
  float const vals[6] = {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f};
  for (float v : vals) {
    unsigned char b[4];
    std::memcpy(b, &v, 4);
    for (int k = 3; k >= 0; k--) { data.push_back(static_cast<char>(b[k])); }
  }
  std::istringstream in(data);
  GridStack const    rgb = read_pfm(in);
  REQUIRE(rgb.size() == 3);
  CHECK(rgb[0](0, 0) == 1.0);
  CHECK(rgb[1](0, 0) == 2.0);
  CHECK(rgb[2](0, 1) == 6.0);

  std::istringstream truncated("Pf\n2 2\n-1.0\nabc");
  CHECK_THROWS_AS(read_pfm(truncated), ParseError);
  std::istringstream junk("P7\n");
  CHECK_THROWS_AS(read_pfm(junk), ParseError);
}

TEST_CASE("PGM and PPM are normalized by maxval")
{
  std::istringstream p2("P2\n# comment\n3 2\n255\n0 51 255\n102 204 0\n");
  GridStack const    g = read_pnm(p2);
  REQUIRE(g.size() == 1);
  CHECK(g[0](0, 1) == doctest::Approx(0.2));
  CHECK(g[0](1, 1) == doctest::Approx(0.8));
  CHECK(g[0](0, 2) == 1.0);

  std::string p5 = "P5\n2 1\n255\n";
  p5.push_back(static_cast<char>(255));
  p5.push_back(static_cast<char>(0));
  std::istringstream in5(p5);
  GridStack const    g5 = read_pnm(in5);
  CHECK(g5[0](0, 0) == 1.0);
  CHECK(g5[0](0, 1) == 0.0);

  std::istringstream p3("P3\n1 1\n15\n15 0 3\n");
  GridStack const    c = read_pnm(p3);
  REQUIRE(c.size() == 3);
  CHECK(c[0](0, 0) == 1.0);
  CHECK(c[2](0, 0) == doctest::Approx(0.2));
}

TEST_CASE("PNG write and read")
{
  Grid gray(2, 3);
  gray << 0.0, 0.5, 1.0, 0.2, 0.8, 2.0;
  std::string const path = scratch("gray.png").string();
  write_png(path, {gray});
  GridStack const back = read_image(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0](0, 1) == doctest::Approx(128.0 / 255.0));
  CHECK(back[0](1, 2) == 1.0);
  CHECK(back[0](1, 0) == doctest::Approx(51.0 / 255.0));

  std::string const rgb_path = scratch("rgb.png").string();
  write_png(rgb_path, {gray, Grid(1.0 - gray.min(1.0)), Grid::Zero(2, 3)});
  GridStack const rgb = read_image(rgb_path);
  REQUIRE(rgb.size() == 3);
  CHECK(rgb[1](0, 0) == 1.0);
  CHECK(rgb[2](1, 1) == 0.0);

  CHECK_THROWS_AS(read_image(scratch("missing.png").string()), IoError);
}

TEST_CASE("log and exp transforms")
{
  Grid g(1, 3);
  g << 0.0, 1.0, 0.5;
  GridStack const l = log_transform({g});
  CHECK(l[0](0, 0) == doctest::Approx(-6.907755).epsilon(1e-7));
  CHECK(l[0](0, 1) == 0.0);
  GridStack const e = exp_transform(l);
  CHECK(e[0](0, 1) == 1.0);
  CHECK(e[0](0, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e[0](0, 0) == doctest::Approx(1e-3).epsilon(1e-15));

  std::mt19937_64                        gen(409);
  std::uniform_real_distribution<double> unit(1e-3, 1.0);
  Grid                                   r(6, 6);
  for (Index i = 0; i < r.size(); i++) { r(i) = unit(gen); }
  Grid const rr = exp_transform(log_transform({r}))[0];
  CHECK(((rr - r).abs() <= 1e-15 * r.abs()).all());
  CHECK_THROWS_AS(log_transform({g}, 0.0), ArgumentError);
}

TEST_CASE("channel plan validation")
{
  ChannelPlan plan{{0, 1}, {2}, false, kDefaultLogEps};
  CHECK_NOTHROW(plan.validate(3));
  CHECK_THROWS_AS(plan.validate(2), ArgumentError);
  plan.passthrough_channels = {1};
  CHECK_THROWS_AS(plan.validate(3), ArgumentError);
  plan = ChannelPlan{{}, {0}, false, kDefaultLogEps};
  CHECK_THROWS_AS(plan.validate(3), ArgumentError);
  plan = ChannelPlan{{0, 0}, {}, false, kDefaultLogEps};
  CHECK_THROWS_AS(plan.validate(3), ArgumentError);
}

TEST_CASE("run config validation")
{
  RunConfig c = admm_config();
  CHECK_NOTHROW(c.validate());
  c.bundle = init_default(2, 2, 1);
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = admm_config();
  c.mode = RunConfig::Mode::unroll;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c.bank.reset();
  c.params.reset();
  c.bundle = init_default(2, 2, 1);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("RGB plus FOV stacks into seven channels")
{
  Scene const     s = make_squares_scene(17, 12, 12, 2, 3, 0.3);
  Grid const      fov = Grid::Ones(12, 12);
  GridStack const F = {Grid(s.image * 0.5 + 0.1), Grid(s.background * 0.5 + 0.1), Grid(s.image * 0.3 + 0.2), fov};
  ChannelPlan const plan{{0, 1, 2}, {3}, true, kDefaultLogEps};
  RunConfig         cfg;
  cfg.mode = RunConfig::Mode::unroll;
  cfg.bundle = init_default(4, 3, 1);
  auto const r = decompose_multichannel(F, plan, cfg);
  CHECK(r.U.size() == 3);
  CHECK(r.V.size() == 3);
  REQUIRE(r.stacked.size() == 7);
  for (std::size_t k = 0; k < 3; k++) {
    CHECK((r.stacked[k] == r.U[k]).all());
    CHECK((r.stacked[3 + k] == r.V[k]).all());
  }
  CHECK((r.stacked[6] == fov).all());
}

TEST_CASE("constant-one channel in log mode gives (1, 1)")
{
  ChannelPlan const plan{{0}, {}, true, kDefaultLogEps};
  auto const        r = decompose_multichannel({Grid::Ones(6, 6)}, plan, admm_config());
  CHECK(norm_inf(Grid(r.U[0] - 1.0)) <= 1e-14);
  CHECK(norm_inf(Grid(r.V[0] - 1.0)) <= 1e-14);
}

TEST_CASE("identical channels give identical outputs, serial or parallel")
{
  Scene const       s = make_squares_scene(19, 10, 10, 2, 3, 0.4);
  ChannelPlan const plan{{0, 1, 2}, {}, false, kDefaultLogEps};
  RunConfig         cfg = admm_config();
  auto const        par = decompose_multichannel({s.image, s.image, s.image}, plan, cfg);
  cfg.parallel = false;
  auto const ser = decompose_multichannel({s.image, s.image, s.image}, plan, cfg);
  for (std::size_t k = 1; k < 3; k++) {
    CHECK((par.U[k] == par.U[0]).all());
    CHECK((par.V[k] == par.V[0]).all());
  }
  CHECK((par.U[0] == ser.U[0]).all());
  auto const single = decompose_channel(s.image, cfg);
  CHECK((single.first == par.U[0]).all());
  CHECK((single.second == par.V[0]).all());
  REQUIRE(par.runs.size() == 3);
  CHECK(par.runs[0].solve.has_value());
}

TEST_CASE("channel errors carry the channel index")
{
  Grid bad = Grid::Ones(6, 6);
  bad(2, 2) = std::nan("");
  ChannelPlan const plan{{0, 1}, {}, false, kDefaultLogEps};
  try {
    decompose_multichannel({Grid::Ones(6, 6), bad}, plan, admm_config());
    FAIL("expected an error");
  } catch (Error const &e) {
    CHECK(std::string(e.what()).find("channel 1") != std::string::npos);
  }
}

TEST_CASE("manifest round trip")
{
  std::mt19937_64 gen(419);
  std::vector<NamedChannel> const channels = {{"U0", oracle::random_grid(gen, 4, 5)}, {"V0", oracle::random_grid(gen, 4, 5)}};
  fs::path const dir = scratch("manifest");
  fs::remove_all(dir);
  write_manifest_dir(dir.string(), channels);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "U0.pfm"));
  auto const back = read_manifest((dir / "manifest.json").string());
  REQUIRE(back.size() == 2);
  CHECK(back[1].name == "V0");
  for (Index i = 0; i < 20; i++) {
    CHECK(back[1].grid(i) == static_cast<double>(static_cast<float>(channels[1].grid(i))));
  }
  CHECK_THROWS_AS(read_manifest((dir / "nope.json").string()), IoError);
}

TEST_CASE("trace CSV format")
{
  DecompositionResult r;
  r.objective_trace = {1.0 / 3.0, 0.25};
  r.primal_residual_p = {1e-3, 2e-4};
  r.primal_residual_q = {0.5, 0.125};
  r.dual_residual = {2.0, 1.0};
  std::ostringstream out;
  write_trace_csv(out, r);
  CHECK(out.str() == "iteration,objective,primal_p,primal_q,dual\n"
                     "1,0.333333333333,0.001,0.5,2\n"
                     "2,0.25,0.0002,0.125,1\n");

  LayerTrace t;
  t.layers.push_back(LayerSnapshot{Grid(), Grid(), 0.5, 2.0 / 3.0});
  std::ostringstream lo;
  write_layer_trace_csv(lo, t);
  CHECK(lo.str() == "layer,primal_p,primal_q\n1,0.5,0.666666666667\n");
  CHECK(format_number(123456789.123456789) == "123456789.123");
}
