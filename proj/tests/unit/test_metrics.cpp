#include "idnet/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace idnet;

namespace {

Grid row(std::initializer_list<double> values)
{
  Grid g(1, static_cast<Index>(values.size()));
  Index j = 0;
  for (double x : values) { g(0, j++) = x; }
  return g;
}

// Pairwise count over all positive/negative pairs.
double brute_auc(Grid const &s, Grid const &t)
{
  double wins = 0.0;
  double pairs = 0.0;
  for (Index i = 0; i < s.size(); i++) {
    if (t(i) != 1.0) { continue; }
    for (Index j = 0; j < s.size(); j++) {
      if (t(j) != 0.0) { continue; }
      pairs += 1.0;
      wins += s(i) > s(j) ? 1.0 : (s(i) == s(j) ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

Grid random_mask(std::mt19937_64 &gen, Index h, Index w, double p)
{
  std::bernoulli_distribution coin(p);
  Grid                        g(h, w);
  for (Index i = 0; i < g.size(); i++) { g(i) = coin(gen) ? 1.0 : 0.0; }
  return g;
}

} // namespace

TEST_CASE("confusion examples")
{
  Grid pred(2, 2);
  pred << 1, 0, 1, 0;
  Grid truth(2, 2);
  truth << 1, 1, 0, 0;
  CHECK(confusion(pred, truth) == ConfusionCounts{1, 1, 1, 1});

  ConfusionCounts const same = confusion(truth, truth);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  ConfusionCounts const flipped = confusion(Grid(1.0 - truth), truth);
  CHECK(flipped.tp == 0);
  CHECK(flipped.tn == 0);

  Grid region(2, 2);
  region << 1, 1, 0, 0;
  ConfusionCounts const restricted = confusion(pred, truth, &region);
  CHECK(restricted == ConfusionCounts{1, 0, 1, 0});
  CHECK(restricted.total() == 2);
}

TEST_CASE("confusion errors")
{
  Grid const ok = Grid::Zero(2, 2);
  Grid       bad = Grid::Zero(2, 2);
  bad(0, 0) = 0.5;
  CHECK_THROWS_AS(confusion(bad, ok), ArgumentError);
  CHECK_THROWS_AS(confusion(ok, bad), ArgumentError);
  CHECK_THROWS_AS(confusion(ok, Grid(Grid::Zero(2, 3))), ShapeError);
  CHECK_THROWS_AS(acc(ConfusionCounts{}), ArgumentError);
  CHECK_THROWS_AS(mcc(ConfusionCounts{}), ArgumentError);
}

TEST_CASE("acc and mcc examples")
{
  CHECK(acc(ConfusionCounts{3, 0, 0, 5}) == 1.0);
  CHECK(mcc(ConfusionCounts{3, 0, 0, 5}) == doctest::Approx(1.0));
  CHECK(mcc(ConfusionCounts{3, 5, 0, 0}) == 0.0);
  CHECK(acc(ConfusionCounts{1, 1, 1, 1}) == 0.5);
  CHECK(mcc(ConfusionCounts{1, 1, 1, 1}) == 0.0);
  CHECK(mcc(ConfusionCounts{0, 3, 4, 0}) == doctest::Approx(-1.0));
  // tp=6 fp=2 fn=1 tn=11: (66 - 2) / sqrt(8 * 7 * 13 * 12)
  CHECK(mcc(ConfusionCounts{6, 2, 1, 11}) == doctest::Approx(64.0 / std::sqrt(8.0 * 7.0 * 13.0 * 12.0)));
}

TEST_CASE("auc examples")
{
  Grid const truth = row({0, 0, 1, 1});
  CHECK(auc(ScoreMap{row({0.1, 0.4, 0.35, 0.8}), std::nullopt}, truth) == 0.75);
  CHECK(auc(ScoreMap{truth, std::nullopt}, truth) == 1.0);
  CHECK(auc(ScoreMap{Grid(1.0 - truth), std::nullopt}, truth) == 0.0);
  CHECK(auc(ScoreMap{Grid::Constant(1, 4, 0.3), std::nullopt}, truth) == 0.5);
  CHECK_THROWS_AS(auc(ScoreMap{truth, std::nullopt}, Grid(Grid::Ones(1, 4))), ArgumentError);

  // region drops the misordered negative
  Grid const region = row({1, 0, 1, 1});
  CHECK(auc(ScoreMap{row({0.1, 0.4, 0.35, 0.8}), region}, truth) == 1.0);
}

TEST_CASE("auc matches the pairwise count, with ties, on random inputs")
{
  std::mt19937_64 gen(307);
  for (int t = 0; t < 20; t++) {
    Grid const truth = random_mask(gen, 9, 11, 0.3);
    if (truth.sum() == 0.0 || truth.sum() == truth.size()) { continue; }
    Grid scores(9, 11);
    std::uniform_int_distribution<int> level(0, 7);
    for (Index i = 0; i < scores.size(); i++) { scores(i) = level(gen) / 7.0; }
    CHECK(auc(ScoreMap{scores, std::nullopt}, truth) == doctest::Approx(brute_auc(scores, truth)).epsilon(1e-14));
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms")
{
  std::mt19937_64                        gen(311);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 10; t++) {
    Grid const truth = random_mask(gen, 8, 8, 0.4);
    Grid       scores(8, 8);
    for (Index i = 0; i < scores.size(); i++) { scores(i) = std::round(unit(gen) * 20.0) / 20.0; }
    double const base = auc(ScoreMap{scores, std::nullopt}, truth);
    Grid const   cubed = scores.cube();
    Grid const   squashed = 1.0 / (1.0 + (-5.0 * (scores - 0.5)).exp());
    CHECK(auc(ScoreMap{cubed, std::nullopt}, truth) == base);
    CHECK(auc(ScoreMap{squashed, std::nullopt}, truth) == base);
  }
}

TEST_CASE("metrics stay in range on random inputs")
{
  std::mt19937_64                        gen(313);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 50; t++) {
    Grid const truth = random_mask(gen, 6, 7, 0.5);
    Grid const pred = random_mask(gen, 6, 7, 0.5);
    auto const c = confusion(pred, truth);
    CHECK(c.total() == 42);
    CHECK(acc(c) >= 0.0);
    CHECK(acc(c) <= 1.0);
    CHECK(mcc(c) >= -1.0);
    CHECK(mcc(c) <= 1.0);
    if (truth.sum() > 0.0 && truth.sum() < truth.size()) {
      Grid scores(6, 7);
      for (Index i = 0; i < scores.size(); i++) { scores(i) = unit(gen); }
      double const a = auc(ScoreMap{scores, std::nullopt}, truth);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
    }
  }
}

TEST_CASE("confusion counts are permutation-equivariant")
{
  std::mt19937_64 gen(317);
  Grid const      truth = random_mask(gen, 5, 8, 0.3);
  Grid const      pred = random_mask(gen, 5, 8, 0.6);
  std::vector<Index> perm(40);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), gen);
  Grid pt(5, 8);
  Grid tt(5, 8);
  for (Index i = 0; i < 40; i++) {
    pt(i) = pred(perm[static_cast<std::size_t>(i)]);
    tt(i) = truth(perm[static_cast<std::size_t>(i)]);
  }
  CHECK(confusion(pt, tt) == confusion(pred, truth));
}

TEST_CASE("cross_entropy examples")
{
  Grid const truth = row({0, 1, 1, 0, 1});
  CHECK(std::abs(cross_entropy(ScoreMap{Grid::Constant(1, 5, 0.5), std::nullopt}, truth) - std::log(2.0)) <= 1e-9);
  double const perfect = cross_entropy(ScoreMap{truth, std::nullopt}, truth);
  CHECK(perfect >= 0.0);
  CHECK(perfect <= 2e-6);
  CHECK(cross_entropy(ScoreMap{row({0.25}), std::nullopt}, row({1})) == doctest::Approx(1.386294).epsilon(1e-6));
  CHECK(std::isfinite(cross_entropy(ScoreMap{Grid(1.0 - truth), std::nullopt}, truth)));

  Grid const region = row({0, 1, 0, 0, 0});
  CHECK(cross_entropy(ScoreMap{row({0.9, 0.25, 0.1, 0.1, 0.1}), region}, truth) ==
        doctest::Approx(-std::log(0.25)));
}

TEST_CASE("sparsity_fraction")
{
  CHECK(sparsity_fraction(Grid::Zero(4, 4), 0.05) == 0.0);
  CHECK(sparsity_fraction(Grid::Ones(4, 4), 0.5) == 1.0);
  Grid g = Grid::Zero(4, 4);
  g(0, 0) = 0.2;
  g(1, 2) = -0.3;
  g(3, 3) = 0.06;
  g(2, 2) = 0.05;
  CHECK(sparsity_fraction(g, 0.05) == 0.1875);
  CHECK_THROWS_AS(sparsity_fraction(g, -1.0), ArgumentError);
}

TEST_CASE("roc_points and binarize")
{
  Grid const truth = row({0, 0, 1, 1});
  auto const pts = roc_points(ScoreMap{row({0.1, 0.4, 0.35, 0.8}), std::nullopt}, truth);
  REQUIRE(pts.size() == 5);
  CHECK(pts.front() == std::pair<double, double>{0.0, 0.0});
  CHECK(pts.back() == std::pair<double, double>{1.0, 1.0});
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); i++) {
    CHECK(pts[i].first >= pts[i - 1].first);
    CHECK(pts[i].second >= pts[i - 1].second);
    area += (pts[i].first - pts[i - 1].first) * 0.5 * (pts[i].second + pts[i - 1].second);
  }
  CHECK(area == doctest::Approx(0.75));

  Grid const b = binarize(row({0.1, 0.5, 0.7}), 0.5);
  CHECK((b == row({0, 1, 1})).all());
}
