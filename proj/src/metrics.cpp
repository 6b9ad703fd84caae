#include "idnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace idnet {

namespace {

void require_binary(Grid const &g, char const *what)
{
  if (!((g == 0.0) || (g == 1.0)).all()) { throw ArgumentError(std::string(what) + " must be binary (0/1)"); }
}

struct Labeled
{
  std::vector<double> scores;
  std::vector<bool>   positive;
  std::int64_t        n_pos = 0;
  std::int64_t        n_neg = 0;
};

Labeled gather(ScoreMap const &scores, Grid const &truth, char const *where)
{
  require_same_shape(scores.values, truth, where);
  require_binary(truth, "truth");
  if (scores.region) {
    require_same_shape(*scores.region, truth, where);
    require_binary(*scores.region, "region");
  }
  Labeled out;
  for (Index i = 0; i < truth.size(); i++) {
    if (scores.region && (*scores.region)(i) == 0.0) { continue; }
    double const s = scores.values(i);
    if (!std::isfinite(s)) { throw ArgumentError(std::string(where) + ": non-finite score"); }
    out.scores.push_back(s);
    bool const pos = truth(i) == 1.0;
    out.positive.push_back(pos);
    (pos ? out.n_pos : out.n_neg)++;
  }
  return out;
}

} // namespace

ConfusionCounts confusion(Grid const &pred_mask, Grid const &truth, Grid const *region)
{
  require_same_shape(pred_mask, truth, "confusion");
  require_binary(pred_mask, "prediction");
  require_binary(truth, "truth");
  if (region) {
    require_same_shape(*region, truth, "confusion");
    require_binary(*region, "region");
  }
  ConfusionCounts c;
  for (Index i = 0; i < truth.size(); i++) {
    if (region && (*region)(i) == 0.0) { continue; }
    bool const p = pred_mask(i) == 1.0;
    bool const t = truth(i) == 1.0;
    if (p && t) {
      c.tp++;
    } else if (p) {
      c.fp++;
    } else if (t) {
      c.fn++;
    } else {
      c.tn++;
    }
  }
  return c;
}

double acc(ConfusionCounts const &c)
{
  if (c.total() <= 0) { throw ArgumentError("acc: empty evaluation region"); }
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double mcc(ConfusionCounts const &c)
{
  if (c.total() <= 0) { throw ArgumentError("mcc: empty evaluation region"); }
  double const tp = static_cast<double>(c.tp);
  double const fp = static_cast<double>(c.fp);
  double const fn = static_cast<double>(c.fn);
  double const tn = static_cast<double>(c.tn);
  double const denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) { return 0.0; }
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

double auc(ScoreMap const &scores, Grid const &truth)
{
  Labeled const d = gather(scores, truth, "auc");
  if (d.n_pos == 0 || d.n_neg == 0) { throw ArgumentError("auc: truth must contain both classes in the region"); }
  std::vector<std::size_t> order(d.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d.scores[a] < d.scores[b]; });

  // Sum of midranks of positives; ties share the average rank.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && d.scores[order[j]] == d.scores[order[i]]) { j++; }
    double const midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; k++) {
      if (d.positive[order[k]]) { rank_sum += midrank; }
    }
    i = j;
  }
  double const np = static_cast<double>(d.n_pos);
  double const nn = static_cast<double>(d.n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double cross_entropy(ScoreMap const &scores, Grid const &truth)
{
  Labeled const d = gather(scores, truth, "cross_entropy");
  if (d.scores.empty()) { throw ArgumentError("cross_entropy: empty evaluation region"); }
  double total = 0.0;
  for (std::size_t i = 0; i < d.scores.size(); i++) {
    double const p = std::clamp(d.scores[i], kCrossEntropyClamp, 1.0 - kCrossEntropyClamp);
    total += d.positive[i] ? -std::log(p) : -std::log1p(-p);
  }
  return total / static_cast<double>(d.scores.size());
}

double sparsity_fraction(Grid const &v, double threshold)
{
  if (!(threshold >= 0.0)) { throw ArgumentError("sparsity_fraction: threshold must be >= 0"); }
  if (v.size() == 0) { return 0.0; }
  return static_cast<double>((v.abs() > threshold).count()) / static_cast<double>(v.size());
}

std::vector<std::pair<double, double>> roc_points(ScoreMap const &scores, Grid const &truth)
{
  Labeled const d = gather(scores, truth, "roc_points");
  if (d.n_pos == 0 || d.n_neg == 0) { throw ArgumentError("roc_points: truth must contain both classes"); }
  std::vector<std::size_t> order(d.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d.scores[a] > d.scores[b]; });
  std::vector<std::pair<double, double>> points{{0.0, 0.0}};
  std::int64_t                           tp = 0;
  std::int64_t                           fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && d.scores[order[j]] == d.scores[order[i]]) {
      (d.positive[order[j]] ? tp : fp)++;
      j++;
    }
    points.emplace_back(static_cast<double>(fp) / static_cast<double>(d.n_neg),
                        static_cast<double>(tp) / static_cast<double>(d.n_pos));
    i = j;
  }
  return points;
}

Grid binarize(Grid const &values, double threshold) { return (values >= threshold).cast<double>(); }

} // namespace idnet
