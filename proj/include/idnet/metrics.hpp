#pragma once

#include "grid.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace idnet {

struct ConfusionCounts
{
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  bool         operator==(ConfusionCounts const &) const = default;
};

// Prediction P(x) in [0, 1] with an optional evaluation region (e.g. FOV).
struct ScoreMap
{
  Grid                values;
  std::optional<Grid> region;
};

ConfusionCounts confusion(Grid const &pred_mask, Grid const &truth, Grid const *region = nullptr);

double acc(ConfusionCounts const &c);
// 0 when any marginal is empty.
double mcc(ConfusionCounts const &c);

// Mann-Whitney form: P(score_pos > score_neg) + 0.5 P(tie).
double auc(ScoreMap const &scores, Grid const &truth);

inline constexpr double kCrossEntropyClamp = 1e-7;

double cross_entropy(ScoreMap const &scores, Grid const &truth);

double sparsity_fraction(Grid const &v, double threshold);

// ROC vertices (FPR, TPR), one per distinct score, from (0, 0) to (1, 1).
std::vector<std::pair<double, double>> roc_points(ScoreMap const &scores, Grid const &truth);

// 1 where values >= threshold, else 0.
Grid binarize(Grid const &values, double threshold);

} // namespace idnet
