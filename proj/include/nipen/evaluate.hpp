#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nipen/objective.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// Held-out metrics. Probabilities are compared against t = (1 + r) / 2, so
// YEA maps to 1 and NAY to 0:
//   rmse     sqrt(mean (p - t)^2)
//   mae      mean |p - t|
//   accuracy mean of [p >= 0.5 agrees with r]; p = 0.5 predicts YEA
//   nall     -mean(t log p + (1 - t) log(1 - p)), probabilities clamped to
//            [1e-12, 1 - 1e-12] before the logs
// ---------------------------------------------------------------------------

struct Metrics {
    double rmse = 0.0;
    double mae = 0.0;
    double accuracy = 0.0;
    double nall = 0.0;
    int n_cells = 0;
};

Metrics compute_metrics(const std::vector<double>& probs, const std::vector<double>& votes);

// ---------------------------------------------------------------------------
// Cell-wise k-fold cross-validation: observed cells are partitioned, the
// model retrains on each complement and predicts the held-out cells with
// neighbor votes drawn from the training cells only.
// ---------------------------------------------------------------------------

struct CvReport {
    std::vector<Metrics> per_fold;
    Metrics mean;   // per-metric average over folds; n_cells totals all folds
    Metrics spread; // 2 * sample standard deviation over folds
};

CvReport cross_validate(const Corpus& corpus, const Hyperparams& hp, ModelVariant variant,
                        TensorComposition comp, int folds, uint64_t seed);

// Aggregates per-fold metrics into mean and 2-sigma spread.
CvReport aggregate_folds(std::vector<Metrics> per_fold);

// ---------------------------------------------------------------------------
// Comparison table: one row per labelled report, cells "mean (±2sigma)"
// with four decimals. The CSV twin carries full-precision numbers and
// re-parses to the same doubles.
// ---------------------------------------------------------------------------

std::string compare_table(const std::vector<std::pair<std::string, CvReport>>& rows);
std::string compare_csv(const std::vector<std::pair<std::string, CvReport>>& rows);

} // namespace nipen
