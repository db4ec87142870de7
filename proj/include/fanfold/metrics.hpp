#pragma once

#include <cstdint>
#include <span>

namespace fanfold {

// Rank-based ROC AUC (Mann-Whitney U with average ranks for ties):
// P(score_anomaly > score_normal) + 0.5·P(tie). Flags: 1 = anomaly.
// Throws UndefinedMetricError when only one class is present.
double compute_auc(std::span<const double> scores, std::span<const std::uint8_t> anomaly_flags);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

}  // namespace fanfold
