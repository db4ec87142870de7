#include "fanfold/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fanfold/errors.hpp"

namespace fanfold {

double compute_auc(std::span<const double> scores, std::span<const std::uint8_t> anomaly_flags) {
    if (scores.size() != anomaly_flags.size()) throw ContractError("compute_auc: scores and flags differ in length");
    std::size_t positives = 0;
    for (auto f : anomaly_flags) positives += f ? 1 : 0;
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw UndefinedMetricError("AUC is undefined: test set has " + std::to_string(positives) + " anomalies and " +
                                   std::to_string(negatives) + " normals");
    }
    for (double s : scores)
        if (!std::isfinite(s)) throw NumericFault("compute_auc: non-finite score");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of (1-based, tie-averaged) ranks of the positives. Ranks are kept
    // doubled so tie averages stay integral and the result is exact.
    std::uint64_t doubled_rank_sum = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const std::uint64_t doubled_avg = (i + 1) + j;  // 2 * mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (anomaly_flags[order[k]]) doubled_rank_sum += doubled_avg;
        i = j;
    }
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(negatives);
    const double doubled_u = static_cast<double>(doubled_rank_sum) - p * (p + 1.0);
    return doubled_u / (2.0 * p * n);
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {mean, std::sqrt(var)};
}

}  // namespace fanfold
