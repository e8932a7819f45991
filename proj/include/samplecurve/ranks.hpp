#pragma once

// Rank statistics shared by the metric layer and generator tuning:
// midranks, the tie-corrected Mann-Whitney AUC, and its DeLong standard
// error via placement values.

#include "samplecurve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace samplecurve {

/// 1-based ranks with ties resolved to the group average.
inline std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

/// Mann-Whitney AUC with ties counted 1/2, O(N log N). Labels are 0/1.
/// Equals the exhaustive pairwise comparison count exactly.
inline double auc(std::span<const double> scores, std::span<const double> labels) {
    if (scores.size() != labels.size()) {
        throw DimensionMismatch("auc: scores and labels differ in length");
    }
    std::size_t n_pos = 0;
    for (double y : labels) n_pos += (y != 0.0);
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw OneClassOnly("auc: labels contain a single class");
    }
    const std::vector<double> ranks = midranks(scores);
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0.0) rank_sum_pos += ranks[i];
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct AucEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

/// AUC plus its DeLong standard error from per-observation placements.
inline AucEstimate auc_with_se(std::span<const double> scores,
                               std::span<const double> labels) {
    if (scores.size() != labels.size()) {
        throw DimensionMismatch("auc_with_se: scores and labels differ in length");
    }
    std::vector<double> pos, neg;
    pos.reserve(scores.size());
    neg.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        (labels[i] != 0.0 ? pos : neg).push_back(scores[i]);
    }
    if (pos.empty() || neg.empty()) {
        throw OneClassOnly("auc_with_se: labels contain a single class");
    }

    const std::vector<double> r_all = midranks(scores);
    const std::vector<double> r_pos = midranks(pos);
    const std::vector<double> r_neg = midranks(neg);
    const double np = static_cast<double>(pos.size());
    const double nn = static_cast<double>(neg.size());

    std::vector<double> v10, v01;
    v10.reserve(pos.size());
    v01.reserve(neg.size());
    std::size_t ip = 0, in = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 0.0) {
            v10.push_back((r_all[i] - r_pos[ip++]) / nn);
        } else {
            v01.push_back(1.0 - (r_all[i] - r_neg[in++]) / np);
        }
    }

    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto var_of = [&](const std::vector<double>& v, double m) {
        if (v.size() < 2) return 0.0;
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return s / static_cast<double>(v.size() - 1);
    };

    AucEstimate est;
    est.n_pos = pos.size();
    est.n_neg = neg.size();
    est.value = mean_of(v10);
    const double s10 = var_of(v10, est.value);
    const double s01 = var_of(v01, mean_of(v01));
    est.se = std::sqrt(s10 / np + s01 / nn);
    return est;
}

} // namespace samplecurve
