#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "braingraph/matrix.hpp"
#include "braingraph/signal.hpp"

namespace braingraph {

enum class MetricKind { Pearson, Spearman, Kendall, CrossCorr };

std::string metric_name(MetricKind kind);
MetricKind metric_from_name(const std::string& name);

// (metric, lag) pair describing one correlation view. delta is meaningful
// only for CrossCorr and is measured in time points.
struct ViewSpec {
    MetricKind metric = MetricKind::Pearson;
    int delta = 0;

    bool symmetric() const noexcept { return metric != MetricKind::CrossCorr; }
    std::string label() const;
    bool operator==(const ViewSpec&) const = default;
};

// n x n pairwise association matrix under one metric and one lag.
struct FcMatrix {
    Matrix values;
    ViewSpec view;
    // Largest |value| seen before clamping to [-1, 1]; 0 when nothing clamped.
    double max_clamp_excess = 0.0;

    std::size_t n() const noexcept { return values.rows(); }
};

// Concordant/discordant pair counts behind Kendall's tau-a. Pairs tied in
// either argument are counted in neither.
struct KendallCounts {
    std::uint64_t concordant = 0;
    std::uint64_t discordant = 0;
    std::uint64_t total_pairs = 0;  // T(T-1)/2

    double tau() const {
        return static_cast<double>(static_cast<std::int64_t>(concordant) -
                                   static_cast<std::int64_t>(discordant)) /
               static_cast<double>(total_pairs);
    }
};

// cov(x,y) / (sigma_x sigma_y) with population statistics, clamped to [-1,1].
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson on fractional (average-for-ties) ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Average ranks for ties, 1-based.
std::vector<double> fractional_ranks(std::span<const double> values);

// Tau-a: (n_c - n_d) / (T(T-1)/2). O(T log T) via merge-sort swap counting.
// An all-tied input yields 0 (tied_warning set when provided).
double kendall(std::span<const double> x, std::span<const double> y,
               bool* tied_warning = nullptr);
KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y);

// Normalized lagged cross-correlation. Numerator and denominator sums run
// over the overlap window of length T-|delta|; means are full-series.
// Clamped to [-1,1]; clamp_excess (when given) records any overshoot.
double cross_correlation(std::span<const double> x, std::span<const double> y,
                         int delta, double* clamp_excess = nullptr);

// Applies the view's metric to every ROI pair. Symmetric metrics are
// computed once per unordered pair and mirrored with a unit diagonal;
// CrossCorr fills all ordered pairs and the diagonal carries the lag-delta
// autocorrelation. Deterministic for any worker count.
FcMatrix fc_matrix(const NormalizedMatrix& z, const ViewSpec& view,
                   std::size_t workers = 0);

}  // namespace braingraph
