#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "braingraph/matrix.hpp"

namespace braingraph {

// Z-scored ROI time series plus the per-ROI statistics of the source.
// Layout matches BoldMatrix (ROI-major, contiguous series per ROI).
struct NormalizedMatrix {
    BoldMatrix values;
    std::vector<double> per_roi_mean;
    std::vector<double> per_roi_std;
    // ROIs dropped under ConstantSignalPolicy::Drop, in source indices.
    std::vector<std::size_t> dropped_rois;

    std::size_t t_count() const noexcept { return values.t_count(); }
    std::size_t roi_count() const noexcept { return values.roi_count(); }
};

// Threshold selection for high-amplitude retention.
struct PercentileThreshold {
    double alpha;  // keep the top alpha% of |z| per ROI, alpha in (0,100)
};
struct StdDevThreshold {
    double beta;  // theta = beta * pooled std of all z entries, beta > 0
};

enum class RetentionGamma {
    Retain = 0,    // keep z values above threshold verbatim
    Binarize = 1,  // map values above threshold to 1
};

struct RetentionSpec {
    std::variant<PercentileThreshold, StdDevThreshold> threshold_mode;
    RetentionGamma gamma = RetentionGamma::Retain;

    bool is_percentile() const noexcept {
        return std::holds_alternative<PercentileThreshold>(threshold_mode);
    }
    void validate() const;
};

enum class ConstantSignalPolicy {
    Abort,  // raise ConstantSignalError (default)
    Drop,   // drop the ROI and record it
};

// Per-ROI thresholds in percentile mode, a single replicated global value
// in stddev mode. Recorded in graph metadata for auditability.
struct ThresholdInfo {
    std::vector<double> per_roi;  // length n; equal entries in global mode
    bool global = false;
    double pooled_std = 0.0;  // only meaningful when global
};

struct RetentionReport {
    std::vector<std::size_t> retained_per_roi;
    // Extra samples kept because they tie the cut value (percentile mode).
    std::vector<std::size_t> tie_surplus_per_roi;
};

// Column-wise z-scores with population std (divisor T).
NormalizedMatrix z_normalize(const BoldMatrix& raw,
                             ConstantSignalPolicy policy = ConstantSignalPolicy::Abort);

// Percentile mode: per-ROI theta_r = k-th largest |z| with k = ceil(alpha/100 * T)
// (nearest rank), so |z| >= theta_r keeps the top alpha% with cut ties retained.
// StdDev mode: one global theta = beta * std of all z entries pooled across ROIs.
ThresholdInfo compute_threshold(const NormalizedMatrix& z, const RetentionSpec& spec);

// Applies precomputed thresholds: gamma=0 keeps |z| >= theta verbatim,
// gamma=1 maps them to 1; everything else becomes 0.
// Raises DegenerateRetentionError if any ROI retains fewer than 3 samples.
NormalizedMatrix apply_retention(const NormalizedMatrix& z, const ThresholdInfo& thresholds,
                                 RetentionGamma gamma, RetentionReport* report = nullptr);

// compute_threshold followed by apply_retention.
NormalizedMatrix retain_high_amplitude(const NormalizedMatrix& z, const RetentionSpec& spec,
                                       ThresholdInfo* thresholds_out = nullptr,
                                       RetentionReport* report = nullptr);

}  // namespace braingraph
