#include "braingraph/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "braingraph/error.hpp"

namespace braingraph {

void BoldMatrix::validate() const {
    if (t_count_ < 2 || roi_count_ < 2) {
        throw ValidationError("BOLD matrix needs T >= 2 and n >= 2, got T=" +
                              std::to_string(t_count_) + ", n=" +
                              std::to_string(roi_count_));
    }
    for (std::size_t r = 0; r < roi_count_; ++r) {
        const auto series = roi(r);
        for (std::size_t t = 0; t < t_count_; ++t) {
            if (!std::isfinite(series[t])) {
                throw NonFiniteError("<memory>", t, r);
            }
        }
    }
    if (!roi_labels_.empty() && roi_labels_.size() != roi_count_) {
        throw ShapeMismatchError("roi_labels size " +
                                 std::to_string(roi_labels_.size()) +
                                 " != roi count " + std::to_string(roi_count_));
    }
}

void RetentionSpec::validate() const {
    if (const auto* p = std::get_if<PercentileThreshold>(&threshold_mode)) {
        if (!(p->alpha > 0.0 && p->alpha < 100.0) && p->alpha != 100.0) {
            throw ValidationError("percentile alpha must be in (0, 100], got " +
                                  std::to_string(p->alpha));
        }
    } else {
        const auto& s = std::get<StdDevThreshold>(threshold_mode);
        if (!(s.beta > 0.0)) {
            throw ValidationError("stddev beta must be positive, got " +
                                  std::to_string(s.beta));
        }
    }
}

namespace {

struct ColumnStats {
    double mean;
    double stddev;  // population, divisor T
};

ColumnStats column_stats(std::span<const double> series) {
    const std::size_t t = series.size();
    double sum = 0.0;
    for (double v : series) sum += v;
    const double mean = sum / static_cast<double>(t);
    double sq = 0.0;
    for (double v : series) {
        const double d = v - mean;
        sq += d * d;
    }
    return {mean, std::sqrt(sq / static_cast<double>(t))};
}

}  // namespace

NormalizedMatrix z_normalize(const BoldMatrix& raw, ConstantSignalPolicy policy) {
    raw.validate();
    const std::size_t t_count = raw.t_count();
    const std::size_t n = raw.roi_count();

    std::vector<ColumnStats> stats(n);
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped;
    kept.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        stats[r] = column_stats(raw.roi(r));
        if (stats[r].stddev == 0.0) {
            if (policy == ConstantSignalPolicy::Abort) {
                throw ConstantSignalError(r);
            }
            dropped.push_back(r);
        } else {
            kept.push_back(r);
        }
    }
    if (kept.size() < 2) {
        throw ValidationError("fewer than 2 non-constant ROIs remain after "
                              "dropping constant signals");
    }

    NormalizedMatrix out;
    out.values = BoldMatrix(t_count, kept.size());
    out.per_roi_mean.resize(kept.size());
    out.per_roi_std.resize(kept.size());
    out.dropped_rois = std::move(dropped);
    if (!raw.roi_labels().empty()) {
        out.values.roi_labels().reserve(kept.size());
    }
    for (std::size_t out_r = 0; out_r < kept.size(); ++out_r) {
        const std::size_t src_r = kept[out_r];
        const auto src = raw.roi(src_r);
        auto dst = out.values.roi(out_r);
        const auto [mean, stddev] = stats[src_r];
        for (std::size_t t = 0; t < t_count; ++t) {
            dst[t] = (src[t] - mean) / stddev;
        }
        out.per_roi_mean[out_r] = mean;
        out.per_roi_std[out_r] = stddev;
        if (!raw.roi_labels().empty()) {
            out.values.roi_labels().push_back(raw.roi_labels()[src_r]);
        }
    }
    return out;
}

ThresholdInfo compute_threshold(const NormalizedMatrix& z, const RetentionSpec& spec) {
    spec.validate();
    const std::size_t t_count = z.t_count();
    const std::size_t n = z.roi_count();
    ThresholdInfo info;
    info.per_roi.resize(n);

    if (spec.is_percentile()) {
        const double alpha = std::get<PercentileThreshold>(spec.threshold_mode).alpha;
        // Nearest rank: keep the top ceil(alpha/100 * T) samples by |z|.
        std::size_t k = static_cast<std::size_t>(
            std::ceil(alpha / 100.0 * static_cast<double>(t_count)));
        k = std::clamp<std::size_t>(k, 1, t_count);
        std::vector<double> abs_z(t_count);
        for (std::size_t r = 0; r < n; ++r) {
            const auto series = z.values.roi(r);
            for (std::size_t t = 0; t < t_count; ++t) abs_z[t] = std::fabs(series[t]);
            std::nth_element(abs_z.begin(), abs_z.begin() + (k - 1), abs_z.end(),
                             std::greater<double>());
            info.per_roi[r] = abs_z[k - 1];
        }
    } else {
        const double beta = std::get<StdDevThreshold>(spec.threshold_mode).beta;
        // Pooled population std over every entry of z.
        double sum = 0.0;
        const std::size_t total = t_count * n;
        for (std::size_t r = 0; r < n; ++r) {
            for (double v : z.values.roi(r)) sum += v;
        }
        const double mean = sum / static_cast<double>(total);
        double sq = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            for (double v : z.values.roi(r)) {
                const double d = v - mean;
                sq += d * d;
            }
        }
        info.global = true;
        info.pooled_std = std::sqrt(sq / static_cast<double>(total));
        std::fill(info.per_roi.begin(), info.per_roi.end(), beta * info.pooled_std);
    }
    return info;
}

NormalizedMatrix apply_retention(const NormalizedMatrix& z, const ThresholdInfo& thresholds,
                                 RetentionGamma gamma, RetentionReport* report) {
    const std::size_t t_count = z.t_count();
    const std::size_t n = z.roi_count();
    if (thresholds.per_roi.size() != n) {
        throw ShapeMismatchError("threshold count " +
                                 std::to_string(thresholds.per_roi.size()) +
                                 " != roi count " + std::to_string(n));
    }

    NormalizedMatrix out;
    out.values = BoldMatrix(t_count, n);
    out.values.roi_labels() = z.values.roi_labels();
    out.per_roi_mean = z.per_roi_mean;
    out.per_roi_std = z.per_roi_std;
    out.dropped_rois = z.dropped_rois;

    if (report) {
        report->retained_per_roi.assign(n, 0);
        report->tie_surplus_per_roi.assign(n, 0);
    }

    for (std::size_t r = 0; r < n; ++r) {
        const double theta = thresholds.per_roi[r];
        const auto src = z.values.roi(r);
        auto dst = out.values.roi(r);
        std::size_t retained = 0;
        for (std::size_t t = 0; t < t_count; ++t) {
            const double a = std::fabs(src[t]);
            if (a >= theta) {
                dst[t] = gamma == RetentionGamma::Binarize ? 1.0 : src[t];
                ++retained;
            } else {
                dst[t] = 0.0;
            }
        }
        if (retained < 3) {
            throw DegenerateRetentionError(r, retained);
        }
        if (report) {
            report->retained_per_roi[r] = retained;
        }
    }
    return out;
}

NormalizedMatrix retain_high_amplitude(const NormalizedMatrix& z, const RetentionSpec& spec,
                                       ThresholdInfo* thresholds_out,
                                       RetentionReport* report) {
    ThresholdInfo info = compute_threshold(z, spec);
    NormalizedMatrix out = apply_retention(z, info, spec.gamma, report);
    if (report && spec.is_percentile()) {
        // Ties at the cut value are all kept, so the count can exceed the
        // nearest-rank target; record the excess.
        const double alpha = std::get<PercentileThreshold>(spec.threshold_mode).alpha;
        std::size_t k = static_cast<std::size_t>(
            std::ceil(alpha / 100.0 * static_cast<double>(z.t_count())));
        k = std::clamp<std::size_t>(k, 1, z.t_count());
        for (std::size_t r = 0; r < report->retained_per_roi.size(); ++r) {
            const std::size_t retained = report->retained_per_roi[r];
            report->tie_surplus_per_roi[r] = retained > k ? retained - k : 0;
        }
    }
    if (thresholds_out) *thresholds_out = std::move(info);
    return out;
}

}  // namespace braingraph
