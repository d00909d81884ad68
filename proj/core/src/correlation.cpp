#include "braingraph/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <numeric>

#include "braingraph/error.hpp"
#include "braingraph/parallel.hpp"

namespace braingraph {

std::string metric_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::Pearson: return "pearson";
        case MetricKind::Spearman: return "spearman";
        case MetricKind::Kendall: return "kendall";
        case MetricKind::CrossCorr: return "cross_corr";
    }
    return "unknown";
}

MetricKind metric_from_name(const std::string& name) {
    if (name == "pearson") return MetricKind::Pearson;
    if (name == "spearman") return MetricKind::Spearman;
    if (name == "kendall") return MetricKind::Kendall;
    if (name == "cross_corr") return MetricKind::CrossCorr;
    throw ValidationError("unknown correlation metric: " + name);
}

std::string ViewSpec::label() const {
    if (metric != MetricKind::CrossCorr) return metric_name(metric);
    return "cross_corr(" + std::string(delta >= 0 ? "+" : "") +
           std::to_string(delta) + ")";
}

namespace {

void check_pair_sizes(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ShapeMismatchError("series lengths " + std::to_string(x.size()) +
                                 " and " + std::to_string(y.size()));
    }
    if (x.size() < 3) {
        throw ValidationError("correlation needs T >= 3, got T=" +
                              std::to_string(x.size()));
    }
}

double mean_of(std::span<const double> v) {
    double sum = 0.0;
    for (double a : v) sum += a;
    return sum / static_cast<double>(v.size());
}

// Shared normalized-product kernel. The overlap window pairs x[t] with
// y[t + delta]; means stay full-series so delta = 0 reproduces Pearson
// bit for bit.
double windowed_correlation(std::span<const double> x, std::span<const double> y,
                            int delta, double* clamp_excess) {
    const std::size_t t_count = x.size();
    const double mu_x = mean_of(x);
    const double mu_y = mean_of(y);

    const std::size_t begin =
        delta >= 0 ? 0 : static_cast<std::size_t>(-static_cast<long long>(delta));
    const std::size_t end =
        delta >= 0 ? t_count - static_cast<std::size_t>(delta) : t_count;

    double num = 0.0;
    double den_x = 0.0;
    double den_y = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
        const double dx = x[t] - mu_x;
        const double dy = y[static_cast<std::size_t>(
                              static_cast<long long>(t) + delta)] -
                          mu_y;
        num += dx * dy;
        den_x += dx * dx;
        den_y += dy * dy;
    }
    if (den_x == 0.0 || den_y == 0.0) {
        throw ZeroVarianceError("overlap segment constant around its mean (delta=" +
                                std::to_string(delta) + ")");
    }
    double r = num / (std::sqrt(den_x) * std::sqrt(den_y));
    if (r > 1.0) {
        if (clamp_excess) *clamp_excess = std::max(*clamp_excess, r - 1.0);
        r = 1.0;
    } else if (r < -1.0) {
        if (clamp_excess) *clamp_excess = std::max(*clamp_excess, -1.0 - r);
        r = -1.0;
    }
    return r;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    check_pair_sizes(x, y);
    return windowed_correlation(x, y, 0, nullptr);
}

std::vector<double> fractional_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // 1-based average rank for the tied run [i, j].
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    check_pair_sizes(x, y);
    const std::vector<double> rx = fractional_ranks(x);
    const std::vector<double> ry = fractional_ranks(y);
    return windowed_correlation(rx, ry, 0, nullptr);
}

namespace {

// Counts pairs (a, b) with a before b and seq[a] > seq[b] strictly, via
// bottom-up merge sort (Knight 1966).
std::uint64_t count_swaps(std::vector<double>& seq, std::vector<double>& buffer) {
    const std::size_t n = seq.size();
    std::uint64_t swaps = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t left = lo;
            std::size_t right = mid;
            std::size_t out = lo;
            while (left < mid && right < hi) {
                if (seq[right] < seq[left]) {
                    swaps += mid - left;
                    buffer[out++] = seq[right++];
                } else {
                    buffer[out++] = seq[left++];
                }
            }
            while (left < mid) buffer[out++] = seq[left++];
            while (right < hi) buffer[out++] = seq[right++];
            std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo),
                      buffer.begin() + static_cast<std::ptrdiff_t>(hi),
                      seq.begin() + static_cast<std::ptrdiff_t>(lo));
        }
    }
    return swaps;
}

std::uint64_t tied_pair_count(const std::vector<double>& sorted) {
    std::uint64_t pairs = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const std::uint64_t run = j - i + 1;
        pairs += run * (run - 1) / 2;
        i = j + 1;
    }
    return pairs;
}

}  // namespace

KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y) {
    check_pair_sizes(x, y);
    const std::size_t n = x.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    // Pair counts tied in x, in y, and in both.
    std::uint64_t tied_x = 0;
    std::uint64_t tied_both = 0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
            const std::uint64_t run = j - i + 1;
            tied_x += run * (run - 1) / 2;
            // y runs within an x-tied run are tied in both.
            std::size_t a = i;
            while (a <= j) {
                std::size_t b = a;
                while (b + 1 <= j && y[order[b + 1]] == y[order[a]]) ++b;
                const std::uint64_t yrun = b - a + 1;
                tied_both += yrun * (yrun - 1) / 2;
                a = b + 1;
            }
            i = j + 1;
        }
    }

    std::vector<double> y_by_x(n);
    for (std::size_t i = 0; i < n; ++i) y_by_x[i] = y[order[i]];
    std::vector<double> buffer(n);
    const std::uint64_t discordant = count_swaps(y_by_x, buffer);
    // y_by_x is now sorted; reuse it for the y tie count.
    const std::uint64_t tied_y = tied_pair_count(y_by_x);

    KendallCounts counts;
    counts.total_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    counts.discordant = discordant;
    counts.concordant =
        counts.total_pairs - tied_x - tied_y + tied_both - discordant;
    return counts;
}

double kendall(std::span<const double> x, std::span<const double> y,
               bool* tied_warning) {
    const KendallCounts counts = kendall_counts(x, y);
    if (tied_warning) {
        const bool x_constant =
            std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
        const bool y_constant =
            std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end();
        *tied_warning = x_constant || y_constant;
    }
    return counts.tau();
}

double cross_correlation(std::span<const double> x, std::span<const double> y,
                         int delta, double* clamp_excess) {
    check_pair_sizes(x, y);
    const std::size_t t_count = x.size();
    const std::size_t abs_delta =
        static_cast<std::size_t>(delta >= 0 ? delta : -static_cast<long long>(delta));
    if (abs_delta > t_count - 3) {
        throw LagTooLargeError(delta, t_count);
    }
    return windowed_correlation(x, y, delta, clamp_excess);
}

FcMatrix fc_matrix(const NormalizedMatrix& z, const ViewSpec& view,
                   std::size_t workers) {
    const std::size_t n = z.roi_count();
    const std::size_t t_count = z.t_count();
    if (n < 2) throw ValidationError("FC matrix needs at least 2 ROIs");
    if (view.metric == MetricKind::CrossCorr) {
        const std::size_t abs_delta = static_cast<std::size_t>(
            view.delta >= 0 ? view.delta : -static_cast<long long>(view.delta));
        if (abs_delta > t_count - 3) throw LagTooLargeError(view.delta, t_count);
    }

    FcMatrix fc;
    fc.view = view;
    fc.values = Matrix(n, n, 0.0);

    // Spearman reduces to Pearson on per-ROI rank transforms; rank once.
    std::vector<std::vector<double>> ranks;
    if (view.metric == MetricKind::Spearman) {
        ranks.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            ranks[r] = fractional_ranks(z.values.roi(r));
        }
    }

    std::vector<double> clamp_by_row(n, 0.0);
    std::exception_ptr pair_error;
    std::mutex pair_error_mutex;

    auto record_error = [&](std::size_t i, std::size_t j, const Error& e) {
        std::lock_guard<std::mutex> lock(pair_error_mutex);
        if (!pair_error) {
            pair_error = std::make_exception_ptr(ValidationError(
                "pair (" + std::to_string(i) + ", " + std::to_string(j) + ") [" +
                view.label() + "]: " + e.what()));
        }
    };

    parallel_for(n, workers, [&](std::size_t i) {
        const auto xi = z.values.roi(i);
        if (view.symmetric()) {
            fc.values.at(i, i) = 1.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto yj = z.values.roi(j);
                double v = 0.0;
                try {
                    switch (view.metric) {
                        case MetricKind::Pearson:
                            v = pearson(xi, yj);
                            break;
                        case MetricKind::Spearman:
                            v = pearson(ranks[i], ranks[j]);
                            break;
                        case MetricKind::Kendall:
                            v = kendall(xi, yj);
                            break;
                        default:
                            break;
                    }
                } catch (const Error& e) {
                    record_error(i, j, e);
                    return;
                }
                fc.values.at(i, j) = v;
                fc.values.at(j, i) = v;
            }
        } else {
            for (std::size_t j = 0; j < n; ++j) {
                try {
                    fc.values.at(i, j) = cross_correlation(
                        xi, z.values.roi(j), view.delta, &clamp_by_row[i]);
                } catch (const Error& e) {
                    record_error(i, j, e);
                    return;
                }
            }
        }
    });

    if (pair_error) std::rethrow_exception(pair_error);
    for (double c : clamp_by_row) fc.max_clamp_excess = std::max(fc.max_clamp_excess, c);
    return fc;
}

}  // namespace braingraph
