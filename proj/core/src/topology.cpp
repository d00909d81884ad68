#include "braingraph/topology.hpp"

#include <algorithm>
#include <cmath>

#include "braingraph/error.hpp"

namespace braingraph {

bool Adjacency::has_edge(std::uint32_t i, std::uint32_t j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges.begin(), edges.end(), Edge{i, j});
}

FcMatrix symmetrize_max(const FcMatrix& fc) {
    FcMatrix out = fc;
    const std::size_t n = fc.n();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = std::max(fc.values.at(i, j), fc.values.at(j, i));
            out.values.at(i, j) = v;
            out.values.at(j, i) = v;
        }
    }
    return out;
}

Adjacency sparsify_top_positive(const FcMatrix& fc, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ValidationError("sparsification fraction must be in (0, 1], got " +
                              std::to_string(fraction));
    }
    const std::size_t n = fc.n();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (fc.values.at(i, j) != fc.values.at(j, i)) {
                throw ValidationError(
                    "sparsify_top_positive needs a symmetric FC matrix; "
                    "symmetrize lagged matrices first");
            }
        }
    }

    struct Candidate {
        double value;
        Edge edge;
    };
    std::vector<Candidate> positives;
    positives.reserve(n * (n - 1) / 2);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const double v = fc.values.at(i, j);
            if (v > 0.0) positives.push_back({v, {i, j}});
        }
    }
    if (positives.empty()) throw NoPositiveEdgesError();

    // Descending by value; lexicographic within equal values so the sorted
    // order is canonical.
    std::sort(positives.begin(), positives.end(),
              [](const Candidate& a, const Candidate& b) {
                  if (a.value != b.value) return a.value > b.value;
                  return a.edge < b.edge;
              });

    Adjacency adj;
    adj.n = n;
    adj.density_target = fraction;
    const std::size_t budget = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(adj.max_edges())));

    std::size_t keep = std::min(budget, positives.size());
    if (positives.size() < budget) {
        adj.shortfall = budget - positives.size();
    }
    // Ties at the cut value are all retained.
    if (keep > 0) {
        const double cut = positives[keep - 1].value;
        while (keep < positives.size() && positives[keep].value == cut) {
            ++keep;
            ++adj.tie_surplus;
        }
    }

    adj.edges.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) adj.edges.push_back(positives[k].edge);
    std::sort(adj.edges.begin(), adj.edges.end());
    return adj;
}

UnifiedTopology unify_topology(std::span<const Adjacency> adjacencies,
                               double proportion) {
    if (adjacencies.size() < 2) {
        throw ValidationError("unified topology needs at least 2 subjects");
    }
    if (!(proportion > 0.0 && proportion <= 1.0)) {
        throw ValidationError("unify proportion must be in (0, 1], got " +
                              std::to_string(proportion));
    }
    const std::size_t n = adjacencies.front().n;
    for (const Adjacency& a : adjacencies) {
        if (a.n != n) {
            throw ShapeMismatchError("subject adjacency node counts differ: " +
                                     std::to_string(a.n) + " vs " +
                                     std::to_string(n));
        }
    }

    UnifiedTopology unified;
    unified.subject_count = adjacencies.size();
    // std::map keys iterate in lexicographic edge order, independent of
    // subject order; the merge is a commutative count.
    for (const Adjacency& a : adjacencies) {
        for (const Edge& e : a.edges) ++unified.edge_frequency[e];
    }

    const std::size_t budget = static_cast<std::size_t>(std::floor(
        proportion * static_cast<double>(n * (n - 1) / 2)));

    // Histogram of frequencies; frequencies range over [1, N].
    std::vector<std::size_t> count_at(adjacencies.size() + 2, 0);
    for (const auto& [edge, freq] : unified.edge_frequency) ++count_at[freq];

    // Smallest k whose edge set fits the budget. count >= k is a suffix sum,
    // non-increasing in k, and reaches 0 at k = N + 1.
    std::size_t k = adjacencies.size() + 1;
    std::size_t at_or_above = 0;
    for (std::size_t f = adjacencies.size() + 1; f-- > 1;) {
        if (at_or_above + count_at[f] > budget) break;
        at_or_above += count_at[f];
        k = f;
    }
    unified.k_threshold = k;

    unified.adjacency.n = n;
    unified.adjacency.density_target = proportion;
    unified.adjacency.edges.reserve(at_or_above);
    for (const auto& [edge, freq] : unified.edge_frequency) {
        if (freq >= k) unified.adjacency.edges.push_back(edge);
    }
    return unified;
}

double edge_overlap(const Adjacency& a, const Adjacency& b) {
    if (a.n != b.n) {
        throw ShapeMismatchError("edge_overlap node counts: " +
                                 std::to_string(a.n) + " vs " +
                                 std::to_string(b.n));
    }
    if (a.edges.empty() && b.edges.empty()) return 1.0;
    std::size_t intersection = 0;
    auto ia = a.edges.begin();
    auto ib = b.edges.begin();
    while (ia != a.edges.end() && ib != b.edges.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++intersection;
            ++ia;
            ++ib;
        }
    }
    const std::size_t uni = a.edges.size() + b.edges.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(uni);
}

OverlapBins bin_by_overlap(std::span<const double> scores,
                           std::span<const double> bin_edges,
                           std::optional<double> merge_below) {
    if (bin_edges.size() < 2) {
        throw ValidationError("bin_by_overlap needs at least 2 bin edges");
    }
    if (!std::is_sorted(bin_edges.begin(), bin_edges.end())) {
        throw ValidationError("bin edges must be non-decreasing");
    }
    const int bin_count = static_cast<int>(bin_edges.size()) - 1;

    OverlapBins out;
    out.assignment.reserve(scores.size());
    for (double s : scores) {
        // Last bin is closed above so a score equal to the top edge lands in it.
        int bin = bin_count - 1;
        for (int b = 0; b < bin_count; ++b) {
            if (s < bin_edges[static_cast<std::size_t>(b) + 1]) {
                bin = b;
                break;
            }
        }
        out.assignment.push_back(bin);
    }

    if (merge_below) {
        int first_merged = -1;
        for (int b = 0; b < bin_count; ++b) {
            if (bin_edges[static_cast<std::size_t>(b) + 1] <= *merge_below) {
                if (first_merged < 0) first_merged = b;
                out.merged_bins.push_back(b);
            }
        }
        if (first_merged >= 0) {
            for (int& bin : out.assignment) {
                if (std::find(out.merged_bins.begin(), out.merged_bins.end(), bin) !=
                    out.merged_bins.end()) {
                    bin = first_merged;
                }
            }
        }
    }
    return out;
}

}  // namespace braingraph
