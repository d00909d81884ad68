#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "braingraph/correlation.hpp"

namespace braingraph {

using Edge = std::pair<std::uint32_t, std::uint32_t>;  // i < j

// Undirected simple graph as a sorted unordered-pair edge list. Symmetry
// and zero diagonal hold structurally.
struct Adjacency {
    std::size_t n = 0;
    std::vector<Edge> edges;  // sorted lexicographically, i < j
    double density_target = 0.0;
    // Edges kept beyond the budget because they tie the cut value.
    std::size_t tie_surplus = 0;
    // Positive values fell short of the budget by this many edges.
    std::size_t shortfall = 0;

    bool has_edge(std::uint32_t i, std::uint32_t j) const;
    std::size_t max_edges() const noexcept { return n * (n - 1) / 2; }

    bool operator==(const Adjacency&) const = default;
};

struct UnifiedTopology {
    Adjacency adjacency;
    std::size_t k_threshold = 0;  // minimum cross-subject frequency included
    std::size_t subject_count = 0;
    std::map<Edge, std::size_t> edge_frequency;
};

struct OverlapBins {
    // Bin index per score; bins merged below the threshold all collapse to
    // the first merged index.
    std::vector<int> assignment;
    std::vector<int> merged_bins;  // original indices that were combined
};

// In-place max-symmetrization for lagged FC matrices used as topology
// sources: M(i,j) <- max(M(i,j), M(j,i)). Experimental path.
FcMatrix symmetrize_max(const FcMatrix& fc);

// Keeps the top floor(fraction * n(n-1)/2) strictly positive off-diagonal
// values of a symmetric FC matrix. Ties at the cut are all kept and
// reported as surplus; a shortfall of positive values is reported too.
Adjacency sparsify_top_positive(const FcMatrix& fc, double fraction);

// Cross-subject edge aggregation: includes every edge whose occurrence
// frequency reaches k_threshold, with k_threshold the smallest count whose
// edge set fits the proportion budget.
UnifiedTopology unify_topology(std::span<const Adjacency> adjacencies,
                               double proportion);

// Jaccard index of the two edge sets; 1.0 when both are empty.
double edge_overlap(const Adjacency& a, const Adjacency& b);

// Assigns each score to the half-open bin [edges[k], edges[k+1]) (last bin
// closed above). merge_below combines every bin whose upper edge does not
// exceed the threshold into the first such bin.
OverlapBins bin_by_overlap(std::span<const double> scores,
                           std::span<const double> bin_edges,
                           std::optional<double> merge_below = std::nullopt);

}  // namespace braingraph
