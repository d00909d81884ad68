#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "braingraph/correlation.hpp"
#include "braingraph/topology.hpp"

namespace braingraph {

// Horizontal concatenation of FC matrices: n rows, one n-wide block per view.
struct NodeFeatures {
    Matrix values;  // n x (views * n)
    std::vector<ViewSpec> views;

    std::size_t view_count() const noexcept { return views.size(); }
    bool operator==(const NodeFeatures&) const = default;
};

// Per-edge binary indicators, one column per view, rows in the canonical
// sorted (i < j) edge order of the source adjacency.
struct EdgeFeatures {
    Matrix values;  // |E| x views, entries in {0, 1}
    std::vector<ViewSpec> views;
    std::vector<double> rho;  // per-view threshold used by the indicator

    bool operator==(const EdgeFeatures&) const = default;
};

struct GraphMeta {
    std::string config_name;
    std::string config_hash;
    std::map<std::string, double> numbers;   // thresholds, clamp extremes, ...
    std::vector<std::string> warnings;

    bool operator==(const GraphMeta&) const = default;
};

struct BrainGraph {
    std::string subject_id;
    std::optional<long long> label;
    std::size_t n = 0;
    Adjacency adjacency;
    NodeFeatures node_features;
    std::optional<EdgeFeatures> edge_features;
    GraphMeta meta;

    bool operator==(const BrainGraph&) const = default;
};

// X = [R1 | R2 | ...], each block copied verbatim.
NodeFeatures concat_node_features(std::span<const FcMatrix> fcs);

// CrossCorr(+delta) and CrossCorr(-delta) matrices for lag augmentation.
std::pair<FcMatrix, FcMatrix> lag_feature_views(const NormalizedMatrix& z, int delta,
                                                std::size_t workers = 0);

// Largest positive off-diagonal value that does NOT survive top-fraction
// sparsification of this view (0 when every positive value survives).
// Using it as the indicator threshold makes "value > rho" reproduce the
// view's own top-fraction edge set.
double top_fraction_cut(const FcMatrix& fc, double fraction);

// E[(i,j), k] = 1 iff fc_k(i, j) > rho_k over the Pearson-graph edges.
// fcs must contain a Pearson view; rho has one entry per view.
EdgeFeatures build_edge_features(const Adjacency& adj_pearson,
                                 std::span<const FcMatrix> fcs,
                                 std::span<const double> rho);

}  // namespace braingraph
