#include <doctest.h>

#include <cmath>
#include <random>

#include "braingraph/error.hpp"
#include "braingraph/featurize.hpp"

using namespace braingraph;

namespace {

NormalizedMatrix random_normalized(std::size_t t, std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    NormalizedMatrix z;
    z.values = BoldMatrix(t, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < t; ++i) z.values.at(i, r) = gauss(rng);
    }
    z.per_roi_mean.assign(n, 0.0);
    z.per_roi_std.assign(n, 1.0);
    return z;
}

}  // namespace

TEST_CASE("single view reduces to the FC matrix itself") {
    const NormalizedMatrix z = random_normalized(40, 6, 5);
    const FcMatrix fc = fc_matrix(z, ViewSpec{MetricKind::Pearson, 0});
    const NodeFeatures x = concat_node_features(std::vector<FcMatrix>{fc});
    CHECK(x.view_count() == 1);
    CHECK(x.values.rows() == 6);
    CHECK(x.values.cols() == 6);
    CHECK(x.values == fc.values);
}

TEST_CASE("five-view concatenation has width 5n and bitwise blocks") {
    const NormalizedMatrix z = random_normalized(60, 5, 7);
    std::vector<FcMatrix> fcs;
    fcs.push_back(fc_matrix(z, ViewSpec{MetricKind::Pearson, 0}));
    fcs.push_back(fc_matrix(z, ViewSpec{MetricKind::Spearman, 0}));
    fcs.push_back(fc_matrix(z, ViewSpec{MetricKind::Kendall, 0}));
    fcs.push_back(fc_matrix(z, ViewSpec{MetricKind::CrossCorr, 2}));
    fcs.push_back(fc_matrix(z, ViewSpec{MetricKind::CrossCorr, -2}));

    const NodeFeatures x = concat_node_features(fcs);
    CHECK(x.values.rows() == 5);
    CHECK(x.values.cols() == 25);
    for (std::size_t k = 0; k < 5; ++k) {
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 5; ++j) {
                CHECK(x.values.at(i, k * 5 + j) == fcs[k].values.at(i, j));
            }
        }
    }
}

TEST_CASE("duplicated views produce bitwise-equal blocks") {
    const NormalizedMatrix z = random_normalized(30, 4, 9);
    const FcMatrix fc = fc_matrix(z, ViewSpec{MetricKind::Pearson, 0});
    const NodeFeatures x = concat_node_features(std::vector<FcMatrix>{fc, fc});
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(x.values.at(i, j) == x.values.at(i, 4 + j));
        }
    }
}

TEST_CASE("removing a view leaves the remaining blocks unchanged") {
    const NormalizedMatrix z = random_normalized(40, 4, 11);
    std::vector<FcMatrix> three;
    three.push_back(fc_matrix(z, ViewSpec{MetricKind::Pearson, 0}));
    three.push_back(fc_matrix(z, ViewSpec{MetricKind::Spearman, 0}));
    three.push_back(fc_matrix(z, ViewSpec{MetricKind::Kendall, 0}));
    const NodeFeatures full = concat_node_features(three);
    const NodeFeatures reduced = concat_node_features(
        std::vector<FcMatrix>{three[0], three[2]});
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(reduced.values.at(i, j) == full.values.at(i, j));
            CHECK(reduced.values.at(i, 4 + j) == full.values.at(i, 8 + j));
        }
    }
}

TEST_CASE("concat rejects mismatched sizes") {
    const NormalizedMatrix a = random_normalized(30, 4, 13);
    const NormalizedMatrix b = random_normalized(30, 5, 13);
    const FcMatrix fa = fc_matrix(a, ViewSpec{MetricKind::Pearson, 0});
    const FcMatrix fb = fc_matrix(b, ViewSpec{MetricKind::Pearson, 0});
    CHECK_THROWS_AS(concat_node_features(std::vector<FcMatrix>{fa, fb}),
                    ShapeMismatchError);
}

TEST_CASE("lag_feature_views returns transposed lead/lag pair") {
    const NormalizedMatrix z = random_normalized(50, 4, 17);
    const auto [lead, lag] = lag_feature_views(z, 3);
    CHECK(lead.view.delta == 3);
    CHECK(lag.view.delta == -3);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(std::fabs(lead.values.at(i, j) - lag.values.at(j, i)) < 1e-12);
        }
    }
    CHECK_THROWS_AS(lag_feature_views(z, 48), LagTooLargeError);
    CHECK_THROWS_AS(lag_feature_views(z, 0), ValidationError);
}

TEST_CASE("edge features encode per-view indicators over pearson edges") {
    // Hand-built 3-node views: edge (0,1) in the adjacency.
    FcMatrix pearson_fc;
    pearson_fc.view = ViewSpec{MetricKind::Pearson, 0};
    pearson_fc.values = Matrix(3, 3, 0.0);
    pearson_fc.values.at(0, 1) = pearson_fc.values.at(1, 0) = 0.9;
    pearson_fc.values.at(0, 2) = pearson_fc.values.at(2, 0) = 0.2;
    pearson_fc.values.at(1, 2) = pearson_fc.values.at(2, 1) = -0.1;

    FcMatrix spearman_fc = pearson_fc;
    spearman_fc.view = ViewSpec{MetricKind::Spearman, 0};
    spearman_fc.values.at(0, 1) = spearman_fc.values.at(1, 0) = 0.7;

    FcMatrix kendall_fc = pearson_fc;
    kendall_fc.view = ViewSpec{MetricKind::Kendall, 0};
    kendall_fc.values.at(0, 1) = kendall_fc.values.at(1, 0) = 0.3;

    Adjacency adj;
    adj.n = 3;
    adj.edges = {{0, 1}};

    const std::vector<double> rho = {0.5, 0.5, 0.5};
    const EdgeFeatures features = build_edge_features(
        adj, std::vector<FcMatrix>{pearson_fc, spearman_fc, kendall_fc}, rho);
    CHECK(features.values.rows() == 1);
    CHECK(features.values.cols() == 3);
    CHECK(features.values.at(0, 0) == 1.0);  // 0.9 > 0.5
    CHECK(features.values.at(0, 1) == 1.0);  // 0.7 > 0.5
    CHECK(features.values.at(0, 2) == 0.0);  // 0.3 < 0.5
}

TEST_CASE("rho of 1 zeroes the whole indicator matrix") {
    const NormalizedMatrix z = random_normalized(40, 5, 19);
    const FcMatrix fc = fc_matrix(z, ViewSpec{MetricKind::Pearson, 0});
    const Adjacency adj = sparsify_top_positive(fc, 0.5);
    const std::vector<double> rho = {1.0};
    const EdgeFeatures features =
        build_edge_features(adj, std::vector<FcMatrix>{fc}, rho);
    for (double v : features.values.data()) CHECK(v == 0.0);
}

TEST_CASE("default rho makes each column reproduce its view's own edge set") {
    const NormalizedMatrix z = random_normalized(80, 8, 23);
    std::vector<FcMatrix> fcs;
    fcs.push_back(fc_matrix(z, ViewSpec{MetricKind::Pearson, 0}));
    fcs.push_back(fc_matrix(z, ViewSpec{MetricKind::Spearman, 0}));
    fcs.push_back(fc_matrix(z, ViewSpec{MetricKind::Kendall, 0}));
    const double fraction = 0.25;
    const Adjacency pearson_adj = sparsify_top_positive(fcs[0], fraction);

    std::vector<double> rho;
    for (const FcMatrix& fc : fcs) rho.push_back(top_fraction_cut(fc, fraction));
    const EdgeFeatures features = build_edge_features(pearson_adj, fcs, rho);

    // The Pearson column is all ones: the adjacency is its own top cut.
    for (std::size_t e = 0; e < features.values.rows(); ++e) {
        CHECK(features.values.at(e, 0) == 1.0);
    }
    // Column k agrees with membership in view k's own sparsified graph.
    for (std::size_t k = 1; k < fcs.size(); ++k) {
        const Adjacency view_adj = sparsify_top_positive(fcs[k], fraction);
        for (std::size_t e = 0; e < pearson_adj.edges.size(); ++e) {
            const auto [i, j] = pearson_adj.edges[e];
            CHECK(features.values.at(e, k) ==
                  (view_adj.has_edge(i, j) ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("edge featurization requires a pearson view") {
    const NormalizedMatrix z = random_normalized(30, 4, 29);
    const FcMatrix spearman_fc = fc_matrix(z, ViewSpec{MetricKind::Spearman, 0});
    Adjacency adj;
    adj.n = 4;
    adj.edges = {{0, 1}};
    const std::vector<double> rho = {0.5};
    CHECK_THROWS_AS(
        build_edge_features(adj, std::vector<FcMatrix>{spearman_fc}, rho),
        MissingPearsonViewError);
}
