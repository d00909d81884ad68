#include <doctest.h>

#include <cmath>
#include <random>

#include "braingraph/error.hpp"
#include "braingraph/evalkit.hpp"
#include "support/oracles.hpp"

using namespace braingraph;

namespace {

// Two Gaussian blobs in d dimensions, centers +/- offset on every axis.
LabeledFeatures blobs(std::size_t per_class, std::size_t d, double offset,
                      double sigma, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    LabeledFeatures out;
    out.x = Matrix(2 * per_class, d);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const long long label = static_cast<long long>(i % 2);
        out.y.push_back(label);
        const double center = label == 0 ? -offset : offset;
        for (std::size_t k = 0; k < d; ++k) {
            out.x.at(i, k) = center + sigma * gauss(rng);
        }
    }
    return out;
}

BrainGraph labeled_graph(std::size_t n, long long label, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    BrainGraph graph;
    graph.subject_id = "g" + std::to_string(seed);
    graph.label = label;
    graph.n = n;
    graph.adjacency.n = n;
    graph.node_features.views = {ViewSpec{MetricKind::Pearson, 0}};
    graph.node_features.values = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            graph.node_features.values.at(i, j) =
                gauss(rng) + (label == 1 ? 0.5 : 0.0);
        }
    }
    return graph;
}

}  // namespace

TEST_CASE("both surrogates solve a linearly separable problem") {
    const LabeledFeatures train = blobs(20, 6, 2.0, 0.3, 1);
    const LabeledFeatures test = blobs(10, 6, 2.0, 0.3, 2);
    SurrogateModel centroid{SurrogateKind::NearestCentroid, 1.0,
                            FeatureMap::UpperTriangleFlatten};
    SurrogateModel ridge{SurrogateKind::RidgeLinear, 1.0,
                         FeatureMap::UpperTriangleFlatten};
    CHECK(fit_predict(centroid, train, test) == 1.0);
    CHECK(fit_predict(ridge, train, test) == 1.0);
}

TEST_CASE("random labels score near chance over 20 seeds") {
    SurrogateModel model{SurrogateKind::NearestCentroid, 1.0,
                         FeatureMap::UpperTriangleFlatten};
    double total = 0.0;
    for (unsigned seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        LabeledFeatures train;
        train.x = Matrix(60, 8);
        for (double& v : train.x.data()) v = gauss(rng);
        for (int i = 0; i < 60; ++i) train.y.push_back(i % 2);
        LabeledFeatures test;
        test.x = Matrix(40, 8);
        for (double& v : test.x.data()) v = gauss(rng);
        for (int i = 0; i < 40; ++i) test.y.push_back((i / 2) % 2);
        total += fit_predict(model, train, test);
    }
    const double mean = total / 20.0;
    CHECK(mean > 0.4);
    CHECK(mean < 0.6);
}

TEST_CASE("centroid in-sample accuracy bounds held-out accuracy on average") {
    SurrogateModel model{SurrogateKind::NearestCentroid, 1.0,
                         FeatureMap::UpperTriangleFlatten};
    double in_sample = 0.0;
    double held_out = 0.0;
    for (unsigned seed = 0; seed < 10; ++seed) {
        const LabeledFeatures train = blobs(30, 4, 0.4, 1.0, 100 + 2 * seed);
        const LabeledFeatures fresh = blobs(30, 4, 0.4, 1.0, 101 + 2 * seed);
        in_sample += fit_predict(model, train, train);
        held_out += fit_predict(model, train, fresh);
    }
    CHECK(in_sample >= held_out);
}

TEST_CASE("ridge with lambda 0 on a singular system falls back to centroid") {
    LabeledFeatures train = blobs(10, 3, 1.5, 0.2, 11);
    // Duplicate a column so the normal equations are exactly singular.
    Matrix wide(train.x.rows(), 4);
    for (std::size_t i = 0; i < train.x.rows(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) wide.at(i, k) = train.x.at(i, k);
        wide.at(i, 3) = train.x.at(i, 0);
    }
    train.x = wide;
    SurrogateModel model{SurrogateKind::RidgeLinear, 0.0,
                         FeatureMap::UpperTriangleFlatten};
    std::vector<std::string> warnings;
    const double accuracy = fit_predict(model, train, train, &warnings);
    CHECK(accuracy == 1.0);
    REQUIRE(!warnings.empty());
    CHECK(warnings[0].find("singular") != std::string::npos);
}

TEST_CASE("fit_predict validates inputs") {
    SurrogateModel model{SurrogateKind::NearestCentroid, 1.0,
                         FeatureMap::UpperTriangleFlatten};
    LabeledFeatures one_class;
    one_class.x = Matrix(4, 2, 0.5);
    one_class.y = {1, 1, 1, 1};
    CHECK_THROWS_AS(fit_predict(model, one_class, one_class), ValidationError);
}

TEST_CASE("featurize_graphs shapes for both maps") {
    std::vector<BrainGraph> graphs;
    for (unsigned s = 0; s < 6; ++s) {
        graphs.push_back(labeled_graph(5, static_cast<long long>(s % 2), s));
    }
    const LabeledFeatures ut =
        featurize_graphs(graphs, FeatureMap::UpperTriangleFlatten);
    CHECK(ut.x.rows() == 6);
    CHECK(ut.x.cols() == 10);  // 5*4/2 per view
    const LabeledFeatures mp =
        featurize_graphs(graphs, FeatureMap::NodeFeatureMeanPool);
    CHECK(mp.x.cols() == 5);

    // Upper triangle picks exactly the i<j entries, view-block aware.
    CHECK(ut.x.at(0, 0) == graphs[0].node_features.values.at(0, 1));
    CHECK(ut.x.at(0, 1) == graphs[0].node_features.values.at(0, 2));
    CHECK(ut.x.at(0, 9) == graphs[0].node_features.values.at(3, 4));
}

TEST_CASE("evaluate_config is deterministic under a fixed seed") {
    std::vector<BrainGraph> graphs;
    for (unsigned s = 0; s < 30; ++s) {
        graphs.push_back(labeled_graph(6, static_cast<long long>(s % 2), s));
    }
    EvalOptions options;
    options.model.kind = SurrogateKind::RidgeLinear;
    options.splits = 4;
    options.seed = 5;
    const ConfigAccuracy a = evaluate_config("x", graphs, options);
    const ConfigAccuracy b = evaluate_config("x", graphs, options);
    CHECK(a.per_split == b.per_split);
    CHECK(a.mean_accuracy == b.mean_accuracy);
    CHECK(a.per_split.size() == 4);
}

TEST_CASE("rank_configs on simple accuracy columns") {
    AccuracyTable table;
    table.configs = {"a", "b", "c"};
    table.settings = {"d1"};
    table.values = Matrix(3, 1);
    table.values.at(0, 0) = 0.9;
    table.values.at(1, 0) = 0.8;
    table.values.at(2, 0) = 0.7;
    const auto ranking = rank_configs(table);
    CHECK(ranking[0].config == "a");
    CHECK(ranking[0].average_rank == 1.0);
    CHECK(ranking[1].average_rank == 2.0);
    CHECK(ranking[2].average_rank == 3.0);
}

TEST_CASE("tied accuracies share the average rank") {
    AccuracyTable table;
    table.configs = {"a", "b"};
    table.settings = {"d1"};
    table.values = Matrix(2, 1, 0.75);
    const auto ranking = rank_configs(table);
    CHECK(ranking[0].average_rank == 1.5);
    CHECK(ranking[1].average_rank == 1.5);
}

TEST_CASE("rank_configs matches the naive oracle on a 12x3 table") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(0.4, 0.95);
    AccuracyTable table;
    for (int c = 0; c < 12; ++c) table.configs.push_back("cfg" + std::to_string(c));
    table.settings = {"rest", "task", "clinical"};
    table.values = Matrix(12, 3);
    for (double& v : table.values.data()) v = dist(rng);
    // Force one tie to exercise the averaging path.
    table.values.at(3, 1) = table.values.at(7, 1);

    const auto ranking = rank_configs(table);
    for (std::size_t s = 0; s < 3; ++s) {
        std::vector<double> column(12);
        for (std::size_t c = 0; c < 12; ++c) column[c] = table.values.at(c, s);
        const std::vector<double> expected = oracles::rank_column(column);
        for (const RankingEntry& entry : ranking) {
            const std::size_t c = static_cast<std::size_t>(
                std::stoi(entry.config.substr(3)));
            CHECK(entry.per_setting_rank[s] == doctest::Approx(expected[c]));
        }
    }
    // Average ranks are consistent with the per-setting ranks.
    for (const RankingEntry& entry : ranking) {
        double sum = 0.0;
        for (double r : entry.per_setting_rank) sum += r;
        CHECK(entry.average_rank == doctest::Approx(sum / 3.0));
    }
}

TEST_CASE("rank_configs is invariant under monotone accuracy relabeling") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    AccuracyTable table;
    for (int c = 0; c < 6; ++c) table.configs.push_back("c" + std::to_string(c));
    table.settings = {"s1", "s2"};
    table.values = Matrix(6, 2);
    for (double& v : table.values.data()) v = dist(rng);

    AccuracyTable squashed = table;
    for (double& v : squashed.values.data()) v = std::tanh(3.0 * v);

    const auto a = rank_configs(table);
    const auto b = rank_configs(squashed);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].config == b[i].config);
        CHECK(a[i].average_rank == b[i].average_rank);
    }
}

TEST_CASE("outperformance_rate counts strict wins") {
    const std::vector<double> baseline = {0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7};
    const std::vector<double> config = {0.8, 0.8, 0.8, 0.8, 0.8, 0.8, 0.6, 0.7};
    CHECK(outperformance_rate(config, baseline) == doctest::Approx(0.75));
    CHECK(outperformance_rate(baseline, baseline) == 0.0);
    const std::vector<double> sweep = {0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9};
    CHECK(outperformance_rate(sweep, baseline) == 1.0);
    CHECK_THROWS_AS(outperformance_rate(std::vector<double>{0.5}, baseline),
                    MisalignedSettingsError);
}

TEST_CASE("outperformance_rate is invariant under shared affine maps") {
    const std::vector<double> baseline = {0.5, 0.6, 0.7, 0.8};
    const std::vector<double> config = {0.55, 0.58, 0.75, 0.8};
    const double rate = outperformance_rate(config, baseline);
    std::vector<double> b2(baseline.size());
    std::vector<double> c2(config.size());
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        b2[i] = 0.3 * baseline[i] + 0.1;
        c2[i] = 0.3 * config[i] + 0.1;
    }
    CHECK(outperformance_rate(c2, b2) == rate);
}

TEST_CASE("render helpers mark the output as surrogate evaluation") {
    AccuracyTable table;
    table.configs = {"baseline", "lag-5"};
    table.settings = {"s1"};
    table.values = Matrix(2, 1);
    table.values.at(0, 0) = 0.7;
    table.values.at(1, 0) = 0.8;
    const std::string ranking = render_ranking_table(table);
    CHECK(ranking.find("surrogate evaluation") != std::string::npos);
    CHECK(ranking.find("lag-5") != std::string::npos);
    const std::string rates = render_outperformance(table, "baseline");
    CHECK(rates.find("surrogate evaluation") != std::string::npos);
    CHECK(rates.find("1.000") != std::string::npos);
}
