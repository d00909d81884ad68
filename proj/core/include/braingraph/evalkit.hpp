#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "braingraph/featurize.hpp"
#include "braingraph/matrix.hpp"

namespace braingraph {

// Deliberately small stand-ins for the downstream graph classifiers;
// report output carries a surrogate marker so the numbers are never read
// as model accuracies from the reference benchmarks.
inline constexpr const char* kSurrogateMarker =
    "surrogate evaluation (nearest-centroid / ridge), not a GNN benchmark";

enum class SurrogateKind { NearestCentroid, RidgeLinear };
enum class FeatureMap { UpperTriangleFlatten, NodeFeatureMeanPool };

struct SurrogateModel {
    SurrogateKind kind = SurrogateKind::NearestCentroid;
    double lambda = 1.0;  // ridge regularization
    FeatureMap feature_map = FeatureMap::UpperTriangleFlatten;
};

struct LabeledFeatures {
    Matrix x;                  // one row per subject
    std::vector<long long> y;  // class labels
};

// Per-view upper triangles (i < j) or per-column means of the node
// feature matrix.
LabeledFeatures featurize_graphs(std::span<const BrainGraph> graphs, FeatureMap map);

// Deterministic fit + evaluate; returns test accuracy in [0, 1]. A singular
// ridge system falls back to nearest centroid and records a warning.
double fit_predict(const SurrogateModel& model, const LabeledFeatures& train,
                   const LabeledFeatures& test,
                   std::vector<std::string>* warnings = nullptr);

struct EvalOptions {
    SurrogateModel model;
    std::size_t splits = 5;
    std::uint64_t seed = 0;
    // train / test / validation; surrogates train on the first split and
    // score on the second.
    std::vector<double> proportions = {0.7, 0.2, 0.1};
};

struct ConfigAccuracy {
    std::string config;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<double> per_split;
    std::vector<std::string> warnings;
};

// Repeated stratified splits; mean and std over split accuracies.
ConfigAccuracy evaluate_config(const std::string& config_name,
                               std::span<const BrainGraph> graphs,
                               const EvalOptions& options);

// Accuracy per config per setting (a setting is typically one dataset).
struct AccuracyTable {
    std::vector<std::string> configs;
    std::vector<std::string> settings;
    Matrix values;  // configs x settings

    bool operator==(const AccuracyTable&) const = default;
};

struct RankingEntry {
    std::string config;
    double average_rank = 0.0;
    std::vector<double> per_setting_rank;
};

// Rank per setting (1 = highest accuracy, ties share the average rank),
// then average across settings. Sorted ascending by average rank.
std::vector<RankingEntry> rank_configs(const AccuracyTable& table);

// Fraction of settings where the config strictly beats the baseline.
double outperformance_rate(std::span<const double> config_acc,
                           std::span<const double> baseline_acc);

// Text rendering used by the CLI: a ranking table plus an outperformance
// summary against the named baseline.
std::string render_ranking_table(const AccuracyTable& table);
std::string render_outperformance(const AccuracyTable& table,
                                  const std::string& baseline_config);

}  // namespace braingraph
