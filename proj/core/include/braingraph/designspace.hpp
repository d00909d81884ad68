#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "braingraph/dataio.hpp"
#include "braingraph/featurize.hpp"
#include "braingraph/signal.hpp"
#include "braingraph/topology.hpp"

namespace braingraph {

// Whether correlation views are computed on retained or raw z-scored
// signals when a retention stage is configured.
enum class StageOrder { RetainThenCorrelate, CorrelateRaw };

struct SubjectTopologySpec {
    ViewSpec view;  // symmetric metric, or lagged (symmetrized, experimental)
    double fraction = 0.05;

    bool operator==(const SubjectTopologySpec&) const = default;
};

struct UnifiedTopologyParams {
    double proportion = 0.05;
    // Per-subject adjacencies entering the aggregation.
    ViewSpec subject_view;
    double subject_fraction = 0.05;
    // Unified topology targets resting-state data; set to opt task data in.
    bool allow_task_datasets = false;

    bool operator==(const UnifiedTopologyParams&) const = default;
};

using TopologyChoice = std::variant<SubjectTopologySpec, UnifiedTopologyParams>;

struct RhoPolicy {
    enum class Kind { TopFraction, Fixed };
    Kind kind = Kind::TopFraction;
    double fraction = 0.05;         // TopFraction
    std::vector<double> values;     // Fixed, one per edge view

    bool operator==(const RhoPolicy&) const = default;
};

struct EdgeFeatureSpec {
    bool enabled = false;
    std::vector<ViewSpec> views;  // defaults to pearson/spearman/kendall
    RhoPolicy rho;

    bool operator==(const EdgeFeatureSpec&) const = default;
};

// One point in the data-centric design space.
struct DesignConfig {
    std::string name;
    std::optional<RetentionSpec> retention;
    std::vector<ViewSpec> metric_views;  // node feature views, in order
    TopologyChoice topology = SubjectTopologySpec{};
    EdgeFeatureSpec edge_features;
    StageOrder stage_order = StageOrder::CorrelateRaw;
    ConstantSignalPolicy constant_signal = ConstantSignalPolicy::Abort;

    bool unified() const noexcept {
        return std::holds_alternative<UnifiedTopologyParams>(topology);
    }
    void validate() const;
    // Canonical JSON with defaults materialized and sorted keys; the hash
    // therefore ignores config-file field order.
    std::string canonical_json() const;
    std::string hash() const;
};

// Named configurations covering the benchmark columns: baseline, p30-g0,
// p30-g1, sd1-g0, sd1-g1, spearman, kendall, lag-1, lag-5, edge-feat,
// ef-lag-1, ef-lag-5, five-view. lag-N / ef-lag-N / five-view-N accept any
// positive lag.
DesignConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

DesignConfig config_from_json(const std::string& json_text);

struct SweepGrid {
    std::vector<std::string> presets;
    // Axes: retention {none,p30-g0,p30-g1,sd1-g0,sd1-g1}, metric
    // {pearson,spearman,kendall}, lag {0,1,...}, topology
    // {subject-F,unified-F}, edge_features {off,on}.
    std::map<std::string, std::vector<std::string>> axes;
    std::vector<std::map<std::string, std::string>> exclude;

    // Presets first, then the Cartesian product in fixed axis order.
    std::vector<DesignConfig> resolve() const;
};

SweepGrid grid_from_json(const std::string& json_text);

// Per-view FC matrices produced while building one subject's graph;
// needed again when a unified topology replaces the subject adjacency.
struct BuildArtifacts {
    std::vector<FcMatrix> node_view_fcs;
    std::vector<FcMatrix> edge_view_fcs;
};

// z-normalize -> optional retention -> FC views -> topology -> node
// features -> optional edge features. Stage parameters and warnings are
// recorded in the graph meta.
BrainGraph build_graph(const SubjectRecord& subject, const DesignConfig& config,
                       std::size_t workers = 0, BuildArtifacts* artifacts = nullptr);

struct SweepOptions {
    std::filesystem::path out_dir;
    ExportFormat format = ExportFormat::JsonLines;
    std::size_t workers = 0;
    bool resume = false;
    // A configuration fails when more than this fraction of subjects fail.
    double failure_threshold = 0.10;
};

struct ConfigRunResult {
    std::string name;
    std::string hash;
    std::filesystem::path dir;
    std::string status;  // complete | failed | skipped-resume
    std::size_t subjects_ok = 0;
    std::size_t subjects_failed = 0;
    std::vector<std::string> warnings;
    std::optional<std::size_t> unified_k_threshold;
    std::optional<std::size_t> unified_edge_count;
};

struct SweepResult {
    std::vector<ConfigRunResult> configs;
    std::filesystem::path manifest_path;
    bool any_failed = false;
};

// One exported graph dataset per configuration plus a sweep manifest.
// Unified-topology configs aggregate subject adjacencies before export.
SweepResult run_sweep(const Dataset& dataset, const std::vector<DesignConfig>& configs,
                      const SweepOptions& options);

}  // namespace braingraph
