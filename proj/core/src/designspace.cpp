#include "braingraph/designspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "braingraph/correlation.hpp"
#include "braingraph/error.hpp"
#include "braingraph/hash.hpp"
#include "braingraph/parallel.hpp"
#include "braingraph/version.hpp"
#include "json_detail.hpp"

namespace braingraph {

namespace fs = std::filesystem;
using detail::json;

// --- config validation / serialization ------------------------------------

void DesignConfig::validate() const {
    if (metric_views.empty()) {
        throw ValidationError("config '" + name + "' needs at least one metric view");
    }
    if (retention) retention->validate();
    if (const auto* subject = std::get_if<SubjectTopologySpec>(&topology)) {
        if (!(subject->fraction > 0.0 && subject->fraction <= 1.0)) {
            throw ValidationError("topology fraction must be in (0, 1]");
        }
    } else {
        const auto& unified = std::get<UnifiedTopologyParams>(topology);
        if (!(unified.proportion > 0.0 && unified.proportion <= 1.0) ||
            !(unified.subject_fraction > 0.0 && unified.subject_fraction <= 1.0)) {
            throw ValidationError("unified proportions must be in (0, 1]");
        }
    }
    if (edge_features.enabled) {
        if (edge_features.views.empty()) {
            throw ValidationError("edge featurization enabled with no views");
        }
        const bool has_pearson = std::any_of(
            edge_features.views.begin(), edge_features.views.end(),
            [](const ViewSpec& v) { return v.metric == MetricKind::Pearson; });
        if (!has_pearson) throw MissingPearsonViewError();
        if (edge_features.rho.kind == RhoPolicy::Kind::Fixed &&
            edge_features.rho.values.size() != edge_features.views.size()) {
            throw ShapeMismatchError("fixed rho needs one value per edge view");
        }
        if (edge_features.rho.kind == RhoPolicy::Kind::TopFraction &&
            !(edge_features.rho.fraction > 0.0 && edge_features.rho.fraction <= 1.0)) {
            throw ValidationError("rho fraction must be in (0, 1]");
        }
    }
}

namespace {

json retention_to_json(const std::optional<RetentionSpec>& retention) {
    if (!retention) return json(nullptr);
    json j;
    if (retention->is_percentile()) {
        j["mode"] = "percentile";
        j["alpha"] = std::get<PercentileThreshold>(retention->threshold_mode).alpha;
    } else {
        j["mode"] = "stddev";
        j["beta"] = std::get<StdDevThreshold>(retention->threshold_mode).beta;
    }
    j["gamma"] = retention->gamma == RetentionGamma::Binarize ? 1 : 0;
    return j;
}

std::optional<RetentionSpec> retention_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    RetentionSpec spec;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "percentile") {
        spec.threshold_mode = PercentileThreshold{j.at("alpha").get<double>()};
    } else if (mode == "stddev") {
        spec.threshold_mode = StdDevThreshold{j.at("beta").get<double>()};
    } else {
        throw ValidationError("unknown retention mode: " + mode);
    }
    spec.gamma = j.value("gamma", 0) == 1 ? RetentionGamma::Binarize
                                          : RetentionGamma::Retain;
    return spec;
}

json topology_to_json(const TopologyChoice& topology) {
    json j;
    if (const auto* subject = std::get_if<SubjectTopologySpec>(&topology)) {
        j["mode"] = "subject";
        j["metric"] = metric_name(subject->view.metric);
        j["delta"] = subject->view.delta;
        j["fraction"] = subject->fraction;
    } else {
        const auto& unified = std::get<UnifiedTopologyParams>(topology);
        j["mode"] = "unified";
        j["proportion"] = unified.proportion;
        j["subject_metric"] = metric_name(unified.subject_view.metric);
        j["subject_delta"] = unified.subject_view.delta;
        j["subject_fraction"] = unified.subject_fraction;
        j["allow_task"] = unified.allow_task_datasets;
    }
    return j;
}

TopologyChoice topology_from_json(const json& j) {
    const std::string mode = j.value("mode", "subject");
    if (mode == "subject") {
        SubjectTopologySpec spec;
        spec.view.metric = metric_from_name(j.value("metric", "pearson"));
        spec.view.delta = j.value("delta", 0);
        spec.fraction = j.value("fraction", 0.05);
        return spec;
    }
    if (mode == "unified") {
        UnifiedTopologyParams params;
        params.proportion = j.value("proportion", 0.05);
        params.subject_view.metric =
            metric_from_name(j.value("subject_metric", "pearson"));
        params.subject_view.delta = j.value("subject_delta", 0);
        params.subject_fraction = j.value("subject_fraction", params.proportion);
        params.allow_task_datasets = j.value("allow_task", false);
        return params;
    }
    throw ValidationError("unknown topology mode: " + mode);
}

json edge_features_to_json(const EdgeFeatureSpec& spec) {
    json j;
    j["enabled"] = spec.enabled;
    j["views"] = detail::views_to_json(spec.views);
    json rho;
    rho["policy"] = spec.rho.kind == RhoPolicy::Kind::TopFraction ? "top_fraction"
                                                                  : "fixed";
    if (spec.rho.kind == RhoPolicy::Kind::TopFraction) {
        rho["fraction"] = spec.rho.fraction;
    } else {
        rho["values"] = spec.rho.values;
    }
    j["rho"] = std::move(rho);
    return j;
}

EdgeFeatureSpec edge_features_from_json(const json& j) {
    EdgeFeatureSpec spec;
    spec.enabled = j.value("enabled", false);
    if (j.contains("views")) spec.views = detail::views_from_json(j.at("views"));
    if (spec.enabled && spec.views.empty()) {
        spec.views = {ViewSpec{MetricKind::Pearson, 0}, ViewSpec{MetricKind::Spearman, 0},
                      ViewSpec{MetricKind::Kendall, 0}};
    }
    if (j.contains("rho")) {
        const auto& rho = j.at("rho");
        const std::string policy = rho.value("policy", "top_fraction");
        if (policy == "top_fraction") {
            spec.rho.kind = RhoPolicy::Kind::TopFraction;
            spec.rho.fraction = rho.value("fraction", 0.05);
        } else if (policy == "fixed") {
            spec.rho.kind = RhoPolicy::Kind::Fixed;
            spec.rho.values = rho.at("values").get<std::vector<double>>();
        } else {
            throw ValidationError("unknown rho policy: " + policy);
        }
    }
    return spec;
}

json config_to_json(const DesignConfig& config) {
    json j;
    j["name"] = config.name;
    j["retention"] = retention_to_json(config.retention);
    j["views"] = detail::views_to_json(config.metric_views);
    j["topology"] = topology_to_json(config.topology);
    j["edge_features"] = edge_features_to_json(config.edge_features);
    j["stage_order"] = config.stage_order == StageOrder::RetainThenCorrelate
                           ? "retain_then_correlate"
                           : "correlate_raw";
    j["constant_signal"] =
        config.constant_signal == ConstantSignalPolicy::Drop ? "drop" : "abort";
    return j;
}

DesignConfig config_from_json_object(const json& j) {
    DesignConfig config;
    config.name = j.value("name", "");
    if (j.contains("retention")) {
        config.retention = retention_from_json(j.at("retention"));
    }
    if (j.contains("views")) {
        config.metric_views = detail::views_from_json(j.at("views"));
    } else {
        config.metric_views = {ViewSpec{MetricKind::Pearson, 0}};
    }
    if (j.contains("topology")) {
        config.topology = topology_from_json(j.at("topology"));
    }
    if (j.contains("edge_features")) {
        config.edge_features = edge_features_from_json(j.at("edge_features"));
    }
    const std::string order = j.value(
        "stage_order", config.retention ? "retain_then_correlate" : "correlate_raw");
    if (order == "retain_then_correlate") {
        config.stage_order = StageOrder::RetainThenCorrelate;
    } else if (order == "correlate_raw") {
        config.stage_order = StageOrder::CorrelateRaw;
    } else {
        throw ValidationError("unknown stage_order: " + order);
    }
    const std::string constant = j.value("constant_signal", "abort");
    if (constant == "abort") {
        config.constant_signal = ConstantSignalPolicy::Abort;
    } else if (constant == "drop") {
        config.constant_signal = ConstantSignalPolicy::Drop;
    } else {
        throw ValidationError("unknown constant_signal policy: " + constant);
    }
    if (config.name.empty()) config.name = "custom-" + config.hash().substr(0, 8);
    return config;
}

}  // namespace

std::string DesignConfig::canonical_json() const {
    json j = config_to_json(*this);
    // The name labels output directories; it is not part of the semantics.
    j.erase("name");
    return j.dump();
}

std::string DesignConfig::hash() const { return hex64(fnv1a64(canonical_json())); }

DesignConfig config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    DesignConfig config = config_from_json_object(j);
    config.validate();
    return config;
}

// --- presets -------------------------------------------------------------

namespace {

const std::vector<ViewSpec> kEdgeFeatureViews = {
    ViewSpec{MetricKind::Pearson, 0},
    ViewSpec{MetricKind::Spearman, 0},
    ViewSpec{MetricKind::Kendall, 0},
};

std::optional<RetentionSpec> retention_from_token(const std::string& token) {
    if (token == "none") return std::nullopt;
    RetentionSpec spec;
    if (token == "p30-g0" || token == "p30-g1") {
        spec.threshold_mode = PercentileThreshold{30.0};
    } else if (token == "sd1-g0" || token == "sd1-g1") {
        spec.threshold_mode = StdDevThreshold{1.0};
    } else {
        throw ValidationError("unknown retention token: " + token);
    }
    spec.gamma = token.back() == '1' ? RetentionGamma::Binarize : RetentionGamma::Retain;
    return spec;
}

// "lag-5" -> 5; empty when the name does not carry a suffix.
std::optional<int> lag_suffix(const std::string& name, const std::string& prefix) {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string suffix = name.substr(prefix.size());
    if (suffix.empty()) return std::nullopt;
    int value = 0;
    for (char c : suffix) {
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + (c - '0');
    }
    return value > 0 ? std::optional<int>(value) : std::nullopt;
}

std::vector<ViewSpec> lag_augmented_views(int delta) {
    return {ViewSpec{MetricKind::Pearson, 0}, ViewSpec{MetricKind::CrossCorr, delta},
            ViewSpec{MetricKind::CrossCorr, -delta}};
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"baseline", "p30-g0",  "p30-g1",   "sd1-g0",   "sd1-g1",
            "spearman", "kendall", "lag-1",    "lag-5",    "edge-feat",
            "ef-lag-1", "ef-lag-5", "five-view"};
}

DesignConfig preset_config(const std::string& name) {
    DesignConfig config;
    config.name = name;
    config.metric_views = {ViewSpec{MetricKind::Pearson, 0}};
    config.topology = SubjectTopologySpec{ViewSpec{MetricKind::Pearson, 0}, 0.05};

    if (name == "baseline") {
        // Standard pipeline: z-normalized series, Pearson FC, top-5%
        // positive edges, X = R.
    } else if (name == "p30-g0" || name == "p30-g1" || name == "sd1-g0" ||
               name == "sd1-g1") {
        config.retention = retention_from_token(name);
        config.stage_order = StageOrder::RetainThenCorrelate;
    } else if (name == "spearman") {
        config.metric_views = {ViewSpec{MetricKind::Spearman, 0}};
        config.topology = SubjectTopologySpec{ViewSpec{MetricKind::Spearman, 0}, 0.05};
    } else if (name == "kendall") {
        config.metric_views = {ViewSpec{MetricKind::Kendall, 0}};
        config.topology = SubjectTopologySpec{ViewSpec{MetricKind::Kendall, 0}, 0.05};
    } else if (auto lag = lag_suffix(name, "lag-")) {
        config.metric_views = lag_augmented_views(*lag);
    } else if (name == "edge-feat") {
        config.edge_features.enabled = true;
        config.edge_features.views = kEdgeFeatureViews;
    } else if (auto ef_lag = lag_suffix(name, "ef-lag-")) {
        config.metric_views = lag_augmented_views(*ef_lag);
        config.edge_features.enabled = true;
        config.edge_features.views = kEdgeFeatureViews;
    } else if (auto five = lag_suffix(name, "five-view-");
               five || name == "five-view") {
        const int delta = five.value_or(5);
        config.metric_views = {
            ViewSpec{MetricKind::Pearson, 0}, ViewSpec{MetricKind::Spearman, 0},
            ViewSpec{MetricKind::Kendall, 0}, ViewSpec{MetricKind::CrossCorr, delta},
            ViewSpec{MetricKind::CrossCorr, -delta}};
    } else {
        throw ValidationError("unknown preset: " + name);
    }
    config.validate();
    return config;
}

// --- sweep grids -----------------------------------------------------

namespace {

struct AxisValues {
    std::vector<std::string> retention{"none"};
    std::vector<std::string> metric{"pearson"};
    std::vector<std::string> lag{"0"};
    std::vector<std::string> topology{"subject-0.05"};
    std::vector<std::string> edge_features{"off"};
};

std::pair<std::string, double> parse_topology_token(const std::string& token) {
    const auto dash = token.find('-');
    const std::string mode = token.substr(0, dash);
    double fraction = 0.05;
    if (dash != std::string::npos) {
        try {
            fraction = std::stod(token.substr(dash + 1));
        } catch (const std::exception&) {
            throw ValidationError("bad topology axis value: " + token);
        }
    }
    if (mode != "subject" && mode != "unified") {
        throw ValidationError("bad topology axis value: " + token);
    }
    return {mode, fraction};
}

DesignConfig config_from_axes(const std::string& retention, const std::string& metric,
                              const std::string& lag, const std::string& topology,
                              const std::string& edge_features) {
    DesignConfig config;
    config.retention = retention_from_token(retention);
    if (config.retention) config.stage_order = StageOrder::RetainThenCorrelate;

    const MetricKind base = metric_from_name(metric);
    config.metric_views = {ViewSpec{base, 0}};
    int lag_value = 0;
    try {
        lag_value = std::stoi(lag);
    } catch (const std::exception&) {
        throw ValidationError("bad lag axis value: " + lag);
    }
    if (lag_value < 0) throw ValidationError("lag axis value must be >= 0");
    if (lag_value > 0) {
        config.metric_views.push_back(ViewSpec{MetricKind::CrossCorr, lag_value});
        config.metric_views.push_back(ViewSpec{MetricKind::CrossCorr, -lag_value});
    }

    const auto [mode, fraction] = parse_topology_token(topology);
    if (mode == "subject") {
        config.topology = SubjectTopologySpec{ViewSpec{base, 0}, fraction};
    } else {
        UnifiedTopologyParams params;
        params.proportion = fraction;
        params.subject_view = ViewSpec{base, 0};
        params.subject_fraction = fraction;
        config.topology = params;
    }

    if (edge_features == "on") {
        config.edge_features.enabled = true;
        config.edge_features.views = kEdgeFeatureViews;
    } else if (edge_features != "off") {
        throw ValidationError("bad edge_features axis value: " + edge_features);
    }

    // Name from the non-default parts.
    std::vector<std::string> parts;
    if (retention != "none") parts.push_back(retention);
    if (metric != "pearson") parts.push_back(metric);
    if (lag_value > 0) parts.push_back("lag-" + std::to_string(lag_value));
    if (topology != "subject-0.05") parts.push_back(topology);
    if (edge_features == "on") parts.push_back("ef");
    if (parts.empty()) {
        config.name = "baseline";
    } else {
        std::string name;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) name += '+';
            name += parts[i];
        }
        config.name = name;
    }
    return config;
}

}  // namespace

std::vector<DesignConfig> SweepGrid::resolve() const {
    std::vector<DesignConfig> configs;
    std::set<std::string> seen;

    for (const std::string& preset : presets) {
        DesignConfig config = preset_config(preset);
        if (seen.insert(config.hash()).second) configs.push_back(std::move(config));
    }

    if (!axes.empty()) {
        AxisValues values;
        for (const auto& [axis, list] : axes) {
            if (list.empty()) {
                throw ValidationError("axis '" + axis + "' has no values");
            }
            if (axis == "retention") values.retention = list;
            else if (axis == "metric") values.metric = list;
            else if (axis == "lag") values.lag = list;
            else if (axis == "topology") values.topology = list;
            else if (axis == "edge_features") values.edge_features = list;
            else throw ValidationError("unknown grid axis: " + axis);
        }

        auto excluded = [&](const std::string& retention, const std::string& metric,
                            const std::string& lag, const std::string& topology,
                            const std::string& edge_features) {
            for (const auto& rule : exclude) {
                bool match = true;
                for (const auto& [axis, value] : rule) {
                    if ((axis == "retention" && value != retention) ||
                        (axis == "metric" && value != metric) ||
                        (axis == "lag" && value != lag) ||
                        (axis == "topology" && value != topology) ||
                        (axis == "edge_features" && value != edge_features)) {
                        match = false;
                        break;
                    }
                }
                if (match && !rule.empty()) return true;
            }
            return false;
        };

        for (const auto& retention : values.retention)
            for (const auto& metric : values.metric)
                for (const auto& lag : values.lag)
                    for (const auto& topology : values.topology)
                        for (const auto& ef : values.edge_features) {
                            if (excluded(retention, metric, lag, topology, ef)) continue;
                            DesignConfig config =
                                config_from_axes(retention, metric, lag, topology, ef);
                            config.validate();
                            if (seen.insert(config.hash()).second) {
                                configs.push_back(std::move(config));
                            }
                        }
    }
    if (configs.empty()) throw ValidationError("sweep grid resolves to no configs");
    return configs;
}

SweepGrid grid_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("grid parse error: ") + e.what());
    }
    SweepGrid grid;
    if (j.contains("presets")) {
        grid.presets = j.at("presets").get<std::vector<std::string>>();
    }
    if (j.contains("axes")) {
        for (const auto& [axis, list] : j.at("axes").items()) {
            grid.axes[axis] = list.get<std::vector<std::string>>();
        }
    }
    if (j.contains("exclude")) {
        for (const auto& rule : j.at("exclude")) {
            std::map<std::string, std::string> parsed;
            for (const auto& [axis, value] : rule.items()) {
                parsed[axis] = value.is_string() ? value.get<std::string>() : value.dump();
            }
            grid.exclude.push_back(std::move(parsed));
        }
    }
    return grid;
}

// --- graph construction ----------------------------------------------

namespace {

template <typename Fn>
auto run_stage(const std::string& subject_id, const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw ValidationError("subject '" + subject_id + "' stage " + stage +
                              ": " + e.what());
    }
}

}  // namespace

BrainGraph build_graph(const SubjectRecord& subject, const DesignConfig& config,
                       std::size_t workers, BuildArtifacts* artifacts) {
    config.validate();

    BrainGraph graph;
    graph.subject_id = subject.subject_id;
    graph.label = subject.label;
    graph.meta.config_name = config.name;
    graph.meta.config_hash = config.hash();

    const NormalizedMatrix normalized =
        run_stage(subject.subject_id, "z_normalize",
                  [&] { return z_normalize(subject.bold, config.constant_signal); });
    if (!normalized.dropped_rois.empty()) {
        graph.meta.warnings.push_back(
            "dropped " + std::to_string(normalized.dropped_rois.size()) +
            " constant ROI(s)");
    }

    NormalizedMatrix retained;
    bool use_retained = false;
    if (config.retention) {
        ThresholdInfo thresholds;
        RetentionReport report;
        retained = run_stage(subject.subject_id, "retention", [&] {
            return retain_high_amplitude(normalized, *config.retention, &thresholds,
                                         &report);
        });
        if (thresholds.global) {
            graph.meta.numbers["theta"] = thresholds.per_roi.front();
            graph.meta.numbers["pooled_std"] = thresholds.pooled_std;
        } else {
            const auto [lo, hi] = std::minmax_element(thresholds.per_roi.begin(),
                                                      thresholds.per_roi.end());
            graph.meta.numbers["theta_min"] = *lo;
            graph.meta.numbers["theta_max"] = *hi;
        }
        std::size_t retained_total = 0;
        std::size_t surplus_total = 0;
        for (std::size_t r = 0; r < report.retained_per_roi.size(); ++r) {
            retained_total += report.retained_per_roi[r];
            surplus_total += report.tie_surplus_per_roi.empty()
                                 ? 0
                                 : report.tie_surplus_per_roi[r];
        }
        graph.meta.numbers["retained_samples"] = static_cast<double>(retained_total);
        graph.meta.numbers["retention_tie_surplus"] =
            static_cast<double>(surplus_total);
        use_retained = config.stage_order == StageOrder::RetainThenCorrelate;
        if (!use_retained) {
            graph.meta.warnings.push_back(
                "retention configured but stage_order=correlate_raw; correlations "
                "use the raw z-scored signal");
        }
    }
    const NormalizedMatrix& corr_signal = use_retained ? retained : normalized;
    graph.n = corr_signal.roi_count();

    // Compute each distinct view once, in first-use order.
    std::vector<ViewSpec> needed = config.metric_views;
    if (config.edge_features.enabled) {
        for (const ViewSpec& v : config.edge_features.views) {
            if (std::find(needed.begin(), needed.end(), v) == needed.end()) {
                needed.push_back(v);
            }
        }
    }
    const ViewSpec topology_view =
        config.unified() ? std::get<UnifiedTopologyParams>(config.topology).subject_view
                         : std::get<SubjectTopologySpec>(config.topology).view;
    if (std::find(needed.begin(), needed.end(), topology_view) == needed.end()) {
        needed.push_back(topology_view);
    }

    std::vector<FcMatrix> fcs;
    fcs.reserve(needed.size());
    for (const ViewSpec& view : needed) {
        FcMatrix fc = run_stage(subject.subject_id,
                                view.metric == MetricKind::CrossCorr ? "cross_corr"
                                                                     : "fc_matrix",
                                [&] { return fc_matrix(corr_signal, view, workers); });
        if (fc.max_clamp_excess > 0.0) {
            graph.meta.numbers["clamp_excess_" + view.label()] = fc.max_clamp_excess;
        }
        fcs.push_back(std::move(fc));
    }
    auto fc_for = [&](const ViewSpec& view) -> const FcMatrix& {
        const auto it = std::find(needed.begin(), needed.end(), view);
        return fcs[static_cast<std::size_t>(it - needed.begin())];
    };

    // Topology.
    const double fraction = config.unified()
                                ? std::get<UnifiedTopologyParams>(config.topology)
                                      .subject_fraction
                                : std::get<SubjectTopologySpec>(config.topology).fraction;
    graph.adjacency = run_stage(subject.subject_id, "topology", [&]() -> Adjacency {
        const FcMatrix& fc = fc_for(topology_view);
        if (topology_view.metric == MetricKind::CrossCorr) {
            graph.meta.warnings.push_back(
                "lagged topology source symmetrized with max(M, M^T); "
                "experimental path");
            return sparsify_top_positive(symmetrize_max(fc), fraction);
        }
        return sparsify_top_positive(fc, fraction);
    });
    if (graph.adjacency.shortfall > 0) {
        graph.meta.warnings.push_back(
            "sparsification budget shortfall: " +
            std::to_string(graph.adjacency.shortfall) + " edge(s) short");
    }
    graph.meta.numbers["edge_count"] =
        static_cast<double>(graph.adjacency.edges.size());

    // Node features.
    std::vector<FcMatrix> node_fcs;
    node_fcs.reserve(config.metric_views.size());
    for (const ViewSpec& view : config.metric_views) node_fcs.push_back(fc_for(view));
    graph.node_features = run_stage(subject.subject_id, "node_features", [&] {
        return concat_node_features(node_fcs);
    });

    // Edge features.
    if (config.edge_features.enabled) {
        std::vector<FcMatrix> edge_fcs;
        edge_fcs.reserve(config.edge_features.views.size());
        for (const ViewSpec& view : config.edge_features.views) {
            edge_fcs.push_back(fc_for(view));
        }
        std::vector<double> rho;
        if (config.edge_features.rho.kind == RhoPolicy::Kind::Fixed) {
            rho = config.edge_features.rho.values;
        } else {
            rho.reserve(edge_fcs.size());
            for (const FcMatrix& fc : edge_fcs) {
                rho.push_back(
                    top_fraction_cut(fc, config.edge_features.rho.fraction));
            }
        }
        graph.edge_features = run_stage(subject.subject_id, "edge_features", [&] {
            return build_edge_features(graph.adjacency, edge_fcs, rho);
        });
        if (artifacts) artifacts->edge_view_fcs = std::move(edge_fcs);
    }

    if (artifacts) artifacts->node_view_fcs = std::move(node_fcs);
    return graph;
}

// --- sweep execution ----------------------------------------------------

namespace {

std::string sanitize_dirname(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' ||
                        c == '-' || c == '+';
        out += ok ? c : '_';
    }
    return out.empty() ? "config" : out;
}

bool resume_hit(const fs::path& dir, const std::string& config_hash,
                const std::string& input_digest) {
    const fs::path manifest = dir / "manifest.json";
    if (!fs::exists(manifest)) return false;
    try {
        std::ifstream in(manifest);
        const json j = json::parse(in);
        return j.value("config_hash", "") == config_hash &&
               j.value("input_digest", "") == input_digest &&
               j.value("status", "") == "complete";
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

SweepResult run_sweep(const Dataset& dataset, const std::vector<DesignConfig>& configs,
                      const SweepOptions& options) {
    dataset.validate();
    if (configs.empty()) throw ValidationError("no configs to sweep");
    const std::string input_digest = dataset.digest();

    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec) throw IoError("cannot create " + options.out_dir.string());

    SweepResult result;
    std::set<std::string> used_dirs;

    for (const DesignConfig& config : configs) {
        config.validate();
        ConfigRunResult run;
        run.name = config.name;
        run.hash = config.hash();

        std::string dirname = sanitize_dirname(config.name);
        if (!used_dirs.insert(dirname).second) {
            dirname += "-" + run.hash.substr(0, 8);
            used_dirs.insert(dirname);
        }
        run.dir = options.out_dir / dirname;

        if (options.resume && resume_hit(run.dir, run.hash, input_digest)) {
            run.status = "skipped-resume";
            result.configs.push_back(std::move(run));
            continue;
        }

        // Unified topology is a resting-state design by default.
        if (config.unified() && dataset.modality && *dataset.modality == "task" &&
            !std::get<UnifiedTopologyParams>(config.topology).allow_task_datasets) {
            run.status = "failed";
            run.warnings.push_back(
                "unified topology rejected for task dataset (set allow_task)");
            result.any_failed = true;
            result.configs.push_back(std::move(run));
            continue;
        }

        const std::size_t count = dataset.subjects.size();
        const bool keep_artifacts = config.unified() && config.edge_features.enabled;
        std::vector<std::optional<BrainGraph>> graphs(count);
        std::vector<BuildArtifacts> artifacts(keep_artifacts ? count : 0);
        std::vector<std::string> errors(count);

        parallel_for(count, options.workers, [&](std::size_t i) {
            try {
                graphs[i] = build_graph(dataset.subjects[i], config, 1,
                                        keep_artifacts ? &artifacts[i] : nullptr);
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        });

        for (std::size_t i = 0; i < count; ++i) {
            if (!errors[i].empty()) ++run.subjects_failed;
        }
        run.subjects_ok = count - run.subjects_failed;

        const double failure_rate =
            static_cast<double>(run.subjects_failed) / static_cast<double>(count);
        if (failure_rate > options.failure_threshold || run.subjects_ok == 0) {
            run.status = "failed";
            for (std::size_t i = 0; i < count; ++i) {
                if (!errors[i].empty()) {
                    run.warnings.push_back(dataset.subjects[i].subject_id + ": " +
                                           errors[i]);
                }
            }
            result.any_failed = true;
            result.configs.push_back(std::move(run));
            continue;
        }

        // Cross-subject aggregation pass for unified configs.
        if (config.unified()) {
            const auto& params = std::get<UnifiedTopologyParams>(config.topology);
            std::vector<Adjacency> adjacencies;
            adjacencies.reserve(run.subjects_ok);
            for (const auto& graph : graphs) {
                if (graph) adjacencies.push_back(graph->adjacency);
            }
            UnifiedTopology unified = unify_topology(adjacencies, params.proportion);
            unified.adjacency.density_target = params.proportion;
            run.unified_k_threshold = unified.k_threshold;
            run.unified_edge_count = unified.adjacency.edges.size();

            for (std::size_t i = 0; i < count; ++i) {
                if (!graphs[i]) continue;
                BrainGraph& graph = *graphs[i];
                graph.adjacency = unified.adjacency;
                graph.meta.numbers["unified_k_threshold"] =
                    static_cast<double>(unified.k_threshold);
                graph.meta.numbers["unified_edge_count"] =
                    static_cast<double>(unified.adjacency.edges.size());
                graph.meta.numbers["edge_count"] =
                    static_cast<double>(unified.adjacency.edges.size());
                if (config.edge_features.enabled) {
                    graph.edge_features = build_edge_features(
                        graph.adjacency, artifacts[i].edge_view_fcs,
                        graph.edge_features->rho);
                }
            }
        }

        std::vector<BrainGraph> ordered;
        ordered.reserve(run.subjects_ok);
        for (auto& graph : graphs) {
            if (graph) ordered.push_back(std::move(*graph));
        }

        json extra;
        extra["config"] = json::parse(config.canonical_json());
        extra["config_name"] = config.name;
        extra["config_hash"] = run.hash;
        extra["input_digest"] = input_digest;
        extra["status"] = "complete";
        json failed = json::array();
        for (std::size_t i = 0; i < count; ++i) {
            if (!errors[i].empty()) {
                json f;
                f["subject_id"] = dataset.subjects[i].subject_id;
                f["error"] = errors[i];
                failed.push_back(std::move(f));
            }
        }
        extra["failed"] = std::move(failed);
        if (run.unified_k_threshold) {
            json unified;
            unified["k_threshold"] = *run.unified_k_threshold;
            unified["edge_count"] = *run.unified_edge_count;
            extra["unified"] = std::move(unified);
        }

        export_graphs(ordered, options.format, run.dir, extra.dump());
        run.status = "complete";
        result.configs.push_back(std::move(run));
    }

    json manifest;
    manifest["tool_version"] = kVersion;
    manifest["input_digest"] = input_digest;
    json entries = json::array();
    for (const ConfigRunResult& run : result.configs) {
        json j;
        j["name"] = run.name;
        j["hash"] = run.hash;
        j["dir"] = run.dir.filename().string();
        j["status"] = run.status;
        j["subjects_ok"] = run.subjects_ok;
        j["subjects_failed"] = run.subjects_failed;
        if (run.unified_k_threshold) j["unified_k_threshold"] = *run.unified_k_threshold;
        if (run.unified_edge_count) j["unified_edge_count"] = *run.unified_edge_count;
        if (!run.warnings.empty()) j["warnings"] = run.warnings;
        entries.push_back(std::move(j));
    }
    manifest["configs"] = std::move(entries);
    result.manifest_path = options.out_dir / "sweep_manifest.json";

    std::ofstream out(result.manifest_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + result.manifest_path.string());
    out << manifest.dump(2) << "\n";
    return result;
}

}  // namespace braingraph
