// braingraph CLI: construct functional brain graphs from ROI time-series
// tables and explore the data-centric design space.
//
// Exit codes: 0 success, 1 validation error, 2 partial failure above the
// configured threshold, 3 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "braingraph/dataio.hpp"
#include "braingraph/designspace.hpp"
#include "braingraph/error.hpp"
#include "braingraph/evalkit.hpp"
#include "braingraph/parallel.hpp"
#include "braingraph/topology.hpp"
#include "braingraph/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace braingraph;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
}

std::vector<double> parse_proportions(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            out.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ValidationError("bad proportion value: " + token);
        }
    }
    return out;
}

ExportFormat parse_format(const std::string& name) {
    if (name == "jsonl") return ExportFormat::JsonLines;
    if (name == "binary") return ExportFormat::PackedBinary;
    throw ValidationError("unknown format: " + name + " (jsonl|binary)");
}

// --- ingest ----------------------------------------------------------

struct IngestArgs {
    std::vector<std::string> inputs;
    std::string layout = "time-by-roi";
    std::string labels_file;
    std::string modality;
    std::string split = "0.7,0.2,0.1";
    std::uint64_t seed = 0;
    bool no_split = false;
    std::string out;
};

int run_ingest(const IngestArgs& args) {
    const CsvLayout layout = args.layout == "roi-by-time" ? CsvLayout::RoiByTime
                                                          : CsvLayout::TimeByRoi;
    std::map<std::string, long long> labels;
    if (!args.labels_file.empty()) {
        for (const auto& [id, label] : read_labels_file(args.labels_file)) {
            labels[id] = label;
        }
    }

    Dataset dataset;
    if (!args.modality.empty()) dataset.modality = args.modality;
    for (const std::string& input : args.inputs) {
        SubjectRecord record = ingest_csv(input, layout);
        const auto it = labels.find(record.subject_id);
        if (it != labels.end()) record.label = it->second;
        dataset.subjects.push_back(std::move(record));
    }
    dataset.validate();

    const bool all_labeled = std::all_of(
        dataset.subjects.begin(), dataset.subjects.end(),
        [](const SubjectRecord& s) { return s.label.has_value(); });
    if (!args.no_split && all_labeled) {
        SplitAssignment split;
        split.proportions = parse_proportions(args.split);
        split.seed = args.seed;
        split.names = {"train", "test", "val"};
        while (split.names.size() > split.proportions.size()) split.names.pop_back();
        while (split.names.size() < split.proportions.size()) {
            split.names.push_back("split" + std::to_string(split.names.size()));
        }
        std::vector<long long> label_list;
        for (const SubjectRecord& s : dataset.subjects) label_list.push_back(*s.label);
        split.split_of_subject =
            stratified_split(label_list, split.proportions, split.seed);
        dataset.split = std::move(split);
    }

    save_dataset(dataset, args.out);
    std::cout << "ingested " << dataset.subjects.size() << " subject(s), n="
              << dataset.roi_count() << ", digest=" << dataset.digest() << "\n";
    return 0;
}

// --- synth ------------------------------------------------------------

struct SynthArgs {
    std::string spec_file;
    std::int64_t seed_override = -1;
    std::string out;
};

SynthSpec synth_spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("synth spec parse error: ") + e.what());
    }
    SynthSpec spec;
    spec.n_subjects = j.at("n_subjects").get<std::size_t>();
    spec.roi_count = j.at("roi_count").get<std::size_t>();
    spec.t_count = j.at("t_count").get<std::size_t>();
    spec.noise_sigma = j.value("noise_sigma", 0.0);
    spec.ar_coeff = j.value("ar_coeff", 0.5);
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& cls : j.at("classes")) {
        ClassSpec class_spec;
        class_spec.name = cls.value("name", "");
        for (const auto& c : cls.at("couplings")) {
            CouplingSpec coupling;
            coupling.source = c.at("source").get<std::size_t>();
            coupling.target = c.at("target").get<std::size_t>();
            coupling.lag = c.value("lag", 0);
            coupling.gain = c.value("gain", 1.0);
            class_spec.couplings.push_back(coupling);
        }
        spec.classes.push_back(std::move(class_spec));
    }
    return spec;
}

int run_synth(const SynthArgs& args) {
    SynthSpec spec = synth_spec_from_json(slurp(args.spec_file));
    if (args.seed_override >= 0) spec.seed = static_cast<std::uint64_t>(args.seed_override);
    Dataset dataset = synth_lagged_dataset(spec);
    save_dataset(dataset, args.out);
    std::cout << "generated " << dataset.subjects.size() << " subject(s), n="
              << spec.roi_count << ", T=" << spec.t_count << ", seed=" << spec.seed
              << "\n";
    return 0;
}

// --- build / sweep ----------------------------------------------------

struct BuildArgs {
    std::string in;
    std::string preset;
    std::string config_file;
    std::string out;
    std::string format = "jsonl";
    std::size_t workers = 0;
};

int run_build(const BuildArgs& args) {
    if (args.preset.empty() == args.config_file.empty()) {
        throw ValidationError("build needs exactly one of --preset or --config");
    }
    const DesignConfig config = args.preset.empty()
                                    ? config_from_json(slurp(args.config_file))
                                    : preset_config(args.preset);
    const Dataset dataset = load_dataset(args.in);

    // Reuse the sweep machinery for a single config so unified topologies
    // and partial-failure accounting behave identically; graphs land in
    // <out>/<config-name>/.
    SweepOptions options;
    options.out_dir = args.out;
    options.format = parse_format(args.format);
    options.workers = args.workers;
    SweepResult result = run_sweep(dataset, {config}, options);
    const ConfigRunResult& run = result.configs.front();
    std::cout << "config " << run.name << " [" << run.hash << "]: " << run.status
              << ", ok=" << run.subjects_ok << ", failed=" << run.subjects_failed
              << "\n";
    return result.any_failed ? 2 : 0;
}

struct SweepArgs {
    std::string in;
    std::string grid_file;
    std::string out;
    std::string format = "jsonl";
    std::size_t workers = 0;
    bool resume = false;
    double failure_threshold = 0.10;
};

int run_sweep_cmd(const SweepArgs& args) {
    const Dataset dataset = load_dataset(args.in);
    const SweepGrid grid = grid_from_json(slurp(args.grid_file));
    const std::vector<DesignConfig> configs = grid.resolve();

    SweepOptions options;
    options.out_dir = args.out;
    options.format = parse_format(args.format);
    options.workers = args.workers;
    options.resume = args.resume;
    options.failure_threshold = args.failure_threshold;

    // A "workers" key in the grid file wins over the environment variable;
    // the command-line flag wins over both.
    if (options.workers == 0) {
        const json j = json::parse(slurp(args.grid_file));
        if (j.contains("workers")) options.workers = j.at("workers").get<std::size_t>();
    }

    SweepResult result = run_sweep(dataset, configs, options);
    for (const ConfigRunResult& run : result.configs) {
        std::cout << run.name << " [" << run.hash << "]: " << run.status
                  << ", ok=" << run.subjects_ok << ", failed=" << run.subjects_failed;
        if (run.unified_k_threshold) {
            std::cout << ", k_threshold=" << *run.unified_k_threshold
                      << ", unified_edges=" << *run.unified_edge_count;
        }
        std::cout << "\n";
    }
    std::cout << "sweep manifest: " << result.manifest_path.string() << "\n";
    return result.any_failed ? 2 : 0;
}

// --- unify -------------------------------------------------------------

struct UnifyArgs {
    std::string in;
    double proportion = 0.05;
    std::string metric = "pearson";
    double fraction = -1.0;  // defaults to proportion
    bool allow_task = false;
    std::string out;
    std::size_t workers = 0;
};

int run_unify(const UnifyArgs& args) {
    const Dataset dataset = load_dataset(args.in);
    if (dataset.modality && *dataset.modality == "task" && !args.allow_task) {
        throw ValidationError(
            "unified topology targets resting-state data; pass --allow-task to "
            "override");
    }
    const double fraction = args.fraction > 0.0 ? args.fraction : args.proportion;

    std::vector<Adjacency> adjacencies(dataset.subjects.size());
    std::vector<std::string> errors(dataset.subjects.size());
    parallel_for(dataset.subjects.size(), args.workers, [&](std::size_t i) {
        try {
            const NormalizedMatrix z = z_normalize(dataset.subjects[i].bold);
            const FcMatrix fc =
                fc_matrix(z, ViewSpec{metric_from_name(args.metric), 0}, 1);
            adjacencies[i] = sparsify_top_positive(fc, fraction);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    std::vector<Adjacency> ok;
    for (std::size_t i = 0; i < adjacencies.size(); ++i) {
        if (errors[i].empty()) {
            ok.push_back(std::move(adjacencies[i]));
        } else {
            std::cerr << "warning: " << dataset.subjects[i].subject_id << ": "
                      << errors[i] << "\n";
        }
    }
    const UnifiedTopology unified = unify_topology(ok, args.proportion);

    json j;
    j["proportion"] = args.proportion;
    j["subject_metric"] = args.metric;
    j["subject_fraction"] = fraction;
    j["subject_count"] = unified.subject_count;
    j["k_threshold"] = unified.k_threshold;
    j["edge_count"] = unified.adjacency.edges.size();
    json edges = json::array();
    for (const Edge& e : unified.adjacency.edges) {
        edges.push_back(json::array({e.first, e.second}));
    }
    j["edges"] = std::move(edges);
    if (args.out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        spit(args.out, j.dump(2) + "\n");
        std::cout << "unified topology: k_threshold=" << unified.k_threshold
                  << ", edges=" << unified.adjacency.edges.size() << " -> "
                  << args.out << "\n";
    }
    return 0;
}

// --- eval / report ------------------------------------------------------

struct EvalArgs {
    std::string dataset_dir;
    std::string configs = "all";
    std::string model = "centroid";
    double lambda = 1.0;
    std::string feature_map = "upper-triangle";
    std::size_t splits = 5;
    std::uint64_t seed = 0;
    std::string proportions = "0.7,0.2,0.1";
    std::string setting;
    std::string out;
};

int run_eval(const EvalArgs& args) {
    EvalOptions options;
    options.model.kind = args.model == "ridge" ? SurrogateKind::RidgeLinear
                                               : SurrogateKind::NearestCentroid;
    if (args.model != "ridge" && args.model != "centroid") {
        throw ValidationError("unknown model: " + args.model + " (centroid|ridge)");
    }
    options.model.lambda = args.lambda;
    if (args.feature_map == "upper-triangle") {
        options.model.feature_map = FeatureMap::UpperTriangleFlatten;
    } else if (args.feature_map == "mean-pool") {
        options.model.feature_map = FeatureMap::NodeFeatureMeanPool;
    } else {
        throw ValidationError("unknown feature map: " + args.feature_map +
                              " (upper-triangle|mean-pool)");
    }
    options.splits = args.splits;
    options.seed = args.seed;
    options.proportions = parse_proportions(args.proportions);

    // Collect config directories from the sweep manifest when present,
    // otherwise treat the directory as a single exported config.
    std::vector<std::pair<std::string, fs::path>> config_dirs;
    const fs::path root(args.dataset_dir);
    if (fs::exists(root / "sweep_manifest.json")) {
        const json manifest = json::parse(slurp(root / "sweep_manifest.json"));
        for (const auto& entry : manifest.at("configs")) {
            if (entry.at("status").get<std::string>() == "failed") continue;
            config_dirs.emplace_back(entry.at("name").get<std::string>(),
                                     root / entry.at("dir").get<std::string>());
        }
    } else if (fs::exists(root / "manifest.json")) {
        const json manifest = json::parse(slurp(root / "manifest.json"));
        config_dirs.emplace_back(manifest.value("config_name", root.filename().string()),
                                 root);
    } else {
        throw IoError("no sweep_manifest.json or manifest.json under " +
                      root.string());
    }
    if (args.configs != "all") {
        std::set<std::string> wanted;
        std::stringstream ss(args.configs);
        std::string token;
        while (std::getline(ss, token, ',')) wanted.insert(token);
        std::erase_if(config_dirs, [&](const auto& pair) {
            return wanted.count(pair.first) == 0;
        });
        if (config_dirs.size() != wanted.size()) {
            throw ValidationError("some requested configs are missing from " +
                                  root.string());
        }
    }
    if (config_dirs.empty()) throw ValidationError("no configs to evaluate");

    json report;
    report["marker"] = kSurrogateMarker;
    report["setting"] = args.setting.empty() ? root.filename().string() : args.setting;
    report["model"] = args.model;
    report["lambda"] = args.lambda;
    report["feature_map"] = args.feature_map;
    report["splits"] = args.splits;
    report["seed"] = args.seed;
    json results = json::array();

    std::cout << "== " << kSurrogateMarker << " ==\n";
    for (const auto& [name, dir] : config_dirs) {
        const std::vector<BrainGraph> graphs = import_graphs(dir);
        const ConfigAccuracy accuracy = evaluate_config(name, graphs, options);
        json r;
        r["config"] = accuracy.config;
        r["mean_accuracy"] = accuracy.mean_accuracy;
        r["std_accuracy"] = accuracy.std_accuracy;
        r["per_split"] = accuracy.per_split;
        if (!accuracy.warnings.empty()) r["warnings"] = accuracy.warnings;
        results.push_back(std::move(r));
        std::cout << accuracy.config << ": " << accuracy.mean_accuracy << " +/- "
                  << accuracy.std_accuracy << " (" << args.splits << " splits)\n";
    }
    report["results"] = std::move(results);
    if (!args.out.empty()) {
        spit(args.out, report.dump(2) + "\n");
        std::cout << "report -> " << args.out << "\n";
    }
    return 0;
}

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string baseline = "baseline";
    std::string out;
};

int run_report(const ReportArgs& args) {
    if (args.inputs.empty()) throw ValidationError("report needs at least one input");

    AccuracyTable table;
    std::map<std::string, std::map<std::string, double>> acc;  // config -> setting
    for (const std::string& input : args.inputs) {
        const json report = json::parse(slurp(input));
        const std::string setting = report.at("setting").get<std::string>();
        table.settings.push_back(setting);
        for (const auto& r : report.at("results")) {
            acc[r.at("config").get<std::string>()][setting] =
                r.at("mean_accuracy").get<double>();
        }
    }
    for (const auto& [config, by_setting] : acc) {
        if (by_setting.size() != table.settings.size()) {
            throw MisalignedSettingsError("config '" + config +
                                          "' missing from some settings");
        }
        table.configs.push_back(config);
    }
    table.values = Matrix(table.configs.size(), table.settings.size());
    for (std::size_t c = 0; c < table.configs.size(); ++c) {
        for (std::size_t s = 0; s < table.settings.size(); ++s) {
            table.values.at(c, s) = acc[table.configs[c]][table.settings[s]];
        }
    }

    std::cout << render_ranking_table(table) << "\n";
    const bool have_baseline =
        std::find(table.configs.begin(), table.configs.end(), args.baseline) !=
        table.configs.end();
    if (have_baseline) {
        std::cout << render_outperformance(table, args.baseline);
    } else {
        std::cout << "(baseline '" << args.baseline
                  << "' not present; outperformance summary skipped)\n";
    }

    if (!args.out.empty()) {
        json summary;
        summary["marker"] = kSurrogateMarker;
        summary["settings"] = table.settings;
        json rankings = json::array();
        for (const RankingEntry& entry : rank_configs(table)) {
            json r;
            r["config"] = entry.config;
            r["average_rank"] = entry.average_rank;
            r["per_setting_rank"] = entry.per_setting_rank;
            rankings.push_back(std::move(r));
        }
        summary["ranking"] = std::move(rankings);
        if (have_baseline) {
            json rates = json::object();
            std::vector<double> baseline_acc;
            const std::size_t b = static_cast<std::size_t>(
                std::find(table.configs.begin(), table.configs.end(), args.baseline) -
                table.configs.begin());
            for (std::size_t s = 0; s < table.settings.size(); ++s) {
                baseline_acc.push_back(table.values.at(b, s));
            }
            for (std::size_t c = 0; c < table.configs.size(); ++c) {
                if (c == b) continue;
                std::vector<double> config_acc;
                for (std::size_t s = 0; s < table.settings.size(); ++s) {
                    config_acc.push_back(table.values.at(c, s));
                }
                rates[table.configs[c]] = outperformance_rate(config_acc, baseline_acc);
            }
            summary["outperformance_vs"] = args.baseline;
            summary["outperformance"] = std::move(rates);
        }
        spit(args.out, summary.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional brain graph construction and design-space sweeps"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "validate ROI time-series CSVs");
    ingest->add_option("--in", ingest_args.inputs, "input CSV files")->required();
    ingest->add_option("--layout", ingest_args.layout, "time-by-roi|roi-by-time");
    ingest->add_option("--labels-file", ingest_args.labels_file,
                       "subject_id,label CSV");
    ingest->add_option("--modality", ingest_args.modality, "rest|task");
    ingest->add_option("--split", ingest_args.split, "split proportions");
    ingest->add_option("--seed", ingest_args.seed, "split seed");
    ingest->add_flag("--no-split", ingest_args.no_split, "skip split assignment");
    ingest->add_option("--out", ingest_args.out, "dataset directory")->required();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a lag-coupled dataset");
    synth->add_option("--spec", synth_args.spec_file, "synth spec JSON")->required();
    synth->add_option("--seed", synth_args.seed_override, "seed override");
    synth->add_option("--out", synth_args.out, "dataset directory")->required();

    BuildArgs build_args;
    auto* build = app.add_subcommand("build", "build graphs for one configuration");
    build->add_option("--in", build_args.in, "dataset directory")->required();
    build->add_option("--preset", build_args.preset, "preset name");
    build->add_option("--config", build_args.config_file, "config JSON file");
    build->add_option("--out", build_args.out, "output directory")->required();
    build->add_option("--format", build_args.format, "jsonl|binary");
    build->add_option("--workers", build_args.workers, "worker count (0 = auto)");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "run a design-space grid");
    sweep->add_option("--in", sweep_args.in, "dataset directory")->required();
    sweep->add_option("--grid", sweep_args.grid_file, "grid JSON file")->required();
    sweep->add_option("--out", sweep_args.out, "output directory")->required();
    sweep->add_option("--format", sweep_args.format, "jsonl|binary");
    sweep->add_option("--workers", sweep_args.workers, "worker count (0 = auto)");
    sweep->add_flag("--resume", sweep_args.resume, "skip completed configs");
    sweep->add_option("--failure-threshold", sweep_args.failure_threshold,
                      "max tolerated per-subject failure fraction");

    UnifyArgs unify_args;
    auto* unify = app.add_subcommand("unify", "cross-subject unified topology");
    unify->add_option("--in", unify_args.in, "dataset directory")->required();
    unify->add_option("--proportion", unify_args.proportion, "edge budget fraction");
    unify->add_option("--metric", unify_args.metric, "subject adjacency metric");
    unify->add_option("--fraction", unify_args.fraction,
                      "subject adjacency fraction (defaults to proportion)");
    unify->add_flag("--allow-task", unify_args.allow_task,
                    "allow task-modality datasets");
    unify->add_option("--out", unify_args.out, "output JSON (stdout if omitted)");
    unify->add_option("--workers", unify_args.workers, "worker count (0 = auto)");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "surrogate evaluation of configs");
    eval->add_option("--dataset-dir", eval_args.dataset_dir,
                     "sweep output directory")->required();
    eval->add_option("--configs", eval_args.configs, "comma list or 'all'");
    eval->add_option("--model", eval_args.model, "centroid|ridge");
    eval->add_option("--lambda", eval_args.lambda, "ridge regularization");
    eval->add_option("--feature-map", eval_args.feature_map,
                     "upper-triangle|mean-pool");
    eval->add_option("--splits", eval_args.splits, "stratified split count");
    eval->add_option("--seed", eval_args.seed, "split seed");
    eval->add_option("--proportions", eval_args.proportions, "split proportions");
    eval->add_option("--setting", eval_args.setting, "setting name for reports");
    eval->add_option("--out", eval_args.out, "report JSON path");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "rank configs across settings");
    report->add_option("--in", report_args.inputs, "eval report JSONs")->required();
    report->add_option("--baseline", report_args.baseline, "baseline config name");
    report->add_option("--out", report_args.out, "summary JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return run_ingest(ingest_args);
        if (*synth) return run_synth(synth_args);
        if (*build) return run_build(build_args);
        if (*sweep) return run_sweep_cmd(sweep_args);
        if (*unify) return run_unify(unify_args);
        if (*eval) return run_eval(eval_args);
        if (*report) return run_report(report_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.category()) {
            case ErrorCategory::Validation: return 1;
            case ErrorCategory::PartialFailure: return 2;
            case ErrorCategory::Io: return 3;
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
