#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "braingraph/featurize.hpp"
#include "braingraph/matrix.hpp"

namespace braingraph {

enum class CsvLayout { TimeByRoi, RoiByTime };
enum class ExportFormat { JsonLines, PackedBinary };

struct SubjectRecord {
    std::string subject_id;
    std::optional<long long> label;
    BoldMatrix bold;
    std::string source_path;
};

struct SplitAssignment {
    std::vector<double> proportions;
    std::uint64_t seed = 0;
    std::vector<int> split_of_subject;  // aligned with dataset subject order
    std::vector<std::string> names;     // e.g. train/test/val
};

struct Dataset {
    std::vector<SubjectRecord> subjects;
    std::optional<std::string> modality;  // "rest" | "task"
    std::optional<SplitAssignment> split;

    std::size_t roi_count() const;
    // FNV digest over subject ids, labels, and raw matrix bytes.
    std::string digest() const;
    void validate() const;
};

// Directed coupling: target(t) += gain * source(t - lag).
struct CouplingSpec {
    std::size_t source = 0;
    std::size_t target = 1;
    int lag = 0;
    double gain = 1.0;
};

struct ClassSpec {
    std::string name;
    std::vector<CouplingSpec> couplings;
};

struct SynthSpec {
    std::size_t n_subjects = 0;
    std::size_t roi_count = 0;
    std::size_t t_count = 0;
    std::vector<ClassSpec> classes;
    double noise_sigma = 0.0;
    double ar_coeff = 0.5;  // base-signal AR(1) coefficient
    std::uint64_t seed = 0;
};

// --- time-series tables -----------------------------------------------

// Rectangular numeric table, optional header row of ROI labels.
// Rejects NaN/Inf with exact coordinates.
SubjectRecord ingest_csv(const std::filesystem::path& path, CsvLayout layout,
                         std::optional<long long> label = std::nullopt);

void write_csv(const std::filesystem::path& path, const BoldMatrix& bold,
               CsvLayout layout = CsvLayout::TimeByRoi);

// subject_id,label pairs with an optional header line.
std::vector<std::pair<std::string, long long>> read_labels_file(
    const std::filesystem::path& path);

// --- dataset directories ------------------------------------------------

// Layout: <dir>/dataset.json plus <dir>/subjects/<id>.csv.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

// --- graph export ---------------------------------------------------

struct ExportResult {
    std::filesystem::path manifest_path;
    std::vector<std::filesystem::path> graph_files;
};

std::string graph_to_json_line(const BrainGraph& graph);
BrainGraph graph_from_json_line(const std::string& line);

std::vector<std::uint8_t> graph_to_packed_binary(const BrainGraph& graph);
BrainGraph graph_from_packed_binary(std::span<const std::uint8_t> bytes);

// One file per graph under <dir>/graphs plus <dir>/manifest.json.
// extra_manifest, when given, is merged into the manifest object.
ExportResult export_graphs(std::span<const BrainGraph> graphs, ExportFormat format,
                           const std::filesystem::path& dir,
                           const std::string& extra_manifest_json = "");
std::vector<BrainGraph> import_graphs(const std::filesystem::path& dir);

// --- splits & synthesis ---------------------------------------------

// Per-class proportional assignment (largest remainder), deterministic
// under the seed. Every split with a nonzero proportion receives at least
// one subject per class or ClassTooSmallError is raised.
std::vector<int> stratified_split(std::span<const long long> labels,
                                  std::span<const double> proportions,
                                  std::uint64_t seed);

// Standardized AR(1) base signals; coupled targets are lagged, scaled
// copies plus white noise. Reproducible: every (subject, roi) stream is
// seeded independently of generation order.
Dataset synth_lagged_dataset(const SynthSpec& spec);

}  // namespace braingraph
