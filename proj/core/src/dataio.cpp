#include "braingraph/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "braingraph/error.hpp"
#include "braingraph/hash.hpp"
#include "braingraph/version.hpp"
#include "json_detail.hpp"
#include "rng_detail.hpp"

namespace braingraph {

namespace fs = std::filesystem;
using detail::json;

// --- small encoding helpers ---------------------------------------------

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write to " + path.string());
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    const bool comma = line.find(',') != std::string::npos;
    std::string current;
    auto flush = [&] {
        // trim surrounding spaces
        std::size_t b = current.find_first_not_of(" \t\r");
        std::size_t e = current.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos
                             ? std::string()
                             : current.substr(b, e - b + 1));
        current.clear();
    };
    for (char c : line) {
        if (comma ? (c == ',') : (c == ' ' || c == '\t')) {
            if (comma || !current.empty()) flush();
        } else {
            current += c;
        }
    }
    if (comma || !current.empty()) flush();
    return fields;
}

bool parse_double(const std::string& token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::string sanitize_filename(const std::string& id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        out += ok ? c : '_';
    }
    return out.empty() ? "_" : out;
}

}  // namespace

// --- CSV ingestion -------------------------------------------------------

SubjectRecord ingest_csv(const fs::path& path, CsvLayout layout,
                         std::optional<long long> label) {
    const std::string contents = read_file(path);

    std::vector<std::vector<std::string>> rows;
    {
        std::istringstream in(contents);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            rows.push_back(split_fields(line));
        }
    }
    if (rows.empty()) {
        throw ParseError(path.string(), 1, 1, "empty table");
    }

    // A header row is any first row with a token that does not parse as a
    // number; its tokens become ROI labels in TimeByRoi layout.
    std::vector<std::string> header;
    {
        double ignored;
        const bool numeric = std::all_of(
            rows.front().begin(), rows.front().end(),
            [&](const std::string& tok) { return parse_double(tok, ignored); });
        if (!numeric) {
            header = rows.front();
            rows.erase(rows.begin());
            if (rows.empty()) {
                throw ParseError(path.string(), 2, 1, "no data rows after header");
            }
        }
    }

    const std::size_t n_rows = rows.size();
    const std::size_t n_cols = rows.front().size();
    const std::size_t header_lines = header.empty() ? 0 : 1;
    for (std::size_t r = 0; r < n_rows; ++r) {
        if (rows[r].size() != n_cols) {
            throw ParseError(path.string(), r + 1 + header_lines, rows[r].size(),
                             "non-rectangular table: expected " +
                                 std::to_string(n_cols) + " fields, got " +
                                 std::to_string(rows[r].size()));
        }
    }

    // Parse into a (file rows) x (file cols) table, rejecting non-finite
    // values with their data coordinates.
    std::vector<double> table(n_rows * n_cols);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            double v;
            if (!parse_double(rows[r][c], v)) {
                throw ParseError(path.string(), r + 1 + header_lines, c + 1,
                                 "not a number: '" + rows[r][c] + "'");
            }
            if (!std::isfinite(v)) {
                throw NonFiniteError(path.string(), r, c);
            }
            table[r * n_cols + c] = v;
        }
    }

    const std::size_t t_count = layout == CsvLayout::TimeByRoi ? n_rows : n_cols;
    const std::size_t roi_count = layout == CsvLayout::TimeByRoi ? n_cols : n_rows;

    SubjectRecord record;
    record.source_path = path.string();
    record.label = label;
    record.subject_id = path.stem().string();
    record.bold = BoldMatrix(t_count, roi_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        for (std::size_t r = 0; r < roi_count; ++r) {
            record.bold.at(t, r) = layout == CsvLayout::TimeByRoi
                                       ? table[t * n_cols + r]
                                       : table[r * n_cols + t];
        }
    }
    if (!header.empty()) {
        if (header.size() != roi_count) {
            // Header length matches the file's columns; in RoiByTime layout
            // that is time, not ROIs, so labels are dropped.
            if (layout == CsvLayout::TimeByRoi) {
                throw ParseError(path.string(), 1, header.size(),
                                 "header has " + std::to_string(header.size()) +
                                     " labels for " + std::to_string(roi_count) +
                                     " ROIs");
            }
        } else {
            record.bold.roi_labels() = header;
        }
    }
    record.bold.validate();
    return record;
}

void write_csv(const fs::path& path, const BoldMatrix& bold, CsvLayout layout) {
    std::string out;
    if (!bold.roi_labels().empty() && layout == CsvLayout::TimeByRoi) {
        for (std::size_t r = 0; r < bold.roi_count(); ++r) {
            if (r) out += ',';
            out += bold.roi_labels()[r];
        }
        out += '\n';
    }
    if (layout == CsvLayout::TimeByRoi) {
        for (std::size_t t = 0; t < bold.t_count(); ++t) {
            for (std::size_t r = 0; r < bold.roi_count(); ++r) {
                if (r) out += ',';
                out += format_double(bold.at(t, r));
            }
            out += '\n';
        }
    } else {
        for (std::size_t r = 0; r < bold.roi_count(); ++r) {
            for (std::size_t t = 0; t < bold.t_count(); ++t) {
                if (t) out += ',';
                out += format_double(bold.at(t, r));
            }
            out += '\n';
        }
    }
    write_file(path, out);
}

std::vector<std::pair<std::string, long long>> read_labels_file(const fs::path& path) {
    const std::string contents = read_file(path);
    std::istringstream in(contents);
    std::string line;
    std::vector<std::pair<std::string, long long>> labels;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2) {
            throw ParseError(path.string(), line_no, fields.size(),
                             "expected 'subject_id,label'");
        }
        double v;
        if (!parse_double(fields[1], v)) {
            if (line_no == 1) continue;  // header line
            throw ParseError(path.string(), line_no, 2,
                             "label is not an integer: '" + fields[1] + "'");
        }
        labels.emplace_back(fields[0], static_cast<long long>(v));
    }
    return labels;
}

// --- dataset directories -------------------------------------------------

std::size_t Dataset::roi_count() const {
    return subjects.empty() ? 0 : subjects.front().bold.roi_count();
}

void Dataset::validate() const {
    if (subjects.empty()) throw ValidationError("dataset has no subjects");
    std::set<std::string> ids;
    const std::size_t n = subjects.front().bold.roi_count();
    for (const SubjectRecord& s : subjects) {
        if (!ids.insert(s.subject_id).second) {
            throw ValidationError("duplicate subject id: " + s.subject_id);
        }
        if (s.bold.roi_count() != n) {
            throw ShapeMismatchError("subject " + s.subject_id + " has " +
                                     std::to_string(s.bold.roi_count()) +
                                     " ROIs, dataset has " + std::to_string(n));
        }
        s.bold.validate();
    }
}

std::string Dataset::digest() const {
    std::vector<const SubjectRecord*> ordered;
    ordered.reserve(subjects.size());
    for (const SubjectRecord& s : subjects) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const SubjectRecord* a, const SubjectRecord* b) {
                  return a->subject_id < b->subject_id;
              });

    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_bytes = [&](const void* data, std::size_t size) {
        h = fnv1a64(std::string_view(static_cast<const char*>(data), size), h);
    };
    for (const SubjectRecord* s : ordered) {
        mix_bytes(s->subject_id.data(), s->subject_id.size());
        const long long label = s->label.value_or(-1);
        mix_bytes(&label, sizeof(label));
        const std::uint64_t dims[2] = {s->bold.t_count(), s->bold.roi_count()};
        mix_bytes(dims, sizeof(dims));
        mix_bytes(s->bold.data().data(), s->bold.data().size() * sizeof(double));
    }
    return hex64(h);
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
    dataset.validate();
    std::error_code ec;
    fs::create_directories(dir / "subjects", ec);
    if (ec) throw IoError("cannot create " + (dir / "subjects").string());

    json manifest;
    manifest["tool_version"] = kVersion;
    manifest["n_subjects"] = dataset.subjects.size();
    manifest["roi_count"] = dataset.roi_count();
    if (dataset.modality) manifest["modality"] = *dataset.modality;
    json subjects = json::array();
    for (const SubjectRecord& s : dataset.subjects) {
        const std::string file = "subjects/" + sanitize_filename(s.subject_id) + ".csv";
        write_csv(dir / file, s.bold, CsvLayout::TimeByRoi);
        json j;
        j["id"] = s.subject_id;
        j["file"] = file;
        j["t_count"] = s.bold.t_count();
        if (s.label) j["label"] = *s.label;
        subjects.push_back(std::move(j));
    }
    manifest["subjects"] = std::move(subjects);
    manifest["digest"] = dataset.digest();
    if (dataset.split) {
        json split;
        split["proportions"] = dataset.split->proportions;
        split["seed"] = dataset.split->seed;
        split["names"] = dataset.split->names;
        split["assignment"] = dataset.split->split_of_subject;
        manifest["split"] = std::move(split);
    }
    write_file(dir / "dataset.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& dir) {
    const fs::path manifest_path = dir / "dataset.json";
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw IoError("cannot parse " + manifest_path.string() + ": " + e.what());
    }

    Dataset dataset;
    if (manifest.contains("modality") && !manifest["modality"].is_null()) {
        dataset.modality = manifest["modality"].get<std::string>();
    }
    for (const auto& j : manifest.at("subjects")) {
        std::optional<long long> label;
        if (j.contains("label")) label = j.at("label").get<long long>();
        SubjectRecord record =
            ingest_csv(dir / j.at("file").get<std::string>(), CsvLayout::TimeByRoi, label);
        record.subject_id = j.at("id").get<std::string>();
        dataset.subjects.push_back(std::move(record));
    }
    if (manifest.contains("split")) {
        const auto& split = manifest.at("split");
        SplitAssignment assignment;
        assignment.proportions = split.at("proportions").get<std::vector<double>>();
        assignment.seed = split.at("seed").get<std::uint64_t>();
        assignment.names = split.at("names").get<std::vector<std::string>>();
        assignment.split_of_subject = split.at("assignment").get<std::vector<int>>();
        dataset.split = std::move(assignment);
    }
    dataset.validate();
    return dataset;
}

// --- graph serialization -------------------------------------------------

std::string graph_to_json_line(const BrainGraph& graph) {
    json j;
    j["subject_id"] = graph.subject_id;
    j["label"] = graph.label ? json(*graph.label) : json(nullptr);
    j["n"] = graph.n;
    json edges = json::array();
    for (const Edge& e : graph.adjacency.edges) {
        edges.push_back(json::array({e.first, e.second}));
    }
    j["edges"] = std::move(edges);
    j["x"] = graph.node_features.values.data();
    if (graph.edge_features) {
        json e;
        e["views"] = detail::views_to_json(graph.edge_features->views);
        e["rho"] = graph.edge_features->rho;
        json data = json::array();
        for (double v : graph.edge_features->values.data()) {
            data.push_back(static_cast<int>(v));
        }
        e["data"] = std::move(data);
        j["e"] = std::move(e);
    } else {
        j["e"] = nullptr;
    }
    json meta = detail::meta_to_json(graph.meta);
    meta["views"] = detail::views_to_json(graph.node_features.views);
    meta["density_target"] = graph.adjacency.density_target;
    meta["tie_surplus"] = graph.adjacency.tie_surplus;
    meta["shortfall"] = graph.adjacency.shortfall;
    j["meta"] = std::move(meta);
    return j.dump();
}

BrainGraph graph_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError("<json-line>", 1, 1, e.what());
    }

    BrainGraph graph;
    graph.subject_id = j.at("subject_id").get<std::string>();
    if (!j.at("label").is_null()) graph.label = j.at("label").get<long long>();
    graph.n = j.at("n").get<std::size_t>();

    const auto& meta = j.at("meta");
    graph.meta = detail::meta_from_json(meta);
    graph.adjacency.n = graph.n;
    graph.adjacency.density_target = meta.value("density_target", 0.0);
    graph.adjacency.tie_surplus = meta.value("tie_surplus", std::size_t{0});
    graph.adjacency.shortfall = meta.value("shortfall", std::size_t{0});
    for (const auto& e : j.at("edges")) {
        graph.adjacency.edges.emplace_back(e.at(0).get<std::uint32_t>(),
                                           e.at(1).get<std::uint32_t>());
    }

    graph.node_features.views = detail::views_from_json(meta.at("views"));
    const auto x = j.at("x").get<std::vector<double>>();
    const std::size_t cols = graph.node_features.views.size() * graph.n;
    if (graph.n == 0 || x.size() != graph.n * cols) {
        throw ParseError("<json-line>", 1, 1,
                         "x has " + std::to_string(x.size()) +
                             " values, expected " + std::to_string(graph.n * cols));
    }
    graph.node_features.values = Matrix(graph.n, cols);
    graph.node_features.values.data() = x;

    if (j.contains("e") && !j.at("e").is_null()) {
        const auto& e = j.at("e");
        EdgeFeatures features;
        features.views = detail::views_from_json(e.at("views"));
        features.rho = e.at("rho").get<std::vector<double>>();
        const auto data = e.at("data").get<std::vector<int>>();
        const std::size_t rows = graph.adjacency.edges.size();
        if (data.size() != rows * features.views.size()) {
            throw ParseError("<json-line>", 1, 1, "edge feature size mismatch");
        }
        features.values = Matrix(rows, features.views.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            features.values.data()[i] = static_cast<double>(data[i]);
        }
        graph.edge_features = std::move(features);
    }
    return graph;
}

namespace {

// Little-endian primitive encoding for the packed format.
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_i64(std::vector<std::uint8_t>& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}
void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}
void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}
void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::string string() {
        const std::uint32_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
        pos_ += len;
        return s;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t count) {
        if (pos_ + count > bytes_.size()) {
            throw ParseError("<packed-binary>", 1, pos_, "truncated record");
        }
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

constexpr char kPackedMagic[4] = {'B', 'G', 'P', 'B'};

void put_views(std::vector<std::uint8_t>& out, const std::vector<ViewSpec>& views) {
    put_u32(out, static_cast<std::uint32_t>(views.size()));
    for (const ViewSpec& v : views) {
        out.push_back(static_cast<std::uint8_t>(v.metric));
        put_i32(out, v.delta);
    }
}

std::vector<ViewSpec> read_views(ByteReader& reader) {
    const std::uint32_t count = reader.u32();
    std::vector<ViewSpec> views(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        views[i].metric = static_cast<MetricKind>(reader.u8());
        views[i].delta = reader.i32();
    }
    return views;
}

}  // namespace

std::vector<std::uint8_t> graph_to_packed_binary(const BrainGraph& graph) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kPackedMagic, kPackedMagic + 4);
    put_u32(out, 1);  // version
    put_string(out, graph.subject_id);
    out.push_back(graph.label ? 1 : 0);
    put_i64(out, graph.label.value_or(0));
    put_u64(out, graph.n);
    put_f64(out, graph.adjacency.density_target);
    put_u64(out, graph.adjacency.tie_surplus);
    put_u64(out, graph.adjacency.shortfall);
    put_u64(out, graph.adjacency.edges.size());
    for (const Edge& e : graph.adjacency.edges) {
        put_u32(out, e.first);
        put_u32(out, e.second);
    }
    put_views(out, graph.node_features.views);
    put_u64(out, graph.node_features.values.rows());
    put_u64(out, graph.node_features.values.cols());
    for (double v : graph.node_features.values.data()) put_f64(out, v);
    out.push_back(graph.edge_features ? 1 : 0);
    if (graph.edge_features) {
        put_views(out, graph.edge_features->views);
        for (double r : graph.edge_features->rho) put_f64(out, r);
        put_u64(out, graph.edge_features->values.rows());
        put_u64(out, graph.edge_features->values.cols());
        for (double v : graph.edge_features->values.data()) {
            out.push_back(v != 0.0 ? 1 : 0);
        }
    }
    const json meta = detail::meta_to_json(graph.meta);
    put_string(out, meta.dump());
    return out;
}

BrainGraph graph_from_packed_binary(std::span<const std::uint8_t> bytes) {
    ByteReader reader(bytes);
    char magic[4];
    for (char& c : magic) c = static_cast<char>(reader.u8());
    if (std::memcmp(magic, kPackedMagic, 4) != 0) {
        throw ParseError("<packed-binary>", 1, 0, "bad magic");
    }
    const std::uint32_t version = reader.u32();
    if (version != 1) {
        throw ParseError("<packed-binary>", 1, 4,
                         "unsupported version " + std::to_string(version));
    }

    BrainGraph graph;
    graph.subject_id = reader.string();
    const bool has_label = reader.u8() != 0;
    const std::int64_t label = reader.i64();
    if (has_label) graph.label = label;
    graph.n = reader.u64();
    graph.adjacency.n = graph.n;
    graph.adjacency.density_target = reader.f64();
    graph.adjacency.tie_surplus = reader.u64();
    graph.adjacency.shortfall = reader.u64();
    const std::uint64_t edge_count = reader.u64();
    graph.adjacency.edges.reserve(edge_count);
    for (std::uint64_t i = 0; i < edge_count; ++i) {
        const std::uint32_t a = reader.u32();
        const std::uint32_t b = reader.u32();
        graph.adjacency.edges.emplace_back(a, b);
    }
    graph.node_features.views = read_views(reader);
    const std::uint64_t x_rows = reader.u64();
    const std::uint64_t x_cols = reader.u64();
    graph.node_features.values = Matrix(x_rows, x_cols);
    for (double& v : graph.node_features.values.data()) v = reader.f64();
    if (reader.u8() != 0) {
        EdgeFeatures features;
        features.views = read_views(reader);
        features.rho.resize(features.views.size());
        for (double& r : features.rho) r = reader.f64();
        const std::uint64_t e_rows = reader.u64();
        const std::uint64_t e_cols = reader.u64();
        features.values = Matrix(e_rows, e_cols);
        for (double& v : features.values.data()) v = reader.u8() ? 1.0 : 0.0;
        graph.edge_features = std::move(features);
    }
    const std::string meta_json = reader.string();
    try {
        graph.meta = detail::meta_from_json(json::parse(meta_json));
    } catch (const json::exception& e) {
        throw ParseError("<packed-binary>", 1, 0, e.what());
    }
    return graph;
}

ExportResult export_graphs(std::span<const BrainGraph> graphs, ExportFormat format,
                           const fs::path& dir, const std::string& extra_manifest_json) {
    if (graphs.empty()) throw ValidationError("no graphs to export");
    std::error_code ec;
    fs::create_directories(dir / "graphs", ec);
    if (ec) throw IoError("cannot create " + (dir / "graphs").string());

    ExportResult result;
    json manifest;
    manifest["tool_version"] = kVersion;
    manifest["format"] = format == ExportFormat::JsonLines ? "jsonl" : "binary";
    manifest["graph_count"] = graphs.size();
    manifest["n"] = graphs.front().n;

    json entries = json::array();
    std::set<std::string> used_names;
    for (const BrainGraph& graph : graphs) {
        std::string base = sanitize_filename(graph.subject_id);
        std::string name = base;
        for (int k = 1; !used_names.insert(name).second; ++k) {
            name = base + "_" + std::to_string(k);
        }
        const std::string file =
            "graphs/" + name + (format == ExportFormat::JsonLines ? ".json" : ".bin");
        const fs::path path = dir / file;
        if (format == ExportFormat::JsonLines) {
            write_file(path, graph_to_json_line(graph) + "\n");
        } else {
            const auto bytes = graph_to_packed_binary(graph);
            write_file(path, std::string_view(
                                 reinterpret_cast<const char*>(bytes.data()),
                                 bytes.size()));
        }
        result.graph_files.push_back(path);
        json entry;
        entry["subject_id"] = graph.subject_id;
        entry["file"] = file;
        entry["label"] = graph.label ? json(*graph.label) : json(nullptr);
        entries.push_back(std::move(entry));
    }
    manifest["graphs"] = std::move(entries);
    if (!extra_manifest_json.empty()) {
        const json extra = json::parse(extra_manifest_json);
        for (const auto& [key, value] : extra.items()) manifest[key] = value;
    }
    result.manifest_path = dir / "manifest.json";
    write_file(result.manifest_path, manifest.dump(2) + "\n");
    return result;
}

std::vector<BrainGraph> import_graphs(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw IoError("cannot parse " + manifest_path.string() + ": " + e.what());
    }
    const bool jsonl = manifest.at("format").get<std::string>() == "jsonl";
    std::vector<BrainGraph> graphs;
    for (const auto& entry : manifest.at("graphs")) {
        const fs::path path = dir / entry.at("file").get<std::string>();
        const std::string contents = read_file(path);
        if (jsonl) {
            std::string line = contents;
            if (!line.empty() && line.back() == '\n') line.pop_back();
            graphs.push_back(graph_from_json_line(line));
        } else {
            graphs.push_back(graph_from_packed_binary(std::span<const std::uint8_t>(
                reinterpret_cast<const std::uint8_t*>(contents.data()),
                contents.size())));
        }
    }
    return graphs;
}

// --- stratified splits -----------------------------------------------

std::vector<int> stratified_split(std::span<const long long> labels,
                                  std::span<const double> proportions,
                                  std::uint64_t seed) {
    if (labels.empty()) throw ValidationError("no labels to split");
    if (proportions.empty()) throw ValidationError("no split proportions");
    double sum = 0.0;
    for (double p : proportions) {
        if (p < 0.0) throw ValidationError("split proportions must be >= 0");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw ValidationError("split proportions must sum to 1, got " +
                              format_double(sum));
    }
    std::size_t nonzero = 0;
    for (double p : proportions) nonzero += p > 0.0 ? 1 : 0;

    std::map<long long, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::vector<int> assignment(labels.size(), 0);
    std::size_t class_index = 0;
    for (auto& [label, members] : by_class) {
        if (members.size() < nonzero) {
            throw ClassTooSmallError(label, members.size(), nonzero);
        }
        // Deterministic Fisher-Yates per class.
        detail::Rng rng(detail::mix_seed(seed, class_index, 0x5157));
        for (std::size_t i = members.size(); i > 1; --i) {
            const std::size_t j = rng.next_below(i);
            std::swap(members[i - 1], members[j]);
        }

        // Largest-remainder apportionment.
        const double total = static_cast<double>(members.size());
        std::vector<std::size_t> count(proportions.size(), 0);
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        for (std::size_t s = 0; s < proportions.size(); ++s) {
            const double target = proportions[s] * total;
            count[s] = static_cast<std::size_t>(std::floor(target));
            assigned += count[s];
            remainders.emplace_back(target - std::floor(target), s);
        }
        std::sort(remainders.begin(), remainders.end(),
                  [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                  });
        for (std::size_t k = 0; assigned < members.size(); ++k) {
            ++count[remainders[k % remainders.size()].second];
            ++assigned;
        }
        // Every nonzero-proportion split must receive at least one subject.
        for (std::size_t s = 0; s < proportions.size(); ++s) {
            while (proportions[s] > 0.0 && count[s] == 0) {
                std::size_t donor = 0;
                for (std::size_t d = 1; d < count.size(); ++d) {
                    if (count[d] > count[donor]) donor = d;
                }
                if (count[donor] <= 1) {
                    throw ClassTooSmallError(label, members.size(), nonzero);
                }
                --count[donor];
                ++count[s];
            }
        }

        std::size_t cursor = 0;
        for (std::size_t s = 0; s < proportions.size(); ++s) {
            for (std::size_t k = 0; k < count[s]; ++k) {
                assignment[members[cursor++]] = static_cast<int>(s);
            }
        }
        ++class_index;
    }
    return assignment;
}

// --- synthetic lag-coupled datasets ------------------------------------

Dataset synth_lagged_dataset(const SynthSpec& spec) {
    if (spec.n_subjects == 0 || spec.roi_count < 2 || spec.t_count < 4) {
        throw ValidationError("synth spec needs subjects >= 1, ROIs >= 2, T >= 4");
    }
    if (spec.classes.empty()) throw ValidationError("synth spec needs >= 1 class");
    if (!(spec.ar_coeff >= 0.0 && spec.ar_coeff < 1.0)) {
        throw ValidationError("ar_coeff must be in [0, 1)");
    }
    int max_lag = 0;
    for (const ClassSpec& cls : spec.classes) {
        for (const CouplingSpec& c : cls.couplings) {
            if (c.source >= spec.roi_count || c.target >= spec.roi_count) {
                throw ValidationError("coupling ROI out of range");
            }
            if (c.lag < 0 || static_cast<std::size_t>(c.lag) >= spec.t_count) {
                throw ValidationError("coupling lag must be in [0, T)");
            }
            max_lag = std::max(max_lag, c.lag);
        }
    }

    const std::size_t ext = spec.t_count + static_cast<std::size_t>(max_lag);
    const double phi = spec.ar_coeff;
    const double innovation = std::sqrt(1.0 - phi * phi);

    Dataset dataset;
    dataset.modality = "rest";
    dataset.subjects.resize(spec.n_subjects);

    for (std::size_t s = 0; s < spec.n_subjects; ++s) {
        const std::size_t cls = s % spec.classes.size();
        const ClassSpec& class_spec = spec.classes[cls];

        // Base AR(1) signals with exact unit stationary variance, one
        // independent stream per (subject, roi).
        std::vector<std::vector<double>> base(spec.roi_count);
        for (std::size_t r = 0; r < spec.roi_count; ++r) {
            detail::Rng rng(detail::mix_seed(spec.seed, s, r, 0xBA5E));
            auto& series = base[r];
            series.resize(ext);
            series[0] = rng.next_gaussian();
            for (std::size_t t = 1; t < ext; ++t) {
                series[t] = phi * series[t - 1] + innovation * rng.next_gaussian();
            }
        }

        SubjectRecord& record = dataset.subjects[s];
        char id[32];
        std::snprintf(id, sizeof(id), "synth-%04zu", s);
        record.subject_id = id;
        record.label = static_cast<long long>(cls);
        record.source_path = "<synthetic>";
        record.bold = BoldMatrix(spec.t_count, spec.roi_count);

        std::vector<bool> is_target(spec.roi_count, false);
        for (const CouplingSpec& c : class_spec.couplings) is_target[c.target] = true;

        for (std::size_t r = 0; r < spec.roi_count; ++r) {
            auto out = record.bold.roi(r);
            if (!is_target[r]) {
                for (std::size_t t = 0; t < spec.t_count; ++t) {
                    out[t] = base[r][t + static_cast<std::size_t>(max_lag)];
                }
            } else {
                detail::Rng noise(detail::mix_seed(spec.seed, s, r, 0x901E));
                for (std::size_t t = 0; t < spec.t_count; ++t) {
                    out[t] = spec.noise_sigma * noise.next_gaussian();
                }
                for (const CouplingSpec& c : class_spec.couplings) {
                    if (c.target != r) continue;
                    const auto& src = base[c.source];
                    for (std::size_t t = 0; t < spec.t_count; ++t) {
                        out[t] += c.gain *
                                  src[t + static_cast<std::size_t>(max_lag - c.lag)];
                    }
                }
            }
        }
    }
    return dataset;
}

}  // namespace braingraph
