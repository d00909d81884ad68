#pragma once

// Internal JSON helpers shared by dataio and designspace. Not installed.

#include <json.hpp>

#include "braingraph/correlation.hpp"
#include "braingraph/featurize.hpp"

namespace braingraph::detail {

using json = nlohmann::json;

inline json view_to_json(const ViewSpec& view) {
    json j;
    j["metric"] = metric_name(view.metric);
    if (view.metric == MetricKind::CrossCorr) j["delta"] = view.delta;
    return j;
}

inline ViewSpec view_from_json(const json& j) {
    ViewSpec view;
    view.metric = metric_from_name(j.at("metric").get<std::string>());
    view.delta = j.value("delta", 0);
    return view;
}

inline json views_to_json(const std::vector<ViewSpec>& views) {
    json arr = json::array();
    for (const ViewSpec& v : views) arr.push_back(view_to_json(v));
    return arr;
}

inline std::vector<ViewSpec> views_from_json(const json& arr) {
    std::vector<ViewSpec> views;
    views.reserve(arr.size());
    for (const auto& j : arr) views.push_back(view_from_json(j));
    return views;
}

inline json meta_to_json(const GraphMeta& meta) {
    json j;
    j["config_name"] = meta.config_name;
    j["config_hash"] = meta.config_hash;
    j["numbers"] = json::object();
    for (const auto& [key, value] : meta.numbers) j["numbers"][key] = value;
    j["warnings"] = meta.warnings;
    return j;
}

inline GraphMeta meta_from_json(const json& j) {
    GraphMeta meta;
    meta.config_name = j.value("config_name", "");
    meta.config_hash = j.value("config_hash", "");
    if (j.contains("numbers")) {
        for (const auto& [key, value] : j.at("numbers").items()) {
            meta.numbers[key] = value.get<double>();
        }
    }
    if (j.contains("warnings")) {
        meta.warnings = j.at("warnings").get<std::vector<std::string>>();
    }
    return meta;
}

}  // namespace braingraph::detail
