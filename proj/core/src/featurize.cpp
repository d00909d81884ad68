#include "braingraph/featurize.hpp"

#include <algorithm>
#include <cmath>

#include "braingraph/error.hpp"

namespace braingraph {

NodeFeatures concat_node_features(std::span<const FcMatrix> fcs) {
    if (fcs.empty()) {
        throw ValidationError("node featurization needs at least one FC matrix");
    }
    const std::size_t n = fcs.front().n();
    for (const FcMatrix& fc : fcs) {
        if (fc.n() != n) {
            throw ShapeMismatchError("FC matrix sizes differ: " +
                                     std::to_string(fc.n()) + " vs " +
                                     std::to_string(n));
        }
    }

    NodeFeatures out;
    out.views.reserve(fcs.size());
    out.values = Matrix(n, fcs.size() * n);
    for (std::size_t k = 0; k < fcs.size(); ++k) {
        out.views.push_back(fcs[k].view);
        for (std::size_t i = 0; i < n; ++i) {
            const auto src = fcs[k].values.row(i);
            std::copy(src.begin(), src.end(),
                      out.values.row(i).begin() +
                          static_cast<std::ptrdiff_t>(k * n));
        }
    }
    return out;
}

std::pair<FcMatrix, FcMatrix> lag_feature_views(const NormalizedMatrix& z, int delta,
                                                std::size_t workers) {
    if (delta <= 0) {
        throw ValidationError("lag augmentation needs a positive delta, got " +
                              std::to_string(delta));
    }
    FcMatrix lead = fc_matrix(z, ViewSpec{MetricKind::CrossCorr, delta}, workers);
    FcMatrix lag = fc_matrix(z, ViewSpec{MetricKind::CrossCorr, -delta}, workers);
    return {std::move(lead), std::move(lag)};
}

double top_fraction_cut(const FcMatrix& fc, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ValidationError("top-fraction cut needs fraction in (0, 1], got " +
                              std::to_string(fraction));
    }
    const std::size_t n = fc.n();
    std::vector<double> positives;
    positives.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = fc.values.at(i, j);
            if (v > 0.0) positives.push_back(v);
        }
    }
    const std::size_t budget = static_cast<std::size_t>(std::floor(
        fraction * static_cast<double>(n * (n - 1) / 2)));
    if (positives.size() <= budget) return 0.0;

    std::sort(positives.begin(), positives.end(), std::greater<double>());
    std::size_t keep = budget;
    if (keep > 0) {
        const double cut = positives[keep - 1];
        while (keep < positives.size() && positives[keep] == cut) ++keep;
    }
    return keep < positives.size() ? positives[keep] : 0.0;
}

EdgeFeatures build_edge_features(const Adjacency& adj_pearson,
                                 std::span<const FcMatrix> fcs,
                                 std::span<const double> rho) {
    if (fcs.empty()) {
        throw ValidationError("edge featurization needs at least one FC matrix");
    }
    if (rho.size() != fcs.size()) {
        throw ShapeMismatchError("rho count " + std::to_string(rho.size()) +
                                 " != view count " + std::to_string(fcs.size()));
    }
    const bool has_pearson =
        std::any_of(fcs.begin(), fcs.end(), [](const FcMatrix& fc) {
            return fc.view.metric == MetricKind::Pearson;
        });
    if (!has_pearson) throw MissingPearsonViewError();
    for (const FcMatrix& fc : fcs) {
        if (fc.n() != adj_pearson.n) {
            throw ShapeMismatchError("FC size " + std::to_string(fc.n()) +
                                     " != adjacency size " +
                                     std::to_string(adj_pearson.n));
        }
    }

    EdgeFeatures out;
    out.views.reserve(fcs.size());
    for (const FcMatrix& fc : fcs) out.views.push_back(fc.view);
    out.rho.assign(rho.begin(), rho.end());
    out.values = Matrix(adj_pearson.edges.size(), fcs.size());
    for (std::size_t e = 0; e < adj_pearson.edges.size(); ++e) {
        const auto [i, j] = adj_pearson.edges[e];
        for (std::size_t k = 0; k < fcs.size(); ++k) {
            out.values.at(e, k) = fcs[k].values.at(i, j) > rho[k] ? 1.0 : 0.0;
        }
    }
    return out;
}

}  // namespace braingraph
