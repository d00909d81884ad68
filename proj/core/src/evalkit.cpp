#include "braingraph/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "braingraph/dataio.hpp"
#include "braingraph/error.hpp"

namespace braingraph {

namespace {

struct SingularSystem {};

// In-place Cholesky solve of (A) X = B for symmetric positive definite A.
// A is m x m, B is m x k; both row-major. Throws SingularSystem when a
// pivot collapses relative to the matrix scale (rank deficiency).
void cholesky_solve(Matrix& a, Matrix& b) {
    const std::size_t m = a.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, a.at(i, i));
    const double floor = std::max(scale, 1.0) * 1e-12;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= a.at(i, k) * a.at(j, k);
            if (i == j) {
                if (sum <= floor) throw SingularSystem{};
                a.at(i, i) = std::sqrt(sum);
            } else {
                a.at(i, j) = sum / a.at(j, j);
            }
        }
    }
    // Forward then back substitution per column of B.
    const std::size_t k_cols = b.cols();
    for (std::size_t c = 0; c < k_cols; ++c) {
        for (std::size_t i = 0; i < m; ++i) {
            double sum = b.at(i, c);
            for (std::size_t k = 0; k < i; ++k) sum -= a.at(i, k) * b.at(k, c);
            b.at(i, c) = sum / a.at(i, i);
        }
        for (std::size_t i = m; i-- > 0;) {
            double sum = b.at(i, c);
            for (std::size_t k = i + 1; k < m; ++k) sum -= a.at(k, i) * b.at(k, c);
            b.at(i, c) = sum / a.at(i, i);
        }
    }
}

std::vector<long long> sorted_classes(const std::vector<long long>& y) {
    std::set<long long> classes(y.begin(), y.end());
    return std::vector<long long>(classes.begin(), classes.end());
}

double centroid_accuracy(const LabeledFeatures& train, const LabeledFeatures& test) {
    const std::vector<long long> classes = sorted_classes(train.y);
    const std::size_t d = train.x.cols();
    Matrix centroids(classes.size(), d, 0.0);
    std::vector<std::size_t> counts(classes.size(), 0);
    for (std::size_t i = 0; i < train.y.size(); ++i) {
        const std::size_t c = static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), train.y[i]) -
            classes.begin());
        ++counts[c];
        const auto row = train.x.row(i);
        for (std::size_t k = 0; k < d; ++k) centroids.at(c, k) += row[k];
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
        for (std::size_t k = 0; k < d; ++k) {
            centroids.at(c, k) /= static_cast<double>(counts[c]);
        }
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.y.size(); ++i) {
        const auto row = test.x.row(i);
        double best = 0.0;
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            double dist = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = row[k] - centroids.at(c, k);
                dist += diff * diff;
            }
            if (c == 0 || dist < best) {
                best = dist;
                best_c = c;
            }
        }
        if (classes[best_c] == test.y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.y.size());
}

double ridge_accuracy(const LabeledFeatures& train, const LabeledFeatures& test,
                      double lambda) {
    const std::vector<long long> classes = sorted_classes(train.y);
    const std::size_t n = train.x.rows();
    const std::size_t d = train.x.cols();
    const std::size_t c_count = classes.size();

    // Center features and one-hot targets with train statistics.
    std::vector<double> x_mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = train.x.row(i);
        for (std::size_t k = 0; k < d; ++k) x_mean[k] += row[k];
    }
    for (double& m : x_mean) m /= static_cast<double>(n);

    Matrix xc(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto src = train.x.row(i);
        auto dst = xc.row(i);
        for (std::size_t k = 0; k < d; ++k) dst[k] = src[k] - x_mean[k];
    }
    Matrix yc(n, c_count, 0.0);
    std::vector<double> y_mean(c_count, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), train.y[i]) -
            classes.begin());
        yc.at(i, c) = 1.0;
        y_mean[c] += 1.0;
    }
    for (double& m : y_mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < c_count; ++c) yc.at(i, c) -= y_mean[c];
    }

    // Primal when D <= N, dual otherwise; both are direct normal-equation
    // solves with an SPD system for lambda > 0.
    Matrix weights;  // d x c
    if (d <= n) {
        Matrix gram(d, d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = xc.row(i);
            for (std::size_t a = 0; a < d; ++a) {
                const double va = row[a];
                if (va == 0.0) continue;
                for (std::size_t b = a; b < d; ++b) gram.at(a, b) += va * row[b];
            }
        }
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < a; ++b) gram.at(a, b) = gram.at(b, a);
            gram.at(a, a) += lambda;
        }
        Matrix rhs(d, c_count, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = xc.row(i);
            for (std::size_t a = 0; a < d; ++a) {
                if (row[a] == 0.0) continue;
                for (std::size_t c = 0; c < c_count; ++c) {
                    rhs.at(a, c) += row[a] * yc.at(i, c);
                }
            }
        }
        cholesky_solve(gram, rhs);
        weights = std::move(rhs);
    } else {
        Matrix k(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ri = xc.row(i);
            for (std::size_t j = i; j < n; ++j) {
                const auto rj = xc.row(j);
                double dot = 0.0;
                for (std::size_t a = 0; a < d; ++a) dot += ri[a] * rj[a];
                k.at(i, j) = dot;
                k.at(j, i) = dot;
            }
            k.at(i, i) += lambda;
        }
        Matrix alpha = yc;
        cholesky_solve(k, alpha);
        weights = Matrix(d, c_count, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = xc.row(i);
            for (std::size_t a = 0; a < d; ++a) {
                if (row[a] == 0.0) continue;
                for (std::size_t c = 0; c < c_count; ++c) {
                    weights.at(a, c) += row[a] * alpha.at(i, c);
                }
            }
        }
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.y.size(); ++i) {
        const auto row = test.x.row(i);
        double best = 0.0;
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < c_count; ++c) {
            double score = y_mean[c];
            for (std::size_t a = 0; a < d; ++a) {
                score += (row[a] - x_mean[a]) * weights.at(a, c);
            }
            if (c == 0 || score > best) {
                best = score;
                best_c = c;
            }
        }
        if (classes[best_c] == test.y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.y.size());
}

}  // namespace

LabeledFeatures featurize_graphs(std::span<const BrainGraph> graphs, FeatureMap map) {
    if (graphs.empty()) throw ValidationError("no graphs to featurize");
    const std::size_t n = graphs.front().n;
    const std::size_t views = graphs.front().node_features.view_count();

    LabeledFeatures out;
    out.y.reserve(graphs.size());
    const std::size_t upper = n * (n - 1) / 2;
    const std::size_t d =
        map == FeatureMap::UpperTriangleFlatten ? views * upper : views * n;
    out.x = Matrix(graphs.size(), d);

    for (std::size_t g = 0; g < graphs.size(); ++g) {
        const BrainGraph& graph = graphs[g];
        if (graph.n != n || graph.node_features.view_count() != views) {
            throw ShapeMismatchError("graph " + graph.subject_id +
                                     " differs in shape from the first graph");
        }
        if (!graph.label) {
            throw ValidationError("graph " + graph.subject_id + " has no label");
        }
        out.y.push_back(*graph.label);
        auto dst = out.x.row(g);
        const Matrix& x = graph.node_features.values;
        std::size_t cursor = 0;
        if (map == FeatureMap::UpperTriangleFlatten) {
            for (std::size_t v = 0; v < views; ++v) {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = i + 1; j < n; ++j) {
                        dst[cursor++] = x.at(i, v * n + j);
                    }
                }
            }
        } else {
            for (std::size_t v = 0; v < views; ++v) {
                for (std::size_t j = 0; j < n; ++j) {
                    double sum = 0.0;
                    for (std::size_t i = 0; i < n; ++i) sum += x.at(i, v * n + j);
                    dst[cursor++] = sum / static_cast<double>(n);
                }
            }
        }
    }
    return out;
}

double fit_predict(const SurrogateModel& model, const LabeledFeatures& train,
                   const LabeledFeatures& test, std::vector<std::string>* warnings) {
    if (train.x.rows() != train.y.size() || test.x.rows() != test.y.size()) {
        throw ShapeMismatchError("feature/label row counts differ");
    }
    if (train.y.empty() || test.y.empty()) {
        throw ValidationError("empty train or test set");
    }
    if (sorted_classes(train.y).size() < 2) {
        throw ValidationError("training set needs at least 2 classes");
    }
    for (double v : train.x.data()) {
        if (!std::isfinite(v)) throw ValidationError("non-finite training feature");
    }

    if (model.kind == SurrogateKind::NearestCentroid) {
        return centroid_accuracy(train, test);
    }
    try {
        return ridge_accuracy(train, test, model.lambda);
    } catch (const SingularSystem&) {
        if (warnings) {
            warnings->push_back(
                "ridge system singular; fell back to nearest centroid");
        }
        return centroid_accuracy(train, test);
    }
}

ConfigAccuracy evaluate_config(const std::string& config_name,
                               std::span<const BrainGraph> graphs,
                               const EvalOptions& options) {
    if (options.splits == 0) throw ValidationError("splits must be >= 1");
    const LabeledFeatures all = featurize_graphs(graphs, options.model.feature_map);

    ConfigAccuracy result;
    result.config = config_name;
    result.per_split.reserve(options.splits);

    for (std::size_t s = 0; s < options.splits; ++s) {
        const std::vector<int> assignment =
            stratified_split(all.y, options.proportions, options.seed + s);
        std::vector<std::size_t> train_rows;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            if (assignment[i] == 0) train_rows.push_back(i);
            if (assignment[i] == 1) test_rows.push_back(i);
        }
        auto take = [&](const std::vector<std::size_t>& rows) {
            LabeledFeatures subset;
            subset.x = Matrix(rows.size(), all.x.cols());
            subset.y.reserve(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const auto src = all.x.row(rows[r]);
                std::copy(src.begin(), src.end(), subset.x.row(r).begin());
                subset.y.push_back(all.y[rows[r]]);
            }
            return subset;
        };
        const double accuracy = fit_predict(options.model, take(train_rows),
                                            take(test_rows), &result.warnings);
        result.per_split.push_back(accuracy);
    }

    double sum = 0.0;
    for (double a : result.per_split) sum += a;
    result.mean_accuracy = sum / static_cast<double>(result.per_split.size());
    double sq = 0.0;
    for (double a : result.per_split) {
        const double d = a - result.mean_accuracy;
        sq += d * d;
    }
    result.std_accuracy =
        std::sqrt(sq / static_cast<double>(result.per_split.size()));
    return result;
}

std::vector<RankingEntry> rank_configs(const AccuracyTable& table) {
    if (table.values.rows() != table.configs.size() ||
        table.values.cols() != table.settings.size()) {
        throw ShapeMismatchError("accuracy table dimensions");
    }
    if (table.configs.empty() || table.settings.empty()) {
        throw ValidationError("empty accuracy table");
    }

    std::vector<RankingEntry> entries(table.configs.size());
    for (std::size_t c = 0; c < table.configs.size(); ++c) {
        entries[c].config = table.configs[c];
        entries[c].per_setting_rank.resize(table.settings.size());
    }

    for (std::size_t s = 0; s < table.settings.size(); ++s) {
        // Competition ranks with ties sharing the average rank; rank 1 is
        // the highest accuracy.
        std::vector<std::size_t> order(table.configs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return table.values.at(a, s) > table.values.at(b, s);
                         });
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() &&
                   table.values.at(order[j + 1], s) ==
                       table.values.at(order[i], s)) {
                ++j;
            }
            const double rank =
                (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) {
                entries[order[k]].per_setting_rank[s] = rank;
            }
            i = j + 1;
        }
    }
    for (RankingEntry& entry : entries) {
        double sum = 0.0;
        for (double r : entry.per_setting_rank) sum += r;
        entry.average_rank = sum / static_cast<double>(entry.per_setting_rank.size());
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RankingEntry& a, const RankingEntry& b) {
                         return a.average_rank < b.average_rank;
                     });
    return entries;
}

double outperformance_rate(std::span<const double> config_acc,
                           std::span<const double> baseline_acc) {
    if (config_acc.size() != baseline_acc.size()) {
        throw MisalignedSettingsError(std::to_string(config_acc.size()) + " vs " +
                                      std::to_string(baseline_acc.size()) +
                                      " settings");
    }
    if (config_acc.empty()) {
        throw MisalignedSettingsError("no settings");
    }
    std::size_t wins = 0;
    for (std::size_t i = 0; i < config_acc.size(); ++i) {
        if (config_acc[i] > baseline_acc[i]) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(config_acc.size());
}

namespace {

std::string fixed(double v, int precision) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(precision);
    ss << v;
    return ss.str();
}

}  // namespace

std::string render_ranking_table(const AccuracyTable& table) {
    const std::vector<RankingEntry> ranking = rank_configs(table);
    std::ostringstream out;
    out << "== " << kSurrogateMarker << " ==\n";
    out << "Average accuracy ranking (lower is better)\n\n";

    std::size_t width = 12;
    for (const auto& entry : ranking) width = std::max(width, entry.config.size() + 2);
    out << std::string(width, ' ');
    for (const std::string& setting : table.settings) out << "  " << setting;
    out << "  avg_rank\n";
    for (const RankingEntry& entry : ranking) {
        out << entry.config << std::string(width - entry.config.size(), ' ');
        for (std::size_t s = 0; s < table.settings.size(); ++s) {
            out << "  " << std::string(table.settings[s].size() > 4
                                           ? table.settings[s].size() - 4
                                           : 0,
                                       ' ')
                << fixed(entry.per_setting_rank[s], 1);
        }
        out << "  " << fixed(entry.average_rank, 2) << "\n";
    }
    return out.str();
}

std::string render_outperformance(const AccuracyTable& table,
                                  const std::string& baseline_config) {
    const auto it =
        std::find(table.configs.begin(), table.configs.end(), baseline_config);
    if (it == table.configs.end()) {
        throw ValidationError("baseline config '" + baseline_config +
                              "' not in table");
    }
    const std::size_t baseline = static_cast<std::size_t>(it - table.configs.begin());
    std::vector<double> baseline_acc(table.settings.size());
    for (std::size_t s = 0; s < table.settings.size(); ++s) {
        baseline_acc[s] = table.values.at(baseline, s);
    }

    std::ostringstream out;
    out << "== " << kSurrogateMarker << " ==\n";
    out << "Outperformance rate vs '" << baseline_config << "' across "
        << table.settings.size() << " setting(s)\n\n";
    for (std::size_t c = 0; c < table.configs.size(); ++c) {
        if (c == baseline) continue;
        std::vector<double> acc(table.settings.size());
        for (std::size_t s = 0; s < table.settings.size(); ++s) {
            acc[s] = table.values.at(c, s);
        }
        out << table.configs[c] << ": "
            << fixed(outperformance_rate(acc, baseline_acc), 3) << "\n";
    }
    return out.str();
}

}  // namespace braingraph
