#pragma once

#include <random>
#include <vector>

#include "braingraph/signal.hpp"

namespace benchsupport {

inline std::vector<double> gaussian_series(std::size_t t, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> out(t);
    for (double& v : out) v = dist(rng);
    return out;
}

inline braingraph::NormalizedMatrix gaussian_matrix(std::size_t t, std::size_t n,
                                                    unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    braingraph::NormalizedMatrix z;
    z.values = braingraph::BoldMatrix(t, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < t; ++i) z.values.at(i, r) = dist(rng);
    }
    z.per_roi_mean.assign(n, 0.0);
    z.per_roi_std.assign(n, 1.0);
    return z;
}

}  // namespace benchsupport
