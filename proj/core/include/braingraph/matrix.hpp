#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "braingraph/error.hpp"

namespace braingraph {

// Dense row-major matrix of doubles. Used for FC matrices and feature
// blocks; kept deliberately minimal.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) {
        return std::span<double>(data_.data() + r * cols_, cols_);
    }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_.data() + r * cols_, cols_);
    }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// T x n ROI time-series matrix. Stored ROI-major so each ROI's series is
// contiguous; at(t, r) follows the T x n orientation of the source table.
class BoldMatrix {
public:
    BoldMatrix() = default;
    BoldMatrix(std::size_t t_count, std::size_t roi_count)
        : t_count_(t_count), roi_count_(roi_count),
          data_(t_count * roi_count, 0.0) {}

    std::size_t t_count() const noexcept { return t_count_; }
    std::size_t roi_count() const noexcept { return roi_count_; }

    double& at(std::size_t t, std::size_t roi) {
        return data_[roi * t_count_ + t];
    }
    double at(std::size_t t, std::size_t roi) const {
        return data_[roi * t_count_ + t];
    }

    std::span<const double> roi(std::size_t r) const {
        return std::span<const double>(data_.data() + r * t_count_, t_count_);
    }
    std::span<double> roi(std::size_t r) {
        return std::span<double>(data_.data() + r * t_count_, t_count_);
    }

    std::vector<std::string>& roi_labels() noexcept { return roi_labels_; }
    const std::vector<std::string>& roi_labels() const noexcept {
        return roi_labels_;
    }

    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const BoldMatrix& other) const = default;

    // Shape and finiteness checks shared by ingestion and the pipeline.
    void validate() const;

private:
    std::size_t t_count_ = 0;
    std::size_t roi_count_ = 0;
    std::vector<double> data_;  // roi-major: data_[roi * T + t]
    std::vector<std::string> roi_labels_;
};

}  // namespace braingraph
