#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace braingraph {

// Error taxonomy maps onto CLI exit codes: validation -> 1, partial
// pipeline failure -> 2, I/O -> 3.
enum class ErrorCategory { Validation, PartialFailure, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string message)
        : std::runtime_error(std::move(message)), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::string message)
        : Error(ErrorCategory::Validation, std::move(message)) {}
};

class IoError : public Error {
public:
    explicit IoError(std::string message)
        : Error(ErrorCategory::Io, std::move(message)) {}
};

class PartialFailureError : public Error {
public:
    explicit PartialFailureError(std::string message)
        : Error(ErrorCategory::PartialFailure, std::move(message)) {}
};

// ROI column has zero variance; z-scoring is undefined.
class ConstantSignalError : public ValidationError {
public:
    explicit ConstantSignalError(std::size_t roi)
        : ValidationError("constant signal in ROI " + std::to_string(roi) +
                          " (zero variance)"),
          roi_(roi) {}
    std::size_t roi() const noexcept { return roi_; }

private:
    std::size_t roi_;
};

// Retention left fewer than 3 samples in some ROI.
class DegenerateRetentionError : public ValidationError {
public:
    DegenerateRetentionError(std::size_t roi, std::size_t retained)
        : ValidationError("retention left only " + std::to_string(retained) +
                          " samples in ROI " + std::to_string(roi) +
                          " (need >= 3)"),
          roi_(roi), retained_(retained) {}
    std::size_t roi() const noexcept { return roi_; }
    std::size_t retained() const noexcept { return retained_; }

private:
    std::size_t roi_;
    std::size_t retained_;
};

class ZeroVarianceError : public ValidationError {
public:
    explicit ZeroVarianceError(std::string context)
        : ValidationError("zero variance: " + std::move(context)) {}
};

class LagTooLargeError : public ValidationError {
public:
    LagTooLargeError(long long lag, std::size_t t_count)
        : ValidationError("lag " + std::to_string(lag) + " too large for T=" +
                          std::to_string(t_count) + " (need |lag| <= T-3)") {}
};

class ShapeMismatchError : public ValidationError {
public:
    explicit ShapeMismatchError(std::string message)
        : ValidationError("shape mismatch: " + std::move(message)) {}
};

class NoPositiveEdgesError : public ValidationError {
public:
    NoPositiveEdgesError()
        : ValidationError("FC matrix has no positive off-diagonal entry") {}
};

class MissingPearsonViewError : public ValidationError {
public:
    MissingPearsonViewError()
        : ValidationError("edge featurization requires a Pearson view") {}
};

class MisalignedSettingsError : public ValidationError {
public:
    explicit MisalignedSettingsError(std::string message)
        : ValidationError("misaligned settings: " + std::move(message)) {}
};

class ClassTooSmallError : public ValidationError {
public:
    ClassTooSmallError(long long label, std::size_t count, std::size_t splits)
        : ValidationError("class " + std::to_string(label) + " has " +
                          std::to_string(count) +
                          " subjects, cannot populate " +
                          std::to_string(splits) + " non-empty splits") {}
};

class ParseError : public ValidationError {
public:
    ParseError(std::string path, std::size_t line, std::size_t column,
               std::string what)
        : ValidationError(std::move(path) + ":" + std::to_string(line) + ":" +
                          std::to_string(column) + ": " + std::move(what)),
          line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class NonFiniteError : public ValidationError {
public:
    NonFiniteError(std::string path, std::size_t row, std::size_t column)
        : ValidationError("non-finite value at " + std::move(path) + " row " +
                          std::to_string(row) + ", column " +
                          std::to_string(column)),
          row_(row), column_(column) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

}  // namespace braingraph
