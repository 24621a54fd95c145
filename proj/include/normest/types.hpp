#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace normest {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad dimension, out-of-range parameter).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed CSV / JSON / norm string. The message names the offending row or field.
class ParseError : public Error {
public:
    using Error::Error;
};

/// N observations in d dimensions, one observation per row. Entries are finite.
class SampleMatrix {
public:
    SampleMatrix() = default;
    explicit SampleMatrix(RowMatrix data) : data_(std::move(data)) {
        if (data_.rows() < 1 || data_.cols() < 1) {
            throw InvalidArgument("sample matrix must have N >= 1 and d >= 1");
        }
        if (!data_.allFinite()) {
            throw InvalidArgument("sample matrix contains non-finite entries");
        }
    }

    Index size() const { return data_.rows(); }
    Index dim() const { return data_.cols(); }
    const RowMatrix& data() const { return data_; }
    auto row(Index i) const { return data_.row(i); }

private:
    RowMatrix data_;
};

}  // namespace normest
