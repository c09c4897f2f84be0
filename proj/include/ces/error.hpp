#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ces {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input data (CSV, SCMT, AIDM files). CLI exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t row, std::size_t column, const std::string& what)
        : DataError("parse error at row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
          row_(row),
          column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class AllMissingColumn : public DataError {
public:
    explicit AllMissingColumn(std::size_t column)
        : DataError("column " + std::to_string(column) + " has no observed values"), column_(column) {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

// CAIL errors

class UnknownSymbol : public DataError {
public:
    explicit UnknownSymbol(std::string id)
        : DataError("symbol '" + id + "' is not in the code mapping table"), id_(std::move(id)) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class StructureError : public DataError {
public:
    /// `position` is the zero-based token index where the violation was detected.
    StructureError(std::size_t position, const std::string& what)
        : DataError("structure error at token " + std::to_string(position) + ": " + what), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class EmptyGraph : public Error {
public:
    using Error::Error;
};

// Independency errors

class EmptyCell : public Error {
public:
    EmptyCell() : Error("cannot compare an empty cell") {}
};

class DuplicateAlgorithmId : public Error {
public:
    explicit DuplicateAlgorithmId(const std::string& id) : Error("duplicate algorithm id '" + id + "'") {}
};

class UnknownAlgorithm : public Error {
public:
    explicit UnknownAlgorithm(const std::string& id) : Error("unknown algorithm id '" + id + "'") {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Clustering / consensus errors

class InvalidK : public Error {
public:
    using Error::Error;
};

class DegenerateSpectrum : public Error {
public:
    using Error::Error;
};

class EmptyCommittee : public Error {
public:
    EmptyCommittee() : Error("committee is empty") {}
};

class WeightMismatch : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

/// Fewer than two partitions were admitted. CLI exit code 3.
class CommitteeTooSmall : public Error {
public:
    explicit CommitteeTooSmall(std::size_t size)
        : Error("committee has " + std::to_string(size) + " member(s); at least 2 are required"), size_(size) {}

    std::size_t size() const noexcept { return size_; }

private:
    std::size_t size_;
};

}  // namespace ces
