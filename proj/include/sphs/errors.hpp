#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sphs {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-manifold connectivity, duplicate cells, bad vertex indices.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Inconsistent or clockwise top-cell orientation.
class OrientationError : public Error {
public:
    using Error::Error;
};

/// Degenerate simplices and other metric failures.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Raised when a degree, carrier or (p, q) pair does not fit the operation.
class DegreeError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Circumcentric duals need every simplex to contain its circumcenter.
class WellCenteredError : public GeometryError {
public:
    WellCenteredError(std::string what, std::vector<std::pair<int, int>> violators)
        : GeometryError(std::move(what))
        , violators_(std::move(violators))
    {
    }

    /// (dimension, simplex index) of every offending simplex.
    const std::vector<std::pair<int, int>>& violators() const noexcept { return violators_; }

private:
    std::vector<std::pair<int, int>> violators_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed input text. `line()` is 1-based, 0 when the error is not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what)
        , line_(line)
    {
    }

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace sphs
