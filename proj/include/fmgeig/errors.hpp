#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmgeig {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Malformed mesh or matrix text. `line()` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A coefficient produced a non-finite value while assembling a triangle.
class AssemblyError : public Error {
public:
    AssemblyError(std::size_t triangle, const std::string& what)
        : Error("triangle " + std::to_string(triangle) + ": " + what), triangle_(triangle) {}

    std::size_t triangle() const noexcept { return triangle_; }

private:
    std::size_t triangle_;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// Rank filtering of the augmented space left fewer columns than requested eigenpairs.
class DegenerateAugmentation : public SolverError {
public:
    using SolverError::SolverError;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Projected problem size exceeds the configured cap.
class SizingError : public Error {
public:
    using Error::Error;
};

} // namespace fmgeig
