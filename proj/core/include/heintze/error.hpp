#pragma once

#include <stdexcept>
#include <string>

namespace heintze {

// Failure categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
    usage = 1,       // bad input, parse failure, invalid arguments
    hypothesis = 2,  // eigenvalue with non-positive real part
    solver = 4,      // root search, eigensolver or conditioning failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::usage, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

/// |t|·||A|| beyond the configured overflow guard of the matrix exponential.
struct RangeError : Error {
    explicit RangeError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

struct HypothesisError : Error {
    explicit HypothesisError(const std::string& what) : Error(ErrorKind::hypothesis, what) {}
};

struct SolverError : Error {
    explicit SolverError(const std::string& what) : Error(ErrorKind::solver, what) {}
};

/// Rank sequence of a cluster is inconsistent at the requested tolerance.
struct ConditioningError : Error {
    explicit ConditioningError(const std::string& what) : Error(ErrorKind::solver, what) {}
};

/// Packing would exceed the cell cap.
struct CapExceeded : Error {
    CapExceeded(const std::string& what, double estimate)
        : Error(ErrorKind::usage, what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

}  // namespace heintze
