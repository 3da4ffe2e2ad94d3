#pragma once

#include <stdexcept>
#include <string>

namespace trace {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Which part of a step had (near) zero length.
enum class DegenerateCause {
    NoMove,           // x_{t+1} == x_t
    NoDesiredChange,  // target == x_t
    ZeroDirection,    // projection direction has zero length
    CoincidentPoints, // projected point coincides with the line origin
};

class DegenerateGeometry : public Error {
public:
    DegenerateGeometry(DegenerateCause cause, const std::string& what)
        : Error(what), cause_(cause) {}

    DegenerateCause cause() const noexcept { return cause_; }

private:
    DegenerateCause cause_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class TargetError : public Error {
public:
    using Error::Error;
};

class TrajectoryError : public Error {
public:
    using Error::Error;
};

class CorpusError : public Error {
public:
    using Error::Error;
};

class ImputeError : public Error {
public:
    using Error::Error;
};

class AggregateError : public Error {
public:
    using Error::Error;
};

class StatsError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. The message names the offending row/column.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace trace
