#pragma once

#include <stdexcept>
#include <string>

namespace vbsim {

/// Base class for every failure raised by the library. The message starts
/// with a short stable tag ("empty domain", "reaction solver diverged", ...)
/// that callers and tests may match on.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class AnalysisError : public Error {
public:
    using Error::Error;
};

} // namespace vbsim
