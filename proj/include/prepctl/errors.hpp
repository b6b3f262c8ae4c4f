#pragma once

#include <stdexcept>
#include <string>

namespace prepctl {

// Base class for every error the library throws deliberately. The CLI maps
// these to exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Total population reached zero where a per-capita rate needs N > 0.
class DegeneratePopulationError : public Error {
public:
    explicit DegeneratePopulationError(const std::string& msg = "total population is zero")
        : Error(msg) {}
};

// An operation was called outside its declared parameter regime
// (e.g. a mass-action RHS with d != 0).
class InvalidConfigurationError : public Error {
public:
    explicit InvalidConfigurationError(const std::string& msg) : Error(msg) {}
};

// An endemic steady state was requested where none exists (reproduction
// threshold not exceeded or PrEP-adjusted threshold not exceeded).
class NoEndemicEquilibriumError : public Error {
public:
    explicit NoEndemicEquilibriumError(const std::string& msg) : Error(msg) {}
};

// The integrator met a non-finite or strongly negative state.
class DivergenceError : public Error {
public:
    DivergenceError(double t, const std::string& what_happened)
        : Error("integration diverged at t = " + std::to_string(t) + ": " + what_happened),
          time(t) {}
    double time;
};

// Malformed input file; row is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(const std::string& path, int row, const std::string& msg)
        : Error(path + ":" + std::to_string(row) + ": " + msg), line(row) {}
    int line;
};

// Bad command-line usage; the CLI maps this to exit code 2.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

// The recovered constraint multiplier has the wrong sign, indicating an
// inconsistent sweep state.
class MultiplierSignError : public Error {
public:
    explicit MultiplierSignError(double value)
        : Error("constraint multiplier sign inconsistency: nu = " + std::to_string(value)),
          nu(value) {}
    double nu;
};

}  // namespace prepctl
