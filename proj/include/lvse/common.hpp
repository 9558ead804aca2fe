#ifndef LVSE_COMMON_HPP
#define LVSE_COMMON_HPP

#include <stdexcept>
#include <string>

namespace lvse {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (CSV schema, topology invariants, config).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Numerical solver failure (power flow divergence, singular gain matrix).
class SolverError : public Error {
public:
    explicit SolverError(const std::string& msg) : Error(msg) {}
};

// Measurement set too small to determine the state.
class ObservabilityError : public Error {
public:
    explicit ObservabilityError(const std::string& msg) : Error(msg) {}
};

using BusId = std::string;
using LineId = std::string;
using CabinetId = std::string;
using ProsumerId = std::string;
using ProfileId = std::string;

} // namespace lvse

#endif
