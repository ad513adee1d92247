#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdid {

// Root of every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class StructuralError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class IslandError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class ObservabilityError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class ContractError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Raised by run_sced. Carries the external ordinals of the branch limits that
// block a feasible dispatch, or flags a plain capacity shortfall.
class DispatchError : public Error {
public:
    DispatchError(const std::string& what, std::vector<std::size_t> binding, bool capacity_shortfall)
        : Error(what), binding_(std::move(binding)), capacity_shortfall_(capacity_shortfall) {}
    const std::vector<std::size_t>& binding_branches() const noexcept { return binding_; }
    bool capacity_shortfall() const noexcept { return capacity_shortfall_; }

private:
    std::vector<std::size_t> binding_;
    bool capacity_shortfall_;
};

}  // namespace fdid
