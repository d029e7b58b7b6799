#pragma once

#include <stdexcept>
#include <string>

namespace torpsido {

// Precondition / shape / config violations. CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical contract failed at runtime (singular resolvent block, oracle
// residual above tolerance, failed ellipticity gate). CLI maps to exit code 3.
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace torpsido
