#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qcav {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when no real control solution exists. Carries the signed
// feasibility profile for diagnosis.
struct InfeasibleError : std::runtime_error {
    std::vector<double> profile;
    InfeasibleError(const std::string& what, std::vector<double> p = {})
        : std::runtime_error(what), profile(std::move(p)) {}
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qcav
