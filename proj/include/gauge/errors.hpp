#pragma once

#include <stdexcept>
#include <string>

namespace gauge {

// Malformed arguments: dimension mismatches, bad site lists, invalid configs.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Request exceeds a hard size cap (e.g. full Hamiltonian above L = 12).
class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A fit or detection procedure could not produce a result from its inputs.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The frame integrator lost unitarity beyond what re-unitarization can repair.
class IntegrationInstability : public std::runtime_error {
public:
    explicit IntegrationInstability(const std::string& what, double t = -1.0, int patch = -1)
        : std::runtime_error(what), t_(t), patch_(patch) {}

    double time() const noexcept { return t_; }
    int patch() const noexcept { return patch_; }

private:
    double t_;
    int patch_;
};

}  // namespace gauge
