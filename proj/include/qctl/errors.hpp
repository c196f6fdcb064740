#pragma once

#include <stdexcept>
#include <string>

namespace qctl {

// Target purity/radius cannot be reached in finite time (mu1 = 1 from a mixed state).
struct NoFiniteTime : std::domain_error {
    explicit NoFiniteTime(const std::string& what) : std::domain_error(what) {}
};

// The u <-> v control substitution is singular (R = 0).
struct DegenerateSubstitution : std::domain_error {
    explicit DegenerateSubstitution(const std::string& what) : std::domain_error(what) {}
};

// The Pontryagin function has no unique maximizer (R = q = 0).
struct DegenerateCovector : std::domain_error {
    explicit DegenerateCovector(const std::string& what) : std::domain_error(what) {}
};

// Target violates the upper-bound feasibility condition of the protocol.
struct InfeasibleTarget : std::domain_error {
    explicit InfeasibleTarget(const std::string& what) : std::domain_error(what) {}
};

// Adaptive integration failed (step underflow, invariant violation, step budget).
struct IntegrationError : std::runtime_error {
    explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

// Control reconstruction is structurally impossible (interior R = 0, or a
// non-removable endpoint singularity).
struct ReconstructionError : std::runtime_error {
    explicit ReconstructionError(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration (CLI / JSON inputs).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qctl
