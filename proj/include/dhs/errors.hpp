#pragma once
#include <stdexcept>
#include <string>

namespace dhs {

// Error taxonomy; the CLI maps these to exit codes (config/input -> 2, solver -> 3).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// mismatched or unsupported dimensions (ambient vs intrinsic, degree out of range)
struct DimensionError : Error { using Error::Error; };

// non-manifold, open, or inconsistently oriented cell complexes
struct TopologyError : Error { using Error::Error; };

// degenerate elements, failed curvature fits, non-positive measures
struct GeometryError : Error { using Error::Error; };

// operation not available for this backend kind / degree combination
struct CapabilityError : Error { using Error::Error; };

// eigensolver failed to reach the requested tolerance
struct SolverError : Error { using Error::Error; };

// malformed arguments, unreadable files, infeasible coefficient data
struct InputError : Error { using Error::Error; };

// an exact operator identity failed beyond its verification tolerance
struct IdentityError : Error { using Error::Error; };

} // namespace dhs
