#pragma once

#include <stdexcept>
#include <string>

namespace gkdv {

// Base class for all domain-level failures. Everything carries a plain
// message; callers that need to distinguish catch the concrete type.
struct GkdvError : std::runtime_error {
    explicit GkdvError(const std::string& msg) : std::runtime_error(msg) {}
};

// soliton_profile
struct NoSolitaryWave : GkdvError {
    using GkdvError::GkdvError;
};
struct QuadratureFailure : GkdvError {
    using GkdvError::GkdvError;
};

// linearized_operator
struct GridMismatch : GkdvError {
    using GkdvError::GkdvError;
};
struct NotOrthogonal : GkdvError {
    using GkdvError::GkdvError;
};
struct SingularSolve : GkdvError {
    using GkdvError::GkdvError;
};
struct NonNegativeGroundState : GkdvError {
    using GkdvError::GkdvError;
};

// omega_solver
struct Degenerate : GkdvError {
    using GkdvError::GkdvError;
};

// approx_solution
struct WindowExceeded : GkdvError {
    using GkdvError::GkdvError;
};
struct DerivativeMismatch : GkdvError {
    using GkdvError::GkdvError;
};

// pde_integrator
struct BlowupDetected : GkdvError {
    using GkdvError::GkdvError;
};

// collision_lab
struct FitDiverged : GkdvError {
    using GkdvError::GkdvError;
};
struct Overlapping : GkdvError {
    using GkdvError::GkdvError;
};
struct WindowContaminated : GkdvError {
    using GkdvError::GkdvError;
};

// experiment_cli
struct ConfigError : GkdvError {
    using GkdvError::GkdvError;
};
struct DegenerateFit : GkdvError {
    using GkdvError::GkdvError;
};

} // namespace gkdv
