#pragma once

#include <stdexcept>
#include <string>

namespace excitasim {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed configuration input (bad JSON, wrong types).
struct ParseError : Error {
    using Error::Error;
};

/// A type invariant was violated; the message names the first failed check.
struct ValidationError : Error {
    using Error::Error;
};

/// Base for runtime failures of the numerical machinery.
struct SimulationError : Error {
    using Error::Error;
};

/// The 4x4 stator/network system is numerically singular.
struct SingularNetwork : SimulationError {
    SingularNetwork() : SimulationError("stator/network system is singular") {}
};

/// g1^2 + b1^2 too small for the voltage-form network equations.
struct DegenerateOwnAdmittance : SimulationError {
    DegenerateOwnAdmittance()
        : SimulationError("own admittance magnitude too small to invert network equations") {}
};

/// Newton iteration failed to reach the residual tolerance.
struct NoConvergence : SimulationError {
    using SimulationError::SimulationError;
};

/// Newton Jacobian produced a non-finite step.
struct SingularJacobian : SimulationError {
    SingularJacobian() : SimulationError("equilibrium Jacobian is singular") {}
};

/// Rotor angle left (-pi, pi) during a closed-loop run.
struct LossOfSynchronism : SimulationError {
    explicit LossOfSynchronism(double t)
        : SimulationError("loss of synchronism at t=" + std::to_string(t) + " s") {}
};

/// A state magnitude exceeded the runaway threshold.
struct Unstable : SimulationError {
    explicit Unstable(double t)
        : SimulationError("state runaway at t=" + std::to_string(t) + " s") {}
};

/// All rule activations were zero (rule-table hole).
struct ZeroActivation : SimulationError {
    ZeroActivation() : SimulationError("no fuzzy rule fired") {}
};

/// Metrics window contains no samples.
struct EmptyWindow : Error {
    EmptyWindow() : Error("metrics window contains no samples") {}
};

} // namespace excitasim
