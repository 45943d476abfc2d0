#ifndef SEPFLOW_ERRORS_HPP
#define SEPFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sepflow {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A point was passed to a system living on a different manifold.
struct DomainMismatchError : Error {
    using Error::Error;
};

/// Malformed inputs: non-finite times, wrong vector lengths, invalid specs.
struct InvalidArgumentError : Error {
    using Error::Error;
};

/// Constant calibration could not certify the requested conditions.
struct CalibrationError : Error {
    using Error::Error;
};

/// The section-time iteration left its certified bracket.
struct SolverDivergenceError : Error {
    using Error::Error;
};

/// An iteration hit its step cap without reaching tolerance.
struct SolverStallError : Error {
    using Error::Error;
};

/// A certified numerical bound was violated at an audited sample.
struct BoundViolationError : Error {
    using Error::Error;
};

/// No orbit-window boundary crossing was found inside the allowed interval.
struct WindowNotFoundError : Error {
    using Error::Error;
};

/// Cocycle recovery could not match the target point on the local orbit arc.
struct NoMatchError : Error {
    using Error::Error;
};

/// The normal component of a flowbox inversion exceeded its threshold.
struct OffOrbitError : Error {
    using Error::Error;
};

/// Flowbox inversion did not converge inside the chart.
struct OutsideChartError : Error {
    using Error::Error;
};

/// Orbit basis vectors are linearly dependent.
struct DegenerateBasisError : Error {
    using Error::Error;
};

/// A scenario config failed schema validation.
struct SchemaError : Error {
    using Error::Error;
};

} // namespace sepflow

#endif
