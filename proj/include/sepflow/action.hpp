#ifndef SEPFLOW_ACTION_HPP
#define SEPFLOW_ACTION_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sepflow/system.hpp"

namespace sepflow {

/// Threshold on the normal component separating "on orbit" from "off orbit"
/// in flowbox inversions.
inline constexpr double kTolNormal = 1e-8;
/// Certified bounds on the flowbox derivative singular values.
inline constexpr double kFlowboxLowerBound = 1.0 / 3.0;
inline constexpr double kFlowboxUpperBound = 3.0;

/// Local flowbox chart at a center x:
///   F_x(zeta + a_1 X_1(x) + ... + a_d X_d(x)) = Phi((a_1..a_d), exp_x(zeta))
/// with zeta in the orthogonal complement N_x of the orbit tangent space.
/// On flat tori exp_x is coordinate translation.
struct FlowboxChart {
    SystemSpec sys;
    ChartPoint center;
    double r0 = 0;
    std::vector<TangentVector> orbit_basis;  // X_1(x)..X_d(x)
    std::vector<TangentVector> normal_basis; // orthonormal, spans N_x
    double mu = 0;    // orbit-coordinate uniqueness window, < epsilon0/3
    double a = 0;     // recovery window; set by the recovery pipeline
    double delta = 0; // ball radius certified to land inside F_x(T_xM(r0))
    Mat frame;        // dim x dim, columns [normal_basis | orbit_basis]
    Mat frame_inverse;
};

struct MatrixSample {
    ChartPoint x;
    Mat A; // d x d
    double residual = 0;
};

/// Sampled matrix reparameterization field A with audit maxima.
struct MatrixField {
    double a = 0;
    std::vector<MatrixSample> samples;
    double invariance_residual_max = 0;
    double quasitrivial_residual_max = 0;
    double basis_check_residual_max = 0;
};

struct VectorCocycleSample {
    Vec u;
    ChartPoint x;
    Vec z;
    double residual = 0;
};

/// inf{ ||v|| : v != 0, Phi_v(x) = x } capped at 1, by exact lattice
/// enumeration for translation actions (return vectors are preimages of the
/// integer lattice under the direction matrix).
double estimate_epsilon0_action(const SystemSpec& sys, int samples, double norm_cap);

/// Builds the chart at x. Pass mu <= 0 to derive it as 0.3 x epsilon0.
FlowboxChart build_flowbox(const SystemSpec& sys, const ChartPoint& x, double r0, double mu = 0);

/// F_x applied to a tangent vector given in chart coordinates.
ChartPoint flowbox_eval(const FlowboxChart& chart, const Vec& xi);

/// Smallest/largest singular value of DF_x over sampled points of T_xM(r0),
/// estimated by central differences. Throws BoundViolationError when the
/// certified bounds [1/3, 3] fail.
std::pair<double, double> flowbox_bounds(const FlowboxChart& chart, int samples);

/// Default chart radius: half the metric window, halved until the derivative
/// bounds pass at a few seeded centers.
double default_flowbox_radius(const SystemSpec& sys, double mu = 0);

struct FlowboxCoords {
    TangentVector zeta; // normal part
    Vec a;              // orbit coordinates
};

/// Solves F_x(zeta + sum a_i X_i) = y by Newton iteration (one exact linear
/// solve for translation actions). Throws OutsideChartError when the
/// iteration does not converge inside the chart.
FlowboxCoords invert_flowbox(const FlowboxChart& chart, const ChartPoint& y);

/// Recovers z(u, x) with Psi_u(x) = Phi_z(x) through the flowbox inversion.
/// Throws OffOrbitError when the normal component exceeds tol_normal and
/// NoMatchError when the residual check fails.
VectorCocycleSample recover_z_action(const SystemSpec& Phi, const SystemSpec& Psi,
                                     const FlowboxChart& chart, const Vec& u,
                                     double tol_normal = kTolNormal);

/// Largest dyadic a with d(Psi_{+-a e_i}(x), x) < delta at every chart.
double choose_action_window(const SystemSpec& Phi, const SystemSpec& Psi,
                            const std::vector<FlowboxChart>& charts);

/// Assembles A(x) column-wise from z(a e_i, x)/a at every chart, audits
/// orbit-invariance over sampled ||v|| <= 5, quasi-triviality over
/// ||u|| <= horizon, and the vector-field basis cross-check.
MatrixField recover_A_action(const SystemSpec& Phi, const SystemSpec& Psi,
                             const std::vector<FlowboxChart>& charts, double horizon = 5.0,
                             std::uint64_t seed = 0x90a7);

/// The matrix representing the Psi generator fields (Y_i(x)) on the basis
/// (X_i(x)), by a least-squares solve in the tangent space.
Mat basis_representation_A(const SystemSpec& Phi, const SystemSpec& Psi, const ChartPoint& x);

} // namespace sepflow

#endif
