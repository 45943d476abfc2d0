#ifndef SEPFLOW_CENTRALIZER_HPP
#define SEPFLOW_CENTRALIZER_HPP

#include <cstdint>
#include <vector>

#include "sepflow/constants.hpp"
#include "sepflow/system.hpp"

namespace sepflow {

/// Residual threshold for matching psi_s(x) onto the local orbit arc.
inline constexpr double kTolMatch = 1e-8;

/// One recovered cocycle value: psi_s(x) = phi_z(x) with |z| <= mu and
/// residual = d(psi_s(x), phi_z(x)).
struct CocycleSample {
    double s = 0;
    ChartPoint x;
    double z = 0;
    double residual = 0;
};

struct ReparamSample {
    ChartPoint x;
    double value = 0;    // A(x)
    double residual = 0; // match residual of the defining recovery
};

/// Sampled time-reparameterization field A with its audit maxima.
struct ReparamField {
    double a = 0;
    std::vector<ReparamSample> samples;
    double invariance_residual_max = 0;
    double quasitrivial_residual_max = 0;
};

/// Max over seeded (s, t, x) with s, t in [-5, 5] (componentwise for actions)
/// of d(psi_s(phi_t(x)), phi_t(psi_s(x))). A reported diagnostic, never an
/// error.
double check_commutation(const SystemSpec& phi, const SystemSpec& psi, int samples,
                         std::uint64_t seed);

/// Largest dyadic a in {mu/2, mu/4, ...} with d(psi_s(x), x) < delta for all
/// audited x and s in {+-a, +-a/2}. Throws CalibrationError when even the
/// smallest candidate fails.
double choose_cocycle_window(const SystemSpec& phi, const SystemSpec& psi,
                             const FlowConstants& constants,
                             const std::vector<ChartPoint>& audit_points);

/// Finds z in [-mu, mu] minimizing d(phi_z(x), psi_s(x)) by a coarse bracket
/// scan, golden-section contraction, and a final parabolic fit on the squared
/// distance. Throws NoMatchError when the minimized residual exceeds
/// tol_match (psi_s(x) off the local orbit arc).
CocycleSample recover_z(const SystemSpec& phi, const SystemSpec& psi,
                        const FlowConstants& constants, double s, const ChartPoint& x,
                        double tol_match = kTolMatch);

struct CocycleResiduals {
    double additivity = 0; // z(t+s,x) - z(t,x) - z(s, psi_t(x))
    double invariance = 0; // z(s, phi_t(x)) - z(s, x), t in [-10, 10]
    double linearity = 0;  // z(s,x) - (z(a,x)/a) s
};

/// Audits the three cocycle identities over seeded triples. Pass a = 0 to
/// choose the window automatically.
CocycleResiduals verify_cocycle(const SystemSpec& phi, const SystemSpec& psi,
                                const FlowConstants& constants, int samples, std::uint64_t seed,
                                double a = 0);

/// A(x) = z(a,x)/a at each sample point, with the orbit-invariance audit
/// max |A(phi_t(x)) - A(x)| over t in [-10, 10].
ReparamField recover_A_flow(const SystemSpec& phi, const SystemSpec& psi,
                            const FlowConstants& constants,
                            const std::vector<ChartPoint>& sample_points, double a = 0);

/// Max over the field's samples and a t-grid in [-horizon, horizon] of
/// d(psi_t(x), phi_{A(x) t}(x)). Large values are reported, not thrown.
double verify_quasitrivial(const SystemSpec& phi, const SystemSpec& psi,
                           const ReparamField& field, double horizon, int t_samples = 64);

struct OrbitCoincidence {
    bool coincident = false;
    double residual = 0; // max over samples/t of the distance to the v-flow orbit
};

/// Checks whether the orbits of (Phi_{tu}) lie on the orbits of (Phi_{tv}) by
/// recovering the reparameterization of the u-flow against the v-flow. A
/// cocycle no-match is reported as non-coincidence, not an error.
OrbitCoincidence check_orbit_coincidence(const SystemSpec& action, const Vec& v, const Vec& u,
                                         int samples, double horizon);

} // namespace sepflow

#endif
