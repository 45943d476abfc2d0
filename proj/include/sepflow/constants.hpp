#ifndef SEPFLOW_CONSTANTS_HPP
#define SEPFLOW_CONSTANTS_HPP

#include <cstdint>
#include <vector>

#include "sepflow/system.hpp"

namespace sepflow {

/// Calibrated constant bundle for one flow. The windows satisfy
/// 0 < mu1 < T0 < epsilon0 and mu = mu1/3; delta is the ball radius at which
/// the three local conditions below were audited:
///   (1) d(phi_t(p), x) < eta/4           for p in B_delta(x), |t| <= mu1
///   (2) d(phi_tau(p), phi_tau(x)) <= eta*mu1/(12 T0)   for tau in [0, T0]
///   (3) d(phi_{+-mu1/3}(x), x) >= 2 delta
struct FlowConstants {
    double T0 = 0;
    double epsilon0 = 0;
    double eta = 0;
    double mu1 = 0;
    double mu = 0;
    double delta = 0;
    int sample_count = 0;
    bool certified = false;
};

struct SeparationCounterexample {
    ChartPoint x;
    ChartPoint y;
    double max_orbit_distance = 0;
};

/// Outcome of the separating-property probe. Counterexamples are pairs that
/// never reached the threshold within the horizon; for a genuinely separating
/// system this means the horizon was too short, not that the probe failed.
struct SeparationReport {
    double delta = 0;
    double horizon = 0;
    int pairs_tested = 0;
    double separated_fraction = 0;
    std::vector<SeparationCounterexample> counterexamples;
};

inline constexpr std::uint64_t kDefaultProbeSeed = 0x5ef70b5eedULL;

/// Estimated infimum of minimal closed-orbit periods, capped at 1. Closed-form
/// systems (translations, suspensions) enumerate their periods exactly; rk4
/// systems fall back to a grid scan refined near candidate returns.
double estimate_epsilon0_flow(const SystemSpec& sys, int samples, double period_cap);

/// Sampled minimum of d(phi_{T0}(x), x) over a seeded low-discrepancy sample,
/// shrunk by a safety factor of 0.9. Throws CalibrationError when the sampled
/// minimum is below 1e-9 (T0 at or beyond a period).
double eta_for(const SystemSpec& sys, double T0, int samples,
               std::uint64_t seed = kDefaultProbeSeed);

/// Result of auditing conditions (1)-(3) over a sample. Margins are the worst
/// observed slacks (positive = condition satisfied with room).
struct ConditionAudit {
    bool ok = false;
    int failed_condition = 0; // 1..3, or 0 when ok
    double margin1 = 0;
    double margin2 = 0;
    double margin3 = 0;
};

/// Re-runs the three-condition audit for explicit (mu1, delta) on a given
/// point sample. Exposed so tests can re-audit calibrated constants on denser
/// grids and fresh seeds.
ConditionAudit audit_local_constants(const SystemSpec& sys, double T0, double eta, double mu1,
                                     double delta, const std::vector<ChartPoint>& points,
                                     int time_points, int shell_directions, int shell_radii,
                                     std::uint64_t seed);

/// Calibrates mu1 and delta so that conditions (1)-(3) hold at every audited
/// sample. mu1 starts at T0/3 and halves on audit failure; delta is fitted
/// per round (largest dyadic radius passing (1), then (2), capped by 0.45x
/// the condition-(3) bound). Throws CalibrationError after 40 rounds.
FlowConstants calibrate_local_constants(const SystemSpec& sys, double T0, double eta,
                                        double epsilon0, int samples = 48,
                                        std::uint64_t seed = kDefaultProbeSeed);

/// Samples close pairs (x, y) off the local orbit arc (rejection by the
/// cross-section projection), flows both to +-horizon, and records the
/// fraction that reached distance >= delta. Deterministic under seed.
SeparationReport probe_separation(const SystemSpec& sys, const FlowConstants& constants,
                                  double delta, double horizon, int pairs, std::uint64_t seed);

} // namespace sepflow

#endif
