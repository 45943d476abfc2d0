#ifndef SEPFLOW_SECTION_HPP
#define SEPFLOW_SECTION_HPP

#include <vector>

#include "sepflow/constants.hpp"
#include "sepflow/system.hpp"

namespace sepflow {

/// |G| threshold at which the section-time iteration stops.
inline constexpr double kTolG = 1e-10;
/// Certified contraction factor of the section-time fixed-point iteration.
inline constexpr double kContractionRate = 7.0 / 12.0;
/// Observed per-iteration ratios must stay below the certified rate plus this
/// slack.
inline constexpr double kContractionSlack = 0.05;

/// Local cross-section at a center x: the level set
/// S_x = { p : I(p,x) = I(x,x) } of the orbit-averaged distance functional
/// I(p,x) = int_0^T0 d(phi_s(p), x) ds, together with the cached slope of
/// G(t,p) = I(phi_t(p), x) - I(x,x) at (0, x).
struct SectionChart {
    SystemSpec sys;
    ChartPoint center;
    FlowConstants constants;
    double I_center = 0;
    double g_slope = 0; // dG/dt(0,x) = d(phi_T0(x), x); exceeds eta/2
    int quadrature_n = 256;
};

/// Composite-Simpson value of I(p,x) with n subintervals (n >= 16, even).
double integral_I(const SystemSpec& sys, const ChartPoint& p, const ChartPoint& x, double T0,
                  int n = 256);

SectionChart make_section_chart(const SystemSpec& sys, const ChartPoint& center,
                                const FlowConstants& constants, int quadrature_n = 256);

/// G(t, p) for this chart.
double g_value(const SectionChart& chart, double t, const ChartPoint& p);

/// dG/dt(t,p) = d(phi_{t+T0}(p), x) - d(phi_t(p), x). Throws
/// BoundViolationError when the value does not exceed eta/2.
double g_derivative(const SystemSpec& sys, double t, const ChartPoint& p,
                    const SectionChart& chart);

struct SectionSolve {
    double tau = 0;
    int iterations = 0;
    std::vector<double> rates; // per-iteration increment ratios
};

/// Solves G(tau, p) = 0 by the fixed-slope iteration
/// tau <- tau - G(tau,p)/g_slope starting from tau0. Throws
/// SolverDivergenceError if tau leaves [-mu1, mu1] and SolverStallError after
/// 200 iterations.
SectionSolve solve_section_time(const SectionChart& chart, const ChartPoint& p,
                                double tau0 = 0.0);

/// P_x(p) = phi_{tau(p)}(p) in S_x.
ChartPoint project_to_section(const SectionChart& chart, const ChartPoint& p);

/// True when p projects back onto the chart center, i.e. p lies on the local
/// orbit arc through the center.
bool on_local_orbit_arc(const SectionChart& chart, const ChartPoint& p);

struct OrbitWindow {
    double l1 = 0; // in [-mu, 0)
    double l2 = 0; // in (0, mu]
};

/// Maximal time window (l1, l2) around 0 with phi_t(p) inside B_delta(center),
/// found by outward march and bisection to boundary tolerance 1e-9. Throws
/// WindowNotFoundError if the orbit never exits the ball by +-mu.
OrbitWindow orbit_window(const SectionChart& chart, const ChartPoint& p);

} // namespace sepflow

#endif
