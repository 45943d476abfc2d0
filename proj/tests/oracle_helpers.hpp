#ifndef SEPFLOW_TESTS_ORACLE_HELPERS_HPP
#define SEPFLOW_TESTS_ORACLE_HELPERS_HPP

// Shared independent oracles for the test suites. Everything here computes
// expected values by brute force or closed form, never through the library
// path it checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sepflow/sampling.hpp"
#include "sepflow/system.hpp"

namespace oracle {

using sepflow::ChartPoint;
using sepflow::SystemSpec;
using sepflow::Vec;

inline SystemSpec cat_suspension(double time_scale = 1.0) {
    Eigen::Matrix2<long long> M;
    M << 2, 1, 1, 1;
    return SystemSpec::suspension_flow(M, 1.0, time_scale);
}

inline SystemSpec irrational_translation_T2() {
    Vec v(2);
    v << 1.0, std::sqrt(2.0);
    return SystemSpec::torus_translation_flow(v);
}

inline SystemSpec translation_action_T3() {
    sepflow::Mat V(3, 2);
    V << 1.0, 0.0, 0.0, std::sqrt(2.0) - 1.0, 0.0, 1.0;
    return SystemSpec::torus_translation_action(V);
}

/// Brute-force minimum of d(phi_T0(x), x) over a dense independent sample.
inline double dense_eta_min(const SystemSpec& sys, double T0, int count) {
    const auto pts = sepflow::sampling::sample_points(sys, count, 0xdeadbeefULL);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& x : pts) m = std::min(m, sys.distance(sys.evaluate_flow(T0, x), x));
    return m;
}

/// Analytic I(p, x) for the unit-speed circle rotation: integrand
/// |s + offset| over [0, T0] (valid while |s + offset| < 1/2).
inline double circle_integral(double offset, double T0) {
    auto antideriv = [](double s) { return 0.5 * s * std::fabs(s); };
    return antideriv(T0 + offset) - antideriv(offset);
}

} // namespace oracle

#endif
