#include "sepflow/section.hpp"

#include <cmath>
#include <string>

#include "sepflow/errors.hpp"

namespace sepflow {

double integral_I(const SystemSpec& sys, const ChartPoint& p, const ChartPoint& x, double T0,
                  int n) {
    if (n < 16 || n % 2 != 0) throw InvalidArgumentError("quadrature n must be even and >= 16");
    if (!(T0 > 0)) throw InvalidArgumentError("T0 must be positive");
    const double h = T0 / n;
    double sum = sys.distance(p, x) + sys.distance(sys.evaluate_flow(T0, p), x);
    for (int k = 1; k < n; ++k) {
        const double w = (k % 2 == 1) ? 4.0 : 2.0;
        sum += w * sys.distance(sys.evaluate_flow(k * h, p), x);
    }
    return sum * h / 3.0;
}

SectionChart make_section_chart(const SystemSpec& sys, const ChartPoint& center,
                                const FlowConstants& constants, int quadrature_n) {
    SectionChart chart{sys, center, constants, 0.0, 0.0, quadrature_n};
    chart.I_center = integral_I(sys, center, center, constants.T0, quadrature_n);
    chart.g_slope = sys.distance(sys.evaluate_flow(constants.T0, center), center);
    if (!(chart.g_slope > constants.eta / 2.0))
        throw BoundViolationError("section slope " + std::to_string(chart.g_slope) +
                                  " does not exceed eta/2");
    return chart;
}

double g_value(const SectionChart& chart, double t, const ChartPoint& p) {
    const ChartPoint moved = chart.sys.evaluate_flow(t, p);
    return integral_I(chart.sys, moved, chart.center, chart.constants.T0, chart.quadrature_n) -
           chart.I_center;
}

double g_derivative(const SystemSpec& sys, double t, const ChartPoint& p,
                    const SectionChart& chart) {
    const double value = sys.distance(sys.evaluate_flow(t + chart.constants.T0, p), chart.center) -
                         sys.distance(sys.evaluate_flow(t, p), chart.center);
    if (!(value > chart.constants.eta / 2.0))
        throw BoundViolationError("G slope " + std::to_string(value) +
                                  " at t=" + std::to_string(t) + " does not exceed eta/2");
    return value;
}

SectionSolve solve_section_time(const SectionChart& chart, const ChartPoint& p, double tau0) {
    SectionSolve result;
    result.tau = tau0;
    double g = g_value(chart, result.tau, p);
    std::vector<double> increments;
    while (std::fabs(g) >= kTolG) {
        if (result.iterations >= 200)
            throw SolverStallError("section-time iteration hit 200 steps");
        const double next = result.tau - g / chart.g_slope;
        if (std::fabs(next) > chart.constants.mu1 + 1e-12)
            throw SolverDivergenceError("section time left [-mu1, mu1]; point outside the "
                                        "certified ball");
        increments.push_back(std::fabs(next - result.tau));
        result.tau = next;
        ++result.iterations;
        g = g_value(chart, result.tau, p);
    }
    for (std::size_t k = 1; k < increments.size(); ++k)
        result.rates.push_back(increments[k] / increments[k - 1]);
    return result;
}

ChartPoint project_to_section(const SectionChart& chart, const ChartPoint& p) {
    const SectionSolve solve = solve_section_time(chart, p);
    return chart.sys.evaluate_flow(solve.tau, p);
}

bool on_local_orbit_arc(const SectionChart& chart, const ChartPoint& p) {
    const double d0 = chart.sys.distance(p, chart.center);
    const ChartPoint projected = project_to_section(chart, p);
    return chart.sys.distance(projected, chart.center) <= std::max(1e-8, 1e-3 * d0);
}

OrbitWindow orbit_window(const SectionChart& chart, const ChartPoint& p) {
    const double delta = chart.constants.delta;
    const double mu = chart.constants.mu;
    if (!(chart.sys.distance(p, chart.center) < delta))
        throw InvalidArgumentError("orbit_window requires p inside B_delta(center)");

    auto inside = [&](double t) {
        return chart.sys.distance(chart.sys.evaluate_flow(t, p), chart.center) < delta;
    };

    auto boundary = [&](double sign) {
        const int n = 64;
        const double step = mu / n;
        double in = 0.0;
        double out = 0.0;
        bool found = false;
        for (int k = 1; k <= n; ++k) {
            const double t = sign * k * step;
            if (inside(t)) {
                in = t;
            } else {
                out = t;
                found = true;
                break;
            }
        }
        if (!found)
            throw WindowNotFoundError("orbit stays inside B_delta out to +-mu; calibration "
                                      "condition (3) violated");
        while (std::fabs(out - in) > 1e-10) {
            const double mid = 0.5 * (in + out);
            (inside(mid) ? in : out) = mid;
        }
        return 0.5 * (in + out);
    };

    OrbitWindow w;
    w.l1 = boundary(-1.0);
    w.l2 = boundary(+1.0);
    return w;
}

} // namespace sepflow
