#include "sepflow/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sepflow/errors.hpp"
#include "sepflow/sampling.hpp"
#include "sepflow/section.hpp"

namespace sepflow {

namespace {

double frac_dist(double y) { return std::fabs(y - std::round(y)); }

/// Minimal t > 0 with t * v in Z^n, or +inf. Exact up to a 1e-9 closeness
/// test per coordinate.
double translation_min_period(const Vec& v, double cap) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < v.size(); ++i) {
        const double vi = std::fabs(v[i]);
        if (vi < 1e-12) continue;
        const int kmax = static_cast<int>(std::floor(cap * vi + 1e-9));
        for (int k = 1; k <= kmax; ++k) {
            const double t = k / vi;
            if (t > cap + 1e-12 || t >= best) continue;
            bool period = true;
            for (int j = 0; j < v.size(); ++j) {
                if (frac_dist(t * v[j]) > 1e-9) {
                    period = false;
                    break;
                }
            }
            if (period) best = t;
        }
    }
    return best;
}

/// Grid scan over t in (0, cap] with golden-section refinement near candidate
/// returns. Used for integrator-driven systems.
double scanned_min_period(const SystemSpec& sys, int samples, double cap) {
    const auto points = sampling::sample_points(sys, std::max(8, samples), kDefaultProbeSeed);
    const int n_grid = std::max(512, static_cast<int>(128 * cap));
    const double dt = cap / n_grid;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : points) {
        for (int k = 1; k <= n_grid; ++k) {
            const double t = k * dt;
            if (t >= best) break;
            if (sys.distance(sys.evaluate_flow(t, x), x) > 0.05) continue;
            // refine on the surrounding bracket
            double lo = t - dt, hi = t + dt;
            auto f = [&](double s) { return sys.distance(sys.evaluate_flow(s, x), x); };
            const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
            double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
            double fa = f(a), fb = f(b);
            while (hi - lo > 1e-12) {
                if (fa < fb) {
                    hi = b;
                    b = a;
                    fb = fa;
                    a = hi - inv_phi * (hi - lo);
                    fa = f(a);
                } else {
                    lo = a;
                    a = b;
                    fa = fb;
                    b = lo + inv_phi * (hi - lo);
                    fb = f(b);
                }
            }
            const double t_star = 0.5 * (lo + hi);
            if (t_star > 1e-9 && f(t_star) < 1e-10) best = std::min(best, t_star);
        }
    }
    return best;
}

} // namespace

double estimate_epsilon0_flow(const SystemSpec& sys, int samples, double period_cap) {
    if (!(period_cap > 0)) throw InvalidArgumentError("period cap must be positive");
    double best = std::numeric_limits<double>::infinity();
    switch (sys.kind()) {
        case SystemKind::torus_translation_flow:
            // the generating field already carries the time scale
            best = translation_min_period(
                sys.vector_field(1, sys.point(Vec::Zero(sys.dim()))).components, period_cap);
            break;
        case SystemKind::suspension_flow:
            // Closed orbits ride the fiber: the base-fixed-point orbit closes
            // after exactly one roof crossing, and every closed orbit needs an
            // integer number of crossings.
            best = sys.roof() / std::fabs(sys.time_scale());
            break;
        case SystemKind::suspension_base_drift:
            best = translation_min_period(sys.vector_field(1, sys.point(Vec::Zero(3))).components.head(2),
                                          period_cap);
            break;
        case SystemKind::torus_linear_ode_flow:
            best = scanned_min_period(sys, samples, period_cap);
            break;
        case SystemKind::disjoint_union: {
            for (const auto& comp : sys.components())
                best = std::min(best, estimate_epsilon0_flow(comp, samples, period_cap));
            break;
        }
        case SystemKind::torus_translation_action:
            throw InvalidArgumentError("estimate_epsilon0_flow needs a flow");
    }
    return std::min(1.0, best);
}

double eta_for(const SystemSpec& sys, double T0, int samples, std::uint64_t seed) {
    if (!(T0 > 0)) throw InvalidArgumentError("T0 must be positive");
    const auto points = sampling::sample_points(sys, samples, seed);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& x : points) m = std::min(m, sys.distance(sys.evaluate_flow(T0, x), x));
    if (m < 1e-9)
        throw CalibrationError("d(phi_T0(x), x) vanished at a sample; T0 reaches a period");
    return 0.9 * m;
}

namespace {

/// Shell points around x: radii (1..nr)/nr * delta along seeded directions.
std::vector<ChartPoint> shell_points(const SystemSpec& sys, const ChartPoint& x, double delta,
                                     int directions, int radii, sampling::Rng& rng) {
    std::vector<ChartPoint> out;
    out.reserve(directions * radii);
    for (int j = 0; j < directions; ++j) {
        const Vec u = rng.unit_vector(sys.dim());
        for (int r = 1; r <= radii; ++r) {
            const double rho = delta * r / radii;
            out.push_back(sys.point(x.coords + rho * u, x.system_id.component));
        }
    }
    return out;
}

} // namespace

ConditionAudit audit_local_constants(const SystemSpec& sys, double T0, double eta, double mu1,
                                     double delta, const std::vector<ChartPoint>& points,
                                     int time_points, int shell_directions, int shell_radii,
                                     std::uint64_t seed) {
    ConditionAudit audit;
    audit.margin1 = audit.margin2 = audit.margin3 = std::numeric_limits<double>::infinity();
    const auto t_grid = sampling::linspace(-mu1, mu1, time_points);
    const auto tau_grid = sampling::linspace(0.0, T0, time_points);
    const double bound2 = eta * mu1 / (12.0 * T0);
    sampling::Rng rng(seed);

    for (const auto& x : points) {
        // condition (3) first: it caps delta and costs two evaluations
        const double d3 = std::min(sys.distance(sys.evaluate_flow(mu1 / 3.0, x), x),
                                   sys.distance(sys.evaluate_flow(-mu1 / 3.0, x), x));
        audit.margin3 = std::min(audit.margin3, d3 - 2.0 * delta);

        auto shells = shell_points(sys, x, delta, shell_directions, shell_radii, rng);
        shells.push_back(x); // the center itself participates in (1) and (2)
        for (const auto& p : shells) {
            for (double t : t_grid)
                audit.margin1 = std::min(
                    audit.margin1, eta / 4.0 - sys.distance(sys.evaluate_flow(t, p), x));
            for (double tau : tau_grid) {
                const double d = sys.distance(sys.evaluate_flow(tau, p), sys.evaluate_flow(tau, x));
                audit.margin2 = std::min(audit.margin2, bound2 - d);
            }
        }
    }
    if (audit.margin1 <= 0)
        audit.failed_condition = 1;
    else if (audit.margin2 < 0)
        audit.failed_condition = 2;
    else if (audit.margin3 < 0)
        audit.failed_condition = 3;
    audit.ok = audit.failed_condition == 0;
    return audit;
}

FlowConstants calibrate_local_constants(const SystemSpec& sys, double T0, double eta,
                                        double epsilon0, int samples, std::uint64_t seed) {
    if (!(T0 > 0)) throw InvalidArgumentError("T0 must be positive");
    if (!(T0 < epsilon0)) throw InvalidArgumentError("T0 must stay below epsilon0");
    if (!(eta > 0)) throw InvalidArgumentError("eta must be positive");

    const auto points = sampling::sample_points(sys, samples, seed);
    const int time_points = 32, shell_directions = 16, shell_radii = 4;

    auto holds = [&](int condition, double mu1, double delta) {
        const auto a = audit_local_constants(sys, T0, eta, mu1, delta, points, time_points,
                                             shell_directions, shell_radii, seed + 17);
        switch (condition) {
            case 1: return a.margin1 > 0;
            case 2: return a.margin2 >= 0;
            default: return a.ok;
        }
    };

    double mu1 = T0 / 3.0;
    for (int round = 0; round < 40; ++round, mu1 /= 2.0) {
        // (1) must be attainable at the center alone before any delta fits
        double worst = 0;
        for (const auto& x : points)
            for (double t : sampling::linspace(-mu1, mu1, time_points))
                worst = std::max(worst, sys.distance(sys.evaluate_flow(t, x), x));
        if (worst >= eta / 4.0) continue;

        // largest dyadic delta passing (1), then shrunk until (2) passes
        auto dyadic = [&](int condition, double start) {
            double d = start;
            for (int k = 0; k < 50; ++k, d /= 2.0)
                if (holds(condition, mu1, d)) return d;
            return 0.0;
        };
        const double delta1 = dyadic(1, std::min(sys.metric_window(), eta / 4.0));
        if (delta1 == 0.0) continue;
        const double delta2 = dyadic(2, delta1);
        if (delta2 == 0.0) continue;

        double cap3 = std::numeric_limits<double>::infinity();
        for (const auto& x : points)
            cap3 = std::min({cap3, sys.distance(sys.evaluate_flow(mu1 / 3.0, x), x),
                             sys.distance(sys.evaluate_flow(-mu1 / 3.0, x), x)});
        const double delta = std::min(delta2, 0.45 * cap3);
        if (delta == 0.0) continue;

        if (holds(0, mu1, delta)) {
            FlowConstants c;
            c.T0 = T0;
            c.epsilon0 = epsilon0;
            c.eta = eta;
            c.mu1 = mu1;
            c.mu = mu1 / 3.0;
            c.delta = delta;
            c.sample_count = samples;
            c.certified = true;
            return c;
        }
    }
    throw CalibrationError("local-constant calibration failed after 40 shrink rounds");
}

SeparationReport probe_separation(const SystemSpec& sys, const FlowConstants& constants,
                                  double delta, double horizon, int pairs, std::uint64_t seed) {
    if (!(delta > 0)) throw InvalidArgumentError("delta must be positive");
    if (!(horizon > 0)) throw InvalidArgumentError("horizon must be positive");

    SeparationReport report;
    report.delta = delta;
    report.horizon = horizon;
    report.pairs_tested = pairs;

    // pair radii stay inside the chart ball so the on-orbit rejection can
    // project; the probe threshold itself remains `delta`
    const double r_cap = std::min(delta, constants.delta) * 0.95;
    const auto xs = sampling::sample_points(sys, pairs * 4, seed);
    sampling::Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);

    const int n_steps = 600;
    const double dt = horizon / n_steps;
    int separated = 0;
    std::size_t x_index = 0;

    for (int pair = 0; pair < pairs; ++pair) {
        ChartPoint x = xs[x_index % xs.size()];
        ChartPoint y = x;
        bool accepted = false;
        for (int attempt = 0; attempt < 64 && !accepted; ++attempt) {
            x = xs[x_index++ % xs.size()];
            const double r = r_cap * (0.2 + 0.75 * rng.uniform());
            y = sys.point(x.coords + r * rng.unit_vector(sys.dim()), x.system_id.component);
            const double d0 = sys.distance(x, y);
            if (!(d0 > 0 && d0 < delta)) continue;
            const SectionChart chart = make_section_chart(sys, x, constants, 64);
            accepted = !on_local_orbit_arc(chart, y);
        }
        if (!accepted) throw CalibrationError("could not sample an off-orbit pair");

        double max_d = sys.distance(x, y);
        bool pair_separated = max_d >= delta;
        for (int dir = 0; dir < 2 && !pair_separated; ++dir) {
            const double sign = dir == 0 ? 1.0 : -1.0;
            ChartPoint cx = x, cy = y;
            for (int k = 0; k < n_steps; ++k) {
                cx = sys.evaluate_flow(sign * dt, cx);
                cy = sys.evaluate_flow(sign * dt, cy);
                const double d = sys.distance(cx, cy);
                max_d = std::max(max_d, d);
                if (d >= delta) {
                    pair_separated = true;
                    break;
                }
            }
        }
        if (pair_separated)
            ++separated;
        else
            report.counterexamples.push_back({x, y, max_d});
    }
    report.separated_fraction = static_cast<double>(separated) / pairs;
    return report;
}

} // namespace sepflow
