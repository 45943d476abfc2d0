#include "sepflow/centralizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sepflow/errors.hpp"
#include "sepflow/sampling.hpp"

namespace sepflow {

namespace {

void require_same_manifold(const SystemSpec& phi, const SystemSpec& psi) {
    if (phi.geometry_hash() != psi.geometry_hash())
        throw DomainMismatchError("phi and psi live on different manifolds");
}

ChartPoint apply(const SystemSpec& sys, const Vec& v, const ChartPoint& x) {
    return sys.is_action() ? sys.evaluate_action(v, x) : sys.evaluate_flow(v[0], x);
}

} // namespace

double check_commutation(const SystemSpec& phi, const SystemSpec& psi, int samples,
                         std::uint64_t seed) {
    require_same_manifold(phi, psi);
    if (phi.rank() != psi.rank())
        throw DomainMismatchError("phi and psi have different action ranks");
    const auto points = sampling::sample_points(phi, samples, seed);
    sampling::Rng rng(seed ^ 0xc0ffee);
    double worst = 0;
    for (const auto& x : points) {
        Vec t(phi.rank()), s(phi.rank());
        for (int i = 0; i < phi.rank(); ++i) {
            t[i] = rng.uniform(-5.0, 5.0);
            s[i] = rng.uniform(-5.0, 5.0);
        }
        const ChartPoint a = apply(psi, s, apply(phi, t, x));
        const ChartPoint b = apply(phi, t, apply(psi, s, x));
        worst = std::max(worst, phi.distance(a, b));
    }
    return worst;
}

double choose_cocycle_window(const SystemSpec& phi, const SystemSpec& psi,
                             const FlowConstants& constants,
                             const std::vector<ChartPoint>& audit_points) {
    require_same_manifold(phi, psi);
    double a = constants.mu / 2.0;
    for (int k = 0; k < 60; ++k, a /= 2.0) {
        bool ok = true;
        for (const auto& x : audit_points) {
            for (double s : {a, -a, a / 2.0, -a / 2.0}) {
                if (!(phi.distance(psi.evaluate_flow(s, x), x) < constants.delta)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (ok) return a;
    }
    throw CalibrationError("no dyadic window keeps psi_s within delta of the identity");
}

CocycleSample recover_z(const SystemSpec& phi, const SystemSpec& psi,
                        const FlowConstants& constants, double s, const ChartPoint& x,
                        double tol_match) {
    require_same_manifold(phi, psi);
    const ChartPoint target = psi.evaluate_flow(s, x);
    auto f = [&](double z) { return phi.distance(phi.evaluate_flow(z, x), target); };

    const double mu = constants.mu;
    if (f(0.0) == 0.0) return {s, x, 0.0, 0.0};
    // z = s hits exactly when psi is phi itself (identity cocycle)
    if (std::fabs(s) <= mu && f(s) == 0.0) return {s, x, s, 0.0};

    // coarse scan for the global bracket inside [-mu, mu]
    const int coarse = 64;
    double best_z = 0, best_f = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= coarse; ++k) {
        const double z = -mu + 2.0 * mu * k / coarse;
        const double v = f(z);
        if (v < best_f) {
            best_f = v;
            best_z = z;
        }
    }
    double lo = std::max(-mu, best_z - 2.0 * mu / coarse);
    double hi = std::min(mu, best_z + 2.0 * mu / coarse);

    // golden-section contraction
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double za = hi - inv_phi * (hi - lo), zb = lo + inv_phi * (hi - lo);
    double fa = f(za), fb = f(zb);
    while (hi - lo > 1e-13) {
        if (fa < fb) {
            hi = zb;
            zb = za;
            fb = fa;
            za = hi - inv_phi * (hi - lo);
            fa = f(za);
        } else {
            lo = za;
            za = zb;
            fa = fb;
            zb = lo + inv_phi * (hi - lo);
            fb = f(zb);
        }
    }
    double z = 0.5 * (lo + hi);

    // parabolic vertex of the squared distance through the final triple
    {
        const double zm = z, h = std::max(1e-13, (hi - lo));
        const double z1 = zm - h, z2 = zm, z3 = zm + h;
        const double q1 = f(z1) * f(z1), q2 = f(z2) * f(z2), q3 = f(z3) * f(z3);
        const double denom = (q1 - 2.0 * q2 + q3);
        if (denom > 0) {
            const double vertex = z2 - 0.5 * h * (q3 - q1) / denom;
            if (std::fabs(vertex) <= mu && f(vertex) <= f(z)) z = vertex;
        }
    }

    const double residual = f(z);
    if (residual > tol_match)
        throw NoMatchError("cocycle match residual " + std::to_string(residual) +
                           " exceeds tolerance; psi_s(x) is off the local orbit arc");
    return {s, x, z, residual};
}

CocycleResiduals verify_cocycle(const SystemSpec& phi, const SystemSpec& psi,
                                const FlowConstants& constants, int samples, std::uint64_t seed,
                                double a) {
    const auto points = sampling::sample_points(phi, samples, seed);
    if (a <= 0) {
        std::vector<ChartPoint> audit(points.begin(),
                                      points.begin() + std::min<std::size_t>(32, points.size()));
        a = choose_cocycle_window(phi, psi, constants, audit);
    }
    sampling::Rng rng(seed ^ 0xadd171e5ULL);
    CocycleResiduals res;
    for (const auto& x : points) {
        // additivity: t, s, t+s all inside [-a, a]
        const double t = rng.uniform(-0.5, 0.5) * a;
        const double s = rng.uniform(-0.5, 0.5) * a;
        const double z_ts = recover_z(phi, psi, constants, t + s, x).z;
        const double z_t = recover_z(phi, psi, constants, t, x).z;
        const double z_s_shift = recover_z(phi, psi, constants, s, psi.evaluate_flow(t, x)).z;
        res.additivity = std::max(res.additivity, std::fabs(z_ts - z_t - z_s_shift));

        // invariance along the phi orbit
        const double tf = rng.uniform(-10.0, 10.0);
        const double z_s = recover_z(phi, psi, constants, s, x).z;
        const double z_moved = recover_z(phi, psi, constants, s, phi.evaluate_flow(tf, x)).z;
        res.invariance = std::max(res.invariance, std::fabs(z_moved - z_s));

        // linearity against the slope z(a, x)/a
        const double slope = recover_z(phi, psi, constants, a, x).z / a;
        for (double frac : {-1.0, -0.5, 0.25, 0.5}) {
            const double zs = recover_z(phi, psi, constants, frac * a, x).z;
            res.linearity = std::max(res.linearity, std::fabs(zs - slope * frac * a));
        }
    }
    return res;
}

ReparamField recover_A_flow(const SystemSpec& phi, const SystemSpec& psi,
                            const FlowConstants& constants,
                            const std::vector<ChartPoint>& sample_points, double a) {
    if (a <= 0) {
        std::vector<ChartPoint> audit(
            sample_points.begin(),
            sample_points.begin() + std::min<std::size_t>(32, sample_points.size()));
        a = choose_cocycle_window(phi, psi, constants, audit);
    }
    ReparamField field;
    field.a = a;
    field.samples.reserve(sample_points.size());
    const auto t_grid = sampling::linspace(-10.0, 10.0, 16);
    for (const auto& x : sample_points) {
        const CocycleSample base = recover_z(phi, psi, constants, a, x);
        const double A = base.z / a;
        field.samples.push_back({x, A, base.residual});
        for (double t : t_grid) {
            const ChartPoint moved = phi.evaluate_flow(t, x);
            const double A_moved = recover_z(phi, psi, constants, a, moved).z / a;
            field.invariance_residual_max =
                std::max(field.invariance_residual_max, std::fabs(A_moved - A));
        }
    }
    return field;
}

double verify_quasitrivial(const SystemSpec& phi, const SystemSpec& psi,
                           const ReparamField& field, double horizon, int t_samples) {
    double worst = 0;
    const auto t_grid = sampling::linspace(-horizon, horizon, t_samples);
    for (const auto& sample : field.samples) {
        for (double t : t_grid) {
            const ChartPoint lhs = psi.evaluate_flow(t, sample.x);
            const ChartPoint rhs = phi.evaluate_flow(sample.value * t, sample.x);
            worst = std::max(worst, phi.distance(lhs, rhs));
        }
    }
    return worst;
}

OrbitCoincidence check_orbit_coincidence(const SystemSpec& action, const Vec& v, const Vec& u,
                                         int samples, double horizon) {
    const SystemSpec phi = action.direction_flow(v);
    const SystemSpec psi = action.direction_flow(u);
    const double eps0 = estimate_epsilon0_flow(phi, 64, 4.0);
    const double T0 = 0.4 * eps0;
    const double eta = eta_for(phi, T0, 256);
    const FlowConstants constants = calibrate_local_constants(phi, T0, eta, eps0, 32);
    const auto points = sampling::sample_points(phi, samples, kDefaultProbeSeed ^ 0x0c01);
    try {
        const ReparamField field = recover_A_flow(phi, psi, constants, points);
        return {true, verify_quasitrivial(phi, psi, field, horizon)};
    } catch (const NoMatchError&) {
        return {false, std::numeric_limits<double>::infinity()};
    }
}

} // namespace sepflow
