#include "sepflow/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sepflow/centralizer.hpp"
#include "sepflow/errors.hpp"
#include "sepflow/sampling.hpp"

namespace sepflow {

namespace {

constexpr double kDerivativeStep = 1e-5; // central differences for DF_x and Y_i

void require_action(const SystemSpec& sys) {
    if (!sys.is_action()) throw InvalidArgumentError("operation requires an R^d-action");
}

Mat orbit_matrix(const SystemSpec& sys, const ChartPoint& x) {
    Mat X(sys.dim(), sys.rank());
    for (int i = 1; i <= sys.rank(); ++i) X.col(i - 1) = sys.vector_field(i, x).components;
    return X;
}

} // namespace

double estimate_epsilon0_action(const SystemSpec& sys, int /*samples*/, double norm_cap) {
    require_action(sys);
    if (!(norm_cap > 0)) throw InvalidArgumentError("norm cap must be positive");
    // Translation actions return exactly when V v lands on the integer
    // lattice, so the candidates are least-squares preimages of lattice
    // vectors.
    const Mat& V = sys.action_directions();
    const int dim = sys.dim(), d = sys.rank();
    std::vector<int> K(dim);
    for (int i = 0; i < dim; ++i)
        K[i] = static_cast<int>(std::ceil(norm_cap * V.row(i).norm())) + 1;

    const Mat pseudo = (V.transpose() * V).inverse() * V.transpose();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> k(dim, 0);
    const auto advance = [&]() {
        for (int i = 0; i < dim; ++i) {
            if (k[i] < K[i]) {
                ++k[i];
                return true;
            }
            k[i] = -K[i];
        }
        return false;
    };
    for (int i = 0; i < dim; ++i) k[i] = -K[i];
    do {
        bool zero = true;
        for (int i = 0; i < dim; ++i) zero = zero && k[i] == 0;
        if (zero) continue;
        Vec lattice(dim);
        for (int i = 0; i < dim; ++i) lattice[i] = k[i];
        const Vec v = pseudo * lattice;
        if ((V * v - lattice).cwiseAbs().maxCoeff() > 1e-9) continue;
        const double n = v.norm();
        if (n > 1e-12 && n <= norm_cap + 1e-12) best = std::min(best, n);
    } while (advance());
    return std::min(1.0, best);
}

FlowboxChart build_flowbox(const SystemSpec& sys, const ChartPoint& x, double r0, double mu) {
    require_action(sys);
    if (!(r0 > 0) || r0 >= sys.metric_window())
        throw InvalidArgumentError("chart radius must sit inside the metric window");

    FlowboxChart chart;
    chart.sys = sys;
    chart.center = x;
    chart.r0 = r0;

    const int dim = sys.dim(), d = sys.rank();
    const Mat X = orbit_matrix(sys, x);
    Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeFullU);
    const double sigma_min = svd.singularValues().minCoeff();
    if (sigma_min < 1e-10)
        throw DegenerateBasisError("orbit basis vectors are linearly dependent");

    for (int i = 0; i < d; ++i) chart.orbit_basis.push_back({x, X.col(i)});
    const Mat U = svd.matrixU();
    for (int i = d; i < dim; ++i) chart.normal_basis.push_back({x, U.col(i)});

    chart.frame.resize(dim, dim);
    for (int i = 0; i < dim - d; ++i) chart.frame.col(i) = chart.normal_basis[i].components;
    for (int i = 0; i < d; ++i) chart.frame.col(dim - d + i) = X.col(i);
    chart.frame_inverse = chart.frame.inverse();

    if (mu <= 0) mu = 0.3 * estimate_epsilon0_action(sys, 0, 3.0);
    chart.mu = mu;
    chart.delta = 0.9 * std::min(r0 / 3.0, sigma_min * mu / 3.0);
    return chart;
}

ChartPoint flowbox_eval(const FlowboxChart& chart, const Vec& xi) {
    const int dim = chart.sys.dim(), d = chart.sys.rank();
    const Vec coeffs = chart.frame_inverse * xi;
    Vec zeta = Vec::Zero(dim);
    for (int i = 0; i < dim - d; ++i) zeta += coeffs[i] * chart.normal_basis[i].components;
    const ChartPoint base = chart.sys.point(chart.center.coords + zeta,
                                            chart.center.system_id.component);
    return chart.sys.evaluate_action(coeffs.tail(d), base);
}

std::pair<double, double> flowbox_bounds(const FlowboxChart& chart, int samples) {
    const int dim = chart.sys.dim();
    sampling::Rng rng(0xf10bb0ULL);
    double m_min = std::numeric_limits<double>::infinity();
    double norm_max = 0;
    const double h = kDerivativeStep;
    for (int s = 0; s < samples; ++s) {
        Vec p = Vec::Zero(dim);
        if (s > 0) {
            const double r =
                (chart.r0 - 2.0 * h) * std::pow(rng.uniform(), 1.0 / dim);
            p = r * rng.unit_vector(dim);
        }
        Mat J(dim, dim);
        for (int j = 0; j < dim; ++j) {
            Vec e = Vec::Zero(dim);
            e[j] = 1.0;
            const ChartPoint fwd = flowbox_eval(chart, p + h * e);
            const ChartPoint bwd = flowbox_eval(chart, p - h * e);
            J.col(j) = chart.sys.displacement(bwd, fwd) / (2.0 * h);
        }
        Eigen::JacobiSVD<Mat> svd(J);
        const double lo = svd.singularValues().minCoeff();
        const double hi = svd.singularValues().maxCoeff();
        if (lo < kFlowboxLowerBound || hi > kFlowboxUpperBound) {
            std::string where = "(";
            for (int i = 0; i < dim; ++i) where += std::to_string(p[i]) + (i + 1 < dim ? "," : ")");
            throw BoundViolationError("flowbox derivative bounds failed at p=" + where +
                                      ": m=" + std::to_string(lo) +
                                      " norm=" + std::to_string(hi) + "; shrink r0");
        }
        m_min = std::min(m_min, lo);
        norm_max = std::max(norm_max, hi);
    }
    return {m_min, norm_max};
}

double default_flowbox_radius(const SystemSpec& sys, double mu) {
    require_action(sys);
    double r0 = 0.5 * sys.metric_window();
    const auto centers = sampling::sample_points(sys, 4, 0x72ad11ULL);
    for (int attempt = 0; attempt < 20; ++attempt, r0 /= 2.0) {
        try {
            for (const auto& c : centers) flowbox_bounds(build_flowbox(sys, c, r0, mu), 16);
            return r0;
        } catch (const BoundViolationError&) {
            continue;
        }
    }
    throw CalibrationError("no chart radius satisfied the derivative bounds");
}

FlowboxCoords invert_flowbox(const FlowboxChart& chart, const ChartPoint& y) {
    const SystemSpec& sys = chart.sys;
    const int dim = sys.dim(), d = sys.rank();
    Vec xi = sys.displacement(chart.center, y);
    const double h = kDerivativeStep;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        const ChartPoint fx = flowbox_eval(chart, xi);
        if (sys.distance(fx, y) <= 1e-10) {
            converged = true;
            break;
        }
        Mat J(dim, dim);
        for (int j = 0; j < dim; ++j) {
            Vec e = Vec::Zero(dim);
            e[j] = 1.0;
            J.col(j) = sys.displacement(flowbox_eval(chart, xi - h * e),
                                        flowbox_eval(chart, xi + h * e)) /
                       (2.0 * h);
        }
        xi += J.partialPivLu().solve(sys.displacement(fx, y));
        if (xi.norm() > 1.5 * chart.r0)
            throw OutsideChartError("flowbox inversion left the chart radius");
    }
    if (!converged) throw OutsideChartError("flowbox inversion did not converge");

    const Vec coeffs = chart.frame_inverse * xi;
    Vec zeta = Vec::Zero(dim);
    for (int i = 0; i < dim - d; ++i) zeta += coeffs[i] * chart.normal_basis[i].components;
    return {TangentVector{chart.center, zeta}, coeffs.tail(d)};
}

VectorCocycleSample recover_z_action(const SystemSpec& Phi, const SystemSpec& Psi,
                                     const FlowboxChart& chart, const Vec& u, double tol_normal) {
    const ChartPoint& x = chart.center;
    const ChartPoint target = Psi.evaluate_action(u, x);
    const FlowboxCoords coords = invert_flowbox(chart, target);
    if (coords.zeta.components.norm() > tol_normal)
        throw OffOrbitError("normal component " + std::to_string(coords.zeta.components.norm()) +
                            " exceeds tolerance; Psi_u(x) left the Phi-orbit");
    if (coords.a.norm() > chart.mu + 1e-12)
        throw NoMatchError("recovered orbit coordinates exceed the uniqueness window");
    const double residual = Phi.distance(Phi.evaluate_action(coords.a, x), target);
    if (residual > kTolMatch)
        throw NoMatchError("action cocycle residual " + std::to_string(residual) +
                           " exceeds tolerance");
    return {u, x, coords.a, residual};
}

double choose_action_window(const SystemSpec& Phi, const SystemSpec& Psi,
                            const std::vector<FlowboxChart>& charts) {
    if (charts.empty()) throw InvalidArgumentError("need at least one chart");
    double mu = charts.front().mu, delta = charts.front().delta;
    for (const auto& c : charts) {
        mu = std::min(mu, c.mu);
        delta = std::min(delta, c.delta);
    }
    const int d = Phi.rank();
    double a = mu / 2.0;
    for (int k = 0; k < 60; ++k, a /= 2.0) {
        bool ok = true;
        for (const auto& chart : charts) {
            for (int i = 0; i < d && ok; ++i) {
                for (double sign : {1.0, -1.0}) {
                    Vec u = Vec::Zero(d);
                    u[i] = sign * a;
                    if (!(Phi.distance(Psi.evaluate_action(u, chart.center), chart.center) <
                          delta)) {
                        ok = false;
                        break;
                    }
                }
            }
            if (!ok) break;
        }
        if (ok) return a;
    }
    throw CalibrationError("no dyadic window keeps Psi_u within delta of the identity");
}

MatrixField recover_A_action(const SystemSpec& Phi, const SystemSpec& Psi,
                             const std::vector<FlowboxChart>& charts, double horizon,
                             std::uint64_t seed) {
    require_action(Phi);
    const int d = Phi.rank();
    MatrixField field;
    field.a = choose_action_window(Phi, Psi, charts);

    sampling::Rng rng(seed);
    const auto mag_grid = sampling::linspace(0.25, 1.0, 4);
    for (const auto& chart : charts) {
        const ChartPoint& x = chart.center;
        Mat A(d, d);
        double residual = 0;
        for (int i = 0; i < d; ++i) {
            Vec u = Vec::Zero(d);
            u[i] = field.a;
            const VectorCocycleSample s = recover_z_action(Phi, Psi, chart, u);
            A.col(i) = s.z / field.a;
            residual = std::max(residual, s.residual);
        }
        field.samples.push_back({x, A, residual});

        // orbit-invariance: A at Phi_v(x) along sampled directions
        for (int rep = 0; rep < 4; ++rep) {
            const Vec v = 5.0 * rng.uniform() * rng.unit_vector(d);
            const ChartPoint moved = Phi.evaluate_action(v, x);
            const FlowboxChart moved_chart = build_flowbox(Phi, moved, chart.r0, chart.mu);
            Mat A_moved(d, d);
            for (int i = 0; i < d; ++i) {
                Vec u = Vec::Zero(d);
                u[i] = field.a;
                A_moved.col(i) = recover_z_action(Phi, Psi, moved_chart, u).z / field.a;
            }
            field.invariance_residual_max = std::max(field.invariance_residual_max,
                                                     (A_moved - A).cwiseAbs().maxCoeff());
        }

        // quasi-triviality well beyond the recovery window
        for (int rep = 0; rep < 8; ++rep) {
            const Vec dir = rng.unit_vector(d);
            for (double m : mag_grid) {
                const Vec u = horizon * m * dir;
                const double dq =
                    Phi.distance(Psi.evaluate_action(u, x), Phi.evaluate_action(A * u, x));
                field.quasitrivial_residual_max = std::max(field.quasitrivial_residual_max, dq);
            }
        }

        const Mat A_basis = basis_representation_A(Phi, Psi, x);
        field.basis_check_residual_max =
            std::max(field.basis_check_residual_max, (A - A_basis).cwiseAbs().maxCoeff());
    }
    return field;
}

Mat basis_representation_A(const SystemSpec& Phi, const SystemSpec& Psi, const ChartPoint& x) {
    require_action(Phi);
    const int dim = Phi.dim(), d = Phi.rank();
    const Mat X = orbit_matrix(Phi, x);
    Eigen::JacobiSVD<Mat> svd(X);
    if (svd.singularValues().minCoeff() < 1e-10)
        throw DegenerateBasisError("orbit basis is rank-deficient");

    Mat Y(dim, d);
    const double h = kDerivativeStep;
    for (int i = 0; i < d; ++i) {
        Vec up = Vec::Zero(d), dn = Vec::Zero(d);
        up[i] = h;
        dn[i] = -h;
        Y.col(i) = Phi.displacement(Psi.evaluate_action(dn, x), Psi.evaluate_action(up, x)) /
                   (2.0 * h);
    }
    const Mat A = X.colPivHouseholderQr().solve(Y);
    const double residual = (X * A - Y).cwiseAbs().maxCoeff();
    if (residual > 1e-8)
        throw BoundViolationError("basis representation solve residual " +
                                  std::to_string(residual) + " exceeds 1e-8");
    return A;
}

} // namespace sepflow
