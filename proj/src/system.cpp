#include "sepflow/system.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "sepflow/errors.hpp"
#include "sepflow/sampling.hpp"

namespace sepflow {

namespace {

constexpr double kOdeFieldStep = 1e-5; // central-difference step for rk4 fields

double mod1(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

/// Signed representative of x mod 1 in [-0.5, 0.5].
double wrap_diff(double x) { return x - std::round(x); }

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double torus_distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double w = wrap_diff(a[i] - b[i]);
        s += w * w;
    }
    return std::sqrt(s);
}

} // namespace

int SystemSpec::component_count() const {
    return kind_ == SystemKind::disjoint_union ? static_cast<int>(components_.size()) : 1;
}

void SystemSpec::finalize() {
    std::string desc;
    switch (kind_) {
        case SystemKind::torus_translation_flow:
        case SystemKind::torus_linear_ode_flow:
        case SystemKind::torus_translation_action:
            desc = "torus:" + std::to_string(dim_);
            metric_window_ = 0.25 * 0.5 * std::sqrt(static_cast<double>(dim_));
            break;
        case SystemKind::suspension_flow:
        case SystemKind::suspension_base_drift: {
            desc = "maptorus:";
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    desc += std::to_string(static_cast<long long>(base_matrix_(r, c))) + ",";
            desc += format_real(roof_);
            metric_window_ = 0.25 * std::sqrt(0.5 + 0.25 * roof_ * roof_);
            break;
        }
        case SystemKind::disjoint_union: {
            desc = "union:";
            metric_window_ = std::numeric_limits<double>::infinity();
            for (const auto& comp : components_) {
                desc += std::to_string(comp.geometry_hash_) + ",";
                metric_window_ = std::min(metric_window_, comp.metric_window_);
            }
            break;
        }
    }
    geometry_hash_ = fnv1a(desc);
}

SystemSpec SystemSpec::torus_translation_flow(Vec direction, double time_scale) {
    if (direction.size() < 1) throw InvalidArgumentError("translation flow needs dim >= 1");
    if (direction.norm() == 0.0 || time_scale == 0.0)
        throw InvalidArgumentError("translation flow has a vanishing generator (fixed points)");
    SystemSpec s;
    s.kind_ = SystemKind::torus_translation_flow;
    s.dim_ = static_cast<int>(direction.size());
    s.direction_ = std::move(direction);
    s.time_scale_ = time_scale;
    s.finalize();
    return s;
}

SystemSpec SystemSpec::torus_linear_ode_flow(Vec direction, double rk4_step, double time_scale) {
    SystemSpec s = torus_translation_flow(std::move(direction), time_scale);
    if (!(rk4_step > 0.0)) throw InvalidArgumentError("rk4 step must be positive");
    s.kind_ = SystemKind::torus_linear_ode_flow;
    s.integrator_ = IntegratorKind::rk4;
    s.rk4_step_ = rk4_step;
    s.finalize();
    return s;
}

SystemSpec SystemSpec::suspension_flow(const Eigen::Matrix2<long long>& base_matrix, double roof,
                                       double time_scale) {
    const long long det =
        base_matrix(0, 0) * base_matrix(1, 1) - base_matrix(0, 1) * base_matrix(1, 0);
    if (det != 1 && det != -1)
        throw InvalidArgumentError("suspension base matrix must have |det| = 1");
    if (!(roof > 0.0)) throw InvalidArgumentError("suspension roof must be positive");
    if (time_scale == 0.0) throw InvalidArgumentError("zero time scale gives fixed points");
    SystemSpec s;
    s.kind_ = SystemKind::suspension_flow;
    s.dim_ = 3;
    s.roof_ = roof;
    s.time_scale_ = time_scale;
    s.base_matrix_ = base_matrix.cast<double>();
    // |det| = 1, so the inverse has integer entries as well.
    Eigen::Matrix2<long long> inv;
    inv << base_matrix(1, 1), -base_matrix(0, 1), -base_matrix(1, 0), base_matrix(0, 0);
    s.base_inverse_ = (inv.cast<double>()) / static_cast<double>(det);
    s.finalize();
    return s;
}

SystemSpec SystemSpec::suspension_base_drift(const Eigen::Matrix2<long long>& base_matrix,
                                             double roof, Eigen::Vector2d drift) {
    SystemSpec s = suspension_flow(base_matrix, roof, 1.0);
    if (drift.norm() == 0.0) throw InvalidArgumentError("drift control needs a nonzero direction");
    s.kind_ = SystemKind::suspension_base_drift;
    s.drift_ = drift;
    s.finalize();
    return s;
}

SystemSpec SystemSpec::disjoint_union(std::vector<SystemSpec> components) {
    if (components.empty()) throw InvalidArgumentError("disjoint union needs >= 1 component");
    const int dim = components.front().dim_;
    for (const auto& c : components) {
        if (c.kind_ == SystemKind::disjoint_union)
            throw InvalidArgumentError("nested disjoint unions are not supported");
        if (c.dim_ != dim)
            throw InvalidArgumentError("disjoint union components must share a chart dimension");
        if (c.rank_ != 1) throw InvalidArgumentError("disjoint unions hold flows only");
    }
    SystemSpec s;
    s.kind_ = SystemKind::disjoint_union;
    s.dim_ = dim;
    s.components_ = std::move(components);
    s.finalize();
    return s;
}

SystemSpec SystemSpec::torus_translation_action(Mat directions) {
    if (directions.rows() < 1 || directions.cols() < 1)
        throw InvalidArgumentError("action direction matrix must be dim x d");
    if (directions.cols() > directions.rows())
        throw InvalidArgumentError("action rank exceeds manifold dimension");
    Eigen::JacobiSVD<Mat> svd(directions);
    if (svd.singularValues().minCoeff() < 1e-12)
        throw InvalidArgumentError(
            "action directions are linearly dependent (orbits would drop rank)");
    SystemSpec s;
    s.kind_ = SystemKind::torus_translation_action;
    s.dim_ = static_cast<int>(directions.rows());
    s.rank_ = static_cast<int>(directions.cols());
    s.directions_ = std::move(directions);
    s.finalize();
    return s;
}

SystemSpec SystemSpec::reparameterized(double factor) const {
    if (factor == 0.0) throw InvalidArgumentError("zero reparameterization gives fixed points");
    SystemSpec s = *this;
    if (s.kind_ == SystemKind::disjoint_union) {
        for (auto& c : s.components_) c.time_scale_ *= factor;
    } else {
        s.time_scale_ *= factor;
    }
    return s;
}

SystemSpec SystemSpec::direction_flow(const Vec& v) const {
    if (!is_action()) throw InvalidArgumentError("direction_flow requires an action");
    if (v.size() != rank_) throw InvalidArgumentError("direction vector has wrong length");
    return torus_translation_flow(directions_ * v);
}

ChartPoint SystemSpec::point(Vec coords, int component) const {
    if (coords.size() != dim_) throw InvalidArgumentError("coordinate length mismatch");
    if (component < 0 || component >= component_count())
        throw InvalidArgumentError("component index out of range");
    ChartPoint p{ManifoldId{geometry_hash_, component}, std::move(coords)};
    return normalize(p);
}

bool SystemSpec::owns(const ChartPoint& p) const {
    return p.system_id.geometry == geometry_hash_ && p.system_id.component >= 0 &&
           p.system_id.component < component_count() && p.coords.size() == dim_;
}

ChartPoint SystemSpec::normalize(const ChartPoint& p) const {
    ChartPoint out = p;
    switch (kind_) {
        case SystemKind::torus_translation_flow:
        case SystemKind::torus_linear_ode_flow:
        case SystemKind::torus_translation_action:
            for (int i = 0; i < dim_; ++i) out.coords[i] = mod1(out.coords[i]);
            return out;
        case SystemKind::suspension_flow:
        case SystemKind::suspension_base_drift: {
            Eigen::Vector2d base(out.coords[0], out.coords[1]);
            double h = out.coords[2];
            long long k = static_cast<long long>(std::floor(h / roof_));
            if (std::llabs(k) > 1000000)
                throw InvalidArgumentError("flow time exceeds the supported deck range");
            h -= static_cast<double>(k) * roof_;
            if (h >= roof_) { // rounding right at the gluing
                h -= roof_;
                k += 1;
            }
            const Eigen::Matrix2d& step = (k >= 0) ? base_matrix_ : base_inverse_;
            for (long long i = 0; i < std::llabs(k); ++i) {
                base = step * base;
                base[0] = mod1(base[0]);
                base[1] = mod1(base[1]);
            }
            out.coords[0] = mod1(base[0]);
            out.coords[1] = mod1(base[1]);
            out.coords[2] = h;
            return out;
        }
        case SystemKind::disjoint_union: {
            const auto& comp = components_[out.system_id.component];
            ChartPoint local{ManifoldId{comp.geometry_hash_, 0}, out.coords};
            out.coords = comp.normalize(local).coords;
            return out;
        }
    }
    return out;
}

Vec SystemSpec::field_at(const Vec& coords, int component) const {
    switch (kind_) {
        case SystemKind::torus_translation_flow:
        case SystemKind::torus_linear_ode_flow:
            return direction_;
        case SystemKind::suspension_flow: {
            Vec f = Vec::Zero(3);
            f[2] = 1.0;
            return f;
        }
        case SystemKind::suspension_base_drift: {
            Vec f = Vec::Zero(3);
            f[0] = drift_[0];
            f[1] = drift_[1];
            return f;
        }
        case SystemKind::disjoint_union:
            return components_[component].field_at(coords, 0);
        case SystemKind::torus_translation_action:
            throw InvalidArgumentError("actions have no single generating field");
    }
    throw InvalidArgumentError("unhandled kind");
}

ChartPoint SystemSpec::evaluate_flow_component(double t, const ChartPoint& x) const {
    const double te = t * time_scale_;
    ChartPoint out = x;
    switch (kind_) {
        case SystemKind::torus_translation_flow:
            out.coords += te * direction_;
            return normalize(out);
        case SystemKind::torus_linear_ode_flow: {
            // Classical fixed-step RK4 on the chart lift; the step count is
            // chosen so the substep never exceeds the configured step.
            if (std::fabs(te) / rk4_step_ > 2e6)
                throw InvalidArgumentError("flow time exceeds the supported step budget");
            const int n = std::max(1, static_cast<int>(std::ceil(std::fabs(te) / rk4_step_)));
            const double h = te / n;
            Vec y = out.coords;
            for (int s = 0; s < n; ++s) {
                const Vec k1 = field_at(y, 0);
                const Vec k2 = field_at(y + 0.5 * h * k1, 0);
                const Vec k3 = field_at(y + 0.5 * h * k2, 0);
                const Vec k4 = field_at(y + h * k3, 0);
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            out.coords = y;
            return normalize(out);
        }
        case SystemKind::suspension_flow:
            out.coords[2] += te;
            return normalize(out);
        case SystemKind::suspension_base_drift:
            out.coords[0] += te * drift_[0];
            out.coords[1] += te * drift_[1];
            return normalize(out);
        case SystemKind::torus_translation_action: {
            if (rank_ != 1)
                throw InvalidArgumentError("evaluate_flow on an action requires rank 1");
            out.coords += te * directions_.col(0);
            return normalize(out);
        }
        case SystemKind::disjoint_union:
            break; // handled by the caller
    }
    throw InvalidArgumentError("unhandled kind");
}

ChartPoint SystemSpec::evaluate_flow(double t, const ChartPoint& x) const {
    if (!std::isfinite(t)) throw InvalidArgumentError("flow time must be finite");
    if (!owns(x)) throw DomainMismatchError("point belongs to a different system");
    if (kind_ == SystemKind::disjoint_union) {
        const auto& comp = components_[x.system_id.component];
        ChartPoint local{ManifoldId{comp.geometry_hash_, 0}, x.coords};
        ChartPoint moved = comp.evaluate_flow(t, local);
        return ChartPoint{x.system_id, std::move(moved.coords)};
    }
    return evaluate_flow_component(t, x);
}

ChartPoint SystemSpec::evaluate_action(const Vec& v, const ChartPoint& x) const {
    if (v.size() != rank_) throw InvalidArgumentError("action vector has wrong length");
    for (int i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) throw InvalidArgumentError("action vector must be finite");
    if (!owns(x)) throw DomainMismatchError("point belongs to a different system");
    if (kind_ == SystemKind::torus_translation_action) {
        ChartPoint out = x;
        out.coords += directions_ * v;
        return normalize(out);
    }
    return evaluate_flow(v[0], x);
}

double SystemSpec::distance(const ChartPoint& x, const ChartPoint& y) const {
    if (!owns(x) || !owns(y)) throw DomainMismatchError("points belong to a different system");
    if (x.system_id.component != y.system_id.component)
        return std::numeric_limits<double>::infinity(); // incomparable
    switch (kind_) {
        case SystemKind::torus_translation_flow:
        case SystemKind::torus_linear_ode_flow:
        case SystemKind::torus_translation_action:
            return torus_distance(x.coords, y.coords);
        case SystemKind::suspension_flow:
        case SystemKind::suspension_base_drift: {
            // Product metric minimized over one deck step of either endpoint.
            // Shifting both endpoints together is not allowed: the base
            // matrix is no isometry, so a common shift would fabricate
            // shortcuts along its contracting direction.
            Eigen::Vector2d bx(x.coords[0], x.coords[1]), by(y.coords[0], y.coords[1]);
            const double hx = x.coords[2], hy = y.coords[2];
            const Eigen::Vector2d rx[3] = {bx, base_matrix_ * bx, base_inverse_ * bx};
            const Eigen::Vector2d ry[3] = {by, base_matrix_ * by, base_inverse_ * by};
            const double sx[3] = {hx, hx - roof_, hx + roof_};
            const double sy[3] = {hy, hy - roof_, hy + roof_};
            auto prod = [&](int i, int j) {
                const double db0 = wrap_diff(rx[i][0] - ry[j][0]);
                const double db1 = wrap_diff(rx[i][1] - ry[j][1]);
                const double dh = sx[i] - sy[j];
                return std::sqrt(db0 * db0 + db1 * db1 + dh * dh);
            };
            return std::min({prod(0, 0), prod(1, 0), prod(2, 0), prod(0, 1), prod(0, 2)});
        }
        case SystemKind::disjoint_union: {
            const auto& comp = components_[x.system_id.component];
            ChartPoint lx{ManifoldId{comp.geometry_hash_, 0}, x.coords};
            ChartPoint ly{ManifoldId{comp.geometry_hash_, 0}, y.coords};
            return comp.distance(lx, ly);
        }
    }
    throw InvalidArgumentError("unhandled kind");
}

Vec SystemSpec::displacement(const ChartPoint& from, const ChartPoint& to) const {
    if (!owns(from) || !owns(to)) throw DomainMismatchError("points belong to a different system");
    if (from.system_id.component != to.system_id.component)
        throw DomainMismatchError("displacement across disjoint components is undefined");
    switch (kind_) {
        case SystemKind::torus_translation_flow:
        case SystemKind::torus_linear_ode_flow:
        case SystemKind::torus_translation_action: {
            Vec d(dim_);
            for (int i = 0; i < dim_; ++i) d[i] = wrap_diff(to.coords[i] - from.coords[i]);
            return d;
        }
        case SystemKind::suspension_flow:
        case SystemKind::suspension_base_drift: {
            // Only `to` is moved through the gluing; adding the result to
            // `from` and normalizing recovers `to` exactly.
            Eigen::Vector2d bt(to.coords[0], to.coords[1]);
            const double ht = to.coords[2];
            Eigen::Vector2d rep_base[3] = {bt, base_matrix_ * bt, base_inverse_ * bt};
            const double rep_h[3] = {ht, ht - roof_, ht + roof_};
            double best = std::numeric_limits<double>::infinity();
            Vec d(3);
            for (int j = 0; j < 3; ++j) {
                const double db0 = wrap_diff(rep_base[j][0] - from.coords[0]);
                const double db1 = wrap_diff(rep_base[j][1] - from.coords[1]);
                const double dh = rep_h[j] - from.coords[2];
                const double val = std::sqrt(db0 * db0 + db1 * db1 + dh * dh);
                if (val < best) {
                    best = val;
                    d << db0, db1, dh;
                }
            }
            return d;
        }
        case SystemKind::disjoint_union: {
            const auto& comp = components_[from.system_id.component];
            ChartPoint lf{ManifoldId{comp.geometry_hash_, 0}, from.coords};
            ChartPoint lt{ManifoldId{comp.geometry_hash_, 0}, to.coords};
            return comp.displacement(lf, lt);
        }
    }
    throw InvalidArgumentError("unhandled kind");
}

TangentVector SystemSpec::vector_field(int i, const ChartPoint& x) const {
    if (i < 1 || i > rank_) throw InvalidArgumentError("vector field index out of range");
    if (!owns(x)) throw DomainMismatchError("point belongs to a different system");
    TangentVector tv{x, Vec::Zero(dim_)};
    switch (kind_) {
        case SystemKind::torus_translation_flow:
            tv.components = time_scale_ * direction_;
            return tv;
        case SystemKind::torus_linear_ode_flow: {
            // Central difference of the integrated flow.
            const ChartPoint fwd = evaluate_flow(kOdeFieldStep, x);
            const ChartPoint bwd = evaluate_flow(-kOdeFieldStep, x);
            tv.components = displacement(bwd, fwd) / (2.0 * kOdeFieldStep);
            return tv;
        }
        case SystemKind::suspension_flow:
            tv.components[2] = time_scale_;
            return tv;
        case SystemKind::suspension_base_drift:
            tv.components[0] = time_scale_ * drift_[0];
            tv.components[1] = time_scale_ * drift_[1];
            return tv;
        case SystemKind::torus_translation_action:
            tv.components = directions_.col(i - 1);
            return tv;
        case SystemKind::disjoint_union: {
            const auto& comp = components_[x.system_id.component];
            ChartPoint local{ManifoldId{comp.geometry_hash_, 0}, x.coords};
            TangentVector sub = comp.vector_field(i, local);
            tv.components = std::move(sub.components);
            return tv;
        }
    }
    throw InvalidArgumentError("unhandled kind");
}

} // namespace sepflow
