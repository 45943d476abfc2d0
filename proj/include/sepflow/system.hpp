#ifndef SEPFLOW_SYSTEM_HPP
#define SEPFLOW_SYSTEM_HPP

#include <cstdint>
#include <vector>

#include "sepflow/geometry.hpp"

namespace sepflow {

enum class SystemKind {
    torus_translation_flow,
    torus_linear_ode_flow,
    suspension_flow,
    suspension_base_drift, // diagnostic control; not continuous on the quotient
    disjoint_union,
    torus_translation_action,
};

enum class IntegratorKind { closed_form, rk4 };

/// A concrete flow or R^d-action on a flat torus or a mapping torus, with
/// point arithmetic, a locally accurate metric, and flow/action evaluation.
/// Immutable after construction; all operations are pure and safe to call
/// concurrently.
class SystemSpec {
public:
    /// Empty spec; usable only as a placeholder before assignment.
    SystemSpec() = default;

    // Factories validate their inputs (fixed-point-freeness, unimodular base
    // matrix, independent action directions) and throw InvalidArgumentError.
    static SystemSpec torus_translation_flow(Vec direction, double time_scale = 1.0);
    static SystemSpec torus_linear_ode_flow(Vec direction, double rk4_step = 0.005,
                                            double time_scale = 1.0);
    static SystemSpec suspension_flow(const Eigen::Matrix2<long long>& base_matrix, double roof,
                                      double time_scale = 1.0);
    static SystemSpec suspension_base_drift(const Eigen::Matrix2<long long>& base_matrix,
                                            double roof, Eigen::Vector2d drift);
    static SystemSpec disjoint_union(std::vector<SystemSpec> components);
    static SystemSpec torus_translation_action(Mat directions);

    SystemKind kind() const { return kind_; }
    int dim() const { return dim_; }
    /// Action rank d; 1 for flows.
    int rank() const { return rank_; }
    bool is_action() const { return kind_ == SystemKind::torus_translation_action; }
    double time_scale() const { return time_scale_; }
    IntegratorKind integrator() const { return integrator_; }
    /// Radius within which the implemented metric is certified accurate.
    double metric_window() const { return metric_window_; }
    double roof() const { return roof_; }
    const Mat& action_directions() const { return directions_; }
    const std::vector<SystemSpec>& components() const { return components_; }
    int component_count() const;
    std::uint64_t geometry_hash() const { return geometry_hash_; }

    /// Builds a normalized point of this system from raw chart coordinates.
    ChartPoint point(Vec coords, int component = 0) const;
    /// Normalizes coordinates into the fundamental domain (idempotent).
    ChartPoint normalize(const ChartPoint& p) const;
    bool owns(const ChartPoint& p) const;

    /// phi_t(x). Closed-form systems are exact; rk4 systems accurate to the
    /// integrator tolerance. Requires rank 1.
    ChartPoint evaluate_flow(double t, const ChartPoint& x) const;

    /// Phi_v(x) for a rank-d action (flows accept d = 1 vectors).
    ChartPoint evaluate_action(const Vec& v, const ChartPoint& x) const;

    /// Flat quotient metric on tori; local product metric minimized over the
    /// gluing identifications (one deck step) on mapping tori. Cross-component
    /// distances report +infinity.
    double distance(const ChartPoint& x, const ChartPoint& y) const;

    /// Chart difference from `from` to `to`, minimized over the local
    /// identifications, such that from.coords + result normalizes to `to`.
    /// Only meaningful within metric_window().
    Vec displacement(const ChartPoint& from, const ChartPoint& to) const;

    /// Generating vector field X_i(x), i in 1..rank(). Exact for closed-form
    /// systems; central finite difference for rk4 systems.
    TangentVector vector_field(int i, const ChartPoint& x) const;

    /// Copy of this system with the flow time scaled: result_t = this_{factor*t}.
    SystemSpec reparameterized(double factor) const;

    /// The flow t -> Phi_{t v} generated by direction v of an action.
    SystemSpec direction_flow(const Vec& v) const;

private:
    void finalize();
    ChartPoint evaluate_flow_component(double t, const ChartPoint& x) const;
    Vec field_at(const Vec& coords, int component) const; // raw chart field, rank-1 kinds

    SystemKind kind_ = SystemKind::torus_translation_flow;
    int dim_ = 0;
    int rank_ = 1;
    double time_scale_ = 1.0;
    IntegratorKind integrator_ = IntegratorKind::closed_form;
    double rk4_step_ = 0.005;
    double metric_window_ = 0.25;
    double roof_ = 0.0;
    Vec direction_;                    // translation / ode flows
    Mat directions_;                   // actions: dim x d
    Eigen::Matrix2d base_matrix_;      // suspensions (integer entries)
    Eigen::Matrix2d base_inverse_;     // exact integer inverse (|det| = 1)
    Eigen::Vector2d drift_ = {0, 0};   // suspension_base_drift
    std::vector<SystemSpec> components_;
    std::uint64_t geometry_hash_ = 0;
};

} // namespace sepflow

#endif
