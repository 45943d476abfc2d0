#ifndef SEPFLOW_GEOMETRY_HPP
#define SEPFLOW_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cstdint>

namespace sepflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Identifies the manifold a point lives on. Two systems share points iff
/// their geometry hashes agree (e.g. a flow and its reparameterization, or
/// two translation flows on the same torus). The component index selects a
/// piece of a disjoint union; distances across components are undefined.
struct ManifoldId {
    std::uint64_t geometry = 0;
    int component = 0;

    bool same_manifold(const ManifoldId& other) const { return geometry == other.geometry; }
    bool operator==(const ManifoldId&) const = default;
};

/// A point in fundamental-domain coordinates: torus coordinates in [0,1)^n,
/// mapping-torus points as (base in [0,1)^2, height in [0, roof)).
struct ChartPoint {
    ManifoldId system_id;
    Vec coords;
};

/// A tangent vector in the flat chart of the fundamental domain.
struct TangentVector {
    ChartPoint base;
    Vec components;
};

} // namespace sepflow

#endif
