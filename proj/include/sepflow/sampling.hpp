#ifndef SEPFLOW_SAMPLING_HPP
#define SEPFLOW_SAMPLING_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "sepflow/geometry.hpp"

namespace sepflow::sampling {

/// Deterministic random source. mt19937_64 output is fully specified by the
/// standard; the uniform/normal transforms below avoid the
/// implementation-defined std:: distributions so that identical seeds give
/// identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (no state cached between calls).
    double normal();

    /// Uniform direction on the unit sphere in R^dim.
    Vec unit_vector(int dim);

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

/// First `count` points of a seeded Halton sequence in [0,1)^dim
/// (Cranley-Patterson rotation by a per-dimension shift derived from the
/// seed). Prefixes are nested: the first k points of an n-point request
/// equal the k-point request for the same seed.
std::vector<Vec> halton_points(int count, int dim, std::uint64_t seed);

/// Evenly spaced grid including both endpoints (n >= 2).
std::vector<double> linspace(double lo, double hi, int n);

class SystemSpecSampler;

} // namespace sepflow::sampling

namespace sepflow {
class SystemSpec;

namespace sampling {

/// Low-discrepancy points over the fundamental domain of a system. Disjoint
/// unions cycle through their components; mapping-torus heights are scaled to
/// [0, roof). Prefixes are nested like halton_points.
std::vector<ChartPoint> sample_points(const SystemSpec& sys, int count, std::uint64_t seed);

} // namespace sampling
} // namespace sepflow

#endif
