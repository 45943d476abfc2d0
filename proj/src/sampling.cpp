#include "sepflow/sampling.hpp"

#include <cmath>

#include "sepflow/system.hpp"

namespace sepflow::sampling {

double Rng::normal() {
    // Box-Muller. u1 is kept away from zero so the log stays finite.
    double u1 = uniform();
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Vec Rng::unit_vector(int dim) {
    Vec v(dim);
    double n = 0.0;
    do {
        for (int i = 0; i < dim; ++i) v[i] = normal();
        n = v.norm();
    } while (n < 1e-12);
    return v / n;
}

namespace {

constexpr int kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19};

double radical_inverse(int base, int index) {
    double inv = 1.0 / base;
    double factor = inv;
    double value = 0.0;
    while (index > 0) {
        value += factor * (index % base);
        index /= base;
        factor *= inv;
    }
    return value;
}

} // namespace

std::vector<Vec> halton_points(int count, int dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> shift(dim);
    for (int j = 0; j < dim; ++j) shift[j] = rng.uniform();

    std::vector<Vec> points;
    points.reserve(count);
    for (int i = 0; i < count; ++i) {
        Vec p(dim);
        for (int j = 0; j < dim; ++j) {
            const int base = kHaltonBases[j % (sizeof(kHaltonBases) / sizeof(int))];
            double v = radical_inverse(base, i + 1) + shift[j];
            v -= std::floor(v);
            p[j] = v;
        }
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return grid;
}

std::vector<ChartPoint> sample_points(const SystemSpec& sys, int count, std::uint64_t seed) {
    const auto raw = halton_points(count, sys.dim(), seed);
    const int ncomp = sys.component_count();
    std::vector<ChartPoint> pts;
    pts.reserve(count);
    for (int i = 0; i < count; ++i) {
        Vec c = raw[i];
        if (sys.kind() == SystemKind::suspension_flow ||
            sys.kind() == SystemKind::suspension_base_drift) {
            c[2] *= sys.roof();
        } else if (sys.kind() == SystemKind::disjoint_union) {
            const auto& comp = sys.components()[i % ncomp];
            if (comp.kind() == SystemKind::suspension_flow ||
                comp.kind() == SystemKind::suspension_base_drift)
                c[2] *= comp.roof();
        }
        pts.push_back(sys.point(std::move(c), i % ncomp));
    }
    return pts;
}

} // namespace sepflow::sampling
