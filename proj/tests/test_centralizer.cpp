#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "sepflow/centralizer.hpp"
#include "sepflow/constants.hpp"
#include "sepflow/errors.hpp"
#include "sepflow/sampling.hpp"

using namespace sepflow;

namespace {

SystemSpec circle_flow() {
    Vec v(1);
    v << 1.0;
    return SystemSpec::torus_translation_flow(v);
}

const FlowConstants& circle_constants() {
    // default T0 placement (0.4 x epsilon0) so that mu covers z values up
    // to 0.02
    static const FlowConstants c = [] {
        const SystemSpec sys = circle_flow();
        return calibrate_local_constants(sys, 0.4, eta_for(sys, 0.4, 256), 1.0);
    }();
    return c;
}

const FlowConstants& cat_constants() {
    static const FlowConstants c = [] {
        const SystemSpec sys = oracle::cat_suspension();
        return calibrate_local_constants(sys, 0.4, eta_for(sys, 0.4, 256), 1.0);
    }();
    return c;
}

SystemSpec broken_drift() {
    Eigen::Matrix2<long long> M;
    M << 2, 1, 1, 1;
    return SystemSpec::suspension_base_drift(M, 1.0, {0.3, 0.2});
}

} // namespace

TEST_CASE("commutation check") {
    SUBCASE("a translation flow commutes with itself to rounding") {
        // (x + tv) + sv and (x + sv) + tv differ by addition order, so the
        // self residual sits at the ulp level rather than literal zero
        const SystemSpec phi = oracle::irrational_translation_T2();
        CHECK(check_commutation(phi, phi, 100, 1) <= 1e-14);
    }
    SUBCASE("reparameterizations commute by the group law") {
        const SystemSpec phi = oracle::cat_suspension();
        CHECK(check_commutation(phi, phi.reparameterized(2.0), 100, 2) <= 1e-9);
    }
    SUBCASE("a base drift against the suspension flow fails loudly but is reported") {
        const SystemSpec phi = oracle::cat_suspension();
        const double residual = check_commutation(phi, broken_drift(), 100, 3);
        CHECK(residual > 0.01);
    }
    SUBCASE("mismatched manifolds are rejected") {
        CHECK_THROWS_AS(check_commutation(oracle::cat_suspension(), circle_flow(), 10, 4),
                        DomainMismatchError);
    }
}

TEST_CASE("cocycle recovery at a point") {
    SUBCASE("s = 0 recovers z = 0 with zero residual") {
        const SystemSpec phi = circle_flow();
        const CocycleSample s =
            recover_z(phi, phi.reparameterized(2.0), circle_constants(), 0.0,
                      phi.point(Vec::Constant(1, 0.4)));
        CHECK(s.z == 0.0);
        CHECK(s.residual == 0.0);
    }
    SUBCASE("doubled time on the circle gives z = 2s") {
        const SystemSpec phi = circle_flow();
        const CocycleSample s =
            recover_z(phi, phi.reparameterized(2.0), circle_constants(), 0.01,
                      phi.point(Vec::Constant(1, 0.7)));
        CHECK(std::fabs(s.z - 0.02) <= 1e-9);
        CHECK(s.residual <= kTolMatch);
    }
    SUBCASE("suspension rescaled by 1.37 gives z = 1.37 s") {
        const SystemSpec phi = oracle::cat_suspension();
        const SystemSpec psi = phi.reparameterized(1.37);
        Vec c(3);
        c << 0.21, 0.55, 0.33;
        const CocycleSample s = recover_z(phi, psi, cat_constants(), 0.005, phi.point(c));
        CHECK(std::fabs(s.z - 0.00685) <= 1e-9);
    }
    SUBCASE("antisymmetry z(-s) = -z(s)") {
        const SystemSpec phi = oracle::cat_suspension();
        const SystemSpec psi = phi.reparameterized(1.37);
        const auto pts = sampling::sample_points(phi, 20, 5);
        for (const auto& x : pts) {
            const double zp = recover_z(phi, psi, cat_constants(), 0.004, x).z;
            const double zm = recover_z(phi, psi, cat_constants(), -0.004, x).z;
            CHECK(std::fabs(zp + zm) <= 1e-8);
        }
    }
    SUBCASE("off-orbit targets raise no-match") {
        const SystemSpec phi = oracle::cat_suspension();
        Vec c(3);
        c << 0.4, 0.6, 0.5;
        CHECK_THROWS_AS(recover_z(phi, broken_drift(), cat_constants(), 0.004, phi.point(c)),
                        NoMatchError);
    }
}

TEST_CASE("cocycle identities") {
    SUBCASE("identity reparameterization") {
        const SystemSpec phi = oracle::cat_suspension();
        const CocycleResiduals r = verify_cocycle(phi, phi, cat_constants(), 60, 6);
        CHECK(r.additivity <= 1e-9);
        CHECK(r.invariance <= 1e-9);
        CHECK(r.linearity <= 1e-9);
    }
    SUBCASE("doubled circle time") {
        const SystemSpec phi = circle_flow();
        const CocycleResiduals r =
            verify_cocycle(phi, phi.reparameterized(2.0), circle_constants(), 60, 7);
        CHECK(r.additivity <= 1e-9);
        CHECK(r.invariance <= 1e-9);
        CHECK(r.linearity <= 1e-9);
    }
    SUBCASE("suspension rescale") {
        const SystemSpec phi = oracle::cat_suspension();
        const CocycleResiduals r =
            verify_cocycle(phi, phi.reparameterized(1.37), cat_constants(), 60, 8);
        CHECK(r.additivity <= 1e-7);
        CHECK(r.invariance <= 1e-7);
        CHECK(r.linearity <= 1e-7);
    }
}

TEST_CASE("reparameterization field recovery") {
    SUBCASE("A is identically 2 for doubled time") {
        const SystemSpec phi = oracle::cat_suspension();
        const auto pts = sampling::sample_points(phi, 40, 9);
        const ReparamField field =
            recover_A_flow(phi, phi.reparameterized(2.0), cat_constants(), pts);
        REQUIRE(field.samples.size() == 40);
        for (const auto& s : field.samples) CHECK(std::fabs(s.value - 2.0) <= 1e-8);
        CHECK(field.invariance_residual_max <= 1e-6);
    }
    SUBCASE("A is identically 1 for the flow itself") {
        const SystemSpec phi = oracle::cat_suspension();
        const auto pts = sampling::sample_points(phi, 10, 10);
        const ReparamField field = recover_A_flow(phi, phi, cat_constants(), pts);
        for (const auto& s : field.samples) CHECK(std::fabs(s.value - 1.0) <= 1e-9);
    }
    SUBCASE("piecewise constants on a two-component union") {
        const SystemSpec phi =
            SystemSpec::disjoint_union({oracle::cat_suspension(), oracle::cat_suspension()});
        const SystemSpec psi =
            SystemSpec::disjoint_union({oracle::cat_suspension(1.0), oracle::cat_suspension(3.0)});
        const double eta = eta_for(phi, 0.4, 256);
        const FlowConstants c = calibrate_local_constants(phi, 0.4, eta, 1.0);
        const auto pts = sampling::sample_points(phi, 40, 11);
        const ReparamField field = recover_A_flow(phi, psi, c, pts);
        int seen0 = 0, seen1 = 0;
        for (const auto& s : field.samples) {
            const double expect = s.x.system_id.component == 0 ? 1.0 : 3.0;
            (s.x.system_id.component == 0 ? seen0 : seen1)++;
            CHECK(std::fabs(s.value - expect) <= 1e-6);
        }
        CHECK(seen0 > 0);
        CHECK(seen1 > 0);
        CHECK(field.invariance_residual_max <= 1e-6); // invariant per orbit, not globally
    }
    SUBCASE("recovering from a and a/2 agrees") {
        const SystemSpec phi = oracle::cat_suspension();
        const SystemSpec psi = phi.reparameterized(1.37);
        const auto pts = sampling::sample_points(phi, 12, 12);
        const double a = choose_cocycle_window(phi, psi, cat_constants(), pts);
        for (const auto& x : pts) {
            const double A1 = recover_z(phi, psi, cat_constants(), a, x).z / a;
            const double A2 = recover_z(phi, psi, cat_constants(), a / 2, x).z / (a / 2);
            CHECK(std::fabs(A1 - A2) <= 1e-8);
        }
    }
}

TEST_CASE("quasi-triviality verification") {
    const SystemSpec phi = oracle::cat_suspension();

    SUBCASE("doubled time within 1e-8 out to horizon 20") {
        const auto pts = sampling::sample_points(phi, 25, 13);
        const SystemSpec psi = phi.reparameterized(2.0);
        const ReparamField field = recover_A_flow(phi, psi, cat_constants(), pts);
        CHECK(verify_quasitrivial(phi, psi, field, 20.0) <= 1e-8);
    }
    SUBCASE("a wrong field is falsified, not thrown") {
        const SystemSpec psi = phi.reparameterized(2.0);
        ReparamField fake;
        fake.a = 0.001;
        const auto pts = sampling::sample_points(phi, 5, 14);
        for (const auto& x : pts) fake.samples.push_back({x, 1.0, 0.0}); // A = 1 is wrong
        CHECK(verify_quasitrivial(phi, psi, fake, 20.0) > cat_constants().delta);
    }
}

TEST_CASE("orbit coincidence for action direction flows") {
    const SystemSpec action = oracle::translation_action_T3();
    Vec v(2), u(2);
    v << 1.0, 0.0;

    SUBCASE("u = v lies on its own orbit with zero residual") {
        u = v;
        const OrbitCoincidence oc = check_orbit_coincidence(action, v, u, 12, 10.0);
        CHECK(oc.coincident);
        CHECK(oc.residual == 0.0);
    }
    SUBCASE("u = 2v is a reparameterization of the same orbits") {
        u = 2.0 * v;
        const OrbitCoincidence oc = check_orbit_coincidence(action, v, u, 12, 10.0);
        CHECK(oc.coincident);
        CHECK(oc.residual <= 1e-9);
    }
    SUBCASE("independent directions genuinely leave the orbit") {
        u << 0.0, 1.0;
        const OrbitCoincidence oc = check_orbit_coincidence(action, v, u, 12, 10.0);
        CHECK_FALSE(oc.coincident);
    }
}
