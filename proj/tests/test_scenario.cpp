#include <doctest.h>

#include <cmath>

#include "sepflow/errors.hpp"
#include "sepflow/report_io.hpp"
#include "sepflow/scenario.hpp"

using namespace sepflow;

namespace {

ordered_json minimal_config() {
    ordered_json doc;
    doc["name"] = "tiny";
    doc["seed"] = 7;
    doc["phi"] = {{"kind", "torus-translation-flow"}, {"direction", {1.0, std::sqrt(2.0)}}};
    doc["psi"] = {{"kind", "reparam"}, {"factor", 2.0}};
    doc["expected"] = {{"A", 2.0}, {"min-separated-fraction", 0.0}};
    doc["samples"] = {{"points", 12},   {"pairs", 10},   {"charts", 4},
                      {"cocycle", 12},  {"commutation", 20}, {"audit", 16},
                      {"eta", 64},      {"epsilon0", 16}};
    return doc;
}

ScenarioConfig small_builtin(const std::string& name) {
    const ScenarioConfig* cfg = find_builtin(name);
    REQUIRE(cfg != nullptr);
    ScenarioConfig small = *cfg;
    small.samples = {{"points", 16}, {"pairs", 12},      {"charts", 4}, {"cocycle", 12},
                     {"commutation", 20}, {"audit", 16}, {"eta", 64},   {"epsilon0", 16},
                     {"solves", 4}};
    return small;
}

} // namespace

TEST_CASE("schema validation") {
    SUBCASE("a well-formed config parses") {
        const ScenarioConfig cfg = parse_scenario(minimal_config());
        CHECK(cfg.name == "tiny");
        CHECK(cfg.seed == 7);
        CHECK(cfg.samples.at("points") == 12);
    }
    SUBCASE("a missing seed is rejected") {
        ordered_json doc = minimal_config();
        doc.erase("seed");
        CHECK_THROWS_AS(parse_scenario(doc), SchemaError);
    }
    SUBCASE("non-positive tolerances are rejected") {
        ordered_json doc = minimal_config();
        doc["tolerances"] = {{"A-error", 0.0}};
        CHECK_THROWS_AS(parse_scenario(doc), SchemaError);
    }
    SUBCASE("unknown system kinds are rejected") {
        ordered_json doc = minimal_config();
        doc["phi"] = {{"kind", "moebius-flow"}};
        CHECK_THROWS_AS(parse_scenario(doc), SchemaError);
    }
    SUBCASE("invalid system parameters surface as schema errors") {
        ordered_json doc = minimal_config();
        doc["phi"] = {{"kind", "suspension-flow"},
                      {"base-matrix", {{2, 0}, {0, 2}}},
                      {"roof", 1.0}};
        CHECK_THROWS_AS(parse_scenario(doc), SchemaError);
    }
}

TEST_CASE("mismatched manifolds parse but fail as a pipeline error") {
    ordered_json doc = minimal_config();
    doc["psi"] = {{"kind", "torus-translation-flow"}, {"direction", {1.0, 0.5, 0.25}}};
    const ScenarioConfig cfg = parse_scenario(doc); // structurally valid
    CHECK_THROWS_AS(run_scenario(cfg), Error);      // carried to exit code 4 by the CLI
}

TEST_CASE("built-in catalog") {
    const auto& catalog = builtin_catalog();
    CHECK(catalog.size() >= 6);
    for (const auto& cfg : catalog) {
        CHECK_FALSE(cfg.name.empty());
        CHECK_FALSE(cfg.description.empty());
        CHECK(cfg.seed != 0);
    }
    CHECK(find_builtin("cat-suspension-c2") != nullptr);
    CHECK(find_builtin("no-such-scenario") == nullptr);
}

TEST_CASE("flow scenario end to end (reduced samples)") {
    const RunReport rep = run_scenario(small_builtin("cat-suspension-c2"));
    CHECK(rep.all_passed());
    CHECK(report_exit_code(rep) == 0);
    CHECK(rep.constants.certified);
    REQUIRE_FALSE(rep.reparam.samples.empty());
    for (const auto& s : rep.reparam.samples) CHECK(std::fabs(s.value - 2.0) <= 1e-6);
}

TEST_CASE("negative separation control still recovers (reduced samples)") {
    const RunReport rep = run_scenario(small_builtin("torus-translation-negative"));
    CHECK(rep.separation.separated_fraction == 0.0);
    CHECK_FALSE(rep.separating_certified);
    CHECK(rep.all_passed()); // the scenario's expectation is fraction >= 0
    bool recovery_ok = false;
    for (const auto& a : rep.audits)
        if (a.name == "recovery-succeeded") recovery_ok = a.passed;
    CHECK(recovery_ok);
    const ordered_json j = report_to_json(rep, true);
    CHECK(j["separation"]["note"].get<std::string>().find("not certified") != std::string::npos);
}

TEST_CASE("broken companion fails loudly and reports no field") {
    const RunReport rep = run_scenario(small_builtin("broken-commuting-control"));
    CHECK_FALSE(rep.all_passed());
    CHECK(report_exit_code(rep) == 2);
    CHECK(rep.failure_stage == "recovery");
    CHECK(rep.reparam.samples.empty()); // no fabricated A
    bool commutation_failed = false;
    double commutation_residual = 0;
    for (const auto& a : rep.audits)
        if (a.name == "commutation") {
            commutation_failed = !a.passed;
            commutation_residual = a.residual;
        }
    CHECK(commutation_failed);
    CHECK(commutation_residual > rep.constants.delta);
}

TEST_CASE("action scenario end to end (reduced samples)") {
    ScenarioConfig cfg = small_builtin("action-T3-B");
    cfg.samples["charts"] = 6;
    const RunReport rep = run_scenario(cfg);
    CHECK(rep.all_passed());
    REQUIRE_FALSE(rep.matrix_field.samples.empty());
    Mat B(2, 2);
    B << 2, 0, 1, 1;
    for (const auto& s : rep.matrix_field.samples)
        CHECK((s.A - B).cwiseAbs().maxCoeff() <= 1e-6);

    // per-chart derivative bounds are published in the report
    CHECK(rep.chart_bounds.size() == 6);
    const ordered_json j = report_to_json(rep, true);
    REQUIRE(j["charts"].size() == 6);
    CHECK(j["charts"][0]["m_min"].get<double>() >= 1.0 / 3.0);
    CHECK(j["charts"][0]["norm_max"].get<double>() <= 3.0);

    // the point table carries the matrix entries row-major
    const std::string table = points_table(rep);
    CHECK(table.rfind("component\tx0\tx1\tx2\tA00\tA01\tA10\tA11\tresidual\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 7); // header + 6 charts
}

TEST_CASE("reports are deterministic and round-trip at full precision") {
    const ScenarioConfig cfg = small_builtin("cat-suspension-c2");
    const RunReport a = run_scenario(cfg);
    const RunReport b = run_scenario(cfg);
    const std::string dump_a = dump_canonical(report_to_json(a, true));
    const std::string dump_b = dump_canonical(report_to_json(b, true));
    CHECK(dump_a == dump_b);

    // 17-significant-digit serialization round-trips doubles exactly
    const ordered_json parsed = ordered_json::parse(dump_a);
    CHECK(parsed["constants"]["delta"].get<double>() == a.constants.delta);
    CHECK(parsed["centralizer"]["samples"][0]["A"].get<double>() ==
          a.reparam.samples[0].value);

    // wall time is stripped only in normalized mode
    CHECK_FALSE(dump_a.find("wall_time") != std::string::npos);
    const std::string timed = dump_canonical(report_to_json(a, false));
    CHECK(timed.find("wall_time") != std::string::npos);
}

TEST_CASE("points table lists one row per sample") {
    const RunReport rep = run_scenario(small_builtin("cat-suspension-c2"));
    const std::string table = points_table(rep);
    const std::size_t rows = std::count(table.begin(), table.end(), '\n');
    CHECK(rows == rep.reparam.samples.size() + 1); // header + samples
    CHECK(table.rfind("component\tx0\tx1\tx2\tA\tresidual\n", 0) == 0);
}
