#include "sepflow/scenario.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "sepflow/errors.hpp"
#include "sepflow/sampling.hpp"
#include "sepflow/section.hpp"

namespace sepflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw SchemaError(where + ": " + what);
}

double need_number(const ordered_json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) schema_fail(where + "." + key, "missing");
    if (!j[key].is_number()) schema_fail(where + "." + key, "expected a number");
    return j[key].get<double>();
}

Vec need_vector(const ordered_json& j, const std::string& where, const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].empty())
        schema_fail(where + "." + key, "expected a non-empty array of numbers");
    Vec v(j[key].size());
    for (std::size_t i = 0; i < j[key].size(); ++i) {
        if (!j[key][i].is_number()) schema_fail(where + "." + key, "expected numbers");
        v[static_cast<int>(i)] = j[key][i].get<double>();
    }
    return v;
}

Eigen::Matrix2<long long> need_int_matrix2(const ordered_json& j, const std::string& where,
                                           const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
        schema_fail(where + "." + key, "expected a 2x2 integer matrix");
    Eigen::Matrix2<long long> m;
    for (int r = 0; r < 2; ++r) {
        if (!j[key][r].is_array() || j[key][r].size() != 2)
            schema_fail(where + "." + key, "expected a 2x2 integer matrix");
        for (int c = 0; c < 2; ++c) {
            if (!j[key][r][c].is_number_integer())
                schema_fail(where + "." + key, "matrix entries must be integers");
            m(r, c) = j[key][r][c].get<long long>();
        }
    }
    return m;
}

Mat need_matrix(const ordered_json& j, const std::string& where, const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].empty())
        schema_fail(where + "." + key, "expected a matrix (array of rows)");
    const auto& rows = j[key];
    const std::size_t ncols = rows[0].is_array() ? rows[0].size() : 0;
    if (ncols == 0) schema_fail(where + "." + key, "expected non-empty rows");
    Mat m(rows.size(), ncols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].is_array() || rows[r].size() != ncols)
            schema_fail(where + "." + key, "ragged matrix rows");
        for (std::size_t c = 0; c < ncols; ++c) {
            if (!rows[r][c].is_number()) schema_fail(where + "." + key, "expected numbers");
            m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c].get<double>();
        }
    }
    return m;
}

} // namespace

SystemSpec system_from_config(const ordered_json& spec) {
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
        schema_fail("system", "expected an object with a \"kind\" string");
    const std::string kind = spec["kind"].get<std::string>();
    const double time_scale = spec.contains("time-scale")
                                  ? need_number(spec, kind, "time-scale")
                                  : 1.0;
    try {
        if (kind == "torus-translation-flow")
            return SystemSpec::torus_translation_flow(need_vector(spec, kind, "direction"),
                                                      time_scale);
        if (kind == "torus-ode-flow") {
            const double step =
                spec.contains("rk4-step") ? need_number(spec, kind, "rk4-step") : 0.005;
            return SystemSpec::torus_linear_ode_flow(need_vector(spec, kind, "direction"), step,
                                                     time_scale);
        }
        if (kind == "suspension-flow")
            return SystemSpec::suspension_flow(need_int_matrix2(spec, kind, "base-matrix"),
                                               need_number(spec, kind, "roof"), time_scale);
        if (kind == "suspension-base-drift") {
            const Vec drift = need_vector(spec, kind, "drift");
            if (drift.size() != 2) schema_fail(kind + ".drift", "expected 2 entries");
            return SystemSpec::suspension_base_drift(need_int_matrix2(spec, kind, "base-matrix"),
                                                     need_number(spec, kind, "roof"),
                                                     Eigen::Vector2d(drift[0], drift[1]));
        }
        if (kind == "disjoint-union") {
            if (!spec.contains("components") || !spec["components"].is_array())
                schema_fail(kind + ".components", "expected an array");
            std::vector<SystemSpec> comps;
            for (const auto& c : spec["components"]) comps.push_back(system_from_config(c));
            return SystemSpec::disjoint_union(std::move(comps));
        }
        if (kind == "torus-translation-action")
            return SystemSpec::torus_translation_action(need_matrix(spec, kind, "directions"));
    } catch (const InvalidArgumentError& e) {
        schema_fail(kind, e.what());
    }
    schema_fail("system.kind", "unknown kind \"" + kind + "\"");
}

SystemSpec psi_from_config(const ordered_json& spec, const SystemSpec& phi) {
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
        schema_fail("psi", "expected an object with a \"kind\" string");
    const std::string kind = spec["kind"].get<std::string>();
    if (kind == "reparam") return phi.reparameterized(need_number(spec, "psi", "factor"));
    if (kind == "reparam-by-component") {
        const Vec factors = need_vector(spec, "psi", "factors");
        if (phi.kind() != SystemKind::disjoint_union ||
            factors.size() != static_cast<int>(phi.components().size()))
            schema_fail("psi.factors", "needs one factor per disjoint-union component");
        std::vector<SystemSpec> comps;
        for (std::size_t i = 0; i < phi.components().size(); ++i)
            comps.push_back(phi.components()[i].reparameterized(factors[static_cast<int>(i)]));
        return SystemSpec::disjoint_union(std::move(comps));
    }
    if (kind == "action-matrix") {
        if (!phi.is_action()) schema_fail("psi.action-matrix", "phi is not an action");
        const Mat B = need_matrix(spec, "psi", "matrix");
        if (B.rows() != phi.rank() || B.cols() != phi.rank())
            schema_fail("psi.matrix", "expected a d x d matrix");
        return SystemSpec::torus_translation_action(phi.action_directions() * B);
    }
    return system_from_config(spec);
}

ScenarioConfig parse_scenario(const ordered_json& doc) {
    if (!doc.is_object()) schema_fail("config", "expected a JSON object");
    ScenarioConfig cfg;
    if (!doc.contains("name") || !doc["name"].is_string())
        schema_fail("name", "missing or not a string");
    cfg.name = doc["name"].get<std::string>();
    if (!doc.contains("seed") || !doc["seed"].is_number_integer() ||
        doc["seed"].get<long long>() < 0)
        schema_fail("seed", "missing non-negative integer (reproducibility is mandatory)");
    cfg.seed = doc["seed"].get<std::uint64_t>();
    if (!doc.contains("phi")) schema_fail("phi", "missing");
    cfg.phi = doc["phi"];
    system_from_config(cfg.phi); // validate eagerly
    if (doc.contains("psi")) {
        cfg.psi = doc["psi"];
        psi_from_config(cfg.psi, system_from_config(cfg.phi));
    }
    if (doc.contains("description") && doc["description"].is_string())
        cfg.description = doc["description"].get<std::string>();
    if (doc.contains("expected")) {
        if (!doc["expected"].is_object()) schema_fail("expected", "expected an object");
        cfg.expected = doc["expected"];
    }
    if (doc.contains("tolerances")) {
        if (!doc["tolerances"].is_object()) schema_fail("tolerances", "expected an object");
        for (auto it = doc["tolerances"].begin(); it != doc["tolerances"].end(); ++it) {
            if (!it.value().is_number() || !(it.value().get<double>() > 0))
                schema_fail("tolerances." + it.key(), "tolerances must be positive numbers");
            cfg.tolerances[it.key()] = it.value().get<double>();
        }
    }
    if (doc.contains("horizons")) {
        if (!doc["horizons"].is_object()) schema_fail("horizons", "expected an object");
        for (auto it = doc["horizons"].begin(); it != doc["horizons"].end(); ++it) {
            if (!it.value().is_number() || !(it.value().get<double>() > 0))
                schema_fail("horizons." + it.key(), "horizons must be positive numbers");
            cfg.horizons[it.key()] = it.value().get<double>();
        }
    }
    if (doc.contains("samples")) {
        if (!doc["samples"].is_object()) schema_fail("samples", "expected an object");
        for (auto it = doc["samples"].begin(); it != doc["samples"].end(); ++it) {
            if (!it.value().is_number_integer() || it.value().get<long long>() <= 0)
                schema_fail("samples." + it.key(), "sample counts must be positive integers");
            cfg.samples[it.key()] = it.value().get<int>();
        }
    }
    return cfg;
}

bool RunReport::all_passed() const {
    for (const auto& a : audits)
        if (!a.passed) return false;
    return true;
}

int report_exit_code(const RunReport& report) { return report.all_passed() ? 0 : 2; }

namespace {

class PipelineContext {
public:
    PipelineContext(const ScenarioConfig& cfg, RunReport& rep) : cfg_(cfg), rep_(rep) {}

    double tol(const std::string& name, double fallback) const {
        auto it = cfg_.tolerances.find(name);
        return it != cfg_.tolerances.end() ? it->second : fallback;
    }
    double horizon(const std::string& name, double fallback) const {
        auto it = cfg_.horizons.find(name);
        return it != cfg_.horizons.end() ? it->second : fallback;
    }
    int count(const std::string& name, int fallback) const {
        auto it = cfg_.samples.find(name);
        return it != cfg_.samples.end() ? it->second : fallback;
    }
    double expected_number(const std::string& key, double fallback) const {
        if (cfg_.expected.is_object() && cfg_.expected.contains(key) &&
            cfg_.expected[key].is_number())
            return cfg_.expected[key].get<double>();
        return fallback;
    }

    void audit(const std::string& name, double residual, double tolerance,
               const std::string& note = "") {
        const bool passed = std::isfinite(residual) && residual <= tolerance;
        rep_.audits.push_back({name, residual, tolerance, passed, note});
    }

    const ScenarioConfig& cfg_;
    RunReport& rep_;
};

void run_flow_pipeline(const ScenarioConfig& cfg, const SystemSpec& phi,
                       const std::optional<SystemSpec>& psi, RunReport& rep) {
    PipelineContext ctx(cfg, rep);
    const std::uint64_t seed = cfg.seed;

    // calibration
    const double eps0 = estimate_epsilon0_flow(phi, ctx.count("epsilon0", 64), 4.0);
    const double T0 = 0.4 * eps0; // default placement inside (0, epsilon0)
    const double eta = eta_for(phi, T0, ctx.count("eta", 256), seed);
    rep.constants = calibrate_local_constants(phi, T0, eta, eps0, ctx.count("audit", 48), seed + 1);
    ctx.audit("calibration-certified", rep.constants.certified ? 0.0 : 1.0, 0.5);

    // section charts: contraction rates, level-set residuals, slope bound
    const auto centers = sampling::sample_points(phi, ctx.count("charts", 24), seed + 2);
    sampling::Rng shell_rng(seed + 3);
    const double rate_bound = kContractionRate + kContractionSlack;
    double max_rate = 0, max_section_residual = 0;
    int slope_violations = 0;
    const int solves_per_chart = ctx.count("solves", 8);
    for (const auto& x : centers) {
        const SectionChart chart = make_section_chart(phi, x, rep.constants);
        SectionAudit audit;
        audit.center = x;
        audit.g_slope = chart.g_slope;
        audit.rate_histogram.assign(8, 0);
        for (int k = 0; k < solves_per_chart; ++k) {
            const double rho = rep.constants.delta * (0.15 + 0.8 * shell_rng.uniform());
            const ChartPoint p =
                phi.point(x.coords + rho * shell_rng.unit_vector(phi.dim()),
                          x.system_id.component);
            const SectionSolve solve = solve_section_time(chart, p);
            ++audit.solves;
            for (double r : solve.rates) {
                audit.rate_max = std::max(audit.rate_max, r);
                const int bin =
                    std::min(7, static_cast<int>(std::floor(8.0 * r / rate_bound)));
                ++audit.rate_histogram[bin];
            }
            const ChartPoint proj = phi.evaluate_flow(solve.tau, p);
            audit.residual_max = std::max(
                audit.residual_max,
                std::fabs(integral_I(phi, proj, x, rep.constants.T0) - chart.I_center));
        }
        max_rate = std::max(max_rate, audit.rate_max);
        max_section_residual = std::max(max_section_residual, audit.residual_max);
        rep.sections.push_back(std::move(audit));
        for (double t : sampling::linspace(-rep.constants.mu1, rep.constants.mu1, 8)) {
            for (int j = 0; j < 4; ++j) {
                const ChartPoint p =
                    phi.point(x.coords + rep.constants.delta * (0.25 * (j + 1)) *
                                             shell_rng.unit_vector(phi.dim()),
                              x.system_id.component);
                try {
                    g_derivative(phi, t, p, chart);
                } catch (const BoundViolationError&) {
                    ++slope_violations;
                }
            }
        }
    }
    ctx.audit("contraction-rate", max_rate, ctx.tol("contraction-rate",
                                                    kContractionRate + kContractionSlack));
    ctx.audit("section-residual", max_section_residual, ctx.tol("section-residual", 1e-9));
    ctx.audit("g-slope-violations", slope_violations, 0.5);

    // separation probe
    rep.separation = probe_separation(phi, rep.constants, rep.constants.delta,
                                      ctx.horizon("separation", 30.0), ctx.count("pairs", 200),
                                      seed + 4);
    rep.separating_certified = rep.separation.separated_fraction >= 0.99;
    const double min_fraction = ctx.expected_number("min-separated-fraction", 0.99);
    ctx.audit("separated-fraction-shortfall",
              std::max(0.0, min_fraction - rep.separation.separated_fraction),
              ctx.tol("separation-shortfall", 1e-12));

    if (!psi) return;

    ctx.audit("commutation",
              check_commutation(phi, *psi, ctx.count("commutation", 100), seed + 5),
              ctx.tol("commutation", 1e-8));

    const bool has_expected_A =
        cfg.expected.is_object() &&
        (cfg.expected.contains("A") || cfg.expected.contains("A-by-component"));
    try {
        const auto points = sampling::sample_points(phi, ctx.count("points", 200), seed + 6);
        rep.reparam = recover_A_flow(phi, *psi, rep.constants, points);
        const CocycleResiduals cr = verify_cocycle(phi, *psi, rep.constants,
                                                   ctx.count("cocycle", 500), seed + 7,
                                                   rep.reparam.a);
        rep.reparam.quasitrivial_residual_max =
            verify_quasitrivial(phi, *psi, rep.reparam, ctx.horizon("quasitrivial", 20.0));

        ctx.audit("recovery-succeeded", 0.0, 0.5);
        if (has_expected_A) {
            double worst = 0;
            for (const auto& s : rep.reparam.samples) {
                double expect;
                if (cfg.expected.contains("A-by-component"))
                    expect = cfg.expected["A-by-component"][s.x.system_id.component].get<double>();
                else
                    expect = cfg.expected["A"].get<double>();
                worst = std::max(worst, std::fabs(s.value - expect));
            }
            ctx.audit("A-error", worst, ctx.tol("A-error", 1e-6));
        }
        ctx.audit("A-invariance", rep.reparam.invariance_residual_max,
                  ctx.tol("invariance", 1e-6));
        ctx.audit("cocycle-additivity", cr.additivity, ctx.tol("cocycle", 1e-6));
        ctx.audit("cocycle-flow-invariance", cr.invariance, ctx.tol("cocycle", 1e-6));
        ctx.audit("cocycle-linearity", cr.linearity, ctx.tol("cocycle", 1e-6));
        ctx.audit("quasitrivial", rep.reparam.quasitrivial_residual_max,
                  ctx.tol("quasitrivial", 1e-7));
    } catch (const Error& e) {
        rep.failure_stage = "recovery";
        rep.reparam.samples.clear(); // never report a fabricated field
        ctx.audit("recovery-succeeded", 1.0, 0.5, e.what());
        const char* skipped = "skipped: recovery failed";
        if (has_expected_A) ctx.audit("A-error", kNaN, ctx.tol("A-error", 1e-6), skipped);
        ctx.audit("A-invariance", kNaN, ctx.tol("invariance", 1e-6), skipped);
        ctx.audit("cocycle-additivity", kNaN, ctx.tol("cocycle", 1e-6), skipped);
        ctx.audit("cocycle-flow-invariance", kNaN, ctx.tol("cocycle", 1e-6), skipped);
        ctx.audit("cocycle-linearity", kNaN, ctx.tol("cocycle", 1e-6), skipped);
        ctx.audit("quasitrivial", kNaN, ctx.tol("quasitrivial", 1e-7), skipped);
    }
}

void run_action_pipeline(const ScenarioConfig& cfg, const SystemSpec& Phi,
                         const std::optional<SystemSpec>& psi, RunReport& rep) {
    PipelineContext ctx(cfg, rep);
    const std::uint64_t seed = cfg.seed;

    rep.action_epsilon0 = estimate_epsilon0_action(Phi, ctx.count("epsilon0", 64), 3.0);
    rep.action_mu = 0.3 * rep.action_epsilon0;
    rep.action_r0 = default_flowbox_radius(Phi, rep.action_mu);

    const auto centers = sampling::sample_points(Phi, ctx.count("charts", 100), seed + 2);
    std::vector<FlowboxChart> charts;
    charts.reserve(centers.size());
    double m_min = std::numeric_limits<double>::infinity(), norm_max = 0;
    std::string bound_note;
    for (const auto& x : centers) {
        charts.push_back(build_flowbox(Phi, x, rep.action_r0, rep.action_mu));
        try {
            const auto [lo, hi] = flowbox_bounds(charts.back(), 16);
            m_min = std::min(m_min, lo);
            norm_max = std::max(norm_max, hi);
            rep.chart_bounds.push_back({x, lo, hi});
        } catch (const BoundViolationError& e) {
            m_min = 0;
            bound_note = e.what();
            rep.chart_bounds.push_back({x, 0.0, std::numeric_limits<double>::quiet_NaN()});
        }
    }
    ctx.audit("flowbox-bounds",
              std::max({0.0, kFlowboxLowerBound - m_min, norm_max - kFlowboxUpperBound}),
              ctx.tol("flowbox-bounds", 1e-9), bound_note);

    if (!psi) return;

    ctx.audit("commutation",
              check_commutation(Phi, *psi, ctx.count("commutation", 100), seed + 5),
              ctx.tol("commutation", 1e-8));

    const bool has_expected_A = cfg.expected.is_object() && cfg.expected.contains("A-matrix");
    try {
        rep.matrix_field = recover_A_action(Phi, *psi, charts,
                                            ctx.horizon("quasitrivial", 5.0), seed + 6);
        ctx.audit("recovery-succeeded", 0.0, 0.5);
        if (has_expected_A) {
            Mat expect(Phi.rank(), Phi.rank());
            for (int r = 0; r < Phi.rank(); ++r)
                for (int c = 0; c < Phi.rank(); ++c)
                    expect(r, c) = cfg.expected["A-matrix"][r][c].get<double>();
            double worst = 0;
            for (const auto& s : rep.matrix_field.samples)
                worst = std::max(worst, (s.A - expect).cwiseAbs().maxCoeff());
            ctx.audit("A-error", worst, ctx.tol("A-error", 1e-6));
        }
        ctx.audit("A-invariance", rep.matrix_field.invariance_residual_max,
                  ctx.tol("invariance", 1e-6));
        ctx.audit("quasitrivial", rep.matrix_field.quasitrivial_residual_max,
                  ctx.tol("quasitrivial", 1e-7));
        ctx.audit("basis-cross-check", rep.matrix_field.basis_check_residual_max,
                  ctx.tol("basis-check", 1e-6));
    } catch (const Error& e) {
        rep.failure_stage = "recovery";
        rep.matrix_field.samples.clear();
        ctx.audit("recovery-succeeded", 1.0, 0.5, e.what());
        const char* skipped = "skipped: recovery failed";
        if (has_expected_A) ctx.audit("A-error", kNaN, ctx.tol("A-error", 1e-6), skipped);
        ctx.audit("A-invariance", kNaN, ctx.tol("invariance", 1e-6), skipped);
        ctx.audit("quasitrivial", kNaN, ctx.tol("quasitrivial", 1e-7), skipped);
        ctx.audit("basis-cross-check", kNaN, ctx.tol("basis-check", 1e-6), skipped);
    }
}

} // namespace

RunReport run_scenario(const ScenarioConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep;
    rep.scenario = cfg.name;
    rep.seed = cfg.seed;

    const SystemSpec phi = system_from_config(cfg.phi);
    std::optional<SystemSpec> psi;
    if (!cfg.psi.is_null()) psi = psi_from_config(cfg.psi, phi);
    rep.is_action = phi.is_action();

    if (rep.is_action)
        run_action_pipeline(cfg, phi, psi, rep);
    else
        run_flow_pipeline(cfg, phi, psi, rep);

    rep.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

namespace {

ordered_json point_json(const ChartPoint& p) {
    ordered_json arr = ordered_json::array();
    for (int i = 0; i < p.coords.size(); ++i) arr.push_back(p.coords[i]);
    return arr;
}

} // namespace

ordered_json report_to_json(const RunReport& rep, bool normalize) {
    ordered_json j;
    j["scenario"] = rep.scenario;
    j["seed"] = rep.seed;
    j["kind"] = rep.is_action ? "action" : "flow";

    if (rep.is_action) {
        ordered_json c;
        c["epsilon0"] = rep.action_epsilon0;
        c["r0"] = rep.action_r0;
        c["mu"] = rep.action_mu;
        j["constants"] = c;

        ordered_json charts = ordered_json::array();
        for (const auto& cb : rep.chart_bounds) {
            ordered_json e;
            e["component"] = cb.center.system_id.component;
            e["center"] = point_json(cb.center);
            e["m_min"] = cb.m_min;
            e["norm_max"] = cb.norm_max;
            charts.push_back(e);
        }
        j["charts"] = charts;
    } else {
        ordered_json c;
        c["T0"] = rep.constants.T0;
        c["epsilon0"] = rep.constants.epsilon0;
        c["eta"] = rep.constants.eta;
        c["mu1"] = rep.constants.mu1;
        c["mu"] = rep.constants.mu;
        c["delta"] = rep.constants.delta;
        c["sample_count"] = rep.constants.sample_count;
        c["certified"] = rep.constants.certified;
        j["constants"] = c;

        ordered_json s;
        s["delta"] = rep.separation.delta;
        s["horizon"] = rep.separation.horizon;
        s["pairs_tested"] = rep.separation.pairs_tested;
        s["separated_fraction"] = rep.separation.separated_fraction;
        s["separating_certified"] = rep.separating_certified;
        s["note"] = rep.separating_certified
                        ? "separating hypothesis certified by sampling"
                        : "separating hypothesis not certified; counterexample pairs stayed "
                          "within delta for the whole horizon (recovery remains valid for "
                          "commuting inputs)";
        ordered_json ces = ordered_json::array();
        for (const auto& ce : rep.separation.counterexamples) {
            ordered_json e;
            e["component"] = ce.x.system_id.component;
            e["x"] = point_json(ce.x);
            e["y"] = point_json(ce.y);
            e["max_orbit_distance"] = ce.max_orbit_distance;
            ces.push_back(e);
        }
        s["counterexamples"] = ces;
        j["separation"] = s;

        ordered_json sections = ordered_json::array();
        for (const auto& sa : rep.sections) {
            ordered_json e;
            e["component"] = sa.center.system_id.component;
            e["center"] = point_json(sa.center);
            e["g_slope"] = sa.g_slope;
            e["solves"] = sa.solves;
            e["rate_histogram"] = sa.rate_histogram;
            e["rate_max"] = sa.rate_max;
            e["residual_max"] = sa.residual_max;
            sections.push_back(e);
        }
        j["sections"] = sections;
    }

    ordered_json z;
    if (rep.is_action) {
        z["a"] = rep.matrix_field.a;
        z["invariance_residual_max"] = rep.matrix_field.invariance_residual_max;
        z["quasitrivial_residual_max"] = rep.matrix_field.quasitrivial_residual_max;
        z["basis_check_residual_max"] = rep.matrix_field.basis_check_residual_max;
        ordered_json samples = ordered_json::array();
        for (const auto& s : rep.matrix_field.samples) {
            ordered_json e;
            e["component"] = s.x.system_id.component;
            e["x"] = point_json(s.x);
            ordered_json rows = ordered_json::array();
            for (int r = 0; r < s.A.rows(); ++r) {
                ordered_json row = ordered_json::array();
                for (int c = 0; c < s.A.cols(); ++c) row.push_back(s.A(r, c));
                rows.push_back(row);
            }
            e["A"] = rows;
            e["residual"] = s.residual;
            samples.push_back(e);
        }
        z["samples"] = samples;
    } else {
        z["a"] = rep.reparam.a;
        z["invariance_residual_max"] = rep.reparam.invariance_residual_max;
        z["quasitrivial_residual_max"] = rep.reparam.quasitrivial_residual_max;
        ordered_json samples = ordered_json::array();
        for (const auto& s : rep.reparam.samples) {
            ordered_json e;
            e["component"] = s.x.system_id.component;
            e["x"] = point_json(s.x);
            e["A"] = s.value;
            e["residual"] = s.residual;
            samples.push_back(e);
        }
        z["samples"] = samples;
    }
    j["centralizer"] = z;

    ordered_json audits = ordered_json::array();
    for (const auto& a : rep.audits) {
        ordered_json e;
        e["name"] = a.name;
        e["residual"] = a.residual; // NaN serializes as null
        e["tolerance"] = a.tolerance;
        e["passed"] = a.passed;
        if (!a.note.empty()) e["note"] = a.note;
        audits.push_back(e);
    }
    j["audits"] = audits;
    j["failure_stage"] = rep.failure_stage;
    if (!normalize) j["wall_time"] = rep.wall_time_seconds;
    return j;
}

std::string points_table(const RunReport& rep) {
    std::ostringstream os;
    os.precision(17);
    if (rep.is_action) {
        const int d = rep.matrix_field.samples.empty()
                          ? 0
                          : static_cast<int>(rep.matrix_field.samples.front().A.rows());
        os << "component";
        if (!rep.matrix_field.samples.empty()) {
            const int dim = static_cast<int>(rep.matrix_field.samples.front().x.coords.size());
            for (int i = 0; i < dim; ++i) os << "\tx" << i;
        }
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) os << "\tA" << r << c;
        os << "\tresidual\n";
        for (const auto& s : rep.matrix_field.samples) {
            os << s.x.system_id.component;
            for (int i = 0; i < s.x.coords.size(); ++i) os << "\t" << s.x.coords[i];
            for (int r = 0; r < s.A.rows(); ++r)
                for (int c = 0; c < s.A.cols(); ++c) os << "\t" << s.A(r, c);
            os << "\t" << s.residual << "\n";
        }
    } else {
        os << "component";
        if (!rep.reparam.samples.empty()) {
            const int dim = static_cast<int>(rep.reparam.samples.front().x.coords.size());
            for (int i = 0; i < dim; ++i) os << "\tx" << i;
        }
        os << "\tA\tresidual\n";
        for (const auto& s : rep.reparam.samples) {
            os << s.x.system_id.component;
            for (int i = 0; i < s.x.coords.size(); ++i) os << "\t" << s.x.coords[i];
            os << "\t" << s.value << "\t" << s.residual << "\n";
        }
    }
    return os.str();
}

namespace {

ordered_json cat_suspension_phi() {
    ordered_json phi;
    phi["kind"] = "suspension-flow";
    phi["base-matrix"] = {{2, 1}, {1, 1}};
    phi["roof"] = 1.0;
    return phi;
}

ordered_json reparam_psi(double factor) {
    ordered_json psi;
    psi["kind"] = "reparam";
    psi["factor"] = factor;
    return psi;
}

ScenarioConfig make_builtin(const std::string& name, const std::string& description,
                            ordered_json phi, ordered_json psi, ordered_json expected,
                            std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.description = description;
    cfg.phi = std::move(phi);
    cfg.psi = std::move(psi);
    cfg.expected = std::move(expected);
    cfg.seed = seed;
    return cfg;
}

std::vector<ScenarioConfig> build_catalog() {
    std::vector<ScenarioConfig> cat;
    const double sqrt2 = std::sqrt(2.0);

    cat.push_back(make_builtin(
        "cat-suspension-self", "hyperbolic suspension audited against itself (A = 1)",
        cat_suspension_phi(), reparam_psi(1.0), ordered_json{{"A", 1.0}}, 73201));

    cat.push_back(make_builtin(
        "cat-suspension-c2", "hyperbolic suspension with the doubled-time companion (A = 2)",
        cat_suspension_phi(), reparam_psi(2.0), ordered_json{{"A", 2.0}}, 73202));

    cat.push_back(make_builtin(
        "cat-suspension-c1.37", "hyperbolic suspension with an irrational-looking rescale",
        cat_suspension_phi(), reparam_psi(1.37), ordered_json{{"A", 1.37}}, 73203));

    {
        ordered_json phi;
        phi["kind"] = "disjoint-union";
        phi["components"] = ordered_json::array({cat_suspension_phi(), cat_suspension_phi()});
        ordered_json psi;
        psi["kind"] = "reparam-by-component";
        psi["factors"] = {1.0, 3.0};
        cat.push_back(make_builtin(
            "two-component-piecewise",
            "two suspension components rescaled separately (A = 1 and A = 3)", phi, psi,
            ordered_json{{"A-by-component", {1.0, 3.0}}}, 73204));
    }

    {
        ordered_json phi;
        phi["kind"] = "torus-translation-flow";
        phi["direction"] = {1.0, sqrt2};
        cat.push_back(make_builtin(
            "torus-translation-negative",
            "isometric torus translation: separation fraction 0, recovery still succeeds", phi,
            reparam_psi(2.0),
            ordered_json{{"A", 2.0}, {"min-separated-fraction", 0.0}}, 73205));
    }

    {
        ordered_json phi;
        phi["kind"] = "torus-translation-action";
        phi["directions"] = {{1.0, 0.0}, {0.0, sqrt2 - 1.0}, {0.0, 1.0}};
        ordered_json psi;
        psi["kind"] = "action-matrix";
        psi["matrix"] = {{2.0, 0.0}, {1.0, 1.0}};
        cat.push_back(make_builtin("action-T3-B",
                                   "rank-2 translation action with a matrix companion (A = B)",
                                   phi, psi,
                                   ordered_json{{"A-matrix", {{2.0, 0.0}, {1.0, 1.0}}}}, 73206));

        ordered_json psi_id;
        psi_id["kind"] = "action-matrix";
        psi_id["matrix"] = {{1.0, 0.0}, {0.0, 1.0}};
        cat.push_back(make_builtin("action-identity",
                                   "rank-2 translation action against itself (A = I)", phi,
                                   psi_id,
                                   ordered_json{{"A-matrix", {{1.0, 0.0}, {0.0, 1.0}}}}, 73207));
    }

    {
        ordered_json psi;
        psi["kind"] = "suspension-base-drift";
        psi["base-matrix"] = {{2, 1}, {1, 1}};
        psi["roof"] = 1.0;
        psi["drift"] = {0.3, 0.2};
        cat.push_back(make_builtin(
            "broken-commuting-control",
            "deliberately non-commuting companion; recovery must fail loudly",
            cat_suspension_phi(), psi, nullptr, 73208));
    }
    return cat;
}

} // namespace

const std::vector<ScenarioConfig>& builtin_catalog() {
    static const std::vector<ScenarioConfig> catalog = build_catalog();
    return catalog;
}

const ScenarioConfig* find_builtin(const std::string& name) {
    for (const auto& cfg : builtin_catalog())
        if (cfg.name == name) return &cfg;
    return nullptr;
}

} // namespace sepflow
