// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 10 and 11 drive the CLI binary named by $SEPFLOW_CLI.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracle_helpers.hpp"
#include "sepflow/centralizer.hpp"
#include "sepflow/errors.hpp"
#include "sepflow/constants.hpp"
#include "sepflow/report_io.hpp"
#include "sepflow/sampling.hpp"
#include "sepflow/scenario.hpp"
#include "sepflow/section.hpp"

using namespace sepflow;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d %-22s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

const FlowConstants& cat_constants() {
    static const FlowConstants c = [] {
        const SystemSpec sys = oracle::cat_suspension();
        return calibrate_local_constants(sys, 0.4, eta_for(sys, 0.4, 256), 1.0);
    }();
    return c;
}

const RunReport& scenario_report(const std::string& name) {
    static std::map<std::string, RunReport> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        const ScenarioConfig* cfg = find_builtin(name);
        if (!cfg) throw std::runtime_error("missing builtin " + name);
        it = cache.emplace(name, run_scenario(*cfg)).first;
    }
    return it->second;
}

const AuditEntry* find_audit(const RunReport& rep, const std::string& name) {
    for (const auto& a : rep.audits)
        if (a.name == name) return &a;
    return nullptr;
}

// ---------------------------------------------------------------------------

void criterion_1_contraction_rate() {
    const SystemSpec sys = oracle::cat_suspension();
    const FlowConstants& c = cat_constants();
    const auto centers = sampling::sample_points(sys, 40, 0xacc1);
    sampling::Rng rng(0xacc2);
    long solves = 0, ratios = 0;
    double max_rate = 0;
    for (const auto& x : centers) {
        const SectionChart chart = make_section_chart(sys, x, c);
        for (int k = 0; k < 26; ++k) {
            const double rho = c.delta * (0.1 + 0.85 * rng.uniform());
            const ChartPoint p = sys.point(x.coords + rho * rng.unit_vector(3));
            const SectionSolve solve = solve_section_time(chart, p);
            ++solves;
            for (double r : solve.rates) {
                max_rate = std::max(max_rate, r);
                ++ratios;
            }
        }
    }
    const double bound = 7.0 / 12.0 + 0.05;
    const bool ok = solves >= 1000 && ratios > 0 && max_rate <= bound;
    report(1, "contraction-rate", ok,
           std::to_string(solves) + " solves, " + std::to_string(ratios) +
               " ratios, max " + fmt(max_rate) + " <= " + fmt(bound));
}

void criterion_2_g_slope() {
    const SystemSpec sys = oracle::cat_suspension();
    const FlowConstants& c = cat_constants();
    const auto centers = sampling::sample_points(sys, 40, 0xacc3);
    sampling::Rng rng(0xacc4);
    long audited = 0, violations = 0;
    for (const auto& x : centers) {
        const SectionChart chart = make_section_chart(sys, x, c);
        for (double t : sampling::linspace(-c.mu1, c.mu1, 16)) {
            for (int j = 0; j < 16; ++j) {
                const ChartPoint p =
                    sys.point(x.coords + c.delta * rng.uniform() * rng.unit_vector(3));
                ++audited;
                try {
                    g_derivative(sys, t, p, chart);
                } catch (const BoundViolationError&) {
                    ++violations;
                }
            }
        }
    }
    report(2, "g-slope-bound", violations == 0,
           std::to_string(audited) + " audited (t,p), " + std::to_string(violations) +
               " violations of eta/2");
}

void criterion_3_flow_recovery() {
    const RunReport& rep = scenario_report("cat-suspension-c2");
    double worst_A = 0;
    for (const auto& s : rep.reparam.samples)
        worst_A = std::max(worst_A, std::fabs(s.value - 2.0));
    const bool sizes = rep.reparam.samples.size() >= 200;
    const bool ok = sizes && rep.all_passed() && worst_A <= 1e-6 &&
                    rep.reparam.invariance_residual_max <= 1e-6 &&
                    rep.reparam.quasitrivial_residual_max <= 1e-7;
    report(3, "flow-recovery-e2e", ok,
           std::to_string(rep.reparam.samples.size()) + " points, |A-2| " + fmt(worst_A) +
               ", invariance " + fmt(rep.reparam.invariance_residual_max) + ", quasitrivial " +
               fmt(rep.reparam.quasitrivial_residual_max));
}

void criterion_4_nonconstant_A() {
    const RunReport& rep = scenario_report("two-component-piecewise");
    double worst = 0;
    int per_component[2] = {0, 0};
    for (const auto& s : rep.reparam.samples) {
        const int comp = s.x.system_id.component;
        ++per_component[comp];
        worst = std::max(worst, std::fabs(s.value - (comp == 0 ? 1.0 : 3.0)));
    }
    const bool ok = per_component[0] > 0 && per_component[1] > 0 && worst <= 1e-6;
    report(4, "non-constant-A", ok,
           "components " + std::to_string(per_component[0]) + "/" +
               std::to_string(per_component[1]) + ", max |A - expected| " + fmt(worst));
}

void criterion_5_cocycle_identities() {
    bool ok = true;
    std::string detail;
    for (const char* name :
         {"cat-suspension-self", "cat-suspension-c2", "cat-suspension-c1.37",
          "two-component-piecewise", "torus-translation-negative"}) {
        const RunReport& rep = scenario_report(name);
        for (const char* audit :
             {"cocycle-additivity", "cocycle-flow-invariance", "cocycle-linearity"}) {
            const AuditEntry* a = find_audit(rep, audit);
            if (!a || !std::isfinite(a->residual) || a->residual > 1e-6) {
                ok = false;
                detail += std::string(name) + ":" + audit + " ";
            }
        }
    }
    if (ok) detail = "additivity/invariance/linearity <= 1e-6 on 500 triples x 5 scenarios";
    report(5, "cocycle-identities", ok, detail);
}

void criterion_6_separation() {
    const SystemSpec cat = oracle::cat_suspension();
    const FlowConstants& c = cat_constants();
    const SeparationReport hyp = probe_separation(cat, c, c.delta, 30.0, 500, 0xacc6);

    const SystemSpec tor = oracle::irrational_translation_T2();
    const FlowConstants ct =
        calibrate_local_constants(tor, 0.4, eta_for(tor, 0.4, 256), 1.0);
    const SeparationReport iso = probe_separation(tor, ct, ct.delta, 30.0, 500, 0xacc7);

    const bool ok = hyp.separated_fraction >= 0.99 && iso.separated_fraction == 0.0;
    report(6, "separation-probes", ok,
           "suspension " + fmt(hyp.separated_fraction) + " >= 0.99, translation " +
               fmt(iso.separated_fraction) + " == 0");
}

void criterion_7_action_recovery() {
    const RunReport& rep = scenario_report("action-T3-B");
    Mat B(2, 2);
    B << 2, 0, 1, 1;
    double worst = 0;
    for (const auto& s : rep.matrix_field.samples)
        worst = std::max(worst, (s.A - B).cwiseAbs().maxCoeff());
    const bool ok = rep.matrix_field.samples.size() >= 100 && rep.all_passed() &&
                    worst <= 1e-6 && rep.matrix_field.invariance_residual_max <= 1e-6 &&
                    rep.matrix_field.basis_check_residual_max <= 1e-6;
    report(7, "action-recovery", ok,
           std::to_string(rep.matrix_field.samples.size()) + " charts, |A-B| " + fmt(worst) +
               ", invariance " + fmt(rep.matrix_field.invariance_residual_max) +
               ", basis cross-check " + fmt(rep.matrix_field.basis_check_residual_max));
}

void criterion_8_flowbox_bounds() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"action-T3-B", "action-identity"}) {
        const RunReport& rep = scenario_report(name);
        const AuditEntry* a = find_audit(rep, "flowbox-bounds");
        if (!a || !a->passed) {
            ok = false;
            detail += std::string(name) + " ";
        }
    }
    if (ok) detail = "all audited charts inside [1/3, 3] at the shrunk default r0";
    report(8, "flowbox-bounds", ok, detail);
}

void criterion_9_epsilon0() {
    const double e_cat = estimate_epsilon0_flow(oracle::cat_suspension(), 64, 4.0);
    const double e_tor = estimate_epsilon0_flow(oracle::irrational_translation_T2(), 64, 4.0);
    const double e_act = estimate_epsilon0_action(oracle::translation_action_T3(), 64, 3.0);
    const bool ok = e_cat == 1.0 && e_tor == 1.0 && e_act == 1.0;
    report(9, "epsilon0-estimates", ok,
           "suspension " + fmt(e_cat) + ", translation " + fmt(e_tor) + ", action " +
               fmt(e_act) + " (all exactly 1)");
}

// --- CLI-driven criteria ----------------------------------------------------

std::string cli_path() {
    const char* env = std::getenv("SEPFLOW_CLI");
    return env ? env : "";
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_10_negative_control() {
    if (cli_path().empty()) {
        report(10, "negative-control", false, "SEPFLOW_CLI not set");
        return;
    }
    const fs::path dir = fs::temp_directory_path() / "sepflow_acceptance_c10";
    fs::remove_all(dir);
    const int code =
        run_cli("run --builtin broken-commuting-control --normalize-report --out " + dir.string());

    bool commutation_exceeds_delta = false, no_fabricated_A = false, recovery_failed = false;
    try {
        const ordered_json rep =
            ordered_json::parse(slurp(dir / "broken-commuting-control_report.json"));
        const double delta = rep["constants"]["delta"].get<double>();
        for (const auto& a : rep["audits"]) {
            if (a["name"] == "commutation")
                commutation_exceeds_delta = a["residual"].get<double>() > delta;
            if (a["name"] == "recovery-succeeded") recovery_failed = !a["passed"].get<bool>();
        }
        no_fabricated_A = rep["centralizer"]["samples"].empty();
    } catch (...) {
    }
    const bool ok = code == 2 && commutation_exceeds_delta && recovery_failed && no_fabricated_A;
    report(10, "negative-control", ok,
           "exit " + std::to_string(code) + " (want 2), commutation>delta " +
               (commutation_exceeds_delta ? "yes" : "no") + ", recovery failed " +
               (recovery_failed ? "yes" : "no") + ", no fabricated A " +
               (no_fabricated_A ? "yes" : "no"));
}

void criterion_11_determinism() {
    if (cli_path().empty()) {
        report(11, "determinism", false, "SEPFLOW_CLI not set");
        return;
    }
    const fs::path dir_a = fs::temp_directory_path() / "sepflow_acceptance_c11a";
    const fs::path dir_b = fs::temp_directory_path() / "sepflow_acceptance_c11b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    const int ca =
        run_cli("run --builtin cat-suspension-c2 --normalize-report --out " + dir_a.string());
    const int cb =
        run_cli("run --builtin cat-suspension-c2 --normalize-report --out " + dir_b.string());
    const std::string a = slurp(dir_a / "cat-suspension-c2_report.json");
    const std::string b = slurp(dir_b / "cat-suspension-c2_report.json");
    const bool ok = ca == 0 && cb == 0 && !a.empty() && a == b;
    report(11, "determinism", ok,
           ok ? "normalized reports byte-identical across reruns"
              : "exit codes " + std::to_string(ca) + "/" + std::to_string(cb) +
                    ", byte-identical: " + (a == b && !a.empty() ? "yes" : "no"));
}

} // namespace

int main() {
    criterion_1_contraction_rate();
    criterion_2_g_slope();
    criterion_3_flow_recovery();
    criterion_4_nonconstant_A();
    criterion_5_cocycle_identities();
    criterion_6_separation();
    criterion_7_action_recovery();
    criterion_8_flowbox_bounds();
    criterion_9_epsilon0();
    criterion_10_negative_control();
    criterion_11_determinism();
    std::printf("%s\n", failures == 0 ? "acceptance: all criteria passed"
                                      : "acceptance: FAILURES PRESENT");
    return failures == 0 ? 0 : 1;
}
