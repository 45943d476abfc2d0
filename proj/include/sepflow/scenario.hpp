#ifndef SEPFLOW_SCENARIO_HPP
#define SEPFLOW_SCENARIO_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sepflow/action.hpp"
#include "sepflow/centralizer.hpp"
#include "sepflow/constants.hpp"
#include "sepflow/report_io.hpp"
#include "sepflow/system.hpp"

namespace sepflow {

/// A fully validated scenario: the flow/action pair to audit, tolerances,
/// horizons, and sample budgets. Seeds are mandatory; every run is
/// reproducible.
struct ScenarioConfig {
    std::string name;
    std::string description;
    ordered_json phi;
    ordered_json psi = nullptr;      // optional
    ordered_json expected = nullptr; // optional: A / A-by-component / A-matrix /
                                     // min-separated-fraction
    std::map<std::string, double> tolerances;
    std::map<std::string, double> horizons;
    std::map<std::string, int> samples;
    std::uint64_t seed = 0;
};

/// Validates and converts a config document. Throws SchemaError naming the
/// offending field.
ScenarioConfig parse_scenario(const ordered_json& doc);

/// Builds a system from its config description (standalone kinds).
SystemSpec system_from_config(const ordered_json& spec);

/// Builds the commuting candidate. Accepts the standalone kinds plus the
/// phi-relative ones: {"kind":"reparam","factor":c},
/// {"kind":"reparam-by-component","factors":[...]} and
/// {"kind":"action-matrix","matrix":B}.
SystemSpec psi_from_config(const ordered_json& spec, const SystemSpec& phi);

struct AuditEntry {
    std::string name;
    double residual = 0; // NaN when the producing stage never ran
    double tolerance = 0;
    bool passed = false; // residual <= tolerance
    std::string note;
};

/// Per-chart cross-section audit record.
struct SectionAudit {
    ChartPoint center;
    double g_slope = 0;
    int solves = 0;
    std::vector<int> rate_histogram; // 8 bins over [0, 7/12 + 0.05]
    double rate_max = 0;
    double residual_max = 0; // level-set membership residual
};

/// Per-chart flowbox derivative bounds.
struct ChartBounds {
    ChartPoint center;
    double m_min = 0;
    double norm_max = 0;
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    bool is_action = false;

    FlowConstants constants;    // flow scenarios
    SeparationReport separation;
    bool separating_certified = false;
    std::vector<SectionAudit> sections;
    ReparamField reparam;

    double action_epsilon0 = 0; // action scenarios
    double action_r0 = 0;
    double action_mu = 0;
    std::vector<ChartBounds> chart_bounds;
    MatrixField matrix_field;

    std::vector<AuditEntry> audits;
    std::string failure_stage; // empty when every stage ran
    double wall_time_seconds = 0;

    bool all_passed() const;
};

/// Runs calibrate -> sections -> separation -> recovery -> verification and
/// assembles the report. Recovery failures are carried into the audits with
/// stage attribution; schema errors throw before any work happens.
RunReport run_scenario(const ScenarioConfig& config);

ordered_json report_to_json(const RunReport& report, bool normalize);

/// Delimiter-separated per-point table (component, coordinates, A values,
/// residual) for external plotting.
std::string points_table(const RunReport& report);

/// 0 when every audit passed, 2 otherwise.
int report_exit_code(const RunReport& report);

const std::vector<ScenarioConfig>& builtin_catalog();
const ScenarioConfig* find_builtin(const std::string& name);

} // namespace sepflow

#endif
