#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sepflow/errors.hpp"
#include "sepflow/report_io.hpp"
#include "sepflow/scenario.hpp"

namespace fs = std::filesystem;
using sepflow::ordered_json;

namespace {

// exit code contract: 0 audits pass, 2 audit failure, 3 schema error,
// 4 pipeline error
constexpr int kExitAuditFailure = 2;
constexpr int kExitSchemaError = 3;
constexpr int kExitPipelineError = 4;

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SEPFLOW_OUT_DIR"); env && *env) return env;
    return ".";
}

int run_command(const std::string& config_path, const std::string& builtin,
                const std::string& out_flag, std::optional<long long> seed_override,
                std::optional<int> samples_override, std::optional<double> horizon_override,
                bool normalize) {
    sepflow::ScenarioConfig cfg;
    try {
        if (!builtin.empty()) {
            const sepflow::ScenarioConfig* found = sepflow::find_builtin(builtin);
            if (!found) {
                std::cerr << "unknown builtin scenario \"" << builtin
                          << "\" (see `sepflow list`)\n";
                return kExitSchemaError;
            }
            cfg = *found;
        } else {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "cannot open config file " << config_path << "\n";
                return kExitSchemaError;
            }
            ordered_json doc;
            try {
                doc = ordered_json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                std::cerr << "config parse error: " << e.what() << "\n";
                return kExitSchemaError;
            }
            cfg = sepflow::parse_scenario(doc);
        }
        if (seed_override) cfg.seed = static_cast<std::uint64_t>(*seed_override);
        if (samples_override) {
            cfg.samples["points"] = *samples_override;
            cfg.samples["pairs"] = *samples_override;
            cfg.samples["charts"] = *samples_override;
            cfg.samples["cocycle"] = *samples_override;
        }
        if (horizon_override) {
            cfg.horizons["separation"] = *horizon_override;
            cfg.horizons["quasitrivial"] = *horizon_override;
        }
    } catch (const sepflow::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchemaError;
    }

    sepflow::RunReport report;
    try {
        report = sepflow::run_scenario(cfg);
    } catch (const sepflow::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchemaError;
    } catch (const sepflow::Error& e) {
        std::cerr << "pipeline error in scenario " << cfg.name << ": " << e.what() << "\n";
        return kExitPipelineError;
    }

    const fs::path out_dir = resolve_out_dir(out_flag);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const fs::path report_path = out_dir / (cfg.name + "_report.json");
    const fs::path points_path = out_dir / (cfg.name + "_points.tsv");
    {
        std::ofstream out(report_path, std::ios::binary);
        out << sepflow::dump_canonical(sepflow::report_to_json(report, normalize));
    }
    {
        std::ofstream out(points_path, std::ios::binary);
        out << sepflow::points_table(report);
    }

    for (const auto& a : report.audits) {
        std::cout << (a.passed ? "[PASS] " : "[FAIL] ") << a.name << "  residual=" << a.residual
                  << "  tolerance=" << a.tolerance;
        if (!a.note.empty()) std::cout << "  (" << a.note << ")";
        std::cout << "\n";
    }
    std::cout << (report.all_passed() ? "all audits passed" : "audit failures present") << "; report "
              << report_path.string() << "\n";
    return report.all_passed() ? 0 : kExitAuditFailure;
}

int list_command(bool as_json) {
    if (as_json) {
        ordered_json j = ordered_json::array();
        for (const auto& cfg : sepflow::builtin_catalog()) {
            ordered_json e;
            e["name"] = cfg.name;
            e["description"] = cfg.description;
            e["seed"] = cfg.seed;
            j.push_back(e);
        }
        std::cout << sepflow::dump_canonical(j);
    } else {
        for (const auto& cfg : sepflow::builtin_catalog())
            std::cout << cfg.name << "  -  " << cfg.description << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"scenario runner for separating-flow centralizer audits"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "list built-in scenarios");
    bool list_json = false;
    list->add_flag("--json", list_json, "emit the catalog as JSON");

    auto* run = app.add_subcommand("run", "run a scenario and write its report");
    std::string config_path, builtin, out_dir;
    std::optional<long long> seed_override;
    std::optional<int> samples_override;
    std::optional<double> horizon_override;
    bool normalize = false;
    run->add_option("config", config_path, "path to a scenario config (JSON)");
    run->add_option("--builtin", builtin, "name of a built-in scenario");
    run->add_option("--out", out_dir,
                    "output directory (default: $SEPFLOW_OUT_DIR or current directory)");
    run->add_option("--seed", seed_override, "override the scenario seed");
    run->add_option("--samples", samples_override,
                    "override the points/pairs/charts/cocycle sample counts");
    run->add_option("--horizon", horizon_override,
                    "override the separation and quasi-triviality horizons");
    run->add_flag("--normalize-report", normalize, "strip timings for byte-stable reports");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) return list_command(list_json);
    if (config_path.empty() == builtin.empty()) {
        std::cerr << "run needs exactly one of: a config path, or --builtin <name>\n";
        return kExitSchemaError;
    }
    return run_command(config_path, builtin, out_dir, seed_override, samples_override,
                       horizon_override, normalize);
}
