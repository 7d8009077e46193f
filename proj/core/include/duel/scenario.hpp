#pragma once

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "duel/domination.hpp"
#include "duel/evasion.hpp"

namespace duel {

enum class ScenarioMode {
    Simulate,
    CheckScaling,
    Dominate,
    EvadeBounded,
    EvadeWellOrdered,
    RatioMin,
    Validate,
    DensityReport,
};

const char* mode_str(ScenarioMode m);
ScenarioMode mode_from_str(const std::string& s);

/// A runnable experiment description. Mode-specific inputs (strategy specs,
/// outcome sources, scaling functions, ...) stay in `params` as raw JSON and
/// are validated on load.
struct Scenario {
    std::string name;
    ScenarioMode mode = ScenarioMode::Simulate;
    std::optional<WagerSet> a, b;
    long horizon = 100000;
    std::optional<Value> ruler_initial;
    std::optional<Value> wealth_threshold;  // success proxy; default initial + 50
    double stabilization_window = 0.2;
    Value epsilon = Value::rational(1, 10);
    PrecisionConfig precision{128, 1024};
    bool share_bets = false;
    std::string description;
    nlohmann::json params = nlohmann::json::object();

    static Scenario from_json(const nlohmann::json& j);
    /// Round-trips through from_json; defaulted fields are materialized.
    nlohmann::json to_json() const;
};

struct RunArtifacts {
    std::vector<std::filesystem::path> csv_files;
    std::filesystem::path metadata_path;
    std::filesystem::path summary_path;
    nlohmann::json summary;
};

/// Executes the scenario and writes its artifacts (trajectory CSVs, a
/// metadata sidecar and a summary) under outdir. Throws on input errors and
/// invariant traps.
RunArtifacts run_scenario(const Scenario& scenario, const std::filesystem::path& outdir);

/// The built-in catalogue of runnable examples.
const std::vector<Scenario>& builtin_scenarios();
const Scenario* find_builtin(const std::string& name);

/// Gnuplot script plotting the wealth-like columns of a trajectory CSV.
/// Throws MissingColumns when the file has no t column or nothing to plot.
std::string emit_plot_script(const std::filesystem::path& csv);

/// Full CLI semantics over raw JSON: resolves {"builtin": name} references,
/// honors DUEL_PRECISION_BITS, and maps failures to the exit-code contract
/// (0 ok, 1 input error, 2 invariant trap).
int run_scenario_json(const nlohmann::json& scenario, const std::filesystem::path& outdir,
                      std::ostream& err, RunArtifacts* artifacts = nullptr);

}  // namespace duel
