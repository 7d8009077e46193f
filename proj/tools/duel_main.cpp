#include <CLI11.hpp>
#include <json.hpp>

#include <duel/scenario.hpp>

#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;

int cmd_run(const std::string& target, const std::string& outdir) {
    json spec;
    if (duel::find_builtin(target)) {
        spec = json{{"builtin", target}};
    } else {
        std::ifstream in(target);
        if (!in) {
            std::cerr << "input error: no builtin or readable file named '" << target << "'\n";
            return 1;
        }
        try {
            in >> spec;
        } catch (const json::exception& e) {
            std::cerr << "input error: " << target << ": " << e.what() << "\n";
            return 1;
        }
    }
    duel::RunArtifacts artifacts;
    int rc = duel::run_scenario_json(spec, outdir, std::cerr, &artifacts);
    if (rc == 0) {
        std::cout << artifacts.summary.dump(2) << "\n";
        std::cerr << "artifacts in " << outdir << ":";
        for (const auto& f : artifacts.csv_files) std::cerr << " " << f.filename().string();
        std::cerr << " " << artifacts.metadata_path.filename().string() << " "
                  << artifacts.summary_path.filename().string() << "\n";
    }
    return rc;
}

int cmd_list_builtins() {
    for (const auto& s : duel::builtin_scenarios()) {
        std::cout << s.name << " (" << duel::mode_str(s.mode) << ")";
        if (!s.description.empty()) std::cout << ": " << s.description;
        std::cout << "\n";
    }
    return 0;
}

int cmd_check_scaling(const std::string& a_text, const std::string& b_text) {
    json spec;
    spec["name"] = "check-scaling-cli";
    spec["mode"] = "check-scaling";
    try {
        spec["a"] = json::parse(a_text);
        spec["b"] = json::parse(b_text);
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    }
    duel::RunArtifacts artifacts;
    int rc = duel::run_scenario_json(spec, std::filesystem::temp_directory_path(), std::cerr,
                                     &artifacts);
    if (rc == 0) {
        json out;
        out["scales"] = artifacts.summary["scales"];
        if (artifacts.summary.contains("r")) out["r"] = artifacts.summary["r"];
        if (artifacts.summary.contains("note")) out["note"] = artifacts.summary["note"];
        std::cout << out.dump() << "\n";
    }
    return rc;
}

int cmd_plot(const std::string& csv, std::string out_path) {
    try {
        std::string script = duel::emit_plot_script(csv);
        if (out_path.empty()) out_path = csv + ".gp";
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "input error: cannot write " << out_path << "\n";
            return 1;
        }
        out << script;
        std::cout << out_path << "\n";
        return 0;
    } catch (const duel::Error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic martingale-vs-casino simulation engine"};
    app.require_subcommand(1);

    std::string target, outdir = ".", a_text, b_text, csv, plot_out;

    auto* run = app.add_subcommand("run", "run a scenario file or builtin by name");
    run->add_option("scenario", target, "scenario JSON path or builtin name")->required();
    run->add_option("--out", outdir, "output directory for artifacts");

    auto* list = app.add_subcommand("list-builtins", "list the builtin scenarios");

    auto* check = app.add_subcommand("check-scaling", "decide whether A scales into B");
    check->add_option("--a", a_text, "wager set JSON for A")->required();
    check->add_option("--b", b_text, "wager set JSON for B")->required();

    auto* plot = app.add_subcommand("plot", "emit a gnuplot script for a trajectory CSV");
    plot->add_option("csv", csv, "trajectory CSV path")->required();
    plot->add_option("--out", plot_out, "script output path (default <csv>.gp)");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(target, outdir);
    if (list->parsed()) return cmd_list_builtins();
    if (check->parsed()) return cmd_check_scaling(a_text, b_text);
    if (plot->parsed()) return cmd_plot(csv, plot_out);
    return 1;
}
