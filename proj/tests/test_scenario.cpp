#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <duel/scenario.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace duel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("duel-test-" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.size() && line.back() == ',') cells.push_back("");
        rows.push_back(cells);
    }
    return rows;
}

struct PrecisionGuard {
    PrecisionConfig saved = precision_config();
    ~PrecisionGuard() { precision_config() = saved; }
};

}  // namespace

TEST_CASE("builtin catalogue") {
    const auto& builtins = builtin_scenarios();
    CHECK(builtins.size() >= 7);
    REQUIRE(find_builtin("evens-vs-odds"));
    CHECK(find_builtin("evens-vs-odds")->mode == ScenarioMode::EvadeWellOrdered);
    REQUIRE(find_builtin("rplus-vs-unit-interval"));
    CHECK(find_builtin("rplus-vs-unit-interval")->mode == ScenarioMode::Dominate);
    CHECK(find_builtin("rplus-vs-unit-interval")->params.at("f").at("kind") == "min_reciprocal");
    CHECK(find_builtin("intro-1-2-vs-1")->mode == ScenarioMode::Simulate);
    CHECK(find_builtin("harmonic-shifted-vs-integers")->mode == ScenarioMode::EvadeBounded);
    CHECK(find_builtin("nope") == nullptr);
    for (const auto& s : builtins) {
        CHECK_FALSE(s.description.empty());
        // every builtin round-trips through its JSON form
        auto j = s.to_json();
        CHECK(Scenario::from_json(j).to_json() == j);
    }
}

TEST_CASE("scenario JSON validation names the offending field") {
    json good = find_builtin("intro-1-2-vs-1")->to_json();
    CHECK_NOTHROW(Scenario::from_json(good));

    json bad = good;
    bad["horizon"] = 0;
    CHECK_THROWS_WITH_AS(Scenario::from_json(bad), doctest::Contains("horizon"), InputError);

    json unknown = good;
    unknown["frobnicate"] = 1;
    CHECK_THROWS_WITH_AS(Scenario::from_json(unknown), doctest::Contains("frobnicate"),
                         InputError);

    json missing = good;
    missing.erase("gamblers");
    CHECK_THROWS_WITH_AS(Scenario::from_json(missing), doctest::Contains("gamblers"), InputError);

    json nomode = good;
    nomode.erase("mode");
    CHECK_THROWS_AS(Scenario::from_json(nomode), InputError);
}

TEST_CASE("the worked example runs with the expected flags") {
    auto dir = fresh_dir("intro");
    auto art = run_scenario(*find_builtin("intro-1-2-vs-1"), dir);

    REQUIRE(art.summary["gamblers"].size() == 2);
    CHECK(art.summary["gamblers"][0]["success"] == true);
    CHECK(art.summary["gamblers"][1]["success"] == false);
    CHECK(art.summary["switch_step"] == 2);

    // row count is horizon + 1 including the t = 0 row
    auto rows = read_csv(art.csv_files[0]);
    CHECK(rows.size() == 10002);  // header + 10001 rows
    CHECK(rows[1][0] == "0");
    CHECK(rows[1][3] == "4");

    // the summary is recomputable from the CSV rows by an independent reader
    for (size_t g = 0; g < 2; ++g) {
        auto grows = read_csv(art.csv_files[g]);
        Value final_wealth = Value::parse(grows.back()[3]);
        CHECK(final_wealth.str() == art.summary["gamblers"][g]["final"].get<std::string>());
        Value threshold = Value::parse(art.summary["gamblers"][g]["threshold"].get<std::string>());
        bool overbet = false;
        Value wealth = Value::parse(grows[1][3]);
        std::optional<long> last_active;
        for (size_t i = 2; i < grows.size(); ++i) {
            Value wager = grows[i][2].empty() ? Value(0) : Value::parse(grows[i][2]);
            if (wager.abs() > wealth) overbet = true;
            wealth = Value::parse(grows[i][3]);
            if (!wager.is_zero()) last_active = static_cast<long>(i) - 2;
        }
        bool success = !overbet && final_wealth >= threshold;
        CHECK(success == art.summary["gamblers"][g]["success"].get<bool>());
        long window_start = art.summary["window_start"].get<long>();
        bool stabilized = !last_active || *last_active < window_start;
        CHECK(stabilized == art.summary["gamblers"][g]["stabilized"].get<bool>());
    }
}

TEST_CASE("scenario runs are byte-identical across repeats") {
    json spec = {{"builtin", "harmonic-shifted-vs-integers"}, {"horizon", 4000}};
    auto dir1 = fresh_dir("det1");
    auto dir2 = fresh_dir("det2");
    RunArtifacts a1, a2;
    std::ostringstream err;
    REQUIRE(run_scenario_json(spec, dir1, err, &a1) == 0);
    REQUIRE(run_scenario_json(spec, dir2, err, &a2) == 0);
    REQUIRE(a1.csv_files.size() == a2.csv_files.size());
    for (size_t i = 0; i < a1.csv_files.size(); ++i)
        CHECK(slurp(a1.csv_files[i]) == slurp(a2.csv_files[i]));
    CHECK(slurp(a1.summary_path) == slurp(a2.summary_path));
}

TEST_CASE("metadata reproduces the scenario") {
    auto dir = fresh_dir("meta");
    json spec = {{"builtin", "evens-vs-odds"}, {"horizon", 2000}};
    RunArtifacts art;
    std::ostringstream err;
    REQUIRE(run_scenario_json(spec, dir, err, &art) == 0);
    json meta = json::parse(slurp(art.metadata_path));
    Scenario back = Scenario::from_json(meta["scenario"]);
    CHECK(back.name == "evens-vs-odds");
    CHECK(back.horizon == 2000);
    CHECK(back.to_json() == meta["scenario"]);
    CHECK(meta.contains("precision"));
    // the odds-as-sieve descriptor triggers the ideal-cover warning
    CHECK(meta.contains("set_warnings"));
}

TEST_CASE("evade-bounded artifacts have the pinned schemas") {
    auto dir = fresh_dir("bounded");
    json spec = {{"builtin", "harmonic-shifted-vs-integers"}, {"horizon", 1500}};
    RunArtifacts art;
    std::ostringstream err;
    REQUIRE(run_scenario_json(spec, dir, err, &art) == 0);

    auto casino = read_csv(art.csv_files[0]);
    CHECK(casino[0] == std::vector<std::string>{"t", "outcome", "m", "k", "case", "acting_index",
                                                "S_k"});
    CHECK(casino.size() == 1502);
    CHECK(casino[1][1].empty());  // no outcome on the t = 0 row
    auto mrows = read_csv(art.csv_files[1]);
    CHECK(mrows[0] == std::vector<std::string>{"t", "outcome", "wager_signed", "wealth"});
    CHECK(art.summary["stabilization"]["opponents"].size() == 4);
}

TEST_CASE("evade-wellordered artifacts have the pinned schemas") {
    auto dir = fresh_dir("wo");
    json spec = {{"builtin", "evens-vs-odds"}, {"horizon", 1500}};
    RunArtifacts art;
    std::ostringstream err;
    REQUIRE(run_scenario_json(spec, dir, err, &art) == 0);
    auto casino = read_csv(art.csv_files[0]);
    CHECK(casino[0] == std::vector<std::string>{"t", "outcome", "m", "m_inc", "g", "p", "mu",
                                                "case", "acting_index"});
    CHECK(casino.size() == 1502);
}

TEST_CASE("plot scripts cover the wealth columns") {
    auto dir = fresh_dir("plot");
    json spec = {{"builtin", "evens-vs-odds"}, {"horizon", 600}};
    RunArtifacts art;
    std::ostringstream err;
    REQUIRE(run_scenario_json(spec, dir, err, &art) == 0);

    std::string wo = emit_plot_script(art.csv_files[0]);
    CHECK(wo.find("title 'm'") != std::string::npos);
    CHECK(wo.find("title 'g'") != std::string::npos);
    CHECK(wo.find("set datafile separator comma") != std::string::npos);

    std::string runplot = emit_plot_script(art.csv_files[1]);
    CHECK(runplot.find("title 'wealth'") != std::string::npos);

    fs::path empty = dir / "empty.csv";
    std::ofstream(empty) << "a,b\n";
    CHECK_THROWS_AS(emit_plot_script(empty), MissingColumns);
    CHECK_THROWS_AS(emit_plot_script(dir / "missing.csv"), InputError);
}

TEST_CASE("check-scaling scenario summaries") {
    auto dir = fresh_dir("scal");
    json spec;
    spec["name"] = "sc";
    spec["mode"] = "check-scaling";
    spec["a"] = {{"kind", "integer_multiples"}, {"step", "1"}};
    spec["b"] = {{"kind", "integer_multiples"}, {"step", "2"}};
    RunArtifacts art;
    std::ostringstream err;
    REQUIRE(run_scenario_json(spec, dir, err, &art) == 0);
    CHECK(art.summary["scales"] == "Yes");
    CHECK(art.summary["r"] == "2");

    spec["a"] = {{"kind", "finite"}, {"elements", {"1", {{"const", "pi"}, {"bits", 128}}}}};
    spec["b"] = {{"kind", "integer_multiples"}, {"step", "1"}};
    REQUIRE(run_scenario_json(spec, dir, err, &art) == 0);
    CHECK(art.summary["scales"] == "No");
}

TEST_CASE("ratio-min, validate and density-report modes") {
    auto dir = fresh_dir("modes");
    std::ostringstream err;

    json rm;
    rm["name"] = "rm";
    rm["mode"] = "ratio-min";
    rm["horizon"] = 2048;
    rm["n"] = {{"kind", "stop_on_bankrupt"},
               {"inner", {{"kind", "always_heads"}, {"wager", "1"}, {"initial", "16"}}},
               {"set", {{"kind", "integer_multiples"}, {"step", "1"}}}};
    rm["m"] = {{"kind", "ruler"},
               {"set", {{"kind", "harmonic_shifted"}}},
               {"initial", "64"}};
    RunArtifacts art;
    REQUIRE(run_scenario_json(rm, dir, err, &art) == 0);
    CHECK(art.summary["deviation_density"].contains("1024"));
    auto rows = read_csv(art.csv_files[0]);
    CHECK(rows[0] == std::vector<std::string>{"t", "outcome", "n", "m", "n_inc", "m_inc",
                                              "ratio"});
    CHECK(rows.size() == 2050);

    json va;
    va["name"] = "va";
    va["mode"] = "validate";
    va["a"] = {{"kind", "finite"}, {"elements", {"1", "2"}}};
    va["strategy"] = {{"kind", "ruler"},
                      {"set", {{"kind", "finite"}, {"elements", {"1", "2"}}}},
                      {"initial", "28"}};
    va["depth"] = 12;
    REQUIRE(run_scenario_json(va, dir, err, &art) == 0);
    CHECK(art.summary["valid"] == true);

    json dr;
    dr["name"] = "dr";
    dr["mode"] = "density-report";
    dr["horizon"] = 65536;
    dr["strategy"] = {{"kind", "ruler"},
                      {"set", {{"kind", "finite"}, {"elements", {"1", "2"}}}},
                      {"initial", "64"}};
    dr["targets"] = {"1", "2", "10"};
    dr["epsilon"] = "0";
    REQUIRE(run_scenario_json(dr, dir, err, &art) == 0);
    CHECK(art.summary["densities"]["10"] == "0");
    Value d1 = Value::parse(art.summary["densities"]["1"].get<std::string>());
    CHECK(d1 >= Value::rational(1, 2));
}

TEST_CASE("exit codes: input failures map to 1") {
    auto dir = fresh_dir("exit");
    std::ostringstream err;
    CHECK(run_scenario_json(json{{"builtin", "nope"}}, dir, err) == 1);
    CHECK(err.str().find("nope") != std::string::npos);
    CHECK(run_scenario_json(json{{"name", "x"}}, dir, err) == 1);
    CHECK(run_scenario_json(json::parse("[1,2]"), dir, err) == 1);
    json bad = find_builtin("evens-vs-odds")->to_json();
    bad["b"] = {{"kind", "harmonic_shifted"}};  // not well ordered
    CHECK(run_scenario_json(bad, dir, err) == 1);
}

TEST_CASE("builtin overrides merge on top of the catalogue entry") {
    auto dir = fresh_dir("merge");
    std::ostringstream err;
    RunArtifacts art;
    json spec = {{"builtin", "intro-1-2-vs-1"}, {"horizon", 64}};
    REQUIRE(run_scenario_json(spec, dir, err, &art) == 0);
    auto rows = read_csv(art.csv_files[0]);
    CHECK(rows.size() == 66);
}

TEST_CASE("DUEL_PRECISION_BITS overrides the enclosure precision") {
    PrecisionGuard guard;
    auto dir = fresh_dir("env");
    std::ostringstream err;
    json spec;
    spec["name"] = "sc";
    spec["mode"] = "check-scaling";
    spec["a"] = {{"kind", "finite"}, {"elements", {"1"}}};
    spec["b"] = {{"kind", "finite"}, {"elements", {"2"}}};
    setenv("DUEL_PRECISION_BITS", "256", 1);
    REQUIRE(run_scenario_json(spec, dir, err) == 0);
    CHECK(precision_config().start_bits == 256);
    setenv("DUEL_PRECISION_BITS", "banana", 1);
    CHECK(run_scenario_json(spec, dir, err) == 1);
    unsetenv("DUEL_PRECISION_BITS");
}

TEST_CASE("dominate scenarios certify the shadow") {
    auto dir = fresh_dir("dom");
    std::ostringstream err;
    RunArtifacts art;
    json spec = {{"builtin", "dyadic-powers"}, {"horizon", 1000}};
    REQUIRE(run_scenario_json(spec, dir, err, &art) == 0);
    CHECK(art.summary["integral_bound"]["ok"] == true);
    CHECK(art.summary["shadow_wagers_in_closure_b"] == true);
    CHECK(art.summary["integral_bound"]["first_violation"].is_null());
}
