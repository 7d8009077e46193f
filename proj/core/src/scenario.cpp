#include "duel/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace duel {

using json = nlohmann::json;
namespace fs = std::filesystem;

const char* mode_str(ScenarioMode m) {
    switch (m) {
        case ScenarioMode::Simulate: return "simulate";
        case ScenarioMode::CheckScaling: return "check-scaling";
        case ScenarioMode::Dominate: return "dominate";
        case ScenarioMode::EvadeBounded: return "evade-bounded";
        case ScenarioMode::EvadeWellOrdered: return "evade-wellordered";
        case ScenarioMode::RatioMin: return "ratio-min";
        case ScenarioMode::Validate: return "validate";
        case ScenarioMode::DensityReport: return "density-report";
    }
    return "?";
}

ScenarioMode mode_from_str(const std::string& s) {
    static const std::map<std::string, ScenarioMode> lut = {
        {"simulate", ScenarioMode::Simulate},
        {"check-scaling", ScenarioMode::CheckScaling},
        {"dominate", ScenarioMode::Dominate},
        {"evade-bounded", ScenarioMode::EvadeBounded},
        {"evade-wellordered", ScenarioMode::EvadeWellOrdered},
        {"ratio-min", ScenarioMode::RatioMin},
        {"validate", ScenarioMode::Validate},
        {"density-report", ScenarioMode::DensityReport},
    };
    auto it = lut.find(s);
    if (it == lut.end()) throw InputError("field 'mode': unknown mode '" + s + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// Scenario parsing

namespace {

Value parse_value_field(const json& j, const std::string& field) {
    if (j.is_string()) return Value::parse(j.get<std::string>());
    if (j.is_number_integer()) return Value(static_cast<long>(j.get<long long>()));
    throw InputError("field '" + field + "': expected a \"p/q\" string");
}

const std::set<std::string>& param_keys() {
    static const std::set<std::string> keys = {"gamblers", "opponents", "outcomes", "m",
                                               "n",        "f",         "strategy", "prefix",
                                               "depth",    "targets"};
    return keys;
}

void require_param(const Scenario& s, const char* key) {
    if (!s.params.contains(key))
        throw InputError(std::string("mode '") + mode_str(s.mode) + "' needs field '" + key +
                         "'");
}

void require_set(const std::optional<WagerSet>& w, const char* key, ScenarioMode mode) {
    if (!w)
        throw InputError(std::string("mode '") + mode_str(mode) + "' needs field '" + key + "'");
}

}  // namespace

Scenario Scenario::from_json(const json& j) {
    if (!j.is_object()) throw InputError("scenario must be a JSON object");
    Scenario s;
    for (const auto& [key, value] : j.items()) {
        if (key == "name") s.name = value.get<std::string>();
        else if (key == "mode") s.mode = mode_from_str(value.get<std::string>());
        else if (key == "a") s.a = WagerSet::from_json(value);
        else if (key == "b") s.b = WagerSet::from_json(value);
        else if (key == "horizon") {
            if (!value.is_number_integer() || value.get<long long>() < 1)
                throw InputError("field 'horizon': integer >= 1 required");
            s.horizon = value.get<long>();
        } else if (key == "ruler_initial") s.ruler_initial = parse_value_field(value, key);
        else if (key == "wealth_threshold") s.wealth_threshold = parse_value_field(value, key);
        else if (key == "stabilization_window") {
            double w = value.get<double>();
            if (!(w > 0.0 && w <= 1.0))
                throw InputError("field 'stabilization_window': expected a fraction in (0,1]");
            s.stabilization_window = w;
        } else if (key == "epsilon") s.epsilon = parse_value_field(value, key);
        else if (key == "precision") {
            s.precision.start_bits = value.value("start_bits", 128L);
            s.precision.cap_bits = value.value("cap_bits", 1024L);
            if (s.precision.start_bits < 4 || s.precision.cap_bits < s.precision.start_bits)
                throw InputError("field 'precision': need 4 <= start_bits <= cap_bits");
        } else if (key == "share_bets") s.share_bets = value.get<bool>();
        else if (key == "description") s.description = value.get<std::string>();
        else if (param_keys().count(key)) s.params[key] = value;
        else throw InputError("unknown scenario field '" + key + "'");
    }
    if (s.name.empty()) throw InputError("field 'name' is required");
    if (!j.contains("mode")) throw InputError("field 'mode' is required");

    switch (s.mode) {
        case ScenarioMode::Simulate:
            require_param(s, "gamblers");
            require_param(s, "outcomes");
            if (!s.params["gamblers"].is_array() || s.params["gamblers"].empty())
                throw InputError("field 'gamblers': nonempty array required");
            break;
        case ScenarioMode::CheckScaling:
            require_set(s.a, "a", s.mode);
            require_set(s.b, "b", s.mode);
            break;
        case ScenarioMode::Dominate:
            require_param(s, "f");
            require_param(s, "m");
            require_param(s, "outcomes");
            break;
        case ScenarioMode::EvadeBounded:
        case ScenarioMode::EvadeWellOrdered:
            require_set(s.a, "a", s.mode);
            require_set(s.b, "b", s.mode);
            require_param(s, "opponents");
            if (!s.params["opponents"].is_array())
                throw InputError("field 'opponents': array required");
            break;
        case ScenarioMode::RatioMin:
            require_param(s, "n");
            require_param(s, "m");
            break;
        case ScenarioMode::Validate:
            require_set(s.a, "a", s.mode);
            require_param(s, "strategy");
            break;
        case ScenarioMode::DensityReport:
            require_param(s, "strategy");
            require_param(s, "targets");
            break;
    }
    return s;
}

json Scenario::to_json() const {
    json j;
    j["name"] = name;
    j["mode"] = mode_str(mode);
    if (a) j["a"] = a->to_json();
    if (b) j["b"] = b->to_json();
    j["horizon"] = horizon;
    if (ruler_initial) j["ruler_initial"] = rational_str(ruler_initial->as_rational());
    if (wealth_threshold) j["wealth_threshold"] = rational_str(wealth_threshold->as_rational());
    j["stabilization_window"] = stabilization_window;
    j["epsilon"] = rational_str(epsilon.as_rational());
    j["precision"] = {{"start_bits", precision.start_bits}, {"cap_bits", precision.cap_bits}};
    j["share_bets"] = share_bets;
    if (!description.empty()) j["description"] = description;
    for (const auto& [key, value] : params.items()) j[key] = value;
    return j;
}

// ---------------------------------------------------------------------------
// Artifact writers

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw InputError("cannot open output file " + p.string());
    return out;
}

std::string csv_value(const Value& v) { return v.str(); }

void write_run_csv(const fs::path& p, const MartingaleRun& run) {
    auto out = open_out(p);
    out << "t,outcome,wager_signed,wealth\n";
    out << "0,,," << csv_value(run.wealth(0)) << "\n";
    for (size_t t = 1; t <= run.steps(); ++t) {
        out << t << ',' << outcome_char(run.history()[t - 1]) << ','
            << csv_value(run.increment(t - 1)) << ',' << csv_value(run.wealth(t)) << "\n";
    }
}

const char* case_str(int tag) { return tag == 1 ? "I" : tag == 2 ? "II" : ""; }

void write_bounded_csv(const fs::path& p, const std::vector<BoundedCasinoState>& log) {
    auto out = open_out(p);
    out << "t,outcome,m,k,case,acting_index,S_k\n";
    for (const auto& row : log) {
        out << row.t << ',' << (row.outcome ? std::string(1, outcome_char(*row.outcome)) : "")
            << ',' << csv_value(row.m) << ',' << row.k << ',' << case_str(row.case_tag) << ',';
        if (row.case_tag != 0) out << row.acting_index;
        out << ',' << csv_value(row.s_k) << "\n";
    }
}

void write_wellordered_csv(const fs::path& p, const std::vector<WellOrderedCasinoState>& log) {
    auto out = open_out(p);
    out << "t,outcome,m,m_inc,g,p,mu,case,acting_index\n";
    for (const auto& row : log) {
        out << row.t << ',' << (row.outcome ? std::string(1, outcome_char(*row.outcome)) : "")
            << ',' << csv_value(row.m) << ',' << csv_value(row.m_inc) << ',' << csv_value(row.g)
            << ',' << row.p << ',' << csv_value(row.mu) << ',' << case_str(row.case_tag) << ',';
        if (row.case_tag != 0) out << row.acting_index;
        out << "\n";
    }
}

void write_ratio_csv(const fs::path& p, const RatioMinTrace& trace, const Value& n0,
                     const Value& m0) {
    auto out = open_out(p);
    out << "t,outcome,n,m,n_inc,m_inc,ratio\n";
    out << "0,," << csv_value(n0) << ',' << csv_value(m0) << ",,,"
        << csv_value(trace.initial_ratio) << "\n";
    for (const auto& row : trace.steps) {
        bool heads = row.outcome == Outcome::Heads;
        Value n_after = heads ? row.n + row.n_inc : row.n - row.n_inc;
        Value m_after = heads ? row.m + row.m_inc : row.m - row.m_inc;
        out << (row.t + 1) << ',' << outcome_char(row.outcome) << ',' << csv_value(n_after)
            << ',' << csv_value(m_after) << ',' << csv_value(row.n_inc) << ','
            << csv_value(row.m_inc) << ',' << csv_value(row.ratio_after) << "\n";
    }
}

Value threshold_for(const Scenario& s, const Value& initial) {
    return s.wealth_threshold ? *s.wealth_threshold : initial + Value(50);
}

json run_summary_entry(const MartingaleRun& run, const Value& threshold, long window_start) {
    json e;
    e["initial"] = run.wealth(0).str();
    e["final"] = run.current_wealth().str();
    e["threshold"] = threshold.str();
    e["success"] = success_at_horizon(run, threshold);
    e["overbet_step"] =
        run.first_overbet_step() ? json(*run.first_overbet_step()) : json(nullptr);
    std::optional<long> last_active;
    for (size_t t = run.steps(); t-- > 0;) {
        if (!run.increment(t).is_zero()) {
            last_active = static_cast<long>(t);
            break;
        }
    }
    e["last_active"] = last_active ? json(*last_active) : json(nullptr);
    e["stabilized"] = !last_active || *last_active < window_start;
    return e;
}

json set_warnings_json(const Scenario& s) {
    json w = json::object();
    if (s.a) {
        auto wa = s.a->structural_warnings();
        if (!wa.empty()) w["a"] = wa;
    }
    if (s.b) {
        auto wb = s.b->structural_warnings();
        if (!wb.empty()) w["b"] = wb;
    }
    return w;
}

void write_json(const fs::path& p, const json& j) {
    auto out = open_out(p);
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Outcome sources

struct OutcomeGen {
    enum class Kind { Script, AllHeads, AllTails, Alternating, Pseudorandom };
    Kind kind = Kind::AllHeads;
    History script;
    std::mt19937_64 rng;

    Outcome next(long t) {
        switch (kind) {
            case Kind::Script:
                if (static_cast<size_t>(t) >= script.size())
                    throw InputError("outcome script shorter than the horizon");
                return script[static_cast<size_t>(t)];
            case Kind::AllHeads:
                return Outcome::Heads;
            case Kind::AllTails:
                return Outcome::Tails;
            case Kind::Alternating:
                return t % 2 == 0 ? Outcome::Heads : Outcome::Tails;
            case Kind::Pseudorandom:
                return rng() & 1 ? Outcome::Heads : Outcome::Tails;
        }
        throw InvariantViolation("outcome source fell through");
    }
};

OutcomeGen outcome_gen_from(const json& spec) {
    OutcomeGen gen;
    if (spec.is_string()) {
        gen.kind = OutcomeGen::Kind::Script;
        gen.script = parse_history(spec.get<std::string>());
        return gen;
    }
    if (!spec.is_object() || !spec.contains("kind"))
        throw InputError("field 'outcomes': needs a 'kind'");
    std::string k = spec["kind"].get<std::string>();
    if (k == "script") {
        gen.kind = OutcomeGen::Kind::Script;
        gen.script = parse_history(spec.value("outcomes", std::string()));
    } else if (k == "all_heads") gen.kind = OutcomeGen::Kind::AllHeads;
    else if (k == "all_tails") gen.kind = OutcomeGen::Kind::AllTails;
    else if (k == "alternating") gen.kind = OutcomeGen::Kind::Alternating;
    else if (k == "pseudorandom") {
        gen.kind = OutcomeGen::Kind::Pseudorandom;
        gen.rng.seed(spec.value("seed", 0ull));
    } else if (k == "two_phase") {
        throw InputError("two_phase outcomes are only available in simulate mode");
    } else {
        throw InputError("field 'outcomes': unknown kind '" + k + "'");
    }
    return gen;
}

// ---------------------------------------------------------------------------
// Mode runners

RunArtifacts run_simulate(const Scenario& s, const fs::path& outdir) {
    RunArtifacts art;
    const json& outcomes = s.params.at("outcomes");
    long window_start = s.horizon - static_cast<long>(s.horizon * s.stabilization_window);
    json summary;
    summary["mode"] = mode_str(s.mode);
    summary["horizon"] = s.horizon;
    summary["window_start"] = window_start;

    std::vector<MartingaleRun> runs;
    if (outcomes.is_object() && outcomes.value("kind", "") == "two_phase") {
        const json& gamblers = s.params.at("gamblers");
        if (gamblers.size() != 2)
            throw InputError("two_phase outcomes need exactly two gamblers");
        Value lead = outcomes.contains("lead") ? parse_value_field(outcomes["lead"], "lead")
                                               : Value(3);
        auto result = two_phase_casino(make_strategy(gamblers[0]), make_strategy(gamblers[1]),
                                       s.horizon, lead);
        summary["switch_step"] = result.switch_step;
        runs.push_back(std::move(result.leader_run));
        runs.push_back(std::move(result.trailer_run));
    } else {
        OutcomeGen gen = outcome_gen_from(outcomes);
        for (const auto& spec : s.params.at("gamblers"))
            runs.emplace_back(make_strategy(spec), /*strict=*/false);
        for (long t = 0; t < s.horizon; ++t) {
            Outcome x = gen.next(t);
            if (s.share_bets) {
                std::vector<Value> bets;
                for (auto& r : runs) bets.push_back(r.pending_increment());
                for (auto& r : runs) r.strategy().observe_bets(bets);
            }
            for (auto& r : runs) r.step(x);
        }
    }

    json entries = json::array();
    for (size_t i = 0; i < runs.size(); ++i) {
        fs::path csv = outdir / (s.name + "_gambler" + std::to_string(i) + ".csv");
        write_run_csv(csv, runs[i]);
        art.csv_files.push_back(csv);
        entries.push_back(run_summary_entry(runs[i], threshold_for(s, runs[i].wealth(0)),
                                            window_start));
    }
    summary["gamblers"] = entries;
    art.summary = summary;
    return art;
}

RunArtifacts run_check_scaling(const Scenario& s, const fs::path&) {
    RunArtifacts art;
    auto res = scales_into(*s.a, *s.b);
    json summary;
    summary["mode"] = mode_str(s.mode);
    switch (res.kind) {
        case ScalesResult::Kind::Yes:
            summary["scales"] = "Yes";
            summary["r"] = res.ratio.str();
            break;
        case ScalesResult::Kind::No:
            summary["scales"] = "No";
            break;
        case ScalesResult::Kind::Unknown:
            summary["scales"] = "Unknown";
            break;
    }
    if (!res.note.empty()) summary["note"] = res.note;
    art.summary = summary;
    return art;
}

RunArtifacts run_dominate(const Scenario& s, const fs::path& outdir) {
    RunArtifacts art;
    ScalingFunction f = ScalingFunction::from_json(s.params.at("f"));
    auto m = make_strategy(s.params.at("m"));
    auto shadow = f_shadow(m->clone(), f);
    MartingaleRun m_run(std::move(m), /*strict=*/false);
    MartingaleRun s_run(std::move(shadow), /*strict=*/false);
    OutcomeGen gen = outcome_gen_from(s.params.at("outcomes"));

    bool shadow_in_b = true;
    for (long t = 0; t < s.horizon; ++t) {
        if (s.b && !s.b->closure_contains(s_run.pending_increment().abs())) shadow_in_b = false;
        Outcome x = gen.next(t);
        m_run.step(x);
        s_run.step(x);
    }
    auto report = integral_bound_check(m_run, s_run, f);

    fs::path mcsv = outdir / (s.name + "_m.csv");
    fs::path scsv = outdir / (s.name + "_s.csv");
    write_run_csv(mcsv, m_run);
    write_run_csv(scsv, s_run);
    art.csv_files = {mcsv, scsv};

    json summary;
    summary["mode"] = mode_str(s.mode);
    summary["integral_bound"] = report.to_json();
    summary["m_final"] = m_run.current_wealth().str();
    summary["s_final"] = s_run.current_wealth().str();
    summary["shadow_wagers_in_closure_b"] = s.b ? json(shadow_in_b) : json(nullptr);
    art.summary = summary;
    return art;
}

RunArtifacts run_evade_bounded(const Scenario& s, const fs::path& outdir) {
    RunArtifacts art;
    CasinoConfig cfg;
    cfg.horizon = s.horizon;
    cfg.ruler_initial = s.ruler_initial;
    cfg.wealth_threshold = s.wealth_threshold;
    cfg.stabilization_window = s.stabilization_window;
    cfg.share_bets = s.share_bets;

    // resolve "casino_martingale" references against the normalized ruler
    NormalizedPair norm = normalize_pair(*s.a, *s.b);
    Value initial;
    if (cfg.ruler_initial) initial = *cfg.ruler_initial;
    else if (auto d = ruler_default_initial(norm.a_scaled)) initial = *d;
    else throw InputError("no default bankroll for this A; set ruler_initial");
    SpecResolver resolver = [&](const std::string& ref) -> StrategyPtr {
        if (ref == "casino_martingale") return ruler_martingale(norm.a_scaled, initial);
        return nullptr;
    };
    std::vector<StrategyPtr> opponents;
    for (const auto& spec : s.params.at("opponents"))
        opponents.push_back(make_strategy(spec, resolver));

    auto result = bounded_casino(*s.a, *s.b, std::move(opponents), cfg);

    fs::path casino_csv = outdir / (s.name + "_casino.csv");
    write_bounded_csv(casino_csv, result.log);
    fs::path mcsv = outdir / (s.name + "_m.csv");
    write_run_csv(mcsv, result.m_run);
    art.csv_files = {casino_csv, mcsv};
    for (size_t i = 0; i < result.opponent_runs.size(); ++i) {
        fs::path ocsv = outdir / (s.name + "_opp" + std::to_string(i) + ".csv");
        write_run_csv(ocsv, result.opponent_runs[i]);
        art.csv_files.push_back(ocsv);
    }

    std::vector<long> traj;
    traj.reserve(result.log.size());
    for (const auto& row : result.log) traj.push_back(row.k);
    auto stab = stabilization_report(traj, result.opponent_runs, s.stabilization_window);

    json summary;
    summary["mode"] = mode_str(s.mode);
    summary["normalization"] = {{"r_a", norm.r_a.str()}, {"r_b", norm.r_b.str()}};
    summary["m"] = run_summary_entry(result.m_run, threshold_for(s, result.m_initial),
                                     stab.window_start);
    summary["k_final"] = result.log.back().k;
    summary["stabilization"] = stab.to_json();
    art.summary = summary;
    return art;
}

RunArtifacts run_evade_wellordered(const Scenario& s, const fs::path& outdir) {
    RunArtifacts art;
    CasinoConfig cfg;
    cfg.horizon = s.horizon;
    cfg.ruler_initial = s.ruler_initial;
    cfg.wealth_threshold = s.wealth_threshold;
    cfg.stabilization_window = s.stabilization_window;
    cfg.share_bets = s.share_bets;

    std::vector<StrategyPtr> opponents;
    for (const auto& spec : s.params.at("opponents")) opponents.push_back(make_strategy(spec));

    auto result = well_ordered_casino(*s.a, *s.b, std::move(opponents), cfg);

    fs::path casino_csv = outdir / (s.name + "_casino.csv");
    write_wellordered_csv(casino_csv, result.log);
    fs::path mcsv = outdir / (s.name + "_m.csv");
    write_run_csv(mcsv, result.m_run);
    art.csv_files = {casino_csv, mcsv};
    for (size_t i = 0; i < result.opponent_runs.size(); ++i) {
        fs::path ocsv = outdir / (s.name + "_opp" + std::to_string(i) + ".csv");
        write_run_csv(ocsv, result.opponent_runs[i]);
        art.csv_files.push_back(ocsv);
    }

    std::vector<long> traj;
    traj.reserve(result.log.size());
    for (const auto& row : result.log) traj.push_back(row.p);
    auto stab = stabilization_report(traj, result.opponent_runs, s.stabilization_window);

    json summary;
    summary["mode"] = mode_str(s.mode);
    summary["normalization"] = {{"r_a", result.normalization.r_a.str()},
                                {"r_b", result.normalization.r_b.str()}};
    summary["m"] = run_summary_entry(result.m_run, threshold_for(s, result.m_initial),
                                     stab.window_start);
    summary["p_final"] = result.log.back().p;
    summary["stabilization"] = stab.to_json();
    art.summary = summary;
    return art;
}

RunArtifacts run_ratio_min(const Scenario& s, const fs::path& outdir) {
    RunArtifacts art;
    History prefix = parse_history(s.params.value("prefix", std::string()));
    auto n = make_strategy(s.params.at("n"));
    auto m = make_strategy(s.params.at("m"));
    Value n0 = n->initial_value(), m0 = m->initial_value();
    auto trace = ratio_min_extension(std::move(n), std::move(m), prefix,
                                     static_cast<size_t>(s.horizon));
    // the ledger at the prefix end is the trace origin
    if (!trace.steps.empty()) {
        n0 = trace.steps.front().n;
        m0 = trace.steps.front().m;
    }

    fs::path csv = outdir / (s.name + "_trace.csv");
    write_ratio_csv(csv, trace, n0, m0);
    art.csv_files = {csv};

    json summary;
    summary["mode"] = mode_str(s.mode);
    summary["initial_ratio"] = trace.initial_ratio.str();
    summary["limit_estimate"] = trace.limit_estimate().str();
    json windows = json::object();
    for (size_t w = 1024; w <= trace.steps.size(); w *= 4)
        windows[std::to_string(w)] =
            trace.deviation_density(w, trace.limit_estimate(), s.epsilon).str();
    summary["deviation_density"] = windows;
    summary["final_density"] =
        cesaro_density(trace, trace.limit_estimate(), s.epsilon).str();
    art.summary = summary;
    return art;
}

RunArtifacts run_validate(const Scenario& s, const fs::path&) {
    RunArtifacts art;
    int depth = s.params.value("depth", 12);
    auto strat = make_strategy(s.params.at("strategy"));
    auto report = validate_strategy(*strat, *s.a, depth);
    json issues = json::array();
    for (const auto& issue : report.issues) {
        issues.push_back({{"history", issue.history},
                          {"wager", issue.wager.str()},
                          {"wealth", issue.wealth.str()},
                          {"kind", issue.kind == ValidationIssue::Kind::Overbet
                                       ? "overbet"
                                       : "wager_not_in_set"}});
    }
    json summary;
    summary["mode"] = mode_str(s.mode);
    summary["valid"] = report.valid();
    summary["nodes_checked"] = report.nodes_checked;
    summary["issues"] = issues;
    summary["truncated"] = report.truncated;
    art.summary = summary;
    return art;
}

RunArtifacts run_density_report(const Scenario& s, const fs::path&) {
    RunArtifacts art;
    auto strat = make_strategy(s.params.at("strategy"));
    json densities = json::object();
    for (const auto& t : s.params.at("targets")) {
        Value target = parse_value_field(t, "targets");
        densities[target.str()] =
            visit_density(*strat, target, s.epsilon, s.horizon).str();
    }
    json summary;
    summary["mode"] = mode_str(s.mode);
    summary["epsilon"] = s.epsilon.str();
    summary["densities"] = densities;
    art.summary = summary;
    return art;
}

}  // namespace

RunArtifacts run_scenario(const Scenario& scenario, const fs::path& outdir) {
    precision_config() = scenario.precision;
    fs::create_directories(outdir);

    RunArtifacts art;
    switch (scenario.mode) {
        case ScenarioMode::Simulate: art = run_simulate(scenario, outdir); break;
        case ScenarioMode::CheckScaling: art = run_check_scaling(scenario, outdir); break;
        case ScenarioMode::Dominate: art = run_dominate(scenario, outdir); break;
        case ScenarioMode::EvadeBounded: art = run_evade_bounded(scenario, outdir); break;
        case ScenarioMode::EvadeWellOrdered: art = run_evade_wellordered(scenario, outdir); break;
        case ScenarioMode::RatioMin: art = run_ratio_min(scenario, outdir); break;
        case ScenarioMode::Validate: art = run_validate(scenario, outdir); break;
        case ScenarioMode::DensityReport: art = run_density_report(scenario, outdir); break;
    }

    json meta;
    meta["scenario"] = scenario.to_json();
    meta["precision"] = {{"start_bits", scenario.precision.start_bits},
                         {"cap_bits", scenario.precision.cap_bits}};
    json warnings = set_warnings_json(scenario);
    if (!warnings.empty()) meta["set_warnings"] = warnings;
    meta["enumeration"] = "natural dense order per descriptor; the well-ordered schedule uses "
                          "the prefix-repetition sequence over it";
    if (art.summary.contains("normalization")) meta["normalization"] = art.summary["normalization"];

    art.metadata_path = outdir / (scenario.name + "_meta.json");
    art.summary_path = outdir / (scenario.name + "_summary.json");
    write_json(art.metadata_path, meta);
    write_json(art.summary_path, art.summary);
    return art;
}

// ---------------------------------------------------------------------------
// Built-ins

namespace {

json fin_json(std::initializer_list<const char*> xs) {
    json elems = json::array();
    for (const char* x : xs) elems.push_back(x);
    return json{{"kind", "finite"}, {"elements", elems}};
}

std::vector<Scenario> make_builtins() {
    std::vector<Scenario> out;

    {
        json j;
        j["name"] = "intro-1-2-vs-1";
        j["mode"] = "simulate";
        j["a"] = fin_json({"1", "2"});
        j["b"] = fin_json({"1"});
        j["horizon"] = 10000;
        j["description"] =
            "worked example: a {1,2}-gambler with the switch-after-first-loss rule beats "
            "every {1}-gambler under the two-phase casino";
        json leader = {{"kind", "threshold_switcher"}, {"w1", "2"}, {"w2", "1"}, {"initial", "4"}};
        json trailer = {{"kind", "stop_on_bankrupt"},
                        {"inner", {{"kind", "copycat"}, {"ratio", "1/2"}, {"target", leader}}},
                        {"set", fin_json({"1"})}};
        j["gamblers"] = json::array({leader, trailer});
        j["outcomes"] = {{"kind", "two_phase"}, {"lead", "3"}};
        out.push_back(Scenario::from_json(j));
    }
    {
        json j;
        j["name"] = "evens-vs-odds";
        j["mode"] = "evade-wellordered";
        j["a"] = {{"kind", "integer_multiples"}, {"step", "2"}};
        j["b"] = {{"kind", "integer_sieve"}, {"rule", "evens"}};
        j["horizon"] = 100000;
        j["description"] = "the even integers evade the odds via the well-ordered construction";
        j["opponents"] = json::array(
            {{{"kind", "always_heads"}, {"wager", "1"}, {"initial", "4"}},
             {{"kind", "threshold_switcher"}, {"w1", "3"}, {"w2", "1"}, {"initial", "6"}},
             {{"kind", "scripted"}, {"wagers", {"1", "-3", "5", "1", "1"}}, {"initial", "8"}}});
        out.push_back(Scenario::from_json(j));
    }
    {
        json j;
        j["name"] = "harmonic-shifted-vs-integers";
        j["mode"] = "evade-bounded";
        j["a"] = {{"kind", "harmonic_shifted"}};
        j["b"] = {{"kind", "integer_multiples"}, {"step", "1"}};
        j["horizon"] = 100000;
        j["description"] = "{1 + 1/n} evades the positive integers via the bounded construction";
        j["opponents"] = json::array(
            {{{"kind", "always_heads"}, {"wager", "1"}, {"initial", "4"}},
             {{"kind", "threshold_switcher"}, {"w1", "1"}, {"w2", "1"}, {"initial", "5"}},
             {{"kind", "scripted"},
              {"wagers", {"2", "-1", "3", "1", "-2", "1"}},
              {"initial", "8"}},
             {{"kind", "copycat_rounded"},
              {"target", "casino_martingale"},
              {"round_to", {{"kind", "integer_multiples"}, {"step", "1"}}},
              {"initial", "6"}}});
        out.push_back(Scenario::from_json(j));
    }
    {
        json j;
        j["name"] = "reciprocals-vs-V";
        j["mode"] = "evade-bounded";
        j["a"] = {{"kind", "harmonic_reciprocal"}};
        j["b"] = {{"kind", "with_zero"}, {"inner", {{"kind", "half_line"}, {"lo", "1"}}}};
        j["horizon"] = 100000;
        j["description"] = "{1/n} evades {0} u [1, inf)";
        j["opponents"] = json::array(
            {{{"kind", "always_heads"}, {"wager", "1"}, {"initial", "3"}},
             {{"kind", "scripted"}, {"wagers", {"1", "2", "-1"}}, {"initial", "5"}}});
        out.push_back(Scenario::from_json(j));
    }
    {
        json j;
        j["name"] = "rplus-vs-unit-interval";
        j["mode"] = "dominate";
        j["a"] = {{"kind", "half_line"}, {"lo", "0"}};
        j["b"] = {{"kind", "closed_interval"}, {"lo", "0"}, {"hi", "1"}};
        j["horizon"] = 10000;
        j["description"] = "[0,1] shadows any R+-martingale through f(x) = min(1/x, 1)";
        j["f"] = {{"kind", "min_reciprocal"}};
        j["m"] = {{"kind", "dyadic_random"}, {"seed", 12345}, {"initial", "8"}};
        j["outcomes"] = {{"kind", "pseudorandom"}, {"seed", 777}};
        out.push_back(Scenario::from_json(j));
    }
    {
        json j;
        j["name"] = "dyadic-powers";
        j["mode"] = "dominate";
        j["a"] = {{"kind", "geometric_powers"}, {"base", "2"}, {"exponents", "all"}};
        j["b"] = {{"kind", "geometric_powers"}, {"base", "2"}, {"exponents", "nonpos"}};
        j["horizon"] = 10000;
        j["description"] =
            "the small dyadic powers shadow all dyadic powers through the dyadic-floor scaling";
        j["f"] = {{"kind", "dyadic_floor"}};
        j["m"] = {{"kind", "power_walk"}, {"seed", 42}, {"initial", "8"}};
        j["outcomes"] = {{"kind", "pseudorandom"}, {"seed", 778}};
        out.push_back(Scenario::from_json(j));
    }
    {
        json j;
        j["name"] = "sieve-density-one";
        j["mode"] = "check-scaling";
        j["a"] = {{"kind", "integer_multiples"}, {"step", "1"}};
        j["b"] = {{"kind", "integer_sieve"}, {"rule", "n_times_phi"}, {"phi", "square"}};
        j["description"] =
            "a sieve of density one with no surviving ideal is still evaded by Z+";
        out.push_back(Scenario::from_json(j));
    }
    return out;
}

}  // namespace

const std::vector<Scenario>& builtin_scenarios() {
    static const std::vector<Scenario> builtins = make_builtins();
    return builtins;
}

const Scenario* find_builtin(const std::string& name) {
    for (const auto& s : builtin_scenarios())
        if (s.name == name) return &s;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Plot scripts

std::string emit_plot_script(const fs::path& csv) {
    std::ifstream in(csv);
    if (!in) throw InputError("cannot read " + csv.string());
    std::string header;
    std::getline(in, header);
    std::vector<std::string> cols;
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);

    static const std::set<std::string> plottable = {"m", "wealth", "g", "S_k", "mu", "n",
                                                    "ratio"};
    size_t t_col = 0;
    bool has_t = false;
    std::vector<std::pair<size_t, std::string>> series;
    for (size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] == "t") {
            t_col = i + 1;
            has_t = true;
        } else if (plottable.count(cols[i])) {
            series.emplace_back(i + 1, cols[i]);
        }
    }
    if (!has_t || series.empty())
        throw MissingColumns("no t column or plottable series in " + csv.string());

    std::ostringstream out;
    out << "# wealth trajectories from " << csv.filename().string() << "\n";
    out << "set datafile separator comma\n";
    out << "set xlabel 't'\n";
    out << "set ylabel 'wealth'\n";
    out << "set key outside\n";
    out << "plot \\\n";
    for (size_t i = 0; i < series.size(); ++i) {
        const auto& [idx, name] = series[i];
        // exact p/q cells are reduced to decimals by an awk preprocessor
        out << "  \"< awk -F, 'function r(s){n=split(s,P,\\\"/\\\"); "
               "return n==2?P[1]/P[2]:P[1]} NR>1{print $"
            << t_col << ", r($" << idx << ")}' " << csv.filename().string()
            << "\" using 1:2 with lines title '" << name << "'";
        out << (i + 1 < series.size() ? ", \\\n" : "\n");
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// CLI semantics

int run_scenario_json(const json& scenario, const fs::path& outdir, std::ostream& err,
                      RunArtifacts* artifacts) {
    try {
        json spec = scenario;
        if (spec.is_object() && spec.contains("builtin")) {
            std::string name = spec["builtin"].get<std::string>();
            const Scenario* base = find_builtin(name);
            if (!base) throw InputError("unknown builtin scenario '" + name + "'");
            json merged = base->to_json();
            for (const auto& [k, v] : spec.items())
                if (k != "builtin") merged[k] = v;
            spec = merged;
        }
        Scenario s = Scenario::from_json(spec);
        if (const char* env = std::getenv("DUEL_PRECISION_BITS")) {
            char* end = nullptr;
            long bits = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || bits < 4)
                throw InputError("DUEL_PRECISION_BITS must be an integer >= 4");
            s.precision.start_bits = bits;
            s.precision.cap_bits = std::max(s.precision.cap_bits, bits);
        }
        RunArtifacts art = run_scenario(s, outdir);
        if (artifacts) *artifacts = std::move(art);
        return 0;
    } catch (const InvariantViolation& e) {
        err << "invariant trap: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "input error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        err << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "input error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace duel
