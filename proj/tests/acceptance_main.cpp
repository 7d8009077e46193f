// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero when any fails.

#include <duel/scenario.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

using namespace duel;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
    int id;
    std::string label;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

std::vector<Criterion> results;

void report(int id, const std::string& label, bool pass, const std::string& detail,
            double seconds) {
    results.push_back({id, label, pass, detail, seconds});
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << label;
    if (!detail.empty()) std::cout << " -- " << detail;
    std::cout << " (" << seconds << " s)\n" << std::flush;
}

template <typename F>
void run_criterion(int id, const std::string& label, F body) {
    auto t0 = Clock::now();
    bool pass = false;
    std::string detail;
    try {
        detail = body();
        pass = true;
    } catch (const std::exception& e) {
        detail = e.what();
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(id, label, pass, detail, secs);
}

struct check_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool cond, const std::string& what) {
    if (!cond) throw check_failure(what);
}

void expect_runtime(double seconds, double limit) {
    // the per-criterion runtime budget is part of the criterion
    expect(seconds < limit, "runtime " + std::to_string(seconds) + " s exceeds the " +
                                std::to_string(limit) + " s budget");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw check_failure("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path out_root() {
    fs::path p = fs::current_path() / "acceptance_out";
    fs::create_directories(p);
    return p;
}

RunArtifacts run_builtin(const json& overrides, const std::string& subdir) {
    fs::path dir = out_root() / subdir;
    fs::remove_all(dir);
    RunArtifacts art;
    std::ostringstream err;
    int rc = run_scenario_json(overrides, dir, err, &art);
    if (rc != 0) throw check_failure("scenario failed (exit " + std::to_string(rc) +
                                     "): " + err.str());
    return art;
}

// --------------------------------------------------------------------------
// criterion 1: the worked example, all three trailer variants

WagerSet set_b1() { return WagerSet::finite({Value(1)}); }

StrategyPtr leader_strategy() { return threshold_switcher(Value(2), Value(1), Value(4)); }

std::string criterion1() {
    auto t0 = Clock::now();
    struct Variant {
        std::string name;
        StrategyPtr trailer;
    };
    std::vector<Variant> variants;
    variants.push_back({"copycat(1/2)",
                        stop_on_bankrupt(copycat(leader_strategy(), Value::rational(1, 2)),
                                         set_b1())});
    variants.push_back({"always_heads(1)",
                        stop_on_bankrupt(always_heads(Value(1), Value(2)), set_b1())});
    variants.push_back({"always_tails(1)",
                        stop_on_bankrupt(always_tails(Value(1), Value(2)), set_b1())});

    const long horizon = 10000;
    const long window_start = horizon - horizon / 5;
    for (auto& v : variants) {
        Value trailer_initial = v.trailer->initial_value();
        auto result = two_phase_casino(leader_strategy(), std::move(v.trailer), horizon, Value(3));
        expect(result.leader_run.current_wealth() >= Value(4) + Value(100),
               v.name + ": leader wealth below initial+100");
        expect(!result.leader_run.overbet(), v.name + ": leader violated no-debt");
        expect(result.trailer_run.current_wealth() <= trailer_initial + Value(4),
               v.name + ": trailer wealth above initial+4");
        for (long t = window_start; t < horizon; ++t)
            expect(result.trailer_run.increment(static_cast<size_t>(t)).is_zero(),
                   v.name + ": trailer wagered in the final window at t=" + std::to_string(t));
    }
    // the builtin scenario reports the same verdict
    auto art = run_builtin(json{{"builtin", "intro-1-2-vs-1"}}, "c1_run1");
    expect(art.summary["gamblers"][0]["success"] == true, "builtin: gambler 0 not successful");
    expect(art.summary["gamblers"][1]["success"] == false, "builtin: gambler 1 succeeded");
    expect(art.summary["gamblers"][1]["stabilized"] == true, "builtin: gambler 1 kept betting");

    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    expect_runtime(secs, 5.0);
    return "3 trailer variants beaten; exact arithmetic throughout";
}

// --------------------------------------------------------------------------
// criterion 2: finite-set scaling against the brute-force oracle

bool oracle_scales_finite(const std::vector<Value>& a, const std::vector<Value>& b) {
    for (const auto& ae : a) {
        for (const auto& be : b) {
            Value r = be / ae;
            bool ok = true;
            for (const auto& x : a) {
                bool member = false;
                for (const auto& y : b) {
                    if (y == r * x) {
                        member = true;
                        break;
                    }
                }
                if (!member) {
                    ok = false;
                    break;
                }
            }
            if (ok) return true;
        }
    }
    return false;
}

std::string criterion2() {
    auto t0 = Clock::now();
    std::vector<std::vector<Value>> subsets;
    for (long x = 1; x <= 8; ++x) subsets.push_back({Value(x)});
    for (long x = 1; x <= 8; ++x)
        for (long y = x + 1; y <= 8; ++y) subsets.push_back({Value(x), Value(y)});
    for (long x = 1; x <= 8; ++x)
        for (long y = x + 1; y <= 8; ++y)
            for (long z = y + 1; z <= 8; ++z)
                subsets.push_back({Value(x), Value(y), Value(z)});

    long pairs = 0, yes = 0;
    for (const auto& a : subsets) {
        WagerSet wa = WagerSet::finite(a);
        for (const auto& b : subsets) {
            WagerSet wb = WagerSet::finite(b);
            auto got = scales_into(wa, wb);
            expect(got.kind != ScalesResult::Kind::Unknown, "finite pair left Unknown");
            bool want = oracle_scales_finite(a, b);
            expect((got.kind == ScalesResult::Kind::Yes) == want,
                   "oracle disagreement on pair " + wa.describe() + " vs " + wb.describe());
            if (got.kind == ScalesResult::Kind::Yes) {
                ++yes;
                for (const auto& x : a)
                    expect(wb.contains(got.ratio * x),
                           "witness fails membership for " + wa.describe());
            }
            ++pairs;
        }
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    expect_runtime(secs, 10.0);
    return std::to_string(pairs) + " pairs checked (" + std::to_string(yes) +
           " scale), oracle agreement exact";
}

// --------------------------------------------------------------------------
// criterion 3: integral certificates over 100 pseudo-random sequences

std::string criterion3() {
    const long steps = 10000;
    long checked = 0;
    for (uint64_t seq = 1; seq <= 100; ++seq) {
        std::mt19937_64 outcome_rng(10000 + seq);
        {
            auto m = dyadic_random(seq, Value(8));
            auto s = f_shadow(m->clone(), ScalingFunction::min_reciprocal());
            MartingaleRun mr(std::move(m), false);
            MartingaleRun sr(std::move(s), false);
            for (long t = 0; t < steps; ++t) {
                Outcome x = outcome_rng() & 1 ? Outcome::Heads : Outcome::Tails;
                mr.step(x);
                sr.step(x);
            }
            auto report = integral_bound_check(mr, sr, ScalingFunction::min_reciprocal());
            expect(report.ok, "min-reciprocal violation at seq " + std::to_string(seq) +
                                  " step " + std::to_string(report.first_violation.value_or(0)) +
                                  " (" + report.which + ")");
            expect(report.steps_checked == static_cast<size_t>(steps), "short check");
        }
        {
            auto m = power_walk(500 + seq, Value(8));
            auto s = f_shadow(m->clone(), ScalingFunction::dyadic_floor());
            MartingaleRun mr(std::move(m), false);
            MartingaleRun sr(std::move(s), false);
            for (long t = 0; t < steps; ++t) {
                Outcome x = outcome_rng() & 1 ? Outcome::Heads : Outcome::Tails;
                mr.step(x);
                sr.step(x);
            }
            auto report = integral_bound_check(mr, sr, ScalingFunction::dyadic_floor());
            expect(report.ok, "dyadic-floor violation at seq " + std::to_string(seq));
            expect(report.steps_checked == static_cast<size_t>(steps), "short check");
        }
        checked += 2;
    }
    return std::to_string(checked) + " runs of 10^4 steps, zero violations of either bound";
}

// --------------------------------------------------------------------------
// criterion 4: closure approximation dominance, exhaustive depth 12

class PaletteStrategy final : public Strategy {
public:
    PaletteStrategy(std::vector<Value> palette, Value initial, uint64_t seed)
        : palette_(std::move(palette)), initial_(std::move(initial)), seed_(seed) {}
    Value initial_value() const override { return initial_; }
    Value current_increment() override {
        uint64_t h = seed_ ^ 0xcbf29ce484222325ull;
        for (uint8_t b : hist_) h = (h ^ b) * 0x100000001b3ull;
        const Value& mag = palette_[h % palette_.size()];
        return (h >> 32) & 1 ? -mag : mag;
    }
    void observe(Outcome x) override { hist_.push_back(x == Outcome::Heads ? 1 : 2); }
    StrategyPtr clone() const override { return std::make_unique<PaletteStrategy>(*this); }

private:
    std::vector<Value> palette_;
    Value initial_;
    uint64_t seed_;
    std::vector<uint8_t> hist_;
};

void dominance_walk(Strategy& m, Strategy& s, Value mw, Value sw, int depth, long& nodes) {
    if (!(sw > mw)) throw check_failure("S(sigma) > M(sigma) failed");
    ++nodes;
    if (depth == 0) return;
    Value mi = m.current_increment(), si = s.current_increment();
    auto mh = m.clone();
    auto sh = s.clone();
    mh->observe(Outcome::Heads);
    sh->observe(Outcome::Heads);
    dominance_walk(*mh, *sh, mw + mi, sw + si, depth - 1, nodes);
    m.observe(Outcome::Tails);
    s.observe(Outcome::Tails);
    dominance_walk(m, s, mw - mi, sw - si, depth - 1, nodes);
}

std::string criterion4() {
    std::vector<Value> closure_palette{Value(1)};  // the accumulation point of {1+1/n}
    for (long n = 1; n <= 32; ++n)
        closure_palette.push_back(Value(1) + Value::rational(1, n));
    WagerSet a = WagerSet::harmonic_shifted();
    long total_nodes = 0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        auto m = std::make_unique<PaletteStrategy>(closure_palette, Value(5), seed);
        auto s = closure_approx(m->clone(), a);
        Value m0 = m->initial_value(), s0 = s->initial_value();
        if (!(s0 == m0 + Value(2))) throw check_failure("S(eps) != M(eps) + 2");
        long nodes = 0;
        dominance_walk(*m, *s, m0, s0, 12, nodes);
        if (nodes != (1 << 13) - 1) throw check_failure("incomplete tree walk");
        total_nodes += nodes;
    }
    return "20 strategies, " + std::to_string(total_nodes) +
           " nodes checked, dominance strict everywhere";
}

// --------------------------------------------------------------------------
// criteria 5 and 6: ratio minimization runs and the windowed density

RatioMinTrace the_trace(size_t steps) {
    auto n = stop_on_bankrupt(always_heads(Value(1), Value(32)),
                              WagerSet::integer_multiples(Value(1)));
    auto m = ruler_martingale(WagerSet::harmonic_shifted(), Value(64));
    return ratio_min_extension(std::move(n), std::move(m), {}, steps);
}

std::string criterion5() {
    // every ratio-minimizing run in this suite asserts monotonicity inline;
    // re-verify the recorded ratio sequences independently here
    std::vector<RatioMinTrace> traces;
    traces.push_back(the_trace(1 << 12));
    traces.push_back(ratio_min_extension(copycat(always_heads(Value(1), Value(2)), Value(1)),
                                         always_heads(Value(1), Value(2)), {}, 4096));
    traces.push_back(ratio_min_extension(constant_wealth(Value(1)),
                                         always_heads(Value(1), Value(1)), {}, 4096));
    long steps = 0;
    for (const auto& trace : traces) {
        Value prev = trace.initial_ratio;
        for (const auto& row : trace.steps) {
            if (row.ratio_after > prev) throw check_failure("ratio increased");
            prev = row.ratio_after;
            ++steps;
        }
    }
    return std::to_string(steps) + " ratio-minimizing steps, non-increasing throughout";
}

std::string criterion6() {
    auto t0 = Clock::now();
    auto trace = the_trace(1 << 16);
    Value limit = trace.limit_estimate();
    Value eps = Value::rational(1, 10);
    std::vector<Value> densities;
    for (size_t w : {1u << 10, 1u << 12, 1u << 14, 1u << 16})
        densities.push_back(trace.deviation_density(w, limit, eps));
    for (size_t i = 0; i + 1 < densities.size(); ++i)
        expect(densities[i + 1] <= densities[i], "window densities not non-increasing");
    expect(densities.back() <= Value::rational(5, 100),
           "final window density " + densities.back().str() + " above 0.05");
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    expect_runtime(secs, 60.0);
    std::string ds;
    for (const auto& d : densities) ds += d.str() + " ";
    return "densities " + ds + "over windows 2^10..2^16";
}

// --------------------------------------------------------------------------
// criterion 7: bounded-case evasion at horizon 1e5

std::string criterion7() {
    auto t0 = Clock::now();
    auto art = run_builtin(json{{"builtin", "harmonic-shifted-vs-integers"}}, "c7_run1");
    const json& m = art.summary["m"];
    Value initial = Value::parse(m["initial"].get<std::string>());
    Value final_wealth = Value::parse(m["final"].get<std::string>());
    expect(final_wealth > initial + Value(50), "martingale wealth below initial+50");
    expect(m["overbet_step"].is_null(), "martingale violated no-debt");
    const json& opponents = art.summary["stabilization"]["opponents"];
    expect(opponents.size() == 4, "expected 4 user opponents");
    for (const auto& o : opponents) {
        expect(!o["last_active"].is_null(), "an opponent never wagered");
        expect(o["last_active"].get<long>() < 80000,
               "opponent active at or after step 0.8e5");
        expect(o["stabilized"].get<bool>(), "opponent not stabilized");
    }
    long suffix_min = art.summary["stabilization"]["suffix_min_over_window"].get<long>();
    expect(suffix_min >= 4, "suffix-min of k(t) over the final window below 4");
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    expect_runtime(secs, 120.0);
    return "m(T) = " + final_wealth.str() + ", suffix-min k = " + std::to_string(suffix_min);
}

// --------------------------------------------------------------------------
// criterion 8: well-ordered-case evasion at horizon 1e5

std::string criterion8() {
    auto t0 = Clock::now();
    // fragility persistence and the bankroll invariant are asserted inline
    // on every step; a completed run certifies zero violations
    auto art = run_builtin(json{{"builtin", "evens-vs-odds"}, {"wealth_threshold", "26"}},
                           "c8_run1");
    const json& m = art.summary["m"];
    expect(m["success"].get<bool>(), "m(T) below initial+25 or no-debt violated");
    const json& opponents = art.summary["stabilization"]["opponents"];
    expect(opponents.size() == 3, "expected 3 user opponents");
    for (const auto& o : opponents)
        expect(o["stabilized"].get<bool>(), "an opponent kept wagering in the final window");

    // re-verify m(t) >= g(t) from the emitted rows
    std::ifstream in(art.csv_files[0]);
    expect(in.good(), "missing casino CSV");
    std::string line;
    std::getline(in, line);
    long rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        Value mv = Value::parse(cells[2]);
        Value gv = Value::parse(cells[4]);
        expect(mv >= gv, "m(t) < g(t) in row " + std::to_string(rows));
        ++rows;
    }
    expect(rows == 100001, "unexpected row count");
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    expect_runtime(secs, 120.0);
    return "zero fragility violations, m >= g on all " + std::to_string(rows) + " rows";
}

// --------------------------------------------------------------------------
// criterion 9: the q-profile cutoff for the phi(n) = n^2 sieve

std::string criterion9() {
    auto t0 = Clock::now();
    SieveRule rule;
    rule.kind = SieveRule::Kind::NTimesPhi;
    rule.phi = SieveRule::Phi::Square;  // excludes n*phi(n) = n^3
    WagerSet b = WagerSet::integer_sieve(rule);
    WagerSet a = WagerSet::integer_multiples(Value(1));
    Value cap(3);

    std::vector<Value> xs;
    for (long x = 1; x <= 100; ++x) xs.push_back(Value(x));
    auto qs = q_profile(a, b, cap, xs);

    // direct constraint enumeration: q(x) is the largest integer t <= 3 in B
    // with t*a never a cube for a <= x; 0 otherwise
    auto cube = [](long v) {
        mpz_class z(v), root;
        return mpz_root(root.get_mpz_t(), z.get_mpz_t(), 3) != 0;
    };
    long expected_cutoff = -1;
    for (long x = 1; x <= 100; ++x) {
        long want = 0;
        for (long t = 1; t <= 3; ++t) {
            if (cube(t)) continue;  // t itself must lie in B
            bool ok = true;
            for (long av = 1; av <= x; ++av)
                if (cube(t * av)) {
                    ok = false;
                    break;
                }
            if (ok) want = t;
        }
        expect(qs[static_cast<size_t>(x - 1)] == Value(want),
               "q(" + std::to_string(x) + ") disagrees with the enumeration");
        if (want == 0 && expected_cutoff < 0) expected_cutoff = x;
    }
    expect(expected_cutoff > 0, "no cutoff found by the oracle");
    for (long x = expected_cutoff; x <= 100; ++x)
        expect(qs[static_cast<size_t>(x - 1)].is_zero(),
               "q nonzero beyond the cutoff at x=" + std::to_string(x));
    for (size_t i = 0; i + 1 < qs.size(); ++i)
        expect(qs[i + 1] <= qs[i], "q-profile not non-increasing");
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    expect_runtime(secs, 5.0);
    return "q = 0 for every x >= " + std::to_string(expected_cutoff) +
           ", verified on x = 1..100";
}

// --------------------------------------------------------------------------
// criterion 10: byte-identical reruns of criteria 1, 7 and 8

std::string criterion10() {
    struct Pair {
        json spec;
        std::string first, second;
    };
    std::vector<Pair> pairs = {
        {json{{"builtin", "intro-1-2-vs-1"}}, "c1_run1", "c1_run2"},
        {json{{"builtin", "harmonic-shifted-vs-integers"}}, "c7_run1", "c7_run2"},
        {json{{"builtin", "evens-vs-odds"}, {"wealth_threshold", "26"}}, "c8_run1", "c8_run2"},
    };
    long files = 0;
    for (auto& p : pairs) {
        auto rerun = run_builtin(p.spec, p.second);
        fs::path first_dir = out_root() / p.first;
        for (const auto& csv : rerun.csv_files) {
            fs::path original = first_dir / csv.filename();
            expect(fs::exists(original), "missing first-run CSV " + original.string());
            expect(slurp(original) == slurp(csv),
                   "CSV differs across reruns: " + csv.filename().string());
            ++files;
        }
    }
    return std::to_string(files) + " trajectory CSVs byte-identical across reruns";
}

}  // namespace

int main() {
    std::cout << "acceptance suite (artifacts under " << out_root().string() << ")\n";
    run_criterion(1, "worked example: {1,2} beats every {1}-gambler", criterion1);
    run_criterion(2, "finite-set scaling matches the brute-force oracle", criterion2);
    run_criterion(3, "integral certificates on 100 pseudo-random runs", criterion3);
    run_criterion(4, "closure approximation dominates to depth 12", criterion4);
    run_criterion(5, "ratio-minimizing sequences are non-increasing", criterion5);
    run_criterion(6, "windowed deviation density shrinks to <= 0.05", criterion6);
    run_criterion(7, "bounded-case evasion at horizon 1e5", criterion7);
    run_criterion(8, "well-ordered-case evasion at horizon 1e5", criterion8);
    run_criterion(9, "q-profile cutoff for the n*phi(n) sieve", criterion9);
    run_criterion(10, "criteria 1, 7, 8 rerun byte-identically", criterion10);

    int failed = 0;
    for (const auto& c : results)
        if (!c.pass) ++failed;
    std::cout << (failed == 0 ? "all criteria passed\n"
                              : std::to_string(failed) + " criteria failed\n");
    return failed == 0 ? 0 : 1;
}
