#include <benchmark/benchmark.h>

#include <duel/domination.hpp>
#include <duel/evasion.hpp>

#include <random>

using namespace duel;

namespace {

WagerSet zplus() { return WagerSet::integer_multiples(Value(1)); }

static void BM_RationalLedgerStep(benchmark::State& state) {
    for (auto _ : state) {
        MartingaleRun run(ruler_martingale(WagerSet::harmonic_shifted(), Value(64)), false);
        for (int t = 0; t < 1024; ++t) run.step(t % 3 ? Outcome::Heads : Outcome::Tails);
        benchmark::DoNotOptimize(run.current_wealth());
    }
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_RationalLedgerStep);

static void BM_RatioMinExtension(benchmark::State& state) {
    for (auto _ : state) {
        auto n = stop_on_bankrupt(always_heads(Value(1), Value(32)), zplus());
        auto m = ruler_martingale(WagerSet::harmonic_shifted(), Value(64));
        auto trace = ratio_min_extension(std::move(n), std::move(m), {}, 2048);
        benchmark::DoNotOptimize(trace.limit_estimate());
    }
    state.SetItemsProcessed(state.iterations() * 2048);
}
BENCHMARK(BM_RatioMinExtension);

static void BM_BoundedCasino(benchmark::State& state) {
    for (auto _ : state) {
        std::vector<StrategyPtr> opp;
        opp.push_back(always_heads(Value(1), Value(4)));
        opp.push_back(threshold_switcher(Value(1), Value(1), Value(5)));
        CasinoConfig cfg;
        cfg.horizon = state.range(0);
        auto result = bounded_casino(WagerSet::harmonic_shifted(), zplus(), std::move(opp), cfg);
        benchmark::DoNotOptimize(result.m_run.current_wealth());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BoundedCasino)->Arg(2048)->Arg(16384);

static void BM_WellOrderedCasino(benchmark::State& state) {
    SieveRule r;
    r.kind = SieveRule::Kind::Evens;
    WagerSet odds = WagerSet::integer_sieve(r);
    for (auto _ : state) {
        std::vector<StrategyPtr> opp;
        opp.push_back(always_heads(Value(1), Value(4)));
        opp.push_back(threshold_switcher(Value(3), Value(1), Value(6)));
        CasinoConfig cfg;
        cfg.horizon = state.range(0);
        auto result = well_ordered_casino(WagerSet::integer_multiples(Value(2)), odds,
                                          std::move(opp), cfg);
        benchmark::DoNotOptimize(result.m_run.current_wealth());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WellOrderedCasino)->Arg(2048)->Arg(16384);

static void BM_FiniteScalingSweep(benchmark::State& state) {
    std::vector<std::vector<Value>> subsets;
    for (long x = 1; x <= 6; ++x)
        for (long y = x + 1; y <= 6; ++y) subsets.push_back({Value(x), Value(y)});
    for (auto _ : state) {
        long yes = 0;
        for (const auto& a : subsets)
            for (const auto& b : subsets)
                if (scales_into(WagerSet::finite(a), WagerSet::finite(b)).kind ==
                    ScalesResult::Kind::Yes)
                    ++yes;
        benchmark::DoNotOptimize(yes);
    }
    state.SetItemsProcessed(state.iterations() * subsets.size() * subsets.size());
}
BENCHMARK(BM_FiniteScalingSweep);

static void BM_IntegralCertificate(benchmark::State& state) {
    for (auto _ : state) {
        auto m = dyadic_random(7, Value(8));
        auto s = f_shadow(m->clone(), ScalingFunction::min_reciprocal());
        MartingaleRun mr(std::move(m), false);
        MartingaleRun sr(std::move(s), false);
        std::mt19937_64 rng(3);
        for (int t = 0; t < 1024; ++t) {
            Outcome x = rng() & 1 ? Outcome::Heads : Outcome::Tails;
            mr.step(x);
            sr.step(x);
        }
        auto report = integral_bound_check(mr, sr, ScalingFunction::min_reciprocal());
        benchmark::DoNotOptimize(report.ok);
    }
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_IntegralCertificate);

static void BM_EnclosureComparison(benchmark::State& state) {
    Value pi2 = Value::pi().pow(2);
    Value probe = Value::rational(986960440108935861, 100000000000000000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pi2.compare(probe));
    }
}
BENCHMARK(BM_EnclosureComparison);

}  // namespace

BENCHMARK_MAIN();
