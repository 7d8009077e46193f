#pragma once

#include <json.hpp>

#include <optional>
#include <vector>

#include "duel/martingale.hpp"

namespace duel {

/// The outcome that (first priority) strictly decreases the ratio N/M,
/// (second) keeps it while growing M, (third) defaults to Heads. Increments
/// are signed; requires M(sigma) > 0 and a nonnegative N at both successors.
Outcome ratio_min_outcome(const Value& n_val, const Value& m_val, const Value& n_inc,
                          const Value& m_inc);

struct RatioMinStep {
    size_t t;
    Value n, m;          // wealths before the step
    Value n_inc, m_inc;  // signed increments at this node
    Outcome outcome;
    Value ratio_after;   // N/M after the step
};

struct RatioMinTrace {
    Value initial_ratio;
    std::vector<RatioMinStep> steps;

    Value limit_estimate() const {
        return steps.empty() ? initial_ratio : steps.back().ratio_after;
    }
    /// Fraction of the first `upto` steps with |N' - limit*M'| > epsilon.
    Value deviation_density(size_t upto, const Value& limit, const Value& epsilon) const;
};

/// Iterates ratio_min_outcome from the end of the prefix, feeding the chosen
/// outcomes to both strategies. Asserts ratio monotonicity at every step.
RatioMinTrace ratio_min_extension(StrategyPtr n, StrategyPtr m, const History& prefix,
                                  size_t steps);

/// Fraction of trace steps with |N'(t) - limit*M'(t)| > epsilon.
Value cesaro_density(const RatioMinTrace& trace, const Value& limit, const Value& epsilon);

struct NormalizedPair {
    WagerSet a_scaled, b_scaled;
    Value r_a, r_b;  // the applied factors: A' = r_a*A, B' = r_b*B
};

/// Rescales so that sup A' = inf(B' \ {0}) = 1.
NormalizedPair normalize_pair(const WagerSet& a, const WagerSet& b);

struct CasinoConfig {
    long horizon = 100000;
    std::optional<Value> ruler_initial;     // bounded case; default 64*sup(A'∩[0,1])
    std::optional<Value> wealth_threshold;  // success proxy; default initial + 50
    double stabilization_window = 0.2;      // final fraction of steps examined
    bool share_bets = false;                // expose all pending bets to the strategies
};

/// Largest k with S_k(t) < m, where virtual opponent i has wealth
/// user_wealths[(i-1)/2] when i is odd and within range, and 1 otherwise
/// (the constant-1 padding). k = 0 when already S_1 >= m.
long bounded_k_index(const Value& m, const std::vector<Value>& user_wealths);

/// S_k(t) under the same indexing.
Value bounded_prefix_sum(long k, const std::vector<Value>& user_wealths);

struct BoundedCasinoState {
    long t = 0;
    std::optional<Outcome> outcome;  // X_t; empty on the t = 0 row
    Value m;                         // m(t)
    long k = 0;                      // k(t)
    Value s_k;                       // S_{k(t)}(t)
    int case_tag = 0;                // decision taken at t (1 or 2; 0 on the last row)
    long acting_index = 0;           // virtual index acted on
};

struct BoundedCasinoResult {
    History x;
    MartingaleRun m_run;
    std::vector<MartingaleRun> opponent_runs;  // wrapped user opponents, normalized units
    std::vector<BoundedCasinoState> log;
    NormalizedPair normalization;
    Value m_initial;
};

/// The bounded-case adversarial sequence: a ruler martingale over the
/// normalized A against the user opponents interleaved with constant-1
/// padding at the even virtual indices.
BoundedCasinoResult bounded_casino(const WagerSet& a, const WagerSet& b,
                                   std::vector<StrategyPtr> opponents,
                                   const CasinoConfig& cfg = {});

struct Fragility {
    long p = 0;
    Value nu_p;  // p + n_1 + ... + n_p
    Value mu;    // m - (nu_p + 1)
};

/// Largest p >= 0 with m - (g - 1) > nu_p; opponents beyond the list count
/// as silent zero-wealth martingales.
Fragility well_ordered_fragility(const Value& m, const Value& g,
                                 const std::vector<Value>& opponent_wealths);

/// g within a block of wagers a_k starting at block_start with length
/// block_len: a_k when a_k1 <= a_k, else linear from a_k to a_k1 across the
/// block.
Value gradual_value(const Value& a_k, const Value& a_k1, long block_start, long block_len,
                    long t);

struct WellOrderedCasinoState {
    long t = 0;
    std::optional<Outcome> outcome;  // X_t
    Value m;                         // m(t)
    Value m_inc;                     // m'(t), the pending wager
    Value g;                         // g(t)
    long p = 0;                      // p(t)
    Value mu;                        // mu(t)
    int case_tag = 0;                // decision taken at t (1 or 2; 0 on the last row)
    long acting_index = 0;           // opponent index (case 1) or p+1 (case 2)
    std::optional<Value> q;          // n_{p+1}/mu diagnostic when mu > 0
};

struct WellOrderedCasinoResult {
    History x;
    MartingaleRun m_run;
    std::vector<MartingaleRun> opponent_runs;
    std::vector<WellOrderedCasinoState> log;
    NormalizedPair normalization;  // r_a = 1/a_1, r_b = 1/inf(B \ {0})
    Value m_initial;
};

/// The well-ordered-case construction: block schedule over the repeated
/// dense sequence, gradual wager function, fragility bookkeeping, and the
/// two-case outcome rule. Fragility persistence (p never drops below the
/// index just acted on) is asserted at runtime on every step.
WellOrderedCasinoResult well_ordered_casino(const WagerSet& a, const WagerSet& b,
                                            std::vector<StrategyPtr> opponents,
                                            const CasinoConfig& cfg = {});

struct StabilizationEntry {
    size_t opponent;                  // 0-based user index
    std::optional<long> last_active;  // last step with a nonzero wager
    Value final_wealth;
    bool stabilized;  // silent throughout the stabilization window
};

struct StabilizationReport {
    std::vector<StabilizationEntry> opponents;
    long window_start = 0;
    long suffix_min_over_window = 0;  // min of the index trajectory on the window
    std::vector<long> suffix_min;     // suffix minima of the full trajectory
    nlohmann::json to_json() const;
};

/// Post-processes a casino run: empirical stabilization times T_i and the
/// suffix minima of the k(t) or p(t) trajectory.
StabilizationReport stabilization_report(const std::vector<long>& index_trajectory,
                                         const std::vector<MartingaleRun>& opponent_runs,
                                         double window_fraction);

struct TwoPhaseResult {
    History x;
    MartingaleRun leader_run, trailer_run;
    long switch_step = -1;  // the single adversarial tails
};

/// The worked-example casino: heads until the leader is ahead by more than
/// lead_margin, one tails, then always against the trailer's bet (heads when
/// the trailer sits out).
TwoPhaseResult two_phase_casino(StrategyPtr leader, StrategyPtr trailer, long horizon,
                                const Value& lead_margin);

}  // namespace duel
