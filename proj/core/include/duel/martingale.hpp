#pragma once

#include <json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "duel/wagerset.hpp"

namespace duel {

enum class Outcome : uint8_t { Heads, Tails };

char outcome_char(Outcome x);
Outcome outcome_from_char(char c);

using History = std::vector<Outcome>;

History parse_history(const std::string& s);  // "HHT..." or "ht.."
std::string history_str(const History& h);

/// A betting rule: a deterministic signed wager per observed history.
/// Positive wagers bet on Heads. Implementations must be pure functions of
/// the observation sequence, so runs can be replayed and cloned; the wager
/// returned by current_increment() must be stable until the next observe().
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual Value initial_value() const = 0;
    virtual Value current_increment() = 0;
    virtual void observe(Outcome x) = 0;
    /// Extended observation channel carrying all gamblers' pending signed
    /// bets for the current step. Off by default; no built-in strategy
    /// consumes it.
    virtual void observe_bets(const std::vector<Value>&) {}
    virtual bool history_independent() const { return false; }
    virtual std::unique_ptr<Strategy> clone() const = 0;
};

using StrategyPtr = std::unique_ptr<Strategy>;

/// Wealth ledger of one strategy along one outcome sequence:
/// m(t+1) = m(t) + M'(t) on Heads, m(t) - M'(t) on Tails.
class MartingaleRun {
public:
    /// strict runs refuse to step once the strategy has wagered money it
    /// does not have; non-strict runs record the violation and continue.
    explicit MartingaleRun(StrategyPtr s, bool strict = true);

    const Value& wealth(size_t t) const { return wealth_.at(t); }
    const Value& current_wealth() const { return wealth_.back(); }
    const Value& increment(size_t t) const { return increments_.at(t); }
    size_t steps() const { return history_.size(); }
    const History& history() const { return history_; }

    /// Signed wager pending at the current node. Flags the run when the
    /// magnitude exceeds current wealth.
    const Value& pending_increment();
    void step(Outcome x);

    bool overbet() const { return first_overbet_.has_value(); }
    std::optional<size_t> first_overbet_step() const { return first_overbet_; }

    Strategy& strategy() { return *strategy_; }
    const Strategy& strategy() const { return *strategy_; }

private:
    StrategyPtr strategy_;
    bool strict_;
    std::vector<Value> wealth_;
    std::vector<Value> increments_;
    History history_;
    std::optional<Value> pending_;
    std::optional<size_t> first_overbet_;
};

/// Finite-horizon success proxy: the run never violated no-debt and its final
/// wealth reaches the threshold.
bool success_at_horizon(const MartingaleRun& run, const Value& threshold);

struct ValidationIssue {
    enum class Kind { WagerNotInSet, Overbet };
    Kind kind;
    std::string history;
    Value wager;  // signed
    Value wealth;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    size_t nodes_checked = 0;
    bool truncated = false;
    bool valid() const { return issues.empty(); }
};

struct ValidationConfig {
    int depth_cap = 22;
    size_t max_issues = 64;
};

/// Exhaustively walks every history of the full binary tree to `depth`,
/// reporting wagers outside A and no-debt violations.
ValidationReport validate_strategy(const Strategy& s, const WagerSet& a, int depth,
                                   const ValidationConfig& cfg = {});

/// History-independent strategy betting Heads with wager a_{n(t)} at step
/// t >= 1, where (a_n) enumerates A \ {0} and n(t) is the 2-adic valuation
/// of t.
StrategyPtr ruler_martingale(const WagerSet& a, const Value& initial_value);

/// Default ruler bankroll, 64 * sup(A ∩ [0,1]); defined only when A is
/// bounded and the intersection is nonempty.
std::optional<Value> ruler_default_initial(const WagerSet& a);

/// Fraction of steps 1..horizon whose wager magnitude lies within epsilon of
/// a (exact equality when epsilon is 0). Requires a history-independent
/// strategy.
Value visit_density(const Strategy& s, const Value& a, const Value& epsilon, long horizon);

// --- the opponent zoo ------------------------------------------------------

StrategyPtr constant_wealth(Value c);
StrategyPtr always_heads(Value wager, Value initial);
StrategyPtr always_tails(Value wager, Value initial);
/// Bets Heads with w1 until the first Tails, then Heads with w2 forever.
StrategyPtr threshold_switcher(Value w1, Value w2, Value initial);
/// Plays the listed signed wagers, then 0 forever.
StrategyPtr scripted(std::vector<Value> signed_wagers, Value initial);
/// Mirrors the target's increments scaled by ratio; initial value is
/// ratio * target's initial.
StrategyPtr copycat(StrategyPtr target, Value ratio);
/// Mirrors the target's increments with magnitudes snapped to the nearest
/// element of round_to (wagers 0 when no nearest element exists).
StrategyPtr copycat_rounded(StrategyPtr target, WagerSet round_to, Value initial);
/// Wagers 0 forever once wealth drops below inf(declared \ {0}) or the inner
/// strategy proposes more than current wealth.
StrategyPtr stop_on_bankrupt(StrategyPtr inner, const WagerSet& declared_set);
/// Deterministic pseudorandom wagers k/256 (k <= 2048) capped by wealth,
/// random side. Wager magnitudes stay dyadic with denominator <= 256.
StrategyPtr dyadic_random(uint64_t seed, Value initial);
/// Deterministic pseudorandom wagers 2^e with 2^e <= wealth/2, random side.
StrategyPtr power_walk(uint64_t seed, Value initial);

/// Resolves placeholder strategy references (e.g. "casino_martingale") while
/// parsing nested specs.
using SpecResolver = std::function<StrategyPtr(const std::string& ref)>;

/// Builds a strategy from its JSON spec, e.g.
/// {"kind":"copycat","ratio":"1/2","target":{...}}.
StrategyPtr make_strategy(const nlohmann::json& spec, const SpecResolver& resolver = {});

}  // namespace duel
