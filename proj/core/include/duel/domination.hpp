#pragma once

#include <json.hpp>

#include <optional>
#include <vector>

#include "duel/martingale.hpp"

namespace duel {

/// Non-increasing scaling profile f : [0, inf) -> [0, inf) used to shadow a
/// martingale's increments.
class ScalingFunction {
public:
    enum class Kind { Constant, MinReciprocal, DyadicFloor, PiecewiseRational, QProfile };

    static ScalingFunction constant(Value r);
    /// f(x) = min(1/x, 1), with f(0) = 1.
    static ScalingFunction min_reciprocal();
    /// f(x) = min(2^-floor(log2 x), 1), with f(0) = 1.
    static ScalingFunction dyadic_floor();
    /// Right-continuous step function: value values[i] on
    /// [breakpoints[i], breakpoints[i+1]), values.back() beyond the last
    /// breakpoint. breakpoints[0] must be 0 and values non-increasing.
    static ScalingFunction piecewise(std::vector<Value> breakpoints, std::vector<Value> values);
    /// f(x) = q_{m_cap}(x) for the pair (A, B); see q_profile below.
    static ScalingFunction q_profile_function(WagerSet a, WagerSet b, Value m_cap);

    Kind kind() const { return kind_; }
    Value operator()(const Value& x) const;

    /// Exact integral over [lo, hi] (lo <= hi). For MinReciprocal the result
    /// carries a logarithmic term; see Integral.
    struct Integral {
        Value rational;  // rational part
        Value log_coeff; // coefficient of ln(log_arg); zero when absent
        Value log_arg;   // positive rational
    };
    Integral integral(const Value& lo, const Value& hi) const;

    nlohmann::json to_json() const;
    static ScalingFunction from_json(const nlohmann::json& j);

private:
    ScalingFunction() = default;
    Kind kind_ = Kind::Constant;
    Value r_;
    std::vector<Value> breakpoints_, values_;
    std::optional<WagerSet> a_, b_;
    Value m_cap_;
};

/// Compares lhs with rational + log_coeff*ln(log_arg). Exact when the
/// logarithmic term vanishes or cancels; otherwise decided by enclosure
/// refinement (a rational never equals a nonzero rational multiple of the
/// log of a rational other than 1).
int compare_with_log(const Value& lhs, const ScalingFunction::Integral& rhs);

/// Strategy with wagers drawn from A approximating a strategy over
/// closure(A): initial value M(eps)+2, each wager snapped to the first
/// enumerated element of A in the open window of half-width 2^-depth around
/// the target magnitude. Throws EmptyWindow when A has no element there.
StrategyPtr closure_approx(StrategyPtr m, const WagerSet& a);

/// Strategy with initial value r*M(eps) and increments r*M'(sigma); its
/// ledger is exactly r times the target's on every history.
StrategyPtr proportional_copy(StrategyPtr m, Value r);

/// The shadow strategy S(eps) = f(0) M(eps), S'(sigma) = f(M(sigma)) M'(sigma).
StrategyPtr f_shadow(StrategyPtr m, ScalingFunction f);

struct IntegralBoundReport {
    bool ok = true;
    std::optional<size_t> first_violation;  // step index
    std::string which;                      // "per-step" or "cumulative"
    size_t steps_checked = 0;
    nlohmann::json to_json() const;
};

/// Verifies, step by step, S(n+1)-S(n) >= integral of f over [M(n), M(n+1)]
/// and cumulatively S(n) >= integral of f over [0, M(n)].
/// Both runs must have identical outcome sequences and S must be the
/// f-shadow of M; otherwise MismatchedRuns.
IntegralBoundReport integral_bound_check(const MartingaleRun& m_run,
                                         const MartingaleRun& s_run,
                                         const ScalingFunction& f);

/// q_{m_cap}(x) = max { t in [0, m_cap] : t * (A ∩ [0,x]) within
/// closure(B) ∪ {0} } for each requested x. Requires A ∩ [0,x] finite and an
/// enumerable or interval-shaped closure(B).
std::vector<Value> q_profile(const WagerSet& a, const WagerSet& b, const Value& m_cap,
                             const std::vector<Value>& xs);

}  // namespace duel
