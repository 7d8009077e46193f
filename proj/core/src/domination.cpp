#include "duel/domination.hpp"

#include <mpfr.h>

#include <algorithm>

namespace duel {

using json = nlohmann::json;

namespace {

Value json_value(const json& j, const char* field) {
    if (!j.contains(field))
        throw InputError(std::string("scaling function missing field '") + field + "'");
    if (j[field].is_string()) return Value::parse(j[field].get<std::string>());
    if (j[field].is_number_integer())
        return Value(static_cast<long>(j[field].get<long long>()));
    throw InputError(std::string("scaling function field '") + field + "': expected \"p/q\"");
}

mpq_class mpfr_to_mpq(const mpfr_t x) {
    mpz_class z;
    mpfr_exp_t e = mpfr_get_z_2exp(z.get_mpz_t(), x);
    mpq_class q(z);
    if (e >= 0)
        mpz_mul_2exp(mpq_numref(q.get_mpq_t()), mpq_numref(q.get_mpq_t()),
                     static_cast<mp_bitcnt_t>(e));
    else
        mpz_mul_2exp(mpq_denref(q.get_mpq_t()), mpq_denref(q.get_mpq_t()),
                     static_cast<mp_bitcnt_t>(-e));
    q.canonicalize();
    return q;
}

// Exact rational enclosure of ln(rho) for rational rho > 0.
std::pair<mpq_class, mpq_class> ln_enclosure(const mpq_class& rho, long bits) {
    mpfr_t t, r;
    mpfr_init2(t, bits);
    mpfr_init2(r, bits);
    mpfr_set_q(t, rho.get_mpq_t(), MPFR_RNDD);
    mpfr_log(r, t, MPFR_RNDD);
    mpq_class lo = mpfr_to_mpq(r);
    mpfr_set_q(t, rho.get_mpq_t(), MPFR_RNDU);
    mpfr_log(r, t, MPFR_RNDU);
    mpq_class hi = mpfr_to_mpq(r);
    mpfr_clear(t);
    mpfr_clear(r);
    return {lo, hi};
}

}  // namespace

int compare_with_log(const Value& lhs, const ScalingFunction::Integral& rhs) {
    Value d = lhs - rhs.rational;
    if (rhs.log_coeff.is_zero() || rhs.log_arg == Value(1)) return d.sign();
    if (!d.is_rational() || !rhs.log_coeff.is_rational() || !rhs.log_arg.is_rational())
        throw Unsupported("log comparison with irrational operands");
    mpq_class dq = d.as_rational();
    mpq_class c = rhs.log_coeff.as_rational();
    mpq_class rho = rhs.log_arg.as_rational();
    if (rho <= 0) throw InputError("log of a nonpositive argument");
    // c*ln(rho) is irrational for rational rho != 1, so refinement terminates
    const PrecisionConfig& cfg = precision_config();
    for (long bits = cfg.start_bits; bits <= cfg.cap_bits; bits *= 2) {
        auto [llo, lhi] = ln_enclosure(rho, bits);
        mpq_class rlo = c >= 0 ? c * llo : c * lhi;
        mpq_class rhi = c >= 0 ? c * lhi : c * llo;
        if (dq > rhi) return 1;
        if (dq < rlo) return -1;
    }
    throw UndecidableComparison("log comparison undecided at the precision cap");
}

// ---------------------------------------------------------------------------
// ScalingFunction

ScalingFunction ScalingFunction::constant(Value r) {
    if (r.sign() < 0) throw InputError("constant scaling must be nonnegative");
    ScalingFunction f;
    f.kind_ = Kind::Constant;
    f.r_ = std::move(r);
    return f;
}

ScalingFunction ScalingFunction::min_reciprocal() {
    ScalingFunction f;
    f.kind_ = Kind::MinReciprocal;
    return f;
}

ScalingFunction ScalingFunction::dyadic_floor() {
    ScalingFunction f;
    f.kind_ = Kind::DyadicFloor;
    return f;
}

ScalingFunction ScalingFunction::piecewise(std::vector<Value> breakpoints,
                                           std::vector<Value> values) {
    if (breakpoints.empty() || breakpoints.size() != values.size())
        throw InputError("piecewise scaling needs matching breakpoints and values");
    if (!breakpoints.front().is_zero()) throw InputError("piecewise scaling must start at 0");
    for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw InputError("piecewise breakpoints must be strictly increasing");
    for (size_t i = 0; i + 1 < values.size(); ++i)
        if (values[i] < values[i + 1]) throw InputError("piecewise scaling must be non-increasing");
    if (values.back().sign() < 0) throw InputError("scaling values must be nonnegative");
    ScalingFunction f;
    f.kind_ = Kind::PiecewiseRational;
    f.breakpoints_ = std::move(breakpoints);
    f.values_ = std::move(values);
    return f;
}

ScalingFunction ScalingFunction::q_profile_function(WagerSet a, WagerSet b, Value m_cap) {
    if (m_cap.sign() < 0) throw InputError("q-profile cap must be nonnegative");
    ScalingFunction f;
    f.kind_ = Kind::QProfile;
    f.a_ = std::move(a);
    f.b_ = std::move(b);
    f.m_cap_ = std::move(m_cap);
    return f;
}

Value ScalingFunction::operator()(const Value& x) const {
    if (x.sign() < 0) throw InputError("scaling function evaluated below 0");
    switch (kind_) {
        case Kind::Constant:
            return r_;
        case Kind::MinReciprocal:
            return x > Value(1) ? Value(1) / x : Value(1);
        case Kind::DyadicFloor:
            if (x < Value(1)) return Value(1);  // also covers f(0) = 1
            return Value(2).pow(-floor_log2(x));
        case Kind::PiecewiseRational: {
            size_t i = breakpoints_.size() - 1;
            while (i > 0 && x < breakpoints_[i]) --i;
            return values_[i];
        }
        case Kind::QProfile:
            return q_profile(*a_, *b_, m_cap_, {x}).front();
    }
    throw InvariantViolation("scaling function fell through");
}

ScalingFunction::Integral ScalingFunction::integral(const Value& lo, const Value& hi) const {
    if (lo.sign() < 0 || hi < lo) throw InputError("integral needs 0 <= lo <= hi");
    Integral out{Value(0), Value(0), Value(1)};
    switch (kind_) {
        case Kind::Constant:
            out.rational = r_ * (hi - lo);
            return out;
        case Kind::MinReciprocal: {
            Value one(1);
            if (lo < one) out.rational = (hi < one ? hi : one) - lo;
            if (hi > one) {
                Value from = lo > one ? lo : one;
                out.log_coeff = Value(1);
                out.log_arg = hi / from;
            }
            return out;
        }
        case Kind::DyadicFloor: {
            Value one(1);
            Value cur = lo;
            if (cur < one) {
                Value top = hi < one ? hi : one;
                out.rational += top - cur;
                cur = top;
            }
            while (cur < hi) {
                long k = floor_log2(cur);
                Value block_top = Value(2).pow(k + 1);
                Value top = hi < block_top ? hi : block_top;
                out.rational += (top - cur) * Value(2).pow(-k);
                cur = top;
            }
            return out;
        }
        case Kind::PiecewiseRational: {
            Value cur = lo;
            while (cur < hi) {
                size_t i = breakpoints_.size() - 1;
                while (i > 0 && cur < breakpoints_[i]) --i;
                Value top = hi;
                if (i + 1 < breakpoints_.size() && breakpoints_[i + 1] < hi)
                    top = breakpoints_[i + 1];
                out.rational += (top - cur) * values_[i];
                cur = top;
            }
            return out;
        }
        case Kind::QProfile:
            throw Unsupported("closed-form integral not available for q-profile functions");
    }
    throw InvariantViolation("scaling integral fell through");
}

json ScalingFunction::to_json() const {
    switch (kind_) {
        case Kind::Constant:
            return json{{"kind", "constant"}, {"r", rational_str(r_.as_rational())}};
        case Kind::MinReciprocal:
            return json{{"kind", "min_reciprocal"}};
        case Kind::DyadicFloor:
            return json{{"kind", "dyadic_floor"}};
        case Kind::PiecewiseRational: {
            json bps = json::array(), vals = json::array();
            for (const auto& b : breakpoints_) bps.push_back(rational_str(b.as_rational()));
            for (const auto& v : values_) vals.push_back(rational_str(v.as_rational()));
            return json{{"kind", "piecewise"}, {"breakpoints", bps}, {"values", vals}};
        }
        case Kind::QProfile:
            return json{{"kind", "q_profile"},
                        {"a", a_->to_json()},
                        {"b", b_->to_json()},
                        {"m_cap", rational_str(m_cap_.as_rational())}};
    }
    return {};
}

ScalingFunction ScalingFunction::from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw InputError("scaling function JSON needs a 'kind' field");
    std::string k = j["kind"].get<std::string>();
    if (k == "constant") return constant(json_value(j, "r"));
    if (k == "min_reciprocal") return min_reciprocal();
    if (k == "dyadic_floor") return dyadic_floor();
    if (k == "piecewise") {
        std::vector<Value> bps, vals;
        for (const auto& b : j.value("breakpoints", json::array()))
            bps.push_back(Value::parse(b.get<std::string>()));
        for (const auto& v : j.value("values", json::array()))
            vals.push_back(Value::parse(v.get<std::string>()));
        return piecewise(std::move(bps), std::move(vals));
    }
    if (k == "q_profile")
        return q_profile_function(WagerSet::from_json(j.at("a")), WagerSet::from_json(j.at("b")),
                                  json_value(j, "m_cap"));
    throw InputError("unknown scaling function kind '" + k + "'");
}

// ---------------------------------------------------------------------------
// Strategy transformers

namespace {

class ClosureApproxStrategy final : public Strategy {
public:
    ClosureApproxStrategy(StrategyPtr inner, const WagerSet& a)
        : inner_(std::move(inner)), set_(a), enum_(std::make_shared<DenseEnumerator>(a)) {}
    ClosureApproxStrategy(const ClosureApproxStrategy& o)
        : inner_(o.inner_->clone()), set_(o.set_), enum_(o.enum_), depth_(o.depth_),
          pending_(o.pending_) {}

    Value initial_value() const override { return inner_->initial_value() + Value(2); }

    Value current_increment() override {
        if (!pending_) {
            Value inc = inner_->current_increment();
            if (inc.is_zero() && set_.contains(Value(0))) {
                pending_ = Value(0);
            } else {
                Value mag = inc.abs();
                Value w = Value(2).pow(-depth_);
                auto hit = enum_->first_in_window(mag - w, mag + w);
                if (!hit)
                    throw EmptyWindow("no element of the set in (" + (mag - w).str() + ", " +
                                      (mag + w).str() + ") at depth " + std::to_string(depth_));
                pending_ = inc.sign() < 0 ? -hit->value : hit->value;
            }
        }
        return *pending_;
    }

    void observe(Outcome x) override {
        current_increment();
        ++depth_;
        inner_->observe(x);
        pending_.reset();
    }

    StrategyPtr clone() const override { return std::make_unique<ClosureApproxStrategy>(*this); }

private:
    StrategyPtr inner_;
    WagerSet set_;
    std::shared_ptr<DenseEnumerator> enum_;  // memoized, shared across clones
    long depth_ = 0;
    std::optional<Value> pending_;
};

class FShadowStrategy final : public Strategy {
public:
    FShadowStrategy(StrategyPtr inner, ScalingFunction f)
        : inner_(std::move(inner)), f_(std::move(f)), wealth_(inner_->initial_value()) {}
    FShadowStrategy(const FShadowStrategy& o)
        : inner_(o.inner_->clone()), f_(o.f_), wealth_(o.wealth_) {}

    Value initial_value() const override { return f_(Value(0)) * inner_->initial_value(); }
    Value current_increment() override { return f_(wealth_) * inner_->current_increment(); }
    void observe(Outcome x) override {
        Value inc = inner_->current_increment();
        wealth_ = x == Outcome::Heads ? wealth_ + inc : wealth_ - inc;
        inner_->observe(x);
    }
    StrategyPtr clone() const override { return std::make_unique<FShadowStrategy>(*this); }

private:
    StrategyPtr inner_;
    ScalingFunction f_;
    Value wealth_;  // the shadowed martingale's wealth
};

}  // namespace

StrategyPtr closure_approx(StrategyPtr m, const WagerSet& a) {
    return std::make_unique<ClosureApproxStrategy>(std::move(m), a);
}

StrategyPtr proportional_copy(StrategyPtr m, Value r) {
    return copycat(std::move(m), std::move(r));
}

StrategyPtr f_shadow(StrategyPtr m, ScalingFunction f) {
    return std::make_unique<FShadowStrategy>(std::move(m), std::move(f));
}

// ---------------------------------------------------------------------------
// Integral bound check

namespace {

ScalingFunction::Integral negate(ScalingFunction::Integral i) {
    i.rational = -i.rational;
    i.log_coeff = -i.log_coeff;
    return i;
}

}  // namespace

json IntegralBoundReport::to_json() const {
    json j;
    j["ok"] = ok;
    j["first_violation"] = first_violation ? json(*first_violation) : json(nullptr);
    j["which"] = which;
    j["steps_checked"] = steps_checked;
    return j;
}

IntegralBoundReport integral_bound_check(const MartingaleRun& m_run,
                                         const MartingaleRun& s_run,
                                         const ScalingFunction& f) {
    if (m_run.steps() != s_run.steps() || m_run.history() != s_run.history())
        throw MismatchedRuns("integral bound check needs runs over the same outcome sequence");
    if (s_run.wealth(0) != f(Value(0)) * m_run.wealth(0))
        throw MismatchedRuns("S(eps) != f(0) M(eps): not an f-shadow");

    IntegralBoundReport report;
    size_t n = m_run.steps();
    for (size_t t = 0; t < n; ++t) {
        if (s_run.increment(t) != f(m_run.wealth(t)) * m_run.increment(t))
            throw MismatchedRuns("S'(sigma) != f(M(sigma)) M'(sigma) at step " +
                                 std::to_string(t));
    }
    for (size_t t = 0; t <= n; ++t) {
        report.steps_checked = t;
        // cumulative bound S(t) >= integral_0^{M(t)} f
        const Value& m_t = m_run.wealth(t);
        if (m_t.sign() < 0) throw InputError("shadowed wealth left the domain of f");
        auto cum = f.integral(Value(0), m_t);
        if (compare_with_log(s_run.wealth(t), cum) < 0) {
            report.ok = false;
            report.first_violation = t;
            report.which = "cumulative";
            return report;
        }
        if (t == n) break;
        // per-step bound S(t+1) - S(t) >= integral over [M(t), M(t+1)]
        Value ds = s_run.wealth(t + 1) - s_run.wealth(t);
        const Value& a = m_run.wealth(t);
        const Value& b = m_run.wealth(t + 1);
        auto step_integral = b >= a ? f.integral(a, b) : negate(f.integral(b, a));
        if (compare_with_log(ds, step_integral) < 0) {
            report.ok = false;
            report.first_violation = t;
            report.which = "per-step";
            return report;
        }
    }
    report.steps_checked = n;
    return report;
}

// ---------------------------------------------------------------------------
// q-profile

namespace {

struct IntervalClosure {
    Value lo;
    std::optional<Value> hi;
};

// closure(B) when it is an interval, possibly wrapped in with_zero/scaled
std::optional<IntervalClosure> interval_closure(const WagerSet& b) {
    switch (b.kind()) {
        case WagerSet::Kind::ClosedInterval:
            return IntervalClosure{b.lo(), b.hi()};
        case WagerSet::Kind::HalfLine:
            return IntervalClosure{b.lo(), std::nullopt};
        case WagerSet::Kind::WithZero:
            return interval_closure(b.inner());
        case WagerSet::Kind::Scaled: {
            auto inner = interval_closure(b.inner());
            if (!inner) return std::nullopt;
            inner->lo = inner->lo * b.ratio();
            if (inner->hi) inner->hi = *inner->hi * b.ratio();
            return inner;
        }
        default:
            return std::nullopt;
    }
}

Value q_profile_single(const WagerSet& a, const WagerSet& b, const Value& m_cap, const Value& x) {
    auto elems = elements_at_most(a, x);
    if (elems) {
        if (elems->empty()) return m_cap;  // no constraints below x
        const Value& a_min = elems->front();
        auto targets = closure_elements_at_most(b, m_cap * a_min);
        if (targets) {
            // candidates t = b/a_min: t*a_min must land in closure(B)
            Value best(0);
            for (const auto& bv : *targets) {
                Value t = bv / a_min;
                if (t > m_cap || t <= best) continue;
                bool ok = true;
                for (const auto& av : *elems) {
                    if (!b.closure_contains(t * av)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) best = t;
            }
            return best;
        }
    }
    // interval-shaped closure(B): decided from inf/sup of A below x
    auto shape = interval_closure(b);
    if (shape && a.kind() != WagerSet::Kind::UnionOf) {
        auto supx = sup_at_most(a, x);
        if (!supx || supx->sign() <= 0) return m_cap;  // nothing to constrain
        Value tmax = m_cap;
        if (shape->hi) {
            Value cap = *shape->hi / *supx;
            if (cap < tmax) tmax = cap;
        }
        if (tmax.sign() <= 0) return Value(0);
        if (shape->lo.sign() > 0) {
            Bounds ba = a.bounds();
            if (!ba.bounded_away_from_zero) return Value(0);
            Value tmin = shape->lo / ba.inf_nonzero.v;
            if (tmax < tmin) return Value(0);
        }
        return tmax;
    }
    throw Unsupported("q-profile needs a finite A-part below x or an interval-shaped closure(B)");
}

}  // namespace

std::vector<Value> q_profile(const WagerSet& a, const WagerSet& b, const Value& m_cap,
                             const std::vector<Value>& xs) {
    std::vector<Value> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(q_profile_single(a, b, m_cap, x));
    return out;
}

}  // namespace duel
