#include "duel/martingale.hpp"

#include <algorithm>
#include <random>

namespace duel {

using json = nlohmann::json;

char outcome_char(Outcome x) { return x == Outcome::Heads ? 'H' : 'T'; }

Outcome outcome_from_char(char c) {
    if (c == 'H' || c == 'h') return Outcome::Heads;
    if (c == 'T' || c == 't') return Outcome::Tails;
    throw InputError(std::string("bad outcome character '") + c + "'");
}

History parse_history(const std::string& s) {
    History h;
    h.reserve(s.size());
    for (char c : s) h.push_back(outcome_from_char(c));
    return h;
}

std::string history_str(const History& h) {
    std::string s;
    s.reserve(h.size());
    for (Outcome x : h) s.push_back(outcome_char(x));
    return s;
}

// ---------------------------------------------------------------------------
// MartingaleRun

MartingaleRun::MartingaleRun(StrategyPtr s, bool strict)
    : strategy_(std::move(s)), strict_(strict) {
    if (!strategy_) throw InputError("run needs a strategy");
    wealth_.push_back(strategy_->initial_value());
    if (wealth_.back().sign() < 0) throw InputError("initial value must be nonnegative");
}

const Value& MartingaleRun::pending_increment() {
    if (!pending_) {
        pending_ = strategy_->current_increment();
        if (!first_overbet_ && pending_->abs() > wealth_.back())
            first_overbet_ = history_.size();
    }
    return *pending_;
}

void MartingaleRun::step(Outcome x) {
    const Value& inc = pending_increment();
    if (strict_ && first_overbet_ && *first_overbet_ <= history_.size())
        throw SteppedBankruptRun("stepping a run that wagered money it does not have (step " +
                                 std::to_string(*first_overbet_) + ")");
    wealth_.push_back(x == Outcome::Heads ? wealth_.back() + inc : wealth_.back() - inc);
    increments_.push_back(inc);
    history_.push_back(x);
    strategy_->observe(x);
    pending_.reset();
}

bool success_at_horizon(const MartingaleRun& run, const Value& threshold) {
    return !run.overbet() && run.current_wealth() >= threshold;
}

// ---------------------------------------------------------------------------
// validate_strategy

namespace {

void validate_walk(Strategy& s, const WagerSet& a, Value wealth, std::string& hist, int depth,
                   const ValidationConfig& cfg, ValidationReport& report) {
    Value inc = s.current_increment();
    Value mag = inc.abs();
    ++report.nodes_checked;
    auto record = [&](ValidationIssue::Kind kind) {
        if (report.issues.size() >= cfg.max_issues) {
            report.truncated = true;
            return;
        }
        report.issues.push_back({kind, hist, inc, wealth});
    };
    if (!a.contains(mag)) record(ValidationIssue::Kind::WagerNotInSet);
    if (mag > wealth) record(ValidationIssue::Kind::Overbet);
    if (depth == 0) return;

    auto h = s.clone();
    h->observe(Outcome::Heads);
    hist.push_back('H');
    validate_walk(*h, a, wealth + inc, hist, depth - 1, cfg, report);
    hist.back() = 'T';
    s.observe(Outcome::Tails);
    validate_walk(s, a, wealth - inc, hist, depth - 1, cfg, report);
    hist.pop_back();
}

}  // namespace

ValidationReport validate_strategy(const Strategy& s, const WagerSet& a, int depth,
                                   const ValidationConfig& cfg) {
    if (depth < 0 || depth > cfg.depth_cap)
        throw DepthCapExceeded("validation depth " + std::to_string(depth) +
                               " exceeds cap " + std::to_string(cfg.depth_cap));
    ValidationReport report;
    auto root = s.clone();
    std::string hist;
    validate_walk(*root, a, root->initial_value(), hist, depth, cfg, report);
    return report;
}

// ---------------------------------------------------------------------------
// Ruler martingale

namespace {

int valuation2(unsigned long t) {
    return t == 0 ? 0 : __builtin_ctzll(t);
}

class RulerStrategy final : public Strategy {
public:
    RulerStrategy(const WagerSet& a, Value initial)
        : enum_(std::make_shared<DenseEnumerator>(a)), initial_(std::move(initial)) {
        if (initial_.sign() <= 0) throw InputError("ruler martingale needs a positive bankroll");
    }
    Value initial_value() const override { return initial_; }
    Value current_increment() override { return enum_->at(valuation2(t_)); }
    void observe(Outcome) override { ++t_; }
    bool history_independent() const override { return true; }
    StrategyPtr clone() const override { return std::make_unique<RulerStrategy>(*this); }

private:
    std::shared_ptr<DenseEnumerator> enum_;  // memoized cache shared across clones
    Value initial_;
    unsigned long t_ = 1;
};

}  // namespace

StrategyPtr ruler_martingale(const WagerSet& a, const Value& initial_value) {
    return std::make_unique<RulerStrategy>(a, initial_value);
}

std::optional<Value> ruler_default_initial(const WagerSet& a) {
    Bounds b = a.bounds();
    if (b.sup.infinite) return std::nullopt;
    auto s = sup_at_most(a, Value(1));
    if (!s || s->sign() <= 0) return std::nullopt;
    return *s * Value(64);
}

Value visit_density(const Strategy& s, const Value& a, const Value& epsilon, long horizon) {
    if (horizon < 1) throw InputError("visit_density needs horizon >= 1");
    if (!s.history_independent())
        throw NotHistoryIndependent("visit_density needs a history-independent strategy");
    auto probe = s.clone();
    long hits = 0;
    for (long t = 1; t <= horizon; ++t) {
        Value mag = probe->current_increment().abs();
        Value dev = (mag - a).abs();
        if (dev < epsilon || dev.is_zero()) ++hits;
        probe->observe(Outcome::Heads);
    }
    return Value(hits) / Value(horizon);
}

// ---------------------------------------------------------------------------
// The opponent zoo

namespace {

class ConstantWealth final : public Strategy {
public:
    explicit ConstantWealth(Value c) : c_(std::move(c)) {}
    Value initial_value() const override { return c_; }
    Value current_increment() override { return Value(0); }
    void observe(Outcome) override {}
    bool history_independent() const override { return true; }
    StrategyPtr clone() const override { return std::make_unique<ConstantWealth>(*this); }

private:
    Value c_;
};

class AlwaysSide final : public Strategy {
public:
    AlwaysSide(Value wager, Value initial, bool heads)
        : wager_(std::move(wager)), initial_(std::move(initial)), heads_(heads) {
        if (wager_.sign() < 0) throw InputError("wager must be nonnegative");
    }
    Value initial_value() const override { return initial_; }
    Value current_increment() override { return heads_ ? wager_ : -wager_; }
    void observe(Outcome) override {}
    bool history_independent() const override { return true; }
    StrategyPtr clone() const override { return std::make_unique<AlwaysSide>(*this); }

private:
    Value wager_, initial_;
    bool heads_;
};

class ThresholdSwitcher final : public Strategy {
public:
    ThresholdSwitcher(Value w1, Value w2, Value initial)
        : w1_(std::move(w1)), w2_(std::move(w2)), initial_(std::move(initial)) {}
    Value initial_value() const override { return initial_; }
    Value current_increment() override { return switched_ ? w2_ : w1_; }
    void observe(Outcome x) override {
        if (x == Outcome::Tails) switched_ = true;
    }
    StrategyPtr clone() const override { return std::make_unique<ThresholdSwitcher>(*this); }

private:
    Value w1_, w2_, initial_;
    bool switched_ = false;
};

class Scripted final : public Strategy {
public:
    Scripted(std::vector<Value> wagers, Value initial)
        : wagers_(std::move(wagers)), initial_(std::move(initial)) {}
    Value initial_value() const override { return initial_; }
    Value current_increment() override {
        return pos_ < wagers_.size() ? wagers_[pos_] : Value(0);
    }
    void observe(Outcome) override { ++pos_; }
    StrategyPtr clone() const override { return std::make_unique<Scripted>(*this); }

private:
    std::vector<Value> wagers_;
    Value initial_;
    size_t pos_ = 0;
};

class Copycat final : public Strategy {
public:
    Copycat(StrategyPtr target, Value ratio) : target_(std::move(target)), ratio_(std::move(ratio)) {
        if (ratio_.sign() <= 0) throw InputError("copycat ratio must be positive");
    }
    Copycat(const Copycat& o) : target_(o.target_->clone()), ratio_(o.ratio_) {}
    Value initial_value() const override { return ratio_ * target_->initial_value(); }
    Value current_increment() override { return ratio_ * target_->current_increment(); }
    void observe(Outcome x) override { target_->observe(x); }
    bool history_independent() const override { return target_->history_independent(); }
    StrategyPtr clone() const override { return std::make_unique<Copycat>(*this); }

private:
    StrategyPtr target_;
    Value ratio_;
};

class CopycatRounded final : public Strategy {
public:
    CopycatRounded(StrategyPtr target, WagerSet round_to, Value initial)
        : target_(std::move(target)), set_(std::move(round_to)), initial_(std::move(initial)) {}
    CopycatRounded(const CopycatRounded& o)
        : target_(o.target_->clone()), set_(o.set_), initial_(o.initial_) {}
    Value initial_value() const override { return initial_; }
    Value current_increment() override {
        Value inc = target_->current_increment();
        if (inc.is_zero()) return inc;
        auto snapped = nearest_element(set_, inc.abs());
        if (!snapped) return Value(0);
        return inc.sign() > 0 ? *snapped : -*snapped;
    }
    void observe(Outcome x) override { target_->observe(x); }
    bool history_independent() const override { return target_->history_independent(); }
    StrategyPtr clone() const override { return std::make_unique<CopycatRounded>(*this); }

private:
    StrategyPtr target_;
    WagerSet set_;
    Value initial_;
};

class StopOnBankrupt final : public Strategy {
public:
    StopOnBankrupt(StrategyPtr inner, Value min_wager)
        : inner_(std::move(inner)), min_wager_(std::move(min_wager)),
          wealth_(inner_->initial_value()) {}
    StopOnBankrupt(const StopOnBankrupt& o)
        : inner_(o.inner_->clone()), min_wager_(o.min_wager_), wealth_(o.wealth_),
          stopped_(o.stopped_), pending_(o.pending_) {}
    Value initial_value() const override { return inner_->initial_value(); }
    Value current_increment() override {
        if (!pending_) {
            Value inc = inner_->current_increment();
            if (!stopped_ && (wealth_ < min_wager_ || inc.abs() > wealth_)) stopped_ = true;
            pending_ = stopped_ ? Value(0) : inc;
        }
        return *pending_;
    }
    void observe(Outcome x) override {
        Value inc = current_increment();
        wealth_ = x == Outcome::Heads ? wealth_ + inc : wealth_ - inc;
        inner_->observe(x);
        pending_.reset();
    }
    bool history_independent() const override { return false; }
    StrategyPtr clone() const override { return std::make_unique<StopOnBankrupt>(*this); }

private:
    StrategyPtr inner_;
    Value min_wager_;
    Value wealth_;
    bool stopped_ = false;
    std::optional<Value> pending_;
};

class DyadicRandom final : public Strategy {
public:
    DyadicRandom(uint64_t seed, Value initial)
        : rng_(seed), initial_(std::move(initial)), wealth_(initial_) {}
    Value initial_value() const override { return initial_; }
    Value current_increment() override {
        if (!pending_) {
            unsigned long k = rng_() % 2049;
            bool heads = rng_() & 1;
            Value mag = Value(static_cast<long>(k)) / Value(256);
            if (mag > wealth_) mag = wealth_;
            pending_ = heads ? mag : -mag;
        }
        return *pending_;
    }
    void observe(Outcome x) override {
        Value inc = current_increment();
        wealth_ = x == Outcome::Heads ? wealth_ + inc : wealth_ - inc;
        pending_.reset();
    }
    StrategyPtr clone() const override { return std::make_unique<DyadicRandom>(*this); }

private:
    std::mt19937_64 rng_;
    Value initial_, wealth_;
    std::optional<Value> pending_;
};

class PowerWalk final : public Strategy {
public:
    PowerWalk(uint64_t seed, Value initial)
        : rng_(seed), initial_(std::move(initial)), wealth_(initial_) {
        if (initial_.sign() <= 0) throw InputError("power_walk needs a positive bankroll");
    }
    Value initial_value() const override { return initial_; }
    Value current_increment() override {
        if (!pending_) {
            // wager at most wealth/2 so wealth stays positive forever
            long emax = floor_log2(wealth_) - 1;
            long emin = std::min(-8L, emax - 4);
            long e = emax - static_cast<long>(rng_() % static_cast<unsigned long>(emax - emin + 1));
            bool heads = rng_() & 1;
            Value mag = Value(2).pow(e);
            pending_ = heads ? mag : -mag;
        }
        return *pending_;
    }
    void observe(Outcome x) override {
        Value inc = current_increment();
        wealth_ = x == Outcome::Heads ? wealth_ + inc : wealth_ - inc;
        pending_.reset();
    }
    StrategyPtr clone() const override { return std::make_unique<PowerWalk>(*this); }

private:
    std::mt19937_64 rng_;
    Value initial_, wealth_;
    std::optional<Value> pending_;
};

}  // namespace

StrategyPtr constant_wealth(Value c) { return std::make_unique<ConstantWealth>(std::move(c)); }

StrategyPtr always_heads(Value wager, Value initial) {
    return std::make_unique<AlwaysSide>(std::move(wager), std::move(initial), true);
}

StrategyPtr always_tails(Value wager, Value initial) {
    return std::make_unique<AlwaysSide>(std::move(wager), std::move(initial), false);
}

StrategyPtr threshold_switcher(Value w1, Value w2, Value initial) {
    return std::make_unique<ThresholdSwitcher>(std::move(w1), std::move(w2), std::move(initial));
}

StrategyPtr scripted(std::vector<Value> signed_wagers, Value initial) {
    return std::make_unique<Scripted>(std::move(signed_wagers), std::move(initial));
}

StrategyPtr copycat(StrategyPtr target, Value ratio) {
    return std::make_unique<Copycat>(std::move(target), std::move(ratio));
}

StrategyPtr copycat_rounded(StrategyPtr target, WagerSet round_to, Value initial) {
    return std::make_unique<CopycatRounded>(std::move(target), std::move(round_to),
                                            std::move(initial));
}

StrategyPtr stop_on_bankrupt(StrategyPtr inner, const WagerSet& declared_set) {
    Bounds b = declared_set.bounds();
    if (b.inf_nonzero.infinite)
        throw InputError("stop_on_bankrupt: declared set has no positive wagers");
    return std::make_unique<StopOnBankrupt>(std::move(inner), b.inf_nonzero.v);
}

StrategyPtr dyadic_random(uint64_t seed, Value initial) {
    return std::make_unique<DyadicRandom>(seed, std::move(initial));
}

StrategyPtr power_walk(uint64_t seed, Value initial) {
    return std::make_unique<PowerWalk>(seed, std::move(initial));
}

// ---------------------------------------------------------------------------
// JSON specs

namespace {

Value spec_value(const json& spec, const char* field) {
    if (!spec.contains(field))
        throw InputError(std::string("strategy spec missing field '") + field + "'");
    const json& j = spec[field];
    if (j.is_string()) return Value::parse(j.get<std::string>());
    if (j.is_number_integer()) return Value(static_cast<long>(j.get<long long>()));
    throw InputError(std::string("strategy spec field '") + field + "': expected \"p/q\"");
}

Value spec_value_or(const json& spec, const char* field, Value fallback) {
    return spec.contains(field) ? spec_value(spec, field) : fallback;
}

}  // namespace

StrategyPtr make_strategy(const json& spec, const SpecResolver& resolver) {
    if (spec.is_string()) {
        if (resolver) {
            if (auto s = resolver(spec.get<std::string>())) return s;
        }
        throw UnknownSpec("unresolved strategy reference '" + spec.get<std::string>() + "'");
    }
    if (!spec.is_object() || !spec.contains("kind"))
        throw UnknownSpec("strategy spec needs a 'kind' field");
    std::string kind = spec["kind"].get<std::string>();

    if (kind == "constant_wealth") return constant_wealth(spec_value(spec, "wealth"));
    if (kind == "always_heads") {
        Value w = spec_value(spec, "wager");
        return always_heads(w, spec_value_or(spec, "initial", w));
    }
    if (kind == "always_tails") {
        Value w = spec_value(spec, "wager");
        return always_tails(w, spec_value_or(spec, "initial", w));
    }
    if (kind == "threshold_switcher") {
        Value w1 = spec_value(spec, "w1");
        Value w2 = spec_value(spec, "w2");
        return threshold_switcher(w1, w2, spec_value_or(spec, "initial", w1));
    }
    if (kind == "scripted") {
        if (!spec.contains("wagers") || !spec["wagers"].is_array())
            throw InputError("scripted spec needs a 'wagers' array");
        std::vector<Value> wagers;
        for (const auto& w : spec["wagers"]) {
            if (w.is_string()) wagers.push_back(Value::parse(w.get<std::string>()));
            else if (w.is_number_integer()) wagers.push_back(Value(static_cast<long>(w.get<long long>())));
            else throw InputError("scripted wagers must be \"p/q\" strings or integers");
        }
        return scripted(std::move(wagers), spec_value(spec, "initial"));
    }
    if (kind == "copycat") {
        if (!spec.contains("target")) throw InputError("copycat spec needs a 'target'");
        return copycat(make_strategy(spec["target"], resolver), spec_value(spec, "ratio"));
    }
    if (kind == "copycat_rounded") {
        if (!spec.contains("target")) throw InputError("copycat_rounded spec needs a 'target'");
        if (!spec.contains("round_to")) throw InputError("copycat_rounded spec needs 'round_to'");
        return copycat_rounded(make_strategy(spec["target"], resolver),
                               WagerSet::from_json(spec["round_to"]),
                               spec_value(spec, "initial"));
    }
    if (kind == "stop_on_bankrupt") {
        if (!spec.contains("inner")) throw InputError("stop_on_bankrupt spec needs 'inner'");
        if (!spec.contains("set")) throw InputError("stop_on_bankrupt spec needs 'set'");
        return stop_on_bankrupt(make_strategy(spec["inner"], resolver),
                                WagerSet::from_json(spec["set"]));
    }
    if (kind == "ruler") {
        if (!spec.contains("set")) throw InputError("ruler spec needs 'set'");
        WagerSet a = WagerSet::from_json(spec["set"]);
        Value initial;
        if (spec.contains("initial")) {
            initial = spec_value(spec, "initial");
        } else if (auto d = ruler_default_initial(a)) {
            initial = *d;
        } else {
            throw InputError("ruler spec needs 'initial' (no default bankroll for this set)");
        }
        return ruler_martingale(a, initial);
    }
    if (kind == "dyadic_random") {
        return dyadic_random(spec.value("seed", 0ull), spec_value(spec, "initial"));
    }
    if (kind == "power_walk") {
        return power_walk(spec.value("seed", 0ull), spec_value(spec, "initial"));
    }
    throw UnknownSpec("unknown strategy kind '" + kind + "'");
}

}  // namespace duel
