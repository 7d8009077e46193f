#include "duel/evasion.hpp"

#include <algorithm>

#include "duel/domination.hpp"

namespace duel {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Ratio minimization

Outcome ratio_min_outcome(const Value& n_val, const Value& m_val, const Value& n_inc,
                          const Value& m_inc) {
    if (m_val.sign() <= 0) throw InvalidState("ratio minimization needs M(sigma) > 0");
    Value nh = n_val + n_inc, mh = m_val + m_inc;
    Value nt = n_val - n_inc, mt = m_val - m_inc;
    if (nh.sign() < 0 || nt.sign() < 0)
        throw InvalidState("ratio minimization needs N nonnegative at both successors");
    auto decreases = [&](const Value& nx, const Value& mx) {
        return mx.sign() > 0 && nx * m_val < n_val * mx;
    };
    if (decreases(nh, mh)) return Outcome::Heads;
    if (decreases(nt, mt)) return Outcome::Tails;
    auto ties = [&](const Value& nx, const Value& mx) {
        return mx.sign() > 0 && nx * m_val == n_val * mx;
    };
    if (ties(nh, mh) && mh > m_val) return Outcome::Heads;
    if (ties(nt, mt) && mt > m_val) return Outcome::Tails;
    return Outcome::Heads;
}

Value RatioMinTrace::deviation_density(size_t upto, const Value& limit,
                                       const Value& epsilon) const {
    if (upto == 0 || upto > steps.size())
        throw InputError("deviation window exceeds the trace length");
    long hits = 0;
    for (size_t t = 0; t < upto; ++t) {
        if ((steps[t].n_inc - limit * steps[t].m_inc).abs() > epsilon) ++hits;
    }
    return Value(hits) / Value(static_cast<long>(upto));
}

RatioMinTrace ratio_min_extension(StrategyPtr n, StrategyPtr m, const History& prefix,
                                  size_t steps) {
    MartingaleRun nr(std::move(n), false);
    MartingaleRun mr(std::move(m), false);
    for (Outcome x : prefix) {
        nr.step(x);
        mr.step(x);
    }
    if (mr.current_wealth().sign() <= 0)
        throw InvalidState("ratio minimization needs M > 0 at the prefix end");

    RatioMinTrace trace;
    trace.initial_ratio = nr.current_wealth() / mr.current_wealth();
    Value prev_ratio = trace.initial_ratio;
    trace.steps.reserve(steps);
    for (size_t t = 0; t < steps; ++t) {
        Value n_inc = nr.pending_increment();
        Value m_inc = mr.pending_increment();
        RatioMinStep row{t, nr.current_wealth(), mr.current_wealth(), n_inc, m_inc,
                         Outcome::Heads, Value(0)};
        row.outcome = ratio_min_outcome(row.n, row.m, n_inc, m_inc);
        nr.step(row.outcome);
        mr.step(row.outcome);
        if (mr.current_wealth().sign() <= 0)
            throw InvalidState("M reached 0 during ratio minimization (step " +
                               std::to_string(t) + ")");
        row.ratio_after = nr.current_wealth() / mr.current_wealth();
        if (row.ratio_after > prev_ratio)
            throw MonotonicityViolation("N/M ratio increased at step " + std::to_string(t));
        prev_ratio = row.ratio_after;
        trace.steps.push_back(std::move(row));
    }
    return trace;
}

Value cesaro_density(const RatioMinTrace& trace, const Value& limit, const Value& epsilon) {
    if (trace.steps.empty()) throw InputError("cesaro density of an empty trace");
    return trace.deviation_density(trace.steps.size(), limit, epsilon);
}

// ---------------------------------------------------------------------------
// Normalization

NormalizedPair normalize_pair(const WagerSet& a, const WagerSet& b) {
    Bounds ba = a.bounds();
    if (ba.sup.infinite) throw UnboundedA("sup A is infinite");
    if (ba.sup.v.sign() <= 0) throw EmptySet("A has no positive elements");
    Bounds bb = b.bounds();
    if (bb.inf_nonzero.infinite) throw EmptySet("B has no positive elements");
    if (!bb.bounded_away_from_zero || bb.inf_nonzero.v.sign() <= 0)
        throw BNotBoundedAwayFromZero("inf(B \\ {0}) is 0");
    NormalizedPair out{a, b, Value(1) / ba.sup.v, Value(1) / bb.inf_nonzero.v};
    if (out.r_a != Value(1)) out.a_scaled = WagerSet::scaled(out.r_a, a);
    if (out.r_b != Value(1)) out.b_scaled = WagerSet::scaled(out.r_b, b);
    return out;
}

// ---------------------------------------------------------------------------
// Bounded-case casino

long bounded_k_index(const Value& m, const std::vector<Value>& user_wealths) {
    if (m.sign() <= 0) throw InvalidState("k(t) needs m(t) > 0");
    long users = static_cast<long>(user_wealths.size());
    Value s(0);
    long k = 0;
    for (long i = 1; i <= 2 * users; ++i) {
        bool is_user = (i % 2 == 1) && ((i + 1) / 2 <= users);
        s += is_user ? user_wealths[static_cast<size_t>((i - 1) / 2)] : Value(1);
        if (s < m) k = i;
        else return k;
    }
    // beyond the users only constant-1 padding remains: S_i = s + (i - 2U)
    Value bound = m - s + Value(2 * users);  // k < bound
    mpz_class kz = bound.ceil() - 1;
    long k_beyond = static_cast<long>(kz.get_si());
    return std::max(k, k_beyond);
}

Value bounded_prefix_sum(long k, const std::vector<Value>& user_wealths) {
    if (k < 0) throw InputError("prefix sum needs k >= 0");
    long users = static_cast<long>(user_wealths.size());
    long users_below = std::min(users, (k + 1) / 2);
    Value s(k - users_below);  // the constant-1 entries
    for (long u = 0; u < users_below; ++u) s += user_wealths[static_cast<size_t>(u)];
    return s;
}

namespace {

void share_pending_bets(MartingaleRun& m_run, std::vector<MartingaleRun>& opponents) {
    std::vector<Value> bets;
    bets.reserve(opponents.size() + 1);
    bets.push_back(m_run.pending_increment());
    for (auto& o : opponents) bets.push_back(o.pending_increment());
    m_run.strategy().observe_bets(bets);
    for (auto& o : opponents) o.strategy().observe_bets(bets);
}

std::vector<MartingaleRun> wrap_opponents(std::vector<StrategyPtr> opponents,
                                          const NormalizedPair& norm) {
    std::vector<MartingaleRun> runs;
    runs.reserve(opponents.size());
    for (auto& o : opponents) {
        StrategyPtr scaled = norm.r_b == Value(1) ? std::move(o)
                                                  : proportional_copy(std::move(o), norm.r_b);
        runs.emplace_back(stop_on_bankrupt(std::move(scaled), norm.b_scaled));
    }
    return runs;
}

}  // namespace

BoundedCasinoResult bounded_casino(const WagerSet& a, const WagerSet& b,
                                   std::vector<StrategyPtr> opponents,
                                   const CasinoConfig& cfg) {
    if (cfg.horizon < 1) throw InputError("casino horizon must be >= 1");
    NormalizedPair norm = normalize_pair(a, b);

    Value initial;
    if (cfg.ruler_initial) {
        initial = *cfg.ruler_initial;
    } else if (auto d = ruler_default_initial(norm.a_scaled)) {
        initial = *d;
    } else {
        throw InputError("no default bankroll for this A; set ruler_initial");
    }

    BoundedCasinoResult result{
        {}, MartingaleRun(ruler_martingale(norm.a_scaled, initial), /*strict=*/false),
        wrap_opponents(std::move(opponents), norm), {}, norm, initial};
    MartingaleRun& m_run = result.m_run;
    auto& opp = result.opponent_runs;
    const long users = static_cast<long>(opp.size());

    result.log.reserve(static_cast<size_t>(cfg.horizon) + 1);
    std::vector<Value> wealths(static_cast<size_t>(users), Value(0));
    for (long t = 0; t <= cfg.horizon; ++t) {
        const Value& m = m_run.current_wealth();
        if (m.sign() <= 0)
            throw InvariantViolation("m(t) must stay positive in the bounded casino");
        for (long u = 0; u < users; ++u) wealths[static_cast<size_t>(u)] =
            opp[static_cast<size_t>(u)].current_wealth();
        long k = bounded_k_index(m, wealths);
        Value s_k = bounded_prefix_sum(k, wealths);
        if (!(s_k < m)) throw InvariantViolation("S_k(t) < m(t) failed");

        BoundedCasinoState row;
        row.t = t;
        if (t > 0) row.outcome = result.x[static_cast<size_t>(t - 1)];
        row.m = m;
        row.k = k;
        row.s_k = s_k;
        result.log.push_back(row);
        if (t == cfg.horizon) break;

        // Case I: the least virtual index up to k with a nonzero wager; only
        // user opponents ever bet
        long acting = 0;
        Value acting_inc;
        for (long u = 0; u < users; ++u) {
            long vidx = 2 * u + 1;
            if (vidx > k) break;
            const Value& inc = opp[static_cast<size_t>(u)].pending_increment();
            if (!inc.is_zero()) {
                acting = vidx;
                acting_inc = inc;
                break;
            }
        }

        Outcome x;
        if (acting > 0) {
            result.log.back().case_tag = 1;
            result.log.back().acting_index = acting;
            x = acting_inc.sign() > 0 ? Outcome::Tails : Outcome::Heads;
        } else {
            long vidx = k + 1;
            Value n_val(1), n_inc(0);
            if (vidx % 2 == 1 && (vidx - 1) / 2 < users) {
                auto& target = opp[static_cast<size_t>((vidx - 1) / 2)];
                n_val = target.current_wealth();
                n_inc = target.pending_increment();
            }
            Value reserve = m - s_k;
            Value m_inc = m_run.pending_increment();
            if (m_inc.sign() <= 0)
                throw InvariantViolation("ruler wager must stay positive");
            result.log.back().case_tag = 2;
            result.log.back().acting_index = vidx;
            x = ratio_min_outcome(n_val, reserve, n_inc, m_inc);
        }

        if (cfg.share_bets) share_pending_bets(m_run, opp);
        result.x.push_back(x);
        m_run.step(x);
        for (auto& o : opp) o.step(x);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Well-ordered-case casino

Fragility well_ordered_fragility(const Value& m, const Value& g,
                                 const std::vector<Value>& opponent_wealths) {
    Value lhs = m - g + Value(1);  // m - (g - 1)
    if (lhs.sign() <= 0) throw InvalidState("fragility needs m >= g");
    Fragility out;
    Value nu(0);
    long users = static_cast<long>(opponent_wealths.size());
    bool capped = false;
    for (long p = 1; p <= users; ++p) {
        Value nu_next = Value(p) + [&] {
            Value w(0);
            for (long j = 0; j < p; ++j) w += opponent_wealths[static_cast<size_t>(j)];
            return w;
        }();
        if (lhs > nu_next) {
            out.p = p;
            nu = nu_next;
        } else {
            capped = true;
            break;
        }
    }
    if (!capped) {
        // beyond the list the opponents are silent zero-wealth martingales,
        // so nu_p = p + total wealth
        Value total(0);
        for (const auto& w : opponent_wealths) total += w;
        mpz_class pz = (lhs - total).ceil() - 1;
        long p_beyond = static_cast<long>(pz.get_si());
        if (p_beyond > out.p) {
            out.p = p_beyond;
            nu = Value(p_beyond) + total;
        }
    }
    out.nu_p = nu;
    out.mu = m - (nu + Value(1));
    return out;
}

Value gradual_value(const Value& a_k, const Value& a_k1, long block_start, long block_len,
                    long t) {
    if (t < block_start || t >= block_start + block_len)
        throw InputError("g queried outside the block");
    if (a_k1 <= a_k) return a_k;
    return (Value(block_start + block_len - t) * a_k + Value(t - block_start) * a_k1) /
           Value(block_len);
}

namespace {

// Dense sequence with infinite repetition: x1; x1,x2; x1,x2,x3; ...
class RepeatedDenseSequence {
public:
    explicit RepeatedDenseSequence(const WagerSet& s) : enum_(s) {}
    // 1-based
    Value at(long j) {
        if (j < 1) throw InputError("sequence index starts at 1");
        long row = 1;
        long acc = 0;
        while (acc + row < j) {
            acc += row;
            ++row;
        }
        return enum_.at(static_cast<size_t>(j - acc - 1));
    }

private:
    DenseEnumerator enum_;
};

// M's wager schedule: blocks of a_k wagers of length
// f(s,k) = max(1, ceil(max(m(s), |(a_{k+1}-a_k)/a_k|))), always betting
// heads, reverting to k = 1 after every tails.
class ScheduleMartingale final : public Strategy {
public:
    ScheduleMartingale(const WagerSet& a_scaled, Value initial)
        : seq_(std::make_shared<RepeatedDenseSequence>(a_scaled)), wealth_(std::move(initial)) {
        block_len_ = compute_len();
    }

    Value initial_value() const override { return wealth_initial_; }
    Value current_increment() override { return seq_->at(k_); }
    void observe(Outcome x) override {
        Value inc = seq_->at(k_);
        wealth_ = x == Outcome::Heads ? wealth_ + inc : wealth_ - inc;
        ++t_;
        if (x == Outcome::Tails) {
            k_ = 1;
            block_start_ = t_;
            block_len_ = compute_len();
        } else if (t_ == block_start_ + block_len_) {
            ++k_;
            block_start_ = t_;
            block_len_ = compute_len();
        }
    }
    StrategyPtr clone() const override { return std::make_unique<ScheduleMartingale>(*this); }

    Value gradual() { return gradual_value(seq_->at(k_), seq_->at(k_ + 1), block_start_,
                                           block_len_, t_); }
    long sequence_index() const { return k_; }

private:
    long compute_len() {
        Value a_k = seq_->at(k_);
        Value a_k1 = seq_->at(k_ + 1);
        Value jump = ((a_k1 - a_k) / a_k).abs();
        Value need = wealth_ > jump ? wealth_ : jump;
        mpz_class len = need.ceil();
        if (len < 1) len = 1;
        if (!len.fits_slong_p()) throw InputError("block length out of range");
        return len.get_si();
    }

    std::shared_ptr<RepeatedDenseSequence> seq_;  // shared across clones
    Value wealth_;
    Value wealth_initial_ = Value(1);  // a_1 after normalization
    long t_ = 0;
    long k_ = 1;
    long block_start_ = 0;
    long block_len_ = 1;
};

}  // namespace

WellOrderedCasinoResult well_ordered_casino(const WagerSet& a, const WagerSet& b,
                                            std::vector<StrategyPtr> opponents,
                                            const CasinoConfig& cfg) {
    if (cfg.horizon < 1) throw InputError("casino horizon must be >= 1");
    if (!b.is_well_ordered())
        throw NotWellOrdered("the well-ordered construction needs a well-ordered B");

    // rescale so the first dense-sequence element is 1 and inf(B \ {0}) = 1
    DenseEnumerator probe(a);
    Value x1 = probe.at(0);
    Bounds bb = b.bounds();
    if (bb.inf_nonzero.infinite) throw EmptySet("B has no positive elements");
    NormalizedPair norm{a, b, Value(1) / x1, Value(1) / bb.inf_nonzero.v};
    if (norm.r_a != Value(1)) norm.a_scaled = WagerSet::scaled(norm.r_a, a);
    if (norm.r_b != Value(1)) norm.b_scaled = WagerSet::scaled(norm.r_b, b);

    auto schedule = std::make_unique<ScheduleMartingale>(norm.a_scaled, Value(1));
    ScheduleMartingale* sched = schedule.get();

    WellOrderedCasinoResult result{{},
                                   MartingaleRun(std::move(schedule), /*strict=*/false),
                                   wrap_opponents(std::move(opponents), norm),
                                   {},
                                   norm,
                                   Value(1)};
    MartingaleRun& m_run = result.m_run;
    auto& opp = result.opponent_runs;
    const long users = static_cast<long>(opp.size());

    result.log.reserve(static_cast<size_t>(cfg.horizon) + 1);
    std::vector<Value> wealths(static_cast<size_t>(users), Value(0));
    long asserted_floor = 0;  // fragile indices must persist; set by the last decision
    Value prev_g(1);
    for (long t = 0; t <= cfg.horizon; ++t) {
        const Value& m = m_run.current_wealth();
        Value m_inc = m_run.pending_increment();
        Value g = sched->gradual();

        if (m < g || g < m_inc)
            throw InvariantViolation("m(t) >= g(t) >= m'(t) failed at step " + std::to_string(t));
        if (t > 0) {
            Outcome last = result.x.back();
            if (last == Outcome::Tails && g != Value(1))
                throw InvariantViolation("g(t+1) = 1 after tails failed");
            if (last == Outcome::Heads && g - prev_g > result.log.back().m_inc)
                throw InvariantViolation("g(t+1) - g(t) <= m'(t) after heads failed");
        }
        prev_g = g;

        for (long u = 0; u < users; ++u)
            wealths[static_cast<size_t>(u)] = opp[static_cast<size_t>(u)].current_wealth();
        Fragility frag = well_ordered_fragility(m, g, wealths);
        if (frag.p < asserted_floor)
            throw FragilityAssertionFailed("p(t+1) >= " + std::to_string(asserted_floor) +
                                           " failed at step " + std::to_string(t));

        WellOrderedCasinoState row;
        row.t = t;
        if (t > 0) row.outcome = result.x[static_cast<size_t>(t - 1)];
        row.m = m;
        row.m_inc = m_inc;
        row.g = g;
        row.p = frag.p;
        row.mu = frag.mu;
        result.log.push_back(row);
        if (t == cfg.horizon) break;

        // case (i): the least fragile opponent with a nonzero wager
        long acting = 0;
        Value acting_inc;
        for (long u = 0; u < std::min(frag.p, users); ++u) {
            const Value& inc = opp[static_cast<size_t>(u)].pending_increment();
            if (!inc.is_zero()) {
                acting = u + 1;
                acting_inc = inc;
                break;
            }
        }

        Outcome x;
        if (acting > 0) {
            result.log.back().case_tag = 1;
            result.log.back().acting_index = acting;
            x = acting_inc.sign() > 0 ? Outcome::Tails : Outcome::Heads;
            asserted_floor = acting;
        } else {
            // case (ii): mu/N_{p+1}-ratio-minimizing with the heads default
            Value n_val(0), n_inc(0);
            if (frag.p < users) {
                auto& target = opp[static_cast<size_t>(frag.p)];
                n_val = target.current_wealth();
                n_inc = target.pending_increment();
            }
            result.log.back().case_tag = 2;
            result.log.back().acting_index = frag.p + 1;
            if (frag.mu.sign() > 0) result.log.back().q = n_val / frag.mu;
            x = (frag.mu.sign() > 0 && n_inc * frag.mu > n_val * m_inc) ? Outcome::Tails
                                                                        : Outcome::Heads;
            asserted_floor = frag.p;
        }

        if (cfg.share_bets) share_pending_bets(m_run, opp);
        result.x.push_back(x);
        m_run.step(x);
        for (auto& o : opp) o.step(x);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Reports

json StabilizationReport::to_json() const {
    json opp = json::array();
    for (const auto& e : opponents) {
        json o;
        o["opponent"] = e.opponent;
        o["last_active"] = e.last_active ? json(*e.last_active) : json(nullptr);
        o["final_wealth"] = e.final_wealth.str();
        o["stabilized"] = e.stabilized;
        opp.push_back(o);
    }
    json j;
    j["opponents"] = opp;
    j["window_start"] = window_start;
    j["suffix_min_over_window"] = suffix_min_over_window;
    return j;
}

StabilizationReport stabilization_report(const std::vector<long>& index_trajectory,
                                         const std::vector<MartingaleRun>& opponent_runs,
                                         double window_fraction) {
    StabilizationReport report;
    long total = index_trajectory.empty() ? 0 : static_cast<long>(index_trajectory.size()) - 1;
    report.window_start = total - static_cast<long>(total * window_fraction);

    report.suffix_min.resize(index_trajectory.size());
    long running = index_trajectory.empty() ? 0 : index_trajectory.back();
    for (size_t i = index_trajectory.size(); i-- > 0;) {
        running = std::min(running, index_trajectory[i]);
        report.suffix_min[i] = running;
    }
    if (!report.suffix_min.empty())
        report.suffix_min_over_window =
            report.suffix_min[static_cast<size_t>(std::max(0L, report.window_start))];

    for (size_t u = 0; u < opponent_runs.size(); ++u) {
        const MartingaleRun& run = opponent_runs[u];
        StabilizationEntry e;
        e.opponent = u;
        for (size_t t = run.steps(); t-- > 0;) {
            if (!run.increment(t).is_zero()) {
                e.last_active = static_cast<long>(t);
                break;
            }
        }
        e.final_wealth = run.current_wealth();
        e.stabilized = !e.last_active || *e.last_active < report.window_start;
        report.opponents.push_back(std::move(e));
    }
    return report;
}

// ---------------------------------------------------------------------------
// The worked-example two-phase casino

TwoPhaseResult two_phase_casino(StrategyPtr leader, StrategyPtr trailer, long horizon,
                                const Value& lead_margin) {
    if (horizon < 1) throw InputError("two-phase casino horizon must be >= 1");
    TwoPhaseResult result{{}, MartingaleRun(std::move(leader), false),
                          MartingaleRun(std::move(trailer), false), -1};
    bool first_phase = true;
    for (long t = 0; t < horizon; ++t) {
        Outcome x;
        if (first_phase) {
            if (result.leader_run.current_wealth() >
                result.trailer_run.current_wealth() + lead_margin) {
                x = Outcome::Tails;
                first_phase = false;
                result.switch_step = t;
            } else {
                x = Outcome::Heads;
            }
        } else {
            const Value& inc = result.trailer_run.pending_increment();
            x = inc.sign() > 0 ? Outcome::Tails : Outcome::Heads;
        }
        result.x.push_back(x);
        result.leader_run.step(x);
        result.trailer_run.step(x);
    }
    return result;
}

}  // namespace duel
