#include <algorithm>

#include "duel/wagerset.hpp"
#include "wagerset_internal.hpp"

namespace duel {

namespace {

using detail::finite_positive_elements;
using detail::gp_exponent;
using detail::is_countable;

// Writes a_i = (p_i/q_i) * u with u = elems[0]; nullopt when some pairwise
// ratio is irrational (or not expressible).
std::optional<std::vector<mpq_class>> rational_profile(const std::vector<Value>& elems) {
    std::vector<mpq_class> out;
    if (elems.empty()) return out;
    if (!elems[0].is_monomial()) return std::nullopt;
    for (const auto& e : elems) {
        Value ratio = e / elems[0];
        if (!ratio.is_rational()) return std::nullopt;
        out.push_back(ratio.as_rational());
    }
    return out;
}

// Smallest positive rational m with m * c integral for every c in cs;
// the valid multipliers form the group (lcm(q_i)/gcd(p_i)) * Z.
mpq_class minimal_integralizer(const std::vector<mpq_class>& cs) {
    mpz_class l = 1, g = 0;
    for (const auto& c : cs) {
        l = lcm(l, mpz_class(c.get_den()));
        g = gcd(g, mpz_class(c.get_num()));
    }
    if (g == 0) g = 1;
    mpq_class m(l, g);
    m.canonicalize();
    return m;
}

ScalesResult finite_into_finite(const std::vector<Value>& a, const std::vector<Value>& b) {
    // candidates are b/min(A), tried in ascending order
    const Value& amin = a.front();
    if (!amin.is_monomial()) return ScalesResult::unknown("non-simple elements");
    std::vector<Value> candidates;
    for (const auto& e : b) {
        if (!e.is_monomial()) return ScalesResult::unknown("non-simple elements");
        candidates.push_back(e / amin);
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Value& x, const Value& y) { return x < y; });
    for (const auto& r : candidates) {
        bool ok = true;
        for (const auto& x : a) {
            if (std::none_of(b.begin(), b.end(),
                             [&](const Value& e) { return e == r * x; })) {
                ok = false;
                break;
            }
        }
        if (ok) return ScalesResult::yes(r);
    }
    return ScalesResult::no();
}

ScalesResult finite_into_integer_multiples(const std::vector<Value>& a, const Value& step) {
    auto profile = rational_profile(a);
    if (!profile)
        return ScalesResult::no("pairwise-irrational elements cannot land on one grid");
    mpq_class m = minimal_integralizer(*profile);
    Value r = Value(m) * step / a.front();
    return ScalesResult::yes(r);
}

ScalesResult finite_into_sieve(const std::vector<Value>& a, const SieveRule& rule,
                               const ScalesConfig& cfg) {
    auto profile = rational_profile(a);
    if (!profile)
        return ScalesResult::no("pairwise-irrational elements cannot land on integers");
    mpq_class d = minimal_integralizer(*profile);
    for (unsigned long j = 1; j <= cfg.candidate_bound; ++j) {
        mpq_class m = d * static_cast<long>(j);
        bool ok = true;
        for (const auto& c : *profile) {
            mpq_class img = m * c;  // integral by construction
            mpz_class n = img.get_num();
            if (!n.fits_ulong_p() || rule.excludes(n.get_ui())) {
                ok = false;
                break;
            }
        }
        if (ok)
            return ScalesResult::yes(Value(m) / a.front(),
                                     "witness found within candidate bound");
    }
    return ScalesResult::no("no surviving image tuple for multipliers up to bound " +
                            std::to_string(cfg.candidate_bound));
}

ScalesResult finite_into_geometric(const std::vector<Value>& a, const WagerSet& b) {
    const Value& base = b.base();
    std::vector<long> exps;
    for (const auto& e : a) {
        if (!e.is_monomial()) return ScalesResult::unknown("non-simple elements");
        auto k = gp_exponent(base, e / a.front());
        if (!k) return ScalesResult::no("element ratios are not powers of the base");
        exps.push_back(*k);
    }
    long emin = *std::min_element(exps.begin(), exps.end());
    long emax = *std::max_element(exps.begin(), exps.end());
    long n0 = 0;
    switch (b.exponent_range()) {
        case ExponentRange::All: n0 = 0; break;
        case ExponentRange::NonNegative: n0 = std::max(0L, -emin); break;
        case ExponentRange::NonPositive: n0 = std::min(0L, -emax); break;
    }
    return ScalesResult::yes(base.pow(n0) / a.front());
}

ScalesResult finite_into_harmonic(const std::vector<Value>& a, const WagerSet& b,
                                  const ScalesConfig& cfg) {
    // candidate anchors: the accumulation point and the first few elements
    std::vector<Value> anchors;
    if (b.kind() == WagerSet::Kind::HarmonicShifted) anchors.push_back(Value(1));
    for (unsigned long n = 1; n <= cfg.candidate_bound; ++n) {
        anchors.push_back(b.kind() == WagerSet::Kind::HarmonicShifted
                              ? Value(1) + Value::rational(1, static_cast<long>(n))
                              : Value::rational(1, static_cast<long>(n)));
    }
    if (!a.front().is_monomial()) return ScalesResult::unknown("non-simple elements");
    for (const auto& t : anchors) {
        Value r = t / a.front();
        if (r.sign() <= 0) continue;
        bool ok = true;
        for (const auto& x : a) {
            if (!b.closure_contains(r * x)) {
                ok = false;
                break;
            }
        }
        if (ok) return ScalesResult::yes(r);
    }
    return ScalesResult::unknown("no witness within candidate bound " +
                                 std::to_string(cfg.candidate_bound));
}

// Does some ideal {c, 2c, 3c, ...} survive the sieve? Exact per rule kind.
std::optional<unsigned long> surviving_ideal(const SieveRule& rule, unsigned long bound) {
    switch (rule.kind) {
        case SieveRule::Kind::Evens:
            return std::nullopt;  // 2c is always excluded
        case SieveRule::Kind::Odds:
            return 2;  // even multiples of 2 are never odd
        case SieveRule::Kind::MultiplesOf:
            return std::nullopt;  // modulus*c is always excluded
        case SieveRule::Kind::NTimesPhi:
            // c*phi(c) is a multiple of c and excluded, for every c
            return std::nullopt;
        case SieveRule::Kind::Explicit: {
            for (unsigned long c = 1; c <= bound; ++c) {
                bool hit = false;
                for (unsigned long e : rule.excluded) {
                    if (e % c == 0) {
                        hit = true;
                        break;
                    }
                }
                if (!hit) return c;
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

// r*A ⊆ closure(B) with closure(B) an interval [lo, hi] or [lo, inf),
// decided from the bounds of A alone.
ScalesResult into_interval(const WagerSet& a, const Value& lo,
                           const std::optional<Value>& hi_opt) {
    Bounds ba = a.bounds();
    if (ba.contains_zero && lo.sign() > 0)
        return ScalesResult::no("0 in A but not in the target interval");
    // inf of A \ {0} (0 itself maps to 0 which lies in [0,...] when lo == 0)
    bool inf_zero = !ba.bounded_away_from_zero;
    if (inf_zero && lo.sign() > 0)
        return ScalesResult::no("A has arbitrarily small positive elements");
    Value rmin(0);
    if (lo.sign() > 0) rmin = lo / ba.inf_nonzero.v;
    if (!hi_opt) {
        Value r = rmin.sign() > 0 ? rmin : Value(1);
        return ScalesResult::yes(r);
    }
    if (ba.sup.infinite) return ScalesResult::no("A unbounded, target interval bounded");
    if (ba.sup.v.sign() <= 0) return ScalesResult::yes(Value(1));  // A ⊆ {0}
    Value rmax = *hi_opt / ba.sup.v;
    if (rmax.sign() <= 0) return ScalesResult::no("target interval has no positive room");
    if (rmin.sign() > 0 && rmin > rmax)
        return ScalesResult::no("interval too narrow for A's spread");
    Value r = rmin.sign() > 0 ? rmin : (rmax < Value(1) ? rmax : Value(1));
    return ScalesResult::yes(r);
}

// Unwraps closure(B) when it is interval-like.
struct IntervalShape {
    Value lo;
    std::optional<Value> hi;  // nullopt = unbounded
};
std::optional<IntervalShape> interval_shape(const WagerSet& b) {
    switch (b.kind()) {
        case WagerSet::Kind::ClosedInterval:
            return IntervalShape{b.lo(), b.hi()};
        case WagerSet::Kind::HalfLine:
            return IntervalShape{b.lo(), std::nullopt};
        default:
            return std::nullopt;
    }
}

ScalesResult scales_into_impl(const WagerSet& a, const WagerSet& b, const ScalesConfig& cfg) {
    using Kind = WagerSet::Kind;

    // scaling wrappers commute with the question
    if (a.kind() == Kind::Scaled) {
        ScalesResult r = scales_into(a.inner(), b, cfg);
        if (r.kind == ScalesResult::Kind::Yes) r.ratio = r.ratio / a.ratio();
        return r;
    }
    if (b.kind() == Kind::Scaled) {
        ScalesResult r = scales_into(a, b.inner(), cfg);
        if (r.kind == ScalesResult::Kind::Yes) r.ratio = b.ratio() * r.ratio;
        return r;
    }
    if (a.kind() == Kind::WithZero) {
        if (!b.closure_contains(Value(0)))
            return ScalesResult::no("0 in A but not in closure(B)");
        return scales_into(a.inner(), b, cfg);
    }
    if (b.kind() == Kind::WithZero) return scales_into(a, b.inner(), cfg);
    if (a.kind() == Kind::UnionOf) {
        if (a.components().size() == 1) return scales_into(a.components()[0], b, cfg);
        if (is_finite_set(a))
            return scales_into(WagerSet::finite(finite_positive_elements(a)), b, cfg);
    }
    if (b.kind() == Kind::UnionOf && b.components().size() == 1)
        return scales_into(a, b.components()[0], cfg);

    if (a.positive_part_empty()) {
        if (a.bounds().contains_zero && !b.closure_contains(Value(0)))
            return ScalesResult::no("0 in A but not in closure(B)");
        return ScalesResult::yes(Value(1), "A has no positive elements");
    }
    if (a.same_descriptor(b)) return ScalesResult::yes(Value(1));

    Bounds ba = a.bounds();
    Bounds bb = b.bounds();
    if (ba.contains_zero && !b.closure_contains(Value(0)))
        return ScalesResult::no("0 in A but not in closure(B)");
    if (bb.inf_nonzero.infinite) return ScalesResult::no("closure(B) has no positive elements");
    if (!is_finite_set(a) && is_finite_set(b))
        return ScalesResult::no("A is infinite, B is finite");
    if (ba.sup.infinite && !bb.sup.infinite)
        return ScalesResult::no("A is unbounded, closure(B) is bounded");
    if (!ba.bounded_away_from_zero && bb.bounded_away_from_zero)
        return ScalesResult::no("inf(A\\{0}) = 0 but B is bounded away from zero");
    if (has_positive_accumulation(a) && locally_finite_closure(b))
        return ScalesResult::no("A accumulates in (0,inf), closure(B) is locally finite there");
    if (!is_countable(a) && is_countable(b))
        return ScalesResult::no("A is uncountable, closure(B) is countable");

    if (auto shape = interval_shape(b)) return into_interval(a, shape->lo, shape->hi);

    if (is_finite_set(a)) {
        std::vector<Value> elems = finite_positive_elements(a);
        if (elems.size() == 1) {
            DenseEnumerator be(b);
            return ScalesResult::yes(be.at(0) / elems[0]);
        }
        switch (b.kind()) {
            case Kind::Finite:
                return finite_into_finite(elems, b.finite_elements());
            case Kind::IntegerMultiples:
                return finite_into_integer_multiples(elems, b.step());
            case Kind::IntegerSieve:
                return finite_into_sieve(elems, b.sieve_rule(), cfg);
            case Kind::GeometricPowers:
                return finite_into_geometric(elems, b);
            case Kind::HarmonicShifted:
            case Kind::HarmonicReciprocal:
                return finite_into_harmonic(elems, b, cfg);
            default:
                return ScalesResult::unknown("no rule for this target");
        }
    }

    if (a.kind() == Kind::IntegerMultiples) {
        if (b.kind() == Kind::IntegerMultiples)
            return ScalesResult::yes(b.step() / a.step());
        if (b.kind() == Kind::IntegerSieve) {
            auto c = surviving_ideal(b.sieve_rule(), cfg.sieve_bound);
            if (c)
                return ScalesResult::yes(Value(static_cast<long>(*c)) / a.step(),
                                         "ideal {" + std::to_string(*c) + "k} survives the sieve");
            return ScalesResult::no("every ideal meets the excluded set");
        }
        if (b.kind() == Kind::GeometricPowers)
            return ScalesResult::no("consecutive multiples cannot both be powers");
        return ScalesResult::unknown("no rule for this target");
    }

    if (a.kind() == Kind::IntegerSieve && b.kind() == Kind::IntegerMultiples) {
        // r = step maps the sieve's integers into the grid
        return ScalesResult::yes(b.step());
    }

    if (a.kind() == Kind::GeometricPowers && b.kind() == Kind::GeometricPowers) {
        auto e = gp_exponent(b.base(), a.base());
        if (!e) return ScalesResult::no("base of A is not a power of base of B");
        if (b.exponent_range() == ExponentRange::All) return ScalesResult::yes(Value(1));
        if (a.exponent_range() == b.exponent_range() && *e >= 1)
            return ScalesResult::yes(Value(1));
        return ScalesResult::unknown("exponent ranges not aligned by a catalogued rule");
    }

    return ScalesResult::unknown("no structural rule applies");
}

}  // namespace

ScalesResult scales_into(const WagerSet& a, const WagerSet& b, const ScalesConfig& cfg) {
    try {
        return scales_into_impl(a, b, cfg);
    } catch (const Unsupported& e) {
        return ScalesResult::unknown(e.what());
    }
}

}  // namespace duel
