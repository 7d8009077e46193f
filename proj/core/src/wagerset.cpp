#include "duel/wagerset.hpp"

#include <algorithm>
#include <sstream>

#include "wagerset_internal.hpp"

namespace duel {

using json = nlohmann::json;

namespace {

Value json_to_value(const json& j, const std::string& field) {
    if (j.is_string()) return Value::parse(j.get<std::string>());
    if (j.is_number_integer()) return Value(static_cast<long>(j.get<long long>()));
    if (j.is_object() && j.contains("const")) {
        if (j.contains("bits") && (!j["bits"].is_number_integer() || j["bits"].get<long>() <= 0))
            throw InputError("field '" + field + "': 'bits' must be a positive integer");
        return Value::constant(named_const_from_str(j["const"].get<std::string>()));
    }
    throw InputError("field '" + field + "': expected \"p/q\" string or {\"const\":...}");
}

json value_to_json(const Value& v) {
    if (v.is_rational()) return rational_str(v.as_rational());
    if (auto c = v.as_named_const())
        return json{{"const", named_const_str(*c)}, {"bits", precision_config().start_bits}};
    throw InputError("value has no JSON form: " + v.str());
}

bool is_unit_fraction(const Value& x) {
    if (!x.is_rational()) return false;
    mpq_class q = x.as_rational();
    return q > 0 && q <= 1 && mpz_cmp_ui(mpq_numref(q.get_mpq_t()), 1) == 0;
}

}  // namespace

namespace detail {

unsigned long smallest_n(const std::function<bool(unsigned long)>& past) {
    unsigned long hi = 1;
    while (!past(hi)) {
        if (hi > (1ul << 62)) throw InputError("harmonic index search overflow");
        hi *= 2;
    }
    unsigned long lo = hi / 2;  // past(hi), !past(lo) (or hi == 1)
    while (hi - lo > 1 && lo > 0) {
        unsigned long mid = lo + (hi - lo) / 2;
        (past(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SieveRule

bool SieveRule::excludes(unsigned long n) const {
    if (n == 0) return true;
    switch (kind) {
        case Kind::Explicit:
            return std::binary_search(excluded.begin(), excluded.end(), n);
        case Kind::Evens:
            return n % 2 == 0;
        case Kind::Odds:
            return n % 2 == 1;
        case Kind::MultiplesOf:
            return n % modulus == 0;
        case Kind::NTimesPhi: {
            // phi=identity excludes {k^2}, phi=square excludes {k^3}
            mpz_class z(static_cast<unsigned long>(n));
            if (phi == Phi::Identity) return mpz_perfect_square_p(z.get_mpz_t()) != 0;
            mpz_class root;
            return mpz_root(root.get_mpz_t(), z.get_mpz_t(), 3) != 0;
        }
    }
    return false;
}

json SieveRule::to_json() const {
    switch (kind) {
        case Kind::Explicit: {
            json arr = json::array();
            for (auto n : excluded) arr.push_back(n);
            return json{{"excluded", arr}};
        }
        case Kind::Evens:
            return json{{"rule", "evens"}};
        case Kind::Odds:
            return json{{"rule", "odds"}};
        case Kind::MultiplesOf:
            return json{{"rule", "multiples_of"}, {"modulus", modulus}};
        case Kind::NTimesPhi:
            return json{{"rule", "n_times_phi"},
                        {"phi", phi == Phi::Identity ? "identity" : "square"}};
    }
    return {};
}

SieveRule SieveRule::from_json(const json& j) {
    SieveRule r;
    if (j.contains("excluded")) {
        r.kind = Kind::Explicit;
        for (const auto& e : j["excluded"]) {
            if (!e.is_number_integer() || e.get<long long>() < 1)
                throw InputError("field 'excluded': entries must be positive integers");
            r.excluded.push_back(e.get<unsigned long>());
        }
        std::sort(r.excluded.begin(), r.excluded.end());
        r.excluded.erase(std::unique(r.excluded.begin(), r.excluded.end()), r.excluded.end());
        return r;
    }
    if (!j.contains("rule")) throw InputError("integer_sieve needs 'excluded' or 'rule'");
    std::string rule = j["rule"].get<std::string>();
    if (rule == "evens") r.kind = Kind::Evens;
    else if (rule == "odds") r.kind = Kind::Odds;
    else if (rule == "multiples_of") {
        r.kind = Kind::MultiplesOf;
        if (!j.contains("modulus") || !j["modulus"].is_number_integer() ||
            j["modulus"].get<long>() < 2)
            throw InputError("field 'modulus': integer >= 2 required");
        r.modulus = j["modulus"].get<unsigned long>();
    } else if (rule == "n_times_phi") {
        r.kind = Kind::NTimesPhi;
        std::string phi = j.value("phi", "identity");
        if (phi == "identity") r.phi = Phi::Identity;
        else if (phi == "square") r.phi = Phi::Square;
        else throw InputError("field 'phi': expected 'identity' or 'square'");
    } else {
        throw InputError("field 'rule': unknown sieve rule '" + rule + "'");
    }
    return r;
}

std::string SieveRule::describe() const {
    switch (kind) {
        case Kind::Explicit: {
            std::ostringstream out;
            out << "explicit{";
            for (size_t i = 0; i < excluded.size(); ++i) out << (i ? "," : "") << excluded[i];
            out << "}";
            return out.str();
        }
        case Kind::Evens: return "evens";
        case Kind::Odds: return "odds";
        case Kind::MultiplesOf: return "multiples_of(" + std::to_string(modulus) + ")";
        case Kind::NTimesPhi:
            return phi == Phi::Identity ? "n*phi(n), phi=n" : "n*phi(n), phi=n^2";
    }
    return "?";
}

bool SieveRule::operator==(const SieveRule& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case Kind::Explicit: return excluded == o.excluded;
        case Kind::MultiplesOf: return modulus == o.modulus;
        case Kind::NTimesPhi: return phi == o.phi;
        default: return true;
    }
}

// ---------------------------------------------------------------------------
// WagerSet node and factories

struct WagerSet::Node {
    Kind kind;
    std::vector<Value> elements;  // Finite
    Value a;                      // step / lo / base / ratio
    Value b;                      // hi
    ExponentRange range = ExponentRange::All;
    SieveRule rule;
    std::vector<WagerSet> children;  // inner (WithZero/Scaled) or components
};

WagerSet WagerSet::finite(std::vector<Value> elements) {
    std::sort(elements.begin(), elements.end(),
              [](const Value& x, const Value& y) { return x < y; });
    for (size_t i = 0; i + 1 < elements.size(); ++i)
        if (elements[i] == elements[i + 1])
            throw InputError("finite set has duplicate element " + elements[i].str());
    for (const auto& e : elements)
        if (e.sign() <= 0)
            throw InputError("finite set elements must be positive (use with_zero for 0)");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Finite;
    n->elements = std::move(elements);
    return WagerSet(std::move(n));
}

WagerSet WagerSet::integer_multiples(Value step) {
    if (step.sign() <= 0) throw InputError("integer_multiples step must be positive");
    if (!step.is_monomial()) throw InputError("integer_multiples step must be a simple value");
    auto n = std::make_shared<Node>();
    n->kind = Kind::IntegerMultiples;
    n->a = std::move(step);
    return WagerSet(std::move(n));
}

WagerSet WagerSet::closed_interval(Value lo, Value hi) {
    if (lo.sign() < 0) throw InputError("closed_interval lo must be nonnegative");
    if (lo > hi) throw InputError("closed_interval requires lo <= hi");
    auto n = std::make_shared<Node>();
    n->kind = Kind::ClosedInterval;
    n->a = std::move(lo);
    n->b = std::move(hi);
    return WagerSet(std::move(n));
}

WagerSet WagerSet::half_line(Value lo) {
    if (lo.sign() < 0) throw InputError("half_line lo must be nonnegative");
    auto n = std::make_shared<Node>();
    n->kind = Kind::HalfLine;
    n->a = std::move(lo);
    return WagerSet(std::move(n));
}

WagerSet WagerSet::geometric_powers(Value base, ExponentRange range) {
    if (base.sign() <= 0) throw InputError("geometric_powers base must be positive");
    if (base == Value(1)) throw InputError("geometric_powers base must differ from 1");
    if (!base.is_monomial()) throw InputError("geometric_powers base must be a simple value");
    auto n = std::make_shared<Node>();
    n->kind = Kind::GeometricPowers;
    n->a = std::move(base);
    n->range = range;
    return WagerSet(std::move(n));
}

WagerSet WagerSet::harmonic_shifted() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::HarmonicShifted;
    return WagerSet(std::move(n));
}

WagerSet WagerSet::harmonic_reciprocal() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::HarmonicReciprocal;
    return WagerSet(std::move(n));
}

WagerSet WagerSet::integer_sieve(SieveRule rule) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::IntegerSieve;
    n->rule = std::move(rule);
    return WagerSet(std::move(n));
}

WagerSet WagerSet::with_zero(WagerSet inner) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::WithZero;
    n->children.push_back(std::move(inner));
    return WagerSet(std::move(n));
}

WagerSet WagerSet::union_of(std::vector<WagerSet> components) {
    if (components.empty()) throw InputError("union_of needs at least one component");
    auto n = std::make_shared<Node>();
    n->kind = Kind::UnionOf;
    n->children = std::move(components);
    return WagerSet(std::move(n));
}

WagerSet WagerSet::scaled(Value ratio, WagerSet inner) {
    if (ratio.sign() <= 0) throw InputError("scaled ratio must be positive");
    if (!ratio.is_monomial()) throw InputError("scaled ratio must be a simple value");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Scaled;
    n->a = std::move(ratio);
    n->children.push_back(std::move(inner));
    return WagerSet(std::move(n));
}

WagerSet::Kind WagerSet::kind() const { return node_->kind; }

const std::vector<Value>& WagerSet::finite_elements() const {
    if (kind() != Kind::Finite) throw InputError("not a finite set");
    return node_->elements;
}
const Value& WagerSet::step() const {
    if (kind() != Kind::IntegerMultiples) throw InputError("not integer_multiples");
    return node_->a;
}
const Value& WagerSet::lo() const {
    if (kind() != Kind::ClosedInterval && kind() != Kind::HalfLine)
        throw InputError("set has no lower endpoint");
    return node_->a;
}
const Value& WagerSet::hi() const {
    if (kind() != Kind::ClosedInterval) throw InputError("set has no upper endpoint");
    return node_->b;
}
const Value& WagerSet::base() const {
    if (kind() != Kind::GeometricPowers) throw InputError("not geometric_powers");
    return node_->a;
}
ExponentRange WagerSet::exponent_range() const {
    if (kind() != Kind::GeometricPowers) throw InputError("not geometric_powers");
    return node_->range;
}
const SieveRule& WagerSet::sieve_rule() const {
    if (kind() != Kind::IntegerSieve) throw InputError("not integer_sieve");
    return node_->rule;
}
const Value& WagerSet::ratio() const {
    if (kind() != Kind::Scaled) throw InputError("not scaled");
    return node_->a;
}
const WagerSet& WagerSet::inner() const {
    if (kind() != Kind::WithZero && kind() != Kind::Scaled)
        throw InputError("set has no inner descriptor");
    return node_->children[0];
}
const std::vector<WagerSet>& WagerSet::components() const {
    if (kind() != Kind::UnionOf) throw InputError("not union_of");
    return node_->children;
}

// ---------------------------------------------------------------------------
// Membership

namespace detail {

std::optional<long> gp_exponent(const Value& base, const Value& x) {
    if (x.sign() <= 0 || !x.is_monomial()) return std::nullopt;
    if (x == Value(1)) return 0;
    bool base_gt1 = base > Value(1);
    Value c = base_gt1 ? base : Value(1) / base;  // c > 1
    bool x_gt1 = x > Value(1);
    Value y = x_gt1 ? x : Value(1) / x;  // y > 1; find k >= 1 with c^k == y
    long hi = 1;
    while (c.pow(hi) < y) {
        if (hi > (1L << 40)) return std::nullopt;
        hi *= 2;
    }
    long lo = hi / 2;  // c^lo < y <= c^hi (or hi == 1)
    while (hi - lo > 1) {
        long mid = lo + (hi - lo) / 2;
        (c.pow(mid) < y ? lo : hi) = mid;
    }
    if (c.pow(hi) != y) return std::nullopt;
    long k = hi;
    // x = c^(±k); translate back to an exponent of base
    if (x_gt1) return base_gt1 ? k : -k;
    return base_gt1 ? -k : k;
}

bool range_admits(ExponentRange r, long e) {
    switch (r) {
        case ExponentRange::All: return true;
        case ExponentRange::NonNegative: return e >= 0;
        case ExponentRange::NonPositive: return e <= 0;
    }
    return false;
}

std::optional<unsigned long> as_positive_ulong(const Value& x) {
    if (!x.is_integer() || x.sign() <= 0) return std::nullopt;
    mpz_class n = x.as_rational().get_num();
    if (!n.fits_ulong_p()) return std::nullopt;
    return n.get_ui();
}

}  // namespace detail

using detail::as_positive_ulong;
using detail::gp_exponent;
using detail::range_admits;

bool WagerSet::contains(const Value& x) const {
    switch (kind()) {
        case Kind::Finite:
            return std::any_of(node_->elements.begin(), node_->elements.end(),
                               [&](const Value& e) { return e == x; });
        case Kind::IntegerMultiples: {
            if (x.sign() <= 0) return false;
            Value q = x / node_->a;
            return q.is_integer() && q.sign() > 0;
        }
        case Kind::ClosedInterval:
            return x >= node_->a && x <= node_->b;
        case Kind::HalfLine:
            return x >= node_->a;
        case Kind::GeometricPowers: {
            auto e = gp_exponent(node_->a, x);
            return e && range_admits(node_->range, *e);
        }
        case Kind::HarmonicShifted:
            return is_unit_fraction(x - Value(1));
        case Kind::HarmonicReciprocal:
            return is_unit_fraction(x);
        case Kind::IntegerSieve: {
            auto n = as_positive_ulong(x);
            return n && !node_->rule.excludes(*n);
        }
        case Kind::WithZero:
            return x.is_zero() || node_->children[0].contains(x);
        case Kind::UnionOf:
            return std::any_of(node_->children.begin(), node_->children.end(),
                               [&](const WagerSet& s) { return s.contains(x); });
        case Kind::Scaled:
            return node_->children[0].contains(x / node_->a);
    }
    return false;
}

bool WagerSet::closure_contains(const Value& x) const {
    switch (kind()) {
        case Kind::HarmonicShifted:
            return x == Value(1) || contains(x);
        case Kind::HarmonicReciprocal:
            return x.is_zero() || contains(x);
        case Kind::GeometricPowers: {
            // the side of shrinking powers accumulates at 0
            bool gt1 = node_->a > Value(1);
            bool acc_zero = (gt1 && node_->range != ExponentRange::NonNegative) ||
                            (!gt1 && node_->range != ExponentRange::NonPositive);
            return (acc_zero && x.is_zero()) || contains(x);
        }
        case Kind::WithZero:
            return x.is_zero() || node_->children[0].closure_contains(x);
        case Kind::UnionOf:
            return std::any_of(node_->children.begin(), node_->children.end(),
                               [&](const WagerSet& s) { return s.closure_contains(x); });
        case Kind::Scaled:
            return node_->children[0].closure_contains(x / node_->a);
        default:
            // the remaining descriptors are closed
            return contains(x);
    }
}

// ---------------------------------------------------------------------------
// Bounds

Bounds WagerSet::bounds() const {
    switch (kind()) {
        case Kind::Finite: {
            Bounds b;
            if (node_->elements.empty()) {
                b.sup = ExtValue::of(Value(0));
                b.inf_nonzero = ExtValue::inf();
                return b;
            }
            b.sup = ExtValue::of(node_->elements.back());
            b.inf_nonzero = ExtValue::of(node_->elements.front());
            return b;
        }
        case Kind::IntegerMultiples: {
            Bounds b;
            b.sup = ExtValue::inf();
            b.inf_nonzero = ExtValue::of(node_->a);
            return b;
        }
        case Kind::ClosedInterval: {
            Bounds b;
            b.sup = ExtValue::of(node_->b);
            b.contains_zero = node_->a.is_zero();
            if (node_->a.sign() > 0) {
                b.inf_nonzero = ExtValue::of(node_->a);
            } else if (node_->b.sign() > 0) {
                b.inf_nonzero = ExtValue::of(Value(0));  // limit, not attained
                b.bounded_away_from_zero = false;
            } else {
                b.inf_nonzero = ExtValue::inf();  // the set {0}
            }
            return b;
        }
        case Kind::HalfLine: {
            Bounds b;
            b.sup = ExtValue::inf();
            b.contains_zero = node_->a.is_zero();
            if (node_->a.sign() > 0) {
                b.inf_nonzero = ExtValue::of(node_->a);
            } else {
                b.inf_nonzero = ExtValue::of(Value(0));
                b.bounded_away_from_zero = false;
            }
            return b;
        }
        case Kind::GeometricPowers: {
            bool gt1 = node_->a > Value(1);
            bool grows = (gt1 && node_->range != ExponentRange::NonPositive) ||
                         (!gt1 && node_->range != ExponentRange::NonNegative);
            bool shrinks = (gt1 && node_->range != ExponentRange::NonNegative) ||
                           (!gt1 && node_->range != ExponentRange::NonPositive);
            Bounds b;
            b.sup = grows ? ExtValue::inf() : ExtValue::of(Value(1));
            if (shrinks) {
                b.inf_nonzero = ExtValue::of(Value(0));
                b.bounded_away_from_zero = false;
            } else {
                b.inf_nonzero = ExtValue::of(Value(1));
            }
            return b;
        }
        case Kind::HarmonicShifted: {
            Bounds b;
            b.sup = ExtValue::of(Value(2));
            b.inf_nonzero = ExtValue::of(Value(1));  // limit, not attained
            return b;
        }
        case Kind::HarmonicReciprocal: {
            Bounds b;
            b.sup = ExtValue::of(Value(1));
            b.inf_nonzero = ExtValue::of(Value(0));
            b.bounded_away_from_zero = false;
            return b;
        }
        case Kind::IntegerSieve: {
            Bounds b;
            b.sup = ExtValue::inf();
            unsigned long m = 1;
            while (node_->rule.excludes(m)) ++m;
            b.inf_nonzero = ExtValue::of(Value(static_cast<long>(m)));
            return b;
        }
        case Kind::WithZero: {
            Bounds b = node_->children[0].bounds();
            if (!b.sup.infinite && b.sup.v.sign() < 0) b.sup = ExtValue::of(Value(0));
            b.contains_zero = true;
            return b;
        }
        case Kind::UnionOf: {
            Bounds b;
            b.inf_nonzero = ExtValue::inf();
            b.sup = ExtValue::of(Value(0));
            for (const auto& c : node_->children) {
                Bounds cb = c.bounds();
                if (cb.sup.infinite) b.sup = ExtValue::inf();
                else if (!b.sup.infinite && cb.sup.v > b.sup.v) b.sup = cb.sup;
                if (!cb.inf_nonzero.infinite &&
                    (b.inf_nonzero.infinite || cb.inf_nonzero.v < b.inf_nonzero.v))
                    b.inf_nonzero = cb.inf_nonzero;
                b.bounded_away_from_zero = b.bounded_away_from_zero && cb.bounded_away_from_zero;
                b.contains_zero = b.contains_zero || cb.contains_zero;
            }
            return b;
        }
        case Kind::Scaled: {
            Bounds b = node_->children[0].bounds();
            if (!b.sup.infinite) b.sup.v = b.sup.v * node_->a;
            if (!b.inf_nonzero.infinite) b.inf_nonzero.v = b.inf_nonzero.v * node_->a;
            return b;
        }
    }
    return {};
}

bool WagerSet::positive_part_empty() const {
    Bounds b = bounds();
    return b.inf_nonzero.infinite;
}

bool WagerSet::is_well_ordered() const {
    switch (kind()) {
        case Kind::Finite:
        case Kind::IntegerMultiples:
        case Kind::IntegerSieve:
            return true;
        case Kind::ClosedInterval:
            return node_->a == node_->b;
        case Kind::HalfLine:
            return false;
        case Kind::GeometricPowers: {
            bool gt1 = node_->a > Value(1);
            return (gt1 && node_->range == ExponentRange::NonNegative) ||
                   (!gt1 && node_->range == ExponentRange::NonPositive);
        }
        case Kind::HarmonicShifted:
        case Kind::HarmonicReciprocal:
            return false;
        case Kind::WithZero:
        case Kind::Scaled:
            return node_->children[0].is_well_ordered();
        case Kind::UnionOf:
            // a finite union of well-ordered sets of reals is well ordered:
            // any nonempty subset attains its minimum component-wise
            return std::all_of(node_->children.begin(), node_->children.end(),
                               [](const WagerSet& s) { return s.is_well_ordered(); });
    }
    return false;
}

bool WagerSet::same_descriptor(const WagerSet& o) const {
    if (kind() != o.kind()) return false;
    switch (kind()) {
        case Kind::Finite: {
            const auto& a = node_->elements;
            const auto& b = o.node_->elements;
            if (a.size() != b.size()) return false;
            for (size_t i = 0; i < a.size(); ++i)
                if (a[i] != b[i]) return false;
            return true;
        }
        case Kind::IntegerMultiples:
            return node_->a == o.node_->a;
        case Kind::ClosedInterval:
            return node_->a == o.node_->a && node_->b == o.node_->b;
        case Kind::HalfLine:
            return node_->a == o.node_->a;
        case Kind::GeometricPowers:
            return node_->a == o.node_->a && node_->range == o.node_->range;
        case Kind::HarmonicShifted:
        case Kind::HarmonicReciprocal:
            return true;
        case Kind::IntegerSieve:
            return node_->rule == o.node_->rule;
        case Kind::WithZero:
        case Kind::Scaled: {
            if (kind() == Kind::Scaled && node_->a != o.node_->a) return false;
            return node_->children[0].same_descriptor(o.node_->children[0]);
        }
        case Kind::UnionOf: {
            if (node_->children.size() != o.node_->children.size()) return false;
            for (size_t i = 0; i < node_->children.size(); ++i)
                if (!node_->children[i].same_descriptor(o.node_->children[i])) return false;
            return true;
        }
    }
    return false;
}

std::vector<std::string> WagerSet::structural_warnings(unsigned long bound) const {
    std::vector<std::string> out;
    switch (kind()) {
        case Kind::IntegerSieve: {
            const SieveRule& r = node_->rule;
            for (unsigned long c = 1; c <= 16; ++c) {
                bool covered = true;
                for (unsigned long k = 1; k * c <= bound; ++k) {
                    if (!r.excludes(k * c)) {
                        covered = false;
                        break;
                    }
                }
                if (covered) {
                    out.push_back("sieve excluded set covers the ideal {" + std::to_string(c) +
                                  ", " + std::to_string(2 * c) + ", ...} up to " +
                                  std::to_string(bound));
                    break;
                }
            }
            break;
        }
        case Kind::WithZero:
        case Kind::Scaled:
        case Kind::UnionOf:
            for (const auto& c : node_->children) {
                auto w = c.structural_warnings(bound);
                out.insert(out.end(), w.begin(), w.end());
            }
            break;
        default:
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

json WagerSet::to_json() const {
    switch (kind()) {
        case Kind::Finite: {
            json arr = json::array();
            for (const auto& e : node_->elements) arr.push_back(value_to_json(e));
            return json{{"kind", "finite"}, {"elements", arr}};
        }
        case Kind::IntegerMultiples:
            return json{{"kind", "integer_multiples"}, {"step", value_to_json(node_->a)}};
        case Kind::ClosedInterval:
            return json{{"kind", "closed_interval"},
                        {"lo", value_to_json(node_->a)},
                        {"hi", value_to_json(node_->b)}};
        case Kind::HalfLine:
            return json{{"kind", "half_line"}, {"lo", value_to_json(node_->a)}};
        case Kind::GeometricPowers: {
            const char* r = node_->range == ExponentRange::All ? "all"
                            : node_->range == ExponentRange::NonNegative ? "nonneg"
                                                                         : "nonpos";
            return json{{"kind", "geometric_powers"},
                        {"base", value_to_json(node_->a)},
                        {"exponents", r}};
        }
        case Kind::HarmonicShifted:
            return json{{"kind", "harmonic_shifted"}};
        case Kind::HarmonicReciprocal:
            return json{{"kind", "harmonic_reciprocal"}};
        case Kind::IntegerSieve: {
            json j = node_->rule.to_json();
            j["kind"] = "integer_sieve";
            return j;
        }
        case Kind::WithZero:
            return json{{"kind", "with_zero"}, {"inner", node_->children[0].to_json()}};
        case Kind::UnionOf: {
            json arr = json::array();
            for (const auto& c : node_->children) arr.push_back(c.to_json());
            return json{{"kind", "union"}, {"components", arr}};
        }
        case Kind::Scaled:
            return json{{"kind", "scaled"},
                        {"ratio", value_to_json(node_->a)},
                        {"inner", node_->children[0].to_json()}};
    }
    return {};
}

WagerSet WagerSet::from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw InputError("wager set JSON needs a 'kind' field");
    std::string k = j["kind"].get<std::string>();
    auto need = [&](const char* field) -> const json& {
        if (!j.contains(field))
            throw InputError("wager set '" + k + "' missing field '" + field + "'");
        return j[field];
    };
    if (k == "finite") {
        std::vector<Value> elems;
        for (const auto& e : need("elements")) elems.push_back(json_to_value(e, "elements"));
        return finite(std::move(elems));
    }
    if (k == "integer_multiples") return integer_multiples(json_to_value(need("step"), "step"));
    if (k == "closed_interval")
        return closed_interval(json_to_value(need("lo"), "lo"), json_to_value(need("hi"), "hi"));
    if (k == "half_line") return half_line(json_to_value(need("lo"), "lo"));
    if (k == "geometric_powers") {
        std::string r = need("exponents").get<std::string>();
        ExponentRange range;
        if (r == "all") range = ExponentRange::All;
        else if (r == "nonneg") range = ExponentRange::NonNegative;
        else if (r == "nonpos") range = ExponentRange::NonPositive;
        else throw InputError("field 'exponents': expected all|nonneg|nonpos");
        return geometric_powers(json_to_value(need("base"), "base"), range);
    }
    if (k == "harmonic_shifted") return harmonic_shifted();
    if (k == "harmonic_reciprocal") return harmonic_reciprocal();
    if (k == "integer_sieve") return integer_sieve(SieveRule::from_json(j));
    if (k == "with_zero") return with_zero(from_json(need("inner")));
    if (k == "union") {
        std::vector<WagerSet> comps;
        for (const auto& c : need("components")) comps.push_back(from_json(c));
        return union_of(std::move(comps));
    }
    if (k == "scaled")
        return scaled(json_to_value(need("ratio"), "ratio"), from_json(need("inner")));
    throw InputError("unknown wager set kind '" + k + "'");
}

std::string WagerSet::describe() const {
    switch (kind()) {
        case Kind::Finite: {
            std::ostringstream out;
            out << "{";
            for (size_t i = 0; i < node_->elements.size(); ++i)
                out << (i ? ", " : "") << node_->elements[i].str();
            out << "}";
            return out.str();
        }
        case Kind::IntegerMultiples: return "multiples(" + node_->a.str() + ")";
        case Kind::ClosedInterval: return "[" + node_->a.str() + ", " + node_->b.str() + "]";
        case Kind::HalfLine: return "[" + node_->a.str() + ", inf)";
        case Kind::GeometricPowers: {
            const char* r = node_->range == ExponentRange::All ? "Z"
                            : node_->range == ExponentRange::NonNegative ? "Z>=0"
                                                                         : "Z<=0";
            return "powers(" + node_->a.str() + ", " + r + ")";
        }
        case Kind::HarmonicShifted: return "{1+1/n}";
        case Kind::HarmonicReciprocal: return "{1/n}";
        case Kind::IntegerSieve: return "Z+ minus " + node_->rule.describe();
        case Kind::WithZero: return "{0} u " + node_->children[0].describe();
        case Kind::UnionOf: {
            std::string out;
            for (size_t i = 0; i < node_->children.size(); ++i)
                out += (i ? " u " : "") + node_->children[i].describe();
            return out;
        }
        case Kind::Scaled:
            return node_->a.str() + "*" + node_->children[0].describe();
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Classification helpers

bool has_positive_accumulation(const WagerSet& s) {
    switch (s.kind()) {
        case WagerSet::Kind::ClosedInterval:
            return s.lo() < s.hi() && s.hi().sign() > 0;
        case WagerSet::Kind::HalfLine:
        case WagerSet::Kind::HarmonicShifted:
            return true;
        case WagerSet::Kind::WithZero:
        case WagerSet::Kind::Scaled:
            return has_positive_accumulation(s.inner());
        case WagerSet::Kind::UnionOf:
            return std::any_of(s.components().begin(), s.components().end(),
                               has_positive_accumulation);
        default:
            return false;
    }
}

bool locally_finite_closure(const WagerSet& s) {
    switch (s.kind()) {
        case WagerSet::Kind::Finite:
        case WagerSet::Kind::IntegerMultiples:
        case WagerSet::Kind::IntegerSieve:
        case WagerSet::Kind::GeometricPowers:
        case WagerSet::Kind::HarmonicReciprocal:
            return true;
        case WagerSet::Kind::ClosedInterval:
            return s.lo() == s.hi();
        case WagerSet::Kind::HalfLine:
        case WagerSet::Kind::HarmonicShifted:
            return false;
        case WagerSet::Kind::WithZero:
        case WagerSet::Kind::Scaled:
            return locally_finite_closure(s.inner());
        case WagerSet::Kind::UnionOf:
            return std::all_of(s.components().begin(), s.components().end(),
                               locally_finite_closure);
    }
    return false;
}

bool is_finite_set(const WagerSet& s) {
    switch (s.kind()) {
        case WagerSet::Kind::Finite:
            return true;
        case WagerSet::Kind::ClosedInterval:
            return s.lo() == s.hi();
        case WagerSet::Kind::WithZero:
        case WagerSet::Kind::Scaled:
            return is_finite_set(s.inner());
        case WagerSet::Kind::UnionOf:
            return std::all_of(s.components().begin(), s.components().end(), is_finite_set);
        default:
            return false;
    }
}

namespace detail {

bool is_countable(const WagerSet& s) {
    switch (s.kind()) {
        case WagerSet::Kind::ClosedInterval:
            return s.lo() == s.hi();
        case WagerSet::Kind::HalfLine:
            return false;
        case WagerSet::Kind::WithZero:
        case WagerSet::Kind::Scaled:
            return is_countable(s.inner());
        case WagerSet::Kind::UnionOf:
            return std::all_of(s.components().begin(), s.components().end(), is_countable);
        default:
            return true;
    }
}

// Positive elements of a finite-cardinality descriptor, sorted.
std::vector<Value> finite_positive_elements(const WagerSet& s) {
    switch (s.kind()) {
        case WagerSet::Kind::Finite:
            return s.finite_elements();
        case WagerSet::Kind::ClosedInterval:
            if (s.lo().sign() > 0) return {s.lo()};
            return {};
        case WagerSet::Kind::WithZero:
            return finite_positive_elements(s.inner());
        case WagerSet::Kind::Scaled: {
            auto inner = finite_positive_elements(s.inner());
            for (auto& e : inner) e = e * s.ratio();
            return inner;
        }
        case WagerSet::Kind::UnionOf: {
            std::vector<Value> out;
            for (const auto& c : s.components()) {
                auto e = finite_positive_elements(c);
                out.insert(out.end(), e.begin(), e.end());
            }
            std::sort(out.begin(), out.end(), [](const Value& x, const Value& y) { return x < y; });
            out.erase(std::unique(out.begin(), out.end(),
                                  [](const Value& x, const Value& y) { return x == y; }),
                      out.end());
            return out;
        }
        default:
            throw InputError("not a finite-cardinality descriptor");
    }
}

}  // namespace detail

}  // namespace duel
