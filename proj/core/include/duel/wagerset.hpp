#pragma once

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "duel/value.hpp"

namespace duel {

enum class ExponentRange { All, NonNegative, NonPositive };

/// A nonnegative extended real: a Value or +infinity.
struct ExtValue {
    bool infinite = false;
    Value v;
    static ExtValue of(Value x) { return {false, std::move(x)}; }
    static ExtValue inf() { return {true, {}}; }
};

struct Bounds {
    ExtValue sup;          // sup S (0 for the empty set)
    ExtValue inf_nonzero;  // inf of S \ {0}; infinite when S \ {0} is empty
    bool bounded_away_from_zero = true;
    bool contains_zero = false;
};

/// Generator of the excluded integers of an IntegerSieve.
struct SieveRule {
    enum class Kind { Explicit, Evens, Odds, MultiplesOf, NTimesPhi };
    enum class Phi { Identity, Square };

    Kind kind = Kind::Explicit;
    std::vector<unsigned long> excluded;  // sorted, duplicate-free (Explicit)
    unsigned long modulus = 2;            // MultiplesOf
    Phi phi = Phi::Identity;              // NTimesPhi: excludes {n*phi(n)}

    bool excludes(unsigned long n) const;
    nlohmann::json to_json() const;
    static SieveRule from_json(const nlohmann::json& j);
    std::string describe() const;
    bool operator==(const SieveRule&) const;
};

/// Symbolic descriptor of a subset of the nonnegative reals. Immutable value
/// type; copies share structure.
class WagerSet {
public:
    enum class Kind {
        Finite,
        IntegerMultiples,
        ClosedInterval,
        HalfLine,
        GeometricPowers,
        HarmonicShifted,    // {1 + 1/n : n >= 1}
        HarmonicReciprocal, // {1/n : n >= 1}
        IntegerSieve,       // Z+ minus an excluded set
        WithZero,
        UnionOf,
        Scaled,
    };

    static WagerSet finite(std::vector<Value> elements);
    static WagerSet integer_multiples(Value step);
    static WagerSet closed_interval(Value lo, Value hi);
    static WagerSet half_line(Value lo);
    static WagerSet geometric_powers(Value base, ExponentRange range);
    static WagerSet harmonic_shifted();
    static WagerSet harmonic_reciprocal();
    static WagerSet integer_sieve(SieveRule rule);
    static WagerSet with_zero(WagerSet inner);
    static WagerSet union_of(std::vector<WagerSet> components);
    static WagerSet scaled(Value ratio, WagerSet inner);

    Kind kind() const;

    const std::vector<Value>& finite_elements() const;
    const Value& step() const;
    const Value& lo() const;
    const Value& hi() const;
    const Value& base() const;
    ExponentRange exponent_range() const;
    const SieveRule& sieve_rule() const;
    const Value& ratio() const;
    const WagerSet& inner() const;
    const std::vector<WagerSet>& components() const;

    bool contains(const Value& x) const;
    bool closure_contains(const Value& x) const;
    Bounds bounds() const;
    bool is_well_ordered() const;

    /// True when S \ {0} is empty.
    bool positive_part_empty() const;

    bool same_descriptor(const WagerSet& o) const;

    /// Structural sanity warnings (e.g. a sieve whose excluded set covers a
    /// full ideal), checked up to `bound` multiples.
    std::vector<std::string> structural_warnings(unsigned long bound = 1000) const;

    nlohmann::json to_json() const;
    static WagerSet from_json(const nlohmann::json& j);
    std::string describe() const;

private:
    struct Node;
    explicit WagerSet(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct ScalesResult {
    enum class Kind { Yes, No, Unknown };
    Kind kind = Kind::Unknown;
    Value ratio;       // witness, valid when kind == Yes
    std::string note;  // e.g. bounded-search caveats

    static ScalesResult yes(Value r, std::string note = {}) {
        return {Kind::Yes, std::move(r), std::move(note)};
    }
    static ScalesResult no(std::string note = {}) { return {Kind::No, {}, std::move(note)}; }
    static ScalesResult unknown(std::string note = {}) {
        return {Kind::Unknown, {}, std::move(note)};
    }
};

struct ScalesConfig {
    unsigned long sieve_bound = 1000000;  // ideal-survival search bound
    unsigned long candidate_bound = 256;  // misc bounded searches
};

/// Decides whether r*A is contained in the closure of B for some r > 0.
/// Complete for finite/finite pairs; structural rules for the catalogued
/// infinite families; Unknown when no rule applies.
ScalesResult scales_into(const WagerSet& a, const WagerSet& b,
                         const ScalesConfig& cfg = {});

/// Deterministic stream dense in S \ {0}. Lazily materialized and memoized;
/// `at` grows the cache as needed.
class DenseEnumerator {
public:
    struct WindowHit {
        size_t index;
        Value value;
    };

    explicit DenseEnumerator(const WagerSet& s);  // throws EmptySet
    const Value& at(size_t i);
    const WagerSet& set() const { return set_; }

    /// First enumerated element in the open interval (lo, hi). Structural for
    /// the families where this is cheap; otherwise a bounded scan up to
    /// `scan_cap` elements.
    std::optional<WindowHit> first_in_window(const Value& lo, const Value& hi,
                                             size_t scan_cap = (1u << 20));

private:
    struct Gen;
    void grow();
    WagerSet set_;
    std::vector<Value> cache_;
    std::shared_ptr<Gen> gen_;
};

/// sup of S ∩ [0, cap]; nullopt when the intersection is empty.
std::optional<Value> sup_at_most(const WagerSet& s, const Value& cap);

/// S ∩ (0, cap] as a sorted list when finite and enumerable, else nullopt.
std::optional<std::vector<Value>> elements_at_most(const WagerSet& s, const Value& cap);

/// closure(S) ∩ (0, cap] as a sorted list when finite and enumerable.
std::optional<std::vector<Value>> closure_elements_at_most(const WagerSet& s, const Value& cap);

/// Element of S \ {0} nearest to x (ties resolved downward); nullopt when the
/// query is unsupported for the descriptor.
std::optional<Value> nearest_element(const WagerSet& s, const Value& x);

/// True when S has an accumulation point strictly above 0.
bool has_positive_accumulation(const WagerSet& s);

/// True when closure(S) has no accumulation points in (0, inf).
bool locally_finite_closure(const WagerSet& s);

/// True when S is one of the finite-cardinality descriptors.
bool is_finite_set(const WagerSet& s);

}  // namespace duel
