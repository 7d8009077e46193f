#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "duel/errors.hpp"

namespace duel {

/// Irrational constants the engine knows how to enclose to arbitrary
/// precision. Everything else is exact rational arithmetic.
enum class NamedConst { Pi, Sqrt2, Log2_3 };

const char* named_const_str(NamedConst c);
NamedConst named_const_from_str(const std::string& s);

/// Process-wide precision settings for enclosure comparisons. Comparisons
/// start at `start_bits` and double until `cap_bits`, then throw
/// UndecidableComparison.
struct PrecisionConfig {
    long start_bits = 128;
    long cap_bits = 1024;
};

PrecisionConfig& precision_config();

/// An exact real number: a finite sum of terms q * pi^a * sqrt2^b * log2_3^c
/// with rational q and integer exponents (b normalized to {0,1}).
///
/// Rationals compare exactly. Comparisons that mix distinct monomials are
/// decided by interval refinement against MPFR enclosures of the constants;
/// if the configured precision cap is reached first, UndecidableComparison
/// is thrown. Addition, subtraction and multiplication are closed; division
/// requires a single-term divisor.
class Value {
public:
    Value() = default;  // zero
    Value(long n) : Value(mpq_class(n)) {}  // NOLINT: implicit by design
    Value(int n) : Value(mpq_class(n)) {}   // NOLINT
    explicit Value(const mpq_class& q);

    static Value rational(long num, long den);
    static Value constant(NamedConst c);
    static Value pi() { return constant(NamedConst::Pi); }
    static Value sqrt2() { return constant(NamedConst::Sqrt2); }
    static Value log2_3() { return constant(NamedConst::Log2_3); }

    /// Parses "p", "-p" or "p/q".
    static Value parse(const std::string& text);

    bool is_zero() const { return terms_.empty(); }
    /// At most one term; such values are closed under division.
    bool is_monomial() const { return terms_.size() <= 1; }
    /// Exactly pi, sqrt2 or log2_3 with coefficient 1.
    std::optional<NamedConst> as_named_const() const;
    bool is_rational() const;
    /// Requires is_rational(); zero yields 0/1.
    mpq_class as_rational() const;
    bool is_integer() const;
    /// Requires an integer value fitting in long.
    long as_long() const;

    Value operator-() const;
    Value& operator+=(const Value& o);
    Value& operator-=(const Value& o);
    Value& operator*=(const Value& o);
    Value& operator/=(const Value& o);

    friend Value operator+(Value a, const Value& b) { return a += b; }
    friend Value operator-(Value a, const Value& b) { return a -= b; }
    friend Value operator*(Value a, const Value& b) { return a *= b; }
    friend Value operator/(Value a, const Value& b) { return a /= b; }

    /// Three-way comparison; throws UndecidableComparison at the precision cap.
    int compare(const Value& o) const;
    int sign() const;

    friend bool operator==(const Value& a, const Value& b) { return a.compare(b) == 0; }
    friend bool operator!=(const Value& a, const Value& b) { return a.compare(b) != 0; }
    friend bool operator<(const Value& a, const Value& b) { return a.compare(b) < 0; }
    friend bool operator<=(const Value& a, const Value& b) { return a.compare(b) <= 0; }
    friend bool operator>(const Value& a, const Value& b) { return a.compare(b) > 0; }
    friend bool operator>=(const Value& a, const Value& b) { return a.compare(b) >= 0; }

    Value abs() const;
    /// Integer power; negative exponents require a single-term value.
    Value pow(long e) const;

    /// Exact rational interval [lo, hi] containing the value, computed from
    /// constant enclosures at the given precision.
    std::pair<mpq_class, mpq_class> enclosure(long bits) const;

    /// Canonical text: "p/q" for rationals, e.g. "pi", "2*pi", "1/2*pi^2"
    /// otherwise; sums joined with " + ".
    std::string str() const;
    /// Lossy double approximation, for plots and logs only.
    double approx() const;

    /// floor/ceil, defined for every value (refines until the enclosing
    /// integer is determined; exact for rationals).
    mpz_class floor() const;
    mpz_class ceil() const;

private:
    struct Monomial {
        int32_t pi_e = 0;
        int32_t sqrt2_e = 0;  // 0 or 1 after normalization
        int32_t log2_3_e = 0;
        bool trivial() const { return pi_e == 0 && sqrt2_e == 0 && log2_3_e == 0; }
        auto operator<=>(const Monomial&) const = default;
    };
    struct Term {
        Monomial m;
        mpq_class coeff;
    };

    // Sorted by monomial, coefficients nonzero. Empty means zero.
    std::vector<Term> terms_;

    static Value from_terms(std::vector<Term> terms);
    void add_term(const Monomial& m, const mpq_class& coeff);
    friend class ValueTestPeer;
};

std::string rational_str(const mpq_class& q);
mpq_class rational_from_str(const std::string& s);

/// floor(log2(x)) for x > 0, by exact comparison against powers of two.
long floor_log2(const Value& x);

}  // namespace duel
