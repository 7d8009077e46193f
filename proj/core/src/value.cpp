#include "duel/value.hpp"

#include <mpfr.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

namespace duel {

namespace {

// Exact conversion of an mpfr number to a rational (z * 2^e).
mpq_class mpfr_to_mpq(const mpfr_t x) {
    mpz_class z;
    mpfr_exp_t e = mpfr_get_z_2exp(z.get_mpz_t(), x);
    mpq_class q(z);
    if (e >= 0) {
        mpz_mul_2exp(mpq_numref(q.get_mpq_t()), mpq_numref(q.get_mpq_t()),
                     static_cast<mp_bitcnt_t>(e));
    } else {
        mpz_mul_2exp(mpq_denref(q.get_mpq_t()), mpq_denref(q.get_mpq_t()),
                     static_cast<mp_bitcnt_t>(-e));
    }
    q.canonicalize();
    return q;
}

void compute_const(NamedConst c, long bits, mpfr_t out, mpfr_rnd_t rnd) {
    switch (c) {
        case NamedConst::Pi:
            mpfr_const_pi(out, rnd);
            break;
        case NamedConst::Sqrt2:
            mpfr_sqrt_ui(out, 2, rnd);
            break;
        case NamedConst::Log2_3: {
            mpfr_t three;
            mpfr_init2(three, bits);
            mpfr_set_ui(three, 3, MPFR_RNDN);
            mpfr_log2(out, three, rnd);
            mpfr_clear(three);
            break;
        }
    }
}

// Cached rational enclosures of the named constants, keyed by precision.
std::pair<mpq_class, mpq_class> const_enclosure(NamedConst c, long bits) {
    static std::mutex mu;
    static std::map<std::pair<int, long>, std::pair<mpq_class, mpq_class>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(static_cast<int>(c), bits);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    mpfr_t lo, hi;
    mpfr_init2(lo, bits);
    mpfr_init2(hi, bits);
    compute_const(c, bits, lo, MPFR_RNDD);
    compute_const(c, bits, hi, MPFR_RNDU);
    auto enc = std::make_pair(mpfr_to_mpq(lo), mpfr_to_mpq(hi));
    mpfr_clear(lo);
    mpfr_clear(hi);
    return cache.emplace(key, std::move(enc)).first->second;
}

// [lo,hi]^e for 0 < lo <= hi, integer e != 0.
std::pair<mpq_class, mpq_class> interval_pow(const std::pair<mpq_class, mpq_class>& iv, long e) {
    auto qpow = [](const mpq_class& q, unsigned long k) {
        mpq_class r;
        mpz_pow_ui(mpq_numref(r.get_mpq_t()), mpq_numref(q.get_mpq_t()), k);
        mpz_pow_ui(mpq_denref(r.get_mpq_t()), mpq_denref(q.get_mpq_t()), k);
        r.canonicalize();
        return r;
    };
    if (e > 0) return {qpow(iv.first, e), qpow(iv.second, e)};
    mpq_class lo = qpow(iv.second, -e);
    mpq_class hi = qpow(iv.first, -e);
    return {1 / lo, 1 / hi};
}

}  // namespace

const char* named_const_str(NamedConst c) {
    switch (c) {
        case NamedConst::Pi: return "pi";
        case NamedConst::Sqrt2: return "sqrt2";
        case NamedConst::Log2_3: return "log2_3";
    }
    return "?";
}

NamedConst named_const_from_str(const std::string& s) {
    if (s == "pi") return NamedConst::Pi;
    if (s == "sqrt2") return NamedConst::Sqrt2;
    if (s == "log2_3") return NamedConst::Log2_3;
    throw InputError("unknown named constant: " + s);
}

PrecisionConfig& precision_config() {
    static PrecisionConfig cfg;
    return cfg;
}

Value::Value(const mpq_class& q) {
    if (q != 0) terms_.push_back(Term{Monomial{}, q});
}

Value Value::rational(long num, long den) {
    if (den == 0) throw InputError("rational with zero denominator");
    mpq_class q(num, den);
    q.canonicalize();
    return Value(q);
}

Value Value::constant(NamedConst c) {
    Monomial m;
    switch (c) {
        case NamedConst::Pi: m.pi_e = 1; break;
        case NamedConst::Sqrt2: m.sqrt2_e = 1; break;
        case NamedConst::Log2_3: m.log2_3_e = 1; break;
    }
    Value v;
    v.terms_.push_back(Term{m, mpq_class(1)});
    return v;
}

Value Value::parse(const std::string& text) {
    return Value(rational_from_str(text));
}

bool Value::is_rational() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].m.trivial());
}

std::optional<NamedConst> Value::as_named_const() const {
    if (terms_.size() != 1 || terms_[0].coeff != 1) return std::nullopt;
    const Monomial& m = terms_[0].m;
    if (m.pi_e == 1 && m.sqrt2_e == 0 && m.log2_3_e == 0) return NamedConst::Pi;
    if (m.pi_e == 0 && m.sqrt2_e == 1 && m.log2_3_e == 0) return NamedConst::Sqrt2;
    if (m.pi_e == 0 && m.sqrt2_e == 0 && m.log2_3_e == 1) return NamedConst::Log2_3;
    return std::nullopt;
}

mpq_class Value::as_rational() const {
    if (terms_.empty()) return mpq_class(0);
    if (!is_rational()) throw InputError("value is not rational: " + str());
    return terms_[0].coeff;
}

bool Value::is_integer() const {
    if (!is_rational()) return false;
    mpq_class q = as_rational();
    return mpz_cmp_ui(mpq_denref(q.get_mpq_t()), 1) == 0;
}

long Value::as_long() const {
    if (!is_integer()) throw InputError("value is not an integer: " + str());
    mpz_class n = as_rational().get_num();
    if (!n.fits_slong_p()) throw InputError("integer out of range: " + str());
    return n.get_si();
}

void Value::add_term(const Monomial& m, const mpq_class& coeff) {
    if (coeff == 0) return;
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                               [](const Term& t, const Monomial& mm) { return t.m < mm; });
    if (it != terms_.end() && it->m == m) {
        it->coeff += coeff;
        if (it->coeff == 0) terms_.erase(it);
    } else {
        terms_.insert(it, Term{m, coeff});
    }
}

Value Value::from_terms(std::vector<Term> terms) {
    Value v;
    for (auto& t : terms) v.add_term(t.m, t.coeff);
    return v;
}

Value Value::operator-() const {
    Value v = *this;
    for (auto& t : v.terms_) t.coeff = -t.coeff;
    return v;
}

Value& Value::operator+=(const Value& o) {
    for (const auto& t : o.terms_) add_term(t.m, t.coeff);
    return *this;
}

Value& Value::operator-=(const Value& o) {
    for (const auto& t : o.terms_) add_term(t.m, -t.coeff);
    return *this;
}

Value& Value::operator*=(const Value& o) {
    Value result;
    for (const auto& a : terms_) {
        for (const auto& b : o.terms_) {
            Monomial m;
            m.pi_e = a.m.pi_e + b.m.pi_e;
            m.log2_3_e = a.m.log2_3_e + b.m.log2_3_e;
            long s2 = static_cast<long>(a.m.sqrt2_e) + b.m.sqrt2_e;
            mpq_class coeff = a.coeff * b.coeff;
            // sqrt2^(2k+r) = 2^k * sqrt2^r with r in {0,1}
            long k = (s2 >= 0) ? s2 / 2 : -((-s2 + 1) / 2);
            long r = s2 - 2 * k;
            if (k >= 0) {
                mpz_class p;
                mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k));
                coeff *= p;
            } else {
                mpz_class p;
                mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(-k));
                coeff /= p;
            }
            m.sqrt2_e = static_cast<int32_t>(r);
            result.add_term(m, coeff);
        }
    }
    terms_ = std::move(result.terms_);
    return *this;
}

Value& Value::operator/=(const Value& o) {
    if (o.is_zero()) throw InputError("division by zero");
    if (is_zero()) return *this;
    if (o.terms_.size() != 1)
        throw Unsupported("division by a multi-term irrational value: " + o.str());
    const Term& d = o.terms_[0];
    Value inv;
    Monomial m;
    m.pi_e = -d.m.pi_e;
    m.log2_3_e = -d.m.log2_3_e;
    mpq_class coeff = 1 / d.coeff;
    if (d.m.sqrt2_e != 0) {
        // 1/sqrt2 = sqrt2/2
        m.sqrt2_e = 1;
        coeff /= 2;
    }
    inv.terms_.push_back(Term{m, coeff});
    // inv's term list must stay sorted (single term, trivially so)
    return *this *= inv;
}

int Value::compare(const Value& o) const {
    Value d = *this - o;
    if (d.terms_.empty()) return 0;
    bool all_pos = true, all_neg = true;
    for (const auto& t : d.terms_) {
        if (t.coeff > 0) all_neg = false;
        else all_pos = false;
    }
    // Monomials are positive reals, so a uniform coefficient sign decides.
    if (all_pos) return 1;
    if (all_neg) return -1;
    const PrecisionConfig& cfg = precision_config();
    for (long bits = cfg.start_bits; bits <= cfg.cap_bits; bits *= 2) {
        auto [lo, hi] = d.enclosure(bits);
        if (lo > 0) return 1;
        if (hi < 0) return -1;
    }
    throw UndecidableComparison("comparison undecided at " + std::to_string(cfg.cap_bits) +
                                " bits: " + str() + " vs " + o.str());
}

int Value::sign() const { return compare(Value()); }

Value Value::abs() const { return sign() >= 0 ? *this : -*this; }

Value Value::pow(long e) const {
    if (e == 0) return Value(1);
    Value base = *this;
    if (e < 0) {
        base = Value(1) / base;
        e = -e;
    }
    Value acc(1);
    while (e > 0) {
        if (e & 1) acc *= base;
        e >>= 1;
        if (e > 0) base *= base;
    }
    return acc;
}

std::pair<mpq_class, mpq_class> Value::enclosure(long bits) const {
    mpq_class lo = 0, hi = 0;
    for (const auto& t : terms_) {
        mpq_class mlo = 1, mhi = 1;
        auto apply = [&](NamedConst c, long e) {
            if (e == 0) return;
            auto iv = interval_pow(const_enclosure(c, bits), e);
            mlo *= iv.first;
            mhi *= iv.second;
        };
        apply(NamedConst::Pi, t.m.pi_e);
        apply(NamedConst::Sqrt2, t.m.sqrt2_e);
        apply(NamedConst::Log2_3, t.m.log2_3_e);
        if (t.coeff >= 0) {
            lo += t.coeff * mlo;
            hi += t.coeff * mhi;
        } else {
            lo += t.coeff * mhi;
            hi += t.coeff * mlo;
        }
    }
    return {lo, hi};
}

std::string Value::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& t : terms_) {
        if (!first) out << " + ";
        first = false;
        bool has_const = !t.m.trivial();
        if (!has_const || t.coeff != 1) {
            out << rational_str(t.coeff);
            if (has_const) out << "*";
        }
        bool star = false;
        auto emit = [&](const char* name, long e) {
            if (e == 0) return;
            if (star) out << "*";
            out << name;
            if (e != 1) out << "^" << e;
            star = true;
        };
        emit("pi", t.m.pi_e);
        emit("sqrt2", t.m.sqrt2_e);
        emit("log2_3", t.m.log2_3_e);
    }
    return out.str();
}

double Value::approx() const {
    auto [lo, hi] = enclosure(64);
    return (lo.get_d() + hi.get_d()) / 2;
}

mpz_class Value::floor() const {
    if (is_rational()) {
        mpq_class q = as_rational();
        mpz_class r;
        mpz_fdiv_q(r.get_mpz_t(), mpq_numref(q.get_mpq_t()), mpq_denref(q.get_mpq_t()));
        return r;
    }
    const PrecisionConfig& cfg = precision_config();
    for (long bits = cfg.start_bits; bits <= cfg.cap_bits; bits *= 2) {
        auto [lo, hi] = enclosure(bits);
        mpz_class flo, fhi;
        mpz_fdiv_q(flo.get_mpz_t(), mpq_numref(lo.get_mpq_t()), mpq_denref(lo.get_mpq_t()));
        mpz_fdiv_q(fhi.get_mpz_t(), mpq_numref(hi.get_mpq_t()), mpq_denref(hi.get_mpq_t()));
        if (flo == fhi) return flo;
    }
    throw UndecidableComparison("floor undecided: " + str());
}

mpz_class Value::ceil() const { return -((-*this).floor()); }

std::string rational_str(const mpq_class& q) {
    return q.get_str();
}

mpq_class rational_from_str(const std::string& s) {
    mpq_class q;
    if (s.empty() || mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0)
        throw InputError("malformed rational: '" + s + "'");
    if (mpz_cmp_ui(mpq_denref(q.get_mpq_t()), 0) == 0)
        throw InputError("rational with zero denominator: '" + s + "'");
    q.canonicalize();
    return q;
}

long floor_log2(const Value& x) {
    if (x.sign() <= 0) throw InputError("floor_log2 requires a positive value");
    if (x.is_rational()) {
        mpq_class q = x.as_rational();
        long a = static_cast<long>(mpz_sizeinbase(mpq_numref(q.get_mpq_t()), 2));
        long b = static_cast<long>(mpz_sizeinbase(mpq_denref(q.get_mpq_t()), 2));
        // 2^(a-b-1) <= q < 2^(a-b+1); one comparison settles the floor
        long e = a - b;
        mpq_class p;
        if (e >= 0) {
            mpq_class two_e;
            mpz_ui_pow_ui(mpq_numref(two_e.get_mpq_t()), 2, static_cast<unsigned long>(e));
            mpz_set_ui(mpq_denref(two_e.get_mpq_t()), 1);
            return q >= two_e ? e : e - 1;
        }
        mpq_class two_e(1);
        mpz_ui_pow_ui(mpq_denref(two_e.get_mpq_t()), 2, static_cast<unsigned long>(-e));
        return q >= two_e ? e : e - 1;
    }
    long e = 0;
    Value p(1);
    if (x >= 1) {
        while (p * 2 <= x) {
            p *= 2;
            ++e;
        }
        return e;
    }
    while (p > x) {
        p /= 2;
        --e;
    }
    return e;
}

}  // namespace duel
