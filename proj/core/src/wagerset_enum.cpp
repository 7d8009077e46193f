#include <algorithm>

#include "duel/wagerset.hpp"
#include "wagerset_internal.hpp"

namespace duel {

using detail::range_admits;
using detail::smallest_n;

namespace {

constexpr size_t kEnumerableCap = 1u << 22;

Value unit_fraction(unsigned long n) { return Value::rational(1, static_cast<long>(n)); }

// Exponent step that increases the value of base^e.
long growth_dir(const Value& base) { return base > Value(1) ? 1 : -1; }

}  // namespace

// ---------------------------------------------------------------------------
// DenseEnumerator

struct DenseEnumerator::Gen {
    unsigned long counter = 0;
    // dyadic-round state for intervals
    unsigned long round = 0;
    bool round_open = false;
    mpz_class k_cursor;
    mpz_class k_end;
    mpz_class sieve_cursor = 0;
    std::vector<std::unique_ptr<DenseEnumerator>> inners;
};

DenseEnumerator::DenseEnumerator(const WagerSet& s) : set_(s), gen_(std::make_shared<Gen>()) {
    if (set_.positive_part_empty())
        throw EmptySet("dense enumeration of a set with empty positive part: " + s.describe());
    switch (set_.kind()) {
        case WagerSet::Kind::WithZero:
        case WagerSet::Kind::Scaled:
            gen_->inners.push_back(std::make_unique<DenseEnumerator>(set_.inner()));
            break;
        case WagerSet::Kind::UnionOf:
            for (const auto& c : set_.components()) {
                if (!c.positive_part_empty())
                    gen_->inners.push_back(std::make_unique<DenseEnumerator>(c));
            }
            break;
        default:
            break;
    }
}

const Value& DenseEnumerator::at(size_t i) {
    while (cache_.size() <= i) grow();
    return cache_[i];
}

void DenseEnumerator::grow() {
    Gen& g = *gen_;
    switch (set_.kind()) {
        case WagerSet::Kind::Finite: {
            const auto& e = set_.finite_elements();
            cache_.push_back(e[g.counter % e.size()]);
            ++g.counter;
            return;
        }
        case WagerSet::Kind::IntegerMultiples: {
            ++g.counter;
            cache_.push_back(set_.step() * Value(static_cast<long>(g.counter)));
            return;
        }
        case WagerSet::Kind::HarmonicShifted: {
            ++g.counter;
            cache_.push_back(Value(1) + unit_fraction(g.counter));
            return;
        }
        case WagerSet::Kind::HarmonicReciprocal: {
            ++g.counter;
            cache_.push_back(unit_fraction(g.counter));
            return;
        }
        case WagerSet::Kind::GeometricPowers: {
            long e = 0;
            switch (set_.exponent_range()) {
                case ExponentRange::All:
                    e = (g.counter % 2 == 1) ? static_cast<long>((g.counter + 1) / 2)
                                             : -static_cast<long>(g.counter / 2);
                    break;
                case ExponentRange::NonNegative:
                    e = static_cast<long>(g.counter);
                    break;
                case ExponentRange::NonPositive:
                    e = -static_cast<long>(g.counter);
                    break;
            }
            ++g.counter;
            cache_.push_back(set_.base().pow(e));
            return;
        }
        case WagerSet::Kind::IntegerSieve: {
            do {
                ++g.sieve_cursor;
            } while (set_.sieve_rule().excludes(g.sieve_cursor.get_ui()));
            cache_.push_back(Value(mpq_class(g.sieve_cursor)));
            return;
        }
        case WagerSet::Kind::ClosedInterval:
        case WagerSet::Kind::HalfLine: {
            bool half = set_.kind() == WagerSet::Kind::HalfLine;
            const Value& lo = set_.lo();
            if (!half && lo == set_.hi()) {  // degenerate single point
                cache_.push_back(lo);
                return;
            }
            while (true) {
                if (!g.round_open) {
                    Value hi = half ? lo + Value(static_cast<long>(g.round) + 1) : set_.hi();
                    Value scale = Value(2).pow(static_cast<long>(g.round));
                    if (g.round == 0) {
                        g.k_cursor = (lo).ceil();
                        g.k_end = hi.floor();
                    } else {
                        g.k_cursor = (lo * scale).ceil();
                        if (mpz_even_p(g.k_cursor.get_mpz_t())) g.k_cursor += 1;
                        g.k_end = (hi * scale).floor();
                    }
                    g.round_open = true;
                }
                Value scale = Value(2).pow(static_cast<long>(g.round));
                long step = g.round == 0 ? 1 : 2;
                while (g.k_cursor <= g.k_end) {
                    mpz_class k = g.k_cursor;
                    g.k_cursor += step;
                    if (k == 0) continue;
                    cache_.push_back(Value(mpq_class(k)) / scale);
                    return;
                }
                g.round_open = false;
                ++g.round;
            }
        }
        case WagerSet::Kind::WithZero: {
            cache_.push_back(g.inners[0]->at(g.counter++));
            return;
        }
        case WagerSet::Kind::Scaled: {
            cache_.push_back(set_.ratio() * g.inners[0]->at(g.counter++));
            return;
        }
        case WagerSet::Kind::UnionOf: {
            size_t n = g.inners.size();
            size_t comp = g.counter % n;
            size_t pos = g.counter / n;
            ++g.counter;
            cache_.push_back(g.inners[comp]->at(pos));
            return;
        }
    }
    throw InvariantViolation("dense enumeration fell through");
}

std::optional<DenseEnumerator::WindowHit> DenseEnumerator::first_in_window(const Value& lo,
                                                                           const Value& hi,
                                                                           size_t scan_cap) {
    if (hi <= lo) return std::nullopt;
    switch (set_.kind()) {
        case WagerSet::Kind::Finite: {
            const auto& e = set_.finite_elements();
            for (size_t i = 0; i < e.size(); ++i)
                if (e[i] > lo && e[i] < hi) return WindowHit{i, e[i]};
            return std::nullopt;
        }
        case WagerSet::Kind::IntegerMultiples: {
            const Value& s = set_.step();
            mpz_class k = (lo / s).floor() + 1;
            if (k < 1) k = 1;
            Value v = s * Value(mpq_class(k));
            if (v > lo && v < hi && k.fits_ulong_p())
                return WindowHit{static_cast<size_t>(k.get_ui()) - 1, v};
            return std::nullopt;
        }
        case WagerSet::Kind::HarmonicShifted: {
            if (hi <= Value(1)) return std::nullopt;
            unsigned long n = smallest_n(
                [&](unsigned long m) { return Value(1) + unit_fraction(m) < hi; });
            Value v = Value(1) + unit_fraction(n);
            if (v > lo) return WindowHit{n - 1, v};
            return std::nullopt;
        }
        case WagerSet::Kind::HarmonicReciprocal: {
            if (hi.sign() <= 0) return std::nullopt;
            unsigned long n = smallest_n([&](unsigned long m) { return unit_fraction(m) < hi; });
            Value v = unit_fraction(n);
            if (v > lo) return WindowHit{n - 1, v};
            return std::nullopt;
        }
        case WagerSet::Kind::Scaled: {
            auto hit = gen_->inners[0]->first_in_window(lo / set_.ratio(), hi / set_.ratio(),
                                                        scan_cap);
            if (!hit) return std::nullopt;
            return WindowHit{hit->index, set_.ratio() * hit->value};
        }
        case WagerSet::Kind::WithZero:
            return gen_->inners[0]->first_in_window(lo, hi, scan_cap);
        default: {
            for (size_t i = 0; i < scan_cap; ++i) {
                const Value& v = at(i);
                if (v > lo && v < hi) return WindowHit{i, v};
            }
            return std::nullopt;
        }
    }
}

// ---------------------------------------------------------------------------
// Bounded extraction helpers

std::optional<Value> sup_at_most(const WagerSet& s, const Value& cap) {
    if (cap.sign() < 0) return std::nullopt;
    switch (s.kind()) {
        case WagerSet::Kind::Finite: {
            const auto& e = s.finite_elements();
            for (auto it = e.rbegin(); it != e.rend(); ++it)
                if (*it <= cap) return *it;
            return std::nullopt;
        }
        case WagerSet::Kind::IntegerMultiples: {
            if (s.step() > cap) return std::nullopt;
            mpz_class k = (cap / s.step()).floor();
            return s.step() * Value(mpq_class(k));
        }
        case WagerSet::Kind::ClosedInterval:
            if (s.lo() > cap) return std::nullopt;
            return s.hi() <= cap ? s.hi() : cap;
        case WagerSet::Kind::HalfLine:
            if (s.lo() > cap) return std::nullopt;
            return cap;
        case WagerSet::Kind::GeometricPowers: {
            const Value& b = s.base();
            ExponentRange r = s.exponent_range();
            long up = growth_dir(b);
            long e = 0;
            if (Value(1) <= cap) {
                while (range_admits(r, e + up) && b.pow(e + up) <= cap) e += up;
                return b.pow(e);
            }
            while (range_admits(r, e)) {
                if (b.pow(e) <= cap) return b.pow(e);
                e -= up;
            }
            return std::nullopt;
        }
        case WagerSet::Kind::HarmonicShifted: {
            if (cap >= Value(2)) return Value(2);
            if (cap <= Value(1)) return std::nullopt;
            unsigned long n =
                smallest_n([&](unsigned long m) { return Value(1) + unit_fraction(m) <= cap; });
            return Value(1) + unit_fraction(n);
        }
        case WagerSet::Kind::HarmonicReciprocal: {
            if (cap >= Value(1)) return Value(1);
            if (cap.sign() <= 0) return std::nullopt;
            unsigned long n = smallest_n([&](unsigned long m) { return unit_fraction(m) <= cap; });
            return unit_fraction(n);
        }
        case WagerSet::Kind::IntegerSieve: {
            mpz_class m = cap.floor();
            if (!m.fits_ulong_p()) throw Unsupported("sieve sup query beyond supported range");
            unsigned long n = m.get_ui();
            while (n >= 1 && s.sieve_rule().excludes(n)) --n;
            if (n < 1) return std::nullopt;
            return Value(static_cast<long>(n));
        }
        case WagerSet::Kind::WithZero: {
            auto r = sup_at_most(s.inner(), cap);
            return r ? r : std::optional<Value>(Value(0));
        }
        case WagerSet::Kind::UnionOf: {
            std::optional<Value> best;
            for (const auto& c : s.components()) {
                auto r = sup_at_most(c, cap);
                if (r && (!best || *r > *best)) best = r;
            }
            return best;
        }
        case WagerSet::Kind::Scaled: {
            auto r = sup_at_most(s.inner(), cap / s.ratio());
            if (!r) return std::nullopt;
            return s.ratio() * *r;
        }
    }
    return std::nullopt;
}

namespace {

std::optional<std::vector<Value>> bounded_elements(const WagerSet& s, const Value& cap,
                                                   bool closure) {
    if (cap.sign() <= 0) return std::vector<Value>{};
    switch (s.kind()) {
        case WagerSet::Kind::Finite: {
            std::vector<Value> out;
            for (const auto& e : s.finite_elements())
                if (e <= cap) out.push_back(e);
            return out;
        }
        case WagerSet::Kind::IntegerMultiples: {
            std::vector<Value> out;
            if (s.step() > cap) return out;
            mpz_class kmax = (cap / s.step()).floor();
            if (!kmax.fits_ulong_p() || kmax.get_ui() > kEnumerableCap) return std::nullopt;
            for (unsigned long k = 1; k <= kmax.get_ui(); ++k)
                out.push_back(s.step() * Value(static_cast<long>(k)));
            return out;
        }
        case WagerSet::Kind::IntegerSieve: {
            mpz_class mmax = cap.floor();
            if (!mmax.fits_ulong_p() || mmax.get_ui() > kEnumerableCap) return std::nullopt;
            std::vector<Value> out;
            for (unsigned long m = 1; m <= mmax.get_ui(); ++m)
                if (!s.sieve_rule().excludes(m)) out.push_back(Value(static_cast<long>(m)));
            return out;
        }
        case WagerSet::Kind::GeometricPowers: {
            const Value& b = s.base();
            ExponentRange r = s.exponent_range();
            long up = growth_dir(b);
            bool shrinking_side = range_admits(r, -up);
            if (shrinking_side) return std::nullopt;  // infinitely many small powers
            std::vector<Value> out;
            for (long i = 0;; ++i) {
                long ee = i * up;
                if (!range_admits(r, ee)) break;
                Value v = b.pow(ee);
                if (v > cap) break;
                out.push_back(v);
                if (out.size() > kEnumerableCap) return std::nullopt;
            }
            return out;
        }
        case WagerSet::Kind::HarmonicShifted: {
            if (cap < Value(1)) return std::vector<Value>{};
            if (cap == Value(1))
                return closure ? std::vector<Value>{Value(1)} : std::vector<Value>{};
            return std::nullopt;  // infinitely many elements at most cap
        }
        case WagerSet::Kind::HarmonicReciprocal:
            return std::nullopt;
        case WagerSet::Kind::ClosedInterval: {
            if (s.lo() == s.hi()) {
                std::vector<Value> out;
                if (s.lo().sign() > 0 && s.lo() <= cap) out.push_back(s.lo());
                return out;
            }
            if (s.lo() > cap || s.hi().sign() <= 0) return std::vector<Value>{};
            return std::nullopt;
        }
        case WagerSet::Kind::HalfLine:
            if (s.lo() > cap) return std::vector<Value>{};
            return std::nullopt;
        case WagerSet::Kind::WithZero:
            return bounded_elements(s.inner(), cap, closure);
        case WagerSet::Kind::Scaled: {
            auto inner = bounded_elements(s.inner(), cap / s.ratio(), closure);
            if (!inner) return std::nullopt;
            for (auto& v : *inner) v = v * s.ratio();
            return inner;
        }
        case WagerSet::Kind::UnionOf: {
            std::vector<Value> out;
            for (const auto& c : s.components()) {
                auto part = bounded_elements(c, cap, closure);
                if (!part) return std::nullopt;
                out.insert(out.end(), part->begin(), part->end());
            }
            std::sort(out.begin(), out.end(),
                      [](const Value& x, const Value& y) { return x < y; });
            out.erase(std::unique(out.begin(), out.end(),
                                  [](const Value& x, const Value& y) { return x == y; }),
                      out.end());
            return out;
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::vector<Value>> elements_at_most(const WagerSet& s, const Value& cap) {
    return bounded_elements(s, cap, false);
}

std::optional<std::vector<Value>> closure_elements_at_most(const WagerSet& s, const Value& cap) {
    return bounded_elements(s, cap, true);
}

// ---------------------------------------------------------------------------
// Nearest element

namespace {

// Rounds to the nearest integer; exact ties go down.
mpz_class round_half_down(const Value& x) { return (x - Value::rational(1, 2)).ceil(); }

std::optional<Value> pick_nearer(const Value& x, std::optional<Value> lo_cand,
                                 std::optional<Value> hi_cand) {
    if (!lo_cand) return hi_cand;
    if (!hi_cand) return lo_cand;
    Value dl = (x - *lo_cand).abs();
    Value dh = (*hi_cand - x).abs();
    return dh < dl ? hi_cand : lo_cand;  // tie -> lower
}

}  // namespace

std::optional<Value> nearest_element(const WagerSet& s, const Value& x) {
    switch (s.kind()) {
        case WagerSet::Kind::Finite: {
            const auto& e = s.finite_elements();
            if (e.empty()) return std::nullopt;
            std::optional<Value> best;
            for (const auto& v : e) {
                if (!best || (v - x).abs() < (*best - x).abs()) best = v;
            }
            return best;
        }
        case WagerSet::Kind::IntegerMultiples: {
            mpz_class k = round_half_down(x / s.step());
            if (k < 1) k = 1;
            return s.step() * Value(mpq_class(k));
        }
        case WagerSet::Kind::IntegerSieve: {
            mpz_class m0z = round_half_down(x);
            if (m0z < 1) m0z = 1;
            if (!m0z.fits_ulong_p()) return std::nullopt;
            unsigned long m0 = m0z.get_ui();
            std::optional<Value> lo_cand, hi_cand;
            for (unsigned long m = m0; m >= 1 && m0 - m <= 1000000; --m) {
                if (!s.sieve_rule().excludes(m)) {
                    lo_cand = Value(static_cast<long>(m));
                    break;
                }
                if (m == 1) break;
            }
            for (unsigned long m = m0; m - m0 <= 1000000; ++m) {
                if (!s.sieve_rule().excludes(m)) {
                    hi_cand = Value(static_cast<long>(m));
                    break;
                }
            }
            return pick_nearer(x, lo_cand, hi_cand);
        }
        case WagerSet::Kind::GeometricPowers: {
            if (x.sign() <= 0) return std::nullopt;
            const Value& b = s.base();
            ExponentRange r = s.exponent_range();
            long up = growth_dir(b);
            // largest admitted power <= x, smallest admitted power > x
            std::optional<Value> lo_cand, hi_cand;
            long e = 0;
            if (b.pow(0) <= x) {
                while (range_admits(r, e + up) && b.pow(e + up) <= x) e += up;
                if (range_admits(r, e)) lo_cand = b.pow(e);
                if (range_admits(r, e + up)) hi_cand = b.pow(e + up);
            } else {
                while (range_admits(r, e - up) && b.pow(e) > x) e -= up;
                if (b.pow(e) > x) {
                    if (range_admits(r, e)) hi_cand = b.pow(e);
                } else {
                    if (range_admits(r, e)) lo_cand = b.pow(e);
                    if (range_admits(r, e + up)) hi_cand = b.pow(e + up);
                }
            }
            return pick_nearer(x, lo_cand, hi_cand);
        }
        case WagerSet::Kind::HarmonicShifted: {
            if (x >= Value(2)) return Value(2);
            if (x <= Value(1)) return std::nullopt;  // the infimum 1 is not attained
            unsigned long n =
                smallest_n([&](unsigned long m) { return Value(1) + unit_fraction(m) < x; });
            std::optional<Value> lo_cand = Value(1) + unit_fraction(n);
            std::optional<Value> hi_cand;
            if (n > 1) hi_cand = Value(1) + unit_fraction(n - 1);
            return pick_nearer(x, lo_cand, hi_cand);
        }
        case WagerSet::Kind::HarmonicReciprocal: {
            if (x >= Value(1)) return Value(1);
            if (x.sign() <= 0) return std::nullopt;
            unsigned long n = smallest_n([&](unsigned long m) { return unit_fraction(m) < x; });
            std::optional<Value> lo_cand = unit_fraction(n);
            std::optional<Value> hi_cand;
            if (n > 1) hi_cand = unit_fraction(n - 1);
            return pick_nearer(x, lo_cand, hi_cand);
        }
        case WagerSet::Kind::ClosedInterval: {
            if (x > s.hi()) return s.hi().sign() > 0 ? std::optional<Value>(s.hi()) : std::nullopt;
            if (x < s.lo()) return s.lo().sign() > 0 ? std::optional<Value>(s.lo()) : std::nullopt;
            return x.sign() > 0 ? std::optional<Value>(x) : std::nullopt;
        }
        case WagerSet::Kind::HalfLine: {
            if (x < s.lo()) return s.lo().sign() > 0 ? std::optional<Value>(s.lo()) : std::nullopt;
            return x.sign() > 0 ? std::optional<Value>(x) : std::nullopt;
        }
        case WagerSet::Kind::WithZero:
            return nearest_element(s.inner(), x);
        case WagerSet::Kind::Scaled: {
            auto r = nearest_element(s.inner(), x / s.ratio());
            if (!r) return std::nullopt;
            return s.ratio() * *r;
        }
        case WagerSet::Kind::UnionOf: {
            std::optional<Value> best;
            for (const auto& c : s.components()) {
                auto r = nearest_element(c, x);
                if (!r) return std::nullopt;  // a component may hide a nearer element
                if (!best) best = r;
                else {
                    Value db = (*best - x).abs(), dr = (*r - x).abs();
                    if (dr < db || (dr == db && *r < *best)) best = r;
                }
            }
            return best;
        }
    }
    return std::nullopt;
}

}  // namespace duel
