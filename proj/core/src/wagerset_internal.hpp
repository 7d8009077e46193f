#pragma once

#include <functional>
#include <optional>

#include "duel/wagerset.hpp"

namespace duel::detail {

/// Exponent e with base^e == x, if one exists. base must be a simple positive
/// value different from 1.
std::optional<long> gp_exponent(const Value& base, const Value& x);

bool range_admits(ExponentRange r, long e);

std::optional<unsigned long> as_positive_ulong(const Value& x);

/// Positive elements of a finite-cardinality descriptor, sorted ascending.
std::vector<Value> finite_positive_elements(const WagerSet& s);

bool is_countable(const WagerSet& s);

/// Smallest n >= 1 with past(n) true; past must be monotone in n.
unsigned long smallest_n(const std::function<bool(unsigned long)>& past);

}  // namespace duel::detail
