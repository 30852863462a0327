#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace krepair {

using Natural = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// The three positive, naturally ordered commutative semirings supported for
// annotations: ({0,1}, or, and), (N, +, *) and (Q>=0, +, *).
enum class SemiringKind { boolean, natural, probability };

std::string_view to_string(SemiringKind kind);
std::optional<SemiringKind> parse_semiring_kind(std::string_view text);

// An annotation value tagged with the semiring it belongs to. Values are
// immutable; arithmetic goes through combine().
class Value {
 public:
  static Value zero(SemiringKind kind);
  static Value one(SemiringKind kind);
  static Value boolean(bool b);
  static Value natural(Natural n);
  static Value probability(Rational q);
  // Lifts a non-negative integer into `kind` (Boolean saturates at 1).
  static Value from_count(SemiringKind kind, const Natural& n);

  SemiringKind kind() const { return kind_; }
  bool is_zero() const;
  bool is_one() const;

  // Numeric view shared by all three kinds (Boolean as 0/1).
  Rational numeric() const;
  // Integral payload; throws UsageError for probability values.
  const Natural& integral() const;

  std::string to_string() const;

  friend bool operator==(const Value& a, const Value& b) = default;

 private:
  Value(SemiringKind kind, Natural n, Rational q) : kind_(kind), n_(std::move(n)), q_(std::move(q)) {}

  SemiringKind kind_;
  Natural n_;   // boolean and natural payload
  Rational q_;  // probability payload
};

enum class Op { add, mul };

enum class AggregateKind { sum, max, count_nonzero };

std::string_view to_string(AggregateKind kind);
std::optional<AggregateKind> parse_aggregate_kind(std::string_view text);

Value combine(const Value& a, const Value& b, Op op);
inline Value add(const Value& a, const Value& b) { return combine(a, b, Op::add); }
inline Value mul(const Value& a, const Value& b) { return combine(a, b, Op::mul); }

// Canonical order of the semiring; 0 is the minimum.
bool leq(const Value& a, const Value& b);

// |a - b| for natural and probability values, exclusive-or for Boolean.
Value delta(const Value& a, const Value& b);

// Folds a multiset. The empty multiset aggregates to 0 of `kind`.
Value aggregate(std::span<const Value> values, AggregateKind agg, SemiringKind kind);

// Literal syntax: Boolean `0`/`1`, natural decimal, probability decimal or `p/q`.
Value parse_value(SemiringKind kind, std::string_view text);

}  // namespace krepair
