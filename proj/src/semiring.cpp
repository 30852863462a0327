#include "krepair/semiring.hpp"

#include "krepair/error.hpp"

#include <algorithm>
#include <cctype>

namespace krepair {

namespace {

void require_same(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) {
    throw UsageError("cannot mix values of the " + std::string(to_string(a.kind())) + " and " +
                     std::string(to_string(b.kind())) + " semirings");
  }
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

Natural parse_natural(std::string_view s) {
  if (!all_digits(s)) throw ParseError("expected a non-negative integer, got '" + std::string(s) + "'");
  return Natural(std::string(s));
}

Rational parse_rational(std::string_view s) {
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Natural p = parse_natural(s.substr(0, slash));
    Natural q = parse_natural(s.substr(slash + 1));
    if (q == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
    return Rational(p, q);
  }
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (frac.empty() || !all_digits(frac)) throw ParseError("malformed decimal '" + std::string(s) + "'");
    Natural scale = boost::multiprecision::pow(Natural(10), static_cast<unsigned>(frac.size()));
    return Rational(parse_natural(whole) * scale + parse_natural(frac), scale);
  }
  return Rational(parse_natural(s));
}

}  // namespace

std::string_view to_string(SemiringKind kind) {
  switch (kind) {
    case SemiringKind::boolean: return "boolean";
    case SemiringKind::natural: return "natural";
    case SemiringKind::probability: return "probability";
  }
  return "?";
}

std::optional<SemiringKind> parse_semiring_kind(std::string_view text) {
  if (text == "boolean") return SemiringKind::boolean;
  if (text == "natural") return SemiringKind::natural;
  if (text == "probability") return SemiringKind::probability;
  return std::nullopt;
}

std::string_view to_string(AggregateKind kind) {
  switch (kind) {
    case AggregateKind::sum: return "sum";
    case AggregateKind::max: return "max";
    case AggregateKind::count_nonzero: return "count";
  }
  return "?";
}

std::optional<AggregateKind> parse_aggregate_kind(std::string_view text) {
  if (text == "sum") return AggregateKind::sum;
  if (text == "max") return AggregateKind::max;
  if (text == "count" || text == "count-nonzero") return AggregateKind::count_nonzero;
  return std::nullopt;
}

Value Value::zero(SemiringKind kind) { return Value(kind, 0, 0); }

Value Value::one(SemiringKind kind) {
  return kind == SemiringKind::probability ? Value(kind, 0, 1) : Value(kind, 1, 0);
}

Value Value::boolean(bool b) { return Value(SemiringKind::boolean, b ? 1 : 0, 0); }

Value Value::natural(Natural n) {
  if (n < 0) throw UsageError("natural annotations must be non-negative");
  return Value(SemiringKind::natural, std::move(n), 0);
}

Value Value::probability(Rational q) {
  if (q < 0) throw UsageError("probability annotations must be non-negative");
  return Value(SemiringKind::probability, 0, std::move(q));
}

Value Value::from_count(SemiringKind kind, const Natural& n) {
  switch (kind) {
    case SemiringKind::boolean: return boolean(n != 0);
    case SemiringKind::natural: return natural(n);
    case SemiringKind::probability: return probability(Rational(n));
  }
  return zero(kind);
}

bool Value::is_zero() const { return kind_ == SemiringKind::probability ? q_ == 0 : n_ == 0; }

bool Value::is_one() const { return kind_ == SemiringKind::probability ? q_ == 1 : n_ == 1; }

Rational Value::numeric() const { return kind_ == SemiringKind::probability ? q_ : Rational(n_); }

const Natural& Value::integral() const {
  if (kind_ == SemiringKind::probability) throw UsageError("probability value has no integral payload");
  return n_;
}

std::string Value::to_string() const {
  if (kind_ != SemiringKind::probability) return n_.str();
  if (boost::multiprecision::denominator(q_) == 1) return boost::multiprecision::numerator(q_).str();
  return boost::multiprecision::numerator(q_).str() + "/" + boost::multiprecision::denominator(q_).str();
}

Value combine(const Value& a, const Value& b, Op op) {
  require_same(a, b);
  switch (a.kind()) {
    case SemiringKind::boolean:
      return Value::boolean(op == Op::add ? (!a.is_zero() || !b.is_zero()) : (!a.is_zero() && !b.is_zero()));
    case SemiringKind::natural:
      return Value::natural(op == Op::add ? Natural(a.integral() + b.integral()) : Natural(a.integral() * b.integral()));
    case SemiringKind::probability:
      return Value::probability(op == Op::add ? Rational(a.numeric() + b.numeric()) : Rational(a.numeric() * b.numeric()));
  }
  return a;
}

bool leq(const Value& a, const Value& b) {
  require_same(a, b);
  if (a.kind() != SemiringKind::probability) return a.integral() <= b.integral();
  return a.numeric() <= b.numeric();
}

Value delta(const Value& a, const Value& b) {
  require_same(a, b);
  switch (a.kind()) {
    case SemiringKind::boolean: return Value::boolean(a.is_zero() != b.is_zero());
    case SemiringKind::natural:
      return Value::natural(a.integral() >= b.integral() ? Natural(a.integral() - b.integral())
                                                          : Natural(b.integral() - a.integral()));
    case SemiringKind::probability: {
      Rational d = a.numeric() - b.numeric();
      return Value::probability(d < 0 ? Rational(-d) : d);
    }
  }
  return a;
}

Value aggregate(std::span<const Value> values, AggregateKind agg, SemiringKind kind) {
  Value acc = Value::zero(kind);
  for (const Value& v : values) {
    if (v.kind() != kind) throw UsageError("aggregate over values of a different semiring");
    switch (agg) {
      case AggregateKind::sum: acc = add(acc, v); break;
      case AggregateKind::max:
        if (!leq(v, acc)) acc = v;
        break;
      case AggregateKind::count_nonzero:
        if (!v.is_zero()) acc = add(acc, Value::one(kind));
        break;
    }
  }
  return acc;
}

Value parse_value(SemiringKind kind, std::string_view text) {
  switch (kind) {
    case SemiringKind::boolean:
      if (text == "0") return Value::boolean(false);
      if (text == "1") return Value::boolean(true);
      throw ParseError("Boolean annotations must be 0 or 1, got '" + std::string(text) + "'");
    case SemiringKind::natural: return Value::natural(parse_natural(text));
    case SemiringKind::probability: return Value::probability(parse_rational(text));
  }
  throw ParseError("unknown semiring");
}

}  // namespace krepair
