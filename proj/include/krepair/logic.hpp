#pragma once

#include "krepair/kdata.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace krepair {

struct Term {
  enum class Kind { variable, constant, literal };
  Kind kind = Kind::variable;
  std::string name;  // variable name, schema constant name, or data token

  static Term var(std::string name) { return {Kind::variable, std::move(name)}; }
  static Term constant(std::string name) { return {Kind::constant, std::move(name)}; }
  static Term literal(std::string token) { return {Kind::literal, std::move(token)}; }

  friend bool operator==(const Term&, const Term&) = default;
};

enum class Connective {
  truth,
  falsity,
  atom,
  equal,
  not_equal,
  negation,
  conjunction,
  disjunction,
  implication,
  equivalence,
  forall,
  exists,
  at_most,   // exists<=k
  at_least,  // exists>=k
};

// First-order formula with value semantics. Binary connectives have exactly
// two children, negation and quantifiers one.
struct Formula {
  Connective op = Connective::truth;
  std::string relation;     // atom
  std::vector<Term> terms;  // atom arguments, or the two sides of (in)equality
  std::string variable;     // quantified variable
  long long count = 0;      // bound of a counting quantifier
  std::vector<Formula> children;
  std::size_t line = 0;  // source position, 0 when built programmatically
  std::size_t column = 0;

  static Formula truth();
  static Formula falsity();
  static Formula atom(std::string relation, std::vector<Term> terms);
  static Formula equal(Term a, Term b);
  static Formula not_equal(Term a, Term b);
  static Formula negation(Formula f);
  static Formula conjunction(Formula a, Formula b);
  static Formula disjunction(Formula a, Formula b);
  static Formula implication(Formula a, Formula b);
  static Formula equivalence(Formula a, Formula b);
  static Formula forall(std::string var, Formula body);
  static Formula exists(std::string var, Formula body);
  static Formula at_most(long long k, std::string var, Formula body);
  static Formula at_least(long long k, std::string var, Formula body);

  // Structural equality ignoring source positions.
  friend bool operator==(const Formula& a, const Formula& b);
};

struct SourcePosition {
  std::size_t line = 1;
  std::size_t column = 1;
};

// Without a schema, lowercase identifiers are variables and everything else
// is a data literal. With a schema, relation names and arities are checked
// and declared constant names become constant terms.
Formula parse_formula(std::string_view text, const Schema* schema = nullptr, SourcePosition origin = {});

std::string to_string(const Formula& f);

// Free variables in order of first occurrence.
std::vector<std::string> free_variables(const Formula& f);

// Attributes of the relation columns in which each free variable occurs.
std::map<std::string, std::set<std::size_t>> free_variable_attributes(const Formula& f, const Schema& schema);

std::set<std::string> relations_of(const Formula& f);

// Counting quantifiers to plain first-order logic with equality.
Formula desugar_counting(const Formula& f);

// Eliminates -> and <->, then pushes negations onto relation atoms and flips
// (in)equalities. Counting quantifiers must be desugared first.
Formula nnf(const Formula& f);

// Compiled representation: negation normal form over variable slots,
// relation indices and interned data ids. Conjunction and disjunction are
// n-ary. Evaluation strategies outside this module walk the node array.
enum class NodeOp { truth, falsity, atom, negated_atom, equal, not_equal, conjunction, disjunction, forall, exists };

struct CompiledTerm {
  enum class Kind { slot, data, constant };
  Kind kind = Kind::slot;
  std::uint32_t index = 0;  // slot number, data id, or constant index
};

struct CompiledNode {
  NodeOp op = NodeOp::truth;
  std::size_t relation = 0;
  std::vector<CompiledTerm> args;
  std::vector<std::size_t> children;
  std::size_t slot = 0;                 // quantified slot
  std::vector<std::size_t> free_slots;  // sorted slots occurring free below
  bool memoize = false;
  // For exists: an atom of the body (possibly below further exists and a
  // conjunction) mentioning the slot, so values outside that column give 0.
  // For forall the same with a negated atom below disjunctions; that one is
  // only sound for Boolean truth. Holds {relation, column}.
  std::optional<std::pair<std::size_t, std::size_t>> guard;
};

class CompiledFormula {
 public:
  // Literals are interned into `symbols`, which must be the table of every
  // database later passed to evaluate().
  CompiledFormula(const Formula& f, const Schema& schema, SymbolTable& symbols);

  // Free variables occupy slots 0..n-1 in this order.
  const std::vector<std::string>& free_variables() const { return free_; }
  std::size_t slot_count() const { return slot_count_; }
  const std::vector<CompiledNode>& nodes() const { return nodes_; }
  std::size_t root() const { return root_; }
  const Formula& source() const { return source_; }
  bool has_quantifiers() const { return quantified_; }

  // Quantifiers range over `domain`.
  Value evaluate(const KDatabase& db, std::span<const DataId> free_values, std::span<const DataId> domain) const;
  bool holds(const KDatabase& db, std::span<const DataId> free_values, std::span<const DataId> domain) const;

 private:
  Formula source_;
  std::vector<std::string> free_;
  std::size_t slot_count_ = 0;
  std::vector<CompiledNode> nodes_;
  std::size_t root_ = 0;
  bool quantified_ = false;
};

// Resolves a compiled constant term against a database.
DataId resolve_constant(const KDatabase& db, std::uint32_t constant_index);

using Assignment = std::map<std::string, std::string>;

struct EvalOptions {
  std::vector<std::string> extra_values;  // added to every quantifier range
};

// adom(db) plus the extra values, as sorted ids of db's symbol table.
std::vector<DataId> quantifier_domain(const KDatabase& db, const EvalOptions& options = {});

Value eval_annotated(const KDatabase& db, const Formula& f, const Assignment& s = {}, const EvalOptions& options = {});
bool eval_boolean(const KDatabase& db, const Formula& f, const Assignment& s = {}, const EvalOptions& options = {});

using AnswerTuple = std::vector<std::string>;

std::set<AnswerTuple> answers(const KDatabase& db, const Formula& f, const EvalOptions& options = {});
// Tuples over the quantifier domain with non-zero value.
std::map<AnswerTuple, Value> annotated_answers(const KDatabase& db, const Formula& f, const EvalOptions& options = {});

}  // namespace krepair
