#pragma once

#include "krepair/kdata.hpp"
#include "krepair/logic.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace krepair {

enum class AnnotationMode { aware, unaware };
enum class CompareKind { order, distance };
enum class ViolationKind { boolean, annotated };
enum class OrderSemantics { closeness, literal };
enum class OrderResult { leq, gt, incomparable };

std::string_view to_string(AnnotationMode mode);
std::string_view to_string(OrderResult r);

struct IMSpec {
  ViolationKind fsc = ViolationKind::annotated;
  AggregateKind agg = AggregateKind::sum;
};

struct RepairFramework {
  std::vector<Formula> hard_constraints;
  std::vector<Formula> soft_constraints;
  std::vector<Formula> hql_plus;
  std::vector<Formula> hql_minus;
  std::vector<Formula> sql;
  IMSpec im;
  CompareKind compare = CompareKind::distance;
  AggregateKind distance_agg = AggregateKind::sum;  // Delta is always the modulus
  Rational epsilon = 0;
  AnnotationMode mode = AnnotationMode::aware;
  OrderSemantics order_semantics = OrderSemantics::closeness;
};

struct FrameworkOptions {
  bool trust_hics = false;
  std::size_t consistency_domain = 4;       // fresh elements tried by the witness search
  std::size_t consistency_budget = 20000;   // databases evaluated before giving up
};

// Parses the framework file format against `schema`. Hard constraints are
// checked for consistency unless options.trust_hics is set.
RepairFramework parse_framework(std::string_view text, const Schema& schema, const FrameworkOptions& options = {});
RepairFramework parse_framework_file(const std::string& path, const Schema& schema,
                                     const FrameworkOptions& options = {});

// Searches for a database satisfying every hard constraint; throws
// ParseError("consistency unverified ...") when none is found in budget.
void verify_hard_constraints_consistent(const std::vector<Formula>& hics, const Schema& schema,
                                        const FrameworkOptions& options = {});

// A query with one of its type-consistent groundings over adom(db).
struct GroundQuery {
  std::size_t query = 0;
  std::vector<DataId> args;
};

struct GroundQuerySet {
  std::vector<std::shared_ptr<const CompiledFormula>> queries;
  std::vector<GroundQuery> instances;
};

// Candidate values of each free variable: the active-domain values of every
// attribute whose columns it occupies (intersected), or the whole active
// domain when it occurs in no relation column. Extra values are admitted
// everywhere.
GroundQuerySet relativise(const std::vector<Formula>& queries, const KDatabase& db, const EvalOptions& options = {});

Value inconsistency_measure(const KDatabase& db, const std::vector<Formula>& soft_constraints, const IMSpec& spec,
                            const EvalOptions& options = {});

// Precomputed reference data for checking candidates against one database.
class RepairContext {
 public:
  RepairContext(const KDatabase& db, const RepairFramework& fw, EvalOptions options = {});

  const KDatabase& db() const { return db_; }
  const RepairFramework& framework() const { return fw_; }
  const EvalOptions& options() const { return options_; }
  // adom(db) plus extra values, sorted ids.
  const std::vector<DataId>& allowed_values() const { return allowed_; }

  const std::vector<std::shared_ptr<const CompiledFormula>>& hard_constraints() const { return hics_; }
  const std::vector<std::shared_ptr<const CompiledFormula>>& soft_constraints() const { return sics_; }
  const GroundQuerySet& hql_plus() const { return plus_; }
  const GroundQuerySet& hql_minus() const { return minus_; }
  const GroundQuerySet& sql() const { return sql_; }
  // Reference values of each ground instance on db (collapsed to 0/1 in
  // annotation-unaware mode for the hard queries).
  const std::vector<Value>& hql_plus_reference() const { return plus_ref_; }
  const std::vector<Value>& hql_minus_reference() const { return minus_ref_; }
  const std::vector<Value>& sql_reference() const { return sql_ref_; }

  // Value of a ground query on `cand`, respecting the annotation mode when
  // `collapse` is requested.
  Value ground_value(const GroundQuerySet& set, std::size_t instance, const KDatabase& cand, bool collapse) const;

  bool adom_contained(const KDatabase& cand) const;                 // item (1)
  bool satisfies_hard_constraints(const KDatabase& cand) const;     // item (2)
  bool preserves_hard_queries(const KDatabase& cand) const;         // items (3) and (4)
  Value inconsistency(const KDatabase& cand) const;
  bool within_tolerance(const KDatabase& cand) const;               // item (5)
  bool is_candidate(const KDatabase& cand) const;                   // items (1)-(5)

  // Per ground soft query: Delta between db and cand values.
  std::vector<Value> sql_deltas(const KDatabase& cand) const;
  std::vector<Value> sql_values(const KDatabase& cand) const;
  Value distance(const KDatabase& cand) const;
  Value aggregate_deltas(const std::vector<Value>& deltas) const;
  OrderResult compare(const KDatabase& a, const KDatabase& b) const;

  bool collapse_hard_queries() const { return fw_.mode == AnnotationMode::unaware; }
  bool collapse_soft_queries() const { return fw_.mode == AnnotationMode::unaware; }

 private:
  std::vector<DataId> domain_of(const KDatabase& cand) const;

  KDatabase db_;
  RepairFramework fw_;
  EvalOptions options_;
  std::vector<DataId> allowed_;
  std::vector<std::shared_ptr<const CompiledFormula>> hics_;
  std::vector<std::shared_ptr<const CompiledFormula>> sics_;
  GroundQuerySet plus_;
  GroundQuerySet minus_;
  GroundQuerySet sql_;
  std::vector<Value> plus_ref_;
  std::vector<Value> minus_ref_;
  std::vector<Value> sql_ref_;
};

bool check_hard_queries(const KDatabase& db, const KDatabase& cand, const RepairFramework& fw,
                        const EvalOptions& options = {});
Value distance(const KDatabase& db, const KDatabase& cand, const RepairFramework& fw, const EvalOptions& options = {});
OrderResult order_leq(const KDatabase& a, const KDatabase& b, const KDatabase& db, const RepairFramework& fw,
                      const EvalOptions& options = {});

// Compares under the framework's ordering given precomputed per-instance
// SQL deltas (closeness) or values (literal) of the two candidates.
bool dominated_or_equal(const std::vector<Value>& a, const std::vector<Value>& b);

}  // namespace krepair
