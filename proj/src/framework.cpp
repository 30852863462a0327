#include "krepair/error.hpp"
#include "krepair/framework.hpp"

#include <algorithm>
#include <optional>

namespace krepair {

namespace {

std::vector<DataId> sorted_union(std::vector<DataId> a, const std::vector<DataId>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

std::vector<DataId> extra_ids(const KDatabase& db, const EvalOptions& options) {
  std::vector<DataId> out;
  for (const auto& v : options.extra_values) out.push_back(db.symbols().intern(v));
  return out;
}

Value collapse(bool b, SemiringKind kind) { return b ? Value::one(kind) : Value::zero(kind); }

// Candidate databases may come from a different symbol table (e.g. loaded
// from a file); re-express them over the reference table.
class Rebased {
 public:
  Rebased(const KDatabase& reference, const KDatabase& cand) {
    if (cand.symbols_ptr() == reference.symbols_ptr()) {
      ptr_ = &cand;
      return;
    }
    if (cand.semiring() != reference.semiring()) throw UsageError("candidate uses a different semiring");
    if (cand.relation_count() != reference.relation_count()) throw UsageError("candidate uses a different schema");
    KDatabase out(reference.schema_ptr(), cand.semiring(), reference.symbols_ptr());
    for (std::size_t c = 0; c < reference.schema().constants().size(); ++c) {
      if (auto v = cand.constant(c)) out.set_constant(c, reference.symbols().intern(cand.symbols().token(*v)));
    }
    for (std::size_t r = 0; r < cand.relation_count(); ++r) {
      for (const auto& [tuple, value] : cand.relation(r)) {
        Tuple t;
        for (DataId id : tuple) t.push_back(reference.symbols().intern(cand.symbols().token(id)));
        out.set(r, std::move(t), value);
      }
    }
    own_.emplace(std::move(out));
    ptr_ = &*own_;
  }

  const KDatabase& get() const { return *ptr_; }

 private:
  std::optional<KDatabase> own_;
  const KDatabase* ptr_ = nullptr;
};

}  // namespace

GroundQuerySet relativise(const std::vector<Formula>& queries, const KDatabase& db, const EvalOptions& options) {
  GroundQuerySet out;
  auto extras = extra_ids(db, options);
  auto whole = quantifier_domain(db, options);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto cf = std::make_shared<const CompiledFormula>(queries[q], db.schema(), db.symbols());
    auto attrs = free_variable_attributes(queries[q], db.schema());
    std::vector<std::vector<DataId>> ranges;
    for (const auto& var : cf->free_variables()) {
      const auto& a = attrs[var];
      if (a.empty()) {
        ranges.push_back(whole);
        continue;
      }
      std::vector<DataId> range;
      bool first = true;
      for (std::size_t attr : a) {
        auto dom = sorted_union(db.attribute_domain(attr), extras);
        if (first) {
          range = std::move(dom);
          first = false;
        } else {
          std::vector<DataId> meet;
          std::set_intersection(range.begin(), range.end(), dom.begin(), dom.end(), std::back_inserter(meet));
          range = std::move(meet);
        }
      }
      ranges.push_back(std::move(range));
    }
    out.queries.push_back(cf);
    std::vector<DataId> args(ranges.size());
    std::vector<std::size_t> idx(ranges.size(), 0);
    if (std::any_of(ranges.begin(), ranges.end(), [](const auto& r) { return r.empty(); })) continue;
    while (true) {
      for (std::size_t i = 0; i < ranges.size(); ++i) args[i] = ranges[i][idx[i]];
      out.instances.push_back({q, args});
      std::size_t k = ranges.size();
      bool carry = true;
      while (carry && k > 0) {
        --k;
        if (++idx[k] < ranges[k].size()) {
          carry = false;
        } else {
          idx[k] = 0;
        }
      }
      if (carry) break;
    }
  }
  return out;
}

Value inconsistency_measure(const KDatabase& db, const std::vector<Formula>& soft_constraints, const IMSpec& spec,
                            const EvalOptions& options) {
  auto domain = quantifier_domain(db, options);
  std::vector<Value> levels;
  for (const auto& phi : soft_constraints) {
    CompiledFormula negated(Formula::negation(phi), db.schema(), db.symbols());
    if (spec.fsc == ViolationKind::boolean) {
      levels.push_back(collapse(negated.holds(db, {}, domain), db.semiring()));
    } else {
      levels.push_back(negated.evaluate(db, {}, domain));
    }
  }
  return aggregate(levels, spec.agg, db.semiring());
}

RepairContext::RepairContext(const KDatabase& db, const RepairFramework& fw, EvalOptions options)
    : db_(db), fw_(fw), options_(std::move(options)) {
  allowed_ = quantifier_domain(db_, options_);
  for (const auto& f : fw_.hard_constraints) {
    hics_.push_back(std::make_shared<const CompiledFormula>(f, db_.schema(), db_.symbols()));
  }
  for (const auto& f : fw_.soft_constraints) {
    sics_.push_back(std::make_shared<const CompiledFormula>(Formula::negation(f), db_.schema(), db_.symbols()));
  }
  plus_ = relativise(fw_.hql_plus, db_, options_);
  minus_ = relativise(fw_.hql_minus, db_, options_);
  sql_ = relativise(fw_.sql, db_, options_);
  auto domain = domain_of(db_);
  auto reference = [&](const GroundQuerySet& set, bool collapse_values) {
    std::vector<Value> out;
    for (const auto& inst : set.instances) {
      const auto& cf = *set.queries[inst.query];
      out.push_back(collapse_values ? collapse(cf.holds(db_, inst.args, domain), db_.semiring())
                                    : cf.evaluate(db_, inst.args, domain));
    }
    return out;
  };
  plus_ref_ = reference(plus_, collapse_hard_queries());
  minus_ref_ = reference(minus_, collapse_hard_queries());
  sql_ref_ = reference(sql_, collapse_soft_queries());
}

std::vector<DataId> RepairContext::domain_of(const KDatabase& cand) const { return quantifier_domain(cand, options_); }

Value RepairContext::ground_value(const GroundQuerySet& set, std::size_t instance, const KDatabase& cand,
                                  bool collapse_value) const {
  Rebased c(db_, cand);
  auto domain = domain_of(c.get());
  const auto& inst = set.instances.at(instance);
  const auto& cf = *set.queries[inst.query];
  if (collapse_value) return collapse(cf.holds(c.get(), inst.args, domain), db_.semiring());
  return cf.evaluate(c.get(), inst.args, domain);
}

bool RepairContext::adom_contained(const KDatabase& cand) const {
  Rebased c(db_, cand);
  auto ids = c.get().active_domain_ids();
  return std::includes(allowed_.begin(), allowed_.end(), ids.begin(), ids.end());
}

bool RepairContext::satisfies_hard_constraints(const KDatabase& cand) const {
  Rebased c(db_, cand);
  auto domain = domain_of(c.get());
  return std::all_of(hics_.begin(), hics_.end(), [&](const auto& cf) { return cf->holds(c.get(), {}, domain); });
}

bool RepairContext::preserves_hard_queries(const KDatabase& cand) const {
  Rebased c(db_, cand);
  auto domain = domain_of(c.get());
  bool col = collapse_hard_queries();
  Tuple scratch;
  auto value = [&](const GroundQuerySet& set, std::size_t i) {
    const auto& inst = set.instances[i];
    const auto& cf = *set.queries[inst.query];
    const CompiledNode& root = cf.nodes()[cf.root()];
    if (root.op == NodeOp::atom || root.op == NodeOp::negated_atom) {
      scratch.clear();
      for (const auto& a : root.args) {
        switch (a.kind) {
          case CompiledTerm::Kind::slot: scratch.push_back(inst.args[a.index]); break;
          case CompiledTerm::Kind::data: scratch.push_back(a.index); break;
          case CompiledTerm::Kind::constant: scratch.push_back(resolve_constant(c.get(), a.index)); break;
        }
      }
      Value v = c.get().get(root.relation, scratch);
      if (root.op == NodeOp::negated_atom) return v.is_zero() ? Value::one(db_.semiring()) : Value::zero(db_.semiring());
      return col ? collapse(!v.is_zero(), db_.semiring()) : v;
    }
    return col ? collapse(cf.holds(c.get(), inst.args, domain), db_.semiring()) : cf.evaluate(c.get(), inst.args, domain);
  };
  for (std::size_t i = 0; i < plus_.instances.size(); ++i) {
    if (!leq(plus_ref_[i], value(plus_, i))) return false;
  }
  for (std::size_t i = 0; i < minus_.instances.size(); ++i) {
    if (!leq(value(minus_, i), minus_ref_[i])) return false;
  }
  return true;
}

Value RepairContext::inconsistency(const KDatabase& cand) const {
  Rebased c(db_, cand);
  auto domain = domain_of(c.get());
  std::vector<Value> levels;
  for (const auto& cf : sics_) {
    if (fw_.im.fsc == ViolationKind::boolean) {
      levels.push_back(collapse(cf->holds(c.get(), {}, domain), db_.semiring()));
    } else {
      levels.push_back(cf->evaluate(c.get(), {}, domain));
    }
  }
  return aggregate(levels, fw_.im.agg, db_.semiring());
}

bool RepairContext::within_tolerance(const KDatabase& cand) const {
  return inconsistency(cand).numeric() <= fw_.epsilon;
}

bool RepairContext::is_candidate(const KDatabase& cand) const {
  Rebased c(db_, cand);
  return adom_contained(c.get()) && satisfies_hard_constraints(c.get()) && preserves_hard_queries(c.get()) &&
         within_tolerance(c.get());
}

std::vector<Value> RepairContext::sql_values(const KDatabase& cand) const {
  Rebased c(db_, cand);
  auto domain = domain_of(c.get());
  std::vector<Value> out;
  for (const auto& inst : sql_.instances) {
    const auto& cf = *sql_.queries[inst.query];
    out.push_back(collapse_soft_queries() ? collapse(cf.holds(c.get(), inst.args, domain), db_.semiring())
                                          : cf.evaluate(c.get(), inst.args, domain));
  }
  return out;
}

std::vector<Value> RepairContext::sql_deltas(const KDatabase& cand) const {
  auto values = sql_values(cand);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = delta(sql_ref_[i], values[i]);
  return values;
}

Value RepairContext::aggregate_deltas(const std::vector<Value>& deltas) const {
  return aggregate(deltas, fw_.distance_agg, db_.semiring());
}

Value RepairContext::distance(const KDatabase& cand) const { return aggregate_deltas(sql_deltas(cand)); }

bool dominated_or_equal(const std::vector<Value>& a, const std::vector<Value>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!leq(a[i], b[i])) return false;
  }
  return true;
}

OrderResult RepairContext::compare(const KDatabase& a, const KDatabase& b) const {
  bool a_le_b = false;
  bool b_le_a = false;
  if (fw_.order_semantics == OrderSemantics::closeness) {
    auto da = sql_deltas(a);
    auto dbv = sql_deltas(b);
    a_le_b = dominated_or_equal(da, dbv);
    b_le_a = dominated_or_equal(dbv, da);
  } else {
    auto va = sql_values(a);
    auto vb = sql_values(b);
    a_le_b = dominated_or_equal(sql_ref_, va) && dominated_or_equal(va, vb);
    b_le_a = dominated_or_equal(sql_ref_, vb) && dominated_or_equal(vb, va);
  }
  if (a_le_b) return OrderResult::leq;
  if (b_le_a) return OrderResult::gt;
  return OrderResult::incomparable;
}

bool check_hard_queries(const KDatabase& db, const KDatabase& cand, const RepairFramework& fw,
                        const EvalOptions& options) {
  return RepairContext(db, fw, options).preserves_hard_queries(cand);
}

Value distance(const KDatabase& db, const KDatabase& cand, const RepairFramework& fw, const EvalOptions& options) {
  return RepairContext(db, fw, options).distance(cand);
}

OrderResult order_leq(const KDatabase& a, const KDatabase& b, const KDatabase& db, const RepairFramework& fw,
                      const EvalOptions& options) {
  return RepairContext(db, fw, options).compare(a, b);
}

}  // namespace krepair
