#include "krepair/engine.hpp"

#include "krepair/error.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace krepair {

namespace {

// One conjunct of the matrix: the compiled formula must evaluate to `want`
// on the guessed relations.
struct Conjunct {
  std::shared_ptr<const CompiledFormula> formula;
  std::vector<DataId> args;
  bool want = true;
  bool quantifier_free = true;
  std::size_t ready_at = 0;  // last guessed atom it mentions, plus one
};

class SecondOrderSearch {
 public:
  SecondOrderSearch(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds)
      : db_(db), options_{bounds.extra_values}, budget_(bounds.max_candidates), guess_(make_guess(db)) {
    std::vector<DataId> extras;
    for (const auto& v : bounds.extra_values) extras.push_back(db.symbols().intern(v));
    for (std::size_t r = 0; r < db.relation_count(); ++r) {
      std::vector<std::vector<DataId>> columns;
      for (std::size_t attr : db.schema().relations()[r].type) {
        auto values = db.attribute_domain(attr);
        for (DataId e : extras) {
          if (std::find(values.begin(), values.end(), e) == values.end()) values.push_back(e);
        }
        columns.push_back(std::move(values));
      }
      Tuple t;
      collect(r, columns, t);
    }

    auto domain = quantifier_domain(db, options_);
    // Relativised hard queries, folded into one set: phi for HQL+ and
    // not-psi for HQL-, each required on S whenever it holds on db.
    auto plus = relativise(fw.hql_plus, db, options_);
    for (const auto& inst : plus.instances) {
      const auto& cf = plus.queries[inst.query];
      if (cf->holds(db, inst.args, domain)) add(cf, inst.args, true);
    }
    auto minus = relativise(fw.hql_minus, db, options_);
    for (const auto& inst : minus.instances) {
      const auto& cf = minus.queries[inst.query];
      if (!cf->holds(db, inst.args, domain)) add(cf, inst.args, false);
    }
    for (const auto& phi : fw.hard_constraints) {
      if (!expand_universal(phi, domain)) {
        add(std::make_shared<const CompiledFormula>(phi, db.schema(), db.symbols()), {}, true);
      }
    }
  }

  bool run() {
    for (const auto& c : conjuncts_) {
      if (c.quantifier_free && c.ready_at == 0 && !satisfied(c)) return false;
    }
    return extend(0);
  }

 private:
  static bool quantifier_free(const Formula& f) {
    if (f.op == Connective::forall || f.op == Connective::exists || f.op == Connective::at_most ||
        f.op == Connective::at_least) {
      return false;
    }
    return std::all_of(f.children.begin(), f.children.end(), quantifier_free);
  }

  static void disjuncts(const Formula& f, std::vector<const Formula*>& out) {
    if (f.op == Connective::disjunction) {
      for (const auto& c : f.children) disjuncts(c, out);
    } else {
      out.push_back(&f);
    }
  }

  // A sentence "forall x1..xk M" with quantifier-free M in which every xi
  // occurs in a negated atom that is a top-level disjunct of M. Such an M
  // is true whenever some xi lies outside adom(S), so the sentence equals
  // the conjunction of its groundings over the whole db universe, each of
  // which is quantifier-free and can be checked early.
  bool expand_universal(const Formula& phi, const std::vector<DataId>& universe) {
    const Formula* body = &phi;
    std::set<std::string> bound;
    while (body->op == Connective::forall) {
      bound.insert(body->variable);
      body = &body->children[0];
    }
    if (bound.empty() || !quantifier_free(*body)) return false;
    Formula matrix = nnf(desugar_counting(*body));
    std::vector<const Formula*> parts;
    disjuncts(matrix, parts);
    std::set<std::string> guarded;
    for (const Formula* d : parts) {
      if (d->op != Connective::negation || d->children[0].op != Connective::atom) continue;
      for (const auto& t : d->children[0].terms) {
        if (t.kind == Term::Kind::variable) guarded.insert(t.name);
      }
    }
    if (!std::includes(guarded.begin(), guarded.end(), bound.begin(), bound.end())) return false;
    auto cf = std::make_shared<const CompiledFormula>(matrix, db_.schema(), db_.symbols());
    std::size_t k = cf->free_variables().size();
    std::vector<DataId> args(k);
    std::function<void(std::size_t)> ground = [&](std::size_t i) {
      if (i == k) {
        add(cf, args, true);
        return;
      }
      for (DataId d : universe) {
        args[i] = d;
        ground(i + 1);
      }
    };
    ground(0);
    return true;
  }

  static KDatabase make_guess(const KDatabase& db) {
    KDatabase s(db.schema_ptr(), SemiringKind::boolean, db.symbols_ptr());
    for (std::size_t c = 0; c < db.schema().constants().size(); ++c) {
      if (auto v = db.constant(c)) s.set_constant(c, *v);
    }
    return s;
  }

  void collect(std::size_t r, const std::vector<std::vector<DataId>>& columns, Tuple& t) {
    if (t.size() == columns.size()) {
      index_[{r, t}] = atoms_.size();
      atoms_.emplace_back(r, t);
      return;
    }
    for (DataId d : columns[t.size()]) {
      t.push_back(d);
      collect(r, columns, t);
      t.pop_back();
    }
  }

  void add(std::shared_ptr<const CompiledFormula> cf, std::vector<DataId> args, bool want) {
    Conjunct c{std::move(cf), std::move(args), want, true, 0};
    for (const auto& node : c.formula->nodes()) {
      if (node.op == NodeOp::forall || node.op == NodeOp::exists) c.quantifier_free = false;
      if (node.op != NodeOp::atom && node.op != NodeOp::negated_atom) continue;
      Tuple t;
      bool ground = true;
      for (const auto& a : node.args) {
        if (a.kind == CompiledTerm::Kind::slot) {
          if (a.index >= c.args.size()) {
            ground = false;
            break;
          }
          t.push_back(c.args[a.index]);
        } else if (a.kind == CompiledTerm::Kind::data) {
          t.push_back(a.index);
        } else {
          t.push_back(resolve_constant(db_, a.index));
        }
      }
      if (!ground) continue;
      if (auto it = index_.find({node.relation, t}); it != index_.end()) {
        c.ready_at = std::max(c.ready_at, it->second + 1);
      }
    }
    if (c.quantifier_free) {
      by_ready_[c.ready_at].push_back(conjuncts_.size());
    } else {
      deferred_.push_back(conjuncts_.size());
    }
    conjuncts_.push_back(std::move(c));
  }

  bool satisfied(const Conjunct& c) {
    auto domain = quantifier_domain(guess_, options_);
    return c.formula->holds(guess_, c.args, domain) == c.want;
  }

  bool ready(std::size_t upto) {
    auto it = by_ready_.find(upto);
    if (it == by_ready_.end()) return true;
    return std::all_of(it->second.begin(), it->second.end(), [&](std::size_t i) { return satisfied(conjuncts_[i]); });
  }

  bool extend(std::size_t i) {
    if (++nodes_ > budget_) {
      throw BudgetExceeded("second-order search exceeded " + std::to_string(budget_) +
                           " nodes (raise --max-candidates)");
    }
    if (i == atoms_.size()) {
      return std::all_of(deferred_.begin(), deferred_.end(), [&](std::size_t k) { return satisfied(conjuncts_[k]); });
    }
    for (bool present : {false, true}) {
      guess_.set(atoms_[i].first, atoms_[i].second, Value::boolean(present));
      if (ready(i + 1) && extend(i + 1)) return true;
    }
    guess_.set(atoms_[i].first, atoms_[i].second, Value::boolean(false));
    return false;
  }

  const KDatabase& db_;
  EvalOptions options_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  KDatabase guess_;
  std::vector<std::pair<std::size_t, Tuple>> atoms_;
  std::map<std::pair<std::size_t, Tuple>, std::size_t> index_;
  std::vector<Conjunct> conjuncts_;
  std::map<std::size_t, std::vector<std::size_t>> by_ready_;
  std::vector<std::size_t> deferred_;
};

}  // namespace

bool eso_exists_repair_check(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds) {
  if (fw.mode != AnnotationMode::unaware) {
    throw UsageError("the second-order existence check needs an annotation-unaware framework");
  }
  if (!fw.soft_constraints.empty()) {
    throw UsageError("the second-order existence check needs a framework without soft constraints");
  }
  if (db.semiring() == SemiringKind::probability) {
    throw UsageError("repair search is not available over the probability semiring");
  }
  return SecondOrderSearch(db, fw, bounds).run();
}

}  // namespace krepair
