#include "krepair/error.hpp"
#include "krepair/logic.hpp"

#include <algorithm>

namespace krepair {

namespace {

class Compiler {
 public:
  Compiler(const Schema& schema, SymbolTable& symbols, std::vector<CompiledNode>& nodes)
      : schema_(schema), symbols_(symbols), nodes_(nodes) {}

  void bind_free(const std::vector<std::string>& names) {
    for (const auto& n : names) scope_.emplace_back(n, next_slot_++);
  }

  std::size_t slot_count() const { return next_slot_; }

  std::size_t compile(const Formula& f) {
    CompiledNode node;
    switch (f.op) {
      case Connective::truth: node.op = NodeOp::truth; break;
      case Connective::falsity: node.op = NodeOp::falsity; break;
      case Connective::atom:
        node.op = NodeOp::atom;
        node.relation = schema_.relation_index(f.relation);
        if (schema_.arity(node.relation) != f.terms.size()) {
          throw UsageError("relation '" + f.relation + "' has arity " + std::to_string(schema_.arity(node.relation)));
        }
        node.args = terms(f.terms);
        break;
      case Connective::equal:
      case Connective::not_equal:
        node.op = f.op == Connective::equal ? NodeOp::equal : NodeOp::not_equal;
        node.args = terms(f.terms);
        break;
      case Connective::negation: {
        const Formula& inner = f.children[0];
        if (inner.op != Connective::atom) throw UsageError("negation above a non-atomic formula after nnf");
        std::size_t idx = compile(inner);
        nodes_[idx].op = NodeOp::negated_atom;
        return idx;
      }
      case Connective::conjunction:
      case Connective::disjunction: {
        node.op = f.op == Connective::conjunction ? NodeOp::conjunction : NodeOp::disjunction;
        std::vector<const Formula*> flat;
        flatten(f, f.op, flat);
        for (const Formula* c : flat) node.children.push_back(compile(*c));
        break;
      }
      case Connective::forall:
      case Connective::exists: {
        node.op = f.op == Connective::forall ? NodeOp::forall : NodeOp::exists;
        node.slot = next_slot_++;
        std::size_t visible = visible_slots();
        scope_.emplace_back(f.variable, node.slot);
        node.children.push_back(compile(f.children[0]));
        scope_.pop_back();
        node.free_slots = nodes_[node.children[0]].free_slots;
        std::erase(node.free_slots, node.slot);
        node.memoize = node.free_slots.size() < visible;
        node.guard = find_guard(node.op, node.slot, node.children[0]);
        nodes_.push_back(std::move(node));
        return nodes_.size() - 1;
      }
      default: throw UsageError("formula must be desugared and in negation normal form before compiling");
    }
    std::vector<std::size_t> slots;
    for (const auto& a : node.args) {
      if (a.kind == CompiledTerm::Kind::slot) slots.push_back(a.index);
    }
    for (std::size_t c : node.children) {
      const auto& fs = nodes_[c].free_slots;
      slots.insert(slots.end(), fs.begin(), fs.end());
    }
    std::sort(slots.begin(), slots.end());
    slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
    node.free_slots = std::move(slots);
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

 private:
  std::optional<std::pair<std::size_t, std::size_t>> find_guard(NodeOp quantifier, std::size_t slot,
                                                                std::size_t body) const {
    while (nodes_[body].op == quantifier) body = nodes_[body].children[0];
    NodeOp guard_op = quantifier == NodeOp::exists ? NodeOp::atom : NodeOp::negated_atom;
    NodeOp junction = quantifier == NodeOp::exists ? NodeOp::conjunction : NodeOp::disjunction;
    std::vector<std::size_t> candidates;
    if (nodes_[body].op == junction) {
      candidates = nodes_[body].children;
    } else {
      candidates.push_back(body);
    }
    for (std::size_t c : candidates) {
      const CompiledNode& n = nodes_[c];
      if (n.op != guard_op) continue;
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (n.args[i].kind == CompiledTerm::Kind::slot && n.args[i].index == slot) return std::pair{n.relation, i};
      }
    }
    return std::nullopt;
  }

  static void flatten(const Formula& f, Connective op, std::vector<const Formula*>& out) {
    if (f.op == op) {
      for (const auto& c : f.children) flatten(c, op, out);
    } else {
      out.push_back(&f);
    }
  }

  std::size_t visible_slots() const {
    std::vector<std::string> names;
    for (const auto& [name, slot] : scope_) names.push_back(name);
    std::sort(names.begin(), names.end());
    return static_cast<std::size_t>(std::unique(names.begin(), names.end()) - names.begin());
  }

  std::vector<CompiledTerm> terms(const std::vector<Term>& ts) {
    std::vector<CompiledTerm> out;
    for (const auto& t : ts) {
      switch (t.kind) {
        case Term::Kind::variable: {
          auto it = std::find_if(scope_.rbegin(), scope_.rend(), [&](const auto& p) { return p.first == t.name; });
          if (it == scope_.rend()) throw UsageError("unbound variable '" + t.name + "'");
          out.push_back({CompiledTerm::Kind::slot, static_cast<std::uint32_t>(it->second)});
          break;
        }
        case Term::Kind::constant: {
          auto idx = schema_.find_constant(t.name);
          if (!idx) throw UsageError("undeclared constant '" + t.name + "'");
          out.push_back({CompiledTerm::Kind::constant, static_cast<std::uint32_t>(*idx)});
          break;
        }
        case Term::Kind::literal:
          out.push_back({CompiledTerm::Kind::data, symbols_.intern(t.name)});
          break;
      }
    }
    return out;
  }

  const Schema& schema_;
  SymbolTable& symbols_;
  std::vector<CompiledNode>& nodes_;
  std::vector<std::pair<std::string, std::size_t>> scope_;
  std::size_t next_slot_ = 0;
};

class Evaluator {
 public:
  Evaluator(const CompiledFormula& cf, const KDatabase& db, std::span<const DataId> free_values,
            std::span<const DataId> domain)
      : nodes_(cf.nodes()),
        db_(db),
        domain_(domain),
        env_(cf.slot_count(), 0),
        zero_(Value::zero(db.semiring())),
        one_(Value::one(db.semiring())),
        value_memo_(cf.has_quantifiers() ? nodes_.size() : 0),
        bool_memo_(cf.has_quantifiers() ? nodes_.size() : 0) {
    if (free_values.size() != cf.free_variables().size()) throw UsageError("wrong number of free-variable values");
    std::copy(free_values.begin(), free_values.end(), env_.begin());
    if (std::is_sorted(domain.begin(), domain.end())) {
      sorted_domain_ = domain;
    } else {
      owned_domain_.assign(domain.begin(), domain.end());
      std::sort(owned_domain_.begin(), owned_domain_.end());
      sorted_domain_ = owned_domain_;
    }
  }

  Value value(std::size_t n) {
    const CompiledNode& node = nodes_[n];
    switch (node.op) {
      case NodeOp::truth: return one_;
      case NodeOp::falsity: return zero_;
      case NodeOp::atom: {
        const KRelation& rel = db_.relation(node.relation);
        auto it = rel.find(tuple(node));
        return it == rel.end() ? zero_ : it->second;
      }
      case NodeOp::negated_atom: return present(node) ? zero_ : one_;
      case NodeOp::equal: return term(node.args[0]) == term(node.args[1]) ? one_ : zero_;
      case NodeOp::not_equal: return term(node.args[0]) != term(node.args[1]) ? one_ : zero_;
      case NodeOp::conjunction: {
        Value acc = one_;
        for (std::size_t c : node.children) {
          acc = mul(acc, value(c));
          if (acc.is_zero()) break;
        }
        return acc;
      }
      case NodeOp::disjunction: {
        Value acc = zero_;
        for (std::size_t c : node.children) acc = add(acc, value(c));
        return acc;
      }
      case NodeOp::forall:
      case NodeOp::exists: {
        auto key = memo_key(node);
        auto& memo = value_memo_[n];
        if (key) {
          if (auto it = memo.find(*key); it != memo.end()) return it->second;
        }
        bool universal = node.op == NodeOp::forall;
        Value acc = universal ? one_ : zero_;
        DataId saved = env_[node.slot];
        for (DataId d : range(node, !universal)) {
          env_[node.slot] = d;
          Value v = value(node.children[0]);
          acc = universal ? mul(acc, v) : add(acc, v);
          if (universal && acc.is_zero()) break;
        }
        env_[node.slot] = saved;
        if (key) memo.emplace(std::move(*key), acc);
        return acc;
      }
    }
    return zero_;
  }

  bool holds(std::size_t n) {
    const CompiledNode& node = nodes_[n];
    switch (node.op) {
      case NodeOp::truth: return true;
      case NodeOp::falsity: return false;
      case NodeOp::atom: return present(node);
      case NodeOp::negated_atom: return !present(node);
      case NodeOp::equal: return term(node.args[0]) == term(node.args[1]);
      case NodeOp::not_equal: return term(node.args[0]) != term(node.args[1]);
      case NodeOp::conjunction:
        return std::all_of(node.children.begin(), node.children.end(), [&](std::size_t c) { return holds(c); });
      case NodeOp::disjunction:
        return std::any_of(node.children.begin(), node.children.end(), [&](std::size_t c) { return holds(c); });
      case NodeOp::forall:
      case NodeOp::exists: {
        auto key = memo_key(node);
        auto& memo = bool_memo_[n];
        if (key) {
          if (auto it = memo.find(*key); it != memo.end()) return it->second;
        }
        bool universal = node.op == NodeOp::forall;
        bool result = universal;
        DataId saved = env_[node.slot];
        for (DataId d : range(node, true)) {
          env_[node.slot] = d;
          if (holds(node.children[0]) != universal) {
            result = !universal;
            break;
          }
        }
        env_[node.slot] = saved;
        if (key) memo.emplace(std::move(*key), result);
        return result;
      }
    }
    return false;
  }

 private:
  DataId term(const CompiledTerm& t) {
    switch (t.kind) {
      case CompiledTerm::Kind::slot: return env_[t.index];
      case CompiledTerm::Kind::data: return t.index;
      case CompiledTerm::Kind::constant: return resolve_constant(db_, t.index);
    }
    return 0;
  }

  const Tuple& tuple(const CompiledNode& node) {
    scratch_.resize(node.args.size());
    for (std::size_t i = 0; i < node.args.size(); ++i) scratch_[i] = term(node.args[i]);
    return scratch_;
  }

  bool present(const CompiledNode& node) { return db_.relation(node.relation).count(tuple(node)) > 0; }

  std::span<const DataId> range(const CompiledNode& node, bool use_guard) {
    if (!use_guard || !node.guard) return domain_;
    auto [it, fresh] = guarded_.try_emplace(*node.guard);
    if (fresh) {
      std::vector<DataId> column;
      for (const auto& [t, v] : db_.relation(node.guard->first)) column.push_back(t[node.guard->second]);
      std::sort(column.begin(), column.end());
      column.erase(std::unique(column.begin(), column.end()), column.end());
      for (DataId d : column) {
        if (std::binary_search(sorted_domain_.begin(), sorted_domain_.end(), d)) it->second.push_back(d);
      }
    }
    return it->second;
  }

  std::optional<std::vector<DataId>> memo_key(const CompiledNode& node) const {
    if (!node.memoize) return std::nullopt;
    std::vector<DataId> key;
    key.reserve(node.free_slots.size());
    for (std::size_t s : node.free_slots) key.push_back(env_[s]);
    return key;
  }

  const std::vector<CompiledNode>& nodes_;
  const KDatabase& db_;
  std::span<const DataId> domain_;
  std::span<const DataId> sorted_domain_;
  std::vector<DataId> owned_domain_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<DataId>> guarded_;
  std::vector<DataId> env_;
  Tuple scratch_;
  Value zero_;
  Value one_;
  std::vector<std::map<std::vector<DataId>, Value>> value_memo_;
  std::vector<std::map<std::vector<DataId>, bool>> bool_memo_;
};

std::vector<DataId> intern_assignment(const KDatabase& db, const std::vector<std::string>& free, const Assignment& s) {
  std::vector<DataId> out;
  for (const auto& name : free) {
    auto it = s.find(name);
    if (it == s.end()) throw UsageError("unbound free variable '" + name + "'");
    out.push_back(db.symbols().intern(it->second));
  }
  return out;
}

// Calls visit(tuple) for every tuple in domain^n, in lexicographic order.
template <typename Visit>
void for_each_tuple(std::span<const DataId> domain, std::size_t n, Visit&& visit) {
  std::vector<DataId> t(n);
  if (n == 0) {
    visit(t);
    return;
  }
  if (domain.empty()) return;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) t[i] = domain[idx[i]];
    visit(t);
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++idx[k] < domain.size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

AnswerTuple tokens(const KDatabase& db, const std::vector<DataId>& t) {
  AnswerTuple out;
  for (DataId id : t) out.push_back(db.symbols().token(id));
  return out;
}

}  // namespace

CompiledFormula::CompiledFormula(const Formula& f, const Schema& schema, SymbolTable& symbols)
    : source_(f), free_(krepair::free_variables(f)) {
  Formula normal = nnf(desugar_counting(f));
  Compiler compiler(schema, symbols, nodes_);
  compiler.bind_free(free_);
  root_ = compiler.compile(normal);
  slot_count_ = compiler.slot_count();
  quantified_ = std::any_of(nodes_.begin(), nodes_.end(),
                            [](const CompiledNode& n) { return n.op == NodeOp::forall || n.op == NodeOp::exists; });
}

Value CompiledFormula::evaluate(const KDatabase& db, std::span<const DataId> free_values,
                                std::span<const DataId> domain) const {
  return Evaluator(*this, db, free_values, domain).value(root_);
}

bool CompiledFormula::holds(const KDatabase& db, std::span<const DataId> free_values,
                            std::span<const DataId> domain) const {
  return Evaluator(*this, db, free_values, domain).holds(root_);
}

DataId resolve_constant(const KDatabase& db, std::uint32_t constant_index) {
  auto v = db.constant(constant_index);
  if (!v) throw UsageError("constant '" + db.schema().constants().at(constant_index).name + "' has no interpretation");
  return *v;
}

std::vector<DataId> quantifier_domain(const KDatabase& db, const EvalOptions& options) {
  std::vector<DataId> out = db.active_domain_ids();
  for (const auto& v : options.extra_values) out.push_back(db.symbols().intern(v));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Value eval_annotated(const KDatabase& db, const Formula& f, const Assignment& s, const EvalOptions& options) {
  CompiledFormula cf(f, db.schema(), db.symbols());
  auto values = intern_assignment(db, cf.free_variables(), s);
  auto domain = quantifier_domain(db, options);
  return cf.evaluate(db, values, domain);
}

bool eval_boolean(const KDatabase& db, const Formula& f, const Assignment& s, const EvalOptions& options) {
  CompiledFormula cf(f, db.schema(), db.symbols());
  auto values = intern_assignment(db, cf.free_variables(), s);
  auto domain = quantifier_domain(db, options);
  return cf.holds(db, values, domain);
}

std::set<AnswerTuple> answers(const KDatabase& db, const Formula& f, const EvalOptions& options) {
  CompiledFormula cf(f, db.schema(), db.symbols());
  auto domain = quantifier_domain(db, options);
  std::set<AnswerTuple> out;
  for_each_tuple(domain, cf.free_variables().size(), [&](const std::vector<DataId>& t) {
    if (cf.holds(db, t, domain)) out.insert(tokens(db, t));
  });
  return out;
}

std::map<AnswerTuple, Value> annotated_answers(const KDatabase& db, const Formula& f, const EvalOptions& options) {
  CompiledFormula cf(f, db.schema(), db.symbols());
  auto domain = quantifier_domain(db, options);
  std::map<AnswerTuple, Value> out;
  for_each_tuple(domain, cf.free_variables().size(), [&](const std::vector<DataId>& t) {
    Value v = cf.evaluate(db, t, domain);
    if (!v.is_zero()) out.emplace(tokens(db, t), std::move(v));
  });
  return out;
}

}  // namespace krepair
