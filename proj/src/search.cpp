#include "search.hpp"

#include "krepair/error.hpp"

#include <algorithm>

namespace krepair::detail {

u64 sat_add(u64 a, u64 b) { return a > kUnbounded - b ? kUnbounded : a + b; }

u64 sat_mul(u64 a, u64 b) {
  if (a == 0 || b == 0) return 0;
  return a > kUnbounded / b ? kUnbounded : a * b;
}

u64 to_u64(const Value& v) {
  switch (v.kind()) {
    case SemiringKind::boolean: return v.is_zero() ? 0 : 1;
    case SemiringKind::natural: {
      const Natural& n = v.integral();
      return n >= Natural(kUnbounded) ? kUnbounded : n.convert_to<u64>();
    }
    case SemiringKind::probability: break;
  }
  throw UsageError("repair search is not available over the probability semiring");
}

std::vector<std::vector<DataId>> typed_columns(const KDatabase& db, std::size_t relation,
                                               const std::vector<DataId>& extras) {
  std::vector<std::vector<DataId>> out;
  for (std::size_t attr : db.schema().relations().at(relation).type) {
    auto dom = db.attribute_domain(attr);
    dom.insert(dom.end(), extras.begin(), extras.end());
    std::sort(dom.begin(), dom.end());
    dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
    out.push_back(std::move(dom));
  }
  return out;
}

void sort_canonically(std::vector<KDatabase>& dbs) {
  std::vector<std::pair<std::vector<Fact>, std::size_t>> keys;
  for (std::size_t i = 0; i < dbs.size(); ++i) keys.emplace_back(canonical_facts(dbs[i]), i);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
             keys.end());
  std::vector<KDatabase> out;
  for (const auto& [facts, i] : keys) out.push_back(std::move(dbs[i]));
  dbs = std::move(out);
}

// ---------------------------------------------------------------------------

PartialCandidate::PartialCandidate(const RepairContext& ctx, const CandidateSpace& space)
    : db_(ctx.db()), boolean_(ctx.db().semiring() == SemiringKind::boolean), binary_(space.binary) {
  std::vector<DataId> extras;
  for (const auto& v : ctx.options().extra_values) extras.push_back(db_.symbols().intern(v));
  allowed_ = ctx.allowed_values();
  std::size_t ids = db_.symbols().size();
  always_.assign(ids, 0);
  for (DataId e : extras) always_[e] = 1;
  for (std::size_t c = 0; c < db_.schema().constants().size(); ++c) {
    if (auto v = db_.constant(c)) always_[*v] = 1;
  }

  const u64 cap = binary_ ? 1 : to_u64(Value::natural(space.cap));
  for (std::size_t r = 0; r < db_.relation_count(); ++r) {
    offset_.push_back(records_.size());
    auto cols = typed_columns(db_, r, extras);
    std::vector<std::vector<std::int32_t>> pos;
    std::vector<std::size_t> stride(cols.size(), 1);
    for (std::size_t i = cols.size(); i-- > 0;) {
      if (i + 1 < cols.size()) stride[i] = stride[i + 1] * cols[i + 1].size();
    }
    for (const auto& col : cols) {
      std::vector<std::int32_t> p(ids, -1);
      for (std::size_t k = 0; k < col.size(); ++k) p[col[k]] = static_cast<std::int32_t>(k);
      pos.push_back(std::move(p));
    }
    std::size_t count = 1;
    for (const auto& col : cols) count *= col.size();
    for (std::size_t k = 0; k < count; ++k) {
      Tuple t(cols.size());
      std::size_t rest = k;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        t[i] = cols[i][rest / stride[i]];
        rest %= stride[i];
      }
      records_.emplace_back(r, std::move(t));
    }
    columns_.push_back(std::move(cols));
    pos_.push_back(std::move(pos));
    stride_.push_back(std::move(stride));
  }
  if (records_.size() != space.records.size()) throw std::logic_error("candidate space mismatch");

  certain_.assign(ids, 0);
  possible_.assign(ids, 0);
  for (const auto& [r, t] : records_) {
    std::vector<DataId> d = t;
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    for (DataId id : d) ++possible_[id];
    distinct_.push_back(std::move(d));
    lo_.push_back(0);
    hi_.push_back(cap);
    u64 ref = to_u64(db_.get(r, t));
    reference_.push_back(binary_ ? std::min<u64>(ref, 1) : std::min(ref, cap));
  }
}

std::optional<std::size_t> PartialCandidate::find(std::size_t relation, std::span<const DataId> tuple) const {
  std::size_t idx = offset_[relation];
  const auto& pos = pos_[relation];
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (tuple[i] >= pos[i].size() || pos[i][tuple[i]] < 0) return std::nullopt;
    idx += static_cast<std::size_t>(pos[i][tuple[i]]) * stride_[relation][i];
  }
  return idx;
}

int PartialCandidate::membership(DataId d) const {
  if (d >= always_.size()) return 0;
  if (always_[d] || certain_[d] > 0) return 2;
  return possible_[d] > 0 ? 1 : 0;
}

void PartialCandidate::shift(std::size_t v, u64 old_lo, u64 old_hi, u64 lo, u64 hi) {
  bool was_possible = old_hi > 0, now_possible = hi > 0;
  bool was_certain = old_lo > 0, now_certain = lo > 0;
  for (DataId d : distinct_[v]) {
    if (was_possible != now_possible) {
      if (now_possible) {
        if (possible_[d]++ == 0) ++epoch_;
      } else if (--possible_[d] == 0) {
        ++epoch_;
      }
    }
    if (was_certain != now_certain) {
      if (now_certain) {
        if (certain_[d]++ == 0) ++epoch_;
      } else if (--certain_[d] == 0) {
        ++epoch_;
      }
    }
  }
}

bool PartialCandidate::narrow(std::size_t v, u64 lo, u64 hi) {
  u64 nlo = std::max(lo_[v], lo);
  u64 nhi = std::min(hi_[v], hi);
  if (nlo > nhi) return false;
  if (nlo == lo_[v] && nhi == hi_[v]) return true;
  trail_.push_back({v, lo_[v], hi_[v]});
  shift(v, lo_[v], hi_[v], nlo, nhi);
  lo_[v] = nlo;
  hi_[v] = nhi;
  return true;
}

void PartialCandidate::undo(std::size_t mark) {
  while (trail_.size() > mark) {
    Step s = trail_.back();
    trail_.pop_back();
    shift(s.v, lo_[s.v], hi_[s.v], s.lo, s.hi);
    lo_[s.v] = s.lo;
    hi_[s.v] = s.hi;
  }
}

KDatabase PartialCandidate::build() const {
  KDatabase out = db_.empty_copy();
  for (std::size_t v = 0; v < records_.size(); ++v) {
    if (lo_[v] == 0) continue;
    Value value = boolean_ ? Value::boolean(true) : Value::natural(Natural(lo_[v]));
    out.set(records_[v].first, records_[v].second, std::move(value));
  }
  return out;
}

// ---------------------------------------------------------------------------

IntervalEvaluator::IntervalEvaluator(const PartialCandidate& pc, const KDatabase& db, const CompiledFormula& cf,
                                     std::span<const DataId> args)
    : pc_(pc),
      db_(db),
      nodes_(cf.nodes()),
      root_(cf.root()),
      env_(cf.slot_count(), 0) {
  if (args.size() != cf.free_variables().size()) throw UsageError("wrong number of free-variable values");
  if (cf.has_quantifiers()) {
    value_memo_.resize(nodes_.size());
    possible_memo_.resize(nodes_.size());
    certain_memo_.resize(nodes_.size());
  }
  std::copy(args.begin(), args.end(), env_.begin());
}

DataId IntervalEvaluator::term(const CompiledTerm& t) const {
  switch (t.kind) {
    case CompiledTerm::Kind::slot: return env_[t.index];
    case CompiledTerm::Kind::data: return t.index;
    case CompiledTerm::Kind::constant: return resolve_constant(db_, t.index);
  }
  return 0;
}

Interval IntervalEvaluator::atom(const CompiledNode& node) {
  scratch_.resize(node.args.size());
  for (std::size_t i = 0; i < node.args.size(); ++i) scratch_[i] = term(node.args[i]);
  auto v = pc_.find(node.relation, scratch_);
  return v ? pc_.range(*v) : Interval{0, 0};
}

const std::vector<DataId>& IntervalEvaluator::range(const CompiledNode& node, bool use_guard) const {
  if (use_guard && node.guard) return pc_.column(node.guard->first, node.guard->second);
  return pc_.allowed();
}

std::optional<std::vector<DataId>> IntervalEvaluator::key(const CompiledNode& node) const {
  if (!node.memoize) return std::nullopt;
  std::vector<DataId> k;
  k.reserve(node.free_slots.size());
  for (std::size_t s : node.free_slots) k.push_back(env_[s]);
  return k;
}

u64 IntervalEvaluator::add(u64 a, u64 b) const {
  u64 s = sat_add(a, b);
  return pc_.saturating_sum() ? std::min<u64>(s, 1) : s;
}

Interval IntervalEvaluator::value(std::size_t n) {
  const CompiledNode& node = nodes_[n];
  switch (node.op) {
    case NodeOp::truth: return {1, 1};
    case NodeOp::falsity: return {0, 0};
    case NodeOp::atom: return atom(node);
    case NodeOp::negated_atom: {
      Interval a = atom(node);
      return {a.hi == 0 ? 1u : 0u, a.lo == 0 ? 1u : 0u};
    }
    case NodeOp::equal:
    case NodeOp::not_equal: {
      bool same = term(node.args[0]) == term(node.args[1]);
      u64 b = same == (node.op == NodeOp::equal) ? 1 : 0;
      return {b, b};
    }
    case NodeOp::conjunction: {
      Interval acc{1, 1};
      for (std::size_t c : node.children) {
        Interval v = value(c);
        acc = {sat_mul(acc.lo, v.lo), sat_mul(acc.hi, v.hi)};
        if (acc.hi == 0) break;
      }
      return acc;
    }
    case NodeOp::disjunction: {
      Interval acc{0, 0};
      for (std::size_t c : node.children) {
        Interval v = value(c);
        acc = {add(acc.lo, v.lo), add(acc.hi, v.hi)};
      }
      return acc;
    }
    case NodeOp::forall:
    case NodeOp::exists: {
      auto k = key(node);
      if (k) {
        if (auto it = value_memo_[n].find(*k); it != value_memo_[n].end()) return it->second;
      }
      bool universal = node.op == NodeOp::forall;
      Interval acc = universal ? Interval{1, 1} : Interval{0, 0};
      DataId saved = env_[node.slot];
      for (DataId d : range(node, !universal)) {
        int m = pc_.membership(d);
        if (m == 0) continue;
        env_[node.slot] = d;
        Interval v = value(node.children[0]);
        if (universal) {
          if (m == 1) v = {std::min<u64>(v.lo, 1), std::max<u64>(v.hi, 1)};
          acc = {sat_mul(acc.lo, v.lo), sat_mul(acc.hi, v.hi)};
          if (acc.hi == 0) break;
        } else {
          if (m == 2) acc.lo = add(acc.lo, v.lo);
          acc.hi = add(acc.hi, v.hi);
        }
      }
      env_[node.slot] = saved;
      if (k) value_memo_[n].emplace(std::move(*k), acc);
      return acc;
    }
  }
  return {0, 0};
}

bool IntervalEvaluator::possible(std::size_t n) {
  const CompiledNode& node = nodes_[n];
  switch (node.op) {
    case NodeOp::truth: return true;
    case NodeOp::falsity: return false;
    case NodeOp::atom: return atom(node).hi > 0;
    case NodeOp::negated_atom: return atom(node).lo == 0;
    case NodeOp::equal: return term(node.args[0]) == term(node.args[1]);
    case NodeOp::not_equal: return term(node.args[0]) != term(node.args[1]);
    case NodeOp::conjunction:
      return std::all_of(node.children.begin(), node.children.end(), [&](std::size_t c) { return possible(c); });
    case NodeOp::disjunction:
      return std::any_of(node.children.begin(), node.children.end(), [&](std::size_t c) { return possible(c); });
    case NodeOp::forall:
    case NodeOp::exists: {
      auto k = key(node);
      if (k) {
        if (auto it = possible_memo_[n].find(*k); it != possible_memo_[n].end()) return it->second;
      }
      bool universal = node.op == NodeOp::forall;
      bool result = universal;
      DataId saved = env_[node.slot];
      for (DataId d : range(node, true)) {
        int m = pc_.membership(d);
        // A universal is only at risk from values certainly in the domain.
        if (m == 0 || (universal && m == 1)) continue;
        env_[node.slot] = d;
        if (possible(node.children[0]) != universal) {
          result = !universal;
          break;
        }
      }
      env_[node.slot] = saved;
      if (k) possible_memo_[n].emplace(std::move(*k), result);
      return result;
    }
  }
  return false;
}

bool IntervalEvaluator::certain(std::size_t n) {
  const CompiledNode& node = nodes_[n];
  switch (node.op) {
    case NodeOp::truth: return true;
    case NodeOp::falsity: return false;
    case NodeOp::atom: return atom(node).lo > 0;
    case NodeOp::negated_atom: return atom(node).hi == 0;
    case NodeOp::equal: return term(node.args[0]) == term(node.args[1]);
    case NodeOp::not_equal: return term(node.args[0]) != term(node.args[1]);
    case NodeOp::conjunction:
      return std::all_of(node.children.begin(), node.children.end(), [&](std::size_t c) { return certain(c); });
    case NodeOp::disjunction:
      return std::any_of(node.children.begin(), node.children.end(), [&](std::size_t c) { return certain(c); });
    case NodeOp::forall:
    case NodeOp::exists: {
      auto k = key(node);
      if (k) {
        if (auto it = certain_memo_[n].find(*k); it != certain_memo_[n].end()) return it->second;
      }
      bool universal = node.op == NodeOp::forall;
      bool result = universal;
      DataId saved = env_[node.slot];
      for (DataId d : range(node, true)) {
        int m = pc_.membership(d);
        if (m == 0 || (!universal && m == 1)) continue;
        env_[node.slot] = d;
        if (certain(node.children[0]) != universal) {
          result = !universal;
          break;
        }
      }
      env_[node.slot] = saved;
      if (k) certain_memo_[n].emplace(std::move(*k), result);
      return result;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------

namespace {

struct Check {
  enum class Kind { hard, plus, minus, soft, measure };
  Kind kind = Kind::hard;
  const CompiledFormula* cf = nullptr;
  std::vector<DataId> args;
  u64 ref = 0;
  bool collapsed = false;
  std::vector<std::size_t> relations;
  bool quantified = false;
};

void describe(Check& c, const CompiledFormula& cf) {
  std::set<std::size_t> rels;
  for (const auto& n : cf.nodes()) {
    if (n.op == NodeOp::atom || n.op == NodeOp::negated_atom) rels.insert(n.relation);
    if (n.op == NodeOp::forall || n.op == NodeOp::exists) c.quantified = true;
  }
  c.relations.insert(c.relations.end(), rels.begin(), rels.end());
}

bool is_atomic(const CompiledFormula& cf) {
  NodeOp op = cf.nodes()[cf.root()].op;
  return op == NodeOp::atom || op == NodeOp::negated_atom;
}

}  // namespace

struct BranchAndBound::Impl {
  const RepairContext& ctx;
  PartialCandidate pc;
  std::uint64_t budget;
  bool feasible = true;
  std::vector<const CompiledFormula*> measure_parts;
  std::vector<Check> checks;
  std::vector<Check> softs;
  // Dependency index: which checks to re-run after a record is assigned.
  std::vector<std::vector<std::size_t>> checks_by_relation, softs_by_relation;
  std::vector<std::size_t> checks_quantified, softs_quantified;
  std::map<std::size_t, std::vector<std::size_t>> checks_by_record, softs_by_record;
  std::vector<u64> delta_lb;
  std::vector<std::pair<std::size_t, u64>> delta_trail;
  std::vector<std::size_t> order;
  std::vector<std::uint64_t> seen_checks, seen_softs;
  std::uint64_t stamp = 0;
  SearchHooks* hooks = nullptr;
  std::uint64_t* nodes = nullptr;

  Impl(const RepairContext& c, const CandidateSpace& space, std::uint64_t b) : ctx(c), pc(c, space), budget(b) {
    const bool collapse = ctx.collapse_hard_queries();
    for (const auto& cf : ctx.hard_constraints()) add_check({Check::Kind::hard, cf.get(), {}, 0, false, {}, false});
    auto add_queries = [&](const GroundQuerySet& set, const std::vector<Value>& refs, Check::Kind kind) {
      for (std::size_t i = 0; i < set.instances.size(); ++i) {
        const auto& inst = set.instances[i];
        Check c{kind, set.queries[inst.query].get(), inst.args, to_u64(refs[i]), collapse, {}, false};
        if (kind == Check::Kind::plus && c.ref == 0) continue;
        if (kind == Check::Kind::minus && (c.ref == kUnbounded || (collapse && c.ref >= 1))) continue;
        if (is_atomic(*c.cf) && pin(c)) continue;
        add_check(std::move(c));
      }
    };
    add_queries(ctx.hql_plus(), ctx.hql_plus_reference(), Check::Kind::plus);
    add_queries(ctx.hql_minus(), ctx.hql_minus_reference(), Check::Kind::minus);
    if (!ctx.soft_constraints().empty()) {
      Check m{Check::Kind::measure, nullptr, {}, 0, false, {}, false};
      std::set<std::size_t> rels;
      for (const auto& cf : ctx.soft_constraints()) {
        measure_parts.push_back(cf.get());
        Check part;
        describe(part, *cf);
        rels.insert(part.relations.begin(), part.relations.end());
        m.quantified = m.quantified || part.quantified;
      }
      m.relations.assign(rels.begin(), rels.end());
      index(m, checks.size(), checks_by_relation, checks_quantified, checks_by_record);
      checks.push_back(std::move(m));
    }
    const auto& sql = ctx.sql();
    for (std::size_t i = 0; i < sql.instances.size(); ++i) {
      const auto& inst = sql.instances[i];
      Check c{Check::Kind::soft, sql.queries[inst.query].get(), inst.args, to_u64(ctx.sql_reference()[i]),
              ctx.collapse_soft_queries(), {}, false};
      describe(c, *c.cf);
      index(c, softs.size(), softs_by_relation, softs_quantified, softs_by_record);
      softs.push_back(std::move(c));
    }
    seen_checks.assign(checks.size(), 0);
    seen_softs.assign(softs.size(), 0);
    delta_lb.assign(softs.size(), 0);
    if (!feasible) return;
    for (const auto& c : checks) {
      if (!passes(c)) {
        feasible = false;
        return;
      }
    }
    for (std::size_t i = 0; i < softs.size(); ++i) delta_lb[i] = soft_bound(softs[i]);
    delta_trail.clear();
    for (std::size_t v = 0; v < pc.size(); ++v) {
      if (!pc.fixed(v)) order.push_back(v);
    }
  }

  void add_check(Check c) {
    describe(c, *c.cf);
    index(c, checks.size(), checks_by_relation, checks_quantified, checks_by_record);
    checks.push_back(std::move(c));
  }

  void index(const Check& c, std::size_t at, std::vector<std::vector<std::size_t>>& by_relation,
             std::vector<std::size_t>& quantified, std::map<std::size_t, std::vector<std::size_t>>& by_record) {
    if (c.cf && is_atomic(*c.cf)) {
      if (auto v = record_of(c)) by_record[*v].push_back(at);
      return;
    }
    by_relation.resize(ctx.db().relation_count());
    for (std::size_t r : c.relations) by_relation[r].push_back(at);
    if (c.quantified) quantified.push_back(at);
  }

  std::optional<std::size_t> record_of(const Check& c) const {
    const CompiledNode& node = c.cf->nodes()[c.cf->root()];
    Tuple t;
    for (const auto& a : node.args) {
      switch (a.kind) {
        case CompiledTerm::Kind::slot: t.push_back(c.args[a.index]); break;
        case CompiledTerm::Kind::data: t.push_back(a.index); break;
        case CompiledTerm::Kind::constant: t.push_back(resolve_constant(ctx.db(), a.index)); break;
      }
    }
    return pc.find(node.relation, t);
  }

  // Turns a ground hard-query atom into a static annotation range.
  bool pin(const Check& c) {
    bool negated = c.cf->nodes()[c.cf->root()].op == NodeOp::negated_atom;
    auto v = record_of(c);
    u64 lo = 0, hi = kUnbounded;
    if (!negated) {
      if (c.kind == Check::Kind::plus) {
        lo = c.collapsed ? 1 : c.ref;
      } else {
        hi = c.ref;
      }
    } else if (c.kind == Check::Kind::plus) {
      hi = 0;  // absent in db, so absent here
    } else if (c.ref == 0) {
      lo = 1;  // present in db, so present here
    } else {
      return true;
    }
    if (!v) {
      if (lo > 0) feasible = false;
      return true;
    }
    if (!pc.narrow(*v, lo, hi)) feasible = false;
    return true;
  }

  bool passes(const Check& c) {
    if (c.kind == Check::Kind::measure) return measure_ok();
    IntervalEvaluator ev(pc, ctx.db(), *c.cf, c.args);
    switch (c.kind) {
      case Check::Kind::hard: return ev.possible();
      case Check::Kind::plus: return c.collapsed ? ev.possible() : ev.value().hi >= c.ref;
      case Check::Kind::minus: return c.collapsed ? !ev.certain() : ev.value().lo <= c.ref;
      default: return true;
    }
  }

  bool measure_ok() {
    const bool boolean = ctx.db().semiring() == SemiringKind::boolean;
    const auto& im = ctx.framework().im;
    u64 acc = 0;
    for (const CompiledFormula* cf : measure_parts) {
      IntervalEvaluator ev(pc, ctx.db(), *cf, {});
      u64 level = im.fsc == ViolationKind::boolean ? (ev.certain() ? 1 : 0) : ev.value().lo;
      switch (im.agg) {
        case AggregateKind::sum: acc = boolean ? std::min<u64>(1, sat_add(acc, level)) : sat_add(acc, level); break;
        case AggregateKind::max: acc = std::max(acc, level); break;
        case AggregateKind::count_nonzero:
          acc = boolean ? std::max<u64>(acc, level > 0) : sat_add(acc, level > 0 ? 1 : 0);
          break;
      }
    }
    if (acc == kUnbounded) return true;  // saturated, cannot decide
    return Rational(Natural(acc)) <= ctx.framework().epsilon;
  }

  u64 soft_bound(const Check& c) {
    IntervalEvaluator ev(pc, ctx.db(), *c.cf, c.args);
    if (c.collapsed) {
      if (c.ref == 0) return ev.certain() ? 1 : 0;
      return ev.possible() ? 0 : 1;
    }
    Interval v = ev.value();
    if (c.ref < v.lo) return v.lo == kUnbounded ? kUnbounded : v.lo - c.ref;
    if (c.ref > v.hi) return c.ref - v.hi;
    return 0;
  }

  bool propagate(std::size_t v, bool adom_changed) {
    ++stamp;
    std::size_t r = pc.record(v).first;
    auto visit_checks = [&](std::size_t i) {
      if (seen_checks[i] == stamp) return true;
      seen_checks[i] = stamp;
      return passes(checks[i]);
    };
    if (auto it = checks_by_record.find(v); it != checks_by_record.end()) {
      for (std::size_t i : it->second) {
        if (!visit_checks(i)) return false;
      }
    }
    if (r < checks_by_relation.size()) {
      for (std::size_t i : checks_by_relation[r]) {
        if (!visit_checks(i)) return false;
      }
    }
    if (adom_changed) {
      for (std::size_t i : checks_quantified) {
        if (!visit_checks(i)) return false;
      }
    }
    auto visit_soft = [&](std::size_t i) {
      if (seen_softs[i] == stamp) return;
      seen_softs[i] = stamp;
      u64 b = soft_bound(softs[i]);
      if (b != delta_lb[i]) {
        delta_trail.emplace_back(i, delta_lb[i]);
        delta_lb[i] = b;
      }
    };
    if (auto it = softs_by_record.find(v); it != softs_by_record.end()) {
      for (std::size_t i : it->second) visit_soft(i);
    }
    if (r < softs_by_relation.size()) {
      for (std::size_t i : softs_by_relation[r]) visit_soft(i);
    }
    if (adom_changed) {
      for (std::size_t i : softs_quantified) visit_soft(i);
    }
    return true;
  }

  u64 objective() const {
    const bool boolean = ctx.db().semiring() == SemiringKind::boolean;
    u64 acc = 0;
    if (hooks->objective == SearchHooks::Objective::total) {
      for (u64 d : delta_lb) acc = sat_add(acc, d);
      return acc;
    }
    for (u64 d : delta_lb) {
      switch (ctx.framework().distance_agg) {
        case AggregateKind::sum: acc = boolean ? std::max<u64>(acc, d > 0) : sat_add(acc, d); break;
        case AggregateKind::max: acc = std::max(acc, d); break;
        case AggregateKind::count_nonzero: acc = boolean ? std::max<u64>(acc, d > 0) : acc + (d > 0 ? 1 : 0); break;
      }
    }
    return acc;
  }

  bool within_bounds() const {
    if (hooks->objective != SearchHooks::Objective::none && hooks->limit) {
      if (auto lim = hooks->limit(); lim && objective() > *lim) return false;
    }
    if (hooks->dominators) {
      for (const auto& d : *hooks->dominators) {
        bool all = true, strict = false;
        for (std::size_t i = 0; i < d.size() && all; ++i) {
          if (delta_lb[i] < d[i]) all = false;
          if (delta_lb[i] > d[i]) strict = true;
        }
        if (all && strict) return false;
      }
    }
    return true;
  }

  bool leaf() {
    KDatabase cand = pc.build();
    if (!ctx.is_candidate(cand)) return false;
    return hooks->leaf(cand, ctx.sql_deltas(cand));
  }

  bool dfs(std::size_t depth) {
    if (++*nodes > budget) {
      throw BudgetExceeded("search node budget exhausted (raise --max-candidates)");
    }
    if (depth == order.size()) return leaf();
    std::size_t v = order[depth];
    Interval range = pc.range(v);
    u64 ref = std::clamp(pc.reference(v), range.lo, range.hi);
    std::vector<u64> values;
    for (u64 x = range.lo;; ++x) {
      values.push_back(x);
      if (x == range.hi) break;
    }
    std::stable_sort(values.begin(), values.end(), [&](u64 a, u64 b) {
      u64 da = a > ref ? a - ref : ref - a;
      u64 db = b > ref ? b - ref : ref - b;
      return da < db;
    });
    for (u64 x : values) {
      std::size_t mark = pc.mark();
      std::size_t dmark = delta_trail.size();
      std::uint64_t epoch = pc.adom_epoch();
      pc.narrow(v, x, x);
      bool stop = false;
      if (propagate(v, epoch != pc.adom_epoch()) && within_bounds()) stop = dfs(depth + 1);
      while (delta_trail.size() > dmark) {
        delta_lb[delta_trail.back().first] = delta_trail.back().second;
        delta_trail.pop_back();
      }
      pc.undo(mark);
      if (stop) return true;
    }
    return false;
  }
};

BranchAndBound::BranchAndBound(const RepairContext& ctx, const CandidateSpace& space, std::uint64_t budget)
    : impl_(std::make_unique<Impl>(ctx, space, budget)) {}

BranchAndBound::~BranchAndBound() = default;

void BranchAndBound::run(SearchHooks& hooks) {
  if (!impl_->feasible) return;
  impl_->hooks = &hooks;
  impl_->nodes = &nodes_;
  if (!impl_->within_bounds()) return;
  impl_->dfs(0);
}

}  // namespace krepair::detail
