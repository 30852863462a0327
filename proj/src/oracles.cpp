#include "krepair/error.hpp"
#include "krepair/reductions.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>

namespace krepair {

bool oracle_3col(const Graph& g, std::size_t max_vertices) {
  if (g.vertices.size() > max_vertices) {
    throw UsageError("graph has " + std::to_string(g.vertices.size()) + " vertices, above the oracle bound of " +
                     std::to_string(max_vertices));
  }
  std::map<std::string, std::size_t> index;
  for (const auto& v : g.vertices) index.emplace(v, index.size());
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& [a, b] : g.edges) {
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end()) throw UsageError("edge endpoint is not a vertex");
    edges.emplace_back(ia->second, ib->second);
  }
  std::vector<int> colour(g.vertices.size(), 0);
  while (true) {
    if (std::all_of(edges.begin(), edges.end(), [&](auto e) { return colour[e.first] != colour[e.second]; })) {
      return true;
    }
    std::size_t k = 0;
    while (k < colour.size() && ++colour[k] == 3) colour[k++] = 0;
    if (k == colour.size()) return false;
  }
}

namespace {

// Calls visit with each assignment of the formula's variables.
void assignments(const Cnf3& f, const std::function<void(const std::map<int, bool>&)>& visit) {
  auto vars = f.variables();
  if (vars.size() > 24) throw UsageError("formula has too many variables for the brute-force oracle");
  for (std::uint32_t mask = 0; mask < (1u << vars.size()); ++mask) {
    std::map<int, bool> value;
    for (std::size_t i = 0; i < vars.size(); ++i) value[vars[i]] = mask >> i & 1;
    visit(value);
  }
}

std::size_t true_literals(const std::array<Literal, 3>& clause, const std::map<int, bool>& value) {
  std::size_t n = 0;
  for (const auto& l : clause) n += value.at(l.variable) == l.positive;
  return n;
}

}  // namespace

bool oracle_1in3sat(const Cnf3& f) {
  bool found = false;
  assignments(f, [&](const std::map<int, bool>& value) {
    found = found || std::all_of(f.clauses.begin(), f.clauses.end(),
                                 [&](const auto& c) { return true_literals(c, value) == 1; });
  });
  return found;
}

std::optional<std::size_t> max_true(const Cnf3& f) {
  std::optional<std::size_t> best;
  assignments(f, [&](const std::map<int, bool>& value) {
    if (!std::all_of(f.clauses.begin(), f.clauses.end(), [&](const auto& c) { return true_literals(c, value) > 0; })) {
      return;
    }
    std::size_t ones = std::count_if(value.begin(), value.end(), [](const auto& kv) { return kv.second; });
    best = std::max(best.value_or(0), ones);
  });
  return best;
}

bool oracle_maxtrue_eq(const Cnf3& f0, const Cnf3& f1) { return max_true(f0) == max_true(f1); }

namespace {

using Mask = std::uint64_t;

class ClassicalSearch {
 public:
  ClassicalSearch(const KDatabase& db, const std::vector<Formula>& ics, const std::vector<std::string>& extras,
                  std::size_t max_instances)
      : db_(db), options_{extras}, max_instances_(max_instances) {
    for (const auto& ic : ics) ics_.emplace_back(ic, db.schema(), db.symbols());
    std::vector<DataId> extra_ids;
    for (const auto& e : extras) extra_ids.push_back(db.symbols().intern(e));
    for (std::size_t r = 0; r < db.relation_count(); ++r) {
      std::vector<std::vector<DataId>> columns;
      for (std::size_t attr : db.schema().relations()[r].type) {
        auto values = db.attribute_domain(attr);
        for (DataId e : extra_ids) {
          if (std::find(values.begin(), values.end(), e) == values.end()) values.push_back(e);
        }
        columns.push_back(std::move(values));
      }
      Tuple t;
      tuples(r, columns, t);
    }
    if (universe_.size() > 63) throw UsageError("classical oracle universe exceeds 63 tuples");
    for (std::size_t i = 0; i < universe_.size(); ++i) {
      if (!db.get(universe_[i].first, universe_[i].second).is_zero()) original_ |= Mask{1} << i;
    }
  }

  std::vector<Mask> run(ClassicalKind kind) {
    std::vector<Mask> consistent;
    switch (kind) {
      case ClassicalKind::subset:
        // Within subsets of db, minimal difference means maximal consistent
        // subset; a subset with smaller difference to db than another
        // consistent instance is itself a subset, so this also gives the
        // difference-minimal instances that are subsets.
        each_submask(original_, [&](Mask m) { keep_if_consistent(m, consistent); });
        return minimal_difference(consistent);
      case ClassicalKind::superset:
        each_submask(full() & ~original_, [&](Mask m) { keep_if_consistent(original_ | m, consistent); });
        return minimal_difference(consistent);
      case ClassicalKind::symmetric_difference:
        each_submask(full(), [&](Mask m) { keep_if_consistent(m, consistent); });
        return minimal_difference(consistent);
      case ClassicalKind::cardinality:
        for (std::size_t k = 0; k <= universe_.size(); ++k) {
          flips(k, 0, 0, consistent);
          if (!consistent.empty()) return consistent;
        }
        return consistent;
    }
    return consistent;
  }

  KDatabase instance(Mask m) const {
    KDatabase out = db_.empty_copy();
    for (std::size_t i = 0; i < universe_.size(); ++i) {
      if (m >> i & 1) out.set(universe_[i].first, universe_[i].second, Value::boolean(true));
    }
    return out;
  }

 private:
  Mask full() const { return universe_.size() == 64 ? ~Mask{0} : (Mask{1} << universe_.size()) - 1; }

  void tuples(std::size_t r, const std::vector<std::vector<DataId>>& columns, Tuple& t) {
    if (t.size() == columns.size()) {
      universe_.emplace_back(r, t);
      return;
    }
    for (DataId d : columns[t.size()]) {
      t.push_back(d);
      tuples(r, columns, t);
      t.pop_back();
    }
  }

  void each_submask(Mask of, const std::function<void(Mask)>& visit) {
    Mask m = 0;
    while (true) {
      visit(m);
      if (m == of) return;
      m = (m - of) & of;  // next submask in increasing order
    }
  }

  void flips(std::size_t k, std::size_t from, Mask chosen, std::vector<Mask>& out) {
    if (k == 0) {
      keep_if_consistent(original_ ^ chosen, out);
      return;
    }
    for (std::size_t i = from; i + k <= universe_.size(); ++i) flips(k - 1, i + 1, chosen | Mask{1} << i, out);
  }

  void keep_if_consistent(Mask m, std::vector<Mask>& out) {
    if (++examined_ > max_instances_) {
      throw BudgetExceeded("classical oracle examined more than " + std::to_string(max_instances_) + " instances");
    }
    KDatabase cand = instance(m);
    auto domain = quantifier_domain(cand, options_);
    for (const auto& ic : ics_) {
      if (!ic.holds(cand, {}, domain)) return;
    }
    out.push_back(m);
  }

  std::vector<Mask> minimal_difference(const std::vector<Mask>& consistent) const {
    std::vector<Mask> out;
    for (Mask m : consistent) {
      Mask d = m ^ original_;
      bool dominated = std::any_of(consistent.begin(), consistent.end(), [&](Mask o) {
        Mask e = o ^ original_;
        return e != d && (e & ~d) == 0;
      });
      if (!dominated) out.push_back(m);
    }
    return out;
  }

  const KDatabase& db_;
  EvalOptions options_;
  std::size_t max_instances_;
  std::size_t examined_ = 0;
  std::vector<CompiledFormula> ics_;
  std::vector<std::pair<std::size_t, Tuple>> universe_;
  Mask original_ = 0;
};

}  // namespace

std::vector<KDatabase> oracle_classical_repairs(const KDatabase& db, const std::vector<Formula>& ics,
                                                ClassicalKind kind, const std::vector<std::string>& extra_values,
                                                std::size_t max_instances) {
  if (db.semiring() != SemiringKind::boolean) throw UsageError("classical repairs need a Boolean database");
  ClassicalSearch search(db, ics, extra_values, max_instances);
  std::vector<KDatabase> out;
  for (Mask m : search.run(kind)) out.push_back(search.instance(m));
  std::sort(out.begin(), out.end(),
            [](const KDatabase& a, const KDatabase& b) { return canonical_facts(a) < canonical_facts(b); });
  return out;
}

std::pair<KDatabase, RepairFramework> encode_classical(const KDatabase& db, const std::vector<Formula>& ics,
                                                       ClassicalKind kind) {
  if (db.semiring() != SemiringKind::boolean) throw UsageError("classical repairs need a Boolean database");
  RepairFramework fw;
  fw.hard_constraints = ics;
  fw.compare = CompareKind::order;
  for (const auto& rel : db.schema().relations()) {
    std::vector<Term> args;
    for (std::size_t i = 0; i < rel.type.size(); ++i) args.push_back(Term::var("x" + std::to_string(i + 1)));
    Formula atom = Formula::atom(rel.name, args);
    if (kind == ClassicalKind::subset) fw.hql_minus.push_back(atom);
    if (kind == ClassicalKind::superset) fw.hql_plus.push_back(atom);
    fw.sql.push_back(atom);
  }
  if (kind != ClassicalKind::cardinality) return {db, fw};

  fw.compare = CompareKind::distance;
  fw.distance_agg = AggregateKind::sum;
  fw.mode = AnnotationMode::unaware;
  KDatabase lifted(db.schema_ptr(), SemiringKind::natural, db.symbols_ptr());
  for (std::size_t c = 0; c < db.schema().constants().size(); ++c) {
    if (auto v = db.constant(c)) lifted.set_constant(c, *v);
  }
  for (std::size_t r = 0; r < db.relation_count(); ++r) {
    for (const auto& [t, v] : db.relation(r)) lifted.set(r, t, Value::natural(1));
  }
  return {std::move(lifted), fw};
}

}  // namespace krepair
