#include "krepair/engine.hpp"

#include "krepair/error.hpp"
#include "search.hpp"

#include <algorithm>

namespace krepair {

using detail::u64;

namespace {

EvalOptions eval_options(const CandidateBounds& bounds) { return EvalOptions{bounds.extra_values}; }

std::vector<DataId> extra_ids(const KDatabase& db, const CandidateBounds& bounds) {
  std::vector<DataId> out;
  for (const auto& v : bounds.extra_values) out.push_back(db.symbols().intern(v));
  return out;
}

struct Found {
  KDatabase db;
  std::vector<Value> deltas;
};

void sort_found(std::vector<Found>& found) {
  std::vector<std::pair<std::vector<Fact>, std::size_t>> keys;
  for (std::size_t i = 0; i < found.size(); ++i) keys.emplace_back(canonical_facts(found[i].db), i);
  std::sort(keys.begin(), keys.end());
  std::vector<Found> out;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (k > 0 && keys[k].first == keys[k - 1].first) continue;
    out.push_back(std::move(found[keys[k].second]));
  }
  found = std::move(out);
}

std::vector<u64> as_u64(const std::vector<Value>& values) {
  std::vector<u64> out;
  for (const auto& v : values) out.push_back(detail::to_u64(v));
  return out;
}

bool strictly_below(const std::vector<u64>& a, const std::vector<u64>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

bool strictly_closer(const RepairContext& ctx, const Found& a, const Found& b) {
  if (ctx.framework().order_semantics == OrderSemantics::closeness) {
    return dominated_or_equal(a.deltas, b.deltas) && !dominated_or_equal(b.deltas, a.deltas);
  }
  return ctx.compare(a.db, b.db) == OrderResult::leq && ctx.compare(b.db, a.db) != OrderResult::leq;
}

// Keeps the passing candidates that item (6) accepts.
std::vector<Found> minimal(const RepairContext& ctx, std::vector<Found> passing, std::optional<Value>& min_distance) {
  std::vector<Found> out;
  if (ctx.framework().compare == CompareKind::distance) {
    for (auto& f : passing) {
      Value d = ctx.aggregate_deltas(f.deltas);
      if (!min_distance || d.numeric() < min_distance->numeric()) {
        min_distance = d;
        out.clear();
      }
      if (d == *min_distance) out.push_back(std::move(f));
    }
    return out;
  }
  for (std::size_t i = 0; i < passing.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < passing.size() && !dominated; ++j) {
      dominated = j != i && strictly_closer(ctx, passing[j], passing[i]);
    }
    if (!dominated) out.push_back(passing[i]);
  }
  return out;
}

RepairReport report_of(std::vector<Found> found, std::optional<Value> min_distance, std::uint64_t examined,
                       bool order_mode) {
  sort_found(found);
  RepairReport report;
  report.min_distance = std::move(min_distance);
  report.candidates_examined = examined;
  for (auto& f : found) {
    report.repairs.push_back(std::move(f.db));
    if (order_mode) report.frontier.push_back(std::move(f.deltas));
  }
  return report;
}

RepairReport repairs_exhaustive(const RepairContext& ctx, const CandidateBounds& bounds) {
  std::vector<Found> passing;
  std::uint64_t examined = 0;
  enumerate_candidates(ctx.db(), ctx.framework(), bounds, [&](const KDatabase& cand) {
    ++examined;
    if (ctx.is_candidate(cand)) passing.push_back({cand, ctx.sql_deltas(cand)});
    return true;
  });
  std::optional<Value> min_distance;
  auto found = minimal(ctx, std::move(passing), min_distance);
  return report_of(std::move(found), std::move(min_distance), examined,
                   ctx.framework().compare == CompareKind::order);
}

RepairReport repairs_by_distance(const RepairContext& ctx, const CandidateSpace& space, const CandidateBounds& bounds) {
  detail::BranchAndBound search(ctx, space, bounds.max_candidates);
  std::optional<u64> best;
  std::optional<Value> best_value;
  std::vector<Found> found;
  detail::SearchHooks hooks;
  hooks.objective = detail::SearchHooks::Objective::aggregate;
  hooks.limit = [&] { return best; };
  hooks.leaf = [&](const KDatabase& cand, const std::vector<Value>& deltas) {
    Value d = ctx.aggregate_deltas(deltas);
    u64 u = detail::to_u64(d);
    if (!best || u < *best) {
      best = u;
      best_value = d;
      found.clear();
    }
    if (u == *best) found.push_back({cand, deltas});
    return false;
  };
  search.run(hooks);
  return report_of(std::move(found), std::move(best_value), search.nodes(), false);
}

// Rounds of "smallest total Delta among candidates not strictly dominated by
// an earlier repair"; every such candidate is closeness-minimal.
RepairReport repairs_by_closeness(const RepairContext& ctx, const CandidateSpace& space,
                                  const CandidateBounds& bounds) {
  std::vector<std::vector<u64>> dominators;
  std::vector<Found> all;
  std::optional<u64> previous;
  std::uint64_t examined = 0;
  while (true) {
    detail::BranchAndBound search(ctx, space, bounds.max_candidates - std::min(examined, bounds.max_candidates));
    std::optional<u64> best;
    std::vector<Found> round;
    detail::SearchHooks hooks;
    hooks.objective = detail::SearchHooks::Objective::total;
    hooks.limit = [&] { return best; };
    hooks.dominators = &dominators;
    hooks.leaf = [&](const KDatabase& cand, const std::vector<Value>& deltas) {
      auto d = as_u64(deltas);
      u64 total = 0;
      for (u64 x : d) total = detail::sat_add(total, x);
      if (previous && total <= *previous) return false;
      for (const auto& dom : dominators) {
        if (strictly_below(dom, d)) return false;
      }
      if (!best || total < *best) {
        best = total;
        round.clear();
      }
      if (total == *best) round.push_back({cand, deltas});
      return false;
    };
    search.run(hooks);
    examined += search.nodes();
    if (round.empty()) break;
    for (auto& f : round) {
      dominators.push_back(as_u64(f.deltas));
      all.push_back(std::move(f));
    }
    previous = best;
  }
  return report_of(std::move(all), std::nullopt, examined, true);
}

RepairReport repairs_by_literal_order(const RepairContext& ctx, const CandidateSpace& space,
                                      const CandidateBounds& bounds) {
  detail::BranchAndBound search(ctx, space, bounds.max_candidates);
  std::vector<Found> passing;
  detail::SearchHooks hooks;
  hooks.leaf = [&](const KDatabase& cand, const std::vector<Value>& deltas) {
    passing.push_back({cand, deltas});
    return false;
  };
  search.run(hooks);
  std::optional<Value> unused;
  return report_of(minimal(ctx, std::move(passing), unused), std::nullopt, search.nodes(), true);
}

// Is t an answer of q on cand, with quantifiers over adom(cand) plus extras?
bool in_answers(const KDatabase& cand, const CompiledFormula& q, const std::vector<DataId>& t,
                const EvalOptions& options) {
  auto domain = quantifier_domain(cand, options);
  for (DataId d : t) {
    if (!std::binary_search(domain.begin(), domain.end(), d)) return false;
  }
  return q.holds(cand, t, domain);
}

std::vector<DataId> tuple_ids(const KDatabase& db, const CompiledFormula& q, const std::vector<std::string>& t) {
  if (t.size() != q.free_variables().size()) {
    throw UsageError("query has " + std::to_string(q.free_variables().size()) + " free variables but the tuple has " +
                     std::to_string(t.size()) + " values");
  }
  std::vector<DataId> out;
  for (const auto& s : t) out.push_back(db.symbols().intern(s));
  return out;
}

void require_distance(const RepairFramework& fw) {
  if (fw.compare != CompareKind::distance) throw UsageError("this algorithm needs a framework compared by distance");
}

// Searches for a passing candidate at distance <= n (or == n when exact)
// that, when q is given, does not have t as an answer.
bool candidate_within(const RepairContext& ctx, const CandidateSpace& space, const CandidateBounds& bounds, u64 n,
                      bool exact, const CompiledFormula* q, const std::vector<DataId>& t) {
  detail::BranchAndBound search(ctx, space, bounds.max_candidates);
  bool found = false;
  detail::SearchHooks hooks;
  hooks.objective = detail::SearchHooks::Objective::aggregate;
  hooks.limit = [n] { return std::optional<u64>(n); };
  hooks.leaf = [&](const KDatabase& cand, const std::vector<Value>& deltas) {
    u64 d = detail::to_u64(ctx.aggregate_deltas(deltas));
    if (exact ? d != n : d > n) return false;
    if (q && in_answers(cand, *q, t, ctx.options())) return false;
    found = true;
    return true;
  };
  search.run(hooks);
  return found;
}

}  // namespace

Natural CandidateSpace::size() const {
  Natural per = binary ? Natural(2) : cap + 1;
  Natural out = 1;
  for (std::size_t i = 0; i < records.size(); ++i) out *= per;
  return out;
}

CandidateSpace candidate_space(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds) {
  if (db.semiring() == SemiringKind::probability) {
    throw UsageError("repair search is not available over the probability semiring");
  }
  CandidateSpace space;
  space.binary = db.semiring() == SemiringKind::boolean || fw.mode == AnnotationMode::unaware;
  Natural largest = db.max_annotation();
  if (space.binary) {
    space.cap = 1;
  } else if (bounds.annotation_cap) {
    if (*bounds.annotation_cap < largest) {
      throw UsageError("annotation cap " + bounds.annotation_cap->str() + " is below the largest annotation " +
                       largest.str() + " in the database");
    }
    space.cap = *bounds.annotation_cap;
  } else {
    space.cap = std::max(Natural(1), largest);
  }
  auto extras = extra_ids(db, bounds);
  for (std::size_t r = 0; r < db.relation_count(); ++r) {
    auto cols = detail::typed_columns(db, r, extras);
    Tuple t(cols.size());
    std::vector<std::size_t> idx(cols.size(), 0);
    if (std::any_of(cols.begin(), cols.end(), [](const auto& c) { return c.empty(); })) continue;
    while (true) {
      for (std::size_t i = 0; i < cols.size(); ++i) t[i] = cols[i][idx[i]];
      space.records.emplace_back(r, t);
      std::size_t k = cols.size();
      bool carry = true;
      while (carry && k > 0) {
        --k;
        if (++idx[k] < cols[k].size()) {
          carry = false;
        } else {
          idx[k] = 0;
        }
      }
      if (carry) break;
    }
  }
  return space;
}

void enumerate_candidates(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds,
                          const std::function<bool(const KDatabase&)>& visit) {
  CandidateSpace space = candidate_space(db, fw, bounds);
  Natural total = space.size();
  if (total > Natural(bounds.max_candidates)) {
    throw BudgetExceeded("candidate space has " + total.str() + " databases, above the budget of " +
                         std::to_string(bounds.max_candidates) + " (raise --max-candidates)");
  }
  const u64 top = space.binary ? 1 : space.cap.convert_to<u64>();
  std::vector<u64> values(space.records.size(), 0);
  while (true) {
    KDatabase cand = db.empty_copy();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] == 0) continue;
      Value v = db.semiring() == SemiringKind::boolean ? Value::boolean(true) : Value::natural(Natural(values[i]));
      cand.set(space.records[i].first, space.records[i].second, std::move(v));
    }
    if (!visit(cand)) return;
    std::size_t k = values.size();
    bool carry = true;
    while (carry && k > 0) {
      --k;
      if (++values[k] <= top) {
        carry = false;
      } else {
        values[k] = 0;
      }
    }
    if (carry) return;
  }
}

bool is_repair_candidate(const KDatabase& db, const KDatabase& cand, const RepairFramework& fw,
                         const CandidateBounds& bounds) {
  return RepairContext(db, fw, eval_options(bounds)).is_candidate(cand);
}

RepairReport repairs(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds,
                     SearchStrategy strategy) {
  CandidateSpace space = candidate_space(db, fw, bounds);
  RepairContext ctx(db, fw, eval_options(bounds));
  if (strategy == SearchStrategy::exhaustive) return repairs_exhaustive(ctx, bounds);
  if (fw.compare == CompareKind::distance) return repairs_by_distance(ctx, space, bounds);
  if (fw.order_semantics == OrderSemantics::closeness) return repairs_by_closeness(ctx, space, bounds);
  return repairs_by_literal_order(ctx, space, bounds);
}

bool exists_repair(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds,
                   SearchStrategy strategy) {
  CandidateSpace space = candidate_space(db, fw, bounds);
  RepairContext ctx(db, fw, eval_options(bounds));
  bool found = false;
  if (strategy == SearchStrategy::exhaustive) {
    enumerate_candidates(db, fw, bounds, [&](const KDatabase& cand) {
      found = ctx.is_candidate(cand);
      return !found;
    });
    return found;
  }
  detail::BranchAndBound search(ctx, space, bounds.max_candidates);
  detail::SearchHooks hooks;
  hooks.leaf = [&](const KDatabase&, const std::vector<Value>&) { return found = true; };
  search.run(hooks);
  return found;
}

CQAAnswer cqa(const KDatabase& db, const RepairFramework& fw, const Formula& q, const std::vector<std::string>& t,
              const CandidateBounds& bounds, SearchStrategy strategy) {
  CompiledFormula cq(q, db.schema(), db.symbols());
  auto ids = tuple_ids(db, cq, t);
  RepairReport report = repairs(db, fw, bounds, strategy);
  CQAAnswer answer;
  answer.tuple = t;
  answer.repair_count = report.repairs.size();
  answer.min_distance = report.min_distance;
  answer.vacuous = report.repairs.empty();
  answer.consistent = std::all_of(report.repairs.begin(), report.repairs.end(), [&](const KDatabase& r) {
    return in_answers(r, cq, ids, eval_options(bounds));
  });
  return answer;
}

bool rce(const KDatabase& db, const RepairFramework& fw, const Value& n, const Formula* q,
         const std::vector<std::string>& t, const CandidateBounds& bounds) {
  require_distance(fw);
  std::optional<CompiledFormula> cq;
  std::vector<DataId> ids;
  if (q) {
    cq.emplace(*q, db.schema(), db.symbols());
    ids = tuple_ids(db, *cq, t);
  }
  CandidateSpace space = candidate_space(db, fw, bounds);
  RepairContext ctx(db, fw, eval_options(bounds));
  return candidate_within(ctx, space, bounds, detail::to_u64(n), true, cq ? &*cq : nullptr, ids);
}

std::optional<Value> least_candidate_distance(const KDatabase& db, const RepairFramework& fw,
                                              const CandidateBounds& bounds) {
  require_distance(fw);
  CandidateSpace space = candidate_space(db, fw, bounds);
  RepairContext ctx(db, fw, eval_options(bounds));
  // Upper end of the search interval: the distance of any passing candidate.
  std::optional<u64> upper;
  {
    detail::BranchAndBound search(ctx, space, bounds.max_candidates);
    detail::SearchHooks hooks;
    hooks.leaf = [&](const KDatabase&, const std::vector<Value>& deltas) {
      upper = detail::to_u64(ctx.aggregate_deltas(deltas));
      return true;
    };
    search.run(hooks);
  }
  if (!upper) return std::nullopt;
  u64 lo = 0, hi = *upper;
  while (lo < hi) {
    u64 mid = lo + (hi - lo) / 2;
    if (candidate_within(ctx, space, bounds, mid, false, nullptr, {})) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return Value::from_count(db.semiring(), Natural(lo));
}

CQAAnswer cqa_binary_search(const KDatabase& db, const RepairFramework& fw, const Formula& q,
                            const std::vector<std::string>& t, const CandidateBounds& bounds) {
  require_distance(fw);
  CompiledFormula cq(q, db.schema(), db.symbols());
  auto ids = tuple_ids(db, cq, t);
  CQAAnswer answer;
  answer.tuple = t;
  auto n0 = least_candidate_distance(db, fw, bounds);
  if (!n0) {
    answer.vacuous = true;
    return answer;
  }
  answer.min_distance = n0;
  CandidateSpace space = candidate_space(db, fw, bounds);
  RepairContext ctx(db, fw, eval_options(bounds));
  answer.consistent = !candidate_within(ctx, space, bounds, detail::to_u64(*n0), true, &cq, ids);
  return answer;
}

}  // namespace krepair
