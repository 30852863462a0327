#pragma once

#include "krepair/framework.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace krepair {

struct CandidateBounds {
  // Largest annotation a candidate record may carry (natural semiring,
  // annotation-aware). Defaults to max(1, largest annotation in the db).
  std::optional<Natural> annotation_cap;
  std::vector<std::string> extra_values;
  // Search nodes (or enumerated candidates) allowed before BudgetExceeded.
  std::uint64_t max_candidates = 20'000'000;
};

enum class SearchStrategy {
  pruned,      // branch and bound over record annotations
  exhaustive,  // every candidate, checked and compared pairwise
};

struct RepairReport {
  std::vector<KDatabase> repairs;  // canonical order of fact lists
  std::optional<Value> min_distance;  // distance mode
  // Order mode: per repair, the Delta of every ground soft query.
  std::vector<std::vector<Value>> frontier;
  std::uint64_t candidates_examined = 0;
};

struct CQAAnswer {
  std::vector<std::string> tuple;
  bool consistent = true;
  bool vacuous = false;  // no repair exists
  std::optional<Value> min_distance;
  std::size_t repair_count = 0;
};

// The annotation range and record universe used by every search.
struct CandidateSpace {
  Natural cap = 1;
  bool binary = false;  // annotations restricted to {0, 1}
  std::vector<std::pair<std::size_t, Tuple>> records;
  Natural size() const;  // (values per record)^(#records)
};

CandidateSpace candidate_space(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds = {});

// Streams every candidate database; stops early when visit returns false.
void enumerate_candidates(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds,
                          const std::function<bool(const KDatabase&)>& visit);

bool is_repair_candidate(const KDatabase& db, const KDatabase& cand, const RepairFramework& fw,
                         const CandidateBounds& bounds = {});

RepairReport repairs(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds = {},
                     SearchStrategy strategy = SearchStrategy::pruned);

bool exists_repair(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds = {},
                   SearchStrategy strategy = SearchStrategy::pruned);

// Existence via an existential second-order sentence: guesses relations
// S over the typed active domain and checks the relativised hard queries
// and constraints on them. Annotation-unaware frameworks without soft
// constraints only.
bool eso_exists_repair_check(const KDatabase& db, const RepairFramework& fw, const CandidateBounds& bounds = {});

CQAAnswer cqa(const KDatabase& db, const RepairFramework& fw, const Formula& q, const std::vector<std::string>& t,
              const CandidateBounds& bounds = {}, SearchStrategy strategy = SearchStrategy::pruned);

// Is there a candidate passing items (1)-(5) at distance exactly n which,
// when q is given, does not have t among its answers?
bool rce(const KDatabase& db, const RepairFramework& fw, const Value& n, const Formula* q,
         const std::vector<std::string>& t, const CandidateBounds& bounds = {});

// Smallest n with a candidate at distance <= n, if any candidate exists.
std::optional<Value> least_candidate_distance(const KDatabase& db, const RepairFramework& fw,
                                              const CandidateBounds& bounds = {});

CQAAnswer cqa_binary_search(const KDatabase& db, const RepairFramework& fw, const Formula& q,
                            const std::vector<std::string>& t, const CandidateBounds& bounds = {});

}  // namespace krepair
