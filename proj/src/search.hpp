// Branch-and-bound machinery shared by the engine entry points.
#pragma once

#include "krepair/engine.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace krepair::detail {

using u64 = std::uint64_t;
inline constexpr u64 kUnbounded = ~u64{0};  // saturated: "at least this much"

u64 sat_add(u64 a, u64 b);
u64 sat_mul(u64 a, u64 b);
u64 to_u64(const Value& v);

struct Interval {
  u64 lo = 0;
  u64 hi = 0;
};

// Annotation ranges for every record of the candidate space, narrowed as
// the search assigns values. Tracks which data values are certainly or
// possibly in the active domain of the completed candidate.
class PartialCandidate {
 public:
  PartialCandidate(const RepairContext& ctx, const CandidateSpace& space);

  std::size_t size() const { return records_.size(); }
  const std::pair<std::size_t, Tuple>& record(std::size_t v) const { return records_[v]; }
  std::optional<std::size_t> find(std::size_t relation, std::span<const DataId> tuple) const;
  Interval range(std::size_t v) const { return {lo_[v], hi_[v]}; }
  u64 reference(std::size_t v) const { return reference_[v]; }
  bool fixed(std::size_t v) const { return lo_[v] == hi_[v]; }

  // 0: never in the active domain, 1: possibly, 2: certainly.
  int membership(DataId d) const;
  const std::vector<DataId>& column(std::size_t relation, std::size_t position) const {
    return columns_[relation][position];
  }
  const std::vector<DataId>& allowed() const { return allowed_; }
  bool saturating_sum() const { return boolean_; }

  // Returns false when the range becomes empty (nothing is changed then).
  bool narrow(std::size_t v, u64 lo, u64 hi);
  std::size_t mark() const { return trail_.size(); }
  void undo(std::size_t mark);
  std::uint64_t adom_epoch() const { return epoch_; }

  KDatabase build() const;

 private:
  void shift(std::size_t v, u64 old_lo, u64 old_hi, u64 lo, u64 hi);

  const KDatabase& db_;
  bool boolean_ = false;
  bool binary_ = false;
  std::vector<std::pair<std::size_t, Tuple>> records_;
  std::vector<std::size_t> offset_;                          // first record of each relation
  std::vector<std::vector<std::vector<DataId>>> columns_;    // relation, position -> values
  std::vector<std::vector<std::vector<std::int32_t>>> pos_;  // relation, position, id -> index
  std::vector<std::vector<std::size_t>> stride_;
  std::vector<std::vector<DataId>> distinct_;                // values of each record
  std::vector<u64> lo_, hi_, reference_;
  std::vector<DataId> allowed_;
  std::vector<std::uint8_t> always_;
  std::vector<std::uint32_t> certain_, possible_;
  struct Step {
    std::size_t v;
    u64 lo, hi;
  };
  std::vector<Step> trail_;
  std::uint64_t epoch_ = 0;
};

// Bounds on the value of a compiled formula over every completion of a
// partial candidate. possible()/certain() decide non-zero-ness.
class IntervalEvaluator {
 public:
  IntervalEvaluator(const PartialCandidate& pc, const KDatabase& db, const CompiledFormula& cf,
                    std::span<const DataId> args);

  Interval value() { return value(root_); }
  bool possible() { return possible(root_); }
  bool certain() { return certain(root_); }

 private:
  Interval value(std::size_t n);
  bool possible(std::size_t n);
  bool certain(std::size_t n);
  Interval atom(const CompiledNode& node);
  DataId term(const CompiledTerm& t) const;
  const std::vector<DataId>& range(const CompiledNode& node, bool use_guard) const;
  std::optional<std::vector<DataId>> key(const CompiledNode& node) const;
  u64 add(u64 a, u64 b) const;

  const PartialCandidate& pc_;
  const KDatabase& db_;
  const std::vector<CompiledNode>& nodes_;
  std::size_t root_;
  std::vector<DataId> env_;
  Tuple scratch_;
  std::vector<std::map<std::vector<DataId>, Interval>> value_memo_;
  std::vector<std::map<std::vector<DataId>, bool>> possible_memo_, certain_memo_;
};

struct SearchHooks {
  enum class Objective { none, aggregate, total };
  Objective objective = Objective::none;
  // Partial candidates whose objective lower bound exceeds the limit are cut.
  std::function<std::optional<u64>()> limit;
  // Cut partial candidates whose Delta lower bounds are strictly above one
  // of these vectors.
  const std::vector<std::vector<u64>>* dominators = nullptr;
  // Called with each completed candidate passing items (1)-(5) and its
  // exact per-instance deltas; returning true stops the search.
  std::function<bool(const KDatabase&, const std::vector<Value>&)> leaf;
};

class BranchAndBound {
 public:
  BranchAndBound(const RepairContext& ctx, const CandidateSpace& space, std::uint64_t budget);
  ~BranchAndBound();

  void run(SearchHooks& hooks);
  std::uint64_t nodes() const { return nodes_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint64_t nodes_ = 0;
};

// Values admitted in each column of a relation: the active domain of the
// column's attribute plus the extra values, sorted by id.
std::vector<std::vector<DataId>> typed_columns(const KDatabase& db, std::size_t relation,
                                               const std::vector<DataId>& extras);

// Sorts databases by their canonical fact lists and removes duplicates.
void sort_canonically(std::vector<KDatabase>& dbs);

}  // namespace krepair::detail
