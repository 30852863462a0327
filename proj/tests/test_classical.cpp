#include <doctest.h>

#include "krepair/engine.hpp"
#include "krepair/error.hpp"
#include "krepair/reductions.hpp"
#include "support/naive_repairs.hpp"
#include "support/random_logic.hpp"

#include <random>

using namespace krepair;

namespace {

using Support = std::set<std::pair<std::string, std::vector<std::string>>>;

Support support_of(const KDatabase& db) {
  Support out;
  for (const auto& [name, facts] : testsupport::relations_of_db(db)) {
    for (const auto& [t, w] : facts) {
      if (w != 0) out.emplace(name, t);
    }
  }
  return out;
}

std::set<Support> supports(const std::vector<KDatabase>& dbs) {
  std::set<Support> out;
  for (const auto& d : dbs) out.insert(support_of(d));
  return out;
}

std::set<Support> via_framework(const KDatabase& db, const std::vector<Formula>& ics, ClassicalKind kind,
                                const std::vector<std::string>& extras = {}) {
  auto [encoded, fw] = encode_classical(db, ics, kind);
  CandidateBounds bounds;
  bounds.extra_values = extras;
  return supports(repairs(encoded, fw, bounds).repairs);
}

const char* kStockText =
    "semiring boolean\n"
    "attr ID : int\n"
    "attr Product : string\n"
    "attr Warehouse : string\n"
    "rel STOCK(ID, Product, Warehouse)\n"
    "fact STOCK(112, potato, A)\n"
    "fact STOCK(112, cabbage, A)\n"
    "fact STOCK(113, carrot, B)\n";

Formula stock_key() {
  return parse_formula("forall x y z y' z' (STOCK(x, y, z) & STOCK(x, y', z') -> y = y' & z = z')");
}

Formula close(Formula f) {
  for (const auto& v : free_variables(f)) f = Formula::forall(v, f);
  return f;
}

}  // namespace

TEST_CASE("classical repairs of the stock relation") {
  auto db = load_database(kStockText);
  std::vector<Formula> ics{stock_key()};
  Support carrot{{"STOCK", {"113", "carrot", "B"}}};
  Support keep_potato = carrot, keep_cabbage = carrot;
  keep_potato.insert({"STOCK", {"112", "potato", "A"}});
  keep_cabbage.insert({"STOCK", {"112", "cabbage", "A"}});
  std::set<Support> deletions{keep_potato, keep_cabbage};

  for (auto kind : {ClassicalKind::subset, ClassicalKind::symmetric_difference, ClassicalKind::cardinality}) {
    CAPTURE(static_cast<int>(kind));
    CHECK(supports(oracle_classical_repairs(db, ics, kind)) == deletions);
    CHECK(via_framework(db, ics, kind) == deletions);
  }
  // Insertions cannot remove a key violation.
  CHECK(oracle_classical_repairs(db, ics, ClassicalKind::superset).empty());
  CHECK(via_framework(db, ics, ClassicalKind::superset).empty());
}

TEST_CASE("a consistent database is its only classical repair") {
  std::string text = kStockText;
  text.erase(text.find("fact STOCK(112, cabbage"), std::string("fact STOCK(112, cabbage, A)\n").size());
  auto db = load_database(text);
  std::vector<Formula> ics{stock_key()};
  for (auto kind : {ClassicalKind::subset, ClassicalKind::superset, ClassicalKind::symmetric_difference,
                    ClassicalKind::cardinality}) {
    CAPTURE(static_cast<int>(kind));
    CHECK(supports(oracle_classical_repairs(db, ics, kind)) == std::set<Support>{support_of(db)});
    CHECK(via_framework(db, ics, kind) == std::set<Support>{support_of(db)});
  }
}

TEST_CASE("classical oracle input checks") {
  auto natural = load_database("semiring natural\nattr V : string\nrel S(V)\nfact S(a) @ 2\n");
  CHECK_THROWS_AS(oracle_classical_repairs(natural, {}, ClassicalKind::subset), UsageError);
  CHECK_THROWS_AS(encode_classical(natural, {}, ClassicalKind::subset), UsageError);
  auto wide = load_database("semiring boolean\nattr V : string\nrel R(V, V, V)\nfact R(a, b, c)\nfact R(d, a, b)\n");
  CHECK_THROWS_AS(oracle_classical_repairs(wide, {}, ClassicalKind::subset), UsageError);
}

TEST_CASE("framework encodings agree with classical repairs on random inputs") {
  std::mt19937 rng(2024);
  testsupport::FormulaGen gen{rng};
  gen.literals = {"a", "b", "c"};
  const std::vector<std::string> extras{"a", "b", "c"};
  std::size_t nontrivial = 0;
  for (int round = 0; round < 60; ++round) {
    auto db = testsupport::random_db(rng, SemiringKind::boolean);
    std::vector<Formula> ics;
    for (int i = 0, n = 1 + gen.pick(2); i < n; ++i) ics.push_back(close(gen.gen(2)));
    CAPTURE(round);
    CAPTURE(serialize_database(db));
    std::string ic_text;
    for (const auto& ic : ics) ic_text += to_string(ic) + "\n";
    CAPTURE(ic_text);
    for (auto kind : {ClassicalKind::subset, ClassicalKind::superset, ClassicalKind::symmetric_difference,
                      ClassicalKind::cardinality}) {
      CAPTURE(static_cast<int>(kind));
      auto expected = supports(oracle_classical_repairs(db, ics, kind, extras));
      CHECK(via_framework(db, ics, kind, extras) == expected);
      nontrivial += expected.size() > 1;
    }
  }
  CHECK(nontrivial > 10);
}
