#include <doctest.h>

#include "krepair/engine.hpp"
#include "krepair/error.hpp"
#include "krepair/reductions.hpp"
#include "support/naive_repairs.hpp"
#include "support/random_logic.hpp"

#include <random>

using namespace krepair;

namespace {

Graph complete(std::size_t n) {
  Graph g;
  for (std::size_t i = 1; i <= n; ++i) g.vertices.push_back("v" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) g.edges.emplace_back(g.vertices[i], g.vertices[j]);
  }
  return g;
}

bool cqa_consistent(const ReductionInstance& inst, SearchStrategy strategy = SearchStrategy::pruned) {
  return cqa(inst.db, inst.framework, *inst.query, {}, {}, strategy).consistent;
}

Cnf3 clause(Literal a, Literal b, Literal c) { return Cnf3{{{a, b, c}}}; }

Literal pos(int v) { return {v, true}; }
Literal neg(int v) { return {v, false}; }

}  // namespace

TEST_CASE("edge lists and DIMACS text") {
  auto g = parse_edge_list("# triangle\na b\nb c\n\nc a  # closing edge\nd\n");
  CHECK(g.vertices == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(g.edges.size() == 3);
  CHECK_THROWS_AS(parse_edge_list("a b c\n"), ParseError);

  auto f = parse_dimacs("c example\np cnf 3 2\n1 -2 3 0\n-1 2\n 2 0\n");
  REQUIRE(f.clauses.size() == 2);
  CHECK(f.clauses[0][1] == neg(2));
  CHECK(f.clauses[1][2] == pos(2));
  CHECK(f.variables() == std::vector<int>{1, 2, 3});
  CHECK(parse_dimacs(to_dimacs(f)).clauses == f.clauses);
  CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), ParseError);
  CHECK_THROWS_AS(parse_dimacs("1 2 3\n"), ParseError);
  CHECK_THROWS_AS(parse_dimacs("1 x 3 0\n"), ParseError);
}

TEST_CASE("graphs up to isomorphism") {
  // Unlabelled simple graphs on n = 0..5 vertices.
  const std::size_t expected[] = {1, 1, 2, 4, 11, 34};
  std::size_t total = 0;
  for (std::size_t n = 0; n <= 5; ++n) {
    total += expected[n];
    CHECK(graphs_up_to_isomorphism(n).size() == total);
  }
}

TEST_CASE("3-colourability oracle") {
  CHECK(oracle_3col(complete(3)));
  CHECK_FALSE(oracle_3col(complete(4)));
  CHECK(oracle_3col(Graph{{"a", "b", "c"}, {}}));
  CHECK(oracle_3col(Graph{}));
  CHECK_FALSE(oracle_3col(Graph{{"a"}, {{"a", "a"}}}));
  CHECK_THROWS_AS(oracle_3col(complete(4), 3), UsageError);
}

TEST_CASE("3-colouring as consistent query answering") {
  CHECK_FALSE(cqa_consistent(reduce_3col_cqa(complete(3))));
  CHECK(cqa_consistent(reduce_3col_cqa(complete(4))));
  CHECK_FALSE(cqa_consistent(reduce_3col_cqa(Graph{{"v1"}, {}})));
  for (const auto& g : graphs_up_to_isomorphism(5)) {
    CAPTURE(g.vertices.size());
    CAPTURE(g.edges.size());
    CHECK(cqa_consistent(reduce_3col_cqa(g)) == !oracle_3col(g));
  }
}

TEST_CASE("3-colouring as existence of a repair") {
  auto k3 = reduce_3col_exists(complete(3));
  CHECK(exists_repair(k3.db, k3.framework));
  auto k4 = reduce_3col_exists(complete(4));
  CHECK_FALSE(exists_repair(k4.db, k4.framework));
  auto empty = reduce_3col_exists(Graph{});
  CHECK(exists_repair(empty.db, empty.framework));
  for (const auto& g : graphs_up_to_isomorphism(5)) {
    auto inst = reduce_3col_exists(g);
    bool expected = oracle_3col(g);
    CAPTURE(g.vertices.size());
    CAPTURE(g.edges.size());
    CHECK(exists_repair(inst.db, inst.framework) == expected);
    CHECK(eso_exists_repair_check(inst.db, inst.framework) == expected);
  }
}

namespace {

// Positive clauses: multisets of three variables from 1..n.
std::vector<std::array<Literal, 3>> positive_clauses(int n) {
  std::vector<std::array<Literal, 3>> out;
  for (int a = 1; a <= n; ++a) {
    for (int b = a; b <= n; ++b) {
      for (int c = b; c <= n; ++c) out.push_back({pos(a), pos(b), pos(c)});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("1-in-3 satisfiability oracle") {
  CHECK(oracle_1in3sat(clause(pos(1), pos(2), pos(3))));
  CHECK(oracle_1in3sat(Cnf3{}));
  CHECK_FALSE(oracle_1in3sat(clause(pos(1), pos(1), pos(1))));
  CHECK_FALSE(oracle_1in3sat(Cnf3{{{pos(1), pos(2), pos(2)}, {pos(1), pos(1), pos(2)}}}));
}

TEST_CASE("1-in-3 satisfiability as consistent query answering") {
  CHECK_FALSE(cqa_consistent(reduce_1in3sat(clause(pos(1), pos(2), pos(3)))));
  CHECK_FALSE(cqa_consistent(reduce_1in3sat(Cnf3{})));
  CHECK_THROWS_AS(reduce_1in3sat(clause(pos(1), neg(2), pos(3))), UsageError);

  // A no-instance found by the oracle: every clause pair over 4 variables.
  auto clauses = positive_clauses(4);
  std::optional<Cnf3> no_instance;
  for (std::size_t i = 0; i < clauses.size() && !no_instance; ++i) {
    for (std::size_t j = i + 1; j < clauses.size() && !no_instance; ++j) {
      Cnf3 f{{clauses[i], clauses[j]}};
      if (!oracle_1in3sat(f) && f.variables().size() >= 3) no_instance = f;
    }
  }
  REQUIRE(no_instance);
  CHECK(cqa_consistent(reduce_1in3sat(*no_instance)));

  std::size_t yes = 0, no = 0;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    for (std::size_t j = i; j < clauses.size(); ++j) {
      Cnf3 f{{clauses[i]}};
      if (j != i) f.clauses.push_back(clauses[j]);
      bool expected = oracle_1in3sat(f);
      (expected ? yes : no) += 1;
      CAPTURE(to_dimacs(f));
      CHECK(cqa_consistent(reduce_1in3sat(f)) == !expected);
    }
  }
  CHECK(yes > 0);
  CHECK(no > 0);
}

TEST_CASE("max-true equality oracle") {
  auto xyz = clause(pos(1), pos(2), pos(3));
  CHECK(max_true(xyz) == 3u);
  CHECK(max_true(clause(neg(1), neg(2), neg(3))) == 2u);
  CHECK_FALSE(max_true(Cnf3{{{pos(1), pos(1), pos(1)}, {neg(1), neg(1), neg(1)}}}).has_value());
  CHECK(oracle_maxtrue_eq(xyz, xyz));
  CHECK(oracle_maxtrue_eq(xyz, clause(pos(3), pos(1), pos(2))));
  CHECK_FALSE(oracle_maxtrue_eq(xyz, clause(neg(1), neg(2), neg(3))));
}

TEST_CASE("max-true equality through minimal-distance repairs") {
  auto xyz = clause(pos(1), pos(2), pos(3));
  auto same = reduce_maxsat_eq(xyz, xyz);
  CHECK_FALSE(cqa_consistent(same));
  CHECK_FALSE(cqa_binary_search(same.db, same.framework, *same.query, {}).consistent);
  auto differ = reduce_maxsat_eq(xyz, clause(neg(1), neg(2), neg(3)));
  CHECK(cqa_consistent(differ));
  CHECK(cqa_binary_search(differ.db, differ.framework, *differ.query, {}).consistent);
  CHECK_THROWS_AS(reduce_maxsat_eq(xyz, Cnf3{}), UsageError);
}

TEST_CASE("max-true equality over single-clause formulas on three variables") {
  std::vector<std::array<Literal, 3>> signs;
  for (int m = 0; m < 8; ++m) signs.push_back({Literal{1, (m & 1) != 0}, Literal{2, (m & 2) != 0}, Literal{3, (m & 4) != 0}});
  // Every diagonal pair plus the all-positive clause against every sign pattern.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 8; ++i) pairs.emplace_back(i, i);
  for (int j = 0; j < 7; ++j) pairs.emplace_back(7, j);
  std::size_t equal = 0;
  for (auto [i, j] : pairs) {
    Cnf3 f0{{signs[i]}}, f1{{signs[j]}};
    auto inst = reduce_maxsat_eq(f0, f1);
    bool expected = oracle_maxtrue_eq(f0, f1);
    equal += expected;
    CAPTURE(to_dimacs(f0));
    CAPTURE(to_dimacs(f1));
    CHECK(cqa_consistent(inst) == !expected);
    CHECK(cqa_binary_search(inst.db, inst.framework, *inst.query, {}).consistent == !expected);
  }
  CHECK(equal > 8);
  CHECK(equal < pairs.size());
}

TEST_CASE("max-true equality with two clauses") {
  std::array<Literal, 3> all_pos{pos(1), pos(2), pos(3)}, all_neg{neg(1), neg(2), neg(3)};
  std::array<Literal, 3> mixed_a{pos(1), pos(2), neg(3)}, mixed_b{pos(1), neg(2), pos(3)};
  Cnf3 f0{{all_pos, all_neg}}, f1{{mixed_a, mixed_b}}, f2{{all_neg, mixed_a}};
  for (const auto& [a, b] : {std::pair{f0, f1}, std::pair{f0, f2}, std::pair{f1, f2}, std::pair{f2, f2}}) {
    auto inst = reduce_maxsat_eq(a, b);
    bool expected = oracle_maxtrue_eq(a, b);
    CAPTURE(to_dimacs(a));
    CAPTURE(to_dimacs(b));
    CHECK(cqa_consistent(inst) == !expected);
    CHECK(cqa_binary_search(inst.db, inst.framework, *inst.query, {}).consistent == !expected);
  }
}
