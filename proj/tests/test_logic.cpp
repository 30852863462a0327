#include <doctest.h>

#include "krepair/error.hpp"
#include "krepair/logic.hpp"
#include "support/random_logic.hpp"

#include <random>

using namespace krepair;
using testsupport::plain;

namespace {

const std::string kData = KREPAIR_DATA_DIR;

KDatabase stock() { return load_database_file(kData + "/stock.kdb"); }

Formula parse(const KDatabase& db, const std::string& text) { return parse_formula(text, &db.schema()); }

std::size_t error_column(const std::string& text) {
  try {
    parse_formula(text);
  } catch (const ParseError& e) {
    return e.column();
  }
  return 0;
}

}  // namespace

TEST_CASE("parser builds the expected trees") {
  KDatabase db = stock();
  Formula phi = parse(db, "forall x y x' y' (STOCK(x,y,A) & STOCK(x',y',A) -> y = y')");
  CHECK(phi.op == Connective::forall);
  CHECK(free_variables(phi).empty());
  Formula body = phi.children[0].children[0].children[0].children[0];
  CHECK(body.op == Connective::implication);
  CHECK(body.children[0].op == Connective::conjunction);
  CHECK(body.children[1] == Formula::equal(Term::var("y"), Term::var("y'")));
  CHECK(body.children[0].children[0].terms[2] == Term::literal("A"));

  CHECK(parse_formula("exists x (x = x)") == Formula::exists("x", Formula::equal(Term::var("x"), Term::var("x"))));
  CHECK(parse_formula("exists x . x = x") == parse_formula("exists x (x = x)"));
  CHECK(parse_formula("!A(x) & B(x) | C(x)") ==
        Formula::disjunction(Formula::conjunction(Formula::negation(Formula::atom("A", {Term::var("x")})),
                                                  Formula::atom("B", {Term::var("x")})),
                             Formula::atom("C", {Term::var("x")})));
  CHECK(parse_formula("p() -> q() -> r()").children[1].op == Connective::implication);
  CHECK(parse_formula("p() <-> q() -> r()").op == Connective::equivalence);
  CHECK(parse_formula("exists<=2 x . T(x, \"5 Regent St.\")").op == Connective::at_most);
  CHECK(parse_formula("exists>=1 y T(y, 3)").count == 1);
  CHECK(parse_formula("forall x . P(x) -> false").children[0].children[1].op == Connective::falsity);
}

TEST_CASE("parser reports positions and schema errors") {
  CHECK(error_column("R(x,") == 5);
  CHECK(error_column("R(x) &") == 7);
  CHECK(error_column("forall (R(x))") == 8);
  CHECK(error_column("x = ") == 5);
  CHECK(error_column("exists<=1 x y . R(x)") == 15);
  KDatabase db = stock();
  CHECK_THROWS_AS(parse(db, "SHELF(x)"), ParseError);
  CHECK_THROWS_AS(parse(db, "STOCK(x, y)"), ParseError);
  try {
    parse_formula("R(x) &\n  S(y) |", nullptr);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 9);
  }
}

TEST_CASE("declared constants resolve against the database") {
  KDatabase db = load_database(
      "semiring boolean\nattr V : string\nrel R(V)\nconst c : V = a\nfact R(a)\nfact R(b)\n");
  Formula f = parse(db, "R(c) & !R(\"d\") & x = c");
  CHECK(f.children[0].children[0].terms[0] == Term::constant("c"));
  CHECK(eval_boolean(db, f, {{"x", "a"}}));
  CHECK_FALSE(eval_boolean(db, f, {{"x", "b"}}));
  CHECK(answers(db, parse(db, "R(x) & x != c")) == std::set<AnswerTuple>{{"b"}});
}

TEST_CASE("round trip through the printer") {
  for (const char* text : {"forall x y . R(x, y) -> exists z (S(z) & z != \"q r\")", "!(A() <-> B())",
                           "exists>=3 u . P(u) | u = 12", "true & !false"}) {
    Formula f = parse_formula(text);
    CHECK(parse_formula(to_string(f)) == f);
  }
}

TEST_CASE("nnf and desugaring shapes") {
  Formula a = Formula::atom("A", {});
  Formula b = Formula::atom("B", {});
  CHECK(nnf(Formula::negation(Formula::conjunction(a, b))) ==
        Formula::disjunction(Formula::negation(a), Formula::negation(b)));
  Formula rx = Formula::atom("R", {Term::var("x")});
  CHECK(nnf(Formula::negation(Formula::forall("x", rx))) == Formula::exists("x", Formula::negation(rx)));
  CHECK(nnf(Formula::negation(Formula::equal(Term::var("x"), Term::var("y")))) ==
        Formula::not_equal(Term::var("x"), Term::var("y")));
  CHECK(nnf(Formula::implication(a, b)) == Formula::disjunction(Formula::negation(a), b));
  CHECK(desugar_counting(Formula::at_most(0, "x", rx)) == Formula::forall("x", Formula::negation(rx)));
  CHECK(desugar_counting(Formula::at_least(1, "x", rx)) == Formula::exists("x", rx));
  CHECK(desugar_counting(Formula::at_least(0, "x", rx)) == Formula::truth());
  Formula le1 = desugar_counting(Formula::at_most(1, "x", rx));
  CHECK(le1.op == Connective::forall);
  CHECK(le1.children[0].op == Connective::forall);
  CHECK(le1.children[0].children[0].op == Connective::implication);
  CHECK_THROWS_AS(Formula::at_most(-1, "x", rx), UsageError);
  CHECK_THROWS_AS(nnf(Formula::at_most(1, "x", rx)), UsageError);
}

TEST_CASE("evaluation on the stock database") {
  KDatabase db = stock();
  CHECK(eval_annotated(db, parse(db, "exists x y z . STOCK(x, y, z)")) == Value::natural(17));
  CHECK(eval_annotated(db, parse(db, "exists x y x' y' . STOCK(x,y,A) & STOCK(x',y',A) & y != y'")) ==
        Value::natural(48));
  CHECK(eval_annotated(db, parse(db, "!STOCK(999, \"kale\", Z)")) == Value::natural(1));
  Formula phi_a = parse(db, "forall x y x' y' (STOCK(x,y,A) & STOCK(x',y',A) -> y = y')");
  CHECK_FALSE(eval_boolean(db, phi_a));
  CHECK(eval_boolean(db, Formula::negation(phi_a)));
  CHECK(eval_annotated(db, Formula::negation(phi_a)) == Value::natural(48));
  CHECK(eval_boolean(db, parse(db, "exists x (x = x)")));
  CHECK_THROWS_AS(eval_annotated(db, parse(db, "STOCK(x, y, z)")), UsageError);
  CHECK(eval_annotated(db, parse(db, "STOCK(x, y, z)"), {{"x", "112"}, {"y", "cabbage"}, {"z", "A"}}) ==
        Value::natural(6));
}

TEST_CASE("answers and annotated answers") {
  KDatabase db = stock();
  auto rows = answers(db, parse(db, "STOCK(x, y, z)"));
  CHECK(rows == std::set<AnswerTuple>{{"112", "potato", "A"}, {"112", "cabbage", "A"}, {"113", "carrot", "B"}});
  CHECK(answers(db, parse(db, "BUILDINGS(u, v) & u = A")) == std::set<AnswerTuple>{{"A", "5 Regent St."}});
  auto w = annotated_answers(db, parse(db, "STOCK(x, y, z)"));
  CHECK(w.size() == 3);
  CHECK(w.at({"112", "cabbage", "A"}) == Value::natural(6));
  auto sentence = annotated_answers(db, parse(db, "exists x y z . STOCK(x, y, z)"));
  CHECK(sentence.size() == 1);
  CHECK(sentence.at({}) == Value::natural(17));

  KDatabase empty = load_database("semiring boolean\nattr V : string\nrel R(V)\n");
  CHECK(answers(empty, parse_formula("R(x)")).empty());

  KDatabase two = load_database("semiring natural\nattr V : string\nrel R(V)\nfact R(a) @ 2\n");
  auto dup = annotated_answers(two, parse_formula("R(x) | R(x)"));
  CHECK(dup == std::map<AnswerTuple, Value>{{{"a"}, Value::natural(4)}});
}

TEST_CASE("extra values widen quantifier ranges") {
  KDatabase db = load_database("semiring natural\nattr V : string\nrel R(V)\nfact R(a) @ 2\n");
  Formula all = parse_formula("forall x . R(x)");
  CHECK(eval_annotated(db, all) == Value::natural(2));
  CHECK(eval_annotated(db, all, {}, EvalOptions{{"fresh"}}).is_zero());
  CHECK(eval_annotated(db, parse_formula("exists x . x = x"), {}, EvalOptions{{"fresh", "a"}}) == Value::natural(2));
}

TEST_CASE("random formulas agree with the reference evaluators") {
  std::mt19937 rng(20240611);
  testsupport::FormulaGen gen{rng};
  int checked = 0;
  for (int round = 0; round < 400; ++round) {
    KDatabase db = testsupport::random_db(rng, SemiringKind::natural);
    auto pdb = plain(db);
    if (pdb.adom.empty()) continue;
    Formula f = gen.gen(4);
    testsupport::Env env;
    for (const auto& v : gen.vars) env[v] = *std::next(pdb.adom.begin(), gen.pick(static_cast<int>(pdb.adom.size())));
    Value got = eval_annotated(db, f, env);
    CHECK_MESSAGE(got == Value::natural(testsupport::annotated(pdb, f, env)), to_string(f));
    CHECK(eval_boolean(db, f, env) == !got.is_zero());
    CHECK(eval_boolean(db, f, env) == testsupport::tarski(pdb, f, env));
    ++checked;
  }
  CHECK(checked > 300);
}

TEST_CASE("desugaring preserves Boolean truth on small databases") {
  std::mt19937 rng(99);
  testsupport::FormulaGen gen{rng};
  gen.counting = true;
  for (int round = 0; round < 400; ++round) {
    KDatabase db = testsupport::random_db(rng, SemiringKind::boolean);
    auto pdb = plain(db);
    Formula f = gen.gen(3);
    testsupport::Env env;
    for (const auto& v : gen.vars) env[v] = pdb.adom.empty() ? "a" : *pdb.adom.begin();
    CHECK_MESSAGE(eval_boolean(db, f, env) == testsupport::tarski(pdb, f, env), to_string(f));
  }
}
