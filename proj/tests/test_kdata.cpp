#include <doctest.h>

#include "krepair/error.hpp"
#include "krepair/kdata.hpp"

#include <string>

using namespace krepair;

namespace {

const std::string kData = KREPAIR_DATA_DIR;

const char* kHeader =
    "semiring natural\n"
    "attr ID : int\n"
    "attr Product : string\n"
    "attr Warehouse : string\n"
    "rel STOCK(ID, Product, Warehouse)\n";

}  // namespace

TEST_CASE("the stock database loads with its annotations") {
  KDatabase db = load_database_file(kData + "/stock.kdb");
  CHECK(db.semiring() == SemiringKind::natural);
  CHECK(db.fact_count() == 6);
  CHECK(annotation(db, "STOCK", {"112", "potato", "A"}) == Value::natural(4));
  CHECK(annotation(db, "STOCK", {"112", "cabbage", "A"}) == Value::natural(6));
  CHECK(annotation(db, "STOCK", {"113", "carrot", "B"}) == Value::natural(7));
  CHECK(annotation(db, "STOCK", {"999", "kale", "Z"}).is_zero());
  CHECK(annotation(db, "BUILDINGS", {"A", "5 Regent St."}) == Value::natural(1));
  CHECK_THROWS_AS(annotation(db, "WAREHOUSES", {"A"}), UsageError);
  CHECK(db.max_annotation() == 7);
}

TEST_CASE("active domain collects every record component") {
  KDatabase db = load_database_file(kData + "/stock.kdb");
  std::set<std::string> expected{"112", "113", "potato", "cabbage", "carrot", "A", "B", "C", "D",
                                 "5 Regent St.", "2 Broad Ln.", "14 Mappin St."};
  CHECK(active_domain(db) == expected);

  KDatabase empty = load_database(std::string(kHeader));
  CHECK(active_domain(empty).empty());
  CHECK(empty.fact_count() == 0);

  KDatabase one = load_database("semiring boolean\nattr V : string\nrel R(V, V)\nfact R(a, a)\n");
  CHECK(active_domain(one) == std::set<std::string>{"a"});
}

TEST_CASE("constants belong to the active domain") {
  KDatabase db = load_database(
      "semiring boolean\nattr V : string\nattr W : string\nrel R(V)\nconst w : W = hub\nfact R(a)\n");
  CHECK(active_domain(db) == std::set<std::string>{"a", "hub"});
  auto w = db.schema().find_attribute("W");
  REQUIRE(w);
  CHECK(db.attribute_domain(*w).size() == 1);
  auto v = db.schema().find_attribute("V");
  CHECK(db.attribute_domain(*v).size() == 1);
}

TEST_CASE("malformed database files are rejected with a line number") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      load_database(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  std::string dup = std::string(kHeader) + "fact STOCK(112, potato, A) @ 4\nfact STOCK(112, potato, A) @ 4\n";
  CHECK(line_of(dup) == 7);
  CHECK(line_of(std::string(kHeader) + "fact STOCK(112, potato, A) @ 0\n") == 6);
  CHECK(line_of(std::string(kHeader) + "fact STOCK(abc, potato, A)\n") == 6);
  CHECK(line_of(std::string(kHeader) + "fact STOCK(112, potato)\n") == 6);
  CHECK(line_of(std::string(kHeader) + "fact SHELF(1)\n") == 6);
  CHECK(line_of("semiring natural\nrel R(Nope)\n") == 2);
  CHECK(line_of("semiring tropical\n") == 1);
  CHECK(line_of("semiring boolean\nattr V : string\nrel R(V)\nfact R(a) @ 2\n") == 4);
  CHECK(line_of("attr V : string\n") == 0);
  CHECK_THROWS_AS(load_database("attr V : string\n"), ParseError);
  CHECK_THROWS_AS(load_database_file(kData + "/does-not-exist.kdb"), ParseError);
}

TEST_CASE("annotations default to one and zero removes the record") {
  KDatabase db = load_database(std::string(kHeader) + "fact STOCK(1, x, A)\n");
  auto rel = db.schema().relation_index("STOCK");
  CHECK(annotation(db, "STOCK", {"1", "x", "A"}) == Value::natural(1));
  Tuple t = db.relation(rel).begin()->first;
  db.set(rel, t, Value::zero(SemiringKind::natural));
  CHECK(db.fact_count() == 0);
  CHECK(db.relation(rel).empty());
  CHECK_THROWS_AS(db.set(rel, t, Value::boolean(true)), UsageError);
}

TEST_CASE("serialization round-trips") {
  for (const char* text : {
           "semiring natural\nattr ID : int\nattr P : string\nrel S(ID, P)\nfact S(3, \"a b\") @ 12\nfact S(-4, q)\n",
           "semiring probability\nattr V : string\nrel R(V, V)\nrel Z()\nfact R(a, b) @ 1/3\nfact R(b, a) @ 0.5\nfact Z()\n",
           "semiring boolean\nattr V : string\nattr W : string\nrel R(V)\nconst c : W = \"odd,token\"\nfact R(\"x#y\")\n",
       }) {
    KDatabase a = load_database(text);
    std::string out = serialize_database(a);
    KDatabase b = load_database(out);
    CHECK(a == b);
    CHECK(serialize_database(b) == out);
  }
  KDatabase db = load_database_file(kData + "/stock.kdb");
  CHECK(load_database(serialize_database(db)) == db);
}

TEST_CASE("canonical facts follow declaration order") {
  KDatabase db = load_database_file(kData + "/stock.kdb");
  auto facts = canonical_facts(db);
  REQUIRE(facts.size() == 6);
  CHECK(facts.front().relation == "STOCK");
  CHECK(facts.back().relation == "BUILDINGS");
  CHECK(format_fact(facts[0]) == "STOCK(112, cabbage, A) @ 6");
  CHECK(quote_token("5 Regent St.") == "\"5 Regent St.\"");
}
