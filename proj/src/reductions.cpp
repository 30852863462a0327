#include "krepair/reductions.hpp"

#include "krepair/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace krepair {

namespace {

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string strip_comment(std::string line, char mark) {
  if (auto pos = line.find(mark); pos != std::string::npos) line.erase(pos);
  return line;
}

ReductionInstance build(const std::string& database_text, const std::string& framework_text,
                        const std::string& query_text) {
  KDatabase db = load_database(database_text);
  FrameworkOptions options;
  options.trust_hics = true;
  RepairFramework fw = parse_framework(framework_text, db.schema(), options);
  std::optional<Formula> query;
  if (!query_text.empty()) query = parse_formula(query_text, &db.schema());
  return {std::move(db), std::move(fw), std::move(query), database_text, framework_text, query_text};
}

std::string fact(std::string_view relation, std::initializer_list<std::string> args) {
  std::string out = "fact " + std::string(relation) + "(";
  bool first = true;
  for (const auto& a : args) {
    if (!first) out += ", ";
    out += a;
    first = false;
  }
  return out + ")\n";
}

const std::string kColourFacts = [] {
  std::string out;
  for (int j = 1; j <= 3; ++j) {
    for (int k = 1; k <= 3; ++k) {
      if (j != k) out += fact("P", {std::to_string(j), std::to_string(k)});
    }
  }
  return out;
}();

std::string bits(int mask) {
  return std::to_string((mask >> 2) & 1) + std::to_string((mask >> 1) & 1) + std::to_string(mask & 1);
}

}  // namespace

std::vector<int> Cnf3::variables() const {
  std::set<int> vars;
  for (const auto& c : clauses) {
    for (const auto& l : c) vars.insert(l.variable);
  }
  return {vars.begin(), vars.end()};
}

Graph parse_edge_list(std::string_view text) {
  Graph g;
  std::set<std::string> seen;
  std::set<std::pair<std::string, std::string>> edges;
  auto vertex = [&](const std::string& v) {
    if (seen.insert(v).second) g.vertices.push_back(v);
  };
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto words = split_words(strip_comment(line, '#'));
    if (words.empty()) continue;
    if (words.size() > 2) throw ParseError("expected 'v w' or a single vertex", line_no, 1);
    for (const auto& w : words) vertex(w);
    if (words.size() == 2 && edges.insert({words[0], words[1]}).second) g.edges.emplace_back(words[0], words[1]);
  }
  return g;
}

Cnf3 parse_dimacs(std::string_view text) {
  Cnf3 f;
  std::vector<Literal> pending;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto words = split_words(line);
    if (words.empty() || words[0] == "c" || words[0][0] == 'c') continue;
    if (words[0] == "p") {
      if (words.size() != 4 || words[1] != "cnf") throw ParseError("expected 'p cnf <vars> <clauses>'", line_no, 1);
      continue;
    }
    for (const auto& w : words) {
      int lit = 0;
      try {
        std::size_t used = 0;
        lit = std::stoi(w, &used);
        if (used != w.size()) throw std::invalid_argument(w);
      } catch (const std::exception&) {
        throw ParseError("'" + w + "' is not a literal", line_no, 1);
      }
      if (lit != 0) {
        pending.push_back({std::abs(lit), lit > 0});
        continue;
      }
      if (pending.size() != 3) {
        throw ParseError("clause has " + std::to_string(pending.size()) + " literals, expected 3", line_no, 1);
      }
      f.clauses.push_back({pending[0], pending[1], pending[2]});
      pending.clear();
    }
  }
  if (!pending.empty()) throw ParseError("last clause is not terminated by 0", line_no, 1);
  return f;
}

std::string to_dimacs(const Cnf3& f) {
  auto vars = f.variables();
  std::string out = "p cnf " + std::to_string(vars.empty() ? 0 : vars.back()) + " " +
                    std::to_string(f.clauses.size()) + "\n";
  for (const auto& c : f.clauses) {
    for (const auto& l : c) out += std::to_string(l.positive ? l.variable : -l.variable) + " ";
    out += "0\n";
  }
  return out;
}

std::vector<Graph> graphs_up_to_isomorphism(std::size_t max_vertices) {
  if (max_vertices > 6) throw UsageError("graph enumeration is limited to 6 vertices");
  std::vector<Graph> out;
  for (std::size_t n = 0; n <= max_vertices; ++n) {
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) slots.emplace_back(a, b);
    }
    std::vector<std::size_t> where(n * n);
    for (std::size_t s = 0; s < slots.size(); ++s) {
      where[slots[s].first * n + slots[s].second] = s;
      where[slots[s].second * n + slots[s].first] = s;
    }
    for (unsigned mask = 0; mask < (1u << slots.size()); ++mask) {
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      unsigned best = mask;
      do {
        unsigned image = 0;
        for (std::size_t s = 0; s < slots.size(); ++s) {
          if (mask >> s & 1) image |= 1u << where[perm[slots[s].first] * n + perm[slots[s].second]];
        }
        best = std::min(best, image);
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (best != mask) continue;  // keep the least mask of each class
      Graph g;
      for (std::size_t v = 0; v < n; ++v) g.vertices.push_back("v" + std::to_string(v + 1));
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (mask >> s & 1) g.edges.emplace_back(g.vertices[slots[s].first], g.vertices[slots[s].second]);
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

ReductionInstance reduce_3col_cqa(const Graph& g) {
  std::string db = "semiring boolean\nattr Vertex : string\nattr Colour : int\n"
                   "rel E(Vertex, Vertex)\nrel P(Colour, Colour)\nrel C(Vertex, Colour)\n";
  for (const auto& [x, y] : g.edges) db += fact("E", {x, y});
  db += kColourFacts;
  std::string fw =
      "hic: forall x y (E(x, y) -> exists j k (C(x, j) & C(y, k) & P(j, k)));\n"
      "hq+: E(x, y);\nhq+: P(j, k);\n"
      "hq-: E(x, y);\nhq-: P(j, k);\n"
      "sq: C(x, j);\n"
      "compare: order\n";
  return build(db, fw, "exists x j k (C(x, j) & C(x, k) & P(j, k))");
}

ReductionInstance reduce_3col_exists(const Graph& g) {
  std::string db = "semiring boolean\nattr Vertex : string\nattr Colour : int\n"
                   "rel E(Vertex, Vertex)\nrel P(Colour, Colour)\nrel C(Vertex, Colour)\n";
  for (const auto& [x, y] : g.edges) db += fact("E", {x, y});
  db += kColourFacts;
  for (const auto& v : g.vertices) {
    for (int j = 1; j <= 3; ++j) db += fact("C", {v, std::to_string(j)});
  }
  std::string fw =
      "hic: forall x j k (C(x, j) & C(x, k) & P(j, k) -> false);\n"
      "hic: forall x y j k (E(x, y) & C(x, k) & C(y, j) -> P(k, j));\n"
      "hq+: exists j . C(x, j);\nhq+: E(x, y);\nhq+: P(j, k);\n"
      "hq-: E(x, y);\nhq-: P(j, k);\n"
      "mode: annotation-unaware\n"
      "compare: distance(abs, sum)\n";
  return build(db, fw, "");
}

ReductionInstance reduce_1in3sat(const Cnf3& f) {
  std::string db = "semiring boolean\nattr Var : string\nattr Bit : int\n"
                   "rel P(Var, Bit)\nrel R(Var, Var, Var)\nrel E(Bit, Bit)\nrel S(Bit, Bit, Bit)\n";
  for (const auto& c : f.clauses) {
    for (const auto& l : c) {
      if (!l.positive) throw UsageError("1-in-3 instances must have positive literals only");
    }
    db += fact("R", {"x" + std::to_string(c[0].variable), "x" + std::to_string(c[1].variable),
                     "x" + std::to_string(c[2].variable)});
  }
  for (int v : f.variables()) {
    db += fact("P", {"x" + std::to_string(v), "0"});
    db += fact("P", {"x" + std::to_string(v), "1"});
  }
  db += fact("E", {"0", "0"}) + fact("E", {"1", "1"});
  for (int m = 0; m < 8; ++m) {
    if (m == 1 || m == 2 || m == 4) continue;
    db += fact("S", {std::to_string(m >> 2 & 1), std::to_string(m >> 1 & 1), std::to_string(m & 1)});
  }
  std::string fw =
      "hic: forall x u w (P(x, u) & P(x, w) -> E(u, w));\n"
      "hq+: E(x, y);\nhq+: R(x, y, z);\nhq+: S(u, v, w);\n"
      "hq-: E(x, y);\nhq-: R(x, y, z);\nhq-: S(u, v, w);\nhq-: P(x, u);\n"
      "sq: P(x, u);\n"
      "compare: order\n";
  return build(db, fw,
               "exists x1 x2 x3 u1 u2 u3 (R(x1, x2, x3) & P(x1, u1) & P(x2, u2) & P(x3, u3) & S(u1, u2, u3))");
}

ReductionInstance reduce_maxsat_eq(const Cnf3& f0, const Cnf3& f1) {
  const Cnf3* f[2] = {&f0, &f1};
  if (f0.clauses.size() != f1.clauses.size() || f0.variables().size() != f1.variables().size()) {
    throw UsageError("both formulas need the same numbers of clauses and variables");
  }
  auto token = [](int i, int v) { return std::string(i == 0 ? "p" : "q") + std::to_string(v); };

  // Relations are declared in the order the search branches on them: the
  // assignments, then the soft-query relations they force, then F.
  std::string db = "semiring natural\n"
                   "attr Var : string\nattr V0 : string\nattr V1 : string\nattr Bit : int\n"
                   "attr Idx : int\nattr Copy : int\nattr Flag : string\n"
                   "rel I0(Var, Bit)\nrel I1(Var, Bit)\nrel Ihat(Var, Idx, Copy)\nrel A(Flag)\nrel F(V0, V1)\n"
                   "rel E(Bit, Bit)\nrel D(Var, Var)\n";
  for (int m = 0; m < 8; ++m) db += "rel T" + bits(m) + "(Bit, Bit, Bit)\n";
  for (int i = 0; i < 2; ++i) {
    for (int m = 0; m < 8; ++m) {
      db += "rel R" + std::to_string(i) + "_" + bits(m) + "(V" + std::to_string(i) + ", V" + std::to_string(i) +
            ", V" + std::to_string(i) + ")\n";
    }
  }
  db += "const zero : Bit = 0\nconst one : Bit = 1\nconst idx0 : Idx = 0\nconst idx1 : Idx = 1\n"
        "const copy1 : Copy = 1\nconst copy2 : Copy = 2\nconst flag : Flag = f\n";

  for (int i = 0; i < 2; ++i) {
    auto vars = f[i]->variables();
    for (int v : vars) {
      db += fact("I" + std::to_string(i), {token(i, v), "0"});
      db += fact("I" + std::to_string(i), {token(i, v), "1"});
      for (int w : vars) {
        if (v != w) db += fact("D", {token(i, v), token(i, w)});
      }
    }
    // A clause goes to the relation named by its falsifying assignment.
    for (const auto& c : f[i]->clauses) {
      int falsifying = 0;
      for (const auto& l : c) falsifying = falsifying << 1 | (l.positive ? 0 : 1);
      db += fact("R" + std::to_string(i) + "_" + bits(falsifying),
                 {token(i, c[0].variable), token(i, c[1].variable), token(i, c[2].variable)});
    }
  }
  db += fact("E", {"0", "0"}) + fact("E", {"1", "1"});
  for (int a = 0; a < 8; ++a) {
    for (int m = 0; m < 8; ++m) {
      if (m != a) db += fact("T" + bits(a), {std::to_string(m >> 2 & 1), std::to_string(m >> 1 & 1),
                                             std::to_string(m & 1)});
    }
  }

  std::string fw;
  for (int i = 0; i < 2; ++i) {
    std::string I = "I" + std::to_string(i);
    for (int a = 0; a < 8; ++a) {
      fw += "hic: forall x1 x2 x3 (R" + std::to_string(i) + "_" + bits(a) + "(x1, x2, x3) -> exists v1 v2 v3 (" + I +
            "(x1, v1) & " + I + "(x2, v2) & " + I + "(x3, v3) & T" + bits(a) + "(v1, v2, v3)));\n";
    }
    fw += "hic: forall x v w (" + I + "(x, v) & " + I + "(x, w) -> E(v, w));\n";
    fw += "hic: forall x (" + I + "(x, zero) -> Ihat(x, idx" + std::to_string(i) + ", copy1) & Ihat(x, idx" +
          std::to_string(i) + ", copy2));\n";
  }
  fw += "hic: forall x (I0(x, one) -> exists y (F(x, y) & I1(y, one)));\n";
  fw += "hic: forall y (I1(y, one) -> exists x (F(x, y) & I0(x, one)));\n";
  fw += "hic: forall x y z (F(x, y) & F(x, z) & D(y, z) -> exists s . A(s));\n";
  fw += "hic: forall x y z (F(x, y) & F(z, y) & D(x, z) -> exists s . A(s));\n";
  std::string pinned = "E(x, y);\n";
  pinned += "D(x, y);\n";
  for (int m = 0; m < 8; ++m) pinned += "T" + bits(m) + "(x, y, z);\n";
  for (int i = 0; i < 2; ++i) {
    for (int m = 0; m < 8; ++m) pinned += "R" + std::to_string(i) + "_" + bits(m) + "(x, y, z);\n";
  }
  std::istringstream lines(pinned);
  for (std::string l; std::getline(lines, l);) fw += "hq+: " + l + "\nhq-: " + l + "\n";
  fw += "hq-: I0(x, y);\nhq-: I1(x, y);\n";
  fw += "sq: Ihat(x, y, z);\nsq: A(s);\n";
  fw += "mode: annotation-unaware\ncompare: distance(abs, sum)\n";
  return build(db, fw, "exists s . A(s)");
}

}  // namespace krepair
