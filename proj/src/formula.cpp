#include "krepair/error.hpp"
#include "krepair/logic.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace krepair {

namespace {

Formula make(Connective op, std::vector<Formula> children = {}) {
  Formula f;
  f.op = op;
  f.children = std::move(children);
  return f;
}

Formula make_quantifier(Connective op, std::string var, Formula body, long long k = 0) {
  Formula f = make(op, {std::move(body)});
  f.variable = std::move(var);
  f.count = k;
  return f;
}

bool is_quantifier(Connective op) {
  return op == Connective::forall || op == Connective::exists || op == Connective::at_most ||
         op == Connective::at_least;
}

}  // namespace

Formula Formula::truth() { return make(Connective::truth); }
Formula Formula::falsity() { return make(Connective::falsity); }

Formula Formula::atom(std::string relation, std::vector<Term> terms) {
  Formula f = make(Connective::atom);
  f.relation = std::move(relation);
  f.terms = std::move(terms);
  return f;
}

Formula Formula::equal(Term a, Term b) {
  Formula f = make(Connective::equal);
  f.terms = {std::move(a), std::move(b)};
  return f;
}

Formula Formula::not_equal(Term a, Term b) {
  Formula f = make(Connective::not_equal);
  f.terms = {std::move(a), std::move(b)};
  return f;
}

Formula Formula::negation(Formula f) { return make(Connective::negation, {std::move(f)}); }
Formula Formula::conjunction(Formula a, Formula b) { return make(Connective::conjunction, {std::move(a), std::move(b)}); }
Formula Formula::disjunction(Formula a, Formula b) { return make(Connective::disjunction, {std::move(a), std::move(b)}); }
Formula Formula::implication(Formula a, Formula b) { return make(Connective::implication, {std::move(a), std::move(b)}); }
Formula Formula::equivalence(Formula a, Formula b) { return make(Connective::equivalence, {std::move(a), std::move(b)}); }
Formula Formula::forall(std::string var, Formula body) { return make_quantifier(Connective::forall, std::move(var), std::move(body)); }
Formula Formula::exists(std::string var, Formula body) { return make_quantifier(Connective::exists, std::move(var), std::move(body)); }

Formula Formula::at_most(long long k, std::string var, Formula body) {
  if (k < 0) throw UsageError("counting quantifier bound must be non-negative");
  return make_quantifier(Connective::at_most, std::move(var), std::move(body), k);
}

Formula Formula::at_least(long long k, std::string var, Formula body) {
  if (k < 0) throw UsageError("counting quantifier bound must be non-negative");
  return make_quantifier(Connective::at_least, std::move(var), std::move(body), k);
}

bool operator==(const Formula& a, const Formula& b) {
  return a.op == b.op && a.relation == b.relation && a.terms == b.terms && a.variable == b.variable &&
         a.count == b.count && a.children == b.children;
}

namespace {

std::string term_string(const Term& t) {
  if (t.kind != Term::Kind::literal) return t.name;
  bool plain = !t.name.empty() && !std::islower(static_cast<unsigned char>(t.name[0]));
  for (char c : t.name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '\'') plain = false;
  }
  if (plain) return t.name;
  std::string out = "\"";
  for (char c : t.name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void print(const Formula& f, std::string& out) {
  auto binary = [&](const char* sym) {
    out += "(";
    print(f.children[0], out);
    out += sym;
    print(f.children[1], out);
    out += ")";
  };
  switch (f.op) {
    case Connective::truth: out += "true"; return;
    case Connective::falsity: out += "false"; return;
    case Connective::atom:
      out += f.relation + "(";
      for (std::size_t i = 0; i < f.terms.size(); ++i) out += (i ? ", " : "") + term_string(f.terms[i]);
      out += ")";
      return;
    case Connective::equal: out += term_string(f.terms[0]) + " = " + term_string(f.terms[1]); return;
    case Connective::not_equal: out += term_string(f.terms[0]) + " != " + term_string(f.terms[1]); return;
    case Connective::negation:
      out += "!";
      print(f.children[0], out);
      return;
    case Connective::conjunction: binary(" & "); return;
    case Connective::disjunction: binary(" | "); return;
    case Connective::implication: binary(" -> "); return;
    case Connective::equivalence: binary(" <-> "); return;
    case Connective::forall: out += "forall " + f.variable + " ("; break;
    case Connective::exists: out += "exists " + f.variable + " ("; break;
    case Connective::at_most: out += "exists<=" + std::to_string(f.count) + " " + f.variable + " ("; break;
    case Connective::at_least: out += "exists>=" + std::to_string(f.count) + " " + f.variable + " ("; break;
  }
  print(f.children[0], out);
  out += ")";
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

namespace {

// Calls visit(node, position, term) for every free variable occurrence.
void walk_free(const Formula& f, std::vector<std::string>& bound,
               const std::function<void(const Formula*, std::size_t, const Term&)>& visit) {
  switch (f.op) {
    case Connective::atom:
    case Connective::equal:
    case Connective::not_equal:
      for (std::size_t i = 0; i < f.terms.size(); ++i) {
        const Term& t = f.terms[i];
        if (t.kind == Term::Kind::variable && std::find(bound.begin(), bound.end(), t.name) == bound.end()) {
          visit(&f, i, t);
        }
      }
      return;
    default: break;
  }
  if (is_quantifier(f.op)) {
    bound.push_back(f.variable);
    walk_free(f.children[0], bound, visit);
    bound.pop_back();
    return;
  }
  for (const auto& c : f.children) walk_free(c, bound, visit);
}

}  // namespace

std::vector<std::string> free_variables(const Formula& f) {
  std::vector<std::string> out;
  std::vector<std::string> bound;
  walk_free(f, bound, [&](const Formula*, std::size_t, const Term& t) {
    if (std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
  });
  return out;
}

std::map<std::string, std::set<std::size_t>> free_variable_attributes(const Formula& f, const Schema& schema) {
  std::map<std::string, std::set<std::size_t>> out;
  std::vector<std::string> bound;
  walk_free(f, bound, [&](const Formula* node, std::size_t pos, const Term& t) {
    auto& attrs = out[t.name];
    if (node->op != Connective::atom) return;
    auto rel = schema.find_relation(node->relation);
    if (rel && pos < schema.arity(*rel)) attrs.insert(schema.relations()[*rel].type[pos]);
  });
  return out;
}

std::set<std::string> relations_of(const Formula& f) {
  std::set<std::string> out;
  std::function<void(const Formula&)> rec = [&](const Formula& g) {
    if (g.op == Connective::atom) out.insert(g.relation);
    for (const auto& c : g.children) rec(c);
  };
  rec(f);
  return out;
}

namespace {

// Replaces free occurrences of `from` by the variable `to`. `to` is always a
// fresh name, so no capture can occur.
Formula rename_free(const Formula& f, const std::string& from, const std::string& to) {
  if (is_quantifier(f.op) && f.variable == from) return f;
  Formula out = f;
  for (auto& t : out.terms) {
    if (t.kind == Term::Kind::variable && t.name == from) t.name = to;
  }
  for (auto& c : out.children) c = rename_free(c, from, to);
  return out;
}

Formula conjoin(std::vector<Formula> parts) {
  if (parts.empty()) return Formula::truth();
  Formula acc = std::move(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) acc = Formula::conjunction(std::move(acc), std::move(parts[i]));
  return acc;
}

Formula disjoin(std::vector<Formula> parts) {
  if (parts.empty()) return Formula::falsity();
  Formula acc = std::move(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) acc = Formula::disjunction(std::move(acc), std::move(parts[i]));
  return acc;
}

class Desugarer {
 public:
  Formula run(const Formula& f) {
    if (f.op != Connective::at_most && f.op != Connective::at_least) {
      Formula out = f;
      for (auto& c : out.children) c = run(c);
      return out;
    }
    if (f.count < 0) throw UsageError("counting quantifier bound must be non-negative");
    Formula body = run(f.children[0]);
    const std::string& x = f.variable;
    if (f.op == Connective::at_least) {
      if (f.count == 0) return Formula::truth();
      if (f.count == 1) return Formula::exists(x, body);
      return expand(x, body, static_cast<std::size_t>(f.count), true);
    }
    if (f.count == 0) return Formula::forall(x, Formula::negation(body));
    return expand(x, body, static_cast<std::size_t>(f.count) + 1, false);
  }

 private:
  // at_least: exists x1..xn (psi(x1) & .. & psi(xn) & pairwise distinct)
  // at_most:  forall x1..xn (psi(x1) & .. & psi(xn) -> some pair equal)
  Formula expand(const std::string& x, const Formula& body, std::size_t n, bool at_least) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(x + "#" + std::to_string(++fresh_));
    std::vector<Formula> witnesses;
    for (const auto& name : names) witnesses.push_back(rename_free(body, x, name));
    std::vector<Formula> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        pairs.push_back(at_least ? Formula::not_equal(Term::var(names[i]), Term::var(names[j]))
                                 : Formula::equal(Term::var(names[i]), Term::var(names[j])));
      }
    }
    Formula matrix;
    if (at_least) {
      for (auto& p : pairs) witnesses.push_back(std::move(p));
      matrix = conjoin(std::move(witnesses));
    } else {
      matrix = Formula::implication(conjoin(std::move(witnesses)), disjoin(std::move(pairs)));
    }
    for (auto it = names.rbegin(); it != names.rend(); ++it) {
      matrix = at_least ? Formula::exists(*it, std::move(matrix)) : Formula::forall(*it, std::move(matrix));
    }
    return matrix;
  }

  std::size_t fresh_ = 0;
};

Formula push(const Formula& f, bool negate) {
  switch (f.op) {
    case Connective::truth: return negate ? Formula::falsity() : f;
    case Connective::falsity: return negate ? Formula::truth() : f;
    case Connective::atom: return negate ? Formula::negation(f) : f;
    case Connective::equal: return negate ? Formula::not_equal(f.terms[0], f.terms[1]) : f;
    case Connective::not_equal: return negate ? Formula::equal(f.terms[0], f.terms[1]) : f;
    case Connective::negation: return push(f.children[0], !negate);
    case Connective::conjunction:
    case Connective::disjunction: {
      Formula a = push(f.children[0], negate);
      Formula b = push(f.children[1], negate);
      bool conj = (f.op == Connective::conjunction) != negate;
      return conj ? Formula::conjunction(std::move(a), std::move(b)) : Formula::disjunction(std::move(a), std::move(b));
    }
    case Connective::implication:
      return push(Formula::disjunction(Formula::negation(f.children[0]), f.children[1]), negate);
    case Connective::equivalence: {
      const Formula& a = f.children[0];
      const Formula& b = f.children[1];
      return push(Formula::conjunction(Formula::disjunction(Formula::negation(a), b),
                                       Formula::disjunction(Formula::negation(b), a)),
                  negate);
    }
    case Connective::forall:
    case Connective::exists: {
      bool universal = (f.op == Connective::forall) != negate;
      Formula body = push(f.children[0], negate);
      return universal ? Formula::forall(f.variable, std::move(body)) : Formula::exists(f.variable, std::move(body));
    }
    case Connective::at_most:
    case Connective::at_least: throw UsageError("nnf requires counting quantifiers to be desugared first");
  }
  return f;
}

}  // namespace

Formula desugar_counting(const Formula& f) { return Desugarer().run(f); }

Formula nnf(const Formula& f) { return push(f, false); }

}  // namespace krepair
