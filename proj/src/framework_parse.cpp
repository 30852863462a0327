#include "krepair/error.hpp"
#include "krepair/framework.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace krepair {

std::string_view to_string(AnnotationMode mode) {
  return mode == AnnotationMode::aware ? "annotation-aware" : "annotation-unaware";
}

std::string_view to_string(OrderResult r) {
  switch (r) {
    case OrderResult::leq: return "leq";
    case OrderResult::gt: return "gt";
    case OrderResult::incomparable: return "incomparable";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Blanks out '#' comments (outside quotes) so positions are preserved.
std::string strip_comments(std::string_view text) {
  std::string out(text);
  bool quoted = false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    char c = out[i];
    if (quoted) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == '#') {
      while (i < out.size() && out[i] != '\n') out[i++] = ' ';
      --i;
    }
  }
  return out;
}

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 1;
  std::size_t column = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void advance() {
    if (text[pos] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
    ++pos;
  }
  void skip_space() {
    while (!done() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }
};

void parse_compare(const std::string& value, RepairFramework& fw, std::size_t line) {
  if (value == "order") {
    fw.compare = CompareKind::order;
    return;
  }
  std::string compact;
  for (char c : value) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
  }
  const std::string prefix = "distance(";
  if (compact.rfind(prefix, 0) == 0 && compact.back() == ')') {
    std::string inner = compact.substr(prefix.size(), compact.size() - prefix.size() - 1);
    auto comma = inner.find(',');
    std::string delta = comma == std::string::npos ? inner : inner.substr(0, comma);
    std::string agg = comma == std::string::npos ? "sum" : inner.substr(comma + 1);
    if (delta != "abs") throw ParseError("unsupported distance '" + delta + "' (only abs)", line);
    auto kind = parse_aggregate_kind(agg);
    if (!kind) throw ParseError("unknown aggregate '" + agg + "'", line);
    fw.compare = CompareKind::distance;
    fw.distance_agg = *kind;
    return;
  }
  throw ParseError("compare must be 'order' or 'distance(abs, <aggregate>)'", line);
}

void parse_measure(const std::string& value, RepairFramework& fw, std::size_t line) {
  std::istringstream in(value);
  std::string fsc, agg, extra;
  in >> fsc >> agg >> extra;
  if (!extra.empty() || fsc.empty()) throw ParseError("measure must be '<boolean|annotated> <aggregate>'", line);
  if (fsc == "boolean") {
    fw.im.fsc = ViolationKind::boolean;
  } else if (fsc == "annotated") {
    fw.im.fsc = ViolationKind::annotated;
  } else {
    throw ParseError("unknown violation kind '" + fsc + "'", line);
  }
  if (agg.empty()) agg = "sum";
  auto kind = parse_aggregate_kind(agg);
  if (!kind) throw ParseError("unknown aggregate '" + agg + "'", line);
  fw.im.agg = *kind;
}

void parse_epsilon(const std::string& value, RepairFramework& fw, std::size_t line) {
  std::string v = value;
  if (!v.empty() && v[0] == '-') throw ParseError("epsilon must be non-negative", line);
  try {
    fw.epsilon = parse_value(SemiringKind::probability, v).numeric();
  } catch (const ParseError& e) {
    throw ParseError(std::string("bad epsilon: ") + e.what(), line);
  }
}

}  // namespace

RepairFramework parse_framework(std::string_view raw, const Schema& schema, const FrameworkOptions& options) {
  std::string text = strip_comments(raw);
  RepairFramework fw;
  Cursor cur{text};
  std::set<std::string> seen;

  while (true) {
    cur.skip_space();
    if (cur.done()) break;
    std::size_t key_line = cur.line;
    std::size_t key_col = cur.column;
    std::string key;
    while (!cur.done() && cur.peek() != ':' && cur.peek() != '\n') {
      key += cur.peek();
      cur.advance();
    }
    key = trim(key);
    if (cur.done() || cur.peek() != ':') throw ParseError("expected '<key>:'", key_line, key_col);
    cur.advance();

    std::vector<Formula>* target = nullptr;
    bool sentence = false;
    if (key == "hic") {
      target = &fw.hard_constraints;
      sentence = true;
    } else if (key == "sic") {
      target = &fw.soft_constraints;
      sentence = true;
    } else if (key == "hq+") {
      target = &fw.hql_plus;
    } else if (key == "hq-") {
      target = &fw.hql_minus;
    } else if (key == "sq") {
      target = &fw.sql;
    }

    if (target) {
      SourcePosition origin{cur.line, cur.column};
      std::size_t start = cur.pos;
      bool quoted = false;
      while (!cur.done() && (quoted || cur.peek() != ';')) {
        if (cur.peek() == '"') quoted = !quoted;
        if (quoted && cur.peek() == '\\') cur.advance();
        if (!cur.done()) cur.advance();
      }
      if (cur.done()) throw ParseError("formula for '" + key + "' is missing its terminating ';'", key_line, key_col);
      std::string_view body(text.data() + start, cur.pos - start);
      cur.advance();
      Formula f = parse_formula(body, &schema, origin);
      if (sentence) {
        auto free = free_variables(f);
        if (!free.empty()) {
          throw ParseError("unbound variable '" + free.front() + "' (not a declared constant) in a constraint",
                           origin.line, origin.column);
        }
      }
      target->push_back(std::move(f));
      continue;
    }

    std::string value;
    while (!cur.done() && cur.peek() != '\n') {
      value += cur.peek();
      cur.advance();
    }
    value = trim(value);
    if (!seen.insert(key).second) throw ParseError("duplicate setting '" + key + "'", key_line, key_col);
    if (key == "mode") {
      if (value == "annotation-aware" || value == "aware") {
        fw.mode = AnnotationMode::aware;
      } else if (value == "annotation-unaware" || value == "unaware") {
        fw.mode = AnnotationMode::unaware;
      } else {
        throw ParseError("unknown mode '" + value + "'", key_line);
      }
    } else if (key == "compare") {
      parse_compare(value, fw, key_line);
    } else if (key == "epsilon") {
      parse_epsilon(value, fw, key_line);
    } else if (key == "measure") {
      parse_measure(value, fw, key_line);
    } else {
      throw ParseError("unknown setting '" + key + "'", key_line, key_col);
    }
  }

  if (!options.trust_hics) verify_hard_constraints_consistent(fw.hard_constraints, schema, options);
  return fw;
}

RepairFramework parse_framework_file(const std::string& path, const Schema& schema, const FrameworkOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open framework file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_framework(ss.str(), schema, options);
}

namespace {

void collect_terms(const Formula& f, std::set<std::string>& literals, std::set<std::string>& constants) {
  for (const auto& t : f.terms) {
    if (t.kind == Term::Kind::literal) literals.insert(t.name);
    if (t.kind == Term::Kind::constant) constants.insert(t.name);
  }
  for (const auto& c : f.children) collect_terms(c, literals, constants);
}

// Visits every k-subset of {0..n-1} in lexicographic order until visit
// returns true.
bool for_each_subset(std::size_t n, std::size_t k, const std::function<bool(const std::vector<std::size_t>&)>& visit) {
  if (k > n) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (visit(idx)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

void verify_hard_constraints_consistent(const std::vector<Formula>& hics, const Schema& schema,
                                        const FrameworkOptions& options) {
  if (hics.empty()) return;
  auto scratch_schema = std::make_shared<const Schema>(schema);
  auto symbols = std::make_shared<SymbolTable>();
  std::set<std::string> literals, constant_names, relation_names;
  for (const auto& f : hics) {
    collect_terms(f, literals, constant_names);
    auto rels = relations_of(f);
    relation_names.insert(rels.begin(), rels.end());
  }
  std::vector<CompiledFormula> compiled;
  for (const auto& f : hics) compiled.emplace_back(f, *scratch_schema, *symbols);
  std::vector<std::size_t> constants;
  for (const auto& c : constant_names) constants.push_back(*schema.find_constant(c));
  std::vector<std::size_t> relations;
  for (const auto& r : relation_names) relations.push_back(schema.relation_index(r));

  std::size_t evaluated = 0;
  for (std::size_t n = 0; n <= options.consistency_domain; ++n) {
    std::vector<DataId> domain;
    for (const auto& l : literals) domain.push_back(symbols->intern(l));
    for (std::size_t i = 0, made = 0; made < n; ++i) {
      std::string token = std::to_string(700000 + i);
      if (literals.count(token)) continue;
      domain.push_back(symbols->intern(token));
      ++made;
    }
    if (domain.empty() && !constants.empty()) continue;

    std::vector<std::pair<std::size_t, Tuple>> universe;
    for (std::size_t r : relations) {
      std::size_t arity = schema.arity(r);
      Tuple t(arity);
      std::function<void(std::size_t)> build = [&](std::size_t pos) {
        if (pos == arity) {
          universe.emplace_back(r, t);
          return;
        }
        for (DataId d : domain) {
          t[pos] = d;
          build(pos + 1);
        }
      };
      if (arity == 0 || !domain.empty()) build(0);
    }

    std::size_t constant_choices = 1;
    for (std::size_t i = 0; i < constants.size(); ++i) constant_choices *= domain.size();

    for (std::size_t k = 0; k <= universe.size(); ++k) {
      bool found = for_each_subset(universe.size(), k, [&](const std::vector<std::size_t>& pick) {
        for (std::size_t choice = 0; choice < constant_choices; ++choice) {
          if (++evaluated > options.consistency_budget) {
            throw ParseError("consistency unverified: no database satisfying the hard constraints was found within "
                             "the search budget (use --trust-hics to skip this check)");
          }
          KDatabase db(scratch_schema, SemiringKind::boolean, symbols);
          std::size_t rest = choice;
          for (std::size_t c : constants) {
            db.set_constant(c, domain[rest % domain.size()]);
            rest /= domain.size();
          }
          for (std::size_t i : pick) db.set(universe[i].first, universe[i].second, Value::boolean(true));
          auto qdom = quantifier_domain(db);
          if (std::all_of(compiled.begin(), compiled.end(),
                          [&](const CompiledFormula& cf) { return cf.holds(db, {}, qdom); })) {
            return true;
          }
        }
        return false;
      });
      if (found) return;
    }
  }
  throw ParseError("consistency unverified: the hard constraints have no model with at most " +
                   std::to_string(options.consistency_domain) + " fresh elements (use --trust-hics to skip this check)");
}

}  // namespace krepair
