#include "krepair/kdata.hpp"

#include "krepair/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace krepair {

DataId SymbolTable::intern(std::string_view token) {
  std::string key(token);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  auto id = static_cast<DataId>(tokens_.size());
  tokens_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

std::optional<DataId> SymbolTable::find(std::string_view token) const {
  if (auto it = ids_.find(std::string(token)); it != ids_.end()) return it->second;
  return std::nullopt;
}

std::size_t Schema::add_attribute(std::string name, Sort sort) {
  if (find_attribute(name)) throw UsageError("attribute '" + name + "' declared twice");
  attributes_.push_back({std::move(name), sort});
  return attributes_.size() - 1;
}

std::size_t Schema::add_relation(std::string name, const std::vector<std::string>& attribute_names) {
  if (find_relation(name)) throw UsageError("relation '" + name + "' declared twice");
  RelationDecl decl{std::move(name), {}};
  for (const auto& a : attribute_names) {
    auto idx = find_attribute(a);
    if (!idx) throw UsageError("relation '" + decl.name + "' uses undeclared attribute '" + a + "'");
    decl.type.push_back(*idx);
  }
  relations_.push_back(std::move(decl));
  return relations_.size() - 1;
}

std::size_t Schema::add_constant(std::string name, const std::string& attribute_name) {
  if (find_constant(name)) throw UsageError("constant '" + name + "' declared twice");
  auto idx = find_attribute(attribute_name);
  if (!idx) throw UsageError("constant '" + name + "' uses undeclared attribute '" + attribute_name + "'");
  constants_.push_back({std::move(name), *idx});
  return constants_.size() - 1;
}

namespace {

template <typename Decls>
std::optional<std::size_t> find_by_name(const Decls& decls, std::string_view name) {
  for (std::size_t i = 0; i < decls.size(); ++i) {
    if (decls[i].name == name) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> Schema::find_attribute(std::string_view name) const { return find_by_name(attributes_, name); }
std::optional<std::size_t> Schema::find_relation(std::string_view name) const { return find_by_name(relations_, name); }
std::optional<std::size_t> Schema::find_constant(std::string_view name) const { return find_by_name(constants_, name); }

std::size_t Schema::relation_index(std::string_view name) const {
  auto idx = find_relation(name);
  if (!idx) throw UsageError("unknown relation '" + std::string(name) + "'");
  return *idx;
}

bool Schema::admits(std::size_t attribute, std::string_view token) const {
  if (attributes_.at(attribute).sort == Sort::string) return true;
  std::string_view digits = token;
  if (!digits.empty() && digits.front() == '-') digits.remove_prefix(1);
  return !digits.empty() && std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); });
}

KDatabase::KDatabase(std::shared_ptr<const Schema> schema, SemiringKind semiring, std::shared_ptr<SymbolTable> symbols)
    : schema_(std::move(schema)),
      semiring_(semiring),
      symbols_(std::move(symbols)),
      relations_(schema_->relations().size()),
      constants_(schema_->constants().size()) {}

KDatabase KDatabase::empty_copy() const {
  KDatabase out(schema_, semiring_, symbols_);
  out.constants_ = constants_;
  return out;
}

Value KDatabase::get(std::size_t relation, const Tuple& tuple) const {
  const KRelation& rel = relations_.at(relation);
  if (auto it = rel.find(tuple); it != rel.end()) return it->second;
  return Value::zero(semiring_);
}

void KDatabase::set(std::size_t relation, Tuple tuple, Value value) {
  if (tuple.size() != schema_->arity(relation)) {
    throw UsageError("arity mismatch for relation '" + schema_->relations()[relation].name + "'");
  }
  if (value.kind() != semiring_) throw UsageError("annotation from a different semiring");
  KRelation& rel = relations_.at(relation);
  if (value.is_zero()) {
    rel.erase(tuple);
  } else {
    rel.insert_or_assign(std::move(tuple), std::move(value));
  }
}

std::vector<DataId> KDatabase::active_domain_ids() const {
  std::vector<DataId> out;
  for (const auto& rel : relations_) {
    for (const auto& [tuple, value] : rel) out.insert(out.end(), tuple.begin(), tuple.end());
  }
  for (const auto& c : constants_) {
    if (c) out.push_back(*c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<DataId> KDatabase::attribute_domain(std::size_t attribute) const {
  std::vector<DataId> out;
  const auto& decls = schema_->relations();
  for (std::size_t r = 0; r < decls.size(); ++r) {
    for (std::size_t col = 0; col < decls[r].type.size(); ++col) {
      if (decls[r].type[col] != attribute) continue;
      for (const auto& [tuple, value] : relations_[r]) out.push_back(tuple[col]);
    }
  }
  const auto& consts = schema_->constants();
  for (std::size_t c = 0; c < consts.size(); ++c) {
    if (consts[c].attribute == attribute && constants_[c]) out.push_back(*constants_[c]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t KDatabase::fact_count() const {
  std::size_t n = 0;
  for (const auto& rel : relations_) n += rel.size();
  return n;
}

Natural KDatabase::max_annotation() const {
  Natural best = 0;
  for (const auto& rel : relations_) {
    for (const auto& [tuple, value] : rel) best = std::max(best, value.integral());
  }
  return best;
}

bool operator==(const KDatabase& a, const KDatabase& b) {
  if (a.semiring_ != b.semiring_ || a.schema_->relations().size() != b.schema_->relations().size()) return false;
  for (std::size_t c = 0; c < a.constants_.size(); ++c) {
    const auto& x = a.constants_[c];
    const auto& y = b.constants_.at(c);
    if (x.has_value() != y.has_value()) return false;
    if (x && a.symbols_->token(*x) != b.symbols_->token(*y)) return false;
  }
  if (a.symbols_ == b.symbols_) return a.relations_ == b.relations_;
  return canonical_facts(a) == canonical_facts(b);
}

namespace {

// Tokenizer for one line of the database format.
class LineLexer {
 public:
  LineLexer(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  struct Token {
    enum class Kind { word, quoted, punct, end } kind;
    std::string text;
    std::size_t column;
  };

  Token next() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    std::size_t col = pos_ + 1;
    if (pos_ >= line_.size() || line_[pos_] == '#') return {Token::Kind::end, "", col};
    char c = line_[pos_];
    if (c == '"') {
      std::string text;
      ++pos_;
      while (pos_ < line_.size() && line_[pos_] != '"') {
        if (line_[pos_] == '\\' && pos_ + 1 < line_.size()) ++pos_;
        text += line_[pos_++];
      }
      if (pos_ >= line_.size()) throw ParseError("unterminated quoted string", line_no_, col);
      ++pos_;
      return {Token::Kind::quoted, std::move(text), col};
    }
    if (is_punct(c)) {
      ++pos_;
      return {Token::Kind::punct, std::string(1, c), col};
    }
    std::size_t start = pos_;
    while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_])) && !is_punct(line_[pos_]) &&
           line_[pos_] != '"' && line_[pos_] != '#') {
      ++pos_;
    }
    return {Token::Kind::word, std::string(line_.substr(start, pos_ - start)), col};
  }

  Token expect_word(const char* what) {
    Token t = next();
    if (t.kind != Token::Kind::word) throw ParseError(std::string("expected ") + what, line_no_, t.column);
    return t;
  }

  Token expect_value(const char* what) {
    Token t = next();
    if (t.kind != Token::Kind::word && t.kind != Token::Kind::quoted) {
      throw ParseError(std::string("expected ") + what, line_no_, t.column);
    }
    return t;
  }

  void expect_punct(char p) {
    Token t = next();
    if (t.kind != Token::Kind::punct || t.text[0] != p) {
      throw ParseError(std::string("expected '") + p + "'", line_no_, t.column);
    }
  }

  void expect_end() {
    Token t = next();
    if (t.kind != Token::Kind::end) throw ParseError("unexpected '" + t.text + "'", line_no_, t.column);
  }

  std::size_t line_no() const { return line_no_; }

 private:
  static bool is_punct(char c) { return c == '(' || c == ')' || c == ',' || c == ':' || c == '=' || c == '@'; }

  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

using Tok = LineLexer::Token;

// Parses "( a, b, ... )" and returns the element tokens.
std::vector<Tok> parse_arg_list(LineLexer& lex) {
  lex.expect_punct('(');
  std::vector<Tok> out;
  Tok t = lex.next();
  if (t.kind == Tok::Kind::punct && t.text == ")") return out;
  while (true) {
    if (t.kind != Tok::Kind::word && t.kind != Tok::Kind::quoted) {
      throw ParseError("expected an argument", lex.line_no(), t.column);
    }
    out.push_back(t);
    Tok sep = lex.next();
    if (sep.kind == Tok::Kind::punct && sep.text == ")") return out;
    if (sep.kind != Tok::Kind::punct || sep.text != ",") throw ParseError("expected ',' or ')'", lex.line_no(), sep.column);
    t = lex.next();
  }
}

struct PendingFact {
  std::size_t relation;
  std::vector<std::string> args;
  Value value;
  std::size_t line;
};

}  // namespace

KDatabase load_database(std::string_view text) {
  auto schema = std::make_shared<Schema>();
  std::optional<SemiringKind> semiring;
  std::vector<std::pair<std::size_t, std::string>> constant_values;
  std::vector<PendingFact> facts;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    LineLexer lex(line, line_no);
    Tok head = lex.next();
    if (head.kind == Tok::Kind::end) continue;
    if (head.kind != Tok::Kind::word) throw ParseError("expected a declaration keyword", line_no, head.column);

    try {
      if (head.text == "semiring") {
        Tok k = lex.expect_word("a semiring name");
        semiring = parse_semiring_kind(k.text);
        if (!semiring) throw ParseError("unknown semiring '" + k.text + "'", line_no, k.column);
        if (!facts.empty()) throw ParseError("semiring must be declared before facts", line_no, head.column);
        lex.expect_end();
      } else if (head.text == "attr") {
        Tok name = lex.expect_word("an attribute name");
        lex.expect_punct(':');
        Tok sort = lex.expect_word("a sort");
        Sort s;
        if (sort.text == "string") {
          s = Sort::string;
        } else if (sort.text == "int" || sort.text == "integer") {
          s = Sort::integer;
        } else {
          throw ParseError("unknown sort '" + sort.text + "'", line_no, sort.column);
        }
        lex.expect_end();
        schema->add_attribute(name.text, s);
      } else if (head.text == "rel") {
        Tok name = lex.expect_word("a relation name");
        std::vector<std::string> attrs;
        for (const auto& t : parse_arg_list(lex)) attrs.push_back(t.text);
        lex.expect_end();
        schema->add_relation(name.text, attrs);
      } else if (head.text == "const") {
        Tok name = lex.expect_word("a constant name");
        lex.expect_punct(':');
        Tok attr = lex.expect_word("an attribute name");
        lex.expect_punct('=');
        Tok value = lex.expect_value("a constant value");
        lex.expect_end();
        std::size_t idx = schema->add_constant(name.text, attr.text);
        if (!schema->admits(schema->constants()[idx].attribute, value.text)) {
          throw ParseError("constant '" + name.text + "' is not of sort " + attr.text, line_no, value.column);
        }
        constant_values.emplace_back(idx, value.text);
      } else if (head.text == "fact") {
        if (!semiring) throw ParseError("facts require a preceding 'semiring' line", line_no, head.column);
        Tok name = lex.expect_word("a relation name");
        auto rel = schema->find_relation(name.text);
        if (!rel) throw ParseError("unknown relation '" + name.text + "'", line_no, name.column);
        auto args = parse_arg_list(lex);
        const auto& type = schema->relations()[*rel].type;
        if (args.size() != type.size()) {
          throw ParseError("relation '" + name.text + "' has arity " + std::to_string(type.size()), line_no,
                           name.column);
        }
        PendingFact fact{*rel, {}, Value::one(*semiring), line_no};
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (!schema->admits(type[i], args[i].text)) {
            throw ParseError("'" + args[i].text + "' is not a value of attribute " +
                                 schema->attributes()[type[i]].name,
                             line_no, args[i].column);
          }
          fact.args.push_back(args[i].text);
        }
        Tok at = lex.next();
        if (at.kind == Tok::Kind::punct && at.text == "@") {
          Tok v = lex.expect_word("an annotation");
          fact.value = parse_value(*semiring, v.text);
          if (fact.value.is_zero()) throw ParseError("annotation 0 must not be written explicitly", line_no, v.column);
          lex.expect_end();
        } else if (at.kind != Tok::Kind::end) {
          throw ParseError("expected '@' or end of line", line_no, at.column);
        }
        facts.push_back(std::move(fact));
      } else {
        throw ParseError("unknown declaration '" + head.text + "'", line_no, head.column);
      }
    } catch (const UsageError& e) {
      throw ParseError(e.what(), line_no);
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.what(), line_no);
    }
  }

  if (!semiring) throw ParseError("missing 'semiring' declaration");
  KDatabase db(schema, *semiring);
  for (const auto& [idx, token] : constant_values) db.set_constant(idx, db.symbols().intern(token));
  for (auto& f : facts) {
    Tuple tuple;
    for (const auto& a : f.args) tuple.push_back(db.symbols().intern(a));
    if (!db.get(f.relation, tuple).is_zero()) {
      throw ParseError("duplicate fact for " + schema->relations()[f.relation].name, f.line);
    }
    db.set(f.relation, std::move(tuple), std::move(f.value));
  }
  return db;
}

KDatabase load_database_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open database file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_database(ss.str());
}

std::string quote_token(const std::string& token) {
  bool plain = !token.empty();
  for (char c : token) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',' || c == ':' || c == '=' ||
        c == '@' || c == '"' || c == '#' || c == '\\' || c == ';') {
      plain = false;
    }
  }
  if (plain) return token;
  std::string out = "\"";
  for (char c : token) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::vector<Fact> canonical_facts(const KDatabase& db) {
  std::vector<Fact> out;
  const auto& decls = db.schema().relations();
  for (std::size_t r = 0; r < decls.size(); ++r) {
    std::vector<Fact> rel_facts;
    for (const auto& [tuple, value] : db.relation(r)) {
      Fact f{decls[r].name, {}, value.to_string()};
      for (DataId id : tuple) f.args.push_back(db.symbols().token(id));
      rel_facts.push_back(std::move(f));
    }
    std::sort(rel_facts.begin(), rel_facts.end());
    out.insert(out.end(), rel_facts.begin(), rel_facts.end());
  }
  return out;
}

std::string format_fact(const Fact& fact) {
  std::string out = fact.relation + "(";
  for (std::size_t i = 0; i < fact.args.size(); ++i) {
    if (i) out += ", ";
    out += quote_token(fact.args[i]);
  }
  return out + ") @ " + fact.annotation;
}

std::string serialize_database(const KDatabase& db) {
  std::ostringstream out;
  const Schema& s = db.schema();
  out << "semiring " << to_string(db.semiring()) << "\n";
  for (const auto& a : s.attributes()) out << "attr " << a.name << " : " << (a.sort == Sort::string ? "string" : "int") << "\n";
  for (const auto& r : s.relations()) {
    out << "rel " << r.name << "(";
    for (std::size_t i = 0; i < r.type.size(); ++i) out << (i ? ", " : "") << s.attributes()[r.type[i]].name;
    out << ")\n";
  }
  for (std::size_t c = 0; c < s.constants().size(); ++c) {
    if (auto v = db.constant(c)) {
      out << "const " << s.constants()[c].name << " : " << s.attributes()[s.constants()[c].attribute].name << " = "
          << quote_token(db.symbols().token(*v)) << "\n";
    }
  }
  for (const auto& f : canonical_facts(db)) out << "fact " << format_fact(f) << "\n";
  return out.str();
}

std::set<std::string> active_domain(const KDatabase& db) {
  std::set<std::string> out;
  for (DataId id : db.active_domain_ids()) out.insert(db.symbols().token(id));
  return out;
}

Value annotation(const KDatabase& db, std::string_view relation, const std::vector<std::string>& record) {
  std::size_t rel = db.schema().relation_index(relation);
  if (record.size() != db.schema().arity(rel)) {
    throw UsageError("arity mismatch for relation '" + std::string(relation) + "'");
  }
  Tuple tuple;
  for (const auto& token : record) {
    auto id = db.symbols().find(token);
    if (!id) return Value::zero(db.semiring());
    tuple.push_back(*id);
  }
  return db.get(rel, tuple);
}

}  // namespace krepair
