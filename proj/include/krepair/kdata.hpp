#pragma once

#include "krepair/semiring.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace krepair {

// Interned data value. Ids are dense and stable for the lifetime of the
// symbol table they came from.
using DataId = std::uint32_t;
using Tuple = std::vector<DataId>;

// Append-only token dictionary shared between a database and every candidate
// derived from it.
class SymbolTable {
 public:
  DataId intern(std::string_view token);
  std::optional<DataId> find(std::string_view token) const;
  const std::string& token(DataId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, DataId> ids_;
};

enum class Sort { string, integer };

struct Attribute {
  std::string name;
  Sort sort = Sort::string;
};

struct RelationDecl {
  std::string name;
  std::vector<std::size_t> type;  // attribute index per column
};

struct ConstantDecl {
  std::string name;
  std::size_t attribute = 0;
};

class Schema {
 public:
  std::size_t add_attribute(std::string name, Sort sort);
  std::size_t add_relation(std::string name, const std::vector<std::string>& attribute_names);
  std::size_t add_constant(std::string name, const std::string& attribute_name);

  std::optional<std::size_t> find_attribute(std::string_view name) const;
  std::optional<std::size_t> find_relation(std::string_view name) const;
  std::optional<std::size_t> find_constant(std::string_view name) const;
  // Like find_relation but throws UsageError for unknown names.
  std::size_t relation_index(std::string_view name) const;

  const std::vector<Attribute>& attributes() const { return attributes_; }
  const std::vector<RelationDecl>& relations() const { return relations_; }
  const std::vector<ConstantDecl>& constants() const { return constants_; }
  std::size_t arity(std::size_t relation) const { return relations_.at(relation).type.size(); }

  // True when `token` is a well-formed literal of the attribute's sort.
  bool admits(std::size_t attribute, std::string_view token) const;

 private:
  std::vector<Attribute> attributes_;
  std::vector<RelationDecl> relations_;
  std::vector<ConstantDecl> constants_;
};

// Finite map from tuples to non-zero annotations. Tuples outside the map are
// annotated 0.
using KRelation = std::map<Tuple, Value>;

class KDatabase {
 public:
  KDatabase(std::shared_ptr<const Schema> schema, SemiringKind semiring,
            std::shared_ptr<SymbolTable> symbols = std::make_shared<SymbolTable>());

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  SemiringKind semiring() const { return semiring_; }
  SymbolTable& symbols() const { return *symbols_; }
  const std::shared_ptr<SymbolTable>& symbols_ptr() const { return symbols_; }

  // Same schema, semiring, symbols and constants, no facts.
  KDatabase empty_copy() const;

  const KRelation& relation(std::size_t index) const { return relations_.at(index); }
  std::size_t relation_count() const { return relations_.size(); }

  Value get(std::size_t relation, const Tuple& tuple) const;
  // Setting an annotation to 0 removes the record.
  void set(std::size_t relation, Tuple tuple, Value value);

  std::optional<DataId> constant(std::size_t index) const { return constants_.at(index); }
  void set_constant(std::size_t index, DataId value) { constants_.at(index) = value; }

  // Sorted ids of adom(D): record components plus interpreted constants.
  std::vector<DataId> active_domain_ids() const;
  // Values of adom(D) occurring under the given attribute, plus constants of
  // that attribute. Sorted by id.
  std::vector<DataId> attribute_domain(std::size_t attribute) const;

  std::size_t fact_count() const;
  Natural max_annotation() const;  // 0 for an empty database; probability rejected

  // Structural equality over facts and constants (symbols may differ).
  friend bool operator==(const KDatabase& a, const KDatabase& b);

 private:
  std::shared_ptr<const Schema> schema_;
  SemiringKind semiring_;
  std::shared_ptr<SymbolTable> symbols_;
  std::vector<KRelation> relations_;
  std::vector<std::optional<DataId>> constants_;
};

// Parses the line-oriented database format.
KDatabase load_database(std::string_view text);
KDatabase load_database_file(const std::string& path);
// Canonical text form; load_database(serialize_database(db)) == db.
std::string serialize_database(const KDatabase& db);

std::set<std::string> active_domain(const KDatabase& db);

Value annotation(const KDatabase& db, std::string_view relation, const std::vector<std::string>& record);

// A fact rendered with tokens, used for canonical ordering and output.
struct Fact {
  std::string relation;
  std::vector<std::string> args;
  std::string annotation;
  friend auto operator<=>(const Fact&, const Fact&) = default;
};

// Facts sorted by relation declaration order, then by tokens.
std::vector<Fact> canonical_facts(const KDatabase& db);
std::string format_fact(const Fact& fact);
// Quotes a token when it would not survive the database lexer unquoted.
std::string quote_token(const std::string& token);

}  // namespace krepair
