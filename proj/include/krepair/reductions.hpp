#pragma once

#include "krepair/framework.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace krepair {

struct Graph {
  std::vector<std::string> vertices;
  std::vector<std::pair<std::string, std::string>> edges;  // ordered pairs of vertices
};

struct Literal {
  int variable = 1;  // positive index
  bool positive = true;
  friend bool operator==(const Literal&, const Literal&) = default;
};

struct Cnf3 {
  std::vector<std::array<Literal, 3>> clauses;
  // Distinct variables occurring in some clause, ascending.
  std::vector<int> variables() const;
};

// A generated instance together with the text it was built from.
struct ReductionInstance {
  KDatabase db;
  RepairFramework framework;
  std::optional<Formula> query;
  std::string database_text;
  std::string framework_text;
  std::string query_text;
};

// "v w" per line adds the edge (v, w); a single token declares a vertex.
// Blank lines and '#' comments are ignored.
Graph parse_edge_list(std::string_view text);
// DIMACS-like: optional "p cnf V C" header, 'c' comment lines, clauses of
// exactly three non-zero literals terminated by 0.
Cnf3 parse_dimacs(std::string_view text);
std::string to_dimacs(const Cnf3& f);

// One representative per isomorphism class of undirected simple graphs on
// 0..max_vertices vertices (edges stored once, lower name first).
std::vector<Graph> graphs_up_to_isomorphism(std::size_t max_vertices);

// The repairs of the result falsify the query for some repair iff g is
// 3-colourable (LAV tgd, closeness order over C).
ReductionInstance reduce_3col_cqa(const Graph& g);
// A repair exists iff g is 3-colourable (GAV constraints, no soft queries).
ReductionInstance reduce_3col_exists(const Graph& g);
// The Boolean query holds in every repair iff f has no 1-in-3 assignment.
ReductionInstance reduce_1in3sat(const Cnf3& f);
// The Boolean query holds in every minimal-distance repair iff the maximum
// numbers of true variables in satisfying assignments differ.
ReductionInstance reduce_maxsat_eq(const Cnf3& f0, const Cnf3& f1);

bool oracle_3col(const Graph& g, std::size_t max_vertices = 12);
bool oracle_1in3sat(const Cnf3& f);
// Largest number of true variables in a satisfying assignment, if any.
std::optional<std::size_t> max_true(const Cnf3& f);
// Equal maxima; two unsatisfiable formulas count as equal.
bool oracle_maxtrue_eq(const Cnf3& f0, const Cnf3& f1);

enum class ClassicalKind { subset, superset, symmetric_difference, cardinality };

// Classical repairs of a Boolean database w.r.t. sentences, over the
// instances built from type-consistent tuples of adom(db) plus extras.
std::vector<KDatabase> oracle_classical_repairs(const KDatabase& db, const std::vector<Formula>& ics,
                                                ClassicalKind kind,
                                                const std::vector<std::string>& extra_values = {},
                                                std::size_t max_instances = 1u << 22);

// Framework encodings of the classical notions: subset via HQL- and the
// closeness order, cardinality via free atoms and summed distance. The
// cardinality encoding needs the natural semiring, so the database is
// lifted (support annotated 1) and the framework is annotation-unaware.
std::pair<KDatabase, RepairFramework> encode_classical(const KDatabase& db, const std::vector<Formula>& ics,
                                                       ClassicalKind kind);

}  // namespace krepair
