#include "krepair/engine.hpp"
#include "krepair/error.hpp"
#include "krepair/reductions.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace krepair;
using nlohmann::json;

namespace {

enum Exit { ok = 0, negative = 1, usage = 2, budget = 3 };

struct Options {
  std::string db_path;
  std::string framework_path;
  std::optional<std::uint64_t> ann_cap;
  std::uint64_t max_candidates = 20'000'000;
  std::vector<std::string> extra_values;
  std::string order_semantics = "closeness";
  std::string output_format = "text";
  bool trust_hics = false;

  std::string formula;
  std::vector<std::string> tuple;
  std::string algo = "naive";
  std::string via = "search";
  std::string kind;
  std::string notion = "subset";
  std::vector<std::string> inputs;
  std::string out_dir;

  bool json() const { return output_format == "json-lines"; }

  CandidateBounds bounds() const {
    CandidateBounds b;
    if (ann_cap) b.annotation_cap = Natural(*ann_cap);
    b.extra_values = extra_values;
    b.max_candidates = max_candidates;
    return b;
  }

  EvalOptions eval_options() const { return {extra_values}; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

KDatabase load_db(const Options& o) {
  if (o.db_path.empty()) throw UsageError("--db is required");
  return load_database_file(o.db_path);
}

RepairFramework load_framework(const Options& o, const KDatabase& db) {
  if (o.framework_path.empty()) throw UsageError("--framework is required");
  FrameworkOptions fo;
  fo.trust_hics = o.trust_hics;
  auto fw = parse_framework_file(o.framework_path, db.schema(), fo);
  fw.order_semantics = o.order_semantics == "literal" ? OrderSemantics::literal : OrderSemantics::closeness;
  return fw;
}

std::vector<std::string> fact_lines(const KDatabase& db) {
  std::vector<std::string> out;
  for (const auto& f : canonical_facts(db)) out.push_back(format_fact(f));
  return out;
}

void print_repairs(const Options& o, const std::vector<KDatabase>& dbs, const std::optional<Value>& distance) {
  if (o.json()) {
    json head{{"repairs", dbs.size()}};
    if (distance) head["distance"] = distance->to_string();
    std::cout << head.dump() << "\n";
    for (std::size_t i = 0; i < dbs.size(); ++i) {
      json line{{"repair", i + 1}, {"facts", fact_lines(dbs[i])}, {"database", serialize_database(dbs[i])}};
      std::cout << line.dump() << "\n";
    }
    return;
  }
  std::cout << "repairs: " << dbs.size() << "\n";
  if (distance) std::cout << "distance: " << distance->to_string() << "\n";
  for (std::size_t i = 0; i < dbs.size(); ++i) {
    std::cout << "repair " << i + 1 << "\n";
    for (const auto& line : fact_lines(dbs[i])) std::cout << "  " << line << "\n";
  }
}

int print_verdict(const Options& o, const std::string& key, bool value) {
  if (o.json()) {
    std::cout << json{{key, value}}.dump() << "\n";
  } else {
    std::cout << key << ": " << (value ? "true" : "false") << "\n";
  }
  return value ? ok : negative;
}

int run_eval(const Options& o) {
  auto db = load_db(o);
  Formula f = parse_formula(o.formula, &db.schema());
  if (free_variables(f).empty()) {
    Value v = eval_annotated(db, f, {}, o.eval_options());
    if (o.json()) {
      std::cout << json{{"value", v.to_string()}}.dump() << "\n";
    } else {
      std::cout << "value = " << v.to_string() << "\n";
    }
    return ok;
  }
  auto vars = free_variables(f);
  for (const auto& [tuple, v] : annotated_answers(db, f, o.eval_options())) {
    if (o.json()) {
      std::cout << json{{"variables", vars}, {"tuple", tuple}, {"value", v.to_string()}}.dump() << "\n";
      continue;
    }
    std::string joined;
    for (const auto& t : tuple) joined += (joined.empty() ? "" : ", ") + quote_token(t);
    std::cout << "(" << joined << ") @ " << v.to_string() << "\n";
  }
  return ok;
}

int run_im(const Options& o) {
  auto db = load_db(o);
  auto fw = load_framework(o, db);
  Value v = inconsistency_measure(db, fw.soft_constraints, fw.im, o.eval_options());
  if (o.json()) {
    std::cout << json{{"im", v.to_string()}}.dump() << "\n";
  } else {
    std::cout << "IM = " << v.to_string() << "\n";
  }
  return ok;
}

int run_repair(const Options& o) {
  auto db = load_db(o);
  auto fw = load_framework(o, db);
  auto report = repairs(db, fw, o.bounds());
  print_repairs(o, report.repairs, report.min_distance);
  return ok;
}

int run_exists(const Options& o) {
  auto db = load_db(o);
  auto fw = load_framework(o, db);
  bool found = o.via == "eso" ? eso_exists_repair_check(db, fw, o.bounds()) : exists_repair(db, fw, o.bounds());
  return print_verdict(o, "exists", found);
}

int run_cqa(const Options& o) {
  auto db = load_db(o);
  auto fw = load_framework(o, db);
  Formula q = parse_formula(o.formula, &db.schema());
  if (free_variables(q).size() != o.tuple.size()) {
    throw UsageError("the query has " + std::to_string(free_variables(q).size()) +
                     " free variables but --tuple gives " + std::to_string(o.tuple.size()) + " values");
  }
  CQAAnswer a = o.algo == "binsearch" ? cqa_binary_search(db, fw, q, o.tuple, o.bounds())
                                      : cqa(db, fw, q, o.tuple, o.bounds());
  if (o.json()) {
    json line{{"consistent", a.consistent}, {"vacuous", a.vacuous}, {"tuple", o.tuple}};
    if (o.algo != "binsearch") line["repairs"] = a.repair_count;
    if (a.min_distance) line["distance"] = a.min_distance->to_string();
    std::cout << line.dump() << "\n";
  } else {
    std::cout << "consistent: " << (a.consistent ? "true" : "false") << "\n";
    if (a.vacuous) std::cout << "no repair exists\n";
    if (o.algo != "binsearch") std::cout << "repairs: " << a.repair_count << "\n";
    if (a.min_distance) std::cout << "distance: " << a.min_distance->to_string() << "\n";
  }
  return a.consistent ? ok : negative;
}

Cnf3 load_cnf(const std::string& path) { return parse_dimacs(read_file(path)); }

int run_reduce(const Options& o) {
  auto need = [&](std::size_t n) {
    if (o.inputs.size() != n) throw UsageError(o.kind + " takes " + std::to_string(n) + " --input file(s)");
  };
  auto build = [&]() -> ReductionInstance {
    if (o.kind == "3col-cqa" || o.kind == "3col-exists") {
      need(1);
      Graph g = parse_edge_list(read_file(o.inputs[0]));
      return o.kind == "3col-cqa" ? reduce_3col_cqa(g) : reduce_3col_exists(g);
    }
    if (o.kind == "1in3sat") {
      need(1);
      return reduce_1in3sat(load_cnf(o.inputs[0]));
    }
    need(2);
    return reduce_maxsat_eq(load_cnf(o.inputs[0]), load_cnf(o.inputs[1]));
  };
  ReductionInstance inst = build();
  if (!o.out_dir.empty()) {
    std::filesystem::path dir(o.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "database.kdb", inst.database_text);
    write_file(dir / "framework.rf", inst.framework_text);
    if (inst.query) write_file(dir / "query.txt", inst.query_text + "\n");
  }
  if (o.json()) {
    json line{{"database", inst.database_text}, {"framework", inst.framework_text}};
    if (inst.query) line["query"] = inst.query_text;
    std::cout << line.dump() << "\n";
  } else if (o.out_dir.empty()) {
    std::cout << "# database\n" << inst.database_text << "\n# framework\n" << inst.framework_text;
    if (inst.query) std::cout << "\n# query\n" << inst.query_text << "\n";
  }
  return ok;
}

int run_oracle(const Options& o) {
  if (o.kind == "classical") {
    auto db = load_db(o);
    auto fw = load_framework(o, db);
    static const std::map<std::string, ClassicalKind> kinds{{"subset", ClassicalKind::subset},
                                                            {"superset", ClassicalKind::superset},
                                                            {"symdiff", ClassicalKind::symmetric_difference},
                                                            {"cardinality", ClassicalKind::cardinality}};
    auto found = oracle_classical_repairs(db, fw.hard_constraints, kinds.at(o.notion), o.extra_values);
    print_repairs(o, found, std::nullopt);
    return ok;
  }
  auto need = [&](std::size_t n) {
    if (o.inputs.size() != n) throw UsageError(o.kind + " takes " + std::to_string(n) + " --input file(s)");
  };
  if (o.kind == "3col") {
    need(1);
    return print_verdict(o, "colourable", oracle_3col(parse_edge_list(read_file(o.inputs[0]))));
  }
  if (o.kind == "1in3sat") {
    need(1);
    return print_verdict(o, "satisfiable", oracle_1in3sat(load_cnf(o.inputs[0])));
  }
  need(2);
  return print_verdict(o, "equal", oracle_maxtrue_eq(load_cnf(o.inputs[0]), load_cnf(o.inputs[1])));
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Repairs of semiring-annotated databases"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  auto common = [&](CLI::App* cmd, bool framework) {
    cmd->add_option("--db", o.db_path, "Database file")->check(CLI::ExistingFile);
    if (framework) {
      cmd->add_option("--framework", o.framework_path, "Framework file")->check(CLI::ExistingFile);
      cmd->add_flag("--trust-hics", o.trust_hics, "Skip the hard-constraint consistency check");
      cmd->add_option("--ann-cap", o.ann_cap, "Largest annotation of a candidate record");
      cmd->add_option("--max-candidates", o.max_candidates, "Search node budget")->capture_default_str();
      cmd->add_option("--order-semantics", o.order_semantics, "Soft-query order")
          ->check(CLI::IsMember({"closeness", "literal"}))
          ->capture_default_str();
    }
    cmd->add_option("--extra-values", o.extra_values, "Values added to the active domain")->delimiter(',');
    cmd->add_option("--output-format", o.output_format, "Output format")
        ->check(CLI::IsMember({"text", "json-lines"}))
        ->capture_default_str();
  };

  auto* eval = app.add_subcommand("eval", "Evaluate a formula under semiring semantics");
  common(eval, false);
  eval->add_option("--formula", o.formula, "Formula text")->required();

  auto* im = app.add_subcommand("im", "Inconsistency measure of the soft constraints");
  common(im, true);

  auto* repair = app.add_subcommand("repair", "List every repair");
  common(repair, true);

  auto* exists = app.add_subcommand("exists", "Decide whether a repair exists");
  common(exists, true);
  exists->add_option("--via", o.via, "Decision procedure")
      ->check(CLI::IsMember({"search", "eso"}))
      ->capture_default_str();

  auto* cqa_cmd = app.add_subcommand("cqa", "Consistent query answering");
  common(cqa_cmd, true);
  cqa_cmd->add_option("--query", o.formula, "Query formula")->required();
  cqa_cmd->add_option("--tuple", o.tuple, "Candidate answer, one value per free variable")->delimiter(',');
  cqa_cmd->add_option("--algo", o.algo, "Algorithm")
      ->check(CLI::IsMember({"naive", "binsearch"}))
      ->capture_default_str();

  auto* reduce = app.add_subcommand("reduce", "Generate a repair instance from a graph or formula");
  common(reduce, false);
  reduce->add_option("kind", o.kind, "Reduction")
      ->required()
      ->check(CLI::IsMember({"3col-cqa", "3col-exists", "1in3sat", "maxsat-eq"}));
  reduce->add_option("--input", o.inputs, "Edge list or DIMACS file (twice for maxsat-eq)")
      ->check(CLI::ExistingFile);
  reduce->add_option("--out-dir", o.out_dir, "Write database.kdb, framework.rf and query.txt here");

  auto* oracle = app.add_subcommand("oracle", "Brute-force reference answers");
  common(oracle, true);
  oracle->add_option("kind", o.kind, "Problem")
      ->required()
      ->check(CLI::IsMember({"3col", "1in3sat", "maxeq", "classical"}));
  oracle->add_option("--input", o.inputs, "Edge list or DIMACS file (twice for maxeq)")->check(CLI::ExistingFile);
  oracle->add_option("--notion", o.notion, "Classical repair notion")
      ->check(CLI::IsMember({"subset", "superset", "symdiff", "cardinality"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  try {
    if (*eval) return run_eval(o);
    if (*im) return run_im(o);
    if (*repair) return run_repair(o);
    if (*exists) return run_exists(o);
    if (*cqa_cmd) return run_cqa(o);
    if (*reduce) return run_reduce(o);
    return run_oracle(o);
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return budget;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return usage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
}
