// specfuzz: specification inference for MiniObj subjects.
//
// Subcommands mirror the pipeline stages (grammar, fuzz, testgen, detect,
// mutants, select) plus `run`, which composes them end to end. Exit codes:
// 0 success, 2 configuration error, 3 stage failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specfuzz/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace specfuzz;

namespace {

std::string slurp(const std::string& path) { return pipeline::read_file(path); }

void spit(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw pipeline::ConfigError("cannot write " + path);
  out << content;
}

std::vector<std::string> read_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pipeline::ConfigError("cannot read " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

minilang::Program load_subject(const std::string& path) {
  return minilang::parse_program(slurp(path));
}

int run_grammar(const std::string& subject, const std::string& cls, int depth,
                const std::string& out) {
  auto program = load_subject(subject);
  auto g = grammar::extract_grammar(program, cls, depth);
  spit(out, grammar::to_json(g).dump(2) + "\n");
  std::cout << "grammar: " << g.productions.size() << " non-terminals -> " << out
            << "\n";
  return 0;
}

int run_fuzz(const std::string& grammar_path, std::int64_t n, std::uint64_t seed,
             const std::string& out) {
  auto g = grammar::from_json(ordered_json::parse(slurp(grammar_path)));
  if (auto err = grammar::validate(g))
    throw pipeline::ConfigError("grammar: " + *err);
  auto res = fuzzer::fuzz_candidates(
      g, n, seed, fuzzer::default_max_attempts(n),
      [](const std::string& s) { return asserteval::normalize_text(s); });
  std::string text = "# seed " + std::to_string(seed) + "\n";
  for (const auto& c : res.candidates) text += c + "\n";
  spit(out, text);
  std::cout << "fuzz: " << res.candidates.size() << " unique candidates"
            << (res.exhausted ? " (exhausted before target)" : "") << " -> " << out
            << "\n";
  return 0;
}

int run_testgen(const std::string& subject, const std::string& cls, std::int64_t n,
                std::uint64_t seed, const testgen::GenParams& base,
                const std::string& out) {
  auto program = load_subject(subject);
  testgen::GenParams gp = base;
  gp.max_sequences = n;
  auto suite = testgen::generate_suite(program, cls, gp, seed);
  spit(out, testgen::suite_to_json(suite).dump(2) + "\n");
  std::cout << "testgen: " << suite.cases.size() << " cases -> " << out << "\n";
  return 0;
}

int run_detect(const std::string& subject, const std::string& cls,
               const std::string& method, const std::string& suite_path,
               const std::string& candidates_path, std::int64_t budget,
               const std::string& out) {
  auto program = load_subject(subject);
  auto suite = testgen::suite_from_json(ordered_json::parse(slurp(suite_path)));
  if (suite.class_name != cls)
    throw pipeline::ConfigError("suite was generated for class " + suite.class_name);
  auto candidates = read_candidates(candidates_path);
  auto result = detector::detect(program, suite, candidates, method, budget);
  spit(out, detector::to_json(result, subject).dump(2) + "\n");
  std::cout << "detect: " << result.survivors.size() << " survivors of "
            << candidates.size() << " candidates over " << result.records.size()
            << " records -> " << out << "\n";
  return 0;
}

int run_mutants(const std::string& subject, const std::string& cls,
                const std::string& out_dir) {
  auto program = load_subject(subject);
  auto mutants = mutation::generate_mutants(program, cls);
  fs::create_directories(out_dir);
  for (const auto& m : mutants)
    spit((fs::path(out_dir) / (m.id + ".mo")).string(), minilang::pretty_print(m.program));
  spit((fs::path(out_dir) / "manifest.json").string(),
       mutation::manifest_to_json(mutants, cls).dump(2) + "\n");
  std::cout << "mutants: " << mutants.size() << " -> " << out_dir << "\n";
  return 0;
}

int run_select(const std::string& survivors_path, const std::string& mutants_dir,
               const std::string& suite_path, std::int64_t budget,
               const std::string& out) {
  auto sj = ordered_json::parse(slurp(survivors_path));
  std::string subject = sj.at("subject").get<std::string>();
  std::string cls = sj.at("class").get<std::string>();
  std::string method = sj.at("method").get<std::string>();
  auto program = load_subject(subject);
  auto suite = testgen::suite_from_json(ordered_json::parse(slurp(suite_path)));

  detector::LikelyInvariantSet survivors;
  survivors.class_name = cls;
  survivors.method = method;
  for (const auto& s : sj.at("survivors")) {
    detector::Survivor sv;
    sv.assertion = asserteval::parse_assertion(s.at("text").get<std::string>());
    sv.true_count = s.value("true_count", std::int64_t{0});
    survivors.survivors.push_back(std::move(sv));
  }

  auto manifest = ordered_json::parse(slurp((fs::path(mutants_dir) / "manifest.json").string()));
  std::vector<mutation::Mutant> mutants;
  for (const auto& jm : manifest.at("mutants")) {
    mutation::Mutant m;
    m.id = jm.at("id").get<std::string>();
    m.op = jm.at("operator").get<std::string>();
    m.node = jm.at("node").get<int>();
    m.original = jm.at("original").get<std::string>();
    m.replacement = jm.at("replacement").get<std::string>();
    m.program = minilang::parse_program(
        slurp((fs::path(mutants_dir) / jm.at("file").get<std::string>()).string()));
    mutants.push_back(std::move(m));
  }

  auto matrix = selector::compute_kill_matrix(program, mutants, suite, survivors,
                                              method, budget);
  auto weak = selector::filter_weak(matrix);
  auto ranked = selector::cluster_and_rank(matrix, weak);
  spit(out, selector::report_to_json(matrix, ranked).dump(2) + "\n");
  std::cout << "select: " << ranked.clusters.size() << " representatives, "
            << weak.discarded.size() << " weak of " << matrix.assertions.size()
            << " survivors -> " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specfuzz: grammar-fuzzed specification inference for MiniObj"};
  app.require_subcommand(1);

  // grammar
  std::string g_subject, g_class, g_out;
  int g_depth = 2;
  auto* cmd_grammar = app.add_subcommand("grammar", "extract the class grammar");
  cmd_grammar->add_option("--subject", g_subject)->required();
  cmd_grammar->add_option("--class", g_class)->required();
  cmd_grammar->add_option("--depth", g_depth);
  cmd_grammar->add_option("--out", g_out)->required();

  // fuzz
  std::string f_grammar, f_out;
  std::int64_t f_n = 2000;
  std::uint64_t f_seed = 42;
  auto* cmd_fuzz = app.add_subcommand("fuzz", "fuzz candidate assertions");
  cmd_fuzz->add_option("--grammar", f_grammar)->required();
  cmd_fuzz->add_option("--n", f_n);
  cmd_fuzz->add_option("--seed", f_seed);
  cmd_fuzz->add_option("--out", f_out)->required();

  // testgen
  std::string t_subject, t_class, t_out;
  std::int64_t t_n = 500;
  std::uint64_t t_seed = 7;
  testgen::GenParams t_params;
  auto* cmd_testgen = app.add_subcommand("testgen", "generate a test suite");
  cmd_testgen->add_option("--subject", t_subject)->required();
  cmd_testgen->add_option("--class", t_class)->required();
  cmd_testgen->add_option("--n", t_n);
  cmd_testgen->add_option("--seed", t_seed);
  cmd_testgen->add_option("--seq-min", t_params.seq_len_min);
  cmd_testgen->add_option("--seq-max", t_params.seq_len_max);
  cmd_testgen->add_option("--int-lo", t_params.int_lo);
  cmd_testgen->add_option("--int-hi", t_params.int_hi);
  cmd_testgen->add_option("--out", t_out)->required();

  // detect
  std::string d_subject, d_class, d_method, d_suite, d_candidates, d_out;
  std::int64_t d_budget = minilang::kDefaultStepBudget;
  auto* cmd_detect = app.add_subcommand("detect", "filter candidates against the suite");
  cmd_detect->add_option("--subject", d_subject)->required();
  cmd_detect->add_option("--class", d_class)->required();
  cmd_detect->add_option("--method", d_method)->required();
  cmd_detect->add_option("--suite", d_suite)->required();
  cmd_detect->add_option("--candidates", d_candidates)->required();
  cmd_detect->add_option("--budget", d_budget);
  cmd_detect->add_option("--out", d_out)->required();

  // mutants
  std::string m_subject, m_class, m_out;
  auto* cmd_mutants = app.add_subcommand("mutants", "generate mutants");
  cmd_mutants->add_option("--subject", m_subject)->required();
  cmd_mutants->add_option("--class", m_class)->required();
  cmd_mutants->add_option("--out", m_out)->required();

  // select
  std::string s_survivors, s_mutants, s_suite, s_out;
  std::int64_t s_budget = minilang::kDefaultStepBudget;
  auto* cmd_select = app.add_subcommand("select", "cluster and rank survivors");
  cmd_select->add_option("--survivors", s_survivors)->required();
  cmd_select->add_option("--mutants", s_mutants)->required();
  cmd_select->add_option("--suite", s_suite)->required();
  cmd_select->add_option("--budget", s_budget);
  cmd_select->add_option("--out", s_out)->required();

  // run
  pipeline::PipelineConfig cfg;
  auto* cmd_run = app.add_subcommand("run", "run the whole pipeline");
  cmd_run->add_option("--subject", cfg.subject_path)->required();
  cmd_run->add_option("--class", cfg.target_class)->required();
  cmd_run->add_option("--method", cfg.method)->required();
  cmd_run->add_option("--candidates", cfg.candidates_n);
  cmd_run->add_option("--suite-size", cfg.suite_n);
  cmd_run->add_option("--depth", cfg.nav_depth);
  cmd_run->add_option("--seed", cfg.master_seed);
  cmd_run->add_option("--budget", cfg.step_budget);
  cmd_run->add_option("--out-dir", cfg.out_dir);
  cmd_run->add_flag("--no-select", cfg.no_select);

  try {
    app.parse(argc, argv);
    if (cmd_grammar->parsed()) return run_grammar(g_subject, g_class, g_depth, g_out);
    if (cmd_fuzz->parsed()) return run_fuzz(f_grammar, f_n, f_seed, f_out);
    if (cmd_testgen->parsed())
      return run_testgen(t_subject, t_class, t_n, t_seed, t_params, t_out);
    if (cmd_detect->parsed())
      return run_detect(d_subject, d_class, d_method, d_suite, d_candidates, d_budget,
                        d_out);
    if (cmd_mutants->parsed()) return run_mutants(m_subject, m_class, m_out);
    if (cmd_select->parsed())
      return run_select(s_survivors, s_mutants, s_suite, s_budget, s_out);
    if (cmd_run->parsed()) {
      if (cfg.out_dir.empty()) cfg.out_dir = "specfuzz-out";
      cfg.source = slurp(cfg.subject_path);
      pipeline::validate(cfg);
      auto res = pipeline::run_pipeline(cfg);
      std::cout << "candidates: " << res.candidates.size() << "\n"
                << "survivors:  " << res.detection.survivors.size() << "\n";
      if (!cfg.no_select) {
        std::cout << "kept:       " << res.weak.kept.size() << "\n"
                  << "reported:   " << res.ranked.clusters.size() << "\n";
        for (const auto& rep : res.representatives()) std::cout << "  " << rep << "\n";
      }
      std::cout << "artifacts in " << cfg.out_dir << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  } catch (const pipeline::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const minilang::ParseError& e) {
    std::cerr << "subject error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
