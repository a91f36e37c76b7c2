#pragma once

// End-to-end pipeline: testgen -> grammar extraction -> fuzzing ->
// detection -> mutation -> selection. Each stage's artifact can be written
// to an output directory; the report JSON is a pure function of the config.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "specfuzz/asserteval.hpp"
#include "specfuzz/detector.hpp"
#include "specfuzz/fuzzer.hpp"
#include "specfuzz/grammar.hpp"
#include "specfuzz/mutation.hpp"
#include "specfuzz/selector.hpp"
#include "specfuzz/statecap.hpp"
#include "specfuzz/testgen.hpp"

namespace specfuzz::pipeline {

using json = nlohmann::ordered_json;

struct PipelineConfig {
  std::string subject_path;  // recorded in artifacts
  std::string source;        // MiniObj source text
  std::string target_class;
  std::string method;
  std::int64_t candidates_n = 2000;
  std::int64_t suite_n = 500;
  int nav_depth = 2;
  std::uint64_t master_seed = 1;
  std::int64_t step_budget = minilang::kDefaultStepBudget;
  bool no_select = false;
  std::string out_dir;  // empty: keep everything in memory
  // Extra candidate texts appended to the fuzzed pool (deduplicated).
  std::vector<std::string> extra_candidates;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& msg)
      : std::runtime_error(stage + ": " + msg), stage(stage) {}
  std::string stage;
};

// Per-stage seeds derived from the master seed; stage indices are fixed.
struct StageSeeds {
  std::uint64_t testgen;
  std::uint64_t fuzz;
};

inline StageSeeds stage_seeds(std::uint64_t master) {
  return {rng::derive_seed(master, 1), rng::derive_seed(master, 2)};
}

struct PipelineResult {
  minilang::Program program;
  grammar::ExtractionResult extraction;
  fuzzer::FuzzResult fuzz;
  std::vector<std::string> candidates;  // fuzzed plus injected extras
  testgen::TestSuite suite;
  detector::LikelyInvariantSet detection;
  std::vector<mutation::Mutant> mutants;
  selector::KillMatrix matrix;
  selector::WeakFilter weak;
  selector::RankedReport ranked;
  json report;
  json manifest;

  std::vector<std::string> representatives() const {
    std::vector<std::string> out;
    for (const auto& c : ranked.clusters) out.push_back(matrix.assertions[c.representative]);
    return out;
  }
};

inline void validate(const PipelineConfig& cfg) {
  if (cfg.candidates_n < 1) throw ConfigError("candidates must be positive");
  if (cfg.suite_n < 1) throw ConfigError("suite size must be positive");
  if (cfg.nav_depth < 1) throw ConfigError("nav depth must be positive");
  if (cfg.step_budget < 1) throw ConfigError("step budget must be positive");
  if (cfg.target_class.empty()) throw ConfigError("target class is required");
  if (cfg.method.empty()) throw ConfigError("target method is required");
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw StageError("io", "cannot write " + p.string());
  out << content;
}

class StageTimer {
 public:
  explicit StageTimer(json& manifest) : manifest_(manifest) {}
  template <typename F>
  auto run(const std::string& stage, F&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      auto result = fn();
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
      manifest_["stages"].push_back(json{{"name", stage}, {"wall_ms", ms}});
      return result;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

 private:
  json& manifest_;
};

}  // namespace detail

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  validate(cfg);
  StageSeeds seeds = stage_seeds(cfg.master_seed);

  PipelineResult res;
  res.manifest =
      json{{"tool", "specfuzz"},
           {"version", "0.1.0"},
           {"subject", cfg.subject_path},
           {"class", cfg.target_class},
           {"method", cfg.method},
           {"master_seed", cfg.master_seed},
           {"stage_seeds", json{{"testgen", seeds.testgen}, {"fuzz", seeds.fuzz}}},
           {"stages", json::array()}};
  detail::StageTimer timer(res.manifest);

  res.program = timer.run("parse", [&]() { return minilang::parse_program(cfg.source); });
  if (!res.program.cls(cfg.target_class))
    throw StageError("parse", "class '" + cfg.target_class + "' not found in subject");
  const auto* cls = res.program.cls(cfg.target_class);
  if (!cls->method(cfg.method))
    throw StageError("parse", "method '" + cfg.method + "' not found in class " +
                                  cfg.target_class);

  res.suite = timer.run("testgen", [&]() {
    testgen::GenParams gp;
    gp.max_sequences = cfg.suite_n;
    gp.step_budget = cfg.step_budget;
    return testgen::generate_suite(res.program, cfg.target_class, gp, seeds.testgen);
  });

  res.extraction = timer.run("grammar", [&]() {
    return grammar::extract_grammar_full(res.program, cfg.target_class, cfg.nav_depth);
  });

  res.fuzz = timer.run("fuzz", [&]() {
    return fuzzer::fuzz_candidates(
        res.extraction.grammar, cfg.candidates_n, seeds.fuzz,
        fuzzer::default_max_attempts(cfg.candidates_n),
        [](const std::string& s) { return asserteval::normalize_text(s); });
  });
  res.candidates = res.fuzz.candidates;
  for (const auto& extra : cfg.extra_candidates) {
    std::string norm = asserteval::normalize_text(extra);
    bool dup = false;
    for (const auto& c : res.candidates)
      if (c == norm) { dup = true; break; }
    if (!dup) res.candidates.push_back(norm);
  }

  res.detection = timer.run("detect", [&]() {
    return detector::detect(res.program, res.suite, res.candidates, cfg.method,
                            cfg.step_budget);
  });

  if (!cfg.no_select) {
    res.mutants = timer.run("mutants", [&]() {
      return mutation::generate_mutants(res.program, cfg.target_class);
    });
    res.matrix = timer.run("select", [&]() {
      return selector::compute_kill_matrix(res.program, res.mutants, res.suite,
                                           res.detection, cfg.method, cfg.step_budget);
    });
    res.weak = selector::filter_weak(res.matrix);
    res.ranked = selector::cluster_and_rank(res.matrix, res.weak);
  }

  json counts{{"candidates_unique", static_cast<std::int64_t>(res.candidates.size())},
              {"fuzz_exhausted", res.fuzz.exhausted},
              {"dropped_syntax", res.detection.dropped_syntax},
              {"dropped_type", res.detection.dropped_type},
              {"records", static_cast<std::int64_t>(res.detection.records.size())},
              {"survivors", static_cast<std::int64_t>(res.detection.survivors.size())}};
  if (!cfg.no_select) {
    counts["kept"] = static_cast<std::int64_t>(res.weak.kept.size());
    counts["representatives"] = static_cast<std::int64_t>(res.ranked.clusters.size());
  }
  res.report = json{
      {"config",
       json{{"subject", cfg.subject_path},
            {"class", cfg.target_class},
            {"method", cfg.method},
            {"candidates", cfg.candidates_n},
            {"suite", cfg.suite_n},
            {"nav_depth", cfg.nav_depth},
            {"master_seed", cfg.master_seed},
            {"step_budget", cfg.step_budget},
            {"no_select", cfg.no_select}}},
      {"stage_seeds", json{{"testgen", seeds.testgen}, {"fuzz", seeds.fuzz}}},
      {"counts", counts}};
  if (cfg.no_select) {
    json survivors = json::array();
    for (const auto& s : res.detection.survivors)
      survivors.push_back(json{{"text", s.assertion.text}, {"true_count", s.true_count}});
    res.report["survivors"] = survivors;
  } else {
    res.report["selection"] = selector::report_to_json(res.matrix, res.ranked);
  }

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    detail::write_file(dir / "grammar.json",
                       grammar::to_json(res.extraction.grammar).dump(2) + "\n");
    std::string cands = "# seed " + std::to_string(seeds.fuzz) + "\n";
    for (const auto& c : res.candidates) cands += c + "\n";
    detail::write_file(dir / "candidates.txt", cands);
    detail::write_file(dir / "suite.json",
                       testgen::suite_to_json(res.suite).dump(2) + "\n");
    detail::write_file(dir / "survivors.json",
                       detector::to_json(res.detection, cfg.subject_path).dump(2) + "\n");
    if (!cfg.no_select) {
      fs::path mdir = dir / "mutants";
      fs::create_directories(mdir);
      for (const auto& m : res.mutants)
        detail::write_file(mdir / (m.id + ".mo"), minilang::pretty_print(m.program));
      detail::write_file(mdir / "manifest.json",
                         mutation::manifest_to_json(res.mutants, cfg.target_class).dump(2) + "\n");
    }
    detail::write_file(dir / "report.json", res.report.dump(2) + "\n");
    detail::write_file(dir / "run_manifest.json", res.manifest.dump(2) + "\n");
  }
  return res;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace specfuzz::pipeline
