#pragma once

// Batch runs behind the tanflow command line: configuration, the four
// subcommands and their JSON reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tanflow/check.hpp"
#include "tanflow/corpus.hpp"
#include "tanflow/errors.hpp"

namespace tanflow::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::uint64_t seed = 42;
  double tolerance_abs = 1e-9;
  double tolerance_rel = 1e-9;
  int trials = 100;
  int probe_budget = 0;  // 0: each probe's own default
  std::vector<std::string> corpus_paths;  // empty: the built-in default corpus
  std::string output_path;

  [[nodiscard]] CheckConfig check_config() const;
};

/// Thrown for bad arguments; reported with exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct SuiteReport {
  std::string command;
  nlohmann::ordered_json config;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  bool pass = true;

  void add(nlohmann::ordered_json check);
  void add(const AxiomReport& r);
};

struct DiffeoRequest {
  std::string space;
  std::string probe;  // theta<k>, theta2-inj, tangent, retract, group, rank
  std::optional<std::vector<double>> point;
  std::optional<std::string> plot;
  int k = 2;
  std::optional<int> rank;
  std::optional<std::string> target;       // retract: space receiving the inclusion
  std::optional<std::string> inclusion;    // retract: "e1, e2, ..."
  std::optional<std::string> retraction;
};

[[nodiscard]] const std::string& default_corpus_text();
[[nodiscard]] Corpus load_corpus(const RunConfig& cfg);

[[nodiscard]] SuiteReport cmd_axioms(const RunConfig& cfg, bool corrupt_tau = false);
[[nodiscard]] SuiteReport cmd_cartan(const RunConfig& cfg);
[[nodiscard]] SuiteReport cmd_bracket(const RunConfig& cfg);
[[nodiscard]] SuiteReport cmd_diffeo(const RunConfig& cfg, const DiffeoRequest& req);

/// Decimal text used for every real number in a report.
[[nodiscard]] std::string decimal(double v);

[[nodiscard]] std::string render_json(const SuiteReport& report);
[[nodiscard]] std::string render_text(const SuiteReport& report);

}  // namespace tanflow::cli
