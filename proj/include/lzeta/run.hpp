#pragma once
// Check registry shared by the command-line tool and the acceptance runner.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lzeta/ring.hpp"

namespace lzeta::run {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct RunConfig {
  i64 p = 3;
  int n = 2;
  std::vector<SplitType> cases{SplitType::inert, SplitType::ramified, SplitType::split};
  int l_max = 1;
  int m_max = 3;
  bool exhaustive_support = false;
  bool zeta_model = true;
  bool zeta_abstract = true;
  std::size_t max_states = 50'000'000;  // orbit searches
  std::size_t max_cosets = 2'000'000;   // coset tables
  int samples = 200;
  std::uint64_t seed = 1;
  std::string cache_dir;
  std::string report_path;
  unsigned workers = 1;
  std::vector<std::string> only;  // check-id prefixes; empty runs everything
};

/// Throws ConfigError on p = 2, non-prime p, n < 1, negative ranges or an empty mode set.
void validate(const RunConfig& cfg);

/// Overlay the keys of a JSON config file onto cfg. Integers may be JSON numbers or decimal strings.
void load_config_file(const std::string& path, RunConfig& cfg);

struct Record {
  std::string id;
  std::string description;
  std::vector<std::pair<std::string, std::string>> params;
  std::string expected;
  std::string got;
  bool pass = false;
  std::string witness;  // set on failure
  double runtime_ms = 0;
};

struct Outcome {
  std::string expected, got;
  bool pass = false;
  std::string witness;
};

struct PlannedCheck {
  std::string id;
  std::string description;
  std::vector<std::pair<std::string, std::string>> params;
  std::function<Outcome()> run;
};

class Shared;  // lazily built tables, partitions and models, shared across checks

enum class Command { verify_cosets, verify_double_cosets, verify_volumes, verify_identities, verify_zeta, verify_all };
Command command_from_string(const std::string& s);
const char* to_string(Command c);

class Runner {
 public:
  explicit Runner(RunConfig cfg);
  ~Runner();
  const RunConfig& config() const { return cfg_; }
  /// Checks of a command after the --check filter, in report order.
  std::vector<PlannedCheck> plan(Command c) const;
  /// Runs the checks on up to cfg.workers threads; records come back in plan order. BudgetError propagates.
  std::vector<Record> execute(const std::vector<PlannedCheck>& checks) const;

 private:
  RunConfig cfg_;
  std::shared_ptr<Shared> shared_;
};

}  // namespace lzeta::run
