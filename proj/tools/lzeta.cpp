#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lzeta/run.hpp"

using namespace lzeta;
using namespace lzeta::run;
using json = nlohmann::ordered_json;

namespace {

json config_echo(const RunConfig& c) {
  json cases = json::array();
  for (SplitType t : c.cases) cases.push_back(to_string(t));
  return json{{"p", std::to_string(c.p)},
              {"n", std::to_string(c.n)},
              {"cases", cases},
              {"l_max", std::to_string(c.l_max)},
              {"m_max", std::to_string(c.m_max)},
              {"modes",
               {{"support", c.exhaustive_support ? "exhaustive" : "fast"},
                {"zeta", c.zeta_model && c.zeta_abstract ? "both" : c.zeta_model ? "model" : "abstract"}}},
              {"budget", {{"max_states", std::to_string(c.max_states)}, {"max_cosets", std::to_string(c.max_cosets)}}},
              {"samples", std::to_string(c.samples)},
              {"seed", std::to_string(c.seed)},
              {"checks", c.only}};
}

json report_json(Command cmd, const RunConfig& cfg, const std::vector<Record>& records, bool timing) {
  json recs = json::array();
  std::size_t passed = 0;
  for (const Record& r : records) {
    json params = json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    json e{{"id", r.id}, {"description", r.description}, {"params", params},
           {"expected", r.expected}, {"got", r.got}, {"pass", r.pass}};
    if (!r.pass) e["witness"] = r.witness;
    if (timing) e["runtime_ms"] = static_cast<std::int64_t>(r.runtime_ms + 0.5);
    recs.push_back(std::move(e));
    passed += r.pass;
  }
  return json{{"artifact_version", kArtifactVersion},
              {"command", to_string(cmd)},
              {"config", config_echo(cfg)},
              {"records", recs},
              {"summary", {{"checks", records.size()}, {"passed", passed}, {"failed", records.size() - passed}}}};
}

void write_atomically(const std::string& path, const std::string& text) {
  std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    os << text;
    if (!os) throw std::runtime_error("cannot write report " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact verification of the local zeta integral computation"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  RunConfig cfg;
  std::string config_path, zeta_mode, case_list;
  bool exhaustive = false, timing = false;
  std::optional<i64> p;
  std::optional<int> n, l_max, m_max, samples;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> cache_dir, report;
  std::vector<std::string> only;

  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--check", only, "run only checks whose id starts with this prefix (repeatable)");
  app.add_flag("--exhaustive-support", exhaustive, "cross-check the closed-form support verdict exhaustively");
  app.add_option("--zeta-mode", zeta_mode, "model, abstract or both")->check(CLI::IsMember({"model", "abstract", "both"}));
  app.add_option("--cache-dir", cache_dir, "directory for the orbit-partition cache");
  app.add_option("--report", report, "write the JSON report here instead of standard output");
  app.add_option("--workers", workers, "parallel checks")->check(CLI::PositiveNumber);
  app.add_option("--p", p, "residue characteristic (odd prime)");
  app.add_option("--n", n, "level exponent");
  app.add_option("--cases", case_list, "comma-separated split types: inert, ramified, split");
  app.add_option("--l-max", l_max, "largest l");
  app.add_option("--m-max", m_max, "largest m");
  app.add_option("--samples", samples, "sample count for sampled checks");
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--timing", timing, "include per-check runtimes in the report");

  const char* commands[] = {"verify-cosets", "verify-double-cosets", "verify-volumes",
                            "verify-identities", "verify-zeta", "verify-all"};
  for (const char* c : commands)
    app.add_subcommand(c, std::string(c) == "verify-all" ? "run every check" : std::string("run the ") + (c + 7) + " checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) load_config_file(config_path, cfg);
    if (p) cfg.p = *p;
    if (n) cfg.n = *n;
    if (l_max) cfg.l_max = *l_max;
    if (m_max) cfg.m_max = *m_max;
    if (samples) cfg.samples = *samples;
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (cache_dir) cfg.cache_dir = *cache_dir;
    if (report) cfg.report_path = *report;
    if (exhaustive) cfg.exhaustive_support = true;
    if (!zeta_mode.empty()) {
      cfg.zeta_model = zeta_mode != "abstract";
      cfg.zeta_abstract = zeta_mode != "model";
    }
    if (!case_list.empty()) {
      cfg.cases.clear();
      std::stringstream ss(case_list);
      for (std::string item; std::getline(ss, item, ',');) {
        try {
          cfg.cases.push_back(split_type_from_string(item));
        } catch (const std::exception& e) {
          throw ConfigError(std::string("bad case: ") + e.what());
        }
      }
    }
    if (!only.empty()) cfg.only = only;

    Command cmd = command_from_string(app.get_subcommands().front()->get_name());
    Runner runner(cfg);
    std::vector<Record> records = runner.execute(runner.plan(cmd));
    std::string text = report_json(cmd, runner.config(), records, timing).dump(2) + "\n";
    bool ok = true;
    for (const Record& r : records) ok = ok && r.pass;
    if (cfg.report_path.empty()) {
      std::cout << text;
    } else {
      write_atomically(cfg.report_path, text);
      for (const Record& r : records) std::cout << (r.pass ? "PASS " : "FAIL ") << r.id << "\n";
      std::cout << records.size() << " checks, " << (ok ? "all passed" : "failures present") << "\n";
    }
    return ok ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
