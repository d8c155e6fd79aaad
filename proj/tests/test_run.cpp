#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lzeta/cache.hpp"
#include "lzeta/run.hpp"

using namespace lzeta;
using namespace lzeta::run;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("lzeta-test-" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

std::string write_file(const std::filesystem::path& dir, const std::string& text) {
  auto f = dir / "config.json";
  std::ofstream(f) << text;
  return f.string();
}

bool same_records(const std::vector<Record>& a, const std::vector<Record>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].id != b[i].id || a[i].expected != b[i].expected || a[i].got != b[i].got || a[i].pass != b[i].pass ||
        a[i].params != b[i].params)
      return false;
  return true;
}

}  // namespace

TEST_CASE("validation refuses p = 2 with the residue characteristic message") {
  RunConfig c;
  c.p = 2;
  try {
    validate(c);
    FAIL("accepted p = 2");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("odd residue characteristic") != std::string::npos);
  }
}

TEST_CASE("validation refuses malformed configurations") {
  auto bad = [](auto edit) {
    RunConfig c;
    edit(c);
    CHECK_THROWS_AS(validate(c), ConfigError);
  };
  bad([](RunConfig& c) { c.p = 9; });
  bad([](RunConfig& c) { c.n = 0; });
  bad([](RunConfig& c) { c.m_max = -1; });
  bad([](RunConfig& c) { c.cases.clear(); });
  bad([](RunConfig& c) { c.zeta_model = c.zeta_abstract = false; });
  bad([](RunConfig& c) {
    c.n = 3;
    c.zeta_abstract = false;
  });
  RunConfig ok;
  CHECK_NOTHROW(validate(ok));
}

TEST_CASE("config files accept numbers and decimal strings and reject unknown keys") {
  auto dir = scratch("config");
  RunConfig c;
  load_config_file(write_file(dir, R"({"p": "5", "n": 3, "cases": ["split"], "m_max": "2",
      "modes": {"support": "exhaustive", "zeta": "abstract"}, "budget": {"max_cosets": "1000"},
      "checks": ["volumes.", "zeta."]})"),
                   c);
  CHECK(c.p == 5);
  CHECK(c.n == 3);
  CHECK(c.m_max == 2);
  REQUIRE(c.cases.size() == 1);
  CHECK(c.cases[0] == SplitType::split);
  CHECK(c.exhaustive_support);
  CHECK(!c.zeta_model);
  CHECK(c.zeta_abstract);
  CHECK(c.max_cosets == 1000);
  CHECK(c.only == std::vector<std::string>{"volumes.", "zeta."});

  RunConfig d;
  CHECK_THROWS_AS(load_config_file(write_file(dir, R"({"prime": 3})"), d), ConfigError);
  CHECK_THROWS_AS(load_config_file(write_file(dir, R"({"p": 3.5})"), d), ConfigError);
  CHECK_THROWS_AS(load_config_file(write_file(dir, R"({"modes": {"zeta": "fast"}})"), d), ConfigError);
  CHECK_THROWS_AS(load_config_file(write_file(dir, R"({"budget": {"max_states": 0}})"), d), ConfigError);
  CHECK_THROWS_AS(load_config_file(write_file(dir, R"({"checks": "zeta."})"), d), ConfigError);
  CHECK_THROWS_AS(load_config_file(write_file(dir, "[1, 2]"), d), ConfigError);
  CHECK_THROWS_AS(load_config_file(write_file(dir, "{"), d), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("command names round-trip") {
  for (Command c : {Command::verify_cosets, Command::verify_double_cosets, Command::verify_volumes,
                    Command::verify_identities, Command::verify_zeta, Command::verify_all})
    CHECK(command_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(command_from_string("verify-everything"), ConfigError);
}

TEST_CASE("plans are filtered by id prefix and are a sub-plan of verify-all") {
  RunConfig c;
  Runner all(c);
  auto full = all.plan(Command::verify_all);
  auto cosets = all.plan(Command::verify_cosets);
  REQUIRE(!cosets.empty());
  for (const auto& pc : cosets) {
    CHECK(pc.id.rfind("cosets.", 0) == 0);
    CHECK(std::find_if(full.begin(), full.end(), [&](const PlannedCheck& f) { return f.id == pc.id; }) != full.end());
  }
  c.only = {"volumes.k-sharp"};
  Runner filtered(c);
  auto only = filtered.plan(Command::verify_all);
  REQUIRE(only.size() == 1);
  CHECK(only[0].id == "volumes.k-sharp");
}

TEST_CASE("coset checks pass and runs are deterministic") {
  RunConfig c;
  c.only = {"cosets.", "volumes.k-sharp"};
  Runner a(c), b(c);
  auto ra = a.execute(a.plan(Command::verify_all));
  auto rb = b.execute(b.plan(Command::verify_all));
  REQUIRE(!ra.empty());
  for (const auto& r : ra) CHECK_MESSAGE(r.pass, r.id << ": " << r.witness);
  CHECK(same_records(ra, rb));
}

TEST_CASE("an exhausted coset budget raises BudgetError") {
  RunConfig c;
  c.max_cosets = 10;
  c.only = {"cosets.index"};
  Runner r(c);
  CHECK_THROWS_AS(r.execute(r.plan(Command::verify_cosets)), BudgetError);
}

TEST_CASE("partition cache round-trips and ignores foreign files") {
  auto dir = scratch("cache");
  PartitionCache cache(dir.string());
  CHECK(cache.enabled());
  CHECK(!PartitionCache("").enabled());
  CHECK(!cache.get(3, 2, SplitType::inert, 0, 1));
  std::vector<std::uint32_t> a{0, 1, 1, 0, 2}, b{0, 0, 1};
  cache.put(3, 2, SplitType::inert, 0, 1, a);
  cache.put(3, 2, SplitType::inert, 1, 2, b);
  CHECK(cache.get(3, 2, SplitType::inert, 0, 1) == a);
  CHECK(cache.get(3, 2, SplitType::inert, 1, 2) == b);
  CHECK(!cache.get(3, 2, SplitType::split, 0, 1));
  cache.put(3, 2, SplitType::inert, 0, 1, b);
  CHECK(cache.get(3, 2, SplitType::inert, 0, 1) == b);
  CHECK(cache.get(3, 2, SplitType::inert, 1, 2) == b);

  std::ofstream(cache.path_for(3, 2, SplitType::inert), std::ios::trunc) << "not a cache file";
  CHECK(!cache.get(3, 2, SplitType::inert, 0, 1));
  std::filesystem::remove_all(dir);
}

TEST_CASE("cached and cold support runs give identical records") {
  auto dir = scratch("support");
  RunConfig c;
  c.l_max = 0;
  c.m_max = 1;
  c.only = {"double-cosets.support"};
  Runner cold(c);
  auto r0 = cold.execute(cold.plan(Command::verify_double_cosets));
  c.cache_dir = dir.string();
  Runner fill(c);
  auto r1 = fill.execute(fill.plan(Command::verify_double_cosets));
  CHECK(!std::filesystem::is_empty(dir));
  Runner warm(c);
  auto r2 = warm.execute(warm.plan(Command::verify_double_cosets));
  REQUIRE(!r0.empty());
  for (const auto& r : r0) CHECK_MESSAGE(r.pass, r.id << ": " << r.witness);
  CHECK(same_records(r0, r1));
  CHECK(same_records(r0, r2));
  std::filesystem::remove_all(dir);
}
