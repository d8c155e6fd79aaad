#include "lzeta/run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lzeta/cache.hpp"
#include "lzeta/double_coset.hpp"
#include "lzeta/support.hpp"
#include "lzeta/symbolic.hpp"
#include "lzeta/volume.hpp"
#include "lzeta/whittaker.hpp"

namespace lzeta::run {

namespace {

int legendre_of(SplitType t) { return t == SplitType::inert ? -1 : t == SplitType::split ? 1 : 0; }

std::string str(i64 v) { return std::to_string(v); }

i64 parse_int(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<i64>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::size_t used = 0;
    i64 r = 0;
    try {
      r = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == s.size() && !s.empty()) return r;
  }
  throw ConfigError("config key '" + key + "' must be an exact integer (number or decimal string)");
}

std::string parse_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

// ---------------------------------------------------------------- configuration

void validate(const RunConfig& cfg) {
  if (cfg.p == 2)
    throw ConfigError("p = 2 is not supported: the computations assume an odd residue characteristic p");
  if (!is_prime(cfg.p)) throw ConfigError("p must be an odd prime, got " + str(cfg.p));
  if (cfg.n < 1) throw ConfigError("n must be at least 1");
  if (cfg.l_max < 0 || cfg.m_max < 0) throw ConfigError("l_max and m_max must be non-negative");
  if (cfg.cases.empty()) throw ConfigError("the case list is empty");
  if (!cfg.zeta_model && !cfg.zeta_abstract) throw ConfigError("no zeta mode selected");
  if (cfg.zeta_model && !cfg.zeta_abstract && cfg.n != 2)
    throw ConfigError("zeta model mode is available for n = 2 only; use abstract or both");
  if (cfg.samples < 1) throw ConfigError("samples must be positive");
  if (cfg.workers < 1) throw ConfigError("workers must be positive");
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "p") {
      cfg.p = parse_int(v, key);
    } else if (key == "n") {
      cfg.n = static_cast<int>(parse_int(v, key));
    } else if (key == "l_max") {
      cfg.l_max = static_cast<int>(parse_int(v, key));
    } else if (key == "m_max") {
      cfg.m_max = static_cast<int>(parse_int(v, key));
    } else if (key == "samples") {
      cfg.samples = static_cast<int>(parse_int(v, key));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(v, key));
    } else if (key == "workers") {
      cfg.workers = static_cast<unsigned>(parse_int(v, key));
    } else if (key == "cache_dir") {
      cfg.cache_dir = parse_string(v, key);
    } else if (key == "report") {
      cfg.report_path = parse_string(v, key);
    } else if (key == "cases") {
      if (!v.is_array()) throw ConfigError("config key 'cases' must be a list");
      cfg.cases.clear();
      for (const auto& c : v) {
        try {
          cfg.cases.push_back(split_type_from_string(parse_string(c, key)));
        } catch (const ConfigError&) {
          throw;
        } catch (const std::exception& e) {
          throw ConfigError(std::string("bad case in config: ") + e.what());
        }
      }
    } else if (key == "checks") {
      if (!v.is_array()) throw ConfigError("config key 'checks' must be a list");
      cfg.only.clear();
      for (const auto& c : v) cfg.only.push_back(parse_string(c, key));
    } else if (key == "modes") {
      if (!v.is_object()) throw ConfigError("config key 'modes' must be an object");
      for (const auto& [mk, mv] : v.items()) {
        std::string s = parse_string(mv, "modes." + mk);
        if (mk == "support") {
          if (s != "fast" && s != "exhaustive") throw ConfigError("modes.support is fast or exhaustive");
          cfg.exhaustive_support = s == "exhaustive";
        } else if (mk == "zeta") {
          if (s != "model" && s != "abstract" && s != "both") throw ConfigError("modes.zeta is model, abstract or both");
          cfg.zeta_model = s != "abstract";
          cfg.zeta_abstract = s != "model";
        } else {
          throw ConfigError("unknown key modes." + mk);
        }
      }
    } else if (key == "budget") {
      if (!v.is_object()) throw ConfigError("config key 'budget' must be an object");
      for (const auto& [bk, bv] : v.items()) {
        i64 x = parse_int(bv, "budget." + bk);
        if (x < 1) throw ConfigError("budget." + bk + " must be positive");
        if (bk == "max_states")
          cfg.max_states = static_cast<std::size_t>(x);
        else if (bk == "max_cosets")
          cfg.max_cosets = static_cast<std::size_t>(x);
        else
          throw ConfigError("unknown key budget." + bk);
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

Command command_from_string(const std::string& s) {
  if (s == "verify-cosets") return Command::verify_cosets;
  if (s == "verify-double-cosets") return Command::verify_double_cosets;
  if (s == "verify-volumes") return Command::verify_volumes;
  if (s == "verify-identities") return Command::verify_identities;
  if (s == "verify-zeta") return Command::verify_zeta;
  if (s == "verify-all") return Command::verify_all;
  throw ConfigError("unknown command " + s);
}

const char* to_string(Command c) {
  switch (c) {
    case Command::verify_cosets: return "verify-cosets";
    case Command::verify_double_cosets: return "verify-double-cosets";
    case Command::verify_volumes: return "verify-volumes";
    case Command::verify_identities: return "verify-identities";
    case Command::verify_zeta: return "verify-zeta";
    case Command::verify_all: return "verify-all";
  }
  return "?";
}

// ---------------------------------------------------------------- shared lazily built objects

class Shared {
 public:
  explicit Shared(const RunConfig& cfg) : cfg_(cfg), cache_(cfg.cache_dir) {}

  const CosetTable& table(i64 p, int n) {
    std::lock_guard<std::mutex> lock(table_mu_);
    auto& t = tables_[{p, n}];
    if (!t) {
      if (static_cast<std::size_t>(coset_index_formula(p, n)) > cfg_.max_cosets)
        throw BudgetError("coset table (" + str(p) + "," + str(n) + ") exceeds the coset budget");
      t = std::make_unique<CosetTable>(CosetTable::build(p, n));
    }
    return *t;
  }

  /// Orbit partition of K_{l,m} on the level-n table; from the on-disk cache when present.
  OrbitPartition partition(SplitType type, int l, int m, std::string& method) {
    const CosetTable& t = table(cfg_.p, cfg_.n);
    if (auto hit = cache_.get(cfg_.p, cfg_.n, type, l, m); hit && hit->size() == t.size()) {
      method = method_for();
      return from_labels(std::move(*hit));
    }
    LocalConfig lc = default_config(cfg_.p, cfg_.n, type);
    OrbitPartition part;
    method = method_for();
    if (method == "grid")
      part = orbits_from_group(t, klm_grid(lc, cfg_.n, l, m));
    else
      part = orbits_from_generators(t, klm_generators(lc, cfg_.n, m), cfg_.workers);
    cache_.put(cfg_.p, cfg_.n, type, l, m, part.orbit_of);
    return part;
  }

  const SupportOrbit& support_orbit(SplitType type) {
    std::lock_guard<std::mutex> lock(orbit_mu_);
    auto& o = orbits_[type];
    if (!o) o = std::make_unique<SupportOrbit>(SupportOrbit::build(default_config(cfg_.p, cfg_.n, type), cfg_.n, cfg_.max_states));
    return *o;
  }

  const wz::NewformModel& model() {
    std::lock_guard<std::mutex> lock(model_mu_);
    if (!model_) model_ = wz::NewformModel::build({cfg_.p, 1, 1});
    return *model_;
  }

  const std::vector<sym::IdentitySpec>& manifest() {
    std::lock_guard<std::mutex> lock(manifest_mu_);
    if (!manifest_) manifest_ = std::make_unique<std::vector<sym::IdentitySpec>>(sym::load_manifest(sym::default_manifest_path()));
    return *manifest_;
  }

 private:
  std::string method_for() const {
    i64 grid = 1;
    for (int i = 0; i < 5 * cfg_.n && grid <= 2'000'000; ++i) grid *= cfg_.p;
    return grid <= 2'000'000 ? "grid" : "generators";
  }

  static OrbitPartition from_labels(std::vector<std::uint32_t> labels) {
    OrbitPartition part;
    part.orbit_of = std::move(labels);
    std::uint32_t count = 0;
    for (std::uint32_t o : part.orbit_of) count = std::max(count, o + 1);
    part.sizes.assign(count, 0);
    part.first.assign(count, part.orbit_of.size());
    part.support.assign(count, -1);
    for (std::size_t i = 0; i < part.orbit_of.size(); ++i) {
      std::uint32_t o = part.orbit_of[i];
      ++part.sizes[o];
      part.first[o] = std::min(part.first[o], i);
    }
    return part;
  }

  RunConfig cfg_;
  PartitionCache cache_;
  std::mutex table_mu_, orbit_mu_, model_mu_, manifest_mu_;
  std::map<std::pair<i64, int>, std::unique_ptr<CosetTable>> tables_;
  std::map<SplitType, std::unique_ptr<SupportOrbit>> orbits_;
  std::shared_ptr<wz::NewformModel> model_;
  std::unique_ptr<std::vector<sym::IdentitySpec>> manifest_;
};

// ---------------------------------------------------------------- the plan

Runner::Runner(RunConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  shared_ = std::make_shared<Shared>(cfg_);
}

Runner::~Runner() = default;

namespace {

using Params = std::vector<std::pair<std::string, std::string>>;

struct Planner {
  const RunConfig& cfg;
  std::shared_ptr<Shared> sh;
  std::vector<PlannedCheck> out;

  void add(std::string id, std::string description, Params params, std::function<Outcome()> run) {
    out.push_back({std::move(id), std::move(description), std::move(params), std::move(run)});
  }

  Params base() const { return {{"p", str(cfg.p)}, {"n", str(cfg.n)}}; }
  Params with(Params extra) const {
    Params p = base();
    for (auto& e : extra) p.push_back(std::move(e));
    return p;
  }

  void cosets() {
    const i64 p = cfg.p;
    const int n = cfg.n;
    auto s = sh;
    add("cosets.bruhat", "level-1 Bruhat cell sizes are 1, q, q, q^2, q^2, q^3, q^3, q^4", base(), [p] {
      auto cells = bruhat_cells(default_config(p, 1, SplitType::inert));
      std::ostringstream e, g;
      const int ex[8] = {0, 1, 1, 2, 2, 3, 3, 4};
      bool ok = cells.size() == 8;
      for (std::size_t f = 0; f < cells.size(); ++f) {
        e << (f ? "," : "") << ipow(p, ex[f]);
        g << (f ? "," : "") << cells[f].size();
        ok = ok && static_cast<i64>(cells[f].size()) == ipow(p, ex[f]);
      }
      return Outcome{e.str(), g.str(), ok, ok ? "" : "cell sizes differ"};
    });
    add("cosets.index", "|K^H / K^#(p^n)| equals q^{3(n-1)}(q+1)(q^4-1)/(q-1)", base(), [s, p, n] {
      const CosetTable& t = s->table(p, n);
      i64 f = coset_index_formula(p, n);
      bool ok = static_cast<i64>(t.size()) == f && t.distinct_keys() == t.size();
      return Outcome{str(f), str(static_cast<i64>(t.size())), ok,
                     ok ? "" : "distinct labels " + str(static_cast<i64>(t.distinct_keys()))};
    });
    const bool exhaustive = coset_index_formula(p, n) <= 20000;
    add("cosets.disjoint", "the enumerated representatives lie in pairwise distinct cosets",
        with({{"method", exhaustive ? "pairwise" : "labels"}}), [s, p, n, exhaustive, w = cfg.workers] {
          const CosetTable& t = s->table(p, n);
          if (!exhaustive) {
            bool ok = t.distinct_keys() == t.size();
            return Outcome{"distinct labels", ok ? "distinct labels" : "label clash", ok, ok ? "" : "label clash"};
          }
          auto c = t.find_collision(w);
          if (!c) return Outcome{"no collision", "no collision", true, ""};
          return Outcome{"no collision", "collision", false,
                         "representatives " + str(static_cast<i64>(c->i)) + " and " + str(static_cast<i64>(c->j))};
        });
  }

  void double_cosets() {
    const i64 p = cfg.p;
    const int n = cfg.n;
    auto s = sh;
    for (SplitType type : cfg.cases)
      for (int l = 0; l <= cfg.l_max; ++l)
        for (int m = 0; m <= cfg.m_max; ++m) {
          std::string id = "double-cosets.support[" + std::string(to_string(type)) + ",l=" + str(l) + ",m=" + str(m) + "]";
          add(id, "K_{l,m}-orbits: support flag constant per orbit and support orbits match the predicted list",
              with({{"case", to_string(type)}, {"l", str(l)}, {"m", str(m)}}), [s, p, n, type, l, m] {
                std::string method;
                OrbitPartition part = s->partition(type, l, m, method);
                LocalConfig lc = default_config(p, n, type);
                const CosetTable& t = s->table(p, n);
                SupportCheck sc = label_support(part, t, lc, m);
                PropositionCheck pc = verify_support_list(part, t, lc, m);
                bool ok = sc.constant && sc.covered && pc.ok && sc.support_orbits == pc.predicted;
                std::string witness;
                if (!sc.constant || !sc.covered) witness = sc.witness;
                if (!pc.ok) witness += (witness.empty() ? "" : "; ") + pc.witness;
                std::ostringstream got;
                got << sc.support_orbits << " support orbits of " << part.count();
                return Outcome{str(static_cast<i64>(pc.predicted)) + " support orbits", got.str(), ok, witness};
              });
        }
    if (n >= 3) {
      const int m = n - 1, j = 0;
      for (SplitType type : cfg.cases) {
        std::string id = "double-cosets.u-criterion[" + std::string(to_string(type)) + "]";
        add(id, "A(pi^j u1) and A(pi^j u2) merge exactly when u1 - u2 lies in p^{j+1}",
            with({{"case", to_string(type)}, {"m", str(m)}, {"j", str(j)}}), [p, n, m, j, type] {
              LocalConfig lc = default_config(p, n, type);
              const i64 range = ipow(p, n - 1);
              std::ostringstream exp, got;
              std::string witness;
              bool ok = true;
              for (i64 u2 = 2; u2 < range; ++u2) {
                if (u2 % p == 0) continue;
                bool expect = (u2 - 1) % ipow(p, j + 1) == 0;
                bool merged = same_orbit_A(lc, n, m, j, 1, u2);
                bool element = !expect || u_merge_element_ok(lc, n, 0, m, j, 1, u2);
                if (merged != expect || !element) {
                  ok = false;
                  if (witness.empty())
                    witness = "u1 = 1, u2 = " + str(u2) + (merged ? " merged" : " stayed apart") +
                              (element ? "" : ", merging element fails");
                }
              }
              return Outcome{"merge iff u2 = 1 mod p^" + str(j + 1), ok ? "merge iff u2 = 1 mod p^" + str(j + 1) : "mismatch",
                             ok, witness};
            });
      }
    }
    if (cfg.exhaustive_support)
      for (SplitType type : cfg.cases)
        for (int m = 0; m <= std::min(cfg.m_max, 2); ++m) {
          std::string id = "double-cosets.support-exhaustive[" + std::string(to_string(type)) + ",m=" + str(m) + "]";
          add(id, "closed-form support verdict equals the exhaustive parabolic-orbit decision",
              with({{"case", to_string(type)}, {"m", str(m)}}), [s, p, n, m, type, seed = cfg.seed, samples = cfg.samples] {
                const SupportOrbit& orbit = s->support_orbit(type);
                LocalConfig lc = default_config(p, n, type);
                std::vector<PrelimRep> core, other;
                for (const PrelimRep& r : prelim_reps(p, n))
                  (r.case_id == 1 || r.case_id == 2 || r.case_id == 6 ? core : other).push_back(r);
                if (other.size() > static_cast<std::size_t>(4 * samples)) {
                  std::mt19937_64 rng(seed + 31 * m);
                  std::shuffle(other.begin(), other.end(), rng);
                  other.resize(static_cast<std::size_t>(samples));
                }
                std::size_t agree = 0, total = 0;
                std::string witness;
                for (const auto* list : {&core, &other})
                  for (const PrelimRep& r : *list) {
                    ++total;
                    bool fast = support_fast(lc, m, n, r), ex = support_exhaustive(orbit, lc, m, r);
                    if (fast == ex)
                      ++agree;
                    else if (witness.empty())
                      witness = "case " + str(r.case_id) + " (w,y,z) = (" + str(r.w) + "," + str(r.y) + "," + str(r.z) + ")";
                  }
                std::ostringstream e, g;
                e << total << " of " << total << " agree (" << core.size() << " case 1/2/6, " << other.size() << " other)";
                g << agree << " of " << total << " agree";
                return Outcome{e.str(), g.str(), agree == total, witness};
              });
        }
  }

  void volumes() {
    const i64 p = cfg.p;
    const int n = cfg.n;
    auto s = sh;
    add("volumes.k-sharp", "vol(K^#(p^n)) from the coset count equals the closed form and vol * |table| = 1", base(),
        [s, p, n] {
          mpq_class f = vol_K_sharp_formula(p, n).value;
          const CosetTable& t = s->table(p, n);
          mpq_class c = mpq_class(1) / mpq_class(static_cast<long>(t.size()));
          bool ok = c == f && f * static_cast<long>(t.size()) == 1;
          return Outcome{f.get_str(), c.get_str(), ok, ""};
        });
    for (SplitType type : cfg.cases) {
      const int L = legendre_of(type);
      add("volumes.torus[" + std::string(to_string(type)) + "]", "torus volume factor (1 - (L/p)/q) q^s for s = 1..3",
          with({{"case", to_string(type)}}), [p, type, L] {
            std::ostringstream e, g;
            bool ok = true;
            for (int sv = 1; sv <= 3; ++sv) {
              mpq_class c = t_volume_inverse_counted(default_config(p, sv + 3, type), sv, sv + 2).value;
              mpq_class f = t_volume_inverse_formula(p, L, sv).value;
              e << (sv > 1 ? "," : "") << f.get_str();
              g << (sv > 1 ? "," : "") << c.get_str();
              ok = ok && c == f;
            }
            return Outcome{e.str(), g.str(), ok, ok ? "" : "torus count differs"};
          });
      for (int l = 0; l <= cfg.l_max; ++l)
        for (int m = 0; m <= cfg.m_max; ++m) {
          std::vector<int> js;
          for (int j = std::max(n - m - 1, 0); j <= n - 1; ++j) js.push_back(j);
          for (int j : js) {
            std::string id = "volumes.double-coset[" + std::string(to_string(type)) + ",l=" + str(l) + ",m=" + str(m) +
                             ",j=" + str(j) + "]";
            const bool matrix = n <= 2;
            add(id, "double coset volume of A(z), nu(z) = j: counted paths equal the closed form",
                with({{"case", to_string(type)}, {"l", str(l)}, {"m", str(m)}, {"j", str(j)},
                      {"paths", matrix ? "lattice,factorized" : "factorized"}}),
                [p, n, l, m, j, type, L, matrix, w = cfg.workers] {
                  LocalConfig lc = default_config(p, n, type);
                  mpq_class f = double_coset_volume_formula(p, L, n, l, m, DoubleCosetRep::A_z, j).value;
                  mpq_class fa = double_coset_volume_factorized(lc, n, l, m, DoubleCosetRep::A_z, j).value;
                  std::string got = fa.get_str();
                  bool ok = fa == f;
                  if (matrix) {
                    i64 z = j >= n - 1 ? 0 : ipow(p, j);
                    mpq_class c = double_coset_volume_counted(lc, n, l, m, DoubleCosetRep::A_z, z, 0, w).value;
                    ok = ok && c == f;
                    if (c != fa) got = "lattice " + c.get_str() + ", factorized " + fa.get_str();
                  }
                  return Outcome{f.get_str(), got, ok, ok ? "" : "volume mismatch"};
                });
          }
          if (m >= n) {
            std::string id = "volumes.s1s2s1[" + std::string(to_string(type)) + ",l=" + str(l) + ",m=" + str(m) + "]";
            const bool matrix = n <= 2;
            add(id, "double coset volume of s1 s2 s1 equals the closed form",
                with({{"case", to_string(type)}, {"l", str(l)}, {"m", str(m)}}), [p, n, l, m, type, L, matrix, w = cfg.workers] {
                  LocalConfig lc = default_config(p, n, type);
                  mpq_class f = double_coset_volume_formula(p, L, n, l, m, DoubleCosetRep::s1s2s1, 0).value;
                  mpq_class fa = double_coset_volume_factorized(lc, n, l, m, DoubleCosetRep::s1s2s1, 0).value;
                  bool ok = fa == f;
                  std::string got = fa.get_str();
                  if (matrix) {
                    mpq_class c = double_coset_volume_counted(lc, n, l, m, DoubleCosetRep::s1s2s1, 0, 0, w).value;
                    ok = ok && c == f;
                    if (c != fa) got = "lattice " + c.get_str() + ", factorized " + fa.get_str();
                  }
                  return Outcome{f.get_str(), got, ok, ok ? "" : "volume mismatch"};
                });
          }
          std::vector<int> generic;
          for (int j : js)
            if (!(n >= 3 && j <= (n - 3) / 2)) generic.push_back(j);
          if (generic.size() >= 2) {
            std::string id = "volumes.j-independence[" + std::string(to_string(type)) + ",l=" + str(l) + ",m=" + str(m) + "]";
            add(id, "V^{l,m} takes one value over the generic valuations j", with({{"case", to_string(type)}, {"l", str(l)}, {"m", str(m)}}),
                [p, n, l, m, type, generic] {
                  LocalConfig lc = default_config(p, n, type);
                  std::ostringstream g;
                  mpq_class first;
                  bool ok = true;
                  for (std::size_t i = 0; i < generic.size(); ++i) {
                    mpq_class v = double_coset_volume_factorized(lc, n, l, m, DoubleCosetRep::A_z, generic[i]).value;
                    if (i == 0) first = v;
                    ok = ok && v == first;
                    g << (i ? "," : "") << v.get_str();
                  }
                  return Outcome{"one value", g.str(), ok, ok ? "" : "V^{l,m} depends on j"};
                });
          }
        }
    }
  }

  void identities() {
    auto s = sh;
    for (const auto& spec : sh->manifest()) {
      const std::string sid = spec.id;
      add("identities." + sid, "matrix identity holds at every admissible grid point and on numeric specializations",
          {{"identity", sid}, {"numeric_samples", str(cfg.samples)}}, [s, sid, samples = cfg.samples, seed = cfg.seed] {
            const sym::IdentitySpec* sp = nullptr;
            for (const auto& x : s->manifest())
              if (x.id == sid) sp = &x;
            sym::IdentityReport r = sym::verify_identity(*sp, samples, seed);
            std::size_t good = 0;
            std::string witness;
            for (const auto& i : r.instances) {
              if (i.ok)
                ++good;
              else if (witness.empty() && !i.failures.empty())
                witness = i.failures.front();
            }
            if (witness.empty() && !r.numeric.failures.empty()) witness = r.numeric.failures.front();
            std::ostringstream e, g;
            e << r.instances.size() << " grid points, " << samples << " numeric samples";
            g << good << " grid points, " << r.numeric.passed << " numeric samples";
            return Outcome{e.str(), g.str(), r.ok(), witness};
          });
    }
    for (int c : {3, 4, 5, 7, 8})
      for (SplitType type : cfg.cases)
        for (int m = 0; m <= std::min(cfg.m_max, 2); ++m) {
          std::string id = "identities.obstruction[case=" + str(c) + "," + to_string(type) + ",m=" + str(m) + "]";
          add(id, "non-support family: sampled parabolic products violate the level pattern through the row-3 invariant",
              with({{"family", str(c)}, {"case", to_string(type)}, {"m", str(m)}, {"samples", str(cfg.samples)}}),
              [p = cfg.p, n = cfg.n, c, type, m, samples = cfg.samples, seed = cfg.seed] {
                sym::ObstructionReport r = sym::obstruction_check(c, p, n, m, type, samples, seed + 13 * c + m);
                std::ostringstream e, g;
                e << samples << " violations, invariant on " << samples << " minus skipped";
                g << r.pattern_violated << " violations, invariant on " << r.invariant_held << " (skipped " << r.skipped
                  << ")";
                return Outcome{e.str(), g.str(), r.ok(), r.failures.empty() ? "" : r.failures.front()};
              });
        }
  }

  void zeta() {
    const i64 p = cfg.p;
    const int n = cfg.n;
    if (n < 2) return;
    auto s = sh;
    const bool model = cfg.zeta_model && n == 2;
    const int lmax = std::max(cfg.l_max, 2), mmax = std::max(cfg.m_max, n + 1);
    if (model) {
      add("zeta.newform-model", "model newform: W(1) = 1, Kirillov support, K1(p^2) invariance, N- and center-equivariance",
          with({{"chi_index", "1"}, {"samples", str(cfg.samples)}}), [s, samples = cfg.samples, seed = cfg.seed] {
            wz::CheckReport r = wz::verify_newform_model(s->model(), std::min(samples, 50), seed);
            return Outcome{str(r.checks) + " checks", str(r.passed) + " passed", r.ok(),
                           r.failures.empty() ? "" : r.failures.front()};
          });
      for (int m : {1, 2})
        add("zeta.lemma-i[m=" + str(m) + "]", "sum over z in p^t/p^{n-1} of W(g lower(pi z)) vanishes exactly",
            with({{"m", str(m)}}), [s, m, samples = cfg.samples, seed = cfg.seed] {
              wz::CheckReport r = wz::verify_lemma_6_1_i(s->model(), m, std::min(samples, 50), seed + m);
              return Outcome{str(r.checks) + " zero sums", str(r.passed) + " zero sums", r.ok(),
                             r.failures.empty() ? "" : r.failures.front()};
            });
      add("zeta.atkin-lehner", "W = c W' with W' the Atkin-Lehner translate, c^{-2} = omega_tau(pi)^n", base(),
          [s, samples = cfg.samples, seed = cfg.seed] {
            wz::CheckReport r = wz::verify_atkin_lehner(s->model(), std::min(samples, 50), seed);
            return Outcome{str(r.checks) + " checks", str(r.passed) + " passed", r.ok(),
                           r.failures.empty() ? "" : r.failures.front()};
          });
    }
    for (SplitType type : cfg.cases) {
      const int L = legendre_of(type);
      std::vector<wz::ZetaMode> modes;
      if (model) modes.push_back(wz::ZetaMode::model);
      if (cfg.zeta_abstract) modes.push_back(wz::ZetaMode::abstract);
      for (wz::ZetaMode mode : modes) {
        const char* mname = mode == wz::ZetaMode::model ? "model" : "abstract";
        add("zeta.assembly[" + std::string(to_string(type)) + "," + mname + "]",
            "assembled Z(s) equals V^{0,0} with every other coefficient cancelled",
            with({{"case", to_string(type)}, {"mode", mname}, {"l_max", str(lmax)}, {"m_max", str(mmax)}}),
            [s, p, n, L, mode, lmax, mmax] {
              const wz::NewformModel* m = mode == wz::ZetaMode::model ? &s->model() : nullptr;
              wz::ZetaAssembly a = wz::assemble_zeta(p, L, n, mode, m, lmax, mmax);
              mpq_class f = wz::zeta_formula(p, L, n);
              bool ok = a.value == wz::ZetaValue{{wz::ZKey{}, f}};
              return Outcome{f.get_str(), wz::to_string(a.value), ok, ok ? "" : "residual terms remain"};
            });
      }
      if (modes.size() == 2)
        add("zeta.modes-agree[" + std::string(to_string(type)) + "]", "model and abstract assembly give the same Z(s)",
            with({{"case", to_string(type)}}), [s, p, n, L, lmax, mmax] {
              wz::ZetaValue a = wz::assemble_zeta(p, L, n, wz::ZetaMode::model, &s->model(), lmax, mmax).value;
              wz::ZetaValue b = wz::assemble_zeta(p, L, n, wz::ZetaMode::abstract, nullptr, lmax, mmax).value;
              return Outcome{wz::to_string(b), wz::to_string(a), a == b, a == b ? "" : "modes disagree"};
            });
    }
  }
};

bool selected(const std::string& id, const std::vector<std::string>& only) {
  if (only.empty()) return true;
  for (const auto& f : only)
    if (id.compare(0, f.size(), f) == 0) return true;
  return false;
}

}  // namespace

std::vector<PlannedCheck> Runner::plan(Command c) const {
  Planner pl{cfg_, shared_, {}};
  if (c == Command::verify_cosets || c == Command::verify_all) pl.cosets();
  if (c == Command::verify_double_cosets || c == Command::verify_all) pl.double_cosets();
  if (c == Command::verify_volumes || c == Command::verify_all) pl.volumes();
  if (c == Command::verify_identities || c == Command::verify_all) pl.identities();
  if (c == Command::verify_zeta || c == Command::verify_all) pl.zeta();
  std::vector<PlannedCheck> out;
  for (auto& p : pl.out)
    if (selected(p.id, cfg_.only)) out.push_back(std::move(p));
  return out;
}

std::vector<Record> Runner::execute(const std::vector<PlannedCheck>& checks) const {
  std::vector<Record> out(checks.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr budget;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= checks.size()) return;
      {
        std::lock_guard<std::mutex> lock(err_mu);
        if (budget) return;
      }
      const PlannedCheck& c = checks[i];
      Record& r = out[i];
      r.id = c.id;
      r.description = c.description;
      r.params = c.params;
      auto t0 = std::chrono::steady_clock::now();
      try {
        Outcome o = c.run();
        r.expected = o.expected;
        r.got = o.got;
        r.pass = o.pass;
        if (!o.pass) r.witness = o.witness.empty() ? "expected and obtained values differ" : o.witness;
      } catch (const BudgetError&) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!budget) budget = std::current_exception();
        return;
      } catch (const std::exception& e) {
        r.pass = false;
        r.got = "error";
        r.witness = e.what();
      }
      r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  unsigned w = std::max(1u, std::min<unsigned>(cfg_.workers, static_cast<unsigned>(checks.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < w; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (budget) std::rethrow_exception(budget);
  return out;
}

}  // namespace lzeta::run
