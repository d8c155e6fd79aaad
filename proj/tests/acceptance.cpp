// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "lzeta/double_coset.hpp"
#include "lzeta/support.hpp"
#include "lzeta/symbolic.hpp"
#include "lzeta/volume.hpp"
#include "lzeta/whittaker.hpp"

using namespace lzeta;

namespace {

const SplitType kTypes[] = {SplitType::inert, SplitType::ramified, SplitType::split};

int legendre_of(SplitType t) { return t == SplitType::inert ? -1 : t == SplitType::split ? 1 : 0; }

struct Result {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail << "failed: " << what << "; ";
    ok = ok && cond;
  }
};

bool criterion(int id, const std::string& name, const std::function<void(Result&)>& body) {
  Result r;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.ok = false;
    r.detail << "exception: " << e.what();
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (r.ok ? "PASS" : "FAIL") << " " << id << " " << name << " (" << std::fixed;
  std::cout.precision(1);
  std::cout << s << " s) " << r.detail.str() << std::endl;
  return r.ok;
}

OrbitPartition partition(const CosetTable& t, const LocalConfig& cfg, int n, int l, int m, bool grid) {
  return grid ? orbits_from_group(t, klm_grid(cfg, n, l, m)) : orbits_from_generators(t, klm_generators(cfg, n, m));
}

}  // namespace

int main() {
  bool all = true;

  all &= criterion(1, "coset index", [](Result& r) {
    struct Row {
      i64 q;
      int n;
      std::size_t size;
    };
    for (Row row : {Row{3, 1, 160}, Row{3, 2, 4320}, Row{5, 1, 936}, Row{5, 2, 117000}}) {
      CosetTable t = CosetTable::build(row.q, row.n);
      r.require(t.size() == row.size && static_cast<i64>(t.size()) == coset_index_formula(row.q, row.n),
                "table size at (" + std::to_string(row.q) + "," + std::to_string(row.n) + ")");
      r.require(t.distinct_keys() == t.size(), "distinct labels");
      if (row.q == 3) r.require(!t.find_collision().has_value(), "pairwise disjointness");
      r.detail << "(" << row.q << "," << row.n << ")=" << t.size() << " ";
    }
  });

  all &= criterion(2, "Bruhat cells", [](Result& r) {
    for (i64 q : {3, 5}) {
      auto cells = bruhat_cells(default_config(q, 1, SplitType::inert));
      const int e[8] = {0, 1, 1, 2, 2, 3, 3, 4};
      r.require(cells.size() == 8, "eight cells");
      for (std::size_t f = 0; f < cells.size(); ++f)
        r.require(static_cast<i64>(cells[f].size()) == ipow(q, e[f]), "cell " + std::to_string(f) + " size");
    }
    r.detail << "q=3,5 sizes (1,q,q,q^2,q^2,q^3,q^3,q^4)";
  });

  all &= criterion(3, "support double cosets", [](Result& r) {
    CosetTable t2 = CosetTable::build(3, 2);
    const std::size_t expect[4] = {1, 3, 4, 4};
    for (SplitType st : kTypes) {
      LocalConfig cfg = default_config(3, 2, st);
      for (int l = 0; l <= 1; ++l)
        for (int m = 0; m <= 3; ++m) {
          OrbitPartition part = partition(t2, cfg, 2, l, m, true);
          SupportCheck sc = label_support(part, t2, cfg, m);
          PropositionCheck pc = verify_support_list(part, t2, cfg, m);
          std::string at = std::string(to_string(st)) + " l=" + std::to_string(l) + " m=" + std::to_string(m);
          r.require(sc.constant && sc.covered, "support flag constant and covered at " + at);
          r.require(sc.support_orbits == expect[m] && pc.predicted == expect[m], "support orbit count at " + at);
          r.require(pc.ok, "predicted list at " + at + ": " + pc.witness);
          if (m == 0) {
            std::uint32_t id_orbit = part.orbit_of[t2.resolve(base_identity(t2.config()))];
            for (const PrelimRep& rep : prelim_reps(3, 2))
              if (rep.case_id == 2 && support_fast(cfg, 0, 2, rep))
                r.require(part.orbit_of[t2.resolve(prelim_matrix(cfg, rep))] == id_orbit, "case-2 absorption");
          }
        }
    }
    CosetTable t3 = CosetTable::build(3, 3);
    for (SplitType st : kTypes) {
      LocalConfig cfg = default_config(3, 3, st);
      OrbitPartition part = partition(t3, cfg, 3, 0, 2, false);
      SupportCheck sc = label_support(part, t3, cfg, 2);
      r.require(sc.constant && sc.covered && sc.support_orbits == 5, "five support orbits at (3,3), m=2");
      r.require(verify_support_list(part, t3, cfg, 2).ok, "predicted list at (3,3), m=2");
    }
    r.detail << "(3,2) m=0..3 -> 1,3,4,4; (3,3) m=2 -> 5";
  });

  all &= criterion(4, "u-criterion", [](Result& r) {
    for (SplitType st : kTypes) {
      LocalConfig cfg = default_config(3, 4, st);
      r.require(same_orbit_A(cfg, 4, 3, 0, 1, 4), "A(1) and A(4) merge");
      r.require(!same_orbit_A(cfg, 4, 3, 0, 1, 2), "A(1) and A(2) stay apart");
      for (int l : {0, 1}) {
        r.require(u_merge_element_ok(cfg, 4, l, 3, 0, 1, 4), "merging element for (1,4)");
        r.require(!u_merge_element_ok(cfg, 4, l, 3, 0, 1, 2), "no merging element for (1,2)");
      }
    }
    r.detail << "(3,4) j=0: 1~4, 1!~2";
  });

  all &= criterion(5, "identity suite", [](Result& r) {
    auto specs = sym::load_manifest(sym::default_manifest_path());
    r.require(specs.size() == 10, "ten catalog identities");
    std::size_t points = 0;
    std::uint64_t seed = 1;
    for (const auto& s : specs) {
      sym::IdentityReport rep = sym::verify_identity(s, 200, seed++);
      r.require(rep.ok(), "identity " + s.id);
      r.require(rep.numeric.samples == 200 && rep.numeric.passed == 200, "numeric samples of " + s.id);
      for (const auto& i : rep.instances) {
        r.require(i.multiplier_ok && i.scalars_ok, "unit-denominator ledger of " + s.id);
        r.require(i.at.n <= 4 && i.at.l <= 3 && i.at.m <= 3, "grid bounds");
      }
      points += rep.instances.size();
    }
    r.detail << specs.size() << " identities, " << points << " grid points, 200 numeric samples each";
  });

  all &= criterion(6, "volume suite", [](Result& r) {
    std::size_t count = 0;
    for (auto [q, n] : {std::pair<i64, int>{3, 1}, {3, 2}, {5, 2}}) {
      r.require(vol_K_sharp_formula(q, n).value * coset_index_formula(q, n) == 1, "vol(K^#) * |table| = 1");
      r.require(vol_K_sharp_counted(q, n).value == vol_K_sharp_formula(q, n).value, "counted vol(K^#)");
      for (SplitType st : kTypes) {
        LocalConfig cfg = default_config(q, n, st);
        const int L = legendre_of(st);
        for (int l = 0; l <= 2; ++l)
          for (int m = 0; m <= 2; ++m) {
            std::vector<mpq_class> generic;
            for (int j = std::max(n - m - 1, 0); j <= n - 1; ++j) {
              mpq_class f = double_coset_volume_formula(q, L, n, l, m, DoubleCosetRep::A_z, j).value;
              i64 z = j >= n - 1 ? 0 : ipow(q, j);
              mpq_class c = double_coset_volume_counted(cfg, n, l, m, DoubleCosetRep::A_z, z).value;
              r.require(c == f, "lattice count");
              r.require(double_coset_volume_factorized(cfg, n, l, m, DoubleCosetRep::A_z, j).value == f, "factorized");
              generic.push_back(c);
              ++count;
            }
            for (const auto& v : generic) r.require(v == generic.front(), "j-independence");
            if (m >= n) {
              mpq_class f = double_coset_volume_formula(q, L, n, l, m, DoubleCosetRep::s1s2s1, 0).value;
              r.require(double_coset_volume_counted(cfg, n, l, m, DoubleCosetRep::s1s2s1).value == f, "s1s2s1 count");
              ++count;
            }
          }
      }
    }
    r.detail << count << " volumes at (3,1),(3,2),(5,2)";
  });

  all &= criterion(7, "vanishing lemma (i)", [](Result& r) {
    int checks = 0;
    for (long q : {3L, 5L}) {
      auto model = wz::NewformModel::build({q, 1, 1});
      for (int m : {1, 2}) {
        wz::CheckReport rep = wz::verify_lemma_6_1_i(*model, m, 50, 17 * q + m);
        r.require(rep.ok(), "exact zero at q=" + std::to_string(q) + " m=" + std::to_string(m) +
                                (rep.failures.empty() ? "" : ": " + rep.failures.front()));
        checks += rep.checks;
      }
      r.require(wz::verify_newform_model(*model, 20, q).ok(), "model invariants at q=" + std::to_string(q));
    }
    r.detail << checks << " sums vanish in Q(zeta)";
  });

  all &= criterion(8, "local zeta integral", [](Result& r) {
    auto model = wz::NewformModel::build({3, 1, 1});
    const std::pair<SplitType, mpq_class> expect[] = {
        {SplitType::inert, mpq_class(1, 360)}, {SplitType::split, mpq_class(1, 720)}, {SplitType::ramified, mpq_class(1, 480)}};
    for (const auto& [st, v] : expect) {
      const int L = legendre_of(st);
      wz::ZetaValue m = wz::assemble_zeta(3, L, 2, wz::ZetaMode::model, model.get(), 3, 5).value;
      wz::ZetaValue a = wz::assemble_zeta(3, L, 2, wz::ZetaMode::abstract, nullptr, 3, 5).value;
      r.require(m == wz::ZetaValue{{wz::ZKey{}, v}}, std::string("model value, ") + to_string(st));
      r.require(a == m, std::string("abstract equals model, ") + to_string(st));
      r.detail << to_string(st) << "=" << v.get_str() << " ";
    }
    for (long q : {3L, 5L, 7L})
      for (int n : {2, 3, 4})
        for (SplitType st : kTypes) {
          const int L = legendre_of(st);
          mpq_class f = mpq_class(q - 1) / (qpow(q, 3 * (n - 1)) * (q + 1) * (qpow(q, 4) - 1)) * (1 - mpq_class(L, q)) *
                        qpow(q, n);
          wz::ZetaValue a = wz::assemble_zeta(q, L, n, wz::ZetaMode::abstract, nullptr, 2, n + 2).value;
          r.require(a == wz::ZetaValue{{wz::ZKey{}, f}}, "closed form at q=" + std::to_string(q) + " n=" + std::to_string(n));
        }
  });

  all &= criterion(9, "support cross-validation", [](Result& r) {
    std::size_t core = 0, other = 0;
    for (SplitType st : kTypes) {
      LocalConfig cfg = default_config(3, 2, st);
      SupportOrbit orbit = SupportOrbit::build(cfg, 2);
      for (int m = 0; m <= 2; ++m)
        for (const PrelimRep& rep : prelim_reps(3, 2)) {
          bool is_core = rep.case_id == 1 || rep.case_id == 2 || rep.case_id == 6;
          (is_core ? core : other) += 1;
          r.require(support_fast(cfg, m, 2, rep) == support_exhaustive(orbit, cfg, m, rep),
                    "verdicts differ for case " + std::to_string(rep.case_id));
        }
    }
    r.require(other >= 200, "at least 200 other-case inputs");
    r.detail << core << " case-1/2/6 and " << other << " other inputs agree";
  });

  all &= criterion(10, "level-one regression", [](Result& r) {
    for (SplitType st : kTypes) {
      const int L = legendre_of(st);
      LocalConfig cfg = default_config(3, 1, st);
      // (q-1)/((q+1)(q^4-1)) at q = 3
      mpq_class b(2, 4 * 80);
      b.canonicalize();
      b *= 1 - mpq_class(L, 3);
      for (int l = 0; l <= 2; ++l)
        for (int m = 0; m <= 2; ++m) {
          r.require(double_coset_volume_counted(cfg, 1, l, m, DoubleCosetRep::A_z, 0).value == b * qpow(3, 4 * m + 3 * l + 1),
                    "A(0) volume at n=1");
          if (m > 0)
            r.require(double_coset_volume_counted(cfg, 1, l, m, DoubleCosetRep::s1s2s1).value ==
                          b * qpow(3, 4 * m + 3 * l + 2),
                      "s1s2s1 volume at n=1");
        }
    }
    CosetTable t1 = CosetTable::build(3, 1);
    for (SplitType st : kTypes) {
      LocalConfig cfg = default_config(3, 1, st);
      for (int m = 0; m <= 3; ++m) {
        OrbitPartition part = partition(t1, cfg, 1, 0, m, true);
        SupportCheck sc = label_support(part, t1, cfg, m);
        std::size_t expect = m == 0 ? 1 : 2;  // A(0), and s1 s2 s1 once m >= 1
        r.require(sc.constant && sc.covered && sc.support_orbits == expect, "n=1 support orbits at m=" + std::to_string(m));
        r.require(verify_support_list(part, t1, cfg, m).ok, "n=1 predicted list");
      }
    }
    r.detail << "q=3, n=1 volumes and support reduction";
  });

  std::cout << (all ? "ALL PASS" : "SOME FAIL") << std::endl;
  return all ? 0 : 1;
}
