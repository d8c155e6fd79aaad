#include <set>

#include "doctest.h"
#include "gen.hpp"
#include "lzeta/support.hpp"

using namespace lzeta;

TEST_CASE("Bruhat cell sizes") {
  for (i64 q : {3, 5}) {
    auto cells = bruhat_cells(default_config(q, 1, SplitType::inert));
    const std::size_t expect[8] = {1, (size_t)q, (size_t)q, (size_t)(q * q), (size_t)(q * q), (size_t)(q * q * q),
                                   (size_t)(q * q * q), (size_t)(q * q * q * q)};
    std::size_t total = 0;
    for (int f = 0; f < 8; ++f) {
      CHECK(cells[f].size() == expect[f]);
      total += cells[f].size();
    }
    CHECK(total == static_cast<std::size_t>(coset_index_formula(q, 1)));
    CHECK(cells[0][0] == base_identity(default_config(q, 1, SplitType::inert)));
  }
  CHECK(coset_index_formula(5, 1) == 936);
}

TEST_CASE("coset table sizes and label separation") {
  struct Row {
    i64 q;
    int n;
    std::size_t size;
  };
  for (Row r : {Row{3, 1, 160}, Row{3, 2, 4320}, Row{5, 1, 936}, Row{5, 2, 117000}}) {
    CosetTable t = CosetTable::build(r.q, r.n);
    CHECK(t.size() == r.size);
    CHECK(t.size() == static_cast<std::size_t>(coset_index_formula(r.q, r.n)));
    CHECK(t.distinct_keys() == t.size());
    for (const GMatB& g : t.reps()) REQUIRE(member(g, Subgroup::K_H, 0).ok);
  }
}

TEST_CASE("pairwise disjointness at level 1") {
  CHECK_FALSE(CosetTable::build(3, 1).find_collision().has_value());
  CHECK_FALSE(CosetTable::build(5, 1).find_collision().has_value());
}

TEST_CASE("a duplicated representative is reported as a collision") {
  CosetTable t = CosetTable::build(3, 1);
  std::vector<GMatB> reps = t.reps();
  std::vector<std::uint8_t> fam = t.families();
  LocalConfig cfg = t.config();
  std::mt19937_64 rng(3);
  reps.push_back(reps[7] * random_element(rng, cfg, Subgroup::Ksharp_pn, 1));
  fam.push_back(9);
  CosetTable bad = CosetTable::from_reps(3, 1, reps, fam);
  auto c = bad.find_collision();
  REQUIRE(c.has_value());
  CHECK(c->i == 7);
  CHECK(c->j == reps.size() - 1);
}

TEST_CASE("resolve is right K-sharp invariant") {
  std::mt19937_64 rng(41);
  for (int n : {1, 2}) {
    CosetTable t = CosetTable::build(3, n);
    LocalConfig cfg = t.config();
    for (std::size_t i = 0; i < t.size(); i += 7) CHECK(t.resolve(t.rep(i)) == i);
    for (int s = 0; s < 10000; ++s) {
      std::size_t i = rng() % t.size();
      GMatB k = random_element(rng, cfg, Subgroup::Ksharp_pn, n);
      REQUIRE(t.resolve(t.rep(i) * k) == i);
    }
    // arbitrary elements of K^H resolve to exactly one representative
    for (int s = 0; s < 300; ++s) {
      GMatB g = random_element(rng, cfg, Subgroup::K_H, 0, 10);
      std::size_t id = t.resolve(g);
      GMatB gi = inverse_similitude(g);
      int hits = 0;
      for (std::size_t j = 0; j < t.size(); ++j) hits += member(gi * t.rep(j), Subgroup::Ksharp_pn, n).ok;
      REQUIRE(hits == 1);
      CHECK(member(gi * t.rep(id), Subgroup::Ksharp_pn, n).ok);
    }
  }
}

TEST_CASE("s1 resolves to the unrefined s1 cell") {
  CosetTable t = CosetTable::build(3, 2);
  std::size_t id = t.resolve(s1_matrix(t.config()));
  CHECK(t.family(id) == 2);
  CHECK(t.rep(id) == s1_matrix(t.config()));
}

TEST_CASE("closed-form support verdicts") {
  LocalConfig cfg = default_config(3, 2, SplitType::inert);
  CHECK_FALSE(support_fast(cfg, 0, 2, {1, 0, 0, 1}));
  CHECK(support_fast(cfg, 0, 2, {1, 0, 0, 0}));
  CHECK(support_fast(cfg, 2, 2, {6, 0, 0, 0}));
  CHECK_FALSE(support_fast(cfg, 1, 2, {6, 0, 0, 0}));
  for (i64 w = 0; w < 3; ++w) CHECK_FALSE(support_fast(cfg, 1, 2, {5, w, 0, 0}));
}

TEST_CASE("exhaustive support agrees with the closed form at level 1") {
  for (SplitType st : {SplitType::inert, SplitType::ramified, SplitType::split}) {
    LocalConfig cfg = default_config(3, 1, st);
    SupportOrbit orbit = SupportOrbit::build(cfg, 1);
    for (int m = 0; m <= 2; ++m)
      for (const PrelimRep& r : prelim_reps(3, 1)) {
        bool fast = support_fast(cfg, m, 1, r);
        GMatE h = eta_times_prelim(cfg, m, r);
        CHECK(support_exhaustive(orbit, cfg, m, r) == fast);
        CHECK(support_by_first_column(h, 1) == fast);
      }
  }
}
