#include "doctest.h"
#include "gen.hpp"

using namespace lzeta;

namespace {
const SplitType kTypes[] = {SplitType::inert, SplitType::ramified, SplitType::split};
}

TEST_CASE("legendre symbol per split type") {
  CHECK(legendre_symbol(default_config(3, 2, SplitType::split)) == 1);
  CHECK(legendre_symbol(default_config(3, 2, SplitType::inert)) == -1);
  CHECK(default_config(3, 2, SplitType::inert).d == 2);
  CHECK(legendre_symbol(default_config(5, 2, SplitType::ramified)) == 0);
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(default_config(2, 3, SplitType::inert), ConfigError);
  LocalConfig cfg = default_config(3, 3, SplitType::inert);
  cfg.type = SplitType::split;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = default_config(3, 3, SplitType::inert);
  cfg.c = 3;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = default_config(3, 3, SplitType::inert);
  cfg.p = 9;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("alpha satisfies its quadratic relation") {
  LocalConfig s = default_config(3, 1, SplitType::split);
  QuadExt al = make_alpha(s);
  CHECK(al.s().value() == 2);
  CHECK(al.t().value() == 1);
  for (SplitType t : kTypes)
    for (int k = 1; k <= 12; ++k) {
      LocalConfig cfg = default_config(3, k, t);
      validate(cfg);
      QuadExt a = make_alpha(cfg);
      Residue A(cfg.a, 3, k), B(cfg.b, 3, k), C(cfg.c, 3, k);
      QuadExt rel = a * a * C - a * B + QuadExt::from_base(A, cfg);
      CHECK(rel.is_zero());
      CHECK((a + a.conj()) == QuadExt::from_base(B * C.inv(), cfg));
      CHECK((a * a.conj()) == QuadExt::from_base(A * C.inv(), cfg));
    }
}

TEST_CASE("alpha relation with random b and c") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    LocalConfig cfg = default_config(5, 6, kTypes[trial % 3]);
    i64 m = cfg.modulus();
    cfg.b = static_cast<i64>(rng() % m);
    cfg.c = gen::unit(rng, cfg).value();
    cfg.a = mul_mod(mod_norm(cfg.b * cfg.b - cfg.d, m), inv_mod(4 * cfg.c, m), m);
    validate(cfg);
    QuadExt a = make_alpha(cfg);
    Residue A(cfg.a, 5, 6), B(cfg.b, 5, 6), C(cfg.c, 5, 6);
    CHECK((a * a * C - a * B + QuadExt::from_base(A, cfg)).is_zero());
  }
}

TEST_CASE("ring laws on sampled triples") {
  std::mt19937_64 rng(1);
  for (SplitType t : kTypes) {
    LocalConfig cfg = default_config(3, 5, t);
    for (int i = 0; i < 1000; ++i) {
      QuadExt x = gen::ext(rng, cfg), y = gen::ext(rng, cfg), z = gen::ext(rng, cfg);
      REQUIRE(((x * y) * z) == (x * (y * z)));
      REQUIRE((x * (y + z)) == (x * y + x * z));
      REQUIRE((x * y).norm() == x.norm() * y.norm());
      REQUIRE((x + y).conj() == x.conj() + y.conj());
      REQUIRE((x * y).conj() == x.conj() * y.conj());
      REQUIRE(x.conj().conj() == x);
      REQUIRE((x * QuadExt::one_like(x)) == x);
      REQUIRE((x * x.conj()).in_base());
    }
  }
}

TEST_CASE("inverse is conj over norm") {
  LocalConfig cfg = default_config(3, 2, SplitType::inert);
  QuadExt x(cfg.type, cfg.d, Residue(1, 3, 2), Residue(1, 3, 2));
  CHECK((x * x.inv()) == QuadExt::one_like(x));
  std::mt19937_64 rng(2);
  for (SplitType t : kTypes) {
    LocalConfig c2 = default_config(5, 4, t);
    for (int i = 0; i < 200; ++i) {
      QuadExt u = gen::ext_unit(rng, c2);
      CHECK((u * u.inv()) == QuadExt::one_like(u));
    }
  }
  QuadExt nonunit = QuadExt::from_int(3, cfg);
  CHECK_THROWS_WITH_AS(nonunit.inv(), doctest::Contains("norm valuation >=2"), std::domain_error);
}

TEST_CASE("valuations and precision reduction") {
  Residue z(0, 3, 4);
  CHECK(z.valuation().value == 4);
  CHECK(z.valuation().str() == ">=4");
  CHECK(Residue(18, 3, 4).valuation().value == 2);
  Residue x(50, 3, 4);
  CHECK(x.reduce(4) == x);
  CHECK(x.reduce(3).reduce(2) == x.reduce(2));
  CHECK(Residue(9 * 2, 3, 4).reduce(2).is_zero());
  CHECK_THROWS_AS(x.reduce(5), PrecisionError);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    LocalConfig cfg = default_config(3, 5, SplitType::inert);
    Residue a = gen::residue(rng, cfg), b = gen::residue(rng, cfg);
    CHECK((a * b).reduce(3) == a.reduce(3) * b.reduce(3));
    CHECK((a + b).reduce(2) == a.reduce(2) + b.reduce(2));
  }
}

TEST_CASE("base elements lie in P^n exactly when their valuation is at least n") {
  for (SplitType t : kTypes) {
    LocalConfig cfg = default_config(3, 4, t);
    for (i64 v = 0; v < cfg.modulus(); ++v) {
      Residue r(v, 3, 4);
      QuadExt e = QuadExt::from_base(r, cfg);
      for (int n = 0; n <= 4; ++n) REQUIRE(e.in_ideal(n) == (r.valuation().value >= n));
    }
  }
}
