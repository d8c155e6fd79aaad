#include <fstream>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "lzeta/symbolic.hpp"
#include "lzeta/whittaker.hpp"

using namespace lzeta;
using namespace lzeta::wz;

namespace {

const NewformModel& model(long q, int chi = 1, long c = 1) {
  static std::map<std::tuple<long, int, long>, std::shared_ptr<NewformModel>> cache;
  auto& m = cache[{q, chi, c}];
  if (!m) m = NewformModel::build({q, chi, c});
  return *m;
}

CyclotomicNum random_cyclo(std::mt19937_64& rng, long M) {
  std::vector<mpq_class> c(M);
  for (auto& x : c) x = mpq_class(static_cast<long>(rng() % 7) - 3, 1 + static_cast<long>(rng() % 3));
  return CyclotomicNum::from_terms(M, c);
}

long mod_p(const mpz_class& x, long p) {
  mpz_class r = x % p;
  if (r < 0) r += p;
  return r.get_si();
}

// unit part of a nonzero rational, reduced mod p
long unit_part(mpq_class x, long p) {
  mpz_class n = x.get_num(), d = x.get_den();
  while (n % p == 0) n /= p;
  while (d % p == 0) d /= p;
  long a = mod_p(n, p), b = mod_p(d, p);
  for (long y = 1; y < p; ++y)
    if (b * y % p == 1) return a * y % p;
  return -1;
}

// Riemann sum of the Whittaker integrand over the grid p^{-lo} Z / p^{hi} Z, independent of the adaptive integrator.
WValue grid_oracle(long p, int chi, long cpsi, const GL2& g, int lo, int hi) {
  std::vector<long> dlog(p, -1);
  long root = 2;
  for (;; ++root) {
    long x = 1, ord = 0;
    do {
      x = x * root % p;
      ++ord;
    } while (x != 1);
    if (ord == p - 1) break;
  }
  for (long k = 0, x = 1; k < p - 1; ++k, x = x * root % p) dlog[x] = k;
  const long P = static_cast<long>(ppow(p, lo).get_num().get_si());
  const long N = P * static_cast<long>(ppow(p, hi).get_num().get_si());
  const long M = P * (p - 1);
  const mpq_class det = g.a * g.d - g.b * g.c;
  std::map<std::pair<int, int>, std::vector<mpq_class>> acc;
  for (long i = 0; i < N; ++i) {
    mpq_class x(i, P);
    x.canonicalize();
    mpq_class c = -(g.a + x * g.c), d = -(g.b + x * g.d);
    if (c == 0 || d == 0) continue;
    int vc = sym::rational_valuation(c, p), vd = sym::rational_valuation(d, p);
    if (vc != vd + 1) continue;
    long uA = unit_part(det / d, p), uD = unit_part(d, p), up = unit_part(c / d, p);
    long t = ((dlog[uA] - dlog[uD] - dlog[up]) * chi) % (p - 1);
    if (t < 0) t += p - 1;
    long e = (cpsi * i % P + P) % P;
    auto& v = acc[{sym::rational_valuation(det, p) - vd, vd}];
    v.resize(M);
    v[(e * (p - 1) + t * P) % M] += mpq_class(1) / ppow(p, hi);
  }
  WValue out;
  for (auto& [k, v] : acc) out = out + WValue::monomial(k.first, k.second, CyclotomicNum::from_terms(M, v));
  return out;
}

}  // namespace

TEST_CASE("cyclotomic polynomials") {
  CHECK(cyclotomic_polynomial(1) == std::vector<mpz_class>{-1, 1});
  CHECK(cyclotomic_polynomial(6) == std::vector<mpz_class>{1, -1, 1});
  CHECK(cyclotomic_polynomial(9) == std::vector<mpz_class>{1, 0, 0, 1, 0, 0, 1});
  CHECK(cyclotomic_polynomial(12) == std::vector<mpz_class>{1, 0, -1, 0, 1});
  for (long M : {1L, 2L, 4L, 6L, 10L, 12L, 15L, 20L, 30L, 36L, 42L, 60L, 90L, 105L})
    CHECK(static_cast<long>(cyclotomic_polynomial(M).size()) - 1 == euler_phi(M));
}

TEST_CASE("cyclotomic ring laws") {
  std::mt19937_64 rng(3);
  for (long M : {6L, 20L, 12L, 42L}) {
    CAPTURE(M);
    for (int i = 0; i < 30; ++i) {
      CyclotomicNum x = random_cyclo(rng, M), y = random_cyclo(rng, M), z = random_cyclo(rng, 6);
      CHECK(x * y == y * x);
      CHECK((x + y) * z == x * z + y * z);
      CHECK((x * y) * z == x * (y * z));
      CHECK((x * y).conj() == x.conj() * y.conj());
      CHECK((x - x).is_zero());
      CHECK((x * x.conj()).conj() == x * x.conj());
    }
    CHECK(CyclotomicNum::root(M, M).is_rational());
    CyclotomicNum sum;
    for (long k = 0; k < M; ++k) sum = sum + CyclotomicNum::root(M, k);
    CHECK(sum.is_zero());
    CHECK(CyclotomicNum::root(M, 1) * CyclotomicNum::root(M, M - 1) == CyclotomicNum::rational(1));
  }
  CHECK(CyclotomicNum::root(4, 2) == CyclotomicNum::rational(-1));
  CHECK(CyclotomicNum::root(6, 1).lift(12) == CyclotomicNum::root(12, 2));
}

TEST_CASE("Gauss sums have norm q") {
  for (long q : {3L, 5L, 7L})
    for (int chi = 1; chi < q - 1; ++chi) {
      const NewformModel& m = model(q, chi);
      WValue one = m.raw(GL2{});
      REQUIRE(one.terms.size() == 1);
      CHECK(one.terms.begin()->first == std::make_pair(1, -1));
      const CyclotomicNum& g = one.terms.begin()->second;
      CHECK((g * g.conj()).rational_value() == q);
    }
}

TEST_CASE("model invariants at q = 3, 5, 7") {
  for (long q : {3L, 5L, 7L}) {
    CAPTURE(q);
    CheckReport r = verify_newform_model(model(q), 20, 7 + q);
    for (const auto& f : r.failures) MESSAGE(f);
    CHECK(r.ok());
    CHECK(model(q).value(GL2{}) == WValue::monomial(0, 0, CyclotomicNum::rational(1)));
  }
  CheckReport r = verify_newform_model(model(5, 3, 2), 10, 1);
  CHECK(r.ok());
}

TEST_CASE("the model has conductor exactly p^2") {
  for (long q : {3L, 5L}) {
    const NewformModel& m = model(q);
    CHECK_FALSE(m.raw(gl2_lower(mpq_class(q))) == m.raw(GL2{}));
    CHECK_FALSE(m.value(gl2_lower(mpq_class(q))).is_zero());
  }
}

TEST_CASE("trivial character and bad parameters are refused") {
  CHECK_THROWS_AS(NewformModel::build({3, 2, 1}), ConfigError);
  CHECK_THROWS_AS(NewformModel::build({5, 0, 1}), ConfigError);
  CHECK_THROWS_AS(NewformModel::build({2, 1, 1}), ConfigError);
  CHECK_THROWS_AS(NewformModel::build({9, 1, 1}), ConfigError);
  CHECK_THROWS_AS(NewformModel::build({3, 1, 3}), ConfigError);
}

TEST_CASE("adaptive integral agrees with a plain grid sum") {
  for (long q : {3L, 5L}) {
    const int lo = q == 3 ? 3 : 2, hi = q == 3 ? 3 : 2;
    const NewformModel& m = model(q);
    std::vector<GL2> args{GL2{}, gl2_lower(mpq_class(q)), gl2_lower(mpq_class(2 * q)), gl2_diag(q, 1),
                          gl2_diag(q, -1), gl2_antidiag(q, 0), gl2_atkin_lehner(q, 2), GL2{1, 1, mpq_class(q), 2}};
    for (const GL2& g : args) {
      CAPTURE(q);
      CAPTURE(g.a.get_str() + " " + g.b.get_str() + " " + g.c.get_str() + " " + g.d.get_str());
      CHECK(m.raw(g) == grid_oracle(q, 1, 1, g, lo, hi));
    }
  }
}

TEST_CASE("frozen oracle constants") {
  std::ifstream in(std::string(LZETA_DATA_DIR) + "/oracle_constants.json");
  REQUIRE(in);
  nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["format_version"] == 1);
  REQUIRE(j["constants"].size() >= 2);
  for (const auto& c : j["constants"]) {
    long q = c["q"];
    std::vector<mpq_class> coeffs;
    for (const auto& s : c["coeffs"]) coeffs.emplace_back(s.get<std::string>());
    CyclotomicNum expect = CyclotomicNum::from_terms(c["order"].get<long>(), coeffs);
    WValue got = model(q, c["chi_index"], c["c"]).value(gl2_lower(mpq_class(q)));
    CAPTURE(got.str());
    CHECK(got == WValue::monomial(0, 0, expect));
  }
}

TEST_CASE("vanishing lemma (i) at q = 3, 5 and m = 1, 2") {
  for (long q : {3L, 5L})
    for (int m : {1, 2}) {
      CAPTURE(q);
      CAPTURE(m);
      CheckReport r = verify_lemma_6_1_i(model(q), m, 30, 100 * q + m);
      for (const auto& f : r.failures) MESSAGE(f);
      CHECK(r.ok());
      CHECK(r.checks == 3 * 31);
    }
  CHECK_THROWS(verify_lemma_6_1_i(model(3), 0, 1, 1));
}

TEST_CASE("individual terms of the vanishing sum are nonzero") {
  const NewformModel& m = model(3);
  for (long z = 0; z < 3; ++z) CHECK_FALSE(m.value(gl2_lower(mpq_class(3 * z))).is_zero());
}

TEST_CASE("Atkin-Lehner proportionality") {
  for (long q : {3L, 5L}) {
    CheckReport r = verify_atkin_lehner(model(q), 20, q);
    for (const auto& f : r.failures) MESSAGE(f);
    CHECK(r.ok());
  }
}

TEST_CASE("sampled K1 elements") {
  for (const GL2& k : sample_k1(5, 2, 50, 4)) {
    CHECK(k.c.get_num() % 25 == 0);
    mpq_class det = k.a * k.d - k.b * k.c;
    CHECK(det.get_num() % 5 != 0);
  }
}

TEST_CASE("W# factor monomials") {
  WSharpFactor f = w_sharp_factor(3, 2, 0, 0, DoubleCosetRep::A_z, 0);
  CHECK(f.key == ZKey{0, 0, 0, 0, 0});
  CHECK(f.slot.kind == WArg::DiagLower);
  CHECK(f.slot.z == 0);
  f = w_sharp_factor(3, 2, 1, 1, DoubleCosetRep::A_z, 2);
  CHECK(f.key == ZKey{1, 1, 3, 3, 2});
  CHECK(f.slot.l == 1);
  CHECK(f.slot.z == 6);
  f = w_sharp_factor(3, 2, 0, 2, DoubleCosetRep::s1s2s1);
  CHECK(f.key == ZKey{0, 2, 4, 4, 2});
  CHECK(f.slot.kind == WArg::Antidiag);
  CHECK_THROWS(w_sharp_factor(3, 2, 0, 1, DoubleCosetRep::s1s2s1));
  CHECK_THROWS(w_sharp_factor(3, 3, 0, 0, DoubleCosetRep::A_z, 1));  // needs z in p^2 at m = 0
  CHECK_THROWS(w_sharp_factor(3, 2, 0, 1, DoubleCosetRep::A_z, mpq_class(1, 3)));
  CHECK_NOTHROW(w_sharp_factor(3, 4, 0, 3, DoubleCosetRep::A_z, 2));  // v(z) = 0 <= (n-3)/2
  CHECK_THROWS(w_sharp_factor(3, 4, 0, 1, DoubleCosetRep::A_z, 2));
}

TEST_CASE("zeta terms enumerate the support") {
  auto terms = zeta_terms(3, -1, 2, 1, 3);
  int kir = 0, sum = 0, point = 0, al = 0;
  for (const auto& t : terms) {
    switch (t.kind) {
      case TermKind::Kirillov: ++kir; break;
      case TermKind::LemmaSum:
        ++sum;
        CHECK(t.args.size() == 3);
        break;
      case TermKind::LemmaPoint: ++point; break;
      case TermKind::AtkinLehner: ++al; break;
    }
  }
  CHECK(kir == 2);
  CHECK(sum == 6);
  CHECK(point == 0);
  CHECK(al == 4);
  int points4 = 0;
  for (const auto& t : zeta_terms(3, -1, 4, 0, 3))
    if (t.kind == TermKind::LemmaPoint) {
      ++points4;
      CHECK(t.j == 0);
      CHECK(t.args.size() == 2);
    }
  CHECK(points4 == 1);  // m = 3
}

TEST_CASE("local zeta integral at (q,n) = (3,2)") {
  const ZKey one{};
  for (auto [L, expect] : {std::pair{-1, mpq_class(1, 360)}, {1, mpq_class(1, 720)}, {0, mpq_class(1, 480)}}) {
    CAPTURE(L);
    ZetaAssembly a = assemble_zeta(3, L, 2, ZetaMode::model, &model(3), 3, 5);
    CHECK(a.value == ZetaValue{{one, expect}});
    CHECK(zeta_formula(3, L, 2) == expect);
  }
}

TEST_CASE("model and abstract assembly agree") {
  for (long q : {3L, 5L})
    for (int L : {-1, 0, 1})
      for (int chi : {1, static_cast<int>(q) - 2}) {
        CAPTURE(q);
        CAPTURE(L);
        ZetaAssembly a = assemble_zeta(q, L, 2, ZetaMode::model, &model(q, chi), 3, 4);
        ZetaAssembly b = assemble_zeta(q, L, 2, ZetaMode::abstract, nullptr, 3, 4);
        CHECK(a.value == b.value);
        CHECK(a.value == ZetaValue{{ZKey{}, zeta_formula(q, L, 2)}});
      }
}

TEST_CASE("abstract assembly matches the closed form") {
  for (long q : {3L, 5L, 7L, 11L})
    for (int n : {2, 3, 4})
      for (int L : {-1, 0, 1}) {
        ZetaAssembly a = assemble_zeta(q, L, n, ZetaMode::abstract, nullptr, 2, n + 2);
        CHECK(a.value == ZetaValue{{ZKey{}, zeta_formula(q, L, n)}});
        mpq_class f = mpq_class(q - 1) / (qpow(q, 3 * (n - 1)) * (q + 1) * (qpow(q, 4) - 1)) *
                      (1 - mpq_class(L, q)) * qpow(q, n);
        CHECK(zeta_formula(q, L, n) == f);
      }
}

TEST_CASE("a wrong W value leaves residual coefficients") {
  // dropping the Kirillov support (W(diag(pi^l,1)) = 1 for all l) must leave B_{l,0} terms
  auto terms = zeta_terms(3, -1, 2, 2, 0);
  ZetaValue z;
  for (const auto& t : terms) z[t.key] += t.volume;
  CHECK(z.size() == 3);
  CHECK(z.count(ZKey{1, 0, 1, 1, 1}) == 1);
  CHECK_THROWS(assemble_zeta(3, -1, 2, ZetaMode::model, nullptr, 1, 1));
  CHECK_THROWS(assemble_zeta(3, -1, 3, ZetaMode::model, &model(3), 1, 1));
}
