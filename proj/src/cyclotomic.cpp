#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lzeta/whittaker.hpp"

namespace lzeta::wz {

namespace {

std::vector<long> prime_factors(long M) {
  std::vector<long> out;
  for (long d = 2; d * d <= M; ++d)
    if (M % d == 0) {
      out.push_back(d);
      while (M % d == 0) M /= d;
    }
  if (M > 1) out.push_back(M);
  return out;
}

// multiply by (x^d - 1)
std::vector<mpz_class> mul_xd_minus_1(const std::vector<mpz_class>& p, long d) {
  std::vector<mpz_class> r(p.size() + d, 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    r[i + d] += p[i];
    r[i] -= p[i];
  }
  return r;
}

// exact division by (x^d - 1)
std::vector<mpz_class> div_xd_minus_1(const std::vector<mpz_class>& p, long d) {
  std::size_t n = p.size() - d;
  std::vector<mpz_class> q(n, 0), rem = p;
  for (std::size_t i = p.size(); i-- > static_cast<std::size_t>(d);) {
    mpz_class c = rem[i];
    q[i - d] = c;
    rem[i] -= c;
    rem[i - d] += c;
  }
  for (long i = 0; i < d; ++i)
    if (rem[i] != 0) throw std::logic_error("cyclotomic division is not exact");
  return q;
}

std::vector<mpz_class> phi_squarefree(long r) {
  auto primes = prime_factors(r);
  // Phi_r(x) = prod_{d | r} (x^d - 1)^{mu(r/d)}
  std::size_t k = primes.size();
  std::vector<mpz_class> p{1};
  std::vector<std::pair<long, int>> factors;
  for (std::size_t mask = 0; mask < (std::size_t(1) << k); ++mask) {
    long e = 1;
    int bits = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1) {
        e *= primes[i];
        ++bits;
      }
    factors.push_back({r / e, bits % 2 == 0 ? 1 : -1});
  }
  for (auto [d, s] : factors)
    if (s == 1) p = mul_xd_minus_1(p, d);
  for (auto [d, s] : factors)
    if (s == -1) p = div_xd_minus_1(p, d);
  return p;
}

std::vector<mpq_class> reduce(long M, std::vector<mpq_class> v) {
  const auto& phi = cyclotomic_polynomial(M);
  std::size_t deg = phi.size() - 1;
  for (std::size_t i = v.size(); i-- > deg;) {
    if (v[i] == 0) continue;
    mpq_class c = v[i];
    for (std::size_t j = 0; j <= deg; ++j) v[i - deg + j] -= c * phi[j];
  }
  v.resize(deg);
  if (v.empty()) v.push_back(0);
  return v;
}

}  // namespace

long euler_phi(long M) {
  long r = M;
  for (long p : prime_factors(M)) r = r / p * (p - 1);
  return r;
}

const std::vector<mpz_class>& cyclotomic_polynomial(long M) {
  static std::mutex mu;
  static std::map<long, std::vector<mpz_class>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(M);
  if (it != cache.end()) return it->second;
  if (M < 1) throw std::invalid_argument("cyclotomic order must be positive");
  long rad = 1;
  for (long p : prime_factors(M)) rad *= p;
  std::vector<mpz_class> base = M == 1 ? std::vector<mpz_class>{-1, 1} : phi_squarefree(rad);
  // Phi_M(x) = Phi_rad(x^{M/rad})
  long s = M / rad;
  std::vector<mpz_class> out((base.size() - 1) * s + 1, 0);
  for (std::size_t i = 0; i < base.size(); ++i) out[i * s] = base[i];
  return cache.emplace(M, std::move(out)).first->second;
}

CyclotomicNum CyclotomicNum::rational(const mpq_class& v) {
  CyclotomicNum r;
  r.c_[0] = v;
  return r;
}

CyclotomicNum CyclotomicNum::root(long M, long k) {
  std::vector<mpq_class> c(M, 0);
  c[((k % M) + M) % M] = 1;
  return from_terms(M, c);
}

CyclotomicNum CyclotomicNum::from_terms(long M, const std::vector<mpq_class>& c) {
  CyclotomicNum r;
  r.M_ = M;
  std::vector<mpq_class> v(M, 0);
  for (std::size_t i = 0; i < c.size(); ++i) v[i % M] += c[i];
  r.c_ = reduce(M, std::move(v));
  return r;
}

CyclotomicNum CyclotomicNum::lift(long M2) const {
  if (M2 == M_) return *this;
  if (M2 % M_ != 0) throw std::invalid_argument("cyclotomic lift needs M | M2");
  long s = M2 / M_;
  std::vector<mpq_class> v(M2, 0);
  for (std::size_t i = 0; i < c_.size(); ++i) v[i * s] += c_[i];
  CyclotomicNum r;
  r.M_ = M2;
  r.c_ = reduce(M2, std::move(v));
  return r;
}

CyclotomicNum CyclotomicNum::operator+(const CyclotomicNum& o) const {
  long M = std::lcm(M_, o.M_);
  CyclotomicNum x = lift(M), y = o.lift(M);
  for (std::size_t i = 0; i < x.c_.size(); ++i) x.c_[i] += y.c_[i];
  return x;
}

CyclotomicNum CyclotomicNum::operator-() const {
  CyclotomicNum r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

CyclotomicNum CyclotomicNum::operator-(const CyclotomicNum& o) const { return *this + (-o); }

CyclotomicNum CyclotomicNum::operator*(const CyclotomicNum& o) const {
  long M = std::lcm(M_, o.M_);
  CyclotomicNum x = lift(M), y = o.lift(M);
  std::vector<mpq_class> v(x.c_.size() + y.c_.size(), 0);
  for (std::size_t i = 0; i < x.c_.size(); ++i) {
    if (x.c_[i] == 0) continue;
    for (std::size_t j = 0; j < y.c_.size(); ++j)
      if (y.c_[j] != 0) v[i + j] += x.c_[i] * y.c_[j];
  }
  CyclotomicNum r;
  r.M_ = M;
  r.c_ = reduce(M, std::move(v));
  return r;
}

CyclotomicNum CyclotomicNum::operator*(const mpq_class& s) const {
  CyclotomicNum r = *this;
  for (auto& v : r.c_) v *= s;
  return r;
}

CyclotomicNum CyclotomicNum::conj() const {
  std::vector<mpq_class> v(M_, 0);
  for (std::size_t i = 0; i < c_.size(); ++i) v[(M_ - static_cast<long>(i)) % M_] += c_[i];
  CyclotomicNum r;
  r.M_ = M_;
  r.c_ = reduce(M_, std::move(v));
  return r;
}

bool CyclotomicNum::is_zero() const {
  for (const auto& v : c_)
    if (v != 0) return false;
  return true;
}

bool CyclotomicNum::is_rational() const {
  for (std::size_t i = 1; i < c_.size(); ++i)
    if (c_[i] != 0) return false;
  return true;
}

mpq_class CyclotomicNum::rational_value() const {
  if (!is_rational()) throw std::domain_error("cyclotomic number is not rational");
  return c_[0];
}

std::string CyclotomicNum::str() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] == 0) continue;
    if (!first) os << " + ";
    first = false;
    os << c_[i].get_str();
    if (i > 0) os << "*z" << M_ << "^" << i;
  }
  if (first) os << "0";
  return os.str();
}

// ---------------------------------------------------------------- WValue

WValue WValue::monomial(int e1, int e2, const CyclotomicNum& c) {
  WValue w;
  if (!c.is_zero()) w.terms.emplace(std::make_pair(e1, e2), c);
  return w;
}

WValue WValue::operator+(const WValue& o) const {
  WValue r = *this;
  for (const auto& [k, v] : o.terms) {
    auto it = r.terms.find(k);
    if (it == r.terms.end()) {
      r.terms.emplace(k, v);
    } else {
      it->second = it->second + v;
      if (it->second.is_zero()) r.terms.erase(it);
    }
  }
  return r;
}

WValue WValue::operator-(const WValue& o) const {
  WValue n;
  for (const auto& [k, v] : o.terms) n.terms.emplace(k, -v);
  return *this + n;
}

WValue WValue::operator*(const WValue& o) const {
  WValue r;
  for (const auto& [k1, v1] : terms)
    for (const auto& [k2, v2] : o.terms)
      r = r + monomial(k1.first + k2.first, k1.second + k2.second, v1 * v2);
  return r;
}

bool WValue::is_zero() const {
  for (const auto& [k, v] : terms)
    if (!v.is_zero()) return false;
  return true;
}

WValue WValue::inverse() const {
  if (terms.size() != 1) throw std::domain_error("only single-monomial values are inverted");
  const auto& [k, y] = *terms.begin();
  CyclotomicNum n = y * y.conj();
  if (!n.is_rational() || n.rational_value() == 0)
    throw std::domain_error("coefficient norm is not a nonzero rational");
  return monomial(-k.first, -k.second, y.conj() * (1 / n.rational_value()));
}

bool WValue::is_rational() const {
  if (terms.empty()) return true;
  return terms.size() == 1 && terms.begin()->first == std::make_pair(0, 0) && terms.begin()->second.is_rational();
}

mpq_class WValue::rational_value() const {
  if (terms.empty()) return 0;
  if (!is_rational()) throw std::domain_error("value is not a rational constant: " + str());
  return terms.begin()->second.rational_value();
}

std::string WValue::str() const {
  if (terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : terms) {
    if (!first) os << " + ";
    first = false;
    os << "(" << v.str() << ")";
    if (k.first) os << "*a1^" << k.first;
    if (k.second) os << "*a2^" << k.second;
  }
  return os.str();
}

}  // namespace lzeta::wz
