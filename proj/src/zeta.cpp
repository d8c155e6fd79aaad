#include <climits>
#include <sstream>

#include "lzeta/symbolic.hpp"
#include "lzeta/whittaker.hpp"

namespace lzeta::wz {

namespace {

int floor_div2(int a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }

int valuation_in_o(const mpq_class& z, long p) {
  if (z.get_den() != 1 && sym::rational_valuation(z, p) < 0)
    throw std::invalid_argument("A(z) needs z in o, got " + z.get_str());
  return sym::rational_valuation(z, p);
}

ZKey c_key(int l, int m) { return ZKey{l, m, 2 * m + l, 2 * m + l, m + l}; }

mpq_class volume(long q, int legendre, int n, int l, int m, DoubleCosetRep rep, int j) {
  return double_coset_volume_formula(q, legendre, n, l, m, rep, j).value;
}

}  // namespace

GL2 WArg::matrix(long p) const {
  if (kind == Antidiag) return gl2_antidiag(p, l);
  return gl2_diag(p, l) * gl2_lower(z);
}

std::string to_string(const ZetaValue& z) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, c] : z) {
    if (c == 0) continue;
    if (!first) os << " + ";
    first = false;
    os << c.get_str();
    if (k.bl || k.bm) os << "*B" << k.bl << "," << k.bm;
    if (k.qs) os << "*Qs^" << k.qs;
    if (k.x) os << "*X^" << k.x;
    if (k.y) os << "*Y^" << k.y;
  }
  if (first) os << "0";
  return os.str();
}

const char* to_string(TermKind k) {
  switch (k) {
    case TermKind::Kirillov: return "kirillov";
    case TermKind::LemmaSum: return "lemma-sum";
    case TermKind::LemmaPoint: return "lemma-point";
    case TermKind::AtkinLehner: return "atkin-lehner";
  }
  return "?";
}

WSharpFactor w_sharp_factor(long p, int n, int l, int m, DoubleCosetRep rep, const mpq_class& z) {
  if (n < 1 || l < 0 || m < 0) throw std::invalid_argument("w_sharp_factor needs n >= 1 and l, m >= 0");
  WSharpFactor f;
  f.key = c_key(l, m);
  if (rep == DoubleCosetRep::s1s2s1) {
    if (m < n) throw std::invalid_argument("s1s2s1 is outside the support for m < n");
    f.slot = WArg{WArg::Antidiag, l, 0};
    return f;
  }
  int v = std::min(valuation_in_o(z, p), n - 1);
  const int lo = std::max(n - m - 1, 0);
  const int t = std::max(lo, floor_div2(n - 1));
  bool generic = v >= t;
  bool point = v >= lo && v <= floor_div2(n - 3);
  if (!generic && !point)
    throw std::invalid_argument("A(z) with v(z) = " + std::to_string(v) + " is outside the support at (n,m) = (" +
                                std::to_string(n) + "," + std::to_string(m) + ")");
  f.slot = WArg{WArg::DiagLower, l, mpq_class(p) * z};
  return f;
}

std::vector<ZetaTerm> zeta_terms(long q, int legendre, int n, int lmax, int mmax) {
  if (n < 2) throw std::invalid_argument("the zeta assembly needs n >= 2");
  std::vector<ZetaTerm> out;
  for (int l = 0; l <= lmax; ++l)
    for (int m = 0; m <= mmax; ++m) {
      if (m == 0) {
        ZetaTerm t{l, 0, n - 1, TermKind::Kirillov, c_key(l, 0), {}, volume(q, legendre, n, l, 0, DoubleCosetRep::A_z, n - 1)};
        t.args.push_back(w_sharp_factor(q, n, l, 0, DoubleCosetRep::A_z, 0).slot);
        out.push_back(std::move(t));
        continue;
      }
      const int lo = std::max(n - m - 1, 0);
      const int tt = std::max(lo, floor_div2(n - 1));
      ZetaTerm s{l, m, n - 1, TermKind::LemmaSum, c_key(l, m), {}, volume(q, legendre, n, l, m, DoubleCosetRep::A_z, n - 1)};
      const mpq_class step = ppow(q, tt);
      long count = 1;
      for (int i = tt; i < n - 1; ++i) count *= q;
      for (long i = 0; i < count; ++i)
        s.args.push_back(w_sharp_factor(q, n, l, m, DoubleCosetRep::A_z, step * i).slot);
      out.push_back(std::move(s));
      for (int j = lo; j <= floor_div2(n - 3); ++j) {
        ZetaTerm pt{l, m, j, TermKind::LemmaPoint, c_key(l, m), {}, volume(q, legendre, n, l, m, DoubleCosetRep::A_z, j)};
        long units = 1;
        for (int i = 0; i <= j; ++i) units *= q;
        for (long u = 1; u < units; ++u) {
          if (u % q == 0) continue;
          pt.args.push_back(w_sharp_factor(q, n, l, m, DoubleCosetRep::A_z, ppow(q, j) * u).slot);
        }
        out.push_back(std::move(pt));
      }
      if (m >= n) {
        ZetaTerm a{l, m, -1, TermKind::AtkinLehner, c_key(l, m), {}, volume(q, legendre, n, l, m, DoubleCosetRep::s1s2s1, 0)};
        a.args.push_back(w_sharp_factor(q, n, l, m, DoubleCosetRep::s1s2s1).slot);
        out.push_back(std::move(a));
      }
    }
  return out;
}

ZetaAssembly assemble_zeta(long q, int legendre, int n, ZetaMode mode, const NewformModel* model, int lmax, int mmax) {
  if (mode == ZetaMode::model) {
    if (model == nullptr) throw std::invalid_argument("model mode needs a newform model");
    if (model->n() != n || model->q() != q)
      throw std::invalid_argument("the newform model is built for (q,n) = (" + std::to_string(model->q()) + "," +
                                  std::to_string(model->n()) + ")");
  }
  ZetaAssembly out;
  for (const ZetaTerm& t : zeta_terms(q, legendre, n, lmax, mmax)) {
    mpq_class w = 0;
    std::string rule;
    if (mode == ZetaMode::abstract) {
      switch (t.kind) {
        case TermKind::Kirillov:
          w = t.l == 0 ? 1 : 0;
          rule = "kirillov support";
          break;
        case TermKind::LemmaSum: rule = "vanishing lemma (i)"; break;
        case TermKind::LemmaPoint: rule = "vanishing lemma (ii)"; break;
        case TermKind::AtkinLehner: rule = "atkin-lehner + kirillov support"; break;
      }
    } else {
      WValue sum;
      for (const WArg& a : t.args) sum = sum + model->value(a.matrix(q));
      if (!sum.is_rational()) {
        std::ostringstream os;
        os << "term " << to_string(t.kind) << " (l,m,j)=(" << t.l << "," << t.m << "," << t.j
           << ") has a non-constant W sum " << sum.str();
        throw std::runtime_error(os.str());
      }
      w = sum.rational_value();
      rule = "model, " + std::to_string(t.args.size()) + " values";
    }
    std::ostringstream os;
    os << to_string(t.kind) << " l=" << t.l << " m=" << t.m;
    if (t.kind == TermKind::LemmaPoint) os << " j=" << t.j;
    os << ": W = " << w.get_str() << " (" << rule << "), volume " << t.volume.get_str();
    out.notes.push_back(os.str());
    if (w == 0) continue;
    mpq_class& slot = out.value[t.key];
    slot += w * t.volume;
    if (slot == 0) out.value.erase(t.key);
  }
  return out;
}

mpq_class zeta_formula(long q, int legendre, int n) {
  return vol_K_sharp_formula(q, n).value * (1 - mpq_class(legendre, q)) * qpow(q, n);
}

}  // namespace lzeta::wz
