#include "dbx/converse.hpp"

#include <algorithm>
#include <cmath>

namespace dbx {

namespace {

double pow_d(int base, int e) { return std::pow(static_cast<double>(base), e); }

double enumeration_term_count(int n, int k_size, int l_size, int X, int Y, int Z) {
  return static_cast<double>(k_size) * l_size * pow_d(X, n) * pow_d(Y, n) * pow_d(Z, n);
}

}  // namespace

void check_enumeration_budget(const BlockCode& code, const DegradedPair& ch,
                              double budget) {
  const double terms = enumeration_term_count(code.n, code.k_size, code.l_size,
                                              ch.x_size(), ch.y_size(), ch.z_size());
  if (terms > budget)
    throw BudgetError("enumeration needs about " + fmt17(terms) +
                      " terms, budget is " + fmt17(budget));
}

ValidationReport validate_code(const BlockCode& code, const DegradedPair& ch) {
  ValidationReport rep;
  if (code.n <= 0 || code.k_size <= 0 || code.l_size <= 0)
    rep.issues.push_back({"non-positive code dimensions", -1, 0.0});
  if (code.x_size != ch.x_size())
    rep.issues.push_back({"input alphabet mismatch with channel", -1,
                          static_cast<double>(code.x_size)});
  const long xn = ipow(code.x_size, code.n);
  if (code.encoder.input_size() != code.k_size * code.l_size ||
      code.encoder.output_size() != xn)
    rep.issues.push_back({"encoder shape mismatch", -1,
                          static_cast<double>(code.encoder.input_size())});
  ValidationReport enc = validate_kernel(code.encoder.rows());
  for (auto& i : enc.issues) rep.issues.push_back(i);
  if (static_cast<long>(code.dec1.size()) != ipow(ch.y_size(), code.n))
    rep.issues.push_back({"dec1 domain size", -1, static_cast<double>(code.dec1.size())});
  if (static_cast<long>(code.dec2.size()) != ipow(ch.z_size(), code.n))
    rep.issues.push_back({"dec2 domain size", -1, static_cast<double>(code.dec2.size())});
  for (int v : code.dec1)
    if (v < 0 || v >= code.k_size) {
      rep.issues.push_back({"dec1 range", v, 0.0});
      break;
    }
  for (int v : code.dec2)
    if (v < 0 || v >= code.l_size) {
      rep.issues.push_back({"dec2 range", v, 0.0});
      break;
    }
  return rep;
}

CodeStats exact_probabilities(const BlockCode& code, const DegradedPair& ch) {
  check_enumeration_budget(code, ch);
  const int n = code.n, K = code.k_size, L = code.l_size;
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  const long Xn = ipow(X, n), Yn = ipow(Y, n), Zn = ipow(Z, n);
  const auto& w1 = ch.w1();
  const auto& w2 = ch.w2();
  std::vector<int> xs(n), ys(n), zs(n);
  Kahan pe, pe1, pe2;
  const double msg_w = 1.0 / (static_cast<double>(K) * L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) {
      const Vec& row = code.encoder.row(k * L + l);
      for (long xi = 0; xi < Xn; ++xi) {
        const double px = row[xi] * msg_w;
        if (px == 0.0) continue;
        decode_seq(xi, X, n, xs.data());
        for (long yi = 0; yi < Yn; ++yi) {
          decode_seq(yi, Y, n, ys.data());
          double py = px;
          for (int t = 0; t < n && py != 0.0; ++t) py *= w1(xs[t], ys[t]);
          if (py == 0.0) continue;
          const bool err1 = code.dec1[yi] != k;
          for (long zi = 0; zi < Zn; ++zi) {
            decode_seq(zi, Z, n, zs.data());
            double pz = py;
            for (int t = 0; t < n && pz != 0.0; ++t) pz *= w2(ys[t], zs[t]);
            if (pz == 0.0) continue;
            const bool err2 = code.dec2[zi] != l;
            if (err1) pe1.add(pz);
            if (err2) pe2.add(pz);
            if (err1 || err2) pe.add(pz);
          }
        }
      }
    }
  CodeStats s;
  s.pe = pe.value();
  s.pe1 = pe1.value();
  s.pe2 = pe2.value();
  s.pc = 1.0 - s.pe;
  return s;
}

CodeLaw code_law(const BlockCode& code, const DegradedPair& ch) {
  CodeLaw law;
  law.n = code.n;
  law.k_size = code.k_size;
  law.l_size = code.l_size;
  law.x_size = ch.x_size();
  law.y_size = ch.y_size();
  law.z_size = ch.z_size();
  const int n = code.n, K = code.k_size, L = code.l_size, X = law.x_size, Z = law.z_size;
  const long Xn = ipow(X, n);
  law.p_lx.assign(static_cast<size_t>(L) * Xn, 0.0);
  const double msg_w = 1.0 / (static_cast<double>(K) * L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) {
      const Vec& row = code.encoder.row(k * L + l);
      for (long xi = 0; xi < Xn; ++xi)
        law.p_lx[static_cast<size_t>(l) * Xn + xi] += msg_w * row[xi];
    }

  // P(l, x^{<=t}) by summing suffixes from t = n down.
  law.x_prefix.resize(n + 1);
  law.x_prefix[n] = law.p_lx;
  for (int t = n - 1; t >= 0; --t) {
    const long Xt = ipow(X, t);
    law.x_prefix[t].assign(static_cast<size_t>(L) * Xt, 0.0);
    for (int l = 0; l < L; ++l)
      for (long p = 0; p < Xt; ++p) {
        double s = 0.0;
        for (int x = 0; x < X; ++x)
          s += law.x_prefix[t + 1][static_cast<size_t>(l) * Xt * X + p * X + x];
        law.x_prefix[t][static_cast<size_t>(l) * Xt + p] = s;
      }
  }

  // P(l, z^{<=t}) through the cascade kernel, one prefix length at a time.
  const StochasticMatrix wc = compose(ch.w1(), ch.w2());
  law.z_prefix.resize(n + 1);
  std::vector<int> xd(n), zd(n);
  for (int t = 0; t <= n; ++t) {
    const long Xt = ipow(X, t), Zt = ipow(Z, t);
    law.z_prefix[t].assign(static_cast<size_t>(L) * Zt, 0.0);
    for (int l = 0; l < L; ++l)
      for (long xp = 0; xp < Xt; ++xp) {
        const double m = law.x_prefix[t][static_cast<size_t>(l) * Xt + xp];
        if (m == 0.0) continue;
        decode_seq(xp, X, t, xd.data());
        for (long zp = 0; zp < Zt; ++zp) {
          decode_seq(zp, Z, t, zd.data());
          double w = m;
          for (int i = 0; i < t && w != 0.0; ++i) w *= wc(xd[i], zd[i]);
          if (w != 0.0) law.z_prefix[t][static_cast<size_t>(l) * Zt + zp] += w;
        }
      }
  }
  return law;
}

double x_next_prob(const CodeLaw& law, int t, int l, long x_prefix, int x) {
  const long Xt = ipow(law.x_size, t);
  const double den = law.x_prefix[t][static_cast<size_t>(l) * Xt + x_prefix];
  if (den <= 0.0) return 0.0;
  const double num =
      law.x_prefix[t + 1][(static_cast<size_t>(l) * Xt + x_prefix) * law.x_size + x];
  return num / den;
}

double z_next_prob(const CodeLaw& law, int t, int l, long z_prefix, int z) {
  const long Zt = ipow(law.z_size, t);
  const double den = law.z_prefix[t][static_cast<size_t>(l) * Zt + z_prefix];
  if (den <= 0.0) return 0.0;
  const double num =
      law.z_prefix[t + 1][(static_cast<size_t>(l) * Zt + z_prefix) * law.z_size + z];
  return num / den;
}

namespace {

void require_rate_conditions(const BlockCode& code, const RatePair& rates) {
  const double r1_code = std::log(static_cast<double>(code.k_size)) / code.n;
  const double r2_code = std::log(static_cast<double>(code.l_size)) / code.n;
  if (r1_code < rates.r1 - 1e-12 || r2_code < rates.r2 - 1e-12)
    throw std::invalid_argument("code rates below the rates under test");
}

}  // namespace

CheckResult correct_prob_event_bound(const BlockCode& code, const DegradedPair& ch,
                                     const RatePair& rates, double eta,
                                     const Mat& q_yz_given_l, const Vec& qz_tilde) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  require_rate_conditions(code, rates);
  check_enumeration_budget(code, ch);
  const int n = code.n, L = code.l_size;
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  const long Xn = ipow(X, n), Yn = ipow(Y, n), Zn = ipow(Z, n);
  if (static_cast<int>(q_yz_given_l.size()) != L)
    throw std::invalid_argument("q_yz_given_l needs one row per l");
  for (const auto& row : q_yz_given_l)
    if (static_cast<long>(row.size()) != Yn * Zn)
      throw std::invalid_argument("q_yz_given_l row over Y^n x Z^n expected");
  if (static_cast<long>(qz_tilde.size()) != Zn)
    throw std::invalid_argument("qz_tilde over Z^n expected");

  CodeLaw law = code_law(code, ch);
  const auto& w1 = ch.w1();
  const auto& w2 = ch.w2();
  std::vector<int> xs(n), ys(n), zs(n);
  Kahan event;
  for (int l = 0; l < L; ++l)
    for (long xi = 0; xi < Xn; ++xi) {
      const double px = law.p_lx[static_cast<size_t>(l) * Xn + xi];
      if (px == 0.0) continue;
      decode_seq(xi, X, n, xs.data());
      for (long yi = 0; yi < Yn; ++yi) {
        decode_seq(yi, Y, n, ys.data());
        double wy = 1.0;
        for (int t = 0; t < n && wy != 0.0; ++t) wy *= w1(xs[t], ys[t]);
        if (wy == 0.0) continue;
        for (long zi = 0; zi < Zn; ++zi) {
          decode_seq(zi, Z, n, zs.data());
          double wz = 1.0;
          for (int t = 0; t < n && wz != 0.0; ++t) wz *= w2(ys[t], zs[t]);
          const double mass = px * wy * wz;
          if (mass == 0.0) continue;
          // first threshold: channel likelihood vs q_{Y^n Z^n | L}
          const double q1 = q_yz_given_l[l][static_cast<size_t>(yi) * Zn + zi];
          bool cond1;
          if (q1 <= 0.0) {
            cond1 = true;  // ratio is +inf
          } else {
            cond1 = rates.r1 <= (std::log(wy * wz) - std::log(q1)) / n + eta + 1e-15;
          }
          if (!cond1) continue;
          // second threshold: code-induced P(z^n | l) vs the reference law
          const double pzl = law.z_prefix[n][static_cast<size_t>(l) * Zn + zi] * L;
          const double q2 = qz_tilde[zi];
          bool cond2;
          if (q2 <= 0.0) {
            cond2 = true;
          } else {
            cond2 = rates.r2 <= (std::log(pzl) - std::log(q2)) / n + eta + 1e-15;
          }
          if (cond2) event.add(mass);
        }
      }
    }
  CheckResult res;
  res.lhs = exact_probabilities(code, ch).pc;
  res.rhs = event.value() + 2.0 * std::exp(-static_cast<double>(n) * eta);
  res.margin = res.rhs - res.lhs;
  res.holds = res.lhs <= res.rhs + 1e-12;
  return res;
}

SlackBreakdown threshold_slack_breakdown(const BlockCode& code, const DegradedPair& ch,
                                         double eta, const Mat& q_yz_given_l,
                                         const Vec& qz_tilde) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  check_enumeration_budget(code, ch);
  const int n = code.n, K = code.k_size, L = code.l_size;
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  const long Xn = ipow(X, n), Yn = ipow(Y, n), Zn = ipow(Z, n);
  CodeLaw law = code_law(code, ch);
  const auto& w1 = ch.w1();
  const auto& w2 = ch.w2();
  const double cap = std::exp(-static_cast<double>(n) * eta);
  std::vector<int> xs(n), ys(n), zs(n);
  Kahan d0, d1, d2, pc;
  const double msg_w = 1.0 / (static_cast<double>(K) * L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) {
      const Vec& row = code.encoder.row(k * L + l);
      for (long xi = 0; xi < Xn; ++xi) {
        const double px = row[xi] * msg_w;
        if (px == 0.0) continue;
        decode_seq(xi, X, n, xs.data());
        for (long yi = 0; yi < Yn; ++yi) {
          decode_seq(yi, Y, n, ys.data());
          double wy = 1.0;
          for (int t = 0; t < n && wy != 0.0; ++t) wy *= w1(xs[t], ys[t]);
          if (wy == 0.0) continue;
          const bool ok1 = code.dec1[yi] == k;
          for (long zi = 0; zi < Zn; ++zi) {
            decode_seq(zi, Z, n, zs.data());
            double wz = 1.0;
            for (int t = 0; t < n && wz != 0.0; ++t) wz *= w2(ys[t], zs[t]);
            const double mass = px * wy * wz;
            if (mass == 0.0) continue;
            const bool ok2 = code.dec2[zi] == l;
            if (ok1 && ok2) pc.add(mass);
            const double q1 = q_yz_given_l[l][static_cast<size_t>(yi) * Zn + zi];
            const double pzl = law.z_prefix[n][static_cast<size_t>(l) * Zn + zi] * L;
            const double q2 = qz_tilde[zi];
            const bool in_a1 = wy * wz >= K * cap * q1;
            const bool in_a2 = pzl >= L * cap * q2;
            if (in_a1 && in_a2) d0.add(mass);
            if (!in_a1 && ok1 && ok2) d1.add(mass);
            if (!in_a2 && ok1 && ok2) d2.add(mass);
          }
        }
      }
    }
  SlackBreakdown out;
  out.delta0 = d0.value();
  out.delta1 = d1.value();
  out.delta2 = d2.value();
  out.per_term_cap = cap;
  const double pc_v = pc.value();
  const double m1 = cap - out.delta1;
  const double m2 = cap - out.delta2;
  const double m3 = out.delta0 + out.delta1 + out.delta2 - pc_v;
  out.margin = std::min({m1, m2, m3});
  out.holds = out.margin >= -1e-12;
  return out;
}

long NLetterTestDist::u_count(int t) const {
  return static_cast<long>(l_size) * ipow(y_size, t) * ipow(z_size, t);
}

long NLetterTestDist::u_index(int t, int l, long y_prefix, long z_prefix) const {
  const long yp = ipow(y_size, t), zp = ipow(z_size, t);
  return (static_cast<long>(l) * yp + y_prefix) * zp + z_prefix;
}

long NLetterTestDist::v_index(int t, int l, long z_prefix) const {
  return static_cast<long>(l) * ipow(z_size, t) + z_prefix;
}

ValidationReport NLetterTestDist::validate() const {
  ValidationReport rep;
  if (static_cast<int>(steps.size()) != n) {
    rep.issues.push_back({"wrong number of steps", -1, static_cast<double>(steps.size())});
    return rep;
  }
  for (int t = 0; t < n; ++t) {
    const long want = u_count(t) * x_size * y_size * z_size;
    if (static_cast<long>(steps[t].size()) != want) {
      rep.issues.push_back({"step " + std::to_string(t) + " size", t,
                            static_cast<double>(steps[t].size())});
      continue;
    }
    ValidationReport r = validate_distribution(steps[t], 1e-8);
    for (auto& i : r.issues) {
      i.what = "step " + std::to_string(t) + ": " + i.what;
      rep.issues.push_back(i);
    }
  }
  return rep;
}

NLetterTestDist NLetterTestDist::random(int n, int l_size, const DegradedPair& ch,
                                        Rng& rng) {
  NLetterTestDist q;
  q.n = n;
  q.l_size = l_size;
  q.x_size = ch.x_size();
  q.y_size = ch.y_size();
  q.z_size = ch.z_size();
  q.steps.resize(n);
  for (int t = 0; t < n; ++t) {
    const long sz = q.u_count(t) * q.x_size * q.y_size * q.z_size;
    q.steps[t] = rng.dirichlet(static_cast<int>(sz));
  }
  return q;
}

NLetterTestDist NLetterTestDist::degenerate(int n, int l_size, const DegradedPair& ch,
                                            double floor_eps) {
  NLetterTestDist q;
  q.n = n;
  q.l_size = l_size;
  q.x_size = ch.x_size();
  q.y_size = ch.y_size();
  q.z_size = ch.z_size();
  q.steps.resize(n);
  for (int t = 0; t < n; ++t) {
    const long sz = q.u_count(t) * q.x_size * q.y_size * q.z_size;
    Vec v(sz, floor_eps);
    v[0] = 1.0;
    double s = 0.0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
    q.steps[t] = std::move(v);
  }
  return q;
}

TestDistTables induced_tables(const NLetterTestDist& qn) {
  TestDistTables tab;
  const int X = qn.x_size, Y = qn.y_size, Z = qn.z_size;
  tab.y_given_u.resize(qn.n);
  tab.u_mass.resize(qn.n);
  tab.z_marg.resize(qn.n);
  for (int t = 0; t < qn.n; ++t) {
    const long U = qn.u_count(t);
    tab.y_given_u[t].assign(U, Vec(Y, 0.0));
    tab.u_mass[t].assign(U, 0.0);
    tab.z_marg[t].assign(Z, 0.0);
    const Vec& q = qn.steps[t];
    for (long u = 0; u < U; ++u)
      for (int x = 0; x < X; ++x)
        for (int y = 0; y < Y; ++y)
          for (int z = 0; z < Z; ++z) {
            const double v = q[((u * X + x) * Y + y) * Z + z];
            tab.u_mass[t][u] += v;
            tab.y_given_u[t][u][y] += v;
            tab.z_marg[t][z] += v;
          }
    for (long u = 0; u < U; ++u)
      if (tab.u_mass[t][u] > 0.0)
        for (int y = 0; y < Y; ++y) tab.y_given_u[t][u][y] /= tab.u_mass[t][u];
  }
  return tab;
}

NLetterTestDist induced_test_dist(const BlockCode& code, const DegradedPair& ch) {
  check_enumeration_budget(code, ch);
  const int n = code.n, L = code.l_size;
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  const long Xn = ipow(X, n), Yn = ipow(Y, n), Zn = ipow(Z, n);
  CodeLaw law = code_law(code, ch);
  NLetterTestDist q;
  q.n = n;
  q.l_size = L;
  q.x_size = X;
  q.y_size = Y;
  q.z_size = Z;
  q.steps.resize(n);
  for (int t = 0; t < n; ++t)
    q.steps[t].assign(q.u_count(t) * X * Y * Z, 0.0);
  const auto& w1 = ch.w1();
  const auto& w2 = ch.w2();
  std::vector<int> xs(n), ys(n), zs(n);
  for (int l = 0; l < L; ++l)
    for (long xi = 0; xi < Xn; ++xi) {
      const double px = law.p_lx[static_cast<size_t>(l) * Xn + xi];
      if (px == 0.0) continue;
      decode_seq(xi, X, n, xs.data());
      for (long yi = 0; yi < Yn; ++yi) {
        decode_seq(yi, Y, n, ys.data());
        double wy = 1.0;
        for (int t = 0; t < n && wy != 0.0; ++t) wy *= w1(xs[t], ys[t]);
        if (wy == 0.0) continue;
        for (long zi = 0; zi < Zn; ++zi) {
          decode_seq(zi, Z, n, zs.data());
          double wz = 1.0;
          for (int t = 0; t < n && wz != 0.0; ++t) wz *= w2(ys[t], zs[t]);
          const double mass = px * wy * wz;
          if (mass == 0.0) continue;
          long ypre = 0, zpre = 0;
          for (int t = 0; t < n; ++t) {
            const long u = q.u_index(t, l, ypre, zpre);
            q.steps[t][((u * X + xs[t]) * Y + ys[t]) * Z + zs[t]] += mass;
            ypre = ypre * Y + ys[t];
            zpre = zpre * Z + zs[t];
          }
        }
      }
    }
  return q;
}

CheckResult per_letter_event_bound(const BlockCode& code, const DegradedPair& ch,
                                   const RatePair& rates, double eta,
                                   const NLetterTestDist& qn) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  require_rate_conditions(code, rates);
  check_enumeration_budget(code, ch);
  const int n = code.n, L = code.l_size;
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  const long Xn = ipow(X, n), Yn = ipow(Y, n), Zn = ipow(Z, n);
  if (qn.n != n || qn.l_size != L || qn.x_size != X || qn.y_size != Y || qn.z_size != Z)
    throw std::invalid_argument("test distribution shape mismatch");
  CodeLaw law = code_law(code, ch);
  TestDistTables tab = induced_tables(qn);
  const auto& w1 = ch.w1();
  const auto& w2 = ch.w2();
  std::vector<int> xs(n), ys(n), zs(n);
  Kahan event;
  for (int l = 0; l < L; ++l)
    for (long xi = 0; xi < Xn; ++xi) {
      const double px = law.p_lx[static_cast<size_t>(l) * Xn + xi];
      if (px == 0.0) continue;
      decode_seq(xi, X, n, xs.data());
      for (long yi = 0; yi < Yn; ++yi) {
        decode_seq(yi, Y, n, ys.data());
        double wy = 1.0;
        for (int t = 0; t < n && wy != 0.0; ++t) wy *= w1(xs[t], ys[t]);
        if (wy == 0.0) continue;
        for (long zi = 0; zi < Zn; ++zi) {
          decode_seq(zi, Z, n, zs.data());
          double wz = 1.0;
          for (int t = 0; t < n && wz != 0.0; ++t) wz *= w2(ys[t], zs[t]);
          const double mass = px * wy * wz;
          if (mass == 0.0) continue;
          double s1 = 0.0, s2 = 0.0;
          bool s1_inf = false, s2_inf = false;
          long ypre = 0, zpre = 0;
          for (int t = 0; t < n; ++t) {
            const long u = qn.u_index(t, l, ypre, zpre);
            const double qyu =
                tab.u_mass[t][u] > 0.0 ? tab.y_given_u[t][u][ys[t]] : 0.0;
            if (qyu <= 0.0)
              s1_inf = true;
            else
              s1 += std::log(w1(xs[t], ys[t]) / qyu);
            const double pzv = z_next_prob(law, t, l, zpre, zs[t]);
            const double qz = tab.z_marg[t][zs[t]];
            if (qz <= 0.0)
              s2_inf = true;
            else
              s2 += std::log(pzv / qz);
            ypre = ypre * Y + ys[t];
            zpre = zpre * Z + zs[t];
          }
          const bool cond1 = s1_inf || rates.r1 <= s1 / n + eta + 1e-15;
          const bool cond2 = s2_inf || rates.r2 <= s2 / n + eta + 1e-15;
          if (cond1 && cond2) event.add(mass);
        }
      }
    }
  CheckResult res;
  res.lhs = exact_probabilities(code, ch).pc;
  res.rhs = event.value() + 2.0 * std::exp(-static_cast<double>(n) * eta);
  res.margin = res.rhs - res.lhs;
  res.holds = res.lhs <= res.rhs + 1e-12;
  return res;
}

double chernoff_bound(const std::vector<std::pair<double, double>>& law, double a,
                      double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("tilt must be positive");
  StreamingLse lse;
  for (const auto& [value, prob] : law)
    if (prob > 0.0) lse.add(std::log(prob) + theta * value);
  return std::exp(-(theta * a - lse.value()));
}

double code_cumulant(const BlockCode& code, const DegradedPair& ch, double mu,
                     double theta, const NLetterTestDist& qn) {
  if (!(mu > 0.0) || !(theta > 0.0))
    throw std::invalid_argument("cumulant needs mu > 0 and theta > 0");
  check_enumeration_budget(code, ch);
  const int n = code.n, L = code.l_size;
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  const long Xn = ipow(X, n), Yn = ipow(Y, n), Zn = ipow(Z, n);
  CodeLaw law = code_law(code, ch);
  TestDistTables tab = induced_tables(qn);
  const auto& w1 = ch.w1();
  const auto& w2 = ch.w2();
  std::vector<int> xs(n), ys(n), zs(n);
  StreamingLse lse;
  for (int l = 0; l < L; ++l)
    for (long xi = 0; xi < Xn; ++xi) {
      const double px = law.p_lx[static_cast<size_t>(l) * Xn + xi];
      if (px == 0.0) continue;
      decode_seq(xi, X, n, xs.data());
      for (long yi = 0; yi < Yn; ++yi) {
        decode_seq(yi, Y, n, ys.data());
        double wy = 1.0;
        for (int t = 0; t < n && wy != 0.0; ++t) wy *= w1(xs[t], ys[t]);
        if (wy == 0.0) continue;
        for (long zi = 0; zi < Zn; ++zi) {
          decode_seq(zi, Z, n, zs.data());
          double wz = 1.0;
          for (int t = 0; t < n && wz != 0.0; ++t) wz *= w2(ys[t], zs[t]);
          const double mass = px * wy * wz;
          if (mass == 0.0) continue;
          double weight = 0.0;
          long ypre = 0, zpre = 0;
          for (int t = 0; t < n; ++t) {
            const long u = qn.u_index(t, l, ypre, zpre);
            const double qyu =
                tab.u_mass[t][u] > 0.0 ? tab.y_given_u[t][u][ys[t]] : 0.0;
            const double pzv = z_next_prob(law, t, l, zpre, zs[t]);
            const double qz = tab.z_marg[t][zs[t]];
            if (qyu <= 0.0 || qz <= 0.0) return kInf;
            weight += theta * mu * (std::log(w1(xs[t], ys[t])) - std::log(qyu));
            weight += theta * (std::log(pzv) - std::log(qz));
            ypre = ypre * Y + ys[t];
            zpre = zpre * Z + zs[t];
          }
          lse.add(std::log(mass) + weight);
        }
      }
    }
  return lse.value();
}

CorrectProbBound correct_prob_exponent_bound(const BlockCode& code, const DegradedPair& ch,
                                             const RatePair& rates, double mu, double theta,
                                             const NLetterTestDist& qn) {
  require_rate_conditions(code, rates);
  CorrectProbBound out;
  const double omega = code_cumulant(code, ch, mu, theta, qn);
  out.cumulant = omega / code.n;
  out.eta = (theta * (mu * rates.r1 + rates.r2) - out.cumulant) / (1.0 + theta + theta * mu);
  out.bound = omega == kInf ? kInf : 3.0 * std::exp(-code.n * out.eta);
  out.pc = exact_probabilities(code, ch).pc;
  out.holds = out.pc <= out.bound + 1e-12;
  out.margin = out.bound - out.pc;
  return out;
}

namespace {

// Per-step weighting factor f_t(x,y,z|u_t) for an explicit test step; the
// decomposition of u_t into (l, y-prefix, z-prefix) is passed in. Throws if
// a reference probability vanishes where the caller has live mass.
struct StepFactor {
  const NLetterTestDist* qn;
  const TestDistTables* tab;
  const CodeLaw* law;
  const StochasticMatrix* w1;
  double mu, theta;

  double operator()(int t, int l, long ypre, long zpre, int x, int y, int z) const {
    const long u = qn->u_index(t, l, ypre, zpre);
    const double qyu = tab->u_mass[t][u] > 0.0 ? tab->y_given_u[t][u][y] : 0.0;
    const double qz = tab->z_marg[t][z];
    const double pzv = z_next_prob(*law, t, l, zpre, z);
    if (qyu <= 0.0 || qz <= 0.0 || pzv <= 0.0)
      throw std::domain_error("telescope: zero reference probability at live mass");
    return std::exp(theta * mu * (std::log((*w1)(x, y)) - std::log(qyu)) +
                    theta * (std::log(pzv) - std::log(qz)));
  }
};

}  // namespace

TelescopeTrace telescope(const BlockCode& code, const DegradedPair& ch, double mu,
                         double theta, const NLetterTestDist& qn) {
  if (!(mu > 0.0) || !(theta > 0.0) || !(theta < 1.0))
    throw std::invalid_argument("telescope needs mu > 0 and theta in (0,1)");
  check_enumeration_budget(code, ch);
  const int n = code.n, L = code.l_size;
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  CodeLaw law = code_law(code, ch);
  TestDistTables tab = induced_tables(qn);
  const auto& w1 = ch.w1();
  const auto& w2 = ch.w2();
  const StepFactor f{&qn, &tab, &law, &w1, mu, theta};

  TelescopeTrace trace;
  trace.n = n;
  trace.c_values.assign(n + 1, 1.0);
  trace.log_phi.assign(n, 0.0);

  // Recursive route: extend the tilted prefix distribution one letter at a
  // time; the normalizer ratio of each extension is Phi_t.
  Vec prev(L, 0.0);
  for (int l = 0; l < L; ++l) prev[l] = law.x_prefix[0][l];
  long Xt = 1, Yt = 1, Zt = 1;
  trace.tilted.resize(n + 1);
  std::vector<Vec>& tilted = trace.tilted;
  tilted[0] = prev;
  for (int t = 0; t < n; ++t) {
    const long Xt1 = Xt * X, Yt1 = Yt * Y, Zt1 = Zt * Z;
    Vec next(static_cast<size_t>(L) * Xt1 * Yt1 * Zt1, 0.0);
    Kahan phi_sum;
    for (int l = 0; l < L; ++l)
      for (long xp = 0; xp < Xt; ++xp)
        for (long yp = 0; yp < Yt; ++yp)
          for (long zp = 0; zp < Zt; ++zp) {
            const double m0 =
                prev[((static_cast<long>(l) * Xt + xp) * Yt + yp) * Zt + zp];
            if (m0 == 0.0) continue;
            for (int x = 0; x < X; ++x) {
              const double pn = x_next_prob(law, t, l, xp, x);
              if (pn == 0.0) continue;
              for (int y = 0; y < Y; ++y) {
                const double wy = w1(x, y);
                if (wy == 0.0) continue;
                for (int z = 0; z < Z; ++z) {
                  const double wz = w2(y, z);
                  if (wz == 0.0) continue;
                  const double val = m0 * pn * wy * wz * f(t, l, yp, zp, x, y, z);
                  phi_sum.add(val);
                  next[((static_cast<long>(l) * Xt1 + xp * X + x) * Yt1 + yp * Y + y) *
                           Zt1 +
                       zp * Z + z] += val;
                }
              }
            }
          }
    const double phi = phi_sum.value();
    if (!(phi > 0.0)) throw std::domain_error("telescope: vanishing normalizer");
    trace.log_phi[t] = std::log(phi);
    for (double& v : next) v /= phi;
    tilted[t + 1] = next;
    prev = tilted[t + 1];
    Xt = Xt1;
    Yt = Yt1;
    Zt = Zt1;
  }
  Kahan log_cn;
  for (int t = 0; t < n; ++t) log_cn.add(trace.log_phi[t]);
  trace.log_c_n = log_cn.value();

  double max_norm = 0.0;
  for (int t = 1; t <= n; ++t) {
    Kahan s;
    for (double v : tilted[t]) s.add(v);
    max_norm = std::max(max_norm, std::abs(s.value() - 1.0));
  }
  trace.max_norm_residual = max_norm;

  // Direct route: every C_t from the raw product definition; the normalized
  // products must match the recursive tilted distributions pointwise.
  std::vector<int> xd(n), yd(n), zd(n);
  double max_rec = 0.0;
  Xt = 1;
  Yt = 1;
  Zt = 1;
  for (int t = 1; t <= n; ++t) {
    Xt *= X;
    Yt *= Y;
    Zt *= Z;
    Vec raw(static_cast<size_t>(L) * Xt * Yt * Zt, 0.0);
    Kahan ct;
    for (int l = 0; l < L; ++l)
      for (long xp = 0; xp < Xt; ++xp) {
        const double mlx = law.x_prefix[t][static_cast<size_t>(l) * Xt + xp];
        if (mlx == 0.0) continue;
        decode_seq(xp, X, t, xd.data());
        for (long yp = 0; yp < Yt; ++yp) {
          decode_seq(yp, Y, t, yd.data());
          double wy = 1.0;
          for (int i = 0; i < t && wy != 0.0; ++i) wy *= w1(xd[i], yd[i]);
          if (wy == 0.0) continue;
          for (long zp = 0; zp < Zt; ++zp) {
            decode_seq(zp, Z, t, zd.data());
            double val = mlx * wy;
            long ypre = 0, zpre = 0;
            for (int i = 0; i < t && val != 0.0; ++i) {
              val *= w2(yd[i], zd[i]);
              if (val != 0.0) val *= f(i, l, ypre, zpre, xd[i], yd[i], zd[i]);
              ypre = ypre * Y + yd[i];
              zpre = zpre * Z + zd[i];
            }
            if (val != 0.0) {
              ct.add(val);
              raw[((static_cast<long>(l) * Xt + xp) * Yt + yp) * Zt + zp] = val;
            }
          }
        }
      }
    trace.c_values[t] = ct.value();
    for (size_t i = 0; i < raw.size(); ++i)
      max_rec = std::max(max_rec, std::abs(raw[i] / trace.c_values[t] - tilted[t][i]));
  }
  trace.max_recursion_residual = max_rec;
  return trace;
}

MatchedConstruction matched_test_dist(const BlockCode& code, const DegradedPair& ch,
                                      double mu, double theta) {
  if (!(mu > 0.0) || !(theta > 0.0) || !(theta < 1.0))
    throw std::invalid_argument("matched construction needs mu > 0, theta in (0,1)");
  check_enumeration_budget(code, ch);
  const int n = code.n, L = code.l_size;
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  CodeLaw law = code_law(code, ch);
  const auto& w1 = ch.w1();
  const auto& w2 = ch.w2();

  MatchedConstruction mc;
  mc.qn.n = n;
  mc.qn.l_size = L;
  mc.qn.x_size = X;
  mc.qn.y_size = Y;
  mc.qn.z_size = Z;
  mc.qn.steps.resize(n);
  mc.p_ux.resize(n);

  Vec prev(L, 0.0);
  for (int l = 0; l < L; ++l) prev[l] = law.x_prefix[0][l];
  long Xt = 1, Yt = 1, Zt = 1;
  for (int t = 0; t < n; ++t) {
    const long U = mc.qn.u_count(t);
    // tilted (U_t, X_t) mass
    Vec p_ux(static_cast<size_t>(U) * X, 0.0);
    for (int l = 0; l < L; ++l)
      for (long xp = 0; xp < Xt; ++xp)
        for (long yp = 0; yp < Yt; ++yp)
          for (long zp = 0; zp < Zt; ++zp) {
            const double m0 =
                prev[((static_cast<long>(l) * Xt + xp) * Yt + yp) * Zt + zp];
            if (m0 == 0.0) continue;
            const long u = mc.qn.u_index(t, l, yp, zp);
            for (int x = 0; x < X; ++x) {
              const double pn = x_next_prob(law, t, l, xp, x);
              if (pn != 0.0) p_ux[u * X + x] += m0 * pn;
            }
          }
    mc.p_ux[t] = p_ux;
    // the matched step: q_t = p_ux (x) W1 (x) W2
    Vec& step = mc.qn.steps[t];
    step.assign(static_cast<size_t>(U) * X * Y * Z, 0.0);
    Vec u_mass(U, 0.0);
    Mat qyu(U, Vec(Y, 0.0));
    Vec qz(Z, 0.0);
    for (long u = 0; u < U; ++u)
      for (int x = 0; x < X; ++x) {
        const double w = p_ux[u * X + x];
        if (w == 0.0) continue;
        u_mass[u] += w;
        for (int y = 0; y < Y; ++y) {
          const double wy = w1(x, y);
          if (wy == 0.0) continue;
          qyu[u][y] += w * wy;
          for (int z = 0; z < Z; ++z) {
            const double v = w * wy * w2(y, z);
            step[((u * X + x) * Y + y) * Z + z] = v + step[((u * X + x) * Y + y) * Z + z];
            qz[z] += v;
          }
        }
      }
    for (long u = 0; u < U; ++u)
      if (u_mass[u] > 0.0)
        for (int y = 0; y < Y; ++y) qyu[u][y] /= u_mass[u];

    // extend the tilted prefix with the matched weighting factor
    const long Xt1 = Xt * X, Yt1 = Yt * Y, Zt1 = Zt * Z;
    Vec next(static_cast<size_t>(L) * Xt1 * Yt1 * Zt1, 0.0);
    Kahan phi_sum;
    for (int l = 0; l < L; ++l)
      for (long xp = 0; xp < Xt; ++xp)
        for (long yp = 0; yp < Yt; ++yp)
          for (long zp = 0; zp < Zt; ++zp) {
            const double m0 =
                prev[((static_cast<long>(l) * Xt + xp) * Yt + yp) * Zt + zp];
            if (m0 == 0.0) continue;
            const long u = mc.qn.u_index(t, l, yp, zp);
            for (int x = 0; x < X; ++x) {
              const double pn = x_next_prob(law, t, l, xp, x);
              if (pn == 0.0) continue;
              for (int y = 0; y < Y; ++y) {
                const double wy = w1(x, y);
                if (wy == 0.0) continue;
                for (int z = 0; z < Z; ++z) {
                  const double wz = w2(y, z);
                  if (wz == 0.0) continue;
                  const double pzv = z_next_prob(law, t, l, zp, z);
                  if (qyu[u][y] <= 0.0 || qz[z] <= 0.0 || pzv <= 0.0)
                    throw std::domain_error(
                        "matched construction: zero reference at live mass");
                  const double fval =
                      std::exp(theta * mu * (std::log(wy) - std::log(qyu[u][y])) +
                               theta * (std::log(pzv) - std::log(qz[z])));
                  const double val = m0 * pn * wy * wz * fval;
                  phi_sum.add(val);
                  next[((static_cast<long>(l) * Xt1 + xp * X + x) * Yt1 + yp * Y + y) *
                           Zt1 +
                       zp * Z + z] += val;
                }
              }
            }
          }
    const double phi = phi_sum.value();
    if (!(phi > 0.0)) throw std::domain_error("matched construction: vanishing normalizer");
    for (double& v : next) v /= phi;
    prev = std::move(next);
    Xt = Xt1;
    Yt = Yt1;
    Zt = Zt1;
  }
  mc.trace = telescope(code, ch, mu, theta, mc.qn);
  return mc;
}

std::vector<HolderStepCheck> holder_chain_check(const BlockCode& code,
                                                const DegradedPair& ch, double mu,
                                                double theta, double omega_channel,
                                                double opt_tol) {
  MatchedConstruction mc = matched_test_dist(code, ch, mu, theta);
  const double lambda = theta / (1.0 - theta);
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  CodeLaw law = code_law(code, ch);
  std::vector<HolderStepCheck> out(code.n);
  for (int t = 0; t < code.n; ++t) {
    HolderStepCheck& c = out[t];
    c.log_phi = mc.trace.log_phi[t];
    const long U = mc.qn.u_count(t);
    c.omega_qt = tilted_cumulant_flat(mc.p_ux[t], static_cast<int>(U), ch, mu, lambda);

    // E_{q_t}[ p_{Z|V}/q_{Z|U} ] must be exactly one for the matched choice.
    const Vec& p_ux = mc.p_ux[t];
    Vec u_mass(U, 0.0);
    Mat qzu(U, Vec(Z, 0.0));
    for (long u = 0; u < U; ++u)
      for (int x = 0; x < X; ++x) {
        const double w = p_ux[u * X + x];
        if (w == 0.0) continue;
        u_mass[u] += w;
        for (int y = 0; y < Y; ++y)
          for (int z = 0; z < Z; ++z) qzu[u][z] += w * ch.w1()(x, y) * ch.w2()(y, z);
      }
    Kahan mean;
    const long Zt = ipow(Z, t);
    for (long u = 0; u < U; ++u) {
      if (u_mass[u] == 0.0) continue;
      const long zpre = u % Zt;
      const int l = static_cast<int>(u / (ipow(Y, t) * Zt));
      for (int z = 0; z < Z; ++z) {
        if (qzu[u][z] == 0.0) continue;
        const double pzv = z_next_prob(law, t, l, zpre, z);
        mean.add(qzu[u][z] * (pzv / (qzu[u][z] / u_mass[u])));
      }
    }
    c.unit_mean_residual = mean.value() - 1.0;

    const double exact_gap = c.omega_qt / (1.0 + lambda) - c.log_phi;
    const double channel_gap = omega_channel / (1.0 + lambda) + opt_tol - c.log_phi;
    c.margin = std::min(exact_gap + 1e-10, channel_gap);
    c.holds = exact_gap >= -1e-10 && channel_gap >= 0.0;
  }
  return out;
}

CheckResult cumulant_chain_check(const BlockCode& code, const DegradedPair& ch, double mu,
                                 double theta, double omega_channel, double opt_tol) {
  MatchedConstruction mc = matched_test_dist(code, ch, mu, theta);
  const double lambda = theta / (1.0 - theta);
  const double omega_pq = code_cumulant(code, ch, mu, theta, mc.qn);
  CheckResult res;
  res.lhs = omega_pq / code.n;
  res.rhs = omega_channel / (1.0 + lambda) + opt_tol;
  res.margin = res.rhs - res.lhs;
  res.holds = res.margin >= 0.0;
  return res;
}

ConverseCheck per_code_converse(const BlockCode& code, const DegradedPair& ch,
                                const RatePair& rates, const ExponentReport& report) {
  require_rate_conditions(code, rates);
  ConverseCheck out;
  out.pc = exact_probabilities(code, ch).pc;
  out.decay = out.pc > 0.0 ? -std::log(out.pc) / code.n : kInf;
  out.floor = report.f_value - std::log(3.0) / code.n;
  out.holds = out.decay + 1e-12 >= out.floor;
  return out;
}

void set_map_decoders(BlockCode& code, const DegradedPair& ch) {
  const int n = code.n, K = code.k_size, L = code.l_size;
  const int X = ch.x_size(), Y = ch.y_size(), Z = ch.z_size();
  const long Xn = ipow(X, n), Yn = ipow(Y, n), Zn = ipow(Z, n);
  const auto& w1 = ch.w1();
  const StochasticMatrix wc = compose(ch.w1(), ch.w2());
  std::vector<int> xs(n), ys(n), zs(n);

  // receiver 1: argmax_k P(k, y^n)
  Mat score_y(Yn, Vec(K, 0.0));
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) {
      const Vec& row = code.encoder.row(k * L + l);
      for (long xi = 0; xi < Xn; ++xi) {
        if (row[xi] == 0.0) continue;
        decode_seq(xi, X, n, xs.data());
        for (long yi = 0; yi < Yn; ++yi) {
          decode_seq(yi, Y, n, ys.data());
          double w = row[xi];
          for (int t = 0; t < n && w != 0.0; ++t) w *= w1(xs[t], ys[t]);
          score_y[yi][k] += w;
        }
      }
    }
  code.dec1.assign(Yn, 0);
  for (long yi = 0; yi < Yn; ++yi) {
    int best = 0;
    for (int k = 1; k < K; ++k)
      if (score_y[yi][k] > score_y[yi][best]) best = k;
    code.dec1[yi] = best;
  }

  // receiver 2: argmax_l P(l, z^n)
  Mat score_z(Zn, Vec(L, 0.0));
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) {
      const Vec& row = code.encoder.row(k * L + l);
      for (long xi = 0; xi < Xn; ++xi) {
        if (row[xi] == 0.0) continue;
        decode_seq(xi, X, n, xs.data());
        for (long zi = 0; zi < Zn; ++zi) {
          decode_seq(zi, Z, n, zs.data());
          double w = row[xi];
          for (int t = 0; t < n && w != 0.0; ++t) w *= wc(xs[t], zs[t]);
          score_z[zi][l] += w;
        }
      }
    }
  code.dec2.assign(Zn, 0);
  for (long zi = 0; zi < Zn; ++zi) {
    int best = 0;
    for (int l = 1; l < L; ++l)
      if (score_z[zi][l] > score_z[zi][best]) best = l;
    code.dec2[zi] = best;
  }
}

BlockCode random_code(int n, const DegradedPair& ch, int k_size, int l_size, Rng& rng,
                      bool map_decoders) {
  BlockCode code;
  code.n = n;
  code.k_size = k_size;
  code.l_size = l_size;
  code.x_size = ch.x_size();
  const long Xn = ipow(ch.x_size(), n);
  Mat enc(static_cast<size_t>(k_size) * l_size);
  for (auto& row : enc) row = rng.dirichlet(static_cast<int>(Xn));
  code.encoder = StochasticMatrix(std::move(enc));
  const long Yn = ipow(ch.y_size(), n), Zn = ipow(ch.z_size(), n);
  if (map_decoders) {
    code.dec1.assign(Yn, 0);
    code.dec2.assign(Zn, 0);
    set_map_decoders(code, ch);
  } else {
    code.dec1.resize(Yn);
    code.dec2.resize(Zn);
    for (auto& v : code.dec1) v = rng.uniform_int(k_size);
    for (auto& v : code.dec2) v = rng.uniform_int(l_size);
  }
  return code;
}

}  // namespace dbx
