#include "oracles.hpp"

#include <cmath>

#include "dbx/rng.hpp"

namespace oracle {

long double entropy_ld(const Vec& p) {
  long double h = 0.0L;
  for (double v : p)
    if (v > 0.0) h -= static_cast<long double>(v) * std::log(static_cast<long double>(v));
  return h;
}

long double mutual_information_ld(const Mat& joint_ab) {
  const size_t A = joint_ab.size();
  const size_t B = A ? joint_ab[0].size() : 0;
  std::vector<long double> pa(A, 0.0L), pb(B, 0.0L);
  for (size_t a = 0; a < A; ++a)
    for (size_t b = 0; b < B; ++b) {
      pa[a] += joint_ab[a][b];
      pb[b] += joint_ab[a][b];
    }
  long double s = 0.0L;
  for (size_t a = 0; a < A; ++a)
    for (size_t b = 0; b < B; ++b) {
      const long double pab = joint_ab[a][b];
      if (pab > 0.0L) s += pab * std::log(pab / (pa[a] * pb[b]));
    }
  return s;
}

long double conditional_mutual_information_ld(const std::vector<Mat>& joint_cab) {
  long double total = 0.0L;
  for (const Mat& slice : joint_cab) {
    long double pc = 0.0L;
    for (const auto& row : slice)
      for (double v : row) pc += v;
    if (pc <= 0.0L) continue;
    Mat cond = slice;
    for (auto& row : cond)
      for (double& v : row) v = static_cast<double>(v / static_cast<double>(pc));
    total += pc * mutual_information_ld(cond);
  }
  return total;
}

Joint4 bruteforce_joint(const dbx::AuxiliaryJoint& j) {
  Joint4 out;
  out.U = j.u_size();
  out.X = j.x_size();
  out.Y = j.y_size();
  out.Z = j.z_size();
  out.p.assign(static_cast<size_t>(out.U) * out.X * out.Y * out.Z, 0.0L);
  for (int u = 0; u < out.U; ++u)
    for (int x = 0; x < out.X; ++x)
      for (int y = 0; y < out.Y; ++y)
        for (int z = 0; z < out.Z; ++z)
          out.at(u, x, y, z) = static_cast<long double>(j.p_u()[u]) *
                               j.p_x_given_u()(u, x) * j.channel().w1()(x, y) *
                               j.channel().w2()(y, z);
  return out;
}

namespace {

// Objective values for the binary grid search, from scratch in long double.
struct BinaryChannelTables {
  long double w1[2][2], wc[2][2];
};

BinaryChannelTables tables_of(const dbx::DegradedPair& ch) {
  BinaryChannelTables t{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) t.w1[x][y] = ch.w1()(x, y);
  for (int x = 0; x < 2; ++x)
    for (int z = 0; z < 2; ++z) {
      long double s = 0.0L;
      for (int y = 0; y < 2; ++y)
        s += static_cast<long double>(ch.w1()(x, y)) * ch.w2()(y, z);
      t.wc[x][z] = s;
    }
  return t;
}

long double weighted_objective(const BinaryChannelTables& t, long double a,
                               long double b, long double c, double mu) {
  const long double pu[2] = {a, 1.0L - a};
  const long double pxu[2][2] = {{b, 1.0L - b}, {c, 1.0L - c}};
  long double qyu[2][2] = {{0, 0}, {0, 0}}, qzu[2][2] = {{0, 0}, {0, 0}},
              qz[2] = {0, 0};
  for (int u = 0; u < 2; ++u)
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) qyu[u][y] += pxu[u][x] * t.w1[x][y];
      for (int z = 0; z < 2; ++z) qzu[u][z] += pxu[u][x] * t.wc[x][z];
    }
  for (int u = 0; u < 2; ++u)
    for (int z = 0; z < 2; ++z) qz[z] += pu[u] * qzu[u][z];
  long double ixy = 0.0L, iuz = 0.0L;
  for (int u = 0; u < 2; ++u) {
    if (pu[u] <= 0.0L) continue;
    for (int x = 0; x < 2; ++x) {
      if (pxu[u][x] <= 0.0L) continue;
      for (int y = 0; y < 2; ++y)
        if (t.w1[x][y] > 0.0L)
          ixy += pu[u] * pxu[u][x] * t.w1[x][y] * std::log(t.w1[x][y] / qyu[u][y]);
    }
    for (int z = 0; z < 2; ++z)
      if (qzu[u][z] > 0.0L) iuz += pu[u] * qzu[u][z] * std::log(qzu[u][z] / qz[z]);
  }
  return mu * ixy + iuz;
}

long double omega_objective(const BinaryChannelTables& t, const dbx::DegradedPair& ch,
                            long double a, long double b, long double c, double mu,
                            double lambda) {
  const long double pu[2] = {a, 1.0L - a};
  const long double pxu[2][2] = {{b, 1.0L - b}, {c, 1.0L - c}};
  long double qyu[2][2] = {{0, 0}, {0, 0}}, qzu[2][2] = {{0, 0}, {0, 0}},
              qz[2] = {0, 0};
  for (int u = 0; u < 2; ++u)
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) qyu[u][y] += pxu[u][x] * t.w1[x][y];
      for (int z = 0; z < 2; ++z) qzu[u][z] += pxu[u][x] * t.wc[x][z];
    }
  for (int u = 0; u < 2; ++u)
    for (int z = 0; z < 2; ++z) qz[z] += pu[u] * qzu[u][z];
  long double lam = 0.0L;
  for (int u = 0; u < 2; ++u) {
    if (pu[u] <= 0.0L) continue;
    for (int x = 0; x < 2; ++x) {
      if (pxu[u][x] <= 0.0L) continue;
      for (int y = 0; y < 2; ++y) {
        const long double w1v = t.w1[x][y];
        if (w1v <= 0.0L) continue;
        for (int z = 0; z < 2; ++z) {
          const long double w2v = ch.w2()(y, z);
          if (w2v <= 0.0L) continue;
          const long double mass = pu[u] * pxu[u][x] * w1v * w2v;
          const long double omega =
              mu * std::log(w1v / qyu[u][y]) + std::log(qzu[u][z] / qz[z]);
          lam += mass * std::exp(static_cast<long double>(lambda) * omega);
        }
      }
    }
  }
  return std::log(lam);
}

template <typename F>
double grid_maximize(F&& f, int steps, int refine_levels) {
  long double best = -1e30L;
  long double ba = 0, bb = 0, bc = 0;
  const long double h0 = 1.0L / steps;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j)
      for (int k = 0; k <= steps; ++k) {
        const long double v = f(i * h0, j * h0, k * h0);
        if (v > best) {
          best = v;
          ba = i * h0;
          bb = j * h0;
          bc = k * h0;
        }
      }
  long double h = h0;
  for (int lev = 0; lev < refine_levels; ++lev) {
    const long double hl = h / 8.0L;
    long double na = ba, nb = bb, nc = bc;
    for (int i = -8; i <= 8; ++i)
      for (int j = -8; j <= 8; ++j)
        for (int k = -8; k <= 8; ++k) {
          const long double a = std::min(1.0L, std::max(0.0L, ba + i * hl));
          const long double b = std::min(1.0L, std::max(0.0L, bb + j * hl));
          const long double c = std::min(1.0L, std::max(0.0L, bc + k * hl));
          const long double v = f(a, b, c);
          if (v > best) {
            best = v;
            na = a;
            nb = b;
            nc = c;
          }
        }
    ba = na;
    bb = nb;
    bc = nc;
    h = hl;
  }
  return static_cast<double>(best);
}

}  // namespace

double cmu_grid_oracle(const dbx::DegradedPair& ch, double mu, int steps,
                       int refine_levels) {
  const BinaryChannelTables t = tables_of(ch);
  return grid_maximize(
      [&](long double a, long double b, long double c) {
        return weighted_objective(t, a, b, c, mu);
      },
      steps, refine_levels);
}

double omega_grid_oracle(const dbx::DegradedPair& ch, double mu, double lambda,
                         int steps, int refine_levels) {
  const BinaryChannelTables t = tables_of(ch);
  return grid_maximize(
      [&](long double a, long double b, long double c) {
        return omega_objective(t, ch, a, b, c, mu, lambda);
      },
      steps, refine_levels);
}

double blahut_arimoto_capacity(const dbx::StochasticMatrix& w, int iters) {
  const int X = w.input_size(), Y = w.output_size();
  std::vector<long double> p(X, 1.0L / X), q(Y);
  for (int it = 0; it < iters; ++it) {
    for (int y = 0; y < Y; ++y) {
      q[y] = 0.0L;
      for (int x = 0; x < X; ++x) q[y] += p[x] * w(x, y);
    }
    std::vector<long double> score(X, 0.0L);
    long double norm = 0.0L;
    for (int x = 0; x < X; ++x) {
      long double d = 0.0L;
      for (int y = 0; y < Y; ++y)
        if (w(x, y) > 0.0) d += w(x, y) * std::log(w(x, y) / q[y]);
      score[x] = p[x] * std::exp(d);
      norm += score[x];
    }
    for (int x = 0; x < X; ++x) p[x] = score[x] / norm;
  }
  for (int y = 0; y < Y; ++y) {
    q[y] = 0.0L;
    for (int x = 0; x < X; ++x) q[y] += p[x] * w(x, y);
  }
  long double cap = 0.0L;
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y)
      if (w(x, y) > 0.0 && p[x] > 0.0L)
        cap += p[x] * w(x, y) * std::log(w(x, y) / q[y]);
  return static_cast<double>(cap);
}

long double omega_q_direct(const dbx::AuxiliaryJoint& q, double mu, double lambda) {
  Joint4 j = bruteforce_joint(q);
  // marginals straight from the 4-way table
  std::vector<long double> pu(j.U, 0.0L), qz(j.Z, 0.0L);
  std::vector<std::vector<long double>> qyu(j.U, std::vector<long double>(j.Y, 0.0L));
  std::vector<std::vector<long double>> qzu(j.U, std::vector<long double>(j.Z, 0.0L));
  for (int u = 0; u < j.U; ++u)
    for (int x = 0; x < j.X; ++x)
      for (int y = 0; y < j.Y; ++y)
        for (int z = 0; z < j.Z; ++z) {
          const long double m = j.at(u, x, y, z);
          pu[u] += m;
          qyu[u][y] += m;
          qzu[u][z] += m;
          qz[z] += m;
        }
  long double lam = 0.0L;
  for (int u = 0; u < j.U; ++u) {
    if (pu[u] <= 0.0L) continue;
    for (int x = 0; x < j.X; ++x)
      for (int y = 0; y < j.Y; ++y)
        for (int z = 0; z < j.Z; ++z) {
          const long double m = j.at(u, x, y, z);
          if (m <= 0.0L) continue;
          const long double w1v = q.channel().w1()(x, y);
          const long double omega = mu * std::log(w1v / (qyu[u][y] / pu[u])) +
                                    std::log((qzu[u][z] / pu[u]) / qz[z]);
          lam += m * std::exp(static_cast<long double>(lambda) * omega);
        }
  }
  return std::log(lam);
}

McEstimate mc_code_estimate(const dbx::BlockCode& code, const dbx::DegradedPair& ch,
                            long samples, uint64_t seed) {
  const int n = code.n;
  long ok = 0, ok1 = 0, ok2 = 0;
  for (long s = 0; s < samples; ++s) {
    dbx::Rng rng(seed, static_cast<uint64_t>(s) + 1);
    const int k = rng.uniform_int(code.k_size);
    const int l = rng.uniform_int(code.l_size);
    // sample x^n from the encoder row, then the channel letters
    const Vec& row = code.encoder.row(k * code.l_size + l);
    double u = rng.u01(), acc = 0.0;
    long xi = 0;
    for (size_t i = 0; i < row.size(); ++i) {
      acc += row[i];
      if (u < acc) {
        xi = static_cast<long>(i);
        break;
      }
      xi = static_cast<long>(i);
    }
    std::vector<int> xs(n), ys(n), zs(n);
    dbx::decode_seq(xi, code.x_size, n, xs.data());
    for (int t = 0; t < n; ++t) {
      double uy = rng.u01(), a = 0.0;
      ys[t] = ch.y_size() - 1;
      for (int y = 0; y < ch.y_size(); ++y) {
        a += ch.w1()(xs[t], y);
        if (uy < a) {
          ys[t] = y;
          break;
        }
      }
      double uz = rng.u01();
      a = 0.0;
      zs[t] = ch.z_size() - 1;
      for (int z = 0; z < ch.z_size(); ++z) {
        a += ch.w2()(ys[t], z);
        if (uz < a) {
          zs[t] = z;
          break;
        }
      }
    }
    const long yi = dbx::encode_seq(ys.data(), ch.y_size(), n);
    const long zi = dbx::encode_seq(zs.data(), ch.z_size(), n);
    const bool good1 = code.dec1[yi] == k;
    const bool good2 = code.dec2[zi] == l;
    if (good1) ++ok1;
    if (good2) ++ok2;
    if (good1 && good2) ++ok;
  }
  McEstimate e;
  e.pc = static_cast<double>(ok) / samples;
  e.pe1 = 1.0 - static_cast<double>(ok1) / samples;
  e.pe2 = 1.0 - static_cast<double>(ok2) / samples;
  e.se_pc = std::sqrt(std::max(e.pc * (1.0 - e.pc), 1e-12) / samples);
  return e;
}

}  // namespace oracle
