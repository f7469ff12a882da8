#include "dbx/capacity.hpp"

#include <cmath>

#include "dbx/parallel.hpp"
#include "dbx/rng.hpp"

namespace dbx {

RatePair::RatePair(double a, double b) : r1(a), r2(b) {
  if (!(r1 >= 0.0) || !(r2 >= 0.0))
    throw std::invalid_argument("rate pair must be non-negative");
}

namespace {

// Induced kernels for raw simplex coordinates, with an optional floor that
// keeps the log terms finite inside optimizer iterates.
struct Induced {
  Mat q_y_u, q_z_u;  // |U| x |Y|, |U| x |Z|
  Vec q_z;
};

void induced_kernels(const Vec& p_u, const Mat& p_x_u, const StochasticMatrix& w1,
                     const StochasticMatrix& wc, Induced& ind, double floor_eps) {
  const int U = static_cast<int>(p_u.size());
  const int X = w1.input_size(), Y = w1.output_size(), Z = wc.output_size();
  ind.q_y_u.assign(U, Vec(Y, 0.0));
  ind.q_z_u.assign(U, Vec(Z, 0.0));
  ind.q_z.assign(Z, 0.0);
  for (int u = 0; u < U; ++u) {
    for (int x = 0; x < X; ++x) {
      const double pxu = p_x_u[u][x];
      if (pxu == 0.0) continue;
      for (int y = 0; y < Y; ++y) ind.q_y_u[u][y] += pxu * w1(x, y);
      for (int z = 0; z < Z; ++z) ind.q_z_u[u][z] += pxu * wc(x, z);
    }
    for (int z = 0; z < Z; ++z) ind.q_z[z] += p_u[u] * ind.q_z_u[u][z];
  }
  if (floor_eps > 0.0) {
    for (int u = 0; u < U; ++u) {
      floor_simplex(ind.q_y_u[u], floor_eps);
      floor_simplex(ind.q_z_u[u], floor_eps);
    }
    floor_simplex(ind.q_z, floor_eps);
  }
}

// mu * I(X;Y|U) + I(U;Z) from raw coordinates.
double weighted_info(const Vec& p_u, const Mat& p_x_u, const StochasticMatrix& w1,
                     const StochasticMatrix& wc, double mu, double floor_eps) {
  const int U = static_cast<int>(p_u.size());
  const int X = w1.input_size(), Y = w1.output_size(), Z = wc.output_size();
  Induced ind;
  induced_kernels(p_u, p_x_u, w1, wc, ind, floor_eps);
  Kahan total;
  for (int u = 0; u < U; ++u) {
    if (p_u[u] == 0.0) continue;
    for (int x = 0; x < X; ++x) {
      const double pxu = p_x_u[u][x];
      if (pxu == 0.0) continue;
      for (int y = 0; y < Y; ++y) {
        const double wy = w1(x, y);
        if (wy == 0.0) continue;
        total.add(mu * p_u[u] * pxu * wy * std::log(wy / ind.q_y_u[u][y]));
      }
    }
    for (int z = 0; z < Z; ++z) {
      const double qzu = ind.q_z_u[u][z];
      if (qzu == 0.0) continue;
      total.add(p_u[u] * qzu * std::log(qzu / ind.q_z[z]));
    }
  }
  return total.value();
}

// Embedding-space gradient of the objective above. Per-row constant shifts
// are irrelevant under simplex projection.
void weighted_info_grad(const Vec& p_u, const Mat& p_x_u, const StochasticMatrix& w1,
                        const StochasticMatrix& wc, double mu, SimplexPoint& g) {
  const int U = static_cast<int>(p_u.size());
  const int X = w1.input_size(), Y = w1.output_size(), Z = wc.output_size();
  Induced ind;
  induced_kernels(p_u, p_x_u, w1, wc, ind, kInteriorFloor);
  g.p_u.assign(U, 0.0);
  g.p_x_u.assign(U, Vec(X, 0.0));
  for (int u = 0; u < U; ++u) {
    // d/dp_U(u): mu * I(X;Y|U=u) + KL(q_{Z|U=u} || q_Z)
    double ixy_u = 0.0;
    for (int x = 0; x < X; ++x) {
      const double pxu = p_x_u[u][x];
      if (pxu == 0.0) continue;
      for (int y = 0; y < Y; ++y) {
        const double wy = w1(x, y);
        if (wy > 0.0) ixy_u += pxu * wy * std::log(wy / ind.q_y_u[u][y]);
      }
    }
    double kl_z = 0.0;
    for (int z = 0; z < Z; ++z) {
      const double qzu = ind.q_z_u[u][z];
      if (qzu > 0.0) kl_z += qzu * std::log(qzu / ind.q_z[z]);
    }
    g.p_u[u] = mu * ixy_u + kl_z;
    // d/dp_{X|U}(x|u): p_U(u) * [ mu * KL(W1(.|x) || q_{Y|U=u})
    //                             + sum_z Wc(z|x) log(q_{Z|U=u}/q_Z) ]
    for (int x = 0; x < X; ++x) {
      double kl_y = 0.0;
      for (int y = 0; y < Y; ++y) {
        const double wy = w1(x, y);
        if (wy > 0.0) kl_y += wy * std::log(wy / ind.q_y_u[u][y]);
      }
      double zterm = 0.0;
      for (int z = 0; z < Z; ++z) {
        const double wz = wc(x, z);
        if (wz > 0.0) zterm += wz * std::log(ind.q_z_u[u][z] / ind.q_z[z]);
      }
      g.p_x_u[u][x] = p_u[u] * (mu * kl_y + zterm);
    }
  }
}

}  // namespace

CmuResult weighted_capacity(const DegradedPair& channel, double mu, const OptConfig& cfg) {
  if (!(mu > 0.0)) throw std::invalid_argument("weighted capacity needs mu > 0");
  const int X = channel.x_size();
  const int U = cfg.u_size > 0 ? cfg.u_size : X;
  const StochasticMatrix& w1 = channel.w1();
  const StochasticMatrix wc = compose(channel.w1(), channel.w2());

  Objective f = [&](const SimplexPoint& p) {
    return weighted_info(p.p_u, p.p_x_u, w1, wc, mu, kInteriorFloor);
  };
  GradientFn grad = [&](const SimplexPoint& p, SimplexPoint& g) {
    weighted_info_grad(p.p_u, p.p_x_u, w1, wc, mu, g);
  };
  OptResult opt = maximize_over_simplices(U, X, f, &grad, cfg);

  // Exact value at the argmax, no flooring.
  CmuResult res;
  res.arg = AuxiliaryJoint(ProbVector(opt.arg.p_u), StochasticMatrix(opt.arg.p_x_u),
                           channel);
  res.value = mu * info_x_y_given_u(res.arg) + info_u_z(res.arg);
  res.converged = opt.converged;
  return res;
}

HyperplaneProfile hyperplane_profile(const DegradedPair& channel, const Vec& mu_grid,
                                     const OptConfig& cfg) {
  if (mu_grid.empty()) throw std::invalid_argument("hyperplane profile: empty mu grid");
  for (size_t i = 0; i < mu_grid.size(); ++i) {
    if (!(mu_grid[i] > 0.0)) throw std::invalid_argument("mu grid must be positive");
    if (i > 0 && mu_grid[i] < mu_grid[i - 1])
      throw std::invalid_argument("mu grid must be sorted");
  }
  HyperplaneProfile prof;
  prof.mu_grid = mu_grid;
  prof.c_values.assign(mu_grid.size(), 0.0);
  parallel_for(static_cast<long>(mu_grid.size()), [&](long i) {
    OptConfig c = cfg;
    c.seed = derive_stream(cfg.seed, static_cast<uint64_t>(i));
    prof.c_values[i] = weighted_capacity(channel, mu_grid[i], c).value;
  });
  return prof;
}

RegionCheck in_region(const HyperplaneProfile& profile, const RatePair& rates,
                      double slack) {
  if (profile.mu_grid.empty() || profile.mu_grid.size() != profile.c_values.size())
    throw std::invalid_argument("region check: malformed profile");
  RegionCheck out;
  out.margin = -kInf;
  for (size_t i = 0; i < profile.mu_grid.size(); ++i) {
    const double gap = profile.mu_grid[i] * rates.r1 + rates.r2 - profile.c_values[i];
    if (gap > out.margin) {
      out.margin = gap;
      out.worst_mu = profile.mu_grid[i];
    }
  }
  out.inside = !(out.margin > slack);
  return out;
}

std::pair<double, double> rect_corner(const AuxiliaryJoint& p) {
  return {info_x_y_given_u(p), info_u_z(p)};
}

}  // namespace dbx
