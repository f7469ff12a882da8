#include "dbx/exponent.hpp"

#include <cmath>

#include "dbx/parallel.hpp"
#include "dbx/rng.hpp"

namespace dbx {

TiltParams::TiltParams(double mu_, double lambda_) : mu(mu_), lambda(lambda_) {
  if (!(mu > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("tilt parameters need mu > 0 and lambda > 0");
  theta = lambda / (1.0 + lambda);
}

TiltParams TiltParams::from_theta(double mu_, double theta_) {
  if (!(theta_ > 0.0) || !(theta_ < 1.0))
    throw std::invalid_argument("theta must lie in (0,1)");
  return TiltParams(mu_, theta_ / (1.0 - theta_));
}

double tilt_weight(const AuxiliaryJoint& q, const Marginals& m, double mu, int u, int x,
                   int y, int z) {
  const double w1 = q.channel().w1()(x, y);
  const double qyu = m.q_y_given_u[u][y];
  const double qzu = m.q_z_given_u[u][z];
  const double qz = m.q_z[z];
  if (qyu <= 0.0 || qz <= 0.0 || qzu <= 0.0 || w1 <= 0.0)
    throw std::domain_error("tilt weight: zero marginal at a positive-mass index");
  return mu * std::log(w1 / qyu) + std::log(qzu / qz);
}

namespace {

// Core cumulant sum for an explicit (u,x) mass table: induced marginals are
// computed exactly; when floor_eps > 0 they are floored and renormalized
// (optimizer iterates only).
double cumulant_core(const Vec& p_ux, int u_count, const StochasticMatrix& w1,
                     const StochasticMatrix& w2, double mu, double lambda,
                     double floor_eps) {
  const int X = w1.input_size(), Y = w1.output_size(), Z = w2.output_size();
  Mat q_y_u(u_count, Vec(Y, 0.0)), q_z_u(u_count, Vec(Z, 0.0));
  Vec q_z(Z, 0.0), u_mass(u_count, 0.0);
  for (int u = 0; u < u_count; ++u) {
    for (int x = 0; x < X; ++x) {
      const double w = p_ux[static_cast<size_t>(u) * X + x];
      if (w == 0.0) continue;
      u_mass[u] += w;
      for (int y = 0; y < Y; ++y) {
        const double wy = w1(x, y);
        if (wy == 0.0) continue;
        q_y_u[u][y] += w * wy;
        for (int z = 0; z < Z; ++z) q_z_u[u][z] += w * wy * w2(y, z);
      }
    }
    if (u_mass[u] > 0.0) {
      for (int y = 0; y < Y; ++y) q_y_u[u][y] /= u_mass[u];
      for (int z = 0; z < Z; ++z) q_z_u[u][z] /= u_mass[u];
      if (floor_eps > 0.0) {
        floor_simplex(q_y_u[u], floor_eps);
        floor_simplex(q_z_u[u], floor_eps);
      }
      for (int z = 0; z < Z; ++z) q_z[z] += u_mass[u] * q_z_u[u][z];
    }
  }
  if (floor_eps > 0.0) floor_simplex(q_z, floor_eps);

  StreamingLse lse;
  for (int u = 0; u < u_count; ++u) {
    if (u_mass[u] == 0.0) continue;
    for (int x = 0; x < X; ++x) {
      const double w = p_ux[static_cast<size_t>(u) * X + x];
      if (w == 0.0) continue;
      for (int y = 0; y < Y; ++y) {
        const double wy = w1(x, y);
        if (wy == 0.0) continue;
        for (int z = 0; z < Z; ++z) {
          const double wz = w2(y, z);
          if (wz == 0.0) continue;
          const double qyu = q_y_u[u][y], qzu = q_z_u[u][z], qz = q_z[z];
          if (qyu <= 0.0 || qzu <= 0.0 || qz <= 0.0)
            throw std::domain_error("cumulant: zero marginal at a positive-mass index");
          const double rho = mu * std::log(wy / qyu) + std::log(qzu / qz);
          lse.add(std::log(w * wy * wz) + lambda * rho);
        }
      }
    }
  }
  const double v = lse.value();
  return v == -kInf ? 0.0 : v;
}

Vec flat_mass(const AuxiliaryJoint& q) {
  const int U = q.u_size(), X = q.x_size();
  Vec p_ux(static_cast<size_t>(U) * X, 0.0);
  for (int u = 0; u < U; ++u)
    for (int x = 0; x < X; ++x)
      p_ux[static_cast<size_t>(u) * X + x] = q.p_u()[u] * q.p_x_given_u()(u, x);
  return p_ux;
}

}  // namespace

double tilted_cumulant(const AuxiliaryJoint& q, double mu, double lambda) {
  return cumulant_core(flat_mass(q), q.u_size(), q.channel().w1(), q.channel().w2(), mu,
                       lambda, 0.0);
}

double tilted_cumulant_floored(const Vec& p_u, const Mat& p_x_u, const DegradedPair& ch,
                               const StochasticMatrix& /*w_cascade*/, double mu,
                               double lambda, double floor_eps) {
  const int U = static_cast<int>(p_u.size());
  const int X = ch.x_size();
  Vec p_ux(static_cast<size_t>(U) * X, 0.0);
  for (int u = 0; u < U; ++u)
    for (int x = 0; x < X; ++x)
      p_ux[static_cast<size_t>(u) * X + x] = p_u[u] * p_x_u[u][x];
  return cumulant_core(p_ux, U, ch.w1(), ch.w2(), mu, lambda, floor_eps);
}

double tilted_cumulant_flat(const Vec& p_ux, int u_count, const DegradedPair& ch,
                            double mu, double lambda) {
  return cumulant_core(p_ux, u_count, ch.w1(), ch.w2(), mu, lambda, 0.0);
}

namespace {

// Tilted support atoms: probability under the lambda-tilted measure and the
// weight rho at each support point.
void tilted_atoms(const AuxiliaryJoint& q, double mu, double lambda, Vec& probs,
                  Vec& rhos) {
  Marginals m = marginals(q);
  const double xi = tilted_cumulant(q, mu, lambda);
  probs.clear();
  rhos.clear();
  for (int u = 0; u < q.u_size(); ++u)
    for (int x = 0; x < q.x_size(); ++x)
      for (int y = 0; y < q.y_size(); ++y)
        for (int z = 0; z < q.z_size(); ++z) {
          const double mass = q.mass(u, x, y, z);
          if (mass == 0.0) continue;
          const double rho = tilt_weight(q, m, mu, u, x, y, z);
          probs.push_back(std::exp(std::log(mass) + lambda * rho - xi));
          rhos.push_back(rho);
        }
}

}  // namespace

double tilted_cumulant_slope(const AuxiliaryJoint& q, double mu, double lambda) {
  Vec w, rho;
  tilted_atoms(q, mu, lambda, w, rho);
  Kahan s;
  for (size_t i = 0; i < w.size(); ++i) s.add(w[i] * rho[i]);
  return s.value();
}

double tilted_cumulant_curvature(const AuxiliaryJoint& q, double mu, double lambda) {
  Vec w, rho;
  tilted_atoms(q, mu, lambda, w, rho);
  Kahan s;
  for (size_t i = 0; i < w.size(); ++i)
    for (size_t j = 0; j < w.size(); ++j) {
      const double d = rho[i] - rho[j];
      s.add(w[i] * w[j] * d * d * 0.5);
    }
  return s.value();
}

OmegaResult max_tilted_cumulant(const DegradedPair& channel, double mu, double lambda,
                                const OptConfig& cfg,
                                std::span<const SimplexPoint> extra_starts) {
  TiltParams check(mu, lambda);  // validates positivity
  (void)check;
  const int X = channel.x_size();
  const int U = cfg.u_size > 0 ? cfg.u_size : X;
  const StochasticMatrix wc = compose(channel.w1(), channel.w2());
  Objective f = [&](const SimplexPoint& p) {
    return tilted_cumulant_floored(p.p_u, p.p_x_u, channel, wc, mu, lambda);
  };
  OptResult opt = maximize_over_simplices(U, X, f, nullptr, cfg, extra_starts);
  OmegaResult res;
  res.arg = AuxiliaryJoint(ProbVector(opt.arg.p_u), StochasticMatrix(opt.arg.p_x_u),
                           channel);
  res.value = tilted_cumulant(res.arg, mu, lambda);
  res.converged = opt.converged;
  return res;
}

double exponent_objective(double omega, double mu, double lambda, const RatePair& rates) {
  return (lambda * (mu * rates.r1 + rates.r2) - omega) / (1.0 + 2.0 * lambda + lambda * mu);
}

Vec default_mu_grid() { return log_space_grid(1e-3, 1e3, 61); }
Vec default_lambda_grid() { return log_space_grid(1e-3, 1e3, 61); }

ExponentGrid build_exponent_grid(const DegradedPair& channel, const Vec& mu_grid,
                                 const Vec& lambda_grid, const OptConfig& cfg) {
  if (mu_grid.empty() || lambda_grid.empty())
    throw std::invalid_argument("exponent grid: empty parameter grid");
  for (size_t i = 0; i < mu_grid.size(); ++i)
    if (!(mu_grid[i] > 0.0) || (i > 0 && mu_grid[i] < mu_grid[i - 1]))
      throw std::invalid_argument("mu grid must be sorted positive");
  for (size_t j = 0; j < lambda_grid.size(); ++j)
    if (!(lambda_grid[j] > 0.0) || (j > 0 && lambda_grid[j] < lambda_grid[j - 1]))
      throw std::invalid_argument("lambda grid must be sorted positive");

  ExponentGrid grid;
  grid.mu_grid = mu_grid;
  grid.lambda_grid = lambda_grid;
  const long n_mu = static_cast<long>(mu_grid.size());
  const long n_lam = static_cast<long>(lambda_grid.size());
  grid.omega.assign(n_mu, Vec(n_lam, 0.0));
  grid.c_values.assign(n_mu, 0.0);
  grid.c_args.resize(n_mu);

  // One column per mu: C^(mu) first (its argmax seeds the cumulant
  // optimizer, which guarantees omega >= lambda C^(mu) up to convergence),
  // then a warm-started sweep up the lambda grid.
  parallel_for(n_mu, [&](long i) {
    OptConfig ccfg = cfg;
    ccfg.seed = derive_stream(cfg.seed, 0x10000u + static_cast<uint64_t>(i));
    CmuResult cres = weighted_capacity(channel, mu_grid[i], ccfg);
    grid.c_values[i] = cres.value;
    SimplexPoint carg{cres.arg.p_u().probs(), cres.arg.p_x_given_u().rows()};
    grid.c_args[i] = carg;

    SimplexPoint warm = carg;
    for (long j = 0; j < n_lam; ++j) {
      OptConfig ocfg = cfg;
      ocfg.seed = derive_stream(cfg.seed, static_cast<uint64_t>(i * n_lam + j));
      if (j > 0) ocfg.restarts = std::max(4, cfg.restarts / 4);
      const SimplexPoint starts[2] = {carg, warm};
      OmegaResult o = max_tilted_cumulant(channel, mu_grid[i], lambda_grid[j], ocfg,
                                          std::span<const SimplexPoint>(starts, 2));
      grid.omega[i][j] = o.value;
      warm.p_u = o.arg.p_u().probs();
      warm.p_x_u = o.arg.p_x_given_u().rows();
    }
  });
  return grid;
}

ExponentReport exponent_lower_bound(const ExponentGrid& grid, const RatePair& rates) {
  ExponentReport rep;
  rep.f_value = -kInf;
  const long n_mu = static_cast<long>(grid.mu_grid.size());
  const long n_lam = static_cast<long>(grid.lambda_grid.size());
  long bi = 0, bj = 0;
  for (long i = 0; i < n_mu; ++i)
    for (long j = 0; j < n_lam; ++j) {
      const double f =
          exponent_objective(grid.omega[i][j], grid.mu_grid[i], grid.lambda_grid[j], rates);
      if (f > rep.f_value) {
        rep.f_value = f;
        bi = i;
        bj = j;
      }
    }
  rep.best_mu = grid.mu_grid[bi];
  rep.best_lambda = grid.lambda_grid[bj];
  rep.omega_at_best = grid.omega[bi][bj];
  rep.boundary_flag = (bi == 0 || bi == n_mu - 1 || bj == 0 || bj == n_lam - 1);
  return rep;
}

ExponentReport exponent_lower_bound(const DegradedPair& channel, const RatePair& rates,
                                    const Vec& mu_grid, const Vec& lambda_grid,
                                    const OptConfig& cfg) {
  return exponent_lower_bound(build_exponent_grid(channel, mu_grid, lambda_grid, cfg),
                              rates);
}

}  // namespace dbx
