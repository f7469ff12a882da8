#include "dbx/optimizer.hpp"

#include <algorithm>
#include <numeric>

#include "dbx/rng.hpp"

namespace dbx {

void project_simplex(Vec& v) {
  // Sort-based Euclidean projection.
  const int n = static_cast<int>(v.size());
  Vec u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(0.0, x - theta);
}

void floor_simplex(Vec& v, double eps) {
  double s = 0.0;
  for (double& x : v) {
    if (x < eps) x = eps;
    s += x;
  }
  for (double& x : v) x /= s;
}

Vec flatten(const SimplexPoint& p) {
  Vec out = p.p_u;
  for (const auto& row : p.p_x_u) out.insert(out.end(), row.begin(), row.end());
  return out;
}

namespace {

void project_point(SimplexPoint& p, double floor_eps) {
  project_simplex(p.p_u);
  floor_simplex(p.p_u, floor_eps);
  for (auto& row : p.p_x_u) {
    project_simplex(row);
    floor_simplex(row, floor_eps);
  }
}

SimplexPoint uniform_start(int u_size, int x_size) {
  SimplexPoint p;
  p.p_u.assign(u_size, 1.0 / u_size);
  p.p_x_u.assign(u_size, Vec(x_size, 1.0 / x_size));
  return p;
}

SimplexPoint random_start(int u_size, int x_size, Rng& rng) {
  SimplexPoint p;
  p.p_u = rng.dirichlet(u_size);
  p.p_x_u.resize(u_size);
  for (int u = 0; u < u_size; ++u) p.p_x_u[u] = rng.dirichlet(x_size);
  return p;
}

// Central differences, one-sided next to the orthant boundary (coordinates
// must never probe negative: log-ratio objectives are undefined there).
void numeric_gradient(const Objective& f, const SimplexPoint& p, SimplexPoint& g,
                      int* evals) {
  const double h = 1e-6;
  SimplexPoint probe = p;
  g.p_u.assign(p.p_u.size(), 0.0);
  g.p_x_u.assign(p.p_x_u.size(), Vec(p.p_x_u.empty() ? 0 : p.p_x_u[0].size(), 0.0));
  auto diff = [&](double* coord, double base) {
    const double hi = base + h;
    const double lo = std::max(0.0, base - h);
    *coord = hi;
    const double f_hi = f(probe);
    *coord = lo;
    const double f_lo = f(probe);
    *coord = base;
    *evals += 2;
    return (f_hi - f_lo) / (hi - lo);
  };
  for (size_t i = 0; i < p.p_u.size(); ++i)
    g.p_u[i] = diff(&probe.p_u[i], p.p_u[i]);
  for (size_t u = 0; u < p.p_x_u.size(); ++u)
    for (size_t x = 0; x < p.p_x_u[u].size(); ++x)
      g.p_x_u[u][x] = diff(&probe.p_x_u[u][x], p.p_x_u[u][x]);
}

struct AscentOut {
  double value;
  SimplexPoint arg;
  bool converged;
  int evals;
};

AscentOut ascend(SimplexPoint start, int u_size, int x_size, const Objective& f,
                 const GradientFn* grad, const OptConfig& cfg) {
  (void)u_size;
  (void)x_size;
  project_point(start, kInteriorFloor);
  SimplexPoint cur = std::move(start);
  int evals = 1;
  double fc = f(cur);
  SimplexPoint g;
  bool converged = false;
  double step = cfg.step0;
  for (int it = 0; it < cfg.max_iters && !converged; ++it) {
    if (grad)
      (*grad)(cur, g);
    else
      numeric_gradient(f, cur, g, &evals);
    // Backtracking along the projection arc.
    bool improved = false;
    double trial_step = step;
    for (int bt = 0; bt < 30; ++bt) {
      SimplexPoint cand = cur;
      for (size_t i = 0; i < cand.p_u.size(); ++i) cand.p_u[i] += trial_step * g.p_u[i];
      for (size_t u = 0; u < cand.p_x_u.size(); ++u)
        for (size_t x = 0; x < cand.p_x_u[u].size(); ++x)
          cand.p_x_u[u][x] += trial_step * g.p_x_u[u][x];
      project_point(cand, kInteriorFloor);
      const double fv = f(cand);
      ++evals;
      if (fv > fc) {
        const double gain = fv - fc;
        cur = std::move(cand);
        fc = fv;
        improved = true;
        step = trial_step * 2.0;  // let the step grow back
        converged = gain <= cfg.tol * (1.0 + std::abs(fc));
        break;
      }
      trial_step *= 0.25;
    }
    if (!improved) converged = true;
  }
  return {fc, std::move(cur), converged, evals};
}

bool lex_less(const SimplexPoint& a, const SimplexPoint& b) {
  return flatten(a) < flatten(b);
}

}  // namespace

OptResult maximize_over_simplices(int u_size, int x_size, const Objective& f,
                                  const GradientFn* grad, const OptConfig& cfg,
                                  std::span<const SimplexPoint> extra_starts) {
  if (u_size <= 0 || x_size <= 0)
    throw std::invalid_argument("optimizer: alphabet sizes must be positive");
  std::vector<SimplexPoint> starts;
  starts.push_back(uniform_start(u_size, x_size));
  for (const auto& s : extra_starts) {
    if (static_cast<int>(s.p_u.size()) == u_size &&
        static_cast<int>(s.p_x_u.size()) == u_size)
      starts.push_back(s);
  }
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(cfg.seed, static_cast<uint64_t>(r) + 1);
    starts.push_back(random_start(u_size, x_size, rng));
  }

  OptResult best;
  constexpr double kTieTol = 1e-12;
  for (auto& s : starts) {
    AscentOut out = ascend(std::move(s), u_size, x_size, f, grad, cfg);
    best.evals += out.evals;
    const bool better = out.value > best.value + kTieTol;
    const bool tied = std::abs(out.value - best.value) <= kTieTol;
    if (better || (tied && lex_less(out.arg, best.arg))) {
      best.value = out.value;
      best.arg = std::move(out.arg);
      best.converged = out.converged;
    }
  }
  return best;
}

}  // namespace dbx
