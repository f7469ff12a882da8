#include "dbx/common.hpp"

#include <cstdio>

namespace dbx {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Vec log_space_grid(double lo, double hi, int points) {
  if (points <= 0) throw std::invalid_argument("grid needs at least one point");
  if (lo <= 0.0 || hi < lo) throw std::invalid_argument("log grid needs 0 < lo <= hi");
  Vec g(points);
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < points; ++i)
    g[i] = std::exp(llo + (lhi - llo) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

Vec lin_space_grid(double lo, double hi, int points) {
  if (points <= 0) throw std::invalid_argument("grid needs at least one point");
  Vec g(points);
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

}  // namespace dbx
