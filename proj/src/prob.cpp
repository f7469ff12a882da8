#include "dbx/prob.hpp"

#include <cmath>
#include <sstream>

namespace dbx {

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].what << " at index " << issues[i].index << " (magnitude "
       << fmt17(issues[i].magnitude) << ")";
  }
  return os.str();
}

ValidationReport validate_distribution(const Vec& p, double tol) {
  ValidationReport rep;
  if (p.empty()) {
    rep.issues.push_back({"empty distribution", -1, 0.0});
    return rep;
  }
  Kahan sum;
  for (size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0))  // catches negatives and NaN
      rep.issues.push_back({"negative or non-finite entry", static_cast<long>(i), p[i]});
    sum.add(p[i]);
  }
  const double excess = std::abs(sum.value() - 1.0);
  if (!(excess <= tol))
    rep.issues.push_back({"entries do not sum to one", -1, sum.value() - 1.0});
  return rep;
}

ValidationReport validate_kernel(const Mat& rows, double tol) {
  ValidationReport rep;
  if (rows.empty()) {
    rep.issues.push_back({"empty kernel", -1, 0.0});
    return rep;
  }
  const size_t w = rows[0].size();
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != w) {
      rep.issues.push_back({"ragged row", static_cast<long>(r),
                            static_cast<double>(rows[r].size())});
      continue;
    }
    ValidationReport row_rep = validate_distribution(rows[r], tol);
    for (auto& issue : row_rep.issues) {
      issue.what = "row " + std::to_string(r) + ": " + issue.what;
      rep.issues.push_back(issue);
    }
  }
  return rep;
}

ProbVector::ProbVector(Vec probs) : probs_(std::move(probs)) {
  ValidationReport rep = validate_distribution(probs_);
  if (!rep.ok()) throw std::invalid_argument("invalid distribution: " + rep.to_string());
}

StochasticMatrix::StochasticMatrix(Mat rows) : rows_(std::move(rows)) {
  ValidationReport rep = validate_kernel(rows_);
  if (!rep.ok()) throw std::invalid_argument("invalid kernel: " + rep.to_string());
}

StochasticMatrix identity_kernel(int n) {
  Mat m(n, Vec(n, 0.0));
  for (int i = 0; i < n; ++i) m[i][i] = 1.0;
  return StochasticMatrix(std::move(m));
}

StochasticMatrix uniform_kernel(int in, int out) {
  Mat m(in, Vec(out, 1.0 / out));
  return StochasticMatrix(std::move(m));
}

StochasticMatrix binary_symmetric(double crossover) {
  return StochasticMatrix({{1.0 - crossover, crossover}, {crossover, 1.0 - crossover}});
}

StochasticMatrix compose(const StochasticMatrix& w1, const StochasticMatrix& w2) {
  if (w1.output_size() != w2.input_size())
    throw std::invalid_argument("compose: inner dimensions differ (" +
                                std::to_string(w1.output_size()) + " vs " +
                                std::to_string(w2.input_size()) + ")");
  Mat m(w1.input_size(), Vec(w2.output_size(), 0.0));
  for (int x = 0; x < w1.input_size(); ++x)
    for (int z = 0; z < w2.output_size(); ++z) {
      Kahan s;
      for (int y = 0; y < w1.output_size(); ++y) s.add(w1(x, y) * w2(y, z));
      m[x][z] = s.value();
    }
  return StochasticMatrix(std::move(m));
}

DegradedPair::DegradedPair(StochasticMatrix w1, StochasticMatrix w2)
    : w1_(std::move(w1)), w2_(std::move(w2)) {
  if (w1_.output_size() != w2_.input_size())
    throw std::invalid_argument("degraded pair: w1 output size " +
                                std::to_string(w1_.output_size()) +
                                " != w2 input size " + std::to_string(w2_.input_size()));
}

AuxiliaryJoint::AuxiliaryJoint(ProbVector p_u, StochasticMatrix p_x_given_u,
                               DegradedPair channel)
    : p_u_(std::move(p_u)), p_x_given_u_(std::move(p_x_given_u)), channel_(std::move(channel)) {
  if (p_u_.size() != p_x_given_u_.input_size())
    throw std::invalid_argument("auxiliary joint: |U| mismatch between p_U and p_{X|U}");
  if (p_x_given_u_.output_size() != channel_.x_size())
    throw std::invalid_argument("auxiliary joint: |X| mismatch with the channel");
}

Marginals marginals(const AuxiliaryJoint& j) {
  const int U = j.u_size(), X = j.x_size(), Y = j.y_size(), Z = j.z_size();
  const auto& w1 = j.channel().w1();
  const auto& w2 = j.channel().w2();
  Marginals m;
  m.q_x.assign(X, 0.0);
  m.q_y.assign(Y, 0.0);
  m.q_z.assign(Z, 0.0);
  m.q_y_given_u.assign(U, Vec(Y, 0.0));
  m.q_z_given_u.assign(U, Vec(Z, 0.0));
  m.q_y_given_x = w1;
  m.q_z_given_y = w2;
  m.u_defined.assign(U, 0);
  for (int u = 0; u < U; ++u) {
    const double pu = j.p_u()[u];
    m.u_defined[u] = pu > 0.0 ? 1 : 0;
    for (int x = 0; x < X; ++x) {
      const double pxu = j.p_x_given_u()(u, x);
      if (pxu == 0.0) continue;
      if (pu > 0.0) m.q_x[x] += pu * pxu;
      for (int y = 0; y < Y; ++y) {
        const double wy = w1(x, y);
        if (wy == 0.0) continue;
        m.q_y_given_u[u][y] += pxu * wy;
        if (pu > 0.0) m.q_y[y] += pu * pxu * wy;
        for (int z = 0; z < Z; ++z) {
          const double wz = w2(y, z);
          if (wz == 0.0) continue;
          m.q_z_given_u[u][z] += pxu * wy * wz;
          if (pu > 0.0) m.q_z[z] += pu * pxu * wy * wz;
        }
      }
    }
    if (pu == 0.0) {
      // zero-mass conditioning symbol: rows stay, flag says "do not read"
      std::fill(m.q_y_given_u[u].begin(), m.q_y_given_u[u].end(), 0.0);
      std::fill(m.q_z_given_u[u].begin(), m.q_z_given_u[u].end(), 0.0);
    }
  }
  return m;
}

double entropy(const Vec& p) {
  Kahan s;
  for (double v : p)
    if (v > 0.0) s.add(-v * std::log(v));
  return s.value();
}

double binary_entropy(double p) {
  Vec v{p, 1.0 - p};
  return entropy(v);
}

double mutual_information(const Mat& joint_ab) {
  const size_t A = joint_ab.size();
  if (A == 0) return 0.0;
  const size_t B = joint_ab[0].size();
  Vec pa(A, 0.0), pb(B, 0.0);
  for (size_t a = 0; a < A; ++a)
    for (size_t b = 0; b < B; ++b) {
      pa[a] += joint_ab[a][b];
      pb[b] += joint_ab[a][b];
    }
  Kahan s;
  for (size_t a = 0; a < A; ++a)
    for (size_t b = 0; b < B; ++b) {
      const double pab = joint_ab[a][b];
      if (pab > 0.0) s.add(pab * std::log(pab / (pa[a] * pb[b])));
    }
  return s.value();
}

double conditional_mutual_information(const std::vector<Mat>& joint_cab) {
  Kahan total;
  for (const Mat& slice : joint_cab) {
    double pc = 0.0;
    for (const auto& row : slice)
      for (double v : row) pc += v;
    if (pc <= 0.0) continue;
    Mat cond = slice;
    for (auto& row : cond)
      for (double& v : row) v /= pc;
    total.add(pc * mutual_information(cond));
  }
  return total.value();
}

Mat joint_u_z(const AuxiliaryJoint& j) {
  Marginals m = marginals(j);
  Mat out(j.u_size(), Vec(j.z_size(), 0.0));
  for (int u = 0; u < j.u_size(); ++u)
    for (int z = 0; z < j.z_size(); ++z) out[u][z] = j.p_u()[u] * m.q_z_given_u[u][z];
  return out;
}

Mat joint_u_y(const AuxiliaryJoint& j) {
  Marginals m = marginals(j);
  Mat out(j.u_size(), Vec(j.y_size(), 0.0));
  for (int u = 0; u < j.u_size(); ++u)
    for (int y = 0; y < j.y_size(); ++y) out[u][y] = j.p_u()[u] * m.q_y_given_u[u][y];
  return out;
}

Mat joint_x_y(const AuxiliaryJoint& j) {
  Marginals m = marginals(j);
  Mat out(j.x_size(), Vec(j.y_size(), 0.0));
  for (int x = 0; x < j.x_size(); ++x)
    for (int y = 0; y < j.y_size(); ++y) out[x][y] = m.q_x[x] * j.channel().w1()(x, y);
  return out;
}

Mat joint_x_z(const AuxiliaryJoint& j) {
  Marginals m = marginals(j);
  StochasticMatrix wc = compose(j.channel().w1(), j.channel().w2());
  Mat out(j.x_size(), Vec(j.z_size(), 0.0));
  for (int x = 0; x < j.x_size(); ++x)
    for (int z = 0; z < j.z_size(); ++z) out[x][z] = m.q_x[x] * wc(x, z);
  return out;
}

std::vector<Mat> joint_u_x_y(const AuxiliaryJoint& j) {
  std::vector<Mat> out(j.u_size(), Mat(j.x_size(), Vec(j.y_size(), 0.0)));
  for (int u = 0; u < j.u_size(); ++u)
    for (int x = 0; x < j.x_size(); ++x)
      for (int y = 0; y < j.y_size(); ++y)
        out[u][x][y] = j.p_u()[u] * j.p_x_given_u()(u, x) * j.channel().w1()(x, y);
  return out;
}

double info_x_y_given_u(const AuxiliaryJoint& j) {
  return conditional_mutual_information(joint_u_x_y(j));
}

double info_u_z(const AuxiliaryJoint& j) { return mutual_information(joint_u_z(j)); }

}  // namespace dbx
