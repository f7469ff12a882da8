#pragma once
// Exact algebra over finite probability distributions, row-stochastic
// kernels and the auxiliary joints q_{UXYZ} = q_U q_{X|U} W1 W2 used by a
// degraded broadcast channel X -> Y -> Z. Everything is immutable after
// construction and safe to share across threads.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbx/common.hpp"

namespace dbx {

struct ValidationIssue {
  std::string what;
  long index;
  double magnitude;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// Reports, never throws.
ValidationReport validate_distribution(const Vec& p, double tol = kSimplexTol);
ValidationReport validate_kernel(const Mat& rows, double tol = kSimplexTol);

// A point on a finite probability simplex.
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(Vec probs);  // throws std::invalid_argument on violation
  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[i]; }
  const Vec& probs() const { return probs_; }

 private:
  Vec probs_;
};

// Row-stochastic kernel; one ProbVector per input symbol.
class StochasticMatrix {
 public:
  StochasticMatrix() = default;
  explicit StochasticMatrix(Mat rows);  // throws std::invalid_argument on violation
  int input_size() const { return static_cast<int>(rows_.size()); }
  int output_size() const { return rows_.empty() ? 0 : static_cast<int>(rows_[0].size()); }
  double operator()(int in, int out) const { return rows_[in][out]; }
  const Vec& row(int in) const { return rows_[in]; }
  const Mat& rows() const { return rows_; }

 private:
  Mat rows_;
};

StochasticMatrix identity_kernel(int n);
StochasticMatrix uniform_kernel(int in, int out);
StochasticMatrix binary_symmetric(double crossover);

// X->Z marginal kernel of a cascade: sum_y w1(y|x) w2(z|y).
StochasticMatrix compose(const StochasticMatrix& w1, const StochasticMatrix& w2);

// The channel pair (W1: X->Y, W2: Y->Z).
class DegradedPair {
 public:
  DegradedPair() = default;
  DegradedPair(StochasticMatrix w1, StochasticMatrix w2);  // throws on dim mismatch
  const StochasticMatrix& w1() const { return w1_; }
  const StochasticMatrix& w2() const { return w2_; }
  int x_size() const { return w1_.input_size(); }
  int y_size() const { return w1_.output_size(); }
  int z_size() const { return w2_.output_size(); }

 private:
  StochasticMatrix w1_, w2_;
};

// q_{UXYZ}(u,x,y,z) = p_U(u) p_{X|U}(x|u) W1(y|x) W2(z|y); the Markov chain
// U - X - Y - Z holds by construction.
class AuxiliaryJoint {
 public:
  AuxiliaryJoint() = default;
  AuxiliaryJoint(ProbVector p_u, StochasticMatrix p_x_given_u, DegradedPair channel);
  int u_size() const { return p_u_.size(); }
  int x_size() const { return channel_.x_size(); }
  int y_size() const { return channel_.y_size(); }
  int z_size() const { return channel_.z_size(); }
  const ProbVector& p_u() const { return p_u_; }
  const StochasticMatrix& p_x_given_u() const { return p_x_given_u_; }
  const DegradedPair& channel() const { return channel_; }
  double mass(int u, int x, int y, int z) const {
    return p_u_[u] * p_x_given_u_(u, x) * channel_.w1()(x, y) * channel_.w2()(y, z);
  }

 private:
  ProbVector p_u_;
  StochasticMatrix p_x_given_u_;
  DegradedPair channel_;
};

// Everything observable about an auxiliary joint in one pass. Rows of the
// conditionals are valid only where u_defined[u] != 0 (callers must not read
// a conditional given a zero-probability symbol). q_y_given_x and
// q_z_given_y equal the channel kernels exactly; the factorization makes
// that an identity, not an approximation.
struct Marginals {
  Vec q_x, q_y, q_z;
  Mat q_y_given_u, q_z_given_u;
  StochasticMatrix q_y_given_x, q_z_given_y;
  std::vector<uint8_t> u_defined;
};

Marginals marginals(const AuxiliaryJoint& j);

// Information measures, natural log, 0*log(0) = 0.
double entropy(const Vec& p);
double binary_entropy(double p);
double mutual_information(const Mat& joint_ab);
// joint_cab[c][a][b] = p(c,a,b); returns I(A;B|C).
double conditional_mutual_information(const std::vector<Mat>& joint_cab);

// Convenience joints for an auxiliary distribution.
Mat joint_u_z(const AuxiliaryJoint& j);
Mat joint_u_y(const AuxiliaryJoint& j);
Mat joint_x_y(const AuxiliaryJoint& j);
Mat joint_x_z(const AuxiliaryJoint& j);
std::vector<Mat> joint_u_x_y(const AuxiliaryJoint& j);  // indexed [u][x][y]

double info_x_y_given_u(const AuxiliaryJoint& j);  // I(X;Y|U)
double info_u_z(const AuxiliaryJoint& j);          // I(U;Z)

}  // namespace dbx
