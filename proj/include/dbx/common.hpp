#pragma once
// Shared numeric plumbing: tolerance constants, compensated summation,
// streaming log-sum-exp, mixed-radix sequence indexing, error types.
//
// All rates and exponents throughout the library are in nats.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dbx {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

inline constexpr double kSimplexTol = 1e-9;      // distribution validation
inline constexpr double kOracleTol = 1e-10;      // comparisons against independent oracles
inline constexpr double kOptTol = 1e-4;          // accuracy expected of the simplex optimizers
inline constexpr double kInteriorFloor = 1e-12;  // floor applied inside optimizer iterates only
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Thrown when an exact enumeration would exceed its term budget.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on malformed input files / specs; message carries field diagnostics.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Neumaier compensated summation.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// One-pass log-sum-exp accumulator; order-deterministic.
struct StreamingLse {
  double peak = -kInf;
  double acc = 0.0;
  void add(double x) {
    if (x == -kInf) return;
    if (x <= peak) {
      acc += std::exp(x - peak);
    } else {
      acc = acc * std::exp(peak - x) + 1.0;
      peak = x;
    }
  }
  double value() const { return acc == 0.0 ? -kInf : peak + std::log(acc); }
};

inline long ipow(long base, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Big-endian digits of idx in the given base (first symbol most significant).
inline void decode_seq(long idx, int base, int n, int* out) {
  for (int t = n - 1; t >= 0; --t) {
    out[t] = static_cast<int>(idx % base);
    idx /= base;
  }
}

inline long encode_seq(const int* sym, int base, int n) {
  long idx = 0;
  for (int t = 0; t < n; ++t) idx = idx * base + sym[t];
  return idx;
}

// log with the 0*log(0)=0 convention handled by callers; plain guard here.
inline double safe_log(double x) { return std::log(x); }

// Printed form used for every numeric output surface (17 significant digits
// round-trips doubles exactly).
std::string fmt17(double x);

Vec log_space_grid(double lo, double hi, int points);
Vec lin_space_grid(double lo, double hi, int points);

}  // namespace dbx
