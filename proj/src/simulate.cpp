#include "dbx/simulate.hpp"

#include <cmath>

#include "dbx/common.hpp"
#include "dbx/parallel.hpp"
#include "dbx/rng.hpp"

namespace dbx {

namespace {

int sample_from(const Vec& p, double u) {
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

// One transmission with a fresh superposition codebook; returns 1 on joint
// decoding success under per-receiver maximum-likelihood decoding.
int run_sample(const SuperpositionSpec& spec, const DegradedPair& ch,
               const StochasticMatrix& wc, int n, long K, long L, Rng& rng) {
  const auto& w1 = ch.w1();
  const auto& w2 = ch.w2();

  // cloud centers u^n(l), satellites x^n(k,l)
  std::vector<int> clouds(static_cast<size_t>(L) * n);
  for (long l = 0; l < L; ++l)
    for (int t = 0; t < n; ++t)
      clouds[l * n + t] = sample_from(spec.p_u.probs(), rng.u01());
  std::vector<int> book(static_cast<size_t>(K) * L * n);
  for (long k = 0; k < K; ++k)
    for (long l = 0; l < L; ++l)
      for (int t = 0; t < n; ++t)
        book[(k * L + l) * n + t] =
            sample_from(spec.p_x_given_u.row(clouds[l * n + t]), rng.u01());

  const long k_true = static_cast<long>(rng.next_u64() % static_cast<uint64_t>(K));
  const long l_true = static_cast<long>(rng.next_u64() % static_cast<uint64_t>(L));
  std::vector<int> y(n), z(n);
  for (int t = 0; t < n; ++t) {
    const int x = book[(k_true * L + l_true) * n + t];
    y[t] = sample_from(w1.row(x), rng.u01());
    z[t] = sample_from(w2.row(y[t]), rng.u01());
  }

  // log-likelihood of each codeword against y (through W1) and z (through
  // the cascade); -inf marks an impossible codeword
  std::vector<double> ll_y(static_cast<size_t>(K) * L), ll_z(static_cast<size_t>(K) * L);
  for (long k = 0; k < K; ++k)
    for (long l = 0; l < L; ++l) {
      double sy = 0.0, sz = 0.0;
      for (int t = 0; t < n; ++t) {
        const int x = book[(k * L + l) * n + t];
        const double py = w1(x, y[t]);
        const double pz = wc(x, z[t]);
        sy = (py > 0.0 && sy != -kInf) ? sy + std::log(py) : -kInf;
        sz = (pz > 0.0 && sz != -kInf) ? sz + std::log(pz) : -kInf;
      }
      ll_y[k * L + l] = sy;
      ll_z[k * L + l] = sz;
    }

  // receiver 1: argmax_k sum_l W1^n(y|x(k,l)); ties to the smallest index
  long k_hat = 0;
  double best1 = -kInf;
  for (long k = 0; k < K; ++k) {
    StreamingLse lse;
    for (long l = 0; l < L; ++l) lse.add(ll_y[k * L + l]);
    const double s = lse.value();
    if (s > best1) {
      best1 = s;
      k_hat = k;
    }
  }
  // receiver 2: argmax_l sum_k Wc^n(z|x(k,l))
  long l_hat = 0;
  double best2 = -kInf;
  for (long l = 0; l < L; ++l) {
    StreamingLse lse;
    for (long k = 0; k < K; ++k) lse.add(ll_z[k * L + l]);
    const double s = lse.value();
    if (s > best2) {
      best2 = s;
      l_hat = l;
    }
  }
  return (k_hat == k_true && l_hat == l_true) ? 1 : 0;
}

// 95% Wilson interval.
void wilson(double successes, double samples, double* lo, double* hi) {
  const double zq = 1.959963984540054;
  const double p = successes / samples;
  const double z2 = zq * zq;
  const double denom = 1.0 + z2 / samples;
  const double center = (p + z2 / (2.0 * samples)) / denom;
  const double half =
      zq * std::sqrt(p * (1.0 - p) / samples + z2 / (4.0 * samples * samples)) / denom;
  *lo = std::max(0.0, center - half);
  *hi = std::min(1.0, center + half);
}

}  // namespace

SimPoint monte_carlo_pc(const SuperpositionSpec& spec, const DegradedPair& ch,
                        const RatePair& rates, int n, long samples, uint64_t seed,
                        double floor_value) {
  if (samples <= 0) throw std::invalid_argument("simulation needs samples > 0");
  if (n <= 0 || n > 64) throw std::invalid_argument("simulation blocklength out of range");
  if (spec.p_x_given_u.output_size() != ch.x_size())
    throw std::invalid_argument("codebook spec does not match the channel input");
  SimPoint pt;
  pt.n = n;
  pt.samples = samples;
  pt.k_size = static_cast<long>(std::ceil(std::exp(n * rates.r1) - 1e-9));
  pt.l_size = static_cast<long>(std::ceil(std::exp(n * rates.r2) - 1e-9));
  if (pt.k_size < 1) pt.k_size = 1;
  if (pt.l_size < 1) pt.l_size = 1;

  const StochasticMatrix wc = compose(ch.w1(), ch.w2());

  // Integer success counts per worker block keep the total independent of
  // the worker partition.
  const int workers = worker_count();
  std::vector<long> counts(workers, 0);
  const long chunk = (samples + workers - 1) / workers;
  parallel_for(workers, [&](long w) {
    long c = 0;
    const long lo = w * chunk, hi = std::min(samples, lo + chunk);
    for (long i = lo; i < hi; ++i) {
      Rng rng(seed, static_cast<uint64_t>(i) + 1);
      c += run_sample(spec, ch, wc, n, pt.k_size, pt.l_size, rng);
    }
    counts[w] = c;
  });
  long successes = 0;
  for (long c : counts) successes += c;

  pt.pc_hat = static_cast<double>(successes) / samples;
  wilson(static_cast<double>(successes), static_cast<double>(samples), &pt.ci_lo,
         &pt.ci_hi);
  pt.decay = pt.pc_hat > 0.0 ? -std::log(pt.pc_hat) / n : kInf;
  pt.floor = floor_value;
  // the converse must survive even the most favorable pc consistent with
  // the interval
  const double decay_at_hi = pt.ci_hi > 0.0 ? -std::log(pt.ci_hi) / n : kInf;
  pt.holds = decay_at_hi + 1e-12 >= floor_value;
  return pt;
}

}  // namespace dbx
