#include "dbx/verify.hpp"

#include <algorithm>
#include <cmath>

#include "dbx/parallel.hpp"
#include "dbx/rng.hpp"

namespace dbx {

std::optional<Suite> suite_from_name(const std::string& name) {
  if (name == "lemma1") return Suite::Lemma1;
  if (name == "lemma2") return Suite::Lemma2;
  if (name == "prop1") return Suite::Prop1;
  if (name == "lemma6") return Suite::Lemma6;
  if (name == "holder") return Suite::Holder;
  if (name == "prop2") return Suite::Prop2;
  if (name == "percode") return Suite::PerCode;
  if (name == "appendixC") return Suite::AppendixC;
  return std::nullopt;
}

const char* suite_name(Suite s) {
  switch (s) {
    case Suite::Lemma1: return "lemma1";
    case Suite::Lemma2: return "lemma2";
    case Suite::Prop1: return "prop1";
    case Suite::Lemma6: return "lemma6";
    case Suite::Holder: return "holder";
    case Suite::Prop2: return "prop2";
    case Suite::PerCode: return "percode";
    case Suite::AppendixC: return "appendixC";
  }
  return "?";
}

std::vector<std::string> suite_names() {
  return {"lemma1", "lemma2", "prop1", "lemma6", "holder", "prop2", "percode", "appendixC"};
}

DegradedPair default_cascade() {
  return DegradedPair(binary_symmetric(0.1), binary_symmetric(0.1));
}

double estimated_terms(const VerifyOptions& opts) {
  const int X = opts.channel ? opts.channel->x_size() : 2;
  const int Y = opts.channel ? opts.channel->y_size() : 2;
  const int Z = opts.channel ? opts.channel->z_size() : 2;
  // worst-case message sizes drawn by the trial generator
  double kl = 9.0;
  if (opts.suite == Suite::PerCode) {
    const double K = std::ceil(std::exp(opts.n * opts.rates.r1));
    const double L = std::ceil(std::exp(opts.n * opts.rates.r2));
    kl = K * L;
  }
  return kl * std::pow(static_cast<double>(X) * Y * Z, opts.n);
}

namespace {

DegradedPair random_binary_channel(Rng& rng) {
  Mat w1(2), w2(2);
  for (int r = 0; r < 2; ++r) {
    w1[r] = rng.dirichlet_floored(2, 1e-3);
    w2[r] = rng.dirichlet_floored(2, 1e-3);
  }
  return DegradedPair(StochasticMatrix(std::move(w1)), StochasticMatrix(std::move(w2)));
}

struct TrialContext {
  DegradedPair channel;
  BlockCode code;
  RatePair rates;
};

TrialContext make_trial_instance(const VerifyOptions& opts, Rng& rng) {
  TrialContext ctx;
  ctx.channel = opts.channel ? *opts.channel : random_binary_channel(rng);
  const int K = 1 + rng.uniform_int(3);
  const int L = 1 + rng.uniform_int(3);
  const bool map_dec = rng.u01() < 0.5;
  ctx.code = random_code(opts.n, ctx.channel, K, L, rng, map_dec);
  ctx.rates = RatePair(std::log(static_cast<double>(K)) / opts.n,
                       std::log(static_cast<double>(L)) / opts.n);
  return ctx;
}

Mat random_q_yz_given_l(const TrialContext& ctx, int n, Rng& rng) {
  const long sz = ipow(ctx.channel.y_size(), n) * ipow(ctx.channel.z_size(), n);
  Mat q(ctx.code.l_size);
  for (auto& row : q) row = rng.dirichlet(static_cast<int>(sz));
  return q;
}

TrialOutcome run_trial(const VerifyOptions& opts, uint64_t trial_index,
                       const ExponentReport* percode_report) {
  Rng rng(opts.seed, trial_index + 1);
  TrialOutcome out;
  switch (opts.suite) {
    case Suite::Lemma1: {
      TrialContext ctx = make_trial_instance(opts, rng);
      const double eta = rng.uniform(0.05, 1.0);
      Mat qyz = random_q_yz_given_l(ctx, opts.n, rng);
      Vec qz = rng.dirichlet(static_cast<int>(ipow(ctx.channel.z_size(), opts.n)));
      CheckResult r =
          correct_prob_event_bound(ctx.code, ctx.channel, ctx.rates, eta, qyz, qz);
      out = {r.holds, r.margin, r.lhs, r.rhs};
      break;
    }
    case Suite::AppendixC: {
      TrialContext ctx = make_trial_instance(opts, rng);
      const double eta = rng.uniform(0.05, 1.0);
      Mat qyz = random_q_yz_given_l(ctx, opts.n, rng);
      Vec qz = rng.dirichlet(static_cast<int>(ipow(ctx.channel.z_size(), opts.n)));
      SlackBreakdown r = threshold_slack_breakdown(ctx.code, ctx.channel, eta, qyz, qz);
      out = {r.holds, r.margin, std::max(r.delta1, r.delta2), r.per_term_cap};
      break;
    }
    case Suite::Lemma2: {
      TrialContext ctx = make_trial_instance(opts, rng);
      const double eta = rng.uniform(0.05, 1.0);
      NLetterTestDist qn =
          NLetterTestDist::random(opts.n, ctx.code.l_size, ctx.channel, rng);
      CheckResult r = per_letter_event_bound(ctx.code, ctx.channel, ctx.rates, eta, qn);
      out = {r.holds, r.margin, r.lhs, r.rhs};
      break;
    }
    case Suite::Prop1: {
      TrialContext ctx = make_trial_instance(opts, rng);
      const double mu = std::exp(rng.uniform(std::log(0.25), std::log(4.0)));
      const double theta = rng.uniform(0.1, 0.9);
      NLetterTestDist qn =
          NLetterTestDist::random(opts.n, ctx.code.l_size, ctx.channel, rng);
      CorrectProbBound r =
          correct_prob_exponent_bound(ctx.code, ctx.channel, ctx.rates, mu, theta, qn);
      out = {r.holds, r.margin, r.pc, r.bound};
      break;
    }
    case Suite::Lemma6: {
      TrialContext ctx = make_trial_instance(opts, rng);
      const double mu = std::exp(rng.uniform(std::log(0.25), std::log(4.0)));
      const double theta = rng.uniform(0.1, 0.9);
      NLetterTestDist qn =
          NLetterTestDist::random(opts.n, ctx.code.l_size, ctx.channel, rng);
      TelescopeTrace trace = telescope(ctx.code, ctx.channel, mu, theta, qn);
      const double direct = code_cumulant(ctx.code, ctx.channel, mu, theta, qn);
      const double diff = std::abs(trace.log_c_n - direct);
      out.lhs = trace.log_c_n;
      out.rhs = direct;
      out.margin = 1e-10 - diff;
      out.holds = diff <= 1e-10 && trace.max_norm_residual <= 1e-10 &&
                  trace.max_recursion_residual <= 1e-12 &&
                  std::abs(trace.log_c_n - std::log(trace.c_values[trace.n])) <= 1e-12;
      break;
    }
    case Suite::Holder: {
      TrialContext ctx = make_trial_instance(opts, rng);
      const double mu = std::exp(rng.uniform(std::log(0.25), std::log(4.0)));
      const double theta = rng.uniform(0.1, 0.9);
      const double lambda = theta / (1.0 - theta);
      OptConfig ocfg = opts.opt;
      ocfg.seed = derive_stream(opts.seed, trial_index + 0x5000);
      OmegaResult omega = max_tilted_cumulant(ctx.channel, mu, lambda, ocfg);
      auto steps = holder_chain_check(ctx.code, ctx.channel, mu, theta, omega.value);
      out.holds = true;
      out.margin = kInf;
      for (const auto& s : steps) {
        out.holds = out.holds && s.holds && std::abs(s.unit_mean_residual) <= 1e-9;
        out.margin = std::min(out.margin, s.margin);
        out.lhs = std::max(out.lhs, s.log_phi);
        out.rhs = omega.value / (1.0 + lambda);
      }
      break;
    }
    case Suite::Prop2: {
      TrialContext ctx = make_trial_instance(opts, rng);
      const double mu = std::exp(rng.uniform(std::log(0.25), std::log(4.0)));
      const double theta = rng.uniform(0.1, 0.9);
      const double lambda = theta / (1.0 - theta);
      OptConfig ocfg = opts.opt;
      ocfg.seed = derive_stream(opts.seed, trial_index + 0x7000);
      OmegaResult omega = max_tilted_cumulant(ctx.channel, mu, lambda, ocfg);
      CheckResult r =
          cumulant_chain_check(ctx.code, ctx.channel, mu, theta, omega.value);
      out = {r.holds, r.margin, r.lhs, r.rhs};
      break;
    }
    case Suite::PerCode: {
      const DegradedPair& ch = *opts.channel;
      const int K = static_cast<int>(std::ceil(std::exp(opts.n * opts.rates.r1) - 1e-9));
      const int L = static_cast<int>(std::ceil(std::exp(opts.n * opts.rates.r2) - 1e-9));
      BlockCode code = random_code(opts.n, ch, std::max(1, K), std::max(1, L), rng, true);
      ConverseCheck r = per_code_converse(code, ch, opts.rates, *percode_report);
      out.holds = r.holds;
      out.lhs = r.floor;
      out.rhs = r.decay;
      out.margin = r.decay == kInf ? kInf : r.decay - r.floor;
      break;
    }
  }
  return out;
}

}  // namespace

SuiteReport run_suite(const VerifyOptions& opts) {
  if (opts.n <= 0) throw std::invalid_argument("verify: n must be positive");
  if (opts.trials <= 0) throw std::invalid_argument("verify: trials must be positive");
  const double terms = estimated_terms(opts);
  if (terms > opts.budget)
    throw BudgetError("verify run would need about " + fmt17(terms) +
                      " enumeration terms per trial, budget is " + fmt17(opts.budget));

  VerifyOptions local = opts;
  SuiteReport rep;
  rep.suite = opts.suite;
  rep.n = opts.n;
  rep.seed = opts.seed;
  rep.trials.resize(opts.trials);

  ExponentGrid percode_grid;
  ExponentReport percode_report;
  const ExponentGrid* grid_ptr = nullptr;
  if (opts.suite == Suite::PerCode) {
    if (!local.channel) local.channel = default_cascade();
    if (opts.precomputed_grid) {
      grid_ptr = opts.precomputed_grid;
    } else {
      OptConfig gcfg = opts.opt;
      gcfg.seed = derive_stream(opts.seed, 0x9000);
      percode_grid = build_exponent_grid(
          *local.channel, log_space_grid(opts.grid_lo, opts.grid_hi, opts.mu_points),
          log_space_grid(opts.grid_lo, opts.grid_hi, opts.lambda_points), gcfg);
      grid_ptr = &percode_grid;
    }
    percode_report = exponent_lower_bound(*grid_ptr, opts.rates);
    rep.f_value = percode_report.f_value;
    rep.floor = percode_report.f_value - std::log(3.0) / opts.n;
  }

  parallel_for(opts.trials, [&](long i) {
    rep.trials[i] = run_trial(local, static_cast<uint64_t>(i), &percode_report);
  });

  rep.all_hold = true;
  rep.min_margin = kInf;
  for (const auto& t : rep.trials) {
    rep.all_hold = rep.all_hold && t.holds;
    rep.min_margin = std::min(rep.min_margin, t.margin);
  }
  return rep;
}

}  // namespace dbx
