// dbx — command-line front end for the degraded broadcast channel toolkit.
// Thin shell over the C API: parse flags, run, print the report. Exit codes
// follow the dbx_status convention (0 ok, 1 usage, 2 parse, 3 budget,
// 4 verification failure, 5 internal).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbx.h"

namespace {

int fail_with(dbx_status st) {
  std::cerr << "error: " << dbx_last_error() << "\n";
  return static_cast<int>(st);
}

bool parse_rates(const std::string& text, bool bits, double* r1, double* r2) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return false;
  try {
    *r1 = std::stod(text.substr(0, comma));
    *r2 = std::stod(text.substr(comma + 1));
  } catch (...) {
    return false;
  }
  if (bits) {
    *r1 *= std::log(2.0);
    *r2 *= std::log(2.0);
  }
  return *r1 >= 0.0 && *r2 >= 0.0;
}

bool write_file(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

int emit(dbx_report* rep, const std::string& out_path, const std::string& csv_path) {
  int rc = 0;
  if (out_path.empty()) {
    std::cout << dbx_report_json(rep) << "\n";
  } else if (!write_file(out_path, dbx_report_json(rep))) {
    std::cerr << "error: cannot write " << out_path << "\n";
    rc = 5;
  }
  if (!csv_path.empty() && rc == 0) {
    if (!write_file(csv_path, dbx_report_csv(rep))) {
      std::cerr << "error: cannot write " << csv_path << "\n";
      rc = 5;
    }
  }
  dbx_report_free(rep);
  return rc;
}

struct ChannelGuard {
  dbx_channel* ch = nullptr;
  ~ChannelGuard() { dbx_channel_free(ch); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dbx — capacity region, strong-converse exponent bound and finite-n "
               "verification for degraded broadcast channels"};
  app.require_subcommand(1);

  dbx_run_opts opts;
  dbx_run_opts_init(&opts);
  dbx_grid mu_grid, lambda_grid;
  dbx_grid_init_mu(&mu_grid);
  dbx_grid_init_lambda(&lambda_grid);

  std::string channel_path, rates_text, out_path, csv_path, grid_csv_path;
  bool bits = false, no_timing = false;
  double slack = 0.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opts.seed, "master seed");
    cmd->add_option("--restarts", opts.restarts, "optimizer restarts");
    cmd->add_option("--threads", opts.threads, "worker cap (0 = DBX_THREADS/all cores)");
    cmd->add_option("--out", out_path, "write the JSON report here instead of stdout");
    cmd->add_flag("--no-timing", no_timing, "omit wall time from the report");
  };
  auto add_mu = [&](CLI::App* cmd) {
    cmd->add_option("--mu-min", mu_grid.lo, "smallest mu");
    cmd->add_option("--mu-max", mu_grid.hi, "largest mu");
    cmd->add_option("--mu-points", mu_grid.points, "mu grid size");
  };
  auto add_lambda = [&](CLI::App* cmd) {
    cmd->add_option("--lambda-min", lambda_grid.lo, "smallest lambda");
    cmd->add_option("--lambda-max", lambda_grid.hi, "largest lambda");
    cmd->add_option("--lambda-points", lambda_grid.points, "lambda grid size");
  };

  // capacity
  auto* cap = app.add_subcommand("capacity", "hyperplane profile C^(mu) over a mu grid");
  cap->add_option("--channel", channel_path, "channel spec (JSON)")->required();
  cap->add_option("--csv", csv_path, "write the (mu, c_mu) table here");
  add_mu(cap);
  add_common(cap);

  // region
  auto* reg = app.add_subcommand("region", "capacity-region membership for a rate pair");
  reg->add_option("--channel", channel_path, "channel spec (JSON)")->required();
  reg->add_option("--rates", rates_text, "R1,R2 (nats unless --bits)")->required();
  reg->add_option("--slack", slack, "membership slack");
  reg->add_flag("--bits", bits, "rates given in bits");
  add_mu(reg);
  add_common(reg);

  // exponent
  auto* expo = app.add_subcommand("exponent", "exponent lower bound F(R1,R2)");
  expo->add_option("--channel", channel_path, "channel spec (JSON)")->required();
  expo->add_option("--rates", rates_text, "R1,R2 (nats unless --bits)")->required();
  expo->add_flag("--bits", bits, "rates given in bits");
  expo->add_option("--grid-csv", grid_csv_path, "write the full (mu,lambda,F) table here");
  add_mu(expo);
  add_lambda(expo);
  add_common(expo);

  // verify
  std::string suite;
  int vn = 2, vtrials = 100;
  auto* ver = app.add_subcommand("verify", "randomized finite-n inequality suites");
  ver->add_option("suite", suite,
                  "lemma1|lemma2|prop1|lemma6|holder|prop2|percode|appendixC")
      ->required();
  ver->add_option("--n", vn, "blocklength")->required();
  ver->add_option("--trials", vtrials, "number of randomized trials")->required();
  ver->add_option("--seed", opts.seed, "trial seed")->required();
  ver->add_option("--channel", channel_path, "fixed channel (default: random per trial)");
  ver->add_option("--rates", rates_text, "rates for the per-code suite");
  ver->add_flag("--bits", bits, "rates given in bits");
  ver->add_option("--csv", csv_path, "write per-trial margins here");
  ver->add_option("--restarts", opts.restarts, "optimizer restarts");
  ver->add_option("--threads", opts.threads, "worker cap");
  ver->add_option("--out", out_path, "write the JSON report here instead of stdout");
  ver->add_flag("--no-timing", no_timing, "omit wall time from the report");

  // simulate
  std::string n_list_text = "8,16,32";
  long samples = 0;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo correct-probability decay");
  sim->add_option("--channel", channel_path, "channel spec (JSON)")->required();
  sim->add_option("--rates", rates_text, "R1,R2 (nats unless --bits)")->required();
  sim->add_flag("--bits", bits, "rates given in bits");
  sim->add_option("--n", n_list_text, "comma-separated blocklengths");
  sim->add_option("--samples", samples, "samples per blocklength")->required();
  sim->add_option("--csv", csv_path, "write the decay table here");
  add_common(sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }
  opts.include_timing = no_timing ? 0 : 1;

  ChannelGuard guard;
  if (!channel_path.empty()) {
    dbx_status st = dbx_channel_from_file(channel_path.c_str(), &guard.ch);
    if (st != DBX_OK) return fail_with(st);
  }

  double r1 = 0.0, r2 = 0.0;
  if (!rates_text.empty() && !parse_rates(rates_text, bits, &r1, &r2)) {
    std::cerr << "error: --rates expects non-negative R1,R2\n";
    return 1;
  }

  dbx_report* rep = nullptr;
  if (app.got_subcommand(cap)) {
    dbx_status st = dbx_run_capacity(guard.ch, &mu_grid, &opts, &rep);
    if (st != DBX_OK) return fail_with(st);
    return emit(rep, out_path, csv_path);
  }
  if (app.got_subcommand(reg)) {
    dbx_status st = dbx_run_region(guard.ch, r1, r2, slack, &mu_grid, &opts, &rep);
    if (st != DBX_OK) return fail_with(st);
    return emit(rep, out_path, csv_path);
  }
  if (app.got_subcommand(expo)) {
    dbx_status st = dbx_run_exponent(guard.ch, r1, r2, &mu_grid, &lambda_grid,
                                     grid_csv_path.empty() ? 0 : 1, &opts, &rep);
    if (st != DBX_OK) return fail_with(st);
    return emit(rep, out_path, grid_csv_path);
  }
  if (app.got_subcommand(ver)) {
    if (rates_text.empty()) {
      r1 = 0.5;
      r2 = 0.3;
    }
    dbx_status st =
        dbx_run_verify(suite.c_str(), vn, vtrials, opts.seed, guard.ch, r1, r2, &opts, &rep);
    if (st != DBX_OK) return fail_with(st);
    const int all_hold = dbx_report_all_hold(rep);
    int rc = emit(rep, out_path, csv_path);
    if (rc != 0) return rc;
    return all_hold == 1 ? 0 : 4;
  }
  if (app.got_subcommand(sim)) {
    std::vector<int> ns;
    size_t pos = 0;
    while (pos <= n_list_text.size()) {
      const size_t comma = n_list_text.find(',', pos);
      const std::string tok = n_list_text.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!tok.empty()) {
        int v = std::atoi(tok.c_str());
        if (v <= 0) {
          std::cerr << "error: --n expects positive integers\n";
          return 1;
        }
        ns.push_back(v);
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (ns.empty()) {
      std::cerr << "error: --n expects at least one blocklength\n";
      return 1;
    }
    dbx_status st = dbx_run_simulate(guard.ch, r1, r2, ns.data(),
                                     static_cast<int>(ns.size()), samples, opts.seed,
                                     &opts, &rep);
    if (st != DBX_OK) return fail_with(st);
    return emit(rep, out_path, csv_path);
  }
  return 1;
}
