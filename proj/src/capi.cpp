// extern-C facade over the toolkit. Every run returns a report handle that
// owns its JSON document and an optional CSV table; handles never share
// state, so distinct handles are safe on distinct threads.

#include "dbx.h"

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbx/capacity.hpp"
#include "dbx/channel_io.hpp"
#include "dbx/common.hpp"
#include "dbx/converse.hpp"
#include "dbx/exponent.hpp"
#include "dbx/parallel.hpp"
#include "dbx/prob.hpp"
#include "dbx/simulate.hpp"
#include "dbx/verify.hpp"

using nlohmann::json;

struct dbx_channel {
  dbx::DegradedPair ch;
  std::string name;
};

struct dbx_report {
  json doc;
  std::string json_text;
  std::string csv_text;
  int all_hold = -1;
};

namespace {

thread_local std::string g_last_error;

dbx_status fail(dbx_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

dbx_status capture(const std::exception& e) {
  if (dynamic_cast<const dbx::ParseError*>(&e)) return fail(DBX_E_PARSE, e.what());
  if (dynamic_cast<const dbx::BudgetError*>(&e)) return fail(DBX_E_BUDGET, e.what());
  if (dynamic_cast<const std::invalid_argument*>(&e)) return fail(DBX_E_USAGE, e.what());
  return fail(DBX_E_INTERNAL, e.what());
}

dbx::OptConfig to_opt(const dbx_run_opts* o) {
  dbx::OptConfig cfg;
  if (o) {
    if (o->restarts > 0) cfg.restarts = o->restarts;
    if (o->max_iters > 0) cfg.max_iters = o->max_iters;
    cfg.u_size = o->u_size;
    cfg.seed = o->seed;
    cfg.threads = o->threads;
  }
  return cfg;
}

dbx::Vec grid_of(const dbx_grid* g, dbx::Vec (*fallback)()) {
  if (!g) return fallback();
  return dbx::log_space_grid(g->lo, g->hi, g->points);
}

json opts_echo(const dbx_run_opts* o) {
  json j;
  j["restarts"] = o && o->restarts > 0 ? o->restarts : 16;
  j["max_iters"] = o && o->max_iters > 0 ? o->max_iters : 400;
  j["u_size"] = o ? o->u_size : 0;
  j["threads"] = o ? o->threads : 0;
  return j;
}

json grid_echo(const dbx::Vec& g) {
  json j;
  j["lo"] = g.front();
  j["hi"] = g.back();
  j["points"] = g.size();
  return j;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

dbx_report* finish(json doc, std::string csv, int all_hold, const dbx_run_opts* opts,
                   const Stopwatch& sw) {
  const bool timing = !opts || opts->include_timing != 0;
  if (timing) doc["wall_time_s"] = sw.seconds();
  auto* rep = new dbx_report;
  rep->doc = std::move(doc);
  rep->json_text = rep->doc.dump(2);
  rep->csv_text = std::move(csv);
  rep->all_hold = all_hold;
  return rep;
}

json point_json(const dbx::SimplexPoint& p) {
  json j;
  j["p_u"] = p.p_u;
  json rows = json::array();
  for (const auto& r : p.p_x_u) rows.push_back(r);
  j["p_x_given_u"] = rows;
  return j;
}

json joint_json(const dbx::AuxiliaryJoint& a) {
  dbx::SimplexPoint p{a.p_u().probs(), a.p_x_given_u().rows()};
  return point_json(p);
}

}  // namespace

extern "C" {

dbx_status dbx_channel_from_json(const char* json_text, dbx_channel** out) {
  if (!json_text || !out) return fail(DBX_E_USAGE, "null argument");
  try {
    dbx::ChannelSpec spec = dbx::parse_channel_json(json_text);
    *out = new dbx_channel{std::move(spec.channel), std::move(spec.name)};
    return DBX_OK;
  } catch (const std::exception& e) {
    return capture(e);
  }
}

dbx_status dbx_channel_from_file(const char* path, dbx_channel** out) {
  if (!path || !out) return fail(DBX_E_USAGE, "null argument");
  try {
    dbx::ChannelSpec spec = dbx::load_channel_file(path);
    *out = new dbx_channel{std::move(spec.channel), std::move(spec.name)};
    return DBX_OK;
  } catch (const std::exception& e) {
    return capture(e);
  }
}

void dbx_channel_free(dbx_channel* ch) { delete ch; }

int dbx_channel_x_size(const dbx_channel* ch) { return ch ? ch->ch.x_size() : 0; }
int dbx_channel_y_size(const dbx_channel* ch) { return ch ? ch->ch.y_size() : 0; }
int dbx_channel_z_size(const dbx_channel* ch) { return ch ? ch->ch.z_size() : 0; }

void dbx_run_opts_init(dbx_run_opts* opts) {
  if (!opts) return;
  opts->restarts = 16;
  opts->max_iters = 400;
  opts->u_size = 0;
  opts->seed = 1;
  opts->threads = 0;
  opts->include_timing = 1;
}

void dbx_grid_init_mu(dbx_grid* g) {
  if (!g) return;
  g->lo = 1e-3;
  g->hi = 1e3;
  g->points = 61;
}

void dbx_grid_init_lambda(dbx_grid* g) { dbx_grid_init_mu(g); }

dbx_status dbx_run_capacity(const dbx_channel* ch, const dbx_grid* mu,
                            const dbx_run_opts* opts, dbx_report** out) {
  if (!ch || !out) return fail(DBX_E_USAGE, "null argument");
  try {
    Stopwatch sw;
    dbx::Vec mu_grid = grid_of(mu, dbx::default_mu_grid);
    dbx::OptConfig cfg = to_opt(opts);
    std::vector<dbx::CmuResult> per_mu(mu_grid.size());
    dbx::parallel_for(static_cast<long>(mu_grid.size()), [&](long i) {
      dbx::OptConfig c = cfg;
      c.seed = dbx::derive_stream(cfg.seed, static_cast<uint64_t>(i));
      per_mu[i] = dbx::weighted_capacity(ch->ch, mu_grid[i], c);
    });
    json results;
    json rows = json::array();
    json argmaxes = json::array();
    dbx::CsvTable csv({"mu", "c_mu"});
    for (size_t i = 0; i < mu_grid.size(); ++i) {
      const dbx::CmuResult& r = per_mu[i];
      csv.add_row({mu_grid[i], r.value});
      json row;
      row["mu"] = mu_grid[i];
      row["c_mu"] = r.value;
      row["converged"] = r.converged;
      rows.push_back(row);
      argmaxes.push_back(joint_json(r.arg));
    }
    results["profile"] = rows;
    results["argmax"] = argmaxes;
    json doc;
    doc["command"] = "capacity";
    doc["channel"] = ch->name;
    doc["config"] = {{"mu_grid", grid_echo(mu_grid)}, {"optimizer", opts_echo(opts)}};
    doc["seed"] = cfg.seed;
    doc["results"] = results;
    *out = finish(std::move(doc), csv.str(), -1, opts, sw);
    return DBX_OK;
  } catch (const std::exception& e) {
    return capture(e);
  }
}

dbx_status dbx_run_region(const dbx_channel* ch, double r1, double r2, double slack,
                          const dbx_grid* mu, const dbx_run_opts* opts, dbx_report** out) {
  if (!ch || !out) return fail(DBX_E_USAGE, "null argument");
  try {
    Stopwatch sw;
    dbx::RatePair rates(r1, r2);
    dbx::Vec mu_grid = grid_of(mu, dbx::default_mu_grid);
    dbx::OptConfig cfg = to_opt(opts);
    dbx::HyperplaneProfile prof = dbx::hyperplane_profile(ch->ch, mu_grid, cfg);
    dbx::RegionCheck check = dbx::in_region(prof, rates, slack);
    json doc;
    doc["command"] = "region";
    doc["channel"] = ch->name;
    doc["config"] = {{"mu_grid", grid_echo(mu_grid)},
                     {"optimizer", opts_echo(opts)},
                     {"rates", {rates.r1, rates.r2}},
                     {"slack", slack}};
    doc["seed"] = cfg.seed;
    doc["results"] = {{"inside", check.inside},
                      {"worst_mu", check.worst_mu},
                      {"margin", check.margin}};
    *out = finish(std::move(doc), "", -1, opts, sw);
    return DBX_OK;
  } catch (const std::exception& e) {
    return capture(e);
  }
}

dbx_status dbx_run_exponent(const dbx_channel* ch, double r1, double r2,
                            const dbx_grid* mu, const dbx_grid* lambda,
                            int want_grid_table, const dbx_run_opts* opts,
                            dbx_report** out) {
  if (!ch || !out) return fail(DBX_E_USAGE, "null argument");
  try {
    Stopwatch sw;
    dbx::RatePair rates(r1, r2);
    dbx::Vec mu_grid = grid_of(mu, dbx::default_mu_grid);
    dbx::Vec lambda_grid = grid_of(lambda, dbx::default_lambda_grid);
    dbx::OptConfig cfg = to_opt(opts);
    dbx::ExponentGrid grid = dbx::build_exponent_grid(ch->ch, mu_grid, lambda_grid, cfg);
    dbx::ExponentReport rep = dbx::exponent_lower_bound(grid, rates);
    std::string csv;
    if (want_grid_table) {
      dbx::CsvTable table({"mu", "lambda", "omega", "f"});
      for (size_t i = 0; i < mu_grid.size(); ++i)
        for (size_t j = 0; j < lambda_grid.size(); ++j)
          table.add_row({mu_grid[i], lambda_grid[j], grid.omega[i][j],
                         dbx::exponent_objective(grid.omega[i][j], mu_grid[i],
                                                 lambda_grid[j], rates)});
      csv = table.str();
    }
    json doc;
    doc["command"] = "exponent";
    doc["channel"] = ch->name;
    doc["config"] = {{"mu_grid", grid_echo(mu_grid)},
                     {"lambda_grid", grid_echo(lambda_grid)},
                     {"optimizer", opts_echo(opts)},
                     {"rates", {rates.r1, rates.r2}}};
    doc["seed"] = cfg.seed;
    doc["results"] = {{"f_value", rep.f_value},
                      {"best_mu", rep.best_mu},
                      {"best_lambda", rep.best_lambda},
                      {"omega_at_best", rep.omega_at_best},
                      {"boundary_flag", rep.boundary_flag}};
    *out = finish(std::move(doc), std::move(csv), -1, opts, sw);
    return DBX_OK;
  } catch (const std::exception& e) {
    return capture(e);
  }
}

dbx_status dbx_run_verify(const char* suite, int n, int trials, uint64_t seed,
                          const dbx_channel* ch, double r1, double r2,
                          const dbx_run_opts* opts, dbx_report** out) {
  if (!suite || !out) return fail(DBX_E_USAGE, "null argument");
  try {
    Stopwatch sw;
    auto s = dbx::suite_from_name(suite);
    if (!s) return fail(DBX_E_USAGE, std::string("unknown suite: ") + suite);
    dbx::VerifyOptions vopts;
    vopts.suite = *s;
    vopts.n = n;
    vopts.trials = trials;
    vopts.seed = seed;
    vopts.opt = to_opt(opts);
    if (ch) vopts.channel = ch->ch;
    vopts.rates = dbx::RatePair(r1, r2);
    dbx::SuiteReport rep = dbx::run_suite(vopts);
    json doc;
    doc["command"] = "verify";
    doc["suite"] = suite;
    doc["config"] = {{"n", n},
                     {"trials", trials},
                     {"rates", {r1, r2}},
                     {"optimizer", opts_echo(opts)}};
    doc["seed"] = seed;
    json margins = json::array();
    for (const auto& t : rep.trials) margins.push_back(t.margin);
    doc["results"] = {{"all_hold", rep.all_hold},
                      {"min_margin", rep.min_margin},
                      {"margins", margins}};
    if (rep.suite == dbx::Suite::PerCode) {
      doc["results"]["f_value"] = rep.f_value;
      doc["results"]["floor"] = rep.floor;
    }
    dbx::CsvTable table({"trial", "holds", "margin"});
    for (size_t i = 0; i < rep.trials.size(); ++i)
      table.add_row_raw({std::to_string(i), rep.trials[i].holds ? "1" : "0",
                         dbx::fmt17(rep.trials[i].margin)});
    *out = finish(std::move(doc), table.str(), rep.all_hold ? 1 : 0, opts, sw);
    return DBX_OK;
  } catch (const std::exception& e) {
    return capture(e);
  }
}

dbx_status dbx_run_simulate(const dbx_channel* ch, double r1, double r2,
                            const int* n_list, int n_count, long samples, uint64_t seed,
                            const dbx_run_opts* opts, dbx_report** out) {
  if (!ch || !out || !n_list || n_count <= 0) return fail(DBX_E_USAGE, "null argument");
  if (samples <= 0) return fail(DBX_E_USAGE, "samples must be positive");
  try {
    Stopwatch sw;
    dbx::RatePair rates(r1, r2);
    dbx::OptConfig cfg = to_opt(opts);

    // exponent floor on the default grids (rate independent part cached by
    // the grid build)
    dbx::ExponentGrid grid = dbx::build_exponent_grid(
        ch->ch, dbx::log_space_grid(1e-2, 1e2, 21), dbx::log_space_grid(1e-2, 1e2, 21),
        cfg);
    dbx::ExponentReport rep = dbx::exponent_lower_bound(grid, rates);

    // superposition spec from the mu = 1 capacity argmax
    dbx::CmuResult cm = dbx::weighted_capacity(ch->ch, 1.0, cfg);
    dbx::SuperpositionSpec spec{cm.arg.p_u(), cm.arg.p_x_given_u()};

    json rows = json::array();
    dbx::CsvTable table({"n", "k_size", "l_size", "samples", "pc_hat", "ci_lo", "ci_hi",
                         "decay", "floor"});
    bool all_hold = true;
    for (int i = 0; i < n_count; ++i) {
      const int n = n_list[i];
      const double floor_v = rep.f_value - std::log(3.0) / n;
      dbx::SimPoint pt = dbx::monte_carlo_pc(spec, ch->ch, rates, n, samples,
                                             dbx::derive_stream(seed, i), floor_v);
      all_hold = all_hold && pt.holds;
      table.add_row({static_cast<double>(pt.n), static_cast<double>(pt.k_size),
                     static_cast<double>(pt.l_size), static_cast<double>(pt.samples),
                     pt.pc_hat, pt.ci_lo, pt.ci_hi, pt.decay, pt.floor});
      json row;
      row["n"] = pt.n;
      row["k_size"] = pt.k_size;
      row["l_size"] = pt.l_size;
      row["pc_hat"] = pt.pc_hat;
      row["ci_lo"] = pt.ci_lo;
      row["ci_hi"] = pt.ci_hi;
      row["decay"] = pt.decay;
      row["floor"] = pt.floor;
      row["holds"] = pt.holds;
      rows.push_back(row);
    }
    json doc;
    doc["command"] = "simulate";
    doc["channel"] = ch->name;
    doc["config"] = {{"rates", {rates.r1, rates.r2}},
                     {"samples", samples},
                     {"optimizer", opts_echo(opts)}};
    doc["seed"] = seed;
    doc["results"] = {{"points", rows},
                      {"f_value", rep.f_value},
                      {"spec", point_json(dbx::SimplexPoint{
                                   cm.arg.p_u().probs(), cm.arg.p_x_given_u().rows()})}};
    *out = finish(std::move(doc), table.str(), all_hold ? 1 : 0, opts, sw);
    return DBX_OK;
  } catch (const std::exception& e) {
    return capture(e);
  }
}

const char* dbx_report_json(const dbx_report* rep) {
  return rep ? rep->json_text.c_str() : "";
}

const char* dbx_report_csv(const dbx_report* rep) {
  return rep ? rep->csv_text.c_str() : "";
}

int dbx_report_all_hold(const dbx_report* rep) { return rep ? rep->all_hold : -1; }

double dbx_report_value(const dbx_report* rep, const char* key) {
  if (!rep || !key) return std::nan("");
  const auto& res = rep->doc.contains("results") ? rep->doc.at("results") : rep->doc;
  if (res.contains(key) && res.at(key).is_number()) return res.at(key).get<double>();
  if (res.contains(key) && res.at(key).is_boolean())
    return res.at(key).get<bool>() ? 1.0 : 0.0;
  return std::nan("");
}

void dbx_report_free(dbx_report* rep) { delete rep; }

const char* dbx_last_error(void) { return g_last_error.c_str(); }

const char* dbx_version(void) { return "dbx 1.0.0"; }

}  // extern "C"
