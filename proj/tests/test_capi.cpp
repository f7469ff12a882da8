// Exercises the shared-library surface exactly as an external client would:
// only dbx.h, opaque handles and status codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "dbx.h"

namespace {

const char* kIdentity = R"({"name":"id","w1":[[1,0],[0,1]],"w2":[[1,0],[0,1]]})";
const char* kCascade = R"({"name":"bsc","w1":[[0.9,0.1],[0.1,0.9]],"w2":[[0.9,0.1],[0.1,0.9]]})";
const char* kBadRow = R"({"w1":[[0.9,0.2],[0.1,0.9]],"w2":[[1,0],[0,1]]})";

struct Chan {
  dbx_channel* ch = nullptr;
  explicit Chan(const char* text) { REQUIRE(dbx_channel_from_json(text, &ch) == DBX_OK); }
  ~Chan() { dbx_channel_free(ch); }
};

std::string strip_line(const std::string& text, const char* needle) {
  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    if (line.find(needle) == std::string::npos) out += line + "\n";
    pos = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("channel parsing and accessors") {
  Chan c(kCascade);
  CHECK(dbx_channel_x_size(c.ch) == 2);
  CHECK(dbx_channel_y_size(c.ch) == 2);
  CHECK(dbx_channel_z_size(c.ch) == 2);

  dbx_channel* bad = nullptr;
  CHECK(dbx_channel_from_json(kBadRow, &bad) == DBX_E_PARSE);
  CHECK(std::string(dbx_last_error()).find("row") != std::string::npos);
  CHECK(dbx_channel_from_json("not json", &bad) == DBX_E_PARSE);
  CHECK(dbx_channel_from_json(nullptr, &bad) == DBX_E_USAGE);
  CHECK(dbx_channel_from_file("/no/such/file.json", &bad) == DBX_E_PARSE);
}

TEST_CASE("capacity run: value, table and bitwise reproducibility") {
  Chan c(kIdentity);
  dbx_run_opts opts;
  dbx_run_opts_init(&opts);
  opts.include_timing = 0;
  dbx_grid mu{1.0, 1.0, 1};
  dbx_report* a = nullptr;
  dbx_report* b = nullptr;
  REQUIRE(dbx_run_capacity(c.ch, &mu, &opts, &a) == DBX_OK);
  REQUIRE(dbx_run_capacity(c.ch, &mu, &opts, &b) == DBX_OK);
  CHECK(std::strcmp(dbx_report_json(a), dbx_report_json(b)) == 0);
  CHECK(std::strcmp(dbx_report_csv(a), dbx_report_csv(b)) == 0);
  const std::string csv = dbx_report_csv(a);
  CHECK(csv.rfind("mu,c_mu", 0) == 0);
  // the printed value round-trips to log 2 within optimizer tolerance
  const std::string row = csv.substr(csv.find('\n') + 1);
  const double v = std::strtod(row.c_str() + row.find(',') + 1, nullptr);
  CHECK(std::abs(v - std::log(2.0)) < 1e-5);
  dbx_report_free(a);
  dbx_report_free(b);
}

TEST_CASE("timing is the only non-reproducible report field") {
  Chan c(kIdentity);
  dbx_run_opts opts;
  dbx_run_opts_init(&opts);  // timing on
  dbx_grid mu{1.0, 1.0, 1};
  dbx_report* a = nullptr;
  dbx_report* b = nullptr;
  REQUIRE(dbx_run_capacity(c.ch, &mu, &opts, &a) == DBX_OK);
  REQUIRE(dbx_run_capacity(c.ch, &mu, &opts, &b) == DBX_OK);
  CHECK(strip_line(dbx_report_json(a), "wall_time_s") ==
        strip_line(dbx_report_json(b), "wall_time_s"));
  dbx_report_free(a);
  dbx_report_free(b);
}

TEST_CASE("region run classifies inside and outside") {
  Chan c(kCascade);
  dbx_run_opts opts;
  dbx_run_opts_init(&opts);
  dbx_grid mu;
  dbx_grid_init_mu(&mu);
  mu.points = 21;
  dbx_report* rep = nullptr;
  REQUIRE(dbx_run_region(c.ch, 0.5, 0.3, 0.0, &mu, &opts, &rep) == DBX_OK);
  CHECK(dbx_report_value(rep, "inside") == 0.0);
  CHECK(dbx_report_value(rep, "margin") > 0.0);
  dbx_report_free(rep);
  REQUIRE(dbx_run_region(c.ch, 0.0, 0.0, 0.0, &mu, &opts, &rep) == DBX_OK);
  CHECK(dbx_report_value(rep, "inside") == 1.0);
  dbx_report_free(rep);
  CHECK(dbx_run_region(c.ch, -0.1, 0.0, 0.0, &mu, &opts, &rep) == DBX_E_USAGE);
}

TEST_CASE("exponent run with grid table") {
  Chan c(kCascade);
  dbx_run_opts opts;
  dbx_run_opts_init(&opts);
  dbx_grid g{1e-2, 1e2, 9};
  dbx_report* rep = nullptr;
  REQUIRE(dbx_run_exponent(c.ch, 0.5, 0.3, &g, &g, 1, &opts, &rep) == DBX_OK);
  CHECK(dbx_report_value(rep, "f_value") > 0.0);
  const std::string csv = dbx_report_csv(rep);
  CHECK(csv.rfind("mu,lambda,omega,f", 0) == 0);
  // 81 grid rows + header + trailing newline
  int lines = 0;
  for (char ch2 : csv)
    if (ch2 == '\n') ++lines;
  CHECK(lines == 82);
  dbx_report_free(rep);
}

TEST_CASE("verify run: pass, budget refusal, unknown suite") {
  dbx_run_opts opts;
  dbx_run_opts_init(&opts);
  dbx_report* rep = nullptr;
  REQUIRE(dbx_run_verify("lemma1", 2, 10, 3, nullptr, 0, 0, &opts, &rep) == DBX_OK);
  CHECK(dbx_report_all_hold(rep) == 1);
  CHECK(dbx_report_value(rep, "min_margin") > 0.0);
  dbx_report_free(rep);

  CHECK(dbx_run_verify("lemma1", 12, 1, 3, nullptr, 0, 0, &opts, &rep) == DBX_E_BUDGET);
  CHECK(dbx_run_verify("lemma99", 2, 1, 3, nullptr, 0, 0, &opts, &rep) == DBX_E_USAGE);
}

TEST_CASE("simulate run emits the decay table") {
  Chan c(kCascade);
  dbx_run_opts opts;
  dbx_run_opts_init(&opts);
  opts.include_timing = 0;
  const int ns[2] = {4, 8};
  dbx_report* rep = nullptr;
  REQUIRE(dbx_run_simulate(c.ch, 0.05, 0.05, ns, 2, 500, 7, &opts, &rep) == DBX_OK);
  const std::string csv = dbx_report_csv(rep);
  CHECK(csv.rfind("n,k_size,l_size,samples,pc_hat,ci_lo,ci_hi,decay,floor", 0) == 0);
  dbx_report_free(rep);
  CHECK(dbx_run_simulate(c.ch, 0.05, 0.05, ns, 2, 0, 7, &opts, &rep) == DBX_E_USAGE);
}
