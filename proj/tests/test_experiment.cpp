#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "saqd/experiment.hpp"

using namespace saqd;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DataPoint synthetic(int L, double p, double pf, double hw = 0.001) {
  DataPoint dp;
  dp.point.L = L;
  dp.point.p = p;
  dp.p_fail = pf;
  dp.ci_lo = pf - hw;
  dp.ci_hi = pf + hw;
  return dp;
}

}  // namespace

TEST_CASE("Agresti-Coull interval") {
  // Direct evaluation: n~ = 1000 + z^2, p~ = (50 + z^2/2) / n~.
  const double z = 1.96, nt = 1000 + z * z, pt = (50 + z * z / 2) / nt;
  const double hw = z * std::sqrt(pt * (1 - pt) / nt);
  const Interval ci = agresti_coull(50, 1000);
  CHECK(ci.centre == doctest::Approx(pt).epsilon(1e-12));
  CHECK(ci.centre == doctest::Approx(0.0517).epsilon(1e-3));
  CHECK(ci.lo == doctest::Approx(pt - hw).epsilon(1e-12));
  CHECK(ci.hi == doctest::Approx(pt + hw).epsilon(1e-12));
  CHECK(ci.lo == doctest::Approx(0.0380).epsilon(3e-3));
  CHECK(ci.hi == doctest::Approx(0.0654).epsilon(3e-3));

  const Interval all = agresti_coull(1000, 1000);
  CHECK(all.centre > 0.99);
  CHECK(all.centre <= 1.0);
  CHECK(all.hi == 1.0);
}

TEST_CASE("Agresti-Coull contains the raw rate") {
  std::mt19937 rng(1);
  for (int rep = 0; rep < 2000; ++rep) {
    const long long n = 1 + rng() % 5000, k = rng() % (n + 1);
    DataPoint dp;
    dp.trials = n;
    dp.failures = k;
    finish_point(dp);
    CHECK(dp.ci_lo >= 0.0);
    CHECK(dp.ci_lo <= dp.p_fail);
    CHECK(dp.p_fail <= dp.ci_hi);
    CHECK(dp.ci_hi <= 1.0);
  }
}

TEST_CASE("crossing of straight lines") {
  std::map<int, std::vector<DataPoint>> curves;
  for (int i = 0; i <= 10; ++i) {
    const double p = 0.005 + 0.001 * i;
    curves[4].push_back(synthetic(4, p, 0.2 + 10 * (p - 0.01)));
    curves[6].push_back(synthetic(6, p, 0.2 + 25 * (p - 0.01)));
  }
  const ThresholdEstimate est = crossing_threshold(curves);
  CHECK(est.p_th == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(est.L_small == 4);
  CHECK(est.L_large == 6);
  CHECK(est.uncertainty > 0);
  // Uncertainty through the interpolation: sigma_D / |slope difference|.
  CHECK(est.uncertainty == doctest::Approx(std::sqrt(2) * 0.001 / 15).epsilon(1e-6));
}

TEST_CASE("crossing inside a grid cell") {
  std::map<int, std::vector<DataPoint>> curves;
  for (double p : {0.004, 0.006, 0.008}) {
    curves[4].push_back(synthetic(4, p, 10 * (p - 0.0051)));
    curves[6].push_back(synthetic(6, p, 30 * (p - 0.0051)));
    curves[8].push_back(synthetic(8, p, 50 * (p - 0.0057)));
  }
  // Only the two largest L count: 30 (p - 0.0051) = 50 (p - 0.0057).
  const ThresholdEstimate est = crossing_threshold(curves);
  CHECK(est.p_th == doctest::Approx(0.0066).epsilon(1e-9));
  CHECK(est.L_small == 6);
  CHECK(est.L_large == 8);
}

TEST_CASE("no crossing") {
  std::map<int, std::vector<DataPoint>> same;
  for (double p : {0.01, 0.02, 0.03}) {
    same[4].push_back(synthetic(4, p, p));
    same[6].push_back(synthetic(6, p, p));
  }
  CHECK_THROWS_AS(crossing_threshold(same), NoCrossing);
  std::map<int, std::vector<DataPoint>> apart;
  for (double p : {0.01, 0.02, 0.03}) {
    apart[4].push_back(synthetic(4, p, p));
    apart[6].push_back(synthetic(6, p, p / 2));
  }
  CHECK_THROWS_AS(crossing_threshold(apart), NoCrossing);
}

TEST_CASE("rescaling") {
  CHECK(rescale_threshold(0.0123, 2) == 0.0123);
  CHECK(rescale_threshold(0.04, 16) == doctest::Approx(1 - std::pow(0.96, 0.25)).epsilon(1e-12));
  CHECK(rescale_threshold(0.04, 16) == doctest::Approx(0.010154).epsilon(1e-4));
  std::mt19937 rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const double x = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    const int d = 2 + static_cast<int>(rng() % 30);
    const double ps = rescale_threshold(x, d);
    CHECK(ps <= x);
    CHECK(ps >= 0);
    CHECK(std::abs(unscale_threshold(ps, d) - x) < 1e-12);
    // Forward map written out: 1 - (1 - p*)^(log2 d).
    CHECK(std::abs(1 - std::pow(1 - ps, std::log2(d)) - x) < 1e-12);
  }
  CHECK_THROWS(rescale_threshold(0.1, 1));
}

TEST_CASE("p grids and config parsing") {
  const auto g = parse_p_grid("0.008:0.013:0.0005");
  REQUIRE(g.size() == 11);
  CHECK(g.front() == 0.008);
  CHECK(g.back() == 0.013);
  CHECK(g[1] == 0.0085);
  CHECK(parse_p_grid("0.01, 0.02") == std::vector<double>{0.01, 0.02});
  CHECK_THROWS_AS(parse_p_grid("0.02:0.01:0.001"), ConfigError);

  std::istringstream in(
      "# sweep\n"
      "manifold = cube\n"
      "d = 2\n"
      "L = 4, 6\n"
      "p = 0.01:0.02:0.005\n"
      "t = 2\n"
      "trials = 300   # per point\n"
      "validator = clustering\n"
      "corrector = matching\n"
      "seed = 42\n"
      "out = x.csv\n");
  const RunConfig cfg = parse_run_config(in);
  CHECK(cfg.L == std::vector<int>{4, 6});
  CHECK(cfg.p.size() == 3);
  CHECK(cfg.trials == 300);
  CHECK(cfg.decoders.corrector == DecoderKind::Matching);
  CHECK(cfg.seed == 42);
  CHECK(cfg.out == "x.csv");
  CHECK(expand_grid(cfg).size() == 6);

  std::istringstream bad_key("colour = red\n");
  CHECK_THROWS_AS(parse_run_config(bad_key), ConfigError);
  std::istringstream matching_d3("d = 3\nvalidator = matching\n");
  CHECK_THROWS_AS(parse_run_config(matching_d3), ConfigError);
  std::istringstream no_trials("trials = 0\n");
  CHECK_THROWS_AS(parse_run_config(no_trials), ConfigError);
  std::istringstream bad_num("p = 0.0x1\n");
  CHECK_THROWS_AS(parse_run_config(bad_num), ConfigError);
}

TEST_CASE("zero noise never fails") {
  GridPoint pt;
  pt.p = 0.0;
  pt.L = 2;
  const DataPoint dp = estimate_pfail(pt, 1000, 5);
  CHECK(dp.failures == 0);
  CHECK(dp.p_fail == 0.0);
}

TEST_CASE("estimate_pfail matches the sweep") {
  RunConfig cfg;
  cfg.L = {2};
  cfg.p = {0.03};
  cfg.t = {2};
  cfg.trials = 600;
  cfg.seed = 11;
  const auto rows = sweep(cfg, {});
  REQUIRE(rows.size() == 1);
  const DataPoint direct = estimate_pfail(rows[0].point, 600, rows[0].seed);
  CHECK(direct.failures == rows[0].failures);
  CHECK(rows[0].seed == point_seed(11, rows[0].point));
}

TEST_CASE("run_sweep output") {
  const std::string a = "saqd_test_sweep_a.csv", b = "saqd_test_sweep_b.csv";
  RunConfig cfg;
  cfg.L = {2};
  cfg.p = {0.02};
  cfg.t = {1};
  cfg.trials = 300;
  cfg.seed = 3;
  cfg.out = a;
  run_sweep(cfg);
  std::istringstream one(slurp(a));
  std::string header, row, extra;
  std::getline(one, header);
  std::getline(one, row);
  CHECK(header == csv_header());
  CHECK_FALSE(row.empty());
  CHECK_FALSE(static_cast<bool>(std::getline(one, extra)));

  cfg.L = {2, 4};
  cfg.p = {0.01, 0.03};
  run_sweep(cfg);
  cfg.out = b;
  run_sweep(cfg);
  const std::string sa = slurp(a);
  CHECK(sa == slurp(b));
  std::istringstream back(sa);
  const auto rows = read_csv(back);
  REQUIRE(rows.size() == 4);
  CHECK(rows[3].point.L == 4);
  CHECK(rows[3].point.p == 0.03);
  CHECK(csv_row(rows[3]) == csv_row(rows[3]));
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST_CASE("csv columns") {
  CHECK(csv_header() ==
        "manifold,d,L,p,t,validator,corrector,trials,failures,pfail,ci_lo,ci_hi,seed");
  DataPoint dp;
  dp.point = {Manifold::Cube, 2, 6, 0.0085, 4, {DecoderKind::Clustering, DecoderKind::Matching}};
  dp.trials = 1000;
  dp.failures = 50;
  dp.seed = 123;
  finish_point(dp);
  const std::string row = csv_row(dp);
  CHECK(row.rfind("cube,2,6,0.0085,4,clustering,matching,1000,50,0.05,", 0) == 0);
  std::istringstream in(csv_header() + "\n" + row + "\n");
  const auto back = read_csv(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].failures == 50);
  CHECK(back[0].seed == 123);
  CHECK(back[0].point.decoders.corrector == DecoderKind::Matching);
}
