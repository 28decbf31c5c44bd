// saqd: command-line front end.
//
//   saqd run --manifold cube --d 2 --L 4,6,8 --p 0.008:0.013:0.0005 --t 4 \
//            --trials 20000 --val clustering --corr matching --seed 7 --out r.csv
//   saqd verify --manifold all --L 2,4 --d 2,3,5,16
//   saqd distance --manifold cube --L 2 --d 2 --cap 3
//
// Exit codes: 0 ok, 2 parameter-table mismatch, 3 decoder contract violation,
// 4 configuration error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saqd/experiment.hpp"

using namespace saqd;

namespace {

constexpr int kExitMismatch = 2;
constexpr int kExitDecoder = 3;
constexpr int kExitConfig = 4;

std::vector<Manifold> manifolds_from(const std::string& s) {
  if (s == "all")
    return {Manifold::Torus3, Manifold::T2xI, Manifold::T2xIPrime, Manifold::Cube};
  std::vector<Manifold> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(parse_manifold(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

int cmd_run(const std::string& config_path, CLI::App& sub, RunConfig flags,
            const std::string& d, const std::string& L, const std::string& p,
            const std::string& t, const std::string& manifold,
            const std::string& val, const std::string& corr, bool quiet) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--manifold")) cfg.manifold = parse_manifold(manifold);
  if (given("--d")) cfg.d = parse_int_list(d);
  if (given("--L")) cfg.L = parse_int_list(L);
  if (given("--p")) cfg.p = parse_p_grid(p);
  if (given("--t")) cfg.t = parse_int_list(t);
  if (given("--trials")) cfg.trials = flags.trials;
  if (given("--val")) cfg.decoders.validator = parse_decoder(val);
  if (given("--corr")) cfg.decoders.corrector = parse_decoder(corr);
  if (given("--seed")) cfg.seed = flags.seed;
  if (given("--out")) cfg.out = flags.out;
  cfg.validate();

  const auto start = std::chrono::steady_clock::now();
  ProgressFn progress;
  if (!quiet) {
    progress = [&](const DataPoint& dp, int done, int total) {
      const double secs = std::chrono::duration<double>(
          std::chrono::steady_clock::now() - start).count();
      std::fprintf(stderr, "[%d/%d %.0fs] d=%d L=%d t=%d p=%g  %lld/%lld fail\n",
                   done, total, secs, dp.point.d, dp.point.L, dp.point.t,
                   dp.point.p, dp.failures, dp.trials);
    };
  }
  run_sweep(cfg, progress);
  return 0;
}

int cmd_verify(const std::string& manifold, const std::string& L,
               const std::string& d) {
  bool all_ok = true;
  for (Manifold m : manifolds_from(manifold))
    for (int l : parse_int_list(L))
      for (int dd : parse_int_list(d)) {
        const SubsystemCode code = build_code(m, l, dd);
        const ParameterReport r = verify_parameters(code);
        std::printf("%-10s L=%d d=%-2d n=%lld k=%d  expected n=%lld k=%d  %s\n",
                    manifold_name(m).c_str(), l, dd, r.n, r.k, r.expected_n,
                    r.expected_k, r.ok() ? "ok" : "MISMATCH");
        all_ok = all_ok && r.ok();
      }
  return all_ok ? 0 : kExitMismatch;
}

int cmd_distance(const std::string& manifold, int L, int d, int cap, int which) {
  const SubsystemCode code = build_code(parse_manifold(manifold), L, d);
  const ParameterReport r = verify_parameters(code);
  const DistanceResult res = brute_force_distance(code, cap, which);
  if (res.found)
    std::printf("dressed distance = %d\n", res.weight);
  else
    std::printf("dressed distance > %d\n", res.weight);
  std::printf("bare logical witness weight = %d\n", r.bare_weight);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subsystem abelian quantum double codes: construction, "
               "verification and threshold simulation"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path, r_manifold = "cube", r_d = "2", r_L = "4", r_p = "0.01",
                           r_t = "4", r_val = "clustering", r_corr = "clustering";
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Monte Carlo sweep to CSV");
  run->add_option("--config", config_path, "flat key = value config file");
  run->add_option("--manifold", r_manifold);
  run->add_option("--d", r_d, "comma list");
  run->add_option("--L", r_L, "comma list");
  run->add_option("--p", r_p, "a:b:step or comma list");
  run->add_option("--t", r_t, "comma list");
  run->add_option("--trials", flags.trials);
  run->add_option("--val", r_val, "clustering | matching");
  run->add_option("--corr", r_corr, "clustering | matching");
  run->add_option("--seed", flags.seed);
  run->add_option("--out", flags.out);
  run->add_flag("--quiet", quiet, "no progress lines");

  std::string v_manifold = "all", v_L = "2,4", v_d = "2,3,5,16";
  auto* verify = app.add_subcommand("verify", "check (n, k) against the table");
  verify->add_option("--manifold", v_manifold, "name, comma list or all");
  verify->add_option("--L", v_L);
  verify->add_option("--d", v_d);

  std::string x_manifold = "cube";
  int x_L = 2, x_d = 2, x_cap = 3, x_which = -1;
  auto* distance = app.add_subcommand("distance", "brute-force dressed distance");
  distance->add_option("--manifold", x_manifold);
  distance->add_option("--L", x_L);
  distance->add_option("--d", x_d);
  distance->add_option("--cap", x_cap, "largest weight enumerated");
  distance->add_option("--logical", x_which, "restrict to one logical (-1: any)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run)
      return cmd_run(config_path, *run, flags, r_d, r_L, r_p, r_t, r_manifold,
                     r_val, r_corr, quiet);
    if (*verify) return cmd_verify(v_manifold, v_L, v_d);
    if (*distance) return cmd_distance(x_manifold, x_L, x_d, x_cap, x_which);
  } catch (const DecoderError& e) {
    std::cerr << "decoder error: " << e.what() << '\n';
    return kExitDecoder;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const LatticeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
