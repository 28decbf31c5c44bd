// Monte Carlo harness: failure-rate estimates with Agresti-Coull intervals,
// threshold crossings, the qudit-dimension rescaling and grid sweeps written
// to CSV.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "saqd/channel.hpp"

namespace saqd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoCrossing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Manifold manifold = Manifold::Cube;
  std::vector<int> d{2};
  std::vector<int> L{4};
  std::vector<double> p{0.01};
  std::vector<int> t{4};
  long long trials = 1000;
  DecoderConfig decoders{};
  std::uint64_t seed = 1;
  std::string out = "results.csv";
  double z = 1.96;

  // Throws ConfigError.
  void validate() const;
};

// "a:b:step" (inclusive) or a comma list.
std::vector<double> parse_p_grid(const std::string& s);
std::vector<int> parse_int_list(const std::string& s);

// Flat `key = value` lines; `#` starts a comment. Keys: manifold, d, L, p,
// t, trials, validator, corrector, seed, out, z.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

struct GridPoint {
  Manifold manifold = Manifold::Cube;
  int d = 2;
  int L = 4;
  double p = 0.0;
  int t = 4;
  DecoderConfig decoders{};
};

struct DataPoint {
  GridPoint point;
  long long trials = 0;
  long long failures = 0;
  double p_fail = 0.0;   // failures / trials
  double p_tilde = 0.0;  // Agresti-Coull centre
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t seed = 0;
};

struct Interval {
  double centre;
  double lo;
  double hi;
};

Interval agresti_coull(long long failures, long long trials, double z = 1.96);

// Fill in rates and the interval from the counts.
void finish_point(DataPoint& dp, double z = 1.96);

// Seed of one grid point, a function of the master seed and the point's
// coordinates only; decoder pairs share it.
std::uint64_t point_seed(std::uint64_t master, const GridPoint& pt);

// Trials run serially; trial i draws from trial_rng(seed, i).
DataPoint estimate_pfail(const GridPoint& pt, long long trials,
                         std::uint64_t seed, double z = 1.96);

struct ThresholdEstimate {
  double p_th = 0.0;
  double uncertainty = 0.0;
  std::string method = "crossing";
  int L_small = 0;
  int L_large = 0;
};

// Intersection of the two largest-L curves by linear interpolation on the
// shared p grid, nearest the median p when several cells cross. Throws
// NoCrossing.
ThresholdEstimate crossing_threshold(
    const std::map<int, std::vector<DataPoint>>& curves);

// p* = 1 - (1 - p_th)^(1 / log2 d) and its inverse.
double rescale_threshold(double p_th, int d);
double unscale_threshold(double p_star, int d);

// Worker count: SAQD_THREADS when set, else the hardware concurrency.
int worker_count();

std::vector<GridPoint> expand_grid(const RunConfig& cfg);

std::string csv_header();
std::string csv_row(const DataPoint& dp);
// Parses rows written by csv_row; the header line is skipped.
std::vector<DataPoint> read_csv(std::istream& in);

using ProgressFn = std::function<void(const DataPoint&, int done, int total)>;

// Runs every grid point and returns them in grid order. Rows are handed to
// `sink` in grid order as soon as the prefix is complete.
std::vector<DataPoint> sweep(const RunConfig& cfg,
                             const std::function<void(const DataPoint&)>& sink,
                             const ProgressFn& progress = {});

// sweep() writing the CSV to cfg.out, flushed after every row.
std::vector<DataPoint> run_sweep(const RunConfig& cfg,
                                 const ProgressFn& progress = {});

}  // namespace saqd
