#include "saqd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace saqd {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("bad number: " + s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad number: " + s);
  }
}

long long to_int(const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw ConfigError("bad integer: " + s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad integer: " + s);
  }
}

// Grid values are kept on a 1e-12 lattice so that "0.0085" and
// 0.008 + 0.0005 name the same point.
double snap(double p) { return std::round(p * 1e12) / 1e12; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::vector<double> parse_p_grid(const std::string& s) {
  std::vector<double> out;
  const auto parts = split(s, ':');
  if (parts.size() == 3) {
    const double a = to_double(parts[0]), b = to_double(parts[1]),
                 step = to_double(parts[2]);
    if (!(step > 0) || b < a) throw ConfigError("bad p range: " + s);
    const long long count = std::llround(std::floor((b - a) / step + 1e-9)) + 1;
    for (long long i = 0; i < count; ++i) out.push_back(snap(a + i * step));
  } else if (parts.size() == 1) {
    for (const auto& v : split(s, ',')) out.push_back(snap(to_double(v)));
  } else {
    throw ConfigError("bad p grid: " + s);
  }
  if (out.empty()) throw ConfigError("empty p grid");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& v : split(s, ',')) out.push_back(static_cast<int>(to_int(v)));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

void RunConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (d.empty() || L.empty() || p.empty() || t.empty())
    throw ConfigError("empty grid axis");
  const bool matching = decoders.validator == DecoderKind::Matching ||
                        decoders.corrector == DecoderKind::Matching;
  for (int dd : d) {
    if (dd < 2) throw ConfigError("d must be at least 2");
    if (matching && dd != 2)
      throw ConfigError("matching decoders need d = 2");
  }
  for (int l : L)
    if (l < 2 || l % 2 != 0) throw ConfigError("L must be even and >= 2");
  for (double x : p)
    if (!(x >= 0 && x <= 1)) throw ConfigError("p outside [0, 1]");
  for (int tt : t)
    if (tt < 0) throw ConfigError("t must be non-negative");
  if (!(z > 0)) throw ConfigError("z must be positive");
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "manifold") cfg.manifold = parse_manifold(val);
      else if (key == "d") cfg.d = parse_int_list(val);
      else if (key == "L") cfg.L = parse_int_list(val);
      else if (key == "p") cfg.p = parse_p_grid(val);
      else if (key == "t") cfg.t = parse_int_list(val);
      else if (key == "trials") cfg.trials = to_int(val);
      else if (key == "validator") cfg.decoders.validator = parse_decoder(val);
      else if (key == "corrector") cfg.decoders.corrector = parse_decoder(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "out") cfg.out = val;
      else if (key == "z") cfg.z = to_double(val);
      else throw ConfigError("unknown key");
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    } catch (const std::exception& e) {
      throw ConfigError("line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_run_config(in);
}

Interval agresti_coull(long long failures, long long trials, double z) {
  const double z2 = z * z;
  const double nt = static_cast<double>(trials) + z2;
  const double pt = (static_cast<double>(failures) + z2 / 2) / nt;
  const double hw = z * std::sqrt(pt * (1 - pt) / nt);
  return {pt, std::max(0.0, pt - hw), std::min(1.0, pt + hw)};
}

void finish_point(DataPoint& dp, double z) {
  dp.p_fail = dp.trials > 0 ? static_cast<double>(dp.failures) / dp.trials : 0.0;
  const Interval ci = agresti_coull(dp.failures, dp.trials, z);
  dp.p_tilde = ci.centre;
  dp.ci_lo = std::min(ci.lo, dp.p_fail);
  dp.ci_hi = std::max(ci.hi, dp.p_fail);
}

std::uint64_t point_seed(std::uint64_t master, const GridPoint& pt) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ static_cast<std::uint64_t>(pt.manifold));
  h = mix64(h ^ static_cast<std::uint64_t>(pt.d));
  h = mix64(h ^ static_cast<std::uint64_t>(pt.L));
  h = mix64(h ^ static_cast<std::uint64_t>(pt.t));
  h = mix64(h ^ static_cast<std::uint64_t>(std::llround(pt.p * 1e12)));
  return h;
}

DataPoint estimate_pfail(const GridPoint& pt, long long trials,
                         std::uint64_t seed, double z) {
  const SubsystemCode code = build_code(pt.manifold, pt.L, pt.d);
  TrialRunner runner(code, pt.decoders);
  DataPoint dp;
  dp.point = pt;
  dp.trials = trials;
  dp.seed = seed;
  const NoiseParams noise{pt.p, pt.t};
  for (long long i = 0; i < trials; ++i) {
    Rng rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    if (runner.run(noise, rng)) ++dp.failures;
  }
  finish_point(dp, z);
  return dp;
}

ThresholdEstimate crossing_threshold(
    const std::map<int, std::vector<DataPoint>>& curves) {
  if (curves.size() < 2) throw std::invalid_argument("need at least two L values");
  auto it = curves.rbegin();
  const auto& [L_large, big] = *it++;
  const auto& [L_small, small] = *it;
  // Shared p grid, ascending.
  std::map<double, const DataPoint*> a, b;
  for (const auto& dp : small) a[dp.point.p] = &dp;
  for (const auto& dp : big) b[dp.point.p] = &dp;
  std::vector<double> ps;
  std::vector<double> diff, var;
  for (const auto& [p, da] : a) {
    auto f = b.find(p);
    if (f == b.end()) continue;
    const DataPoint* db = f->second;
    ps.push_back(p);
    diff.push_back(db->p_fail - da->p_fail);
    const double ha = (da->ci_hi - da->ci_lo) / 2, hb = (db->ci_hi - db->ci_lo) / 2;
    var.push_back(ha * ha + hb * hb);
  }
  if (ps.size() < 2) throw std::invalid_argument("curves share fewer than two p values");

  struct Cross {
    double p, sigma;
  };
  std::vector<Cross> found;
  const std::size_t n = ps.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d0 = diff[k], d1 = diff[k + 1];
    if (d0 * d1 < 0) {
      const double h = ps[k + 1] - ps[k], den = d0 - d1;
      const double g0 = -h * d1 / (den * den), g1 = h * d0 / (den * den);
      found.push_back({ps[k] + h * d0 / den,
                       std::sqrt(g0 * g0 * var[k] + g1 * g1 * var[k + 1])});
    } else if (d0 == 0 && k > 0 && diff[k - 1] * d1 < 0) {
      const double h = ps[k + 1] - ps[k - 1];
      const double slope = (d1 - diff[k - 1]) / h;
      found.push_back({ps[k], std::sqrt(var[k]) / std::abs(slope)});
    }
  }
  if (found.empty())
    throw NoCrossing("curves for L=" + std::to_string(L_small) + " and L=" +
                     std::to_string(L_large) + " do not cross on the grid");
  const double median = n % 2 ? ps[n / 2] : (ps[n / 2 - 1] + ps[n / 2]) / 2;
  const auto best = std::min_element(
      found.begin(), found.end(), [&](const Cross& x, const Cross& y) {
        return std::abs(x.p - median) < std::abs(y.p - median);
      });
  ThresholdEstimate est;
  est.p_th = best->p;
  est.uncertainty = best->sigma;
  est.L_small = L_small;
  est.L_large = L_large;
  return est;
}

double rescale_threshold(double p_th, int d) {
  if (d < 2) throw std::invalid_argument("d must be at least 2");
  if (!(p_th >= 0 && p_th < 1)) throw std::invalid_argument("p_th outside [0, 1)");
  if (d == 2) return p_th;
  return -std::expm1(std::log1p(-p_th) / std::log2(static_cast<double>(d)));
}

double unscale_threshold(double p_star, int d) {
  if (d < 2) throw std::invalid_argument("d must be at least 2");
  if (!(p_star >= 0 && p_star < 1)) throw std::invalid_argument("p outside [0, 1)");
  if (d == 2) return p_star;
  return -std::expm1(std::log1p(-p_star) * std::log2(static_cast<double>(d)));
}

int worker_count() {
  if (const char* env = std::getenv("SAQD_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<GridPoint> expand_grid(const RunConfig& cfg) {
  std::vector<GridPoint> out;
  for (int d : cfg.d)
    for (int L : cfg.L)
      for (int t : cfg.t)
        for (double p : cfg.p)
          out.push_back({cfg.manifold, d, L, snap(p), t, cfg.decoders});
  return out;
}

std::string csv_header() {
  return "manifold,d,L,p,t,validator,corrector,trials,failures,pfail,ci_lo,ci_hi,seed";
}

std::string csv_row(const DataPoint& dp) {
  const GridPoint& g = dp.point;
  std::ostringstream os;
  os << manifold_name(g.manifold) << ',' << g.d << ',' << g.L << ','
     << fmt("%.10g", g.p) << ',' << g.t << ',' << decoder_name(g.decoders.validator)
     << ',' << decoder_name(g.decoders.corrector) << ',' << dp.trials << ','
     << dp.failures << ',' << fmt("%.8g", dp.p_fail) << ','
     << fmt("%.8g", dp.ci_lo) << ',' << fmt("%.8g", dp.ci_hi) << ',' << dp.seed;
  return os.str();
}

std::vector<DataPoint> read_csv(std::istream& in) {
  std::vector<DataPoint> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("manifold,", 0) == 0) continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 13) throw ConfigError("bad results row: " + line);
    DataPoint dp;
    dp.point.manifold = parse_manifold(f[0]);
    dp.point.d = static_cast<int>(to_int(f[1]));
    dp.point.L = static_cast<int>(to_int(f[2]));
    dp.point.p = snap(to_double(f[3]));
    dp.point.t = static_cast<int>(to_int(f[4]));
    dp.point.decoders = {parse_decoder(f[5]), parse_decoder(f[6])};
    dp.trials = to_int(f[7]);
    dp.failures = to_int(f[8]);
    dp.p_fail = to_double(f[9]);
    dp.ci_lo = to_double(f[10]);
    dp.ci_hi = to_double(f[11]);
    dp.seed = std::stoull(f[12]);
    dp.p_tilde = agresti_coull(dp.failures, dp.trials).centre;
    out.push_back(dp);
  }
  return out;
}

std::vector<DataPoint> sweep(const RunConfig& cfg,
                             const std::function<void(const DataPoint&)>& sink,
                             const ProgressFn& progress) {
  cfg.validate();
  const std::vector<GridPoint> grid = expand_grid(cfg);
  const int npts = static_cast<int>(grid.size());

  // One shared immutable code per (d, L).
  std::map<std::pair<int, int>, std::unique_ptr<SubsystemCode>> codes;
  for (const auto& g : grid) {
    auto& slot = codes[{g.d, g.L}];
    if (!slot) slot = std::make_unique<SubsystemCode>(build_code(g.manifold, g.L, g.d));
  }

  constexpr long long chunk = 250;
  const long long chunks_per_point = (cfg.trials + chunk - 1) / chunk;
  const long long total_tasks = chunks_per_point * npts;

  std::vector<DataPoint> results(npts);
  std::vector<long long> remaining(npts, chunks_per_point);
  std::vector<char> done(npts, 0);
  for (int i = 0; i < npts; ++i) {
    results[i].point = grid[i];
    results[i].trials = cfg.trials;
    results[i].seed = point_seed(cfg.seed, grid[i]);
  }

  std::mutex mu;
  int flushed = 0, completed = 0;
  std::atomic<long long> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;

  auto worker = [&]() {
    std::unique_ptr<TrialRunner> runner;
    std::pair<int, int> runner_key{-1, -1};
    try {
      for (;;) {
        const long long task = next.fetch_add(1);
        if (task >= total_tasks || stop) return;
        const int pi = static_cast<int>(task / chunks_per_point);
        const long long c = task % chunks_per_point;
        const GridPoint& g = grid[pi];
        if (runner_key != std::make_pair(g.d, g.L)) {
          runner = std::make_unique<TrialRunner>(*codes.at({g.d, g.L}), g.decoders);
          runner_key = {g.d, g.L};
        }
        const NoiseParams noise{g.p, g.t};
        const std::uint64_t seed = results[pi].seed;
        const long long lo = c * chunk, hi = std::min(cfg.trials, lo + chunk);
        long long fails = 0;
        for (long long i = lo; i < hi; ++i) {
          Rng rng = trial_rng(seed, static_cast<std::uint64_t>(i));
          if (runner->run(noise, rng)) ++fails;
        }
        std::lock_guard<std::mutex> lock(mu);
        results[pi].failures += fails;
        if (--remaining[pi] > 0) continue;
        finish_point(results[pi], cfg.z);
        done[pi] = 1;
        ++completed;
        if (progress) progress(results[pi], completed, npts);
        while (flushed < npts && done[flushed]) {
          if (sink) sink(results[flushed]);
          ++flushed;
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!error) error = std::current_exception();
      stop = true;
    }
  };

  const int workers = static_cast<int>(
      std::min<long long>(worker_count(), std::max<long long>(1, total_tasks)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

std::vector<DataPoint> run_sweep(const RunConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  std::ofstream out(cfg.out);
  if (!out) throw std::runtime_error("cannot write " + cfg.out);
  out << csv_header() << '\n' << std::flush;
  auto sink = [&](const DataPoint& dp) {
    out << csv_row(dp) << '\n' << std::flush;
    if (!out) throw std::runtime_error("write failed: " + cfg.out);
  };
  auto res = sweep(cfg, sink, progress);
  return res;
}

}  // namespace saqd
