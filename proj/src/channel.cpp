#include "saqd/channel.hpp"

namespace saqd {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng trial_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix64(seed ^ index));
}

namespace {

bool bernoulli(double p, Rng& rng) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

int uniform_below(int k, Rng& rng) {
  return std::uniform_int_distribution<int>(0, k - 1)(rng);
}

}  // namespace

std::vector<int> sample_z_error(int n, double p, int d, Rng& rng) {
  std::vector<int> e(n, 0);
  for (int q = 0; q < n; ++q)
    if (bernoulli(p, rng)) e[q] = 1 + uniform_below(d - 1, rng);
  return e;
}

std::vector<int> corrupt_measurements(std::vector<int> flux, double p, int d,
                                      Rng& rng) {
  for (int& f : flux)
    if (bernoulli(p, rng)) f = mod(f + 1 + uniform_below(d - 1, rng), d);
  return flux;
}

TrialRunner::Sparse TrialRunner::z_rows(const std::vector<PauliOp>& ops) {
  Sparse s;
  s.start.push_back(0);
  for (const auto& op : ops) {
    for (const auto& e : op.entries())
      if (e.z != 0) {
        s.qudit.push_back(e.q);
        s.value.push_back(e.z);
      }
    s.start.push_back(static_cast<int>(s.qudit.size()));
  }
  return s;
}

TrialRunner::Sparse TrialRunner::x_rows(const std::vector<PauliOp>& ops) {
  Sparse s;
  s.start.push_back(0);
  for (const auto& op : ops) {
    for (const auto& e : op.entries())
      if (e.x != 0) {
        s.qudit.push_back(e.q);
        s.value.push_back(e.x);
      }
    s.start.push_back(static_cast<int>(s.qudit.size()));
  }
  return s;
}

TrialRunner::TrialRunner(const SubsystemCode& code, DecoderConfig cfg)
    : code_(code), d_(code.d), decoder_(code, cfg) {
  std::vector<PauliOp> zg, xf, lx, sx, bx;
  for (int i : code.z_gauge_indices()) zg.push_back(code.gauge[i].op);
  for (int i : code.layout.flux_gauge) xf.push_back(code.gauge[i].op);
  for (const auto& s : code.stabilizers) {
    if (s.kind == StabKind::LocalX) lx.push_back(s.op);
    if (s.kind == StabKind::SheetX) sx.push_back(s.op);
  }
  for (const auto& l : code.bare_logicals) bx.push_back(l.x);
  z_gauge_ = z_rows(zg);
  x_flux_ = x_rows(xf);
  local_x_ = x_rows(lx);
  sheet_x_ = x_rows(sx);
  bare_x_ = x_rows(bx);
}

// Symplectic product of each X-type row with a Z-type residual.
std::vector<int> TrialRunner::products(const Sparse& s,
                                       const std::vector<int>& residual) const {
  std::vector<int> out(s.rows());
  for (int r = 0; r < s.rows(); ++r) {
    long long acc = 0;
    for (int k = s.start[r]; k < s.start[r + 1]; ++k)
      acc += 1LL * s.value[k] * residual[s.qudit[k]];
    out[r] = mod(acc, d_);
  }
  return out;
}

std::vector<int> TrialRunner::flux(const std::vector<int>& residual) const {
  return products(x_flux_, residual);
}

void TrialRunner::add_random_gauge(std::vector<int>& residual, Rng& rng) const {
  for (int r = 0; r < z_gauge_.rows(); ++r) {
    const int e = uniform_below(d_, rng);
    if (e == 0) continue;
    for (int k = z_gauge_.start[r]; k < z_gauge_.start[r + 1]; ++k) {
      int& v = residual[z_gauge_.qudit[k]];
      v = mod(v + 1LL * e * z_gauge_.value[k], d_);
    }
  }
}

bool TrialRunner::failed(const std::vector<int>& residual) const {
  for (int s : products(local_x_, residual))
    if (s != 0)
      throw DecoderError("residual carries a stabilizer syndrome at readout");
  for (int s : products(sheet_x_, residual))
    if (s != 0) return true;
  for (int s : products(bare_x_, residual))
    if (s != 0) return true;
  return false;
}

void TrialRunner::cycle(std::vector<int>& residual, double p_data,
                        double p_meas, Rng& rng, CycleRecord* rec) {
  const int n = code_.n();
  add_random_gauge(residual, rng);
  if (p_data > 0) {
    std::vector<int> e = sample_z_error(n, p_data, d_, rng);
    for (int q = 0; q < n; ++q)
      if (e[q] != 0) residual[q] = mod(residual[q] + e[q], d_);
  }
  std::vector<int> f = flux(residual);
  std::vector<int> noisy =
      p_meas > 0 ? corrupt_measurements(f, p_meas, d_, rng) : f;
  TwoStageResult res = decoder_.decode(noisy);
  for (int q = 0; q < n; ++q)
    if (res.correction[q] != 0)
      residual[q] = mod(residual[q] - res.correction[q], d_);
  if (rec) {
    rec->flux = std::move(f);
    rec->noisy_flux = std::move(noisy);
    rec->corrected_flux = std::move(res.corrected_flux);
    rec->correction = std::move(res.correction);
  }
}

bool TrialRunner::run(const NoiseParams& noise, Rng& rng,
                      const std::vector<int>& initial,
                      std::vector<CycleRecord>* log) {
  std::vector<int> residual = initial;
  residual.resize(code_.n(), 0);
  for (int& v : residual) v = mod(v, d_);
  if (log) log->clear();
  for (int c = 0; c <= noise.t; ++c) {
    const bool ideal = c == noise.t;
    CycleRecord rec;
    cycle(residual, ideal ? 0.0 : noise.p, ideal ? 0.0 : noise.measurement_rate(),
          rng, log ? &rec : nullptr);
    if (log) log->push_back(std::move(rec));
  }
  return failed(residual);
}

std::vector<int> random_z_gauge(const SubsystemCode& code, Rng& rng) {
  std::vector<int> out(code.n(), 0);
  const int d = code.d;
  for (int i : code.z_gauge_indices()) {
    const int e = uniform_below(d, rng);
    if (e == 0) continue;
    for (const auto& en : code.gauge[i].op.entries())
      out[en.q] = mod(out[en.q] + 1LL * e * en.z, d);
  }
  return out;
}

std::vector<int> measure_flux(const SubsystemCode& code,
                              const std::vector<int>& residual) {
  std::vector<int> out;
  out.reserve(code.layout.flux_gauge.size());
  for (int i : code.layout.flux_gauge) {
    long long acc = 0;
    for (const auto& e : code.gauge[i].op.entries())
      acc += 1LL * e.x * residual[e.q];
    out.push_back(mod(acc, code.d));
  }
  return out;
}

bool logical_failure(const SubsystemCode& code,
                     const std::vector<int>& residual) {
  const int d = code.d;
  auto sp = [&](const PauliOp& op) {
    long long acc = 0;
    for (const auto& e : op.entries()) acc += 1LL * e.x * residual[e.q];
    return mod(acc, d);
  };
  for (const auto& s : code.stabilizers)
    if (s.kind == StabKind::LocalX && sp(s.op) != 0)
      throw DecoderError("residual carries a stabilizer syndrome at readout");
  for (const auto& s : code.stabilizers)
    if (s.kind == StabKind::SheetX && sp(s.op) != 0) return true;
  for (const auto& l : code.bare_logicals)
    if (sp(l.x) != 0) return true;
  return false;
}

bool run_trial(const SubsystemCode& code, const NoiseParams& noise,
               DecoderConfig cfg, Rng& rng) {
  TrialRunner runner(code, cfg);
  return runner.run(noise, rng);
}

}  // namespace saqd
