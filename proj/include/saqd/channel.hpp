// Phenomenological Z noise and the error-correction cycle: random Z gauge,
// qudit errors, X flux measurement, measurement corruption, two-stage
// decoding and final logical adjudication.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "saqd/code.hpp"
#include "saqd/decoder.hpp"

namespace saqd {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);
// Stream for trial `index` under master `seed`: mt19937_64 seeded with
// mix64(seed ^ index).
Rng trial_rng(std::uint64_t seed, std::uint64_t index);

struct NoiseParams {
  double p = 0.0;       // qudit error rate
  int t = 0;            // noisy cycles before the ideal readout round
  double p_meas = -1.0; // measurement error rate; negative means p
  double measurement_rate() const { return p_meas < 0 ? p : p_meas; }
};

std::vector<int> sample_z_error(int n, double p, int d, Rng& rng);
std::vector<int> random_z_gauge(const SubsystemCode& code, Rng& rng);
std::vector<int> measure_flux(const SubsystemCode& code,
                              const std::vector<int>& residual);
std::vector<int> corrupt_measurements(std::vector<int> flux, double p, int d,
                                      Rng& rng);
// Throws DecoderError if the residual still has a local X-stabilizer
// syndrome. A residual flagged by a sheet stabilizer counts as a failure.
bool logical_failure(const SubsystemCode& code,
                     const std::vector<int>& residual);

struct CycleRecord {
  std::vector<int> flux;
  std::vector<int> noisy_flux;
  std::vector<int> corrected_flux;
  std::vector<int> correction;
};

// Per-worker trial engine: sparse tables of the code plus a decoder with its
// scratch space.
class TrialRunner {
 public:
  TrialRunner(const SubsystemCode& code, DecoderConfig cfg);

  // t noisy cycles then one ideal cycle. `initial` seeds the residual (empty
  // means zero); `log` receives one record per cycle when given.
  bool run(const NoiseParams& noise, Rng& rng,
           const std::vector<int>& initial = {},
           std::vector<CycleRecord>* log = nullptr);

  // One cycle on `residual` with the given rates.
  void cycle(std::vector<int>& residual, double p_data, double p_meas,
             Rng& rng, CycleRecord* rec = nullptr);

  bool failed(const std::vector<int>& residual) const;
  std::vector<int> flux(const std::vector<int>& residual) const;
  void add_random_gauge(std::vector<int>& residual, Rng& rng) const;

 private:
  struct Sparse {
    std::vector<int> start;
    std::vector<int> qudit;
    std::vector<int> value;
    int rows() const { return static_cast<int>(start.size()) - 1; }
  };
  static Sparse z_rows(const std::vector<PauliOp>& ops);
  static Sparse x_rows(const std::vector<PauliOp>& ops);
  std::vector<int> products(const Sparse& s,
                            const std::vector<int>& residual) const;

  const SubsystemCode& code_;
  int d_;
  Sparse z_gauge_;
  Sparse x_flux_;
  Sparse local_x_;
  Sparse sheet_x_;
  Sparse bare_x_;
  TwoStageDecoder decoder_;
};

bool run_trial(const SubsystemCode& code, const NoiseParams& noise,
               DecoderConfig cfg, Rng& rng);

}  // namespace saqd
