#include <doctest.h>

#include <cmath>
#include <map>

#include "saqd/channel.hpp"

using namespace saqd;

namespace {

const Manifold kAll[] = {Manifold::Torus3, Manifold::T2xI, Manifold::T2xIPrime,
                         Manifold::Cube};

std::vector<int> random_residual(int n, int d, Rng& rng) {
  std::vector<int> r(n);
  for (int& v : r) v = static_cast<int>(rng() % d);
  return r;
}

std::vector<int> add(std::vector<int> a, const std::vector<int>& b, int d, int k = 1) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = mod(a[i] + 1LL * k * b[i], d);
  return a;
}

int weight(const std::vector<int>& v) {
  int w = 0;
  for (int x : v) w += x != 0;
  return w;
}

// Flux on the measured X gauge generator with gauge index g.
std::map<int, int> flux_by_gauge(const SubsystemCode& code, const std::vector<int>& f) {
  std::map<int, int> out;
  for (std::size_t i = 0; i < code.layout.flux_gauge.size(); ++i)
    out[code.layout.flux_gauge[i]] = f[i];
  return out;
}

}  // namespace

TEST_CASE("mix64 and trial streams") {
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
  Rng a = trial_rng(7, 3), b = trial_rng(7, 3), c = trial_rng(7, 4);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
}

TEST_CASE("sample_z_error") {
  Rng rng(1);
  CHECK(weight(sample_z_error(100, 0.0, 3, rng)) == 0);
  const auto all = sample_z_error(100, 1.0, 2, rng);
  for (int v : all) CHECK(v == 1);
  const auto e = sample_z_error(10000, 0.1, 4, rng);
  CHECK(std::abs(weight(e) - 1000.0) <= 5 * std::sqrt(10000 * 0.1 * 0.9));
  for (int v : e) CHECK((v >= 0 && v < 4));
}

TEST_CASE("corrupt_measurements") {
  Rng rng(2);
  std::vector<int> f(10000);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<int>(i % 5);
  CHECK(corrupt_measurements(f, 0.0, 5, rng) == f);
  const auto all = corrupt_measurements(f, 1.0, 5, rng);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(all[i] != f[i]);
  const auto some = corrupt_measurements(f, 0.05, 5, rng);
  int flipped = 0;
  for (std::size_t i = 0; i < f.size(); ++i) flipped += some[i] != f[i];
  CHECK(std::abs(flipped / 1e4 - 0.05) <= 5 * std::sqrt(0.05 * 0.95 / 1e4));
}

TEST_CASE("random gauge is invisible to stabilizers and bare logicals") {
  Rng rng(3);
  for (Manifold m : kAll)
    for (int d : {2, 3}) {
      const SubsystemCode code = build_code(m, 2, d);
      INFO(manifold_name(m) << " d=" << d);
      for (int rep = 0; rep < 20; ++rep) {
        const auto gz = random_z_gauge(code, rng);
        for (const auto& s : code.stabilizers)
          CHECK(symplectic_product(s.op, PauliOp::from_dense(d, std::vector<int>(code.n(), 0), gz)) == 0);
        CHECK_FALSE(logical_failure(code, gz));
      }
    }
}

TEST_CASE("random gauge is uniform on a toy group") {
  // Two Z generators Z0 and Z0 Z1 over Z_3: nine group elements.
  SubsystemCode toy;
  toy.d = 3;
  toy.lat.n = 2;
  toy.gauge.push_back({PauliOp::z_type(2, 3, {{0, 1}}), TermType::A, Color::Green, 0, -1, -1});
  toy.gauge.push_back({PauliOp::z_type(2, 3, {{0, 1}, {1, 1}}), TermType::A, Color::Yellow, 1, -1, -1});
  Rng rng(4);
  std::map<std::pair<int, int>, int> count;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto g = random_z_gauge(toy, rng);
    count[{g[0], g[1]}]++;
  }
  CHECK(count.size() == 9);
  double chi2 = 0;
  for (const auto& [k, c] : count) chi2 += (c - draws / 9.0) * (c - draws / 9.0) / (draws / 9.0);
  // 8 degrees of freedom; 26.12 is the 0.999 quantile.
  CHECK(chi2 < 26.12);
}

TEST_CASE("measure_flux") {
  for (Manifold m : kAll) {
    const SubsystemCode code = build_code(m, 2, 3);
    INFO(manifold_name(m));
    CHECK(weight(measure_flux(code, std::vector<int>(code.n(), 0))) == 0);
    for (int q = 0; q < code.n(); q += 3) {
      std::vector<int> e(code.n(), 0);
      e[q] = 2;
      const auto f = measure_flux(code, e);
      for (std::size_t i = 0; i < f.size(); ++i) {
        const PauliOp& op = code.gauge[code.layout.flux_gauge[i]].op;
        if (op.x(q) == 0) CHECK(f[i] == 0);
        else CHECK(f[i] == mod(2 * op.x(q), 3));
      }
    }
  }
}

TEST_CASE("flux into a bulk sphere vanishes") {
  Rng rng(15);
  for (Manifold m : kAll)
    for (int d : {2, 3, 4}) {
      const SubsystemCode code = build_code(m, 4, d);
      INFO(manifold_name(m) << " d=" << d);
      int bad = 0, checked = 0;
      for (int rep = 0; rep < 200; ++rep) {
        const auto by_gauge =
            flux_by_gauge(code, measure_flux(code, random_residual(code.n(), d, rng)));
        std::map<int, long long> total;
        for (const auto& [g, v] : by_gauge) total[code.gauge[g].sphere] += v;
        for (const auto& [sphere, v] : total) {
          if (sphere < 0 || code.lat.spheres[sphere].incidence.size() != 6) continue;
          ++checked;
          if (mod(v, d) != 0) ++bad;
        }
      }
      CHECK(checked > 0);
      CHECK(bad == 0);
    }
}

TEST_CASE("Gauss laws on physical flux") {
  Rng rng(5);
  for (Manifold m : {Manifold::Torus3, Manifold::T2xI, Manifold::Cube})
    for (int d : {2, 3, 4}) {
      const SubsystemCode code = build_code(m, 2, d);
      INFO(manifold_name(m) << " d=" << d);
      // Per red volume: the green flux sum equals the yellow flux sum, and
      // both equal the local X-stabilizer syndrome there.
      std::map<int, const StabGen*> local_x;
      for (const auto& s : code.stabilizers)
        if (s.kind == StabKind::LocalX) local_x[s.locus] = &s;
      int checked = 0;
      for (int rep = 0; rep < 1000; ++rep) {
        const auto r = random_residual(code.n(), d, rng);
        const auto by_gauge = flux_by_gauge(code, measure_flux(code, r));
        std::map<int, long long> green, yellow;
        for (const auto& [g, v] : by_gauge) {
          const GaugeGen& gen = code.gauge[g];
          if (gen.volume < 0) continue;
          (gen.color == Color::Green ? green : yellow)[gen.volume] += v;
        }
        for (const auto& [vol, stab] : local_x) {
          const PauliOp rz = PauliOp::from_dense(d, std::vector<int>(code.n(), 0), r);
          const int syn = symplectic_product(stab->op, rz);
          CHECK(mod(green[vol] - yellow[vol], d) == 0);
          CHECK(mod(green[vol], d) == syn);
          ++checked;
        }
      }
      CHECK(checked > 0);
    }
}

TEST_CASE("logical failure verdicts") {
  Rng rng(6);
  for (Manifold m : kAll)
    for (int d : {2, 3}) {
      const SubsystemCode code = build_code(m, 4, d);
      INFO(manifold_name(m) << " d=" << d);
      std::vector<int> zero(code.n(), 0);
      CHECK_FALSE(logical_failure(code, zero));
      for (const auto& s : code.stabilizers)
        if (s.kind == StabKind::LocalZ) CHECK_FALSE(logical_failure(code, s.op.dense_z()));
      for (int i : code.z_gauge_indices())
        CHECK_FALSE(logical_failure(code, code.gauge[i].op.dense_z()));
      for (const auto& l : code.dressed_logicals) {
        const auto lz = l.z.dense_z();
        CHECK(logical_failure(code, lz));
        // Gauge dressing never changes the verdict.
        for (int rep = 0; rep < 5; ++rep)
          CHECK(logical_failure(code, add(lz, random_z_gauge(code, rng), d)));
      }
      std::vector<int> bad(code.n(), 0);
      bad[0] = 1;
      bool throws_or_fails = false;
      try {
        throws_or_fails = logical_failure(code, bad);
      } catch (const DecoderError&) {
        throws_or_fails = true;
      }
      CHECK(throws_or_fails);
    }
}

TEST_CASE("trial outcomes") {
  for (Manifold m : kAll)
    for (int d : {2, 3, 16}) {
      const SubsystemCode code = build_code(m, 2, d);
      TrialRunner runner(code, {});
      INFO(manifold_name(m) << " d=" << d);
      for (int t : {0, 1, 4}) {
        Rng rng = trial_rng(1, t);
        CHECK_FALSE(runner.run({0.0, t}, rng));
      }
      for (const auto& l : code.dressed_logicals) {
        Rng rng = trial_rng(2, 0);
        CHECK(runner.run({0.0, 0}, rng, l.z.dense_z()));
      }
    }
}

TEST_CASE("trials are deterministic") {
  const SubsystemCode code = build_code(Manifold::Cube, 4, 3);
  TrialRunner a(code, {}), b(code, {});
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng ra = trial_rng(9, i), rb = trial_rng(9, i);
    std::vector<CycleRecord> la, lb;
    CHECK(a.run({0.01, 3}, ra, {}, &la) == b.run({0.01, 3}, rb, {}, &lb));
    REQUIRE(la.size() == 4);
    for (std::size_t c = 0; c < la.size(); ++c) CHECK(la[c].correction == lb[c].correction);
  }
}

TEST_CASE("single qudit errors are corrected") {
  for (Manifold m : {Manifold::Torus3, Manifold::T2xI, Manifold::Cube})
    for (int d : {2, 3}) {
      const SubsystemCode code = build_code(m, 4, d);
      TrialRunner runner(code, {});
      int failures = 0;
      for (int q = 0; q < code.n(); ++q)
        for (int j = 1; j < d; ++j) {
          std::vector<int> e(code.n(), 0);
          e[q] = j;
          Rng rng = trial_rng(3, q);
          if (runner.run({0.0, 1}, rng, e)) ++failures;
        }
      INFO(manifold_name(m) << " d=" << d);
      CHECK(failures == 0);
    }
}
