#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "saqd/channel.hpp"
#include "saqd/decoder.hpp"

using namespace saqd;

namespace {

int weight(const std::vector<int>& y) {
  int w = 0;
  for (int v : y) w += v != 0;
  return w;
}

int unit(int d, std::mt19937_64& rng) {
  for (;;) {
    const int u = 1 + static_cast<int>(rng() % (d - 1));
    if (std::gcd(u, d) == 1) return u;
  }
}

// Random check matrix whose graph is balanced: column entries at u and v
// are a*phi_u and -a*phi_v for node potentials phi, as for the code graphs.
CheckMatrix random_checks(int m, int n, int d, std::mt19937_64& rng) {
  CheckMatrix H(m, n, d);
  std::vector<int> phi(m);
  for (int& p : phi) p = unit(d, rng);
  for (int j = 0; j < n; ++j) {
    const int r1 = static_cast<int>(rng() % m), r2 = static_cast<int>(rng() % m);
    const int a = unit(d, rng);
    H.add(r1, j, a * phi[r1] % d);
    if (rng() % 2 && r2 != r1) H.add(r2, j, (d - a * phi[r2] % d) % d);
  }
  return H;
}

// Minimum weight of y with H y = sigma, by enumeration over Z_d^n.
int min_weight(const CheckMatrix& H, const std::vector<int>& sigma) {
  const int n = H.n, d = H.d;
  int best = n + 1;
  std::vector<int> y(n, 0);
  for (;;) {
    if (H.apply(y) == sigma) best = std::min(best, weight(y));
    int i = 0;
    while (i < n && ++y[i] == d) y[i++] = 0;
    if (i == n) break;
  }
  return best;
}

std::vector<int> random_residual(int n, int d, std::mt19937_64& rng) {
  std::vector<int> r(n);
  for (int& v : r) v = static_cast<int>(rng() % d);
  return r;
}

}  // namespace

TEST_CASE("check matrix basics") {
  CheckMatrix H(3, 2, 5);
  H.add(0, 0, 2);
  H.add(2, 0, 3);
  H.add(1, 1, 4);
  H.add(1, 1, 1);  // cancels to zero
  CHECK(H.cols[1].empty());
  CHECK(H.max_column_weight() == 2);
  CHECK(H.apply({1, 3}) == std::vector<int>{2, 0, 3});
  std::stringstream ss;
  H.write_text(ss);
  const CheckMatrix back = CheckMatrix::read_text(ss);
  CHECK(back.m == 3);
  CHECK(back.n == 2);
  CHECK(back.d == 5);
  CHECK(back.apply({1, 3}) == H.apply({1, 3}));
}

TEST_CASE("syndrome graph edges") {
  CheckMatrix H(3, 3, 3);
  H.add(0, 0, 1);
  H.add(1, 0, 2);
  H.add(2, 1, 1);
  SyndromeGraph g(H);
  CHECK(g.edge_count() == 3);
  CHECK(g.edge(0).u == 0);
  CHECK(g.edge(0).v == 1);
  CHECK(g.edge(1).u == 2);
  CHECK(g.edge(1).v == g.aux());
  CHECK(g.edge(2).u == -1);
  CheckMatrix bad(3, 1, 2);
  bad.add(0, 0, 1);
  bad.add(1, 0, 1);
  bad.add(2, 0, 1);
  CHECK_THROWS_AS(SyndromeGraph{bad}, DecoderError);
}

TEST_CASE("zero syndrome decodes to zero") {
  std::mt19937_64 rng(1);
  for (int d : {2, 3, 16}) {
    const CheckMatrix H = random_checks(5, 8, d, rng);
    SyndromeGraph g(H);
    CHECK(weight(cluster_decode(g, std::vector<int>(5, 0))) == 0);
    if (d == 2) CHECK(weight(mwpm_decode(g, std::vector<int>(5, 0))) == 0);
  }
}

TEST_CASE("clustering on a two-node path") {
  // u -- e1 -- v, and both u and v reach the boundary.
  CheckMatrix H(2, 3, 3);
  H.add(0, 0, 1);
  H.add(1, 0, 2);
  H.add(0, 1, 1);
  H.add(1, 2, 1);
  const std::vector<int> sigma{1, 2};
  SyndromeGraph g(H);
  const auto y = cluster_decode(g, sigma);
  CHECK(H.apply(y) == sigma);
  CHECK(weight(y) <= min_weight(H, sigma) + 1);
}

TEST_CASE("opposite charges on adjacent nodes use the connecting edge") {
  for (int d : {2, 3, 5, 16})
    for (int gch = 1; gch < d; ++gch) {
      CheckMatrix H(4, 5, d);
      for (int i = 0; i < 3; ++i) {
        H.add(i, i, 1);
        H.add(i + 1, i, d - 1);
      }
      H.add(0, 3, 1);
      H.add(3, 4, 1);
      std::vector<int> sigma(4, 0);
      sigma[1] = gch;
      sigma[2] = d - gch;
      SyndromeGraph g(H);
      const auto y = cluster_decode(g, sigma);
      CHECK(H.apply(y) == sigma);
      CHECK(weight(y) == 1);
      CHECK(y[1] != 0);
    }
}

TEST_CASE("matching takes a shortest path") {
  // Path 0-1-2-3-4 with boundary only at the far ends.
  CheckMatrix H(5, 6, 2);
  for (int i = 0; i < 4; ++i) {
    H.add(i, i, 1);
    H.add(i + 1, i, 1);
  }
  H.add(0, 4, 1);
  H.add(4, 5, 1);
  const std::vector<int> sigma{0, 1, 0, 1, 0};
  SyndromeGraph g(H);
  const auto y = mwpm_decode(g, sigma);
  CHECK(H.apply(y) == sigma);
  CHECK(weight(y) == 2);
  CHECK(y[1] == 1);
  CHECK(y[2] == 1);
}

TEST_CASE("decoders against exhaustive minimum on small graphs") {
  std::mt19937_64 rng(77);
  int compared = 0;
  for (int rep = 0; rep < 1500; ++rep) {
    const int d = rep % 3 == 0 ? 2 : (rep % 3 == 1 ? 3 : 4);
    const int m = 2 + static_cast<int>(rng() % 5);
    const int n = 2 + static_cast<int>(rng() % (d == 2 ? 11 : 6));
    const CheckMatrix H = random_checks(m, n, d, rng);
    SyndromeGraph g(H);
    REQUIRE(g.is_balanced());
    const auto sigma = H.apply(random_residual(n, d, rng));
    const auto yc = cluster_decode(g, sigma);
    REQUIRE(H.apply(yc) == sigma);
    const int best = min_weight(H, sigma);
    CHECK(weight(yc) >= best);
    if (d == 2) {
      const auto ym = mwpm_decode(g, sigma);
      REQUIRE(H.apply(ym) == sigma);
      CHECK(weight(ym) == best);
      CHECK(weight(ym) <= weight(yc));
      ++compared;
    }
  }
  CHECK(compared >= 500);
}

TEST_CASE("decoder validity on code graphs") {
  std::mt19937_64 rng(99);
  for (int d : {2, 3, 16}) {
    const SubsystemCode code = build_code(Manifold::Cube, 4, d);
    for (const CheckMatrix& H : {build_validation_checks(code), build_correction_checks(code)}) {
      CHECK(H.max_column_weight() <= 2);
      SyndromeGraph g(H);
      CHECK(g.is_balanced());
      ClusterDecoder cd(g);
      MatchingDecoder md(g);
      int bad = 0;
      for (int rep = 0; rep < 10000; ++rep) {
        // Sparse random y gives local syndromes like the channel produces.
        std::vector<int> y(H.n, 0);
        const int errs = 1 + static_cast<int>(rng() % 12);
        for (int k = 0; k < errs; ++k)
          y[rng() % H.n] = 1 + static_cast<int>(rng() % (d - 1));
        const auto sigma = H.apply(y);
        if (H.apply(cd.decode(sigma)) != sigma) ++bad;
        if (d == 2 && H.apply(md.decode(sigma)) != sigma) ++bad;
      }
      CHECK(bad == 0);
    }
  }
}

TEST_CASE("validation checks on physical flux") {
  std::mt19937_64 rng(5);
  for (Manifold m : {Manifold::Torus3, Manifold::T2xI, Manifold::T2xIPrime, Manifold::Cube})
    for (int d : {2, 3}) {
      const SubsystemCode code = build_code(m, 2, d);
      const CheckMatrix H1 = build_validation_checks(code);
      INFO(manifold_name(m) << " d=" << d);
      CHECK(H1.max_column_weight() <= 2);
      CHECK(H1.n == static_cast<int>(code.layout.flux_gauge.size()));
      int bad = 0;
      for (int rep = 0; rep < 1000; ++rep) {
        const auto f = measure_flux(code, random_residual(code.n(), d, rng));
        if (weight(H1.apply(f)) != 0) ++bad;
      }
      CHECK(bad == 0);
      CHECK(weight(H1.apply(std::vector<int>(H1.n, 0))) == 0);
      // A single corrupted entry lights only the checks of its column.
      for (int j = 0; j < H1.n; ++j) {
        std::vector<int> f(H1.n, 0);
        f[j] = 1;
        const auto s = H1.apply(f);
        CHECK(weight(s) == static_cast<int>(H1.cols[j].size()));
      }
    }
}

TEST_CASE("correction checks") {
  std::mt19937_64 rng(6);
  for (Manifold m : {Manifold::Torus3, Manifold::T2xI, Manifold::Cube})
    for (int d : {2, 3}) {
      const SubsystemCode code = build_code(m, 4, d);
      REQUIRE(code.layout.identity_frame);
      const CheckMatrix H2 = build_correction_checks(code);
      INFO(manifold_name(m) << " d=" << d);
      CHECK(H2.max_column_weight() <= 2);
      for (int rep = 0; rep < 20; ++rep)
        CHECK(weight(H2.apply(random_z_gauge(code, rng))) == 0);
      for (const auto& l : code.dressed_logicals)
        CHECK(weight(H2.apply(l.z.dense_z())) == 0);
      int two = 0;
      for (int q = 0; q < code.n(); ++q) {
        if (code.lat.qudits[q].cls != QuditClass::Bulk || code.lat.qudits[q].tags) continue;
        std::vector<int> e(code.n(), 0);
        e[q] = d - 1;
        const auto s = H2.apply(e);
        two += weight(s) == 2;
        for (int v : s) CHECK((v == 0 || v == 1 || v == d - 1));
      }
      CHECK(two > 0);
    }
}

TEST_CASE("two-stage decoding") {
  for (Manifold m : {Manifold::Torus3, Manifold::T2xI, Manifold::T2xIPrime, Manifold::Cube})
    for (int d : {2, 3}) {
      const SubsystemCode code = build_code(m, 4, d);
      INFO(manifold_name(m) << " d=" << d);
      TwoStageDecoder dec(code, {});
      const auto zero = dec.decode(std::vector<int>(code.layout.flux_gauge.size(), 0));
      CHECK(weight(zero.correction) == 0);

      // A single measurement error leaves the logical state alone.
      TrialRunner runner(code, {});
      int failures = 0;
      for (std::size_t j = 0; j < code.layout.flux_gauge.size(); ++j)
        for (int c = 1; c < d; ++c) {
          std::vector<int> noisy(code.layout.flux_gauge.size(), 0);
          noisy[j] = c;
          std::vector<int> residual(code.n(), 0);
          const auto res = dec.decode(noisy);
          for (int q = 0; q < code.n(); ++q)
            residual[q] = mod(residual[q] - res.correction[q], d);
          // Settle any leftover syndrome with one ideal round.
          Rng rng = trial_rng(1, j);
          if (runner.run({0.0, 0}, rng, residual)) ++failures;
        }
      CHECK(failures == 0);
    }
}

TEST_CASE("single qudit error leaves a stabilizer-or-gauge residual") {
  for (int d : {2, 3}) {
    const SubsystemCode code = build_code(Manifold::Cube, 2, d);
    std::vector<PauliOp> span;
    for (const auto& g : code.gauge) span.push_back(g.op);
    const GroupBasis basis = group_structure(span, d);
    TwoStageDecoder dec(code, {});
    TrialRunner runner(code, {});
    for (int q = 0; q < code.n(); ++q) {
      std::vector<int> residual(code.n(), 0);
      residual[q] = 1;
      const auto res = dec.decode(runner.flux(residual));
      for (int k = 0; k < code.n(); ++k)
        residual[k] = mod(residual[k] - res.correction[k], d);
      INFO("qudit " << q << " d=" << d);
      CHECK(is_member(PauliOp::from_dense(d, std::vector<int>(code.n(), 0), residual), basis));
    }
  }
}

TEST_CASE("matching requires d = 2") {
  const SubsystemCode code = build_code(Manifold::Cube, 2, 3);
  CHECK_THROWS_AS(TwoStageDecoder(code, {DecoderKind::Matching, DecoderKind::Clustering}),
                  DecoderError);
  CHECK(parse_decoder("uf") == DecoderKind::Clustering);
  CHECK(parse_decoder("mwpm") == DecoderKind::Matching);
  CHECK_THROWS_AS(parse_decoder("bp"), DecoderError);
}
