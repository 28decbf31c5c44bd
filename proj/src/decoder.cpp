#include "saqd/decoder.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <tuple>

#include "saqd/blossom.hpp"

namespace saqd {

void CheckMatrix::add(int row, int col, int value) {
  if (row < 0 || row >= m || col < 0 || col >= n)
    throw DecoderError("check matrix entry out of range");
  auto& c = cols[col];
  for (auto it = c.begin(); it != c.end(); ++it) {
    if (it->first != row) continue;
    it->second = mod(it->second + value, d);
    if (it->second == 0) c.erase(it);
    return;
  }
  const int v = mod(value, d);
  if (v == 0) return;
  c.push_back({row, v});
  std::sort(c.begin(), c.end());
}

int CheckMatrix::max_column_weight() const {
  std::size_t w = 0;
  for (const auto& c : cols) w = std::max(w, c.size());
  return static_cast<int>(w);
}

std::vector<int> CheckMatrix::apply(const std::vector<int>& y) const {
  if (static_cast<int>(y.size()) != n)
    throw DecoderError("vector length does not match the column count");
  std::vector<long long> acc(m, 0);
  for (int j = 0; j < n; ++j) {
    if (y[j] == 0) continue;
    for (auto [r, v] : cols[j]) acc[r] += 1LL * v * y[j];
  }
  std::vector<int> out(m);
  for (int i = 0; i < m; ++i) out[i] = mod(acc[i], d);
  return out;
}

void CheckMatrix::write_text(std::ostream& os) const {
  os << m << ' ' << n << ' ' << d << '\n';
  std::vector<std::tuple<int, int, int>> entries;
  for (int j = 0; j < n; ++j)
    for (auto [r, v] : cols[j]) entries.emplace_back(r, j, v);
  std::sort(entries.begin(), entries.end());
  for (auto [r, j, v] : entries) os << r << ' ' << j << ' ' << v << '\n';
}

CheckMatrix CheckMatrix::read_text(std::istream& is) {
  int m = 0, n = 0, d = 0;
  if (!(is >> m >> n >> d) || m < 0 || n < 0 || d < 2)
    throw DecoderError("malformed check matrix header");
  CheckMatrix H(m, n, d);
  int r, c, v;
  while (is >> r >> c >> v) H.add(r, c, v);
  return H;
}

CheckMatrix build_validation_checks(const SubsystemCode& code) {
  const auto& lay = code.layout;
  CheckMatrix H(static_cast<int>(lay.relations.size()),
                static_cast<int>(lay.flux_gauge.size()), code.d);
  for (int r = 0; r < H.m; ++r)
    for (auto [v, c] : lay.relations[r]) H.add(r, v, c);
  if (H.max_column_weight() > 2)
    throw DecoderError("a flux variable enters more than two relations");
  return H;
}

CheckMatrix build_correction_checks(const SubsystemCode& code) {
  const auto& lay = code.layout;
  CheckMatrix H(static_cast<int>(lay.checks.size()), code.n(), code.d);
  for (int r = 0; r < H.m; ++r)
    for (const auto& e : lay.checks[r].entries())
      if (e.x != 0) H.add(r, e.q, e.x);
  if (H.max_column_weight() > 2)
    throw DecoderError("a qudit enters more than two stabilizer checks");
  return H;
}

SyndromeGraph::SyndromeGraph(const CheckMatrix& H)
    : m_(H.m), d_(H.d), adj_(H.m + 1), inv_(H.d, 0) {
  for (int a = 1; a < d_; ++a)
    for (int b = 1; b < d_; ++b)
      if (a * b % d_ == 1) inv_[a] = b;
  auto unit = [&](int a) {
    if (inv_[a] == 0)
      throw DecoderError("check coefficient is not a unit of Z_d");
    return a;
  };
  edges_.reserve(H.n);
  for (int j = 0; j < H.n; ++j) {
    const auto& c = H.cols[j];
    if (c.size() > 2) throw DecoderError("column with more than two entries");
    GraphEdge e{-1, m_, 0, 0};
    if (c.size() >= 1) {
      e.u = c[0].first;
      e.cu = unit(c[0].second);
    }
    if (c.size() == 2) {
      e.v = c[1].first;
      e.cv = unit(c[1].second);
    }
    edges_.push_back(e);
    if (e.u < 0) continue;
    adj_[e.u].push_back({e.v, j});
    adj_[e.v].push_back({e.u, j});
  }
  for (auto& a : adj_) std::sort(a.begin(), a.end());
}

bool SyndromeGraph::is_balanced() const {
  std::vector<int> pot(m_, 0);
  for (int s = 0; s < m_; ++s) {
    if (pot[s] != 0) continue;
    pot[s] = 1;
    std::vector<int> queue{s};
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const int w = queue[h];
      for (auto [nb, e] : adj_[w]) {
        if (nb == m_) continue;
        // Charge c at w arrives at nb as c * t.
        const int t = mod(-1LL * coefficient(e, nb) * inv_[coefficient(e, w)], d_);
        const int want = mod(1LL * pot[w] * inv_[t], d_);
        if (pot[nb] == 0) {
          pot[nb] = want;
          queue.push_back(nb);
        } else if (pot[nb] != want) {
          return false;
        }
      }
    }
  }
  return true;
}

SyndromeGraph build_syndrome_graph(const CheckMatrix& H) {
  return SyndromeGraph(H);
}

// ---------------------------------------------------------------------------
// Clustering

ClusterDecoder::ClusterDecoder(const SyndromeGraph& g)
    : g_(g),
      owner_(g.nodes(), -1),
      factor_(g.nodes(), 1),
      residual_(g.nodes(), 0),
      tree_(g.nodes()) {}

// Multiplier picked up by charge moved from v across e to u.
static int transfer(const SyndromeGraph& g, int e, int from, int to) {
  const int a_from = g.coefficient(e, from);
  const int a_to = g.coefficient(e, to);
  return mod(-1LL * a_to * g.inverse_unit(a_from), g.d());
}

int ClusterDecoder::charge_after_merge(int a, int b, int u, int v, int e) {
  const int d = g_.d();
  const int scale = mod(1LL * factor_[u] * transfer(g_, e, v, u) % d *
                            g_.inverse_unit(factor_[v]),
                        d);
  return mod(clusters_[a].charge + 1LL * scale * clusters_[b].charge, d);
}

void ClusterDecoder::merge(int big, int small, int u, int v, int e) {
  const int d = g_.d();
  Cluster& B = clusters_[big];
  Cluster& S = clusters_[small];
  const int scale = mod(1LL * factor_[u] * transfer(g_, e, v, u) % d *
                            g_.inverse_unit(factor_[v]),
                        d);
  B.charge = mod(B.charge + 1LL * scale * S.charge, d);
  for (int w : S.members) {
    factor_[w] = mod(1LL * scale * factor_[w], d);
    owner_[w] = big;
  }
  tree_[u].push_back({v, e});
  tree_[v].push_back({u, e});
  B.members.insert(B.members.end(), S.members.begin(), S.members.end());
  B.frontier.insert(B.frontier.end(), S.frontier.begin(), S.frontier.end());
  B.size += S.size;
  if (B.aux_node < 0 && S.aux_node >= 0) {
    B.aux_node = S.aux_node;
    B.aux_edge = S.aux_edge;
  }
  S.active = false;
  S.members.clear();
  S.frontier.clear();
}

void ClusterDecoder::neutralize(int c, std::vector<int>& y) {
  const int d = g_.d();
  Cluster& C = clusters_[c];
  const int top = C.aux_node >= 0 ? C.aux_node : C.root;
  // Breadth-first order from the target, then push charges up the tree.
  std::vector<int> order{top};
  std::vector<std::pair<int, int>> up;  // (parent, edge) per order entry
  up.push_back({-1, -1});
  for (std::size_t h = 0; h < order.size(); ++h) {
    const int w = order[h];
    for (auto [nb, e] : tree_[w]) {
      if (nb == up[h].first && e == up[h].second) continue;
      order.push_back(nb);
      up.push_back({w, e});
    }
  }
  for (std::size_t h = order.size(); h-- > 1;) {
    const int w = order[h];
    const int c_w = residual_[w];
    if (c_w == 0) continue;
    const auto [p, e] = up[h];
    const int ye = mod(1LL * c_w * g_.inverse_unit(g_.coefficient(e, w)), d);
    y[e] = mod(y[e] + ye, d);
    residual_[w] = 0;
    residual_[p] = mod(residual_[p] - 1LL * g_.coefficient(e, p) * ye, d);
  }
  if (residual_[top] != 0) {
    if (C.aux_node < 0)
      throw DecoderError("neutral cluster left charge at its root");
    const int e = C.aux_edge;
    const int ye = mod(1LL * residual_[top] * g_.inverse_unit(g_.coefficient(e, top)), d);
    y[e] = mod(y[e] + ye, d);
    residual_[top] = 0;
  }
  for (int w : C.members) {
    owner_[w] = -1;
    factor_[w] = 1;
    tree_[w].clear();
  }
  C.active = false;
  C.members.clear();
  C.frontier.clear();
}

std::vector<int> ClusterDecoder::decode(const std::vector<int>& sigma) {
  const int m = g_.checks();
  const int d = g_.d();
  const int aux = g_.aux();
  if (static_cast<int>(sigma.size()) != m)
    throw DecoderError("syndrome length does not match the check count");
  std::vector<int> y(g_.edge_count(), 0);
  clusters_.clear();
  for (int i = 0; i < m; ++i) {
    residual_[i] = mod(sigma[i], d);
    if (residual_[i] == 0) continue;
    owner_[i] = static_cast<int>(clusters_.size());
    clusters_.push_back({i, 1, residual_[i], -1, -1, true, {i}, {i}});
  }
  struct Pending {
    int u, v, e;
  };
  std::vector<Pending> pending;
  for (;;) {
    bool any_active = false;
    bool progress = false;
    pending.clear();
    // Grow.
    for (int c = 0; c < static_cast<int>(clusters_.size()); ++c) {
      if (!clusters_[c].active) continue;
      any_active = true;
      std::vector<int> batch;
      batch.swap(clusters_[c].frontier);
      std::vector<int> grown, retry;
      std::size_t idx = 0;
      bool stop = false;
      for (; idx < batch.size() && !stop; ++idx) {
        const int w = batch[idx];
        for (auto [nb, e] : g_.adjacent(w)) {
          Cluster& C = clusters_[c];
          if (nb == aux) {
            if (C.aux_node < 0) {
              C.aux_node = w;
              C.aux_edge = e;
              progress = true;
            }
            stop = true;
            break;
          }
          const int o = owner_[nb];
          if (o == c) continue;
          if (o < 0) {
            owner_[nb] = c;
            factor_[nb] = mod(1LL * factor_[w] * transfer(g_, e, nb, w), d);
            tree_[w].push_back({nb, e});
            tree_[nb].push_back({w, e});
            C.members.push_back(nb);
            ++C.size;
            grown.push_back(nb);
            progress = true;
            continue;
          }
          const Cluster& O = clusters_[o];
          if (O.aux_node >= 0 || O.charge == 0) {
            // That cluster is neutralized this epoch; look again next time.
            if (retry.empty() || retry.back() != w) retry.push_back(w);
            continue;
          }
          pending.push_back({w, nb, e});
          progress = true;
          if (charge_after_merge(c, o, w, nb, e) == 0) {
            stop = true;
            break;
          }
        }
      }
      auto& fr = clusters_[c].frontier;
      fr = retry;
      if (stop) {
        auto rest = batch.begin() + static_cast<long>(idx) - 1;
        if (!fr.empty() && fr.back() == *rest) ++rest;
        fr.insert(fr.end(), rest, batch.end());
      }
      fr.insert(fr.end(), grown.begin(), grown.end());
    }
    if (!any_active) break;
    // Merge.
    for (const auto& p : pending) {
      const int a = owner_[p.u], b = owner_[p.v];
      if (a < 0 || b < 0 || a == b) continue;
      if (clusters_[a].size >= clusters_[b].size)
        merge(a, b, p.u, p.v, p.e);
      else
        merge(b, a, p.v, p.u, p.e);
    }
    // Neutralize.
    for (int c = 0; c < static_cast<int>(clusters_.size()); ++c) {
      Cluster& C = clusters_[c];
      if (!C.active) continue;
      if (C.aux_node >= 0 || C.charge == 0) {
        neutralize(c, y);
        progress = true;
      }
    }
    if (!progress) throw DecoderError("syndrome cannot be neutralized");
  }
  return y;
}

std::vector<int> cluster_decode(const SyndromeGraph& g,
                                const std::vector<int>& sigma) {
  ClusterDecoder dec(g);
  return dec.decode(sigma);
}

// ---------------------------------------------------------------------------
// Matching

MatchingDecoder::MatchingDecoder(const SyndromeGraph& g)
    : g_(g),
      bdist_(g.nodes(), -1),
      toward_aux_(g.nodes(), -1),
      dist_(g.nodes(), -1),
      via_(g.nodes(), -1),
      defect_index_(g.nodes(), -1) {
  const int aux = g_.aux();
  std::vector<int> queue{aux};
  bdist_[aux] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const int w = queue[h];
    for (auto [nb, e] : g_.adjacent(w)) {
      if (bdist_[nb] >= 0) continue;
      bdist_[nb] = bdist_[w] + 1;
      toward_aux_[nb] = e;
      queue.push_back(nb);
    }
  }
}

// Breadth-first search from source over check nodes, stopping once `target`
// is reached. With `prune`, a node v is not entered at distance
// bdist(source) + bdist(v) or more: a defect there, or beyond it, is retired
// at least as cheaply through the boundary together with the source. The
// auxiliary node is never entered.
void MatchingDecoder::bfs(int source, bool prune, int target) {
  for (int v : touched_) {
    dist_[v] = -1;
    via_[v] = -1;
  }
  touched_.assign(1, source);
  dist_[source] = 0;
  const int aux = g_.aux();
  for (std::size_t h = 0; h < touched_.size(); ++h) {
    const int w = touched_[h];
    if (w == target) return;
    for (auto [nb, e] : g_.adjacent(w)) {
      if (nb == aux || dist_[nb] >= 0) continue;
      if (prune && dist_[w] + 1 >= bdist_[source] + bdist_[nb]) continue;
      dist_[nb] = dist_[w] + 1;
      via_[nb] = e;
      touched_.push_back(nb);
    }
  }
}

std::vector<int> MatchingDecoder::decode(const std::vector<int>& sigma) {
  if (g_.d() != 2) throw DecoderError("matching decoder needs d = 2");
  const int m = g_.checks();
  if (static_cast<int>(sigma.size()) != m)
    throw DecoderError("syndrome length does not match the check count");
  std::vector<int> y(g_.edge_count(), 0);
  std::vector<int> defects;
  for (int i = 0; i < m; ++i)
    if (mod(sigma[i], 2) != 0) defects.push_back(i);
  const int k = static_cast<int>(defects.size());
  if (k == 0) return y;
  for (int i = 0; i < k; ++i) defect_index_[defects[i]] = i;

  // Candidate pairs. A pair farther apart than the sum of its two boundary
  // distances is never needed: sending both defects to the boundary is at
  // least as cheap.
  bool open = false;
  for (int v : defects)
    if (bdist_[v] < 0) open = true;
  struct Pair {
    int i, j, w;
  };
  std::vector<Pair> pairs;
  std::vector<int> comp(k);
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](int x) {
    while (comp[x] != x) x = comp[x] = comp[comp[x]];
    return x;
  };
  for (int i = 0; i < k; ++i) {
    const int bi = bdist_[defects[i]];
    bfs(defects[i], !open, -1);
    for (int v : touched_) {
      const int j = defect_index_[v];
      if (j <= i) continue;
      const int bj = bdist_[v];
      if (bi >= 0 && bj >= 0 && dist_[v] >= bi + bj) continue;
      pairs.push_back({i, j, dist_[v]});
      comp[find(i)] = find(j);
    }
  }
  for (int v : defects) defect_index_[v] = -1;

  // Each component is matched on its own. Two defects may also be retired
  // together through the boundary at cost bi + bj, so every pair in a
  // component gets weight min(dist, bi + bj); an odd component adds one
  // virtual vertex that sends a single defect to the boundary. Pairs across
  // components are never cheaper than the boundary.
  std::vector<std::vector<int>> members(k);
  for (int i = 0; i < k; ++i) members[find(i)].push_back(i);
  std::vector<std::vector<Pair>> comp_pairs(k);
  for (const auto& p : pairs) comp_pairs[find(p.i)].push_back(p);
  std::vector<int> partner(k, -2);  // -1: boundary
  std::vector<int> local(k, -1);
  constexpr long long none = std::numeric_limits<long long>::max();
  std::vector<long long> cost;
  for (int c = 0; c < k; ++c) {
    const auto& mem = members[c];
    if (mem.empty()) continue;
    const int kc = static_cast<int>(mem.size());
    if (kc == 1) {
      if (bdist_[defects[mem[0]]] < 0)
        throw DecoderError("isolated defect cannot reach the boundary");
      partner[mem[0]] = -1;
      continue;
    }
    for (int a = 0; a < kc; ++a) local[mem[a]] = a;
    const int nv = kc + (kc % 2);
    cost.assign(static_cast<std::size_t>(nv) * nv, none);
    auto at = [&](int a, int b) -> long long& { return cost[a * nv + b]; };
    for (int a = 0; a < kc; ++a) {
      const int ba = bdist_[defects[mem[a]]];
      if (ba < 0) continue;
      for (int b = a + 1; b < kc; ++b) {
        const int bb = bdist_[defects[mem[b]]];
        if (bb >= 0) at(a, b) = ba + bb;
      }
      if (nv > kc) at(a, kc) = ba;
    }
    for (const auto& p : comp_pairs[c]) {
      long long& w = at(local[p.i], local[p.j]);
      if (p.w < w) w = p.w;
    }
    long long big = 1;
    for (long long w : cost)
      if (w != none) big = std::max(big, w);
    big = big * nv + 1;
    // Maximizing big - w forces a perfect matching and then minimizes w.
    WeightedMatching wm(nv);
    for (int a = 0; a < nv; ++a)
      for (int b = a + 1; b < nv; ++b)
        if (at(a, b) != none) wm.set_weight(a, b, big - at(a, b));
    const std::vector<int> mate = wm.solve();
    for (int a = 0; a < kc; ++a) {
      const int j = mate[a];
      if (j < 0) throw DecoderError("defect left unmatched");
      partner[mem[a]] = j < kc ? mem[j] : -1;
    }
  }
  // A matched pair whose walk is not shorter than the boundary route is
  // retired through the boundary.
  std::vector<int> pair_dist(k, -1);
  for (const auto& p : pairs)
    if (partner[p.i] == p.j) pair_dist[p.i] = p.w;
  for (int i = 0; i < k; ++i) {
    const int j = partner[i];
    if (j <= i) continue;
    const int bi = bdist_[defects[i]], bj = bdist_[defects[j]];
    if (bi >= 0 && bj >= 0 && (pair_dist[i] < 0 || bi + bj <= pair_dist[i])) {
      partner[i] = -1;
      partner[j] = -1;
    }
  }

  auto flip_to = [&](int x, int stop, const std::vector<int>& edge_of) {
    while (x != stop) {
      const int e = edge_of[x];
      y[e] ^= 1;
      const GraphEdge& ed = g_.edge(e);
      x = ed.u == x ? ed.v : ed.u;
    }
  };
  for (int i = 0; i < k; ++i) {
    if (partner[i] == -1) {
      flip_to(defects[i], g_.aux(), toward_aux_);
    } else if (partner[i] > i) {
      bfs(defects[i], false, defects[partner[i]]);
      flip_to(defects[partner[i]], defects[i], via_);
    }
  }
  return y;
}

std::vector<int> mwpm_decode(const SyndromeGraph& g,
                             const std::vector<int>& sigma) {
  MatchingDecoder dec(g);
  return dec.decode(sigma);
}

// ---------------------------------------------------------------------------
// Two-stage decoding

std::string decoder_name(DecoderKind k) {
  return k == DecoderKind::Clustering ? "clustering" : "matching";
}

DecoderKind parse_decoder(const std::string& s) {
  if (s == "clustering" || s == "cluster" || s == "uf") return DecoderKind::Clustering;
  if (s == "matching" || s == "mwpm") return DecoderKind::Matching;
  throw DecoderError("unknown decoder: " + s);
}

TwoStageDecoder::TwoStageDecoder(const SubsystemCode& code, DecoderConfig cfg)
    : code_(code),
      cfg_(cfg),
      h1_(build_validation_checks(code)),
      h2_(build_correction_checks(code)),
      g1_(h1_),
      g2_(h2_),
      c1_(g1_),
      c2_(g2_),
      m1_(g1_),
      m2_(g2_) {
  if (code.d != 2 &&
      (cfg.validator == DecoderKind::Matching || cfg.corrector == DecoderKind::Matching))
    throw DecoderError("matching decoders need d = 2");
}

std::vector<int> TwoStageDecoder::solve(DecoderKind kind, bool first,
                                        const std::vector<int>& sigma) {
  std::vector<int> y;
  if (kind == DecoderKind::Matching)
    y = first ? m1_.decode(sigma) : m2_.decode(sigma);
  else
    y = first ? c1_.decode(sigma) : c2_.decode(sigma);
  const CheckMatrix& H = first ? h1_ : h2_;
  if (H.apply(y) != sigma)
    throw DecoderError("decoder output does not reproduce its syndrome");
  return y;
}

TwoStageResult TwoStageDecoder::decode(const std::vector<int>& noisy_flux) {
  const int d = code_.d;
  const auto& lay = code_.layout;
  if (noisy_flux.size() != lay.flux_gauge.size())
    throw DecoderError("flux vector length does not match the flux count");
  TwoStageResult res;
  std::vector<int> sigma1 = h1_.apply(noisy_flux);
  std::vector<int> y1 = solve(cfg_.validator, true, sigma1);
  res.corrected_flux.resize(noisy_flux.size());
  for (std::size_t i = 0; i < noisy_flux.size(); ++i)
    res.corrected_flux[i] = mod(noisy_flux[i] - y1[i], d);

  res.stabilizer_syndrome.resize(lay.recipes.size());
  for (std::size_t i = 0; i < lay.recipes.size(); ++i) {
    long long s = 0;
    for (auto [v, c] : lay.recipes[i]) s += 1LL * c * res.corrected_flux[v];
    res.stabilizer_syndrome[i] = mod(s, d);
  }
  std::vector<int> y2 = solve(cfg_.corrector, false, res.stabilizer_syndrome);
  res.correction.assign(code_.n(), 0);
  for (int q = 0; q < code_.n(); ++q) {
    if (y2[q] == 0) continue;
    for (auto [qq, c] : lay.push_forward[q])
      res.correction[qq] = mod(res.correction[qq] + 1LL * c * y2[q], d);
  }
  return res;
}

TwoStageResult two_stage_decode(const SubsystemCode& code,
                                const std::vector<int>& noisy_flux,
                                DecoderConfig cfg) {
  TwoStageDecoder dec(code, cfg);
  return dec.decode(noisy_flux);
}

}  // namespace saqd
