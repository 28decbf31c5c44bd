#include "saqd/code.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

namespace saqd {

std::string stab_kind_name(StabKind k) {
  switch (k) {
    case StabKind::LocalX: return "local-x";
    case StabKind::LocalZ: return "local-z";
    case StabKind::SheetX: return "sheet-x";
    case StabKind::SheetZ: return "sheet-z";
  }
  return "?";
}

std::vector<int> SubsystemCode::z_gauge_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(gauge.size()); ++i)
    if (gauge[i].kind == TermType::A) out.push_back(i);
  return out;
}

std::vector<int> SubsystemCode::x_gauge_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(gauge.size()); ++i)
    if (gauge[i].kind == TermType::B) out.push_back(i);
  return out;
}

std::vector<PauliOp> SubsystemCode::x_stabilizers() const {
  std::vector<PauliOp> out;
  for (const auto& s : stabilizers)
    if (s.kind == StabKind::LocalX || s.kind == StabKind::SheetX)
      out.push_back(s.op);
  return out;
}

namespace {

int unit_inverse(int u, int d) {
  for (int v = 1; v < d; ++v)
    if (1LL * u * v % d == 1) return v;
  return 0;
}

PauliOp term_op(const Lattice& lat, const LocalTerm& t, int d) {
  return t.type == TermType::A ? PauliOp::z_type(lat.n, d, t.support)
                               : PauliOp::x_type(lat.n, d, t.support);
}

PauliOp product(const std::vector<PauliOp>& ops, int n, int d) {
  PauliOp acc(n, d);
  for (const auto& o : ops) acc = multiply(acc, o);
  return acc;
}

bool commutes_with_all(const PauliOp& op, const std::vector<PauliOp>& set) {
  for (const auto& s : set)
    if (symplectic_product(op, s) != 0) return false;
  return true;
}

PauliOp restrict_to(const PauliOp& op, const std::set<int>& keep) {
  std::vector<PauliEntry> e;
  for (const auto& x : op.entries())
    if (keep.count(x.q)) e.push_back(x);
  return PauliOp(op.n(), op.d(), std::move(e));
}

}  // namespace

int expected_logical_qudits(Manifold m) {
  switch (m) {
    case Manifold::Torus3: return 0;
    case Manifold::T2xI: return 2;
    case Manifold::T2xIPrime: return 2;
    case Manifold::Cube: return 1;
  }
  return -1;
}

std::vector<StabGen> build_stabilizers(const SubsystemCode& code) {
  const Lattice& lat = code.lat;
  const int d = code.d;
  std::vector<StabGen> out;
  for (int v = 0; v < static_cast<int>(lat.volumes.size()); ++v) {
    const Volume& vol = lat.volumes[v];
    if (vol.green_terms.empty() || vol.yellow_terms.empty()) continue;
    std::vector<PauliOp> g, y;
    for (int t : vol.green_terms) g.push_back(code.gauge[t].op);
    for (int t : vol.yellow_terms) y.push_back(code.gauge[t].op);
    PauliOp pg = product(g, lat.n, d), py = product(y, lat.n, d);
    if (!(pg == py)) {
      if (!vol.outside)
        throw CodeError("green and yellow products differ on volume " +
                        std::to_string(v));
      continue;
    }
    if (pg.is_identity()) continue;
    out.push_back({pg, vol.red ? StabKind::LocalX : StabKind::LocalZ, v});
  }
  if (lat.manifold == Manifold::Torus3) {
    for (bool x_type : {true, false})
      for (int axis = 0; axis < 3; ++axis) {
        std::optional<PauliOp> sheet;
        for (int c = 0; c < 2 && !sheet; ++c) {
          sheet = solve_sheet(code, x_type, axis, x_type ? c : 1 - c);
          if (sheet)
            out.push_back({*sheet, x_type ? StabKind::SheetX : StabKind::SheetZ,
                           axis * lat.L + (x_type ? c : 1 - c)});
        }
        if (!sheet) throw CodeError("no sheet operator for a coordinate plane");
      }
  }
  return out;
}

std::optional<PauliOp> solve_sheet(const SubsystemCode& code, bool x_type,
                                   int normal_axis, int c) {
  const Lattice& lat = code.lat;
  const int d = code.d;
  std::vector<int> support;
  std::vector<int> slot(lat.n, -1);
  for (int q = 0; q < lat.n; ++q) {
    const Qudit& qd = lat.qudits[q];
    if (qd.cls == QuditClass::Plaquette) continue;
    if (qd.axis == normal_axis || qd.anchor[normal_axis] != c) continue;
    slot[q] = static_cast<int>(support.size());
    support.push_back(q);
  }
  if (support.empty()) return std::nullopt;

  // Constraints: commutation with every gauge generator of the other type.
  struct Constraint {
    std::vector<std::pair<int, int>> vars;  // (slot, coefficient)
  };
  std::vector<Constraint> cons;
  std::vector<std::vector<int>> by_slot(support.size());
  for (const auto& g : code.gauge) {
    if ((g.kind == TermType::A) != x_type) continue;
    Constraint k;
    for (const auto& e : g.op.entries()) {
      if (slot[e.q] < 0) continue;
      const int coef = x_type ? e.z : e.x;
      if (coef != 0) k.vars.push_back({slot[e.q], coef});
    }
    if (k.vars.empty()) continue;
    for (auto [s, coef] : k.vars) by_slot[s].push_back(static_cast<int>(cons.size()));
    cons.push_back(std::move(k));
  }

  std::vector<int> val(support.size(), -1);
  std::vector<int> queue;
  auto assign = [&](int s, int v) {
    val[s] = v;
    for (int ci : by_slot[s]) queue.push_back(ci);
  };
  std::size_t next_free = 0;
  while (true) {
    while (next_free < val.size() && val[next_free] >= 0) ++next_free;
    if (next_free == val.size()) break;
    assign(static_cast<int>(next_free), 1);
    while (!queue.empty()) {
      const int ci = queue.back();
      queue.pop_back();
      int unknown = -1, unknown_coef = 0, count = 0;
      long long acc = 0;
      for (auto [s, coef] : cons[ci].vars) {
        if (val[s] < 0) {
          ++count;
          unknown = s;
          unknown_coef = coef;
        } else {
          acc += 1LL * coef * val[s];
        }
      }
      if (count != 1) continue;
      const int inv = unit_inverse(unknown_coef, d);
      if (inv == 0) continue;
      assign(unknown, mod(-acc % d * inv, d));
    }
  }
  for (const auto& k : cons) {
    long long acc = 0;
    for (auto [s, coef] : k.vars) acc += 1LL * coef * val[s];
    if (mod(acc, d) != 0) return std::nullopt;
  }
  std::vector<std::pair<int, int>> terms;
  for (std::size_t s = 0; s < support.size(); ++s)
    if (val[s] != 0) terms.push_back({support[s], val[s]});
  PauliOp op = x_type ? PauliOp::x_type(lat.n, d, terms)
                      : PauliOp::z_type(lat.n, d, terms);
  if (op.is_identity()) return std::nullopt;
  return op;
}

std::pair<std::vector<LogicalPair>, std::vector<LogicalPair>> build_logicals(
    const SubsystemCode& code) {
  const Lattice& lat = code.lat;
  const int d = code.d;
  if (lat.manifold == Manifold::Torus3)
    throw CodeError("the 3-torus code encodes no logical qudits");
  if (lat.manifold == Manifold::T2xIPrime)
    throw CodeError("logicals of the reduced code come from the circuit");

  // (normal axis of the X sheet, normal axis of the Z sheet)
  std::vector<std::pair<int, int>> specs;
  if (lat.manifold == Manifold::T2xI)
    specs = {{2, 0}, {0, 2}};
  else
    specs = {{0, 2}};
  const int max_c = std::min(lat.L, 3);

  std::vector<LogicalPair> bare;
  for (auto [ax, az] : specs) {
    bool done = false;
    for (int cx = 0; cx <= max_c && !done; ++cx) {
      auto xs = solve_sheet(code, true, ax, cx);
      if (!xs) continue;
      for (int cz = 1; cz <= max_c + 1 && !done; ++cz) {
        auto zs = solve_sheet(code, false, az, cz % (max_c + 1));
        if (!zs) continue;
        const int sp = symplectic_product(*xs, *zs);
        const int inv = unit_inverse(sp, d);
        if (inv == 0) continue;
        bool clash = false;
        for (const auto& prev : bare)
          if (symplectic_product(prev.x, *zs) != 0 ||
              symplectic_product(*xs, prev.z) != 0)
            clash = true;
        if (clash) continue;
        bare.push_back({*xs, power(*zs, inv)});
        done = true;
      }
    }
    if (!done) throw CodeError("could not find a bare logical pair");
  }

  std::vector<PauliOp> xstab, zstab;
  for (const auto& s : code.stabilizers)
    (s.op.is_x_type() ? xstab : zstab).push_back(s.op);

  auto try_dressed = [&](int sx, int sz) -> std::optional<std::vector<LogicalPair>> {
    std::set<int> keep_x(lat.surface_qudit[sx].begin(), lat.surface_qudit[sx].end());
    std::set<int> keep_z(lat.surface_qudit[sz].begin(), lat.surface_qudit[sz].end());
    std::vector<LogicalPair> out;
    for (const auto& b : bare) {
      PauliOp x = restrict_to(b.x, keep_x), z = restrict_to(b.z, keep_z);
      if (x.is_identity() || z.is_identity()) return std::nullopt;
      if (!commutes_with_all(x, zstab) || !commutes_with_all(z, xstab))
        return std::nullopt;
      const int inv = unit_inverse(symplectic_product(x, z), d);
      if (inv == 0) return std::nullopt;
      out.push_back({x, power(z, inv)});
    }
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = 0; j < out.size(); ++j)
        if (i != j && symplectic_product(out[i].x, out[j].z) != 0)
          return std::nullopt;
    return out;
  };
  std::vector<LogicalPair> dressed = bare;
  for (auto [sx, sz] : {std::pair{1, 1}, {0, 0}, {1, 0}, {0, 1}}) {
    if (auto r = try_dressed(sx, sz)) {
      dressed = *r;
      break;
    }
  }
  return {bare, dressed};
}

SubsystemCode build_code(Manifold m, int L, int d) {
  if (d < 2) throw CodeError("d must be at least 2");
  if (m == Manifold::T2xIPrime)
    return apply_weight_reduction(build_code(Manifold::T2xI, L, d));
  SubsystemCode code;
  code.d = d;
  code.lat = build_lattice(m, L);
  for (int t = 0; t < static_cast<int>(code.lat.terms.size()); ++t) {
    const LocalTerm& lt = code.lat.terms[t];
    code.gauge.push_back({term_op(code.lat, lt, d), lt.type, lt.color, lt.sphere,
                          lt.volume, t});
  }
  code.stabilizers = build_stabilizers(code);
  if (expected_logical_qudits(m) > 0) {
    auto [bare, dressed] = build_logicals(code);
    code.bare_logicals = std::move(bare);
    code.dressed_logicals = std::move(dressed);
  }
  code.layout = build_decoding_layout(code);
  code.params.n = code.lat.n;
  code.params.s = code.params.r = code.params.k = -1;
  return code;
}

ParameterReport verify_parameters(const SubsystemCode& code) {
  std::vector<PauliOp> g, s;
  for (const auto& x : code.gauge) g.push_back(x.op);
  for (const auto& x : code.stabilizers) s.push_back(x.op);
  GroupBasis gb = group_structure(g, code.d);
  GroupBasis sb = group_structure(s, code.d);
  ParameterReport r;
  r.manifold = code.lat.manifold;
  r.L = code.lat.L;
  r.d = code.d;
  r.n = code.lat.n;
  r.k = count_logical_qudits(gb, sb, code.lat.n);
  r.s = sb.mu();
  r.r = (gb.mu() - sb.mu()) / 2;
  r.expected_n = expected_qudits(code.lat.manifold, code.lat.L);
  r.expected_k = expected_logical_qudits(code.lat.manifold);
  if (!code.bare_logicals.empty()) {
    r.bare_weight = code.bare_logicals[0].x.weight();
    r.dressed_weight = code.dressed_logicals[0].x.weight();
  }
  return r;
}

DistanceResult brute_force_distance(const SubsystemCode& code, int cap,
                                    int which) {
  const int n = code.lat.n;
  const int d = code.d;
  if (cap < 0) throw CodeError("negative weight cap");
  if (cap > 4) throw CodeError("weight cap above the enumeration budget");
  if (code.bare_logicals.empty()) throw CodeError("code has no logical qudits");
  // Column data per qudit: X-stabilizer checks then logical X products.
  std::vector<PauliOp> rows = code.x_stabilizers();
  const int m = static_cast<int>(rows.size());
  std::vector<int> logical_rows;
  for (int i = 0; i < static_cast<int>(code.bare_logicals.size()); ++i)
    if (which < 0 || which == i) {
      rows.push_back(code.bare_logicals[i].x);
      logical_rows.push_back(static_cast<int>(rows.size()) - 1);
    }
  std::vector<std::vector<std::pair<int, int>>> col(n);
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    for (const auto& e : rows[r].entries())
      if (e.x != 0) col[e.q].push_back({r, e.x});

  std::vector<int> acc(rows.size(), 0);
  std::vector<std::pair<int, int>> chosen;
  DistanceResult best;
  std::function<bool(int, int)> rec = [&](int start, int left) -> bool {
    if (left == 0) {
      for (int r = 0; r < m; ++r)
        if (acc[r] != 0) return false;
      for (int r : logical_rows)
        if (acc[r] != 0) return true;
      return false;
    }
    for (int q = start; q < n; ++q) {
      if (col[q].empty()) continue;
      for (int e = 1; e < d; ++e) {
        for (auto [r, c] : col[q]) acc[r] = mod(acc[r] + 1LL * c * e, d);
        chosen.push_back({q, e});
        if (rec(q + 1, left - 1)) return true;
        chosen.pop_back();
        for (auto [r, c] : col[q]) acc[r] = mod(acc[r] - 1LL * c * e, d);
      }
    }
    return false;
  };
  for (int w = 1; w <= cap; ++w) {
    chosen.clear();
    std::fill(acc.begin(), acc.end(), 0);
    if (rec(0, w)) {
      best.found = true;
      best.weight = w;
      best.witness = PauliOp::z_type(n, d, chosen);
      return best;
    }
  }
  best.weight = cap;
  return best;
}

// ---------------------------------------------------------------------------
// Weight reduction

namespace {

struct PlaquetteBlock {
  int plaquette;  // qudit index of the plaquette qudit
  int side;       // 0 bottom, 1 top
  int face_term;  // surface B term on the red cell
  int outer;      // left corner carrying an outer qudit
  int dangling;   // left corner carrying a dangling half-edge
  int beta_outer;
  int beta_dangling;
  std::vector<std::pair<int, int>> right;  // (qudit, face exponent)
};

std::vector<PlaquetteBlock> plaquette_blocks(const Lattice& prime) {
  const int W = prime.surface_width;
  const int L = prime.L;
  std::map<std::array<int, 4>, int> face_of;  // (side, cx, cz) -> term
  for (int t = 0; t < static_cast<int>(prime.terms.size()); ++t) {
    const LocalTerm& lt = prime.terms[t];
    if (lt.type != TermType::B) continue;
    if (prime.spheres[lt.sphere].kind != SphereKind::Surface) continue;
    const Volume& v = prime.volumes[lt.volume];
    const int side = prime.spheres[lt.sphere].side > 0 ? 1 : 0;
    face_of[{side, v.corner[0], v.corner[2], 0}] = t;
  }
  std::vector<PlaquetteBlock> blocks;
  for (int pq : prime.plaquette_qudits) {
    const Qudit& pqd = prime.qudits[pq];
    const int side = pqd.side > 0 ? 1 : 0;
    const int cx = pqd.anchor[0], cz = pqd.anchor[2];
    auto it = face_of.find({side, cx, cz, 0});
    if (it == face_of.end()) throw CodeError("plaquette without a face term");
    const LocalTerm& face = prime.terms[it->second];
    auto exponent = [&](int q) {
      for (auto [qq, s] : face.support)
        if (qq == q) return s;
      throw CodeError("corner missing from face term");
    };
    auto at = [&](int x, int z) {
      return prime.surface_qudit[side][((x % L + L) % L) * W + ((z % L + L) % L)];
    };
    PlaquetteBlock b{pq, side, it->second, -1, -1, 0, 0, {}};
    for (int q : {at(cx, cz), at(cx, cz + 1)}) {
      if (prime.qudits[q].cls == QuditClass::Outer) {
        b.outer = q;
        b.beta_outer = exponent(q);
      } else {
        b.dangling = q;
        b.beta_dangling = exponent(q);
      }
    }
    for (int q : {at(cx + 1, cz), at(cx + 1, cz + 1)})
      b.right.push_back({q, exponent(q)});
    if (b.outer < 0 || b.dangling < 0)
      throw CodeError("plaquette corners of unexpected classes");
    blocks.push_back(b);
  }
  return blocks;
}

}  // namespace

std::vector<CircuitGate> weight_reduction_circuit(const Lattice& prime) {
  if (prime.manifold != Manifold::T2xIPrime)
    throw CodeError("the circuit acts on the T2xIPrime register");
  std::vector<CircuitGate> first, second;
  for (const auto& b : plaquette_blocks(prime)) {
    first.push_back({b.outer, b.plaquette, -b.beta_outer});
    first.push_back({b.dangling, b.plaquette, b.beta_dangling});
    second.push_back({b.plaquette, b.outer, b.beta_outer});
    second.push_back({b.plaquette, b.dangling, b.beta_dangling});
  }
  first.insert(first.end(), second.begin(), second.end());
  return first;
}

PauliOp apply_circuit(const std::vector<CircuitGate>& gates, const PauliOp& op,
                      bool inverse_map) {
  const int d = op.d();
  std::vector<int> x = op.dense_x(), z = op.dense_z();
  auto apply = [&](const CircuitGate& g, int sign) {
    const long long k = 1LL * sign * g.power;
    x[g.target] = mod(x[g.target] - k * x[g.control], d);
    z[g.control] = mod(z[g.control] + k * z[g.target], d);
  };
  if (!inverse_map) {
    for (const auto& g : gates) apply(g, 1);
  } else {
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) apply(*it, -1);
  }
  return PauliOp::from_dense(d, x, z);
}

SubsystemCode apply_weight_reduction(const SubsystemCode& base) {
  if (base.lat.manifold != Manifold::T2xI)
    throw CodeError("weight reduction needs a T2xI code");
  const int d = base.d;
  SubsystemCode out;
  out.d = d;
  out.lat = build_lattice(Manifold::T2xIPrime, base.lat.L);
  const Lattice& lat = out.lat;
  const int n = lat.n;
  for (int q = 0; q < base.lat.n; ++q) {
    const Qudit& a = base.lat.qudits[q];
    const Qudit& b = lat.qudits[q];
    if (a.cls != b.cls || a.anchor != b.anchor || a.axis != b.axis)
      throw CodeError("registers of the two codes do not line up");
  }
  const auto gates = weight_reduction_circuit(lat);
  const auto blocks = plaquette_blocks(lat);
  auto image = [&](const PauliOp& op) { return apply_circuit(gates, op); };
  std::vector<int> block_of(n, -1);
  for (int i = 0; i < static_cast<int>(blocks.size()); ++i) {
    block_of[blocks[i].plaquette] = i;
    block_of[blocks[i].outer] = i;
    block_of[blocks[i].dangling] = i;
  }
  std::vector<PauliOp> zp_image(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i)
    zp_image[i] = image(PauliOp::z_type(n, d, {{blocks[i].plaquette, 1}}));

  // Lower the weight of a Z-type image block by block, using the images of
  // the plaquette Z generators.
  auto reduce = [&](PauliOp w) {
    std::set<int> touched;
    for (const auto& e : w.entries())
      if (block_of[e.q] >= 0) touched.insert(block_of[e.q]);
    for (int bi : touched) {
      const auto& b = blocks[bi];
      auto block_weight = [&](const PauliOp& op) {
        int c = 0;
        for (int q : {b.plaquette, b.outer, b.dangling})
          if (op.x(q) != 0 || op.z(q) != 0) ++c;
        return c;
      };
      PauliOp best = w;
      int best_w = block_weight(w);
      PauliOp cur = w;
      for (int t = 1; t < d; ++t) {
        cur = multiply(cur, zp_image[bi]);
        const int bw = block_weight(cur);
        if (bw < best_w) {
          best = cur;
          best_w = bw;
        }
      }
      w = best;
    }
    return w;
  };

  // X side: untouched literal generators, then two three-body terms per
  // plaquette whose ratio is the four-body face term.
  std::set<int> face_terms;
  for (const auto& b : blocks) face_terms.insert(b.face_term);
  for (const auto& g : base.gauge) {
    if (g.kind != TermType::B || face_terms.count(g.term)) continue;
    GaugeGen ng = g;
    ng.op = g.op.widened(n);
    out.gauge.push_back(ng);
  }
  for (const auto& b : blocks) {
    const LocalTerm& face = lat.terms[b.face_term];
    std::vector<std::pair<int, int>> t1{{b.plaquette, 1}}, t2{{b.plaquette, 1}};
    for (auto [q, s] : b.right) t1.push_back({q, s});
    t2.push_back({b.outer, -b.beta_outer});
    t2.push_back({b.dangling, -b.beta_dangling});
    PauliOp T1 = PauliOp::x_type(n, d, t1), T2 = PauliOp::x_type(n, d, t2);
    if (!(T2 == image(PauliOp::x_type(n, d, {{b.plaquette, 1}}))))
      throw CodeError("circuit image of a plaquette X differs from T2");
    out.gauge.push_back({T1, TermType::B, face.color, face.sphere, face.volume, -1});
    out.gauge.push_back({T2, TermType::B, face.color, face.sphere, face.volume, -1});
  }

  // Z side.
  std::vector<PauliOp> base_z;
  std::vector<const GaugeGen*> base_z_meta;
  for (const auto& g : base.gauge)
    if (g.kind == TermType::A) {
      base_z.push_back(g.op.widened(n));
      base_z_meta.push_back(&g);
    }
  std::vector<PauliOp> reduced(base_z.size());
  for (std::size_t i = 0; i < base_z.size(); ++i) reduced[i] = reduce(image(base_z[i]));
  // Generators that stay above weight 3 are first multiplied by a weight-3
  // generator sharing one of their surface qudits.
  std::vector<std::vector<int>> z_touching(n);
  for (std::size_t i = 0; i < base_z.size(); ++i)
    for (const auto& e : base_z[i].entries())
      if (block_of[e.q] >= 0) z_touching[e.q].push_back(static_cast<int>(i));
  std::vector<PauliOp> final_z = reduced;
  for (std::size_t i = 0; i < base_z.size(); ++i) {
    if (reduced[i].weight() <= 3) continue;
    PauliOp best = reduced[i];
    for (const auto& e : base_z[i].entries()) {
      if (block_of[e.q] < 0) continue;
      for (int j : z_touching[e.q]) {
        if (j == static_cast<int>(i) || reduced[j].weight() > 3) continue;
        const int inv = unit_inverse(base_z[j].z(e.q), d);
        if (inv == 0) continue;
        const int k = mod(-1LL * e.z * inv, d);
        PauliOp cand = reduce(image(multiply(base_z[i], power(base_z[j], k))));
        if (cand.weight() < best.weight()) best = cand;
      }
    }
    final_z[i] = best;
  }
  for (std::size_t i = 0; i < base_z.size(); ++i) {
    GaugeGen ng = *base_z_meta[i];
    ng.op = final_z[i];
    ng.term = base_z_meta[i]->term;
    out.gauge.push_back(ng);
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const LocalTerm& face = lat.terms[blocks[i].face_term];
    out.gauge.push_back({zp_image[i], TermType::A, face.color, face.sphere,
                         face.volume, -1});
  }

  // The circuit spreads surface generators onto neighbouring tetra qudits, so
  // the sphere colours no longer split the generators into two commuting
  // halves. Recolour by a 2-colouring of the anticommutation graph, flipping
  // each connected component to agree with the sphere colours where it can.
  {
    const int N = static_cast<int>(out.gauge.size());
    std::vector<std::vector<int>> on_qudit(n);
    for (int i = 0; i < N; ++i)
      for (const auto& e : out.gauge[i].op.entries()) on_qudit[e.q].push_back(i);
    std::vector<int> side(N, -1);
    for (int s = 0; s < N; ++s) {
      if (side[s] >= 0) continue;
      std::vector<int> comp{s};
      side[s] = 0;
      for (std::size_t h = 0; h < comp.size(); ++h) {
        const int u = comp[h];
        for (const auto& e : out.gauge[u].op.entries())
          for (int v : on_qudit[e.q]) {
            if (symplectic_product(out.gauge[u].op, out.gauge[v].op) == 0) continue;
            if (side[v] < 0) {
              side[v] = 1 - side[u];
              comp.push_back(v);
            } else if (side[v] == side[u]) {
              throw CodeError("weight-reduced gauge generators are not 2-colourable");
            }
          }
      }
      int agree = 0;
      for (int u : comp)
        agree += (side[u] == 0) == (out.gauge[u].color == Color::Green) ? 1 : -1;
      for (int u : comp)
        out.gauge[u].color = (side[u] == 0) == (agree >= 0) ? Color::Green : Color::Yellow;
    }
  }

  for (const auto& s : base.stabilizers)
    out.stabilizers.push_back({image(s.op.widened(n)), s.kind, s.locus});
  for (const auto& p : base.bare_logicals)
    out.bare_logicals.push_back({image(p.x.widened(n)), image(p.z.widened(n))});
  for (const auto& p : base.dressed_logicals)
    out.dressed_logicals.push_back(
        {image(p.x.widened(n)), reduce(image(p.z.widened(n)))});

  // Decoding happens in the frame before the circuit: validation relations
  // carry over with each four-body face replaced by T1 - T2, the checks are
  // the original stabilizers, and corrections are pushed through the circuit.
  DecodingLayout lay;
  std::vector<int> x_idx = out.x_gauge_indices();
  lay.flux_gauge = x_idx;
  std::map<int, int> literal_var;  // base gauge index -> new flux variable
  std::map<int, std::pair<int, int>> face_vars;  // base term -> (T1, T2) vars
  {
    int var = 0;
    std::map<int, int> term_to_var;
    for (int gi : x_idx) {
      const GaugeGen& g = out.gauge[gi];
      if (g.term >= 0) term_to_var[g.term] = var;
      ++var;
    }
    int base_var = 0;
    (void)base_var;
    for (int gi = 0; gi < static_cast<int>(base.gauge.size()); ++gi) {
      const GaugeGen& g = base.gauge[gi];
      if (g.kind != TermType::B) continue;
      auto it = term_to_var.find(g.term);
      if (it != term_to_var.end()) literal_var[gi] = it->second;
    }
    int t_var = static_cast<int>(x_idx.size()) - 2 * static_cast<int>(blocks.size());
    for (const auto& b : blocks) {
      face_vars[b.face_term] = {t_var, t_var + 1};
      t_var += 2;
    }
  }
  const std::vector<int> base_x = base.x_gauge_indices();
  auto substitute = [&](const Combo& c) {
    std::map<int, long long> acc;
    for (auto [bv, coef] : c) {
      const int gi = base_x[bv];
      const GaugeGen& g = base.gauge[gi];
      auto fit = face_vars.find(g.term);
      if (fit != face_vars.end()) {
        acc[fit->second.first] += coef;
        acc[fit->second.second] -= coef;
      } else {
        acc[literal_var.at(gi)] += coef;
      }
    }
    Combo out_c;
    for (auto [v, c2] : acc)
      if (mod(c2, d) != 0) out_c.push_back({v, mod(c2, d)});
    return out_c;
  };
  for (const auto& r : base.layout.relations) lay.relations.push_back(substitute(r));
  std::map<int, int> t2_var_of_plaquette;
  for (const auto& b : blocks)
    t2_var_of_plaquette[b.plaquette] = face_vars[b.face_term].second;
  for (std::size_t i = 0; i < base.layout.checks.size(); ++i) {
    PauliOp chk = base.layout.checks[i].widened(n);
    PauliOp img = image(chk);
    Combo rc = substitute(base.layout.recipes[i]);
    std::map<int, long long> acc(rc.begin(), rc.end());
    for (const auto& b : blocks) {
      const int c = img.x(b.plaquette);
      if (c != 0) acc[t2_var_of_plaquette[b.plaquette]] += c;
    }
    Combo full;
    for (auto [v, c] : acc)
      if (mod(c, d) != 0) full.push_back({v, mod(c, d)});
    lay.checks.push_back(chk);
    lay.recipes.push_back(full);
  }
  lay.push_forward.resize(n);
  for (int q = 0; q < n; ++q) {
    PauliOp img = image(PauliOp::z_type(n, d, {{q, 1}}));
    for (const auto& e : img.entries())
      if (e.z != 0) lay.push_forward[q].push_back({e.q, e.z});
  }
  lay.identity_frame = false;
  out.layout = std::move(lay);
  out.params.n = n;
  out.params.s = out.params.r = out.params.k = -1;
  return out;
}

std::vector<PauliOp> gauge_fix_toric(const SubsystemCode& code) {
  if (code.lat.manifold != Manifold::Torus3)
    throw CodeError("gauge fixing to the toric code needs the 3-torus");
  std::vector<PauliOp> out;
  for (const auto& s : code.stabilizers)
    if (s.kind == StabKind::LocalZ) out.push_back(s.op);
  for (const auto& g : code.gauge)
    if (g.kind == TermType::B) out.push_back(g.op);
  return out;
}

DecodingLayout build_decoding_layout(const SubsystemCode& code) {
  const Lattice& lat = code.lat;
  const int d = code.d;
  DecodingLayout lay;
  std::vector<int> var_of(code.gauge.size(), -1);
  for (int i = 0; i < static_cast<int>(code.gauge.size()); ++i)
    if (code.gauge[i].kind == TermType::B) {
      var_of[i] = static_cast<int>(lay.flux_gauge.size());
      lay.flux_gauge.push_back(i);
    }
  // Sphere relations: the product of every face term of a sphere is trivial.
  std::map<int, std::vector<int>> by_sphere;
  for (int i = 0; i < static_cast<int>(code.gauge.size()); ++i)
    if (code.gauge[i].kind == TermType::B && code.gauge[i].sphere >= 0)
      by_sphere[code.gauge[i].sphere].push_back(i);
  for (const auto& [s, gens] : by_sphere) {
    PauliOp acc(lat.n, d);
    for (int g : gens) acc = multiply(acc, code.gauge[g].op);
    if (!acc.is_identity()) continue;
    Combo rel;
    for (int g : gens) rel.push_back({var_of[g], 1});
    lay.relations.push_back(rel);
  }
  // Volume relations and the stabilizer syndrome recipes.
  std::map<int, int> volume_stab;
  for (int i = 0; i < static_cast<int>(code.stabilizers.size()); ++i)
    if (code.stabilizers[i].kind == StabKind::LocalX)
      volume_stab[code.stabilizers[i].locus] = i;
  for (const auto& [v, si] : volume_stab) {
    const Volume& vol = lat.volumes[v];
    Combo rel, recipe;
    for (int t : vol.green_terms) {
      rel.push_back({var_of[t], 1});
      recipe.push_back({var_of[t], 1});
    }
    for (int t : vol.yellow_terms) rel.push_back({var_of[t], d - 1});
    lay.relations.push_back(rel);
    lay.checks.push_back(code.stabilizers[si].op);
    lay.recipes.push_back(recipe);
  }
  lay.push_forward.resize(lat.n);
  for (int q = 0; q < lat.n; ++q) lay.push_forward[q] = {{q, 1}};
  lay.identity_frame = true;
  return lay;
}

std::string code_dump(const SubsystemCode& code) {
  using nlohmann::ordered_json;
  auto op_json = [](const PauliOp& op) {
    ordered_json a = ordered_json::array();
    for (const auto& e : op.entries()) a.push_back({e.q, e.x, e.z});
    return a;
  };
  ordered_json j;
  j["format"] = "saqd-code";
  j["version"] = 1;
  j["manifold"] = manifold_name(code.lat.manifold);
  j["L"] = code.lat.L;
  j["d"] = code.d;
  j["n"] = code.lat.n;
  ordered_json gs = ordered_json::array();
  for (const auto& g : code.gauge)
    gs.push_back({{"kind", g.kind == TermType::A ? "A" : "B"},
                  {"color", color_name(g.color)},
                  {"sphere", g.sphere},
                  {"volume", g.volume},
                  {"op", op_json(g.op)}});
  j["gauge"] = gs;
  ordered_json ss = ordered_json::array();
  for (const auto& s : code.stabilizers)
    ss.push_back({{"kind", stab_kind_name(s.kind)},
                  {"locus", s.locus},
                  {"op", op_json(s.op)}});
  j["stabilizers"] = ss;
  ordered_json ls = ordered_json::array();
  for (std::size_t i = 0; i < code.bare_logicals.size(); ++i)
    ls.push_back({{"bare_x", op_json(code.bare_logicals[i].x)},
                  {"bare_z", op_json(code.bare_logicals[i].z)},
                  {"dressed_x", op_json(code.dressed_logicals[i].x)},
                  {"dressed_z", op_json(code.dressed_logicals[i].z)}});
  j["logicals"] = ls;
  return j.dump();
}

}  // namespace saqd
