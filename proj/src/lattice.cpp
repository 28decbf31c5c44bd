#include "saqd/lattice.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <json.hpp>

namespace saqd {

std::string manifold_name(Manifold m) {
  switch (m) {
    case Manifold::Torus3: return "torus3";
    case Manifold::T2xI: return "t2xi";
    case Manifold::T2xIPrime: return "t2xi_prime";
    case Manifold::Cube: return "cube";
  }
  return "?";
}

Manifold parse_manifold(const std::string& s) {
  if (s == "torus3" || s == "t3") return Manifold::Torus3;
  if (s == "t2xi") return Manifold::T2xI;
  if (s == "t2xi_prime" || s == "t2xiprime") return Manifold::T2xIPrime;
  if (s == "cube" || s == "i3") return Manifold::Cube;
  throw LatticeError("unknown manifold: " + s);
}

std::string color_name(Color c) {
  return c == Color::Green ? "green" : "yellow";
}

std::string qudit_class_name(QuditClass c) {
  switch (c) {
    case QuditClass::Bulk: return "bulk";
    case QuditClass::HalfEdge: return "half";
    case QuditClass::Outer: return "outer";
    case QuditClass::Plaquette: return "plaquette";
  }
  return "?";
}

long long expected_qudits(Manifold m, int L) {
  const long long l = L;
  switch (m) {
    case Manifold::Torus3: return 3 * l * l * l;
    case Manifold::T2xI: return 3 * l * l * l + 2 * l * l;
    case Manifold::T2xIPrime: return 3 * l * l * l + 3 * l * l;
    case Manifold::Cube: return 3 * l * l * l + 6 * l * l + 5 * l + 1;
  }
  return -1;
}

namespace {

using V3 = std::array<int, 3>;
using P3 = std::array<double, 3>;

bool is_green(const V3& v) { return ((v[0] + v[1] + v[2]) % 2 + 2) % 2 == 0; }

V3 unit(int a) {
  V3 e{0, 0, 0};
  e[a] = 1;
  return e;
}

V3 sub(V3 a, const V3& b) {
  for (int i = 0; i < 3; ++i) a[i] -= b[i];
  return a;
}

P3 center(const V3& c) { return {c[0] + 0.5, c[1] + 0.5, c[2] + 0.5}; }

P3 psub(const P3& a, const P3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

P3 padd(const P3& a, const P3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

P3 pscale(const P3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

double det3(const P3& a, const P3& b, const P3& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) -
         a[1] * (b[0] * c[2] - b[2] * c[0]) +
         a[2] * (b[0] * c[1] - b[1] * c[0]);
}

int sign_of(double v) {
  if (v > 1e-9) return 1;
  if (v < -1e-9) return -1;
  throw LatticeError("degenerate orientation");
}

// Tail and head cells (minimal corners) of the blue edge carried by the cubic
// edge from u along `axis`.
std::pair<V3, V3> edge_cells(const V3& u, int axis) {
  const bool g = is_green(u);
  const int x = u[0], y = u[1], z = u[2];
  switch (axis) {
    case 0:
      return g ? std::pair<V3, V3>{{x, y, z}, {x, y - 1, z - 1}}
               : std::pair<V3, V3>{{x, y, z - 1}, {x, y - 1, z}};
    case 1:
      return g ? std::pair<V3, V3>{{x - 1, y, z - 1}, {x, y, z}}
               : std::pair<V3, V3>{{x - 1, y, z}, {x, y, z - 1}};
    default:
      return g ? std::pair<V3, V3>{{x - 1, y - 1, z}, {x, y, z}}
               : std::pair<V3, V3>{{x, y - 1, z}, {x - 1, y, z}};
  }
}

class Builder {
 public:
  Builder(Manifold m, int L)
      : m_(m == Manifold::T2xIPrime ? Manifold::T2xI : m),
        L_(L),
        pxz_(m != Manifold::Cube),
        py_(m == Manifold::Torus3) {}

  Lattice build(Manifold requested);

 private:
  // Vertex coordinate ranges (inclusive).
  int xz_hi() const { return pxz_ ? L_ - 1 : L_; }
  bool xz_ok(int c) const { return pxz_ || (c >= 0 && c <= L_); }
  int wrap_xz(int c) const { return pxz_ ? ((c % L_) + L_) % L_ : c; }
  int wrap_y(int c) const { return py_ ? ((c % L_) + L_) % L_ : c; }
  V3 wrap_v(const V3& v) const { return {wrap_xz(v[0]), wrap_y(v[1]), wrap_xz(v[2])}; }

  bool vertex_ok(const V3& v) const {
    if (!xz_ok(v[0]) || !xz_ok(v[2])) return false;
    return py_ || (v[1] >= 0 && v[1] <= L_ - 1);
  }

  // Cell-corner ranges: periodic axes [0, L), open xz [-1, L], open y [-1, L-1].
  bool cell_ok(const V3& c) const {
    auto ok_xz = [&](int a) { return pxz_ || (a >= -1 && a <= L_); };
    return ok_xz(c[0]) && ok_xz(c[2]) && (py_ || (c[1] >= -1 && c[1] <= L_ - 1));
  }
  V3 wrap_c(const V3& c) const { return wrap_v(c); }

  int cell_dim_xz() const { return pxz_ ? L_ : L_ + 2; }
  int cell_dim_y() const { return py_ ? L_ : L_ + 1; }
  int cell_off_xz() const { return pxz_ ? 0 : 1; }
  int cell_off_y() const { return py_ ? 0 : 1; }
  int cell_index(const V3& c_unwrapped) const {
    V3 c = wrap_c(c_unwrapped);
    if (!cell_ok(c)) throw LatticeError("cell outside the registry");
    const int W = cell_dim_xz(), H = cell_dim_y();
    return ((c[2] + cell_off_xz()) * H + (c[1] + cell_off_y())) * W +
           (c[0] + cell_off_xz());
  }

  // Edge keys: lower endpoint and axis. Returns -1 when absent.
  int edge_qudit(const V3& u_unwrapped, int axis) const {
    V3 u = wrap_v(u_unwrapped);
    if (!xz_ok(u[0]) || !xz_ok(u[2])) return -1;
    if (axis == 1) {
      if (!py_ && (u[1] < -1 || u[1] > L_ - 1)) return -1;
    } else {
      if (!py_ && (u[1] < 0 || u[1] > L_ - 1)) return -1;
      if (!pxz_ && u[axis] + 1 > L_) return -1;
    }
    auto it = edge_index_.find({u[0], u[1], u[2], axis});
    return it == edge_index_.end() ? -1 : it->second;
  }

  int outer_qudit(int side, int x, int z) const {
    auto it = outer_index_.find({side, wrap_xz(x), wrap_xz(z)});
    return it == outer_index_.end() ? -1 : it->second;
  }

  void make_qudits();
  void make_volumes();
  void make_tetra(const V3& v);
  void make_bigon(const V3& v, int side);
  void make_surface(int side);
  int add_term(TermType t, Color c, int sphere, const V3& cell, bool partial,
               std::vector<std::pair<int, int>> support);

  Manifold m_;
  int L_;
  bool pxz_, py_;
  Lattice lat_;
  std::map<std::array<int, 4>, int> edge_index_;
  std::map<std::array<int, 3>, int> outer_index_;
};

void Builder::make_qudits() {
  struct Key {
    std::array<int, 4> order;
    Qudit q;
  };
  std::vector<Key> bulk, half_bot, half_top, outer_bot, outer_top;
  const int hi = xz_hi();
  const int ylo = py_ ? 0 : -1;
  const int yhi = L_ - 1;
  for (int z = 0; z <= hi; ++z)
    for (int y = ylo; y <= yhi; ++y)
      for (int x = 0; x <= hi; ++x)
        for (int axis = 0; axis < 3; ++axis) {
          V3 u{x, y, z};
          if (axis != 1 && y < 0) continue;
          if (axis != 1 && !pxz_ && u[axis] + 1 > L_) continue;
          unsigned tags = 0;
          if (!pxz_) {
            if ((axis != 0 && (x == 0 || x == L_))) tags |= kTagSmooth;
            if ((axis != 2 && (z == 0 || z == L_))) tags |= kTagRough;
          }
          Qudit q{QuditClass::Bulk, axis, u, 0, tags};
          if (axis == 1 && !py_ && y == -1) {
            q.cls = QuditClass::HalfEdge;
            q.side = -1;
            q.tags |= kTagBottom;
            half_bot.push_back({{z, x, 0, 0}, q});
          } else if (axis == 1 && !py_ && y == L_ - 1) {
            q.cls = QuditClass::HalfEdge;
            q.side = 1;
            q.tags |= kTagTop;
            half_top.push_back({{z, x, 0, 0}, q});
          } else {
            bulk.push_back({{z, y, x, axis}, q});
          }
        }
  if (!py_) {
    for (int z = 0; z <= hi; ++z)
      for (int x = 0; x <= hi; ++x) {
        unsigned tags = 0;
        if (!pxz_) {
          if (x == 0 || x == L_) tags |= kTagSmooth;
          if (z == 0 || z == L_) tags |= kTagRough;
        }
        if (!is_green({x, 0, z}))
          outer_bot.push_back(
              {{z, x, 0, 0},
               Qudit{QuditClass::Outer, 1, {x, 0, z}, -1, tags | kTagBottom}});
        if (is_green({x, L_ - 1, z}))
          outer_top.push_back(
              {{z, x, 0, 0},
               Qudit{QuditClass::Outer, 1, {x, L_ - 1, z}, 1, tags | kTagTop}});
      }
  }
  for (auto* group : {&bulk, &half_bot, &half_top, &outer_bot, &outer_top}) {
    std::stable_sort(group->begin(), group->end(),
                     [](const Key& a, const Key& b) { return a.order < b.order; });
    for (const auto& k : *group) {
      const int id = static_cast<int>(lat_.qudits.size());
      lat_.qudits.push_back(k.q);
      if (k.q.cls == QuditClass::Outer)
        outer_index_[{k.q.side, k.q.anchor[0], k.q.anchor[2]}] = id;
      else
        edge_index_[{k.q.anchor[0], k.q.anchor[1], k.q.anchor[2], k.q.axis}] = id;
    }
  }
}

void Builder::make_volumes() {
  const int W = cell_dim_xz(), H = cell_dim_y();
  lat_.volumes.resize(static_cast<std::size_t>(W) * H * W);
  for (int cz = 0; cz < W; ++cz)
    for (int cy = 0; cy < H; ++cy)
      for (int cx = 0; cx < W; ++cx) {
        V3 c{cx - cell_off_xz(), cy - cell_off_y(), cz - cell_off_xz()};
        Volume& vol = lat_.volumes[cell_index(c)];
        vol.corner = c;
        vol.red = !is_green(c);
        vol.outside = !pxz_ && (c[0] < 0 || c[0] >= L_ || c[2] < 0 || c[2] >= L_);
        vol.half = !py_ && (c[1] < 0 || c[1] >= L_ - 1);
      }
}

int Builder::add_term(TermType t, Color c, int sphere, const V3& cell,
                      bool partial, std::vector<std::pair<int, int>> support) {
  const int id = static_cast<int>(lat_.terms.size());
  const int vol = cell_index(cell);
  std::sort(support.begin(), support.end());
  lat_.terms.push_back({t, c, sphere, vol, partial, std::move(support)});
  lat_.spheres[sphere].terms.push_back(id);
  Volume& v = lat_.volumes[vol];
  if ((t == TermType::B) != v.red)
    throw LatticeError("term type does not match the volume colour");
  (c == Color::Green ? v.green_terms : v.yellow_terms).push_back(id);
  return id;
}

void Builder::make_tetra(const V3& v) {
  const int sid = static_cast<int>(lat_.spheres.size());
  const Color col = is_green(v) ? Color::Green : Color::Yellow;
  Sphere sp{SphereKind::Tetra, col, v, 0, {}, {}};
  for (int s : {1, -1})
    for (int a = 0; a < 3; ++a) {
      V3 u = s > 0 ? v : sub(v, unit(a));
      int q = edge_qudit(u, a);
      if (q >= 0) sp.incidence.push_back({q, s});
    }
  lat_.spheres.push_back(sp);

  const P3 vc{double(v[0]), double(v[1]), double(v[2])};
  for (int ox : {1, -1})
    for (int oy : {1, -1})
      for (int oz : {1, -1}) {
        const std::array<int, 3> o{ox, oy, oz};
        V3 cell{v[0] + (ox > 0 ? 0 : -1), v[1] + (oy > 0 ? 0 : -1),
                v[2] + (oz > 0 ? 0 : -1)};
        const bool blue = is_green(cell);
        std::vector<std::pair<int, int>> support;
        int missing = -1, missing_count = 0;
        // Blue octants adjacent to this (red) octant, for the face centroid.
        P3 centroid{0, 0, 0};
        if (!blue) {
          for (int a = 0; a < 3; ++a) {
            V3 nb = cell;
            nb[a] += o[a] > 0 ? -1 : 1;
            centroid = padd(centroid, pscale(center(nb), 1.0 / 3.0));
          }
        }
        for (int a = 0; a < 3; ++a) {
          V3 u = o[a] > 0 ? v : sub(v, unit(a));
          const int q = edge_qudit(u, a);
          if (q < 0) {
            missing = a;
            ++missing_count;
            continue;
          }
          auto [tail, head] = edge_cells(u, a);
          if (blue) {
            if (head == cell)
              support.push_back({q, 1});
            else if (tail == cell)
              support.push_back({q, -1});
            else
              throw LatticeError("blue cell not on its edge");
          } else {
            const P3 P = center(tail), Q = center(head);
            const P3 M = pscale(padd(P, Q), 0.5);
            P3 nrm = psub(centroid, vc);
            if (col == Color::Yellow) nrm = pscale(nrm, -1.0);
            support.push_back(
                {q, sign_of(det3(psub(Q, P), psub(centroid, M), nrm))});
          }
        }
        bool partial = false;
        if (missing_count >= 2) continue;
        if (missing_count == 1) {
          // Smooth (x) sides keep truncated vertex terms, rough (z) sides keep
          // truncated face terms.
          if (missing == 0 && !blue) continue;
          if (missing == 2 && blue) continue;
          if (missing == 1) throw LatticeError("vertical edge missing");
          partial = true;
        }
        add_term(blue ? TermType::A : TermType::B, col, sid, cell, partial,
                 std::move(support));
      }
}

void Builder::make_bigon(const V3& v, int side) {
  const int sid = static_cast<int>(lat_.spheres.size());
  const Color col = side > 0 ? Color::Yellow : Color::Green;
  const V3 u = side > 0 ? v : V3{v[0], -1, v[2]};
  const int qd = edge_qudit(u, 1);
  const int qn = outer_qudit(side, v[0], v[2]);
  if (qd < 0 || qn < 0) throw LatticeError("bigon edges missing");
  Sphere sp{SphereKind::Bigon, col, v, side, {{qd, side > 0 ? 1 : -1}, {qn, side > 0 ? 1 : -1}}, {}};
  lat_.spheres.push_back(sp);

  auto [tail, head] = edge_cells(u, 1);
  const P3 B0{double(v[0]), side > 0 ? v[1] + 0.5 : -0.5, double(v[2])};
  auto horiz = [&](const V3& cell) {
    P3 c = center(cell);
    return P3{c[0] - B0[0], 0.0, c[2] - B0[2]};
  };
  const P3 P = padd(B0, horiz(tail)), Q = padd(B0, horiz(head));
  const double dy = side > 0 ? 0.1 : -0.1;
  const P3 Md{B0[0], B0[1] - dy, B0[2]}, Mn{B0[0], B0[1] + dy, B0[2]};

  add_term(TermType::A, col, sid, tail, false, {{qd, -1}, {qn, -1}});
  add_term(TermType::A, col, sid, head, false, {{qd, 1}, {qn, 1}});
  for (int ox : {0, -1})
    for (int oz : {0, -1}) {
      V3 cell{v[0] + ox, u[1], v[2] + oz};
      if (is_green(cell)) continue;
      const P3 C = padd(B0, pscale(horiz(cell), 0.3));
      P3 nrm = psub(C, B0);
      if (col == Color::Yellow) nrm = pscale(nrm, -1.0);
      const P3 QP = psub(Q, P);
      add_term(TermType::B, col, sid, cell, false,
               {{qd, sign_of(det3(QP, psub(C, Md), nrm))},
                {qn, sign_of(det3(QP, psub(C, Mn), nrm))}});
    }
}

void Builder::make_surface(int side) {
  const int sid = static_cast<int>(lat_.spheres.size());
  const Color col = side > 0 ? Color::Green : Color::Yellow;
  const int uy = side > 0 ? L_ - 1 : -1;
  const int W = xz_hi() + 1;
  auto& grid = lat_.surface_qudit[side > 0 ? 1 : 0];
  grid.assign(static_cast<std::size_t>(W) * W, -1);
  Sphere sp{SphereKind::Surface, col, {0, uy, 0}, side, {}, {}};
  for (int x = 0; x < W; ++x)
    for (int z = 0; z < W; ++z) {
      const V3 vert{x, side > 0 ? L_ - 1 : 0, z};
      const bool outer = side > 0 ? is_green(vert) : !is_green(vert);
      const int q = outer ? outer_qudit(side, x, z) : edge_qudit({x, uy, z}, 1);
      grid[x * W + z] = q;
      sp.incidence.push_back({q, 1});
    }
  std::sort(sp.incidence.begin(), sp.incidence.end());
  lat_.spheres.push_back(sp);

  // On the cube the surface carries truncated two-body terms along its
  // edges: vertex terms on smooth sides, face terms on rough sides.
  const int clo = pxz_ ? 0 : -1, chi = pxz_ ? L_ - 1 : L_;
  for (int cz = clo; cz <= chi; ++cz)
    for (int cx = clo; cx <= chi; ++cx) {
      const V3 cell{cx, uy, cz};
      const bool blue = is_green(cell);
      const bool out_x = cx < 0 || cx >= L_, out_z = cz < 0 || cz >= L_;
      if (out_x && out_z) continue;
      if (out_x && !blue) continue;
      if (out_z && blue) continue;
      std::vector<std::pair<int, int>> support;
      for (int dx : {0, 1})
        for (int dz : {0, 1}) {
          const V3 pos{cx + dx, uy, cz + dz};
          if (!xz_ok(pos[0]) || !xz_ok(pos[2])) continue;
          const int q = grid[wrap_xz(pos[0]) * W + wrap_xz(pos[2])];
          auto [tail, head] = edge_cells(pos, 1);
          if (blue) {
            if (head == cell)
              support.push_back({q, 1});
            else if (tail == cell)
              support.push_back({q, -1});
            else
              throw LatticeError("surface node not on its edge");
          } else {
            P3 P = center(tail), Q = center(head), C = center(cell);
            P[1] = Q[1] = C[1] = 0.0;
            const P3 M = pscale(padd(P, Q), 0.5);
            const P3 nrm{0.0, -1.0, 0.0};
            support.push_back({q, sign_of(det3(psub(Q, P), psub(C, M), nrm))});
          }
        }
      add_term(blue ? TermType::A : TermType::B, col, sid, cell,
               out_x || out_z, std::move(support));
    }
}

Lattice Builder::build(Manifold requested) {
  if (L_ < 2) throw LatticeError("L must be at least 2");
  if (L_ % 2 != 0) throw LatticeError("L must be even");
  lat_.manifold = requested;
  lat_.L = L_;
  make_qudits();
  make_volumes();
  const int hi = xz_hi();
  for (int z = 0; z <= hi; ++z)
    for (int y = 0; y < L_; ++y)
      for (int x = 0; x <= hi; ++x) make_tetra({x, y, z});
  if (!py_) {
    lat_.surface_width = hi + 1;
    for (int z = 0; z <= hi; ++z)
      for (int x = 0; x <= hi; ++x) {
        if (!is_green({x, 0, z})) make_bigon({x, 0, z}, -1);
      }
    for (int z = 0; z <= hi; ++z)
      for (int x = 0; x <= hi; ++x) {
        if (is_green({x, L_ - 1, z})) make_bigon({x, L_ - 1, z}, 1);
      }
    make_surface(-1);
    make_surface(1);
  }
  if (requested == Manifold::T2xIPrime) {
    for (int side : {-1, 1}) {
      const int uy = side > 0 ? L_ - 1 : -1;
      for (int cz = 0; cz < L_; ++cz)
        for (int cx = 0; cx < L_; ++cx) {
          const V3 cell{cx, uy, cz};
          if (is_green(cell)) continue;
          lat_.plaquette_qudits.push_back(static_cast<int>(lat_.qudits.size()));
          lat_.qudits.push_back({QuditClass::Plaquette, -1, cell, side,
                                 side > 0 ? kTagTop : kTagBottom});
        }
    }
  }
  lat_.n = static_cast<int>(lat_.qudits.size());
  if (lat_.n != expected_qudits(requested, L_))
    throw LatticeError("qudit count does not match the closed form");
  return std::move(lat_);
}

}  // namespace

Lattice build_lattice(Manifold m, int L) { return Builder(m, L).build(m); }

std::vector<std::pair<int, int>> sphere_incidence(const Lattice& lat,
                                                  int sphere_id) {
  if (sphere_id < 0 || sphere_id >= static_cast<int>(lat.spheres.size()))
    throw LatticeError("invalid sphere id");
  return lat.spheres[sphere_id].incidence;
}

VolumeIncidence volume_incidence(const Lattice& lat, int volume_id) {
  if (volume_id < 0 || volume_id >= static_cast<int>(lat.volumes.size()))
    throw LatticeError("invalid volume id");
  const Volume& v = lat.volumes[volume_id];
  VolumeIncidence r{v.red, v.green_terms, v.yellow_terms, {}};
  for (int t : v.green_terms)
    for (auto [q, s] : lat.terms[t].support) r.qudits.push_back(q);
  for (int t : v.yellow_terms)
    for (auto [q, s] : lat.terms[t].support) r.qudits.push_back(q);
  std::sort(r.qudits.begin(), r.qudits.end());
  r.qudits.erase(std::unique(r.qudits.begin(), r.qudits.end()), r.qudits.end());
  return r;
}

std::string lattice_dump(const Lattice& lat) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "saqd-lattice";
  j["version"] = 1;
  j["manifold"] = manifold_name(lat.manifold);
  j["L"] = lat.L;
  j["n"] = lat.n;
  ordered_json qs = ordered_json::array();
  for (const auto& q : lat.qudits)
    qs.push_back({{"class", qudit_class_name(q.cls)},
                  {"axis", q.axis},
                  {"anchor", q.anchor},
                  {"side", q.side},
                  {"tags", q.tags}});
  j["qudits"] = qs;
  ordered_json ts = ordered_json::array();
  for (const auto& t : lat.terms)
    ts.push_back({{"type", t.type == TermType::A ? "A" : "B"},
                  {"color", color_name(t.color)},
                  {"sphere", t.sphere},
                  {"volume", t.volume},
                  {"partial", t.partial},
                  {"support", t.support}});
  j["terms"] = ts;
  ordered_json ss = ordered_json::array();
  for (const auto& s : lat.spheres) {
    const char* kind = s.kind == SphereKind::Tetra   ? "tetra"
                       : s.kind == SphereKind::Bigon ? "bigon"
                                                     : "surface";
    ss.push_back({{"kind", kind},
                  {"color", color_name(s.color)},
                  {"anchor", s.anchor},
                  {"side", s.side},
                  {"incidence", s.incidence},
                  {"terms", s.terms}});
  }
  j["spheres"] = ss;
  ordered_json vs = ordered_json::array();
  for (const auto& v : lat.volumes)
    vs.push_back({{"corner", v.corner},
                  {"red", v.red},
                  {"outside", v.outside},
                  {"half", v.half},
                  {"green", v.green_terms},
                  {"yellow", v.yellow_terms}});
  j["volumes"] = vs;
  j["plaquettes"] = lat.plaquette_qudits;
  return j.dump();
}

}  // namespace saqd
