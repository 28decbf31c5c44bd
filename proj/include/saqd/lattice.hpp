// Cubic-lattice geometry for the supported manifolds: qudit registry,
// coloured spheres with their local vertex/face terms, and volumes.
//
// Coordinates: x and z are horizontal, y is vertical. Vertex (x,y,z) is green
// when x+y+z is even and yellow otherwise. A unit cell is named by its minimal
// corner and is blue (hosting Z-type volume operators) when the corner sum is
// even, red (X-type) when odd. Qudits sit on cubic edges; every cubic edge
// carries the blue-graph edge joining the two blue cells around it, directed
// by a translation-invariant rule that depends only on the edge axis and the
// colour of its lower endpoint.
#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace saqd {

enum class Manifold { Torus3, T2xI, T2xIPrime, Cube };

std::string manifold_name(Manifold m);
Manifold parse_manifold(const std::string& s);

class LatticeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Color : unsigned char { Green, Yellow };

std::string color_name(Color c);

enum class QuditClass : unsigned char {
  Bulk,       // full cubic edge
  HalfEdge,   // dangling vertical edge at the top or bottom layer
  Outer,      // extra qudit beyond a dangling edge (top green / bottom yellow)
  Plaquette,  // weight-reduction ancilla on a red surface cell
};

std::string qudit_class_name(QuditClass c);

// Boundary tag bits.
enum : unsigned {
  kTagTop = 1u,
  kTagBottom = 2u,
  kTagSmooth = 4u,  // on an x = const side face (Cube)
  kTagRough = 8u,   // on a z = const side face (Cube)
};

struct Qudit {
  QuditClass cls;
  int axis;                   // 0 = x, 1 = y, 2 = z (plaquettes: -1)
  std::array<int, 3> anchor;  // lower endpoint, or cell corner for plaquettes
  int side;                   // +1 top, -1 bottom, 0 elsewhere
  unsigned tags;
};

enum class TermType : unsigned char { A, B };  // A: Z-type, B: X-type

struct LocalTerm {
  TermType type;
  Color color;
  int sphere;
  int volume;
  bool partial;  // truncated by a side boundary
  std::vector<std::pair<int, int>> support;  // (qudit, +1 / -1)
};

enum class SphereKind : unsigned char { Tetra, Bigon, Surface };

struct Sphere {
  SphereKind kind;
  Color color;
  std::array<int, 3> anchor;  // vertex (tetra, bigon) or (0, y, 0) (surface)
  int side;
  // (qudit, +1 if the vertex is the lower endpoint, -1 otherwise); surfaces
  // list their edges with +1.
  std::vector<std::pair<int, int>> incidence;
  std::vector<int> terms;
};

struct Volume {
  std::array<int, 3> corner;
  bool red;
  bool outside;  // lies beyond a side boundary (only terms of boundary
                 // spheres reach it)
  bool half;     // top or bottom half cell
  std::vector<int> green_terms;
  std::vector<int> yellow_terms;
};

struct Lattice {
  Manifold manifold;
  int L;
  int n;
  std::vector<Qudit> qudits;
  std::vector<Sphere> spheres;
  std::vector<Volume> volumes;
  std::vector<LocalTerm> terms;
  // Surface edge at horizontal position (x, z): surface_qudit[s][x * W + z]
  // with s = 0 bottom, 1 top and W the number of vertex positions per axis;
  // -1 where absent.
  int surface_width = 0;
  std::vector<int> surface_qudit[2];
  // Qudit indices of the plaquette qudits (T2xIPrime only), bottom first.
  std::vector<int> plaquette_qudits;
};

Lattice build_lattice(Manifold m, int L);

std::vector<std::pair<int, int>> sphere_incidence(const Lattice& lat,
                                                  int sphere_id);

struct VolumeIncidence {
  bool red;
  std::vector<int> green_terms;
  std::vector<int> yellow_terms;
  std::vector<int> qudits;  // union of supports, sorted
};

VolumeIncidence volume_incidence(const Lattice& lat, int volume_id);

// Closed-form qudit count for a manifold.
long long expected_qudits(Manifold m, int L);

// Canonical, versioned JSON dump of the registry.
std::string lattice_dump(const Lattice& lat);

}  // namespace saqd
