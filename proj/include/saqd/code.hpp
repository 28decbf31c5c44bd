// Subsystem code assembly: gauge generators from the lattice terms, local and
// sheet stabilizers, bare and dressed logical operators, parameter checks,
// the three-body weight reduction and the toric gauge fixing.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saqd/lattice.hpp"
#include "saqd/qudit_algebra.hpp"

namespace saqd {

class CodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GaugeGen {
  PauliOp op;
  TermType kind;  // A: Z-type, B: X-type
  Color color;
  int sphere;     // -1 for plaquette single-qudit generators
  int volume;     // -1 when not attached to a unit cell
  int term;       // index into Lattice::terms, or -1
};

enum class StabKind : unsigned char { LocalX, LocalZ, SheetX, SheetZ };

std::string stab_kind_name(StabKind k);

struct StabGen {
  PauliOp op;
  StabKind kind;
  int locus;  // volume id (local) or plane coordinate (sheet)
};

struct LogicalPair {
  PauliOp x;
  PauliOp z;
};

struct CodeParams {
  int n = 0;
  int s = 0;  // minimal stabilizer generator count
  int r = 0;  // gauge qudits
  int k = 0;  // logical qudits
};

// Sparse linear combination (index, coefficient).
using Combo = std::vector<std::pair<int, int>>;

// Everything the two-stage decoder needs, expressed over measured fluxes.
struct DecodingLayout {
  // Gauge generator index measured as flux variable i (all X-type gauge).
  std::vector<int> flux_gauge;
  // Local relations: each row is a combination of flux variables that
  // vanishes for every physical residual.
  std::vector<Combo> relations;
  // X-type checks acting on the decoding frame, and the flux combination that
  // reproduces each check's syndrome.
  std::vector<PauliOp> checks;
  std::vector<Combo> recipes;
  // Map of a Z-type correction from the decoding frame to physical qudits:
  // frame qudit q contributes coefficient c to every (qudit, c) in
  // push_forward[q].
  std::vector<Combo> push_forward;
  bool identity_frame = true;
};

struct SubsystemCode {
  int d = 2;
  Lattice lat;
  std::vector<GaugeGen> gauge;
  std::vector<StabGen> stabilizers;
  std::vector<LogicalPair> bare_logicals;
  std::vector<LogicalPair> dressed_logicals;
  CodeParams params;
  DecodingLayout layout;

  int n() const { return lat.n; }
  std::vector<int> z_gauge_indices() const;
  std::vector<int> x_gauge_indices() const;
  std::vector<PauliOp> x_stabilizers() const;
};

SubsystemCode build_code(Manifold m, int L, int d);

// Local stabilizers (products over one unit cell) plus, on the 3-torus, the
// sheet stabilizers of the three coordinate planes.
std::vector<StabGen> build_stabilizers(const SubsystemCode& code);

// Bare and dressed logical pairs, normalized so sp(X_i, Z_j) = delta_ij.
std::pair<std::vector<LogicalPair>, std::vector<LogicalPair>> build_logicals(
    const SubsystemCode& code);

struct ParameterReport {
  Manifold manifold;
  int L = 0;
  int d = 0;
  long long n = 0;
  int k = 0;
  long long expected_n = 0;
  int expected_k = 0;
  int s = 0;
  int r = 0;
  int bare_weight = 0;     // weight of the first bare X logical (0 if none)
  int dressed_weight = 0;  // weight of the first dressed X logical
  bool ok() const { return n == expected_n && k == expected_k; }
};

int expected_logical_qudits(Manifold m);
ParameterReport verify_parameters(const SubsystemCode& code);

// Sheet operator of the given type lying in the plane normal to `normal_axis`
// at coordinate c, with exponents fixed by commutation with every gauge
// generator of the opposite type. Empty when no such operator exists.
std::optional<PauliOp> solve_sheet(const SubsystemCode& code, bool x_type,
                                   int normal_axis, int c);

struct DistanceResult {
  bool found = false;
  int weight = 0;  // exact minimum when found, otherwise the cap
  std::optional<PauliOp> witness;
};

// Minimum weight of a Z-type operator that commutes with every X-type
// stabilizer yet has nonzero symplectic product with some bare X logical
// (restricted to logical `which` when it is >= 0). Enumerates all supports
// of size <= cap; cost ~ C(n, w) (d-1)^w per weight w.
DistanceResult brute_force_distance(const SubsystemCode& code, int cap,
                                    int which = -1);

// Lift a T2xI code onto the T2xIPrime register (plaquette qudits with their X
// and Z gauge generators) and push it through the controlled-X circuit.
SubsystemCode apply_weight_reduction(const SubsystemCode& base);

struct CircuitGate {
  int control;
  int target;
  int power;
};

// The weight-reduction circuit on the T2xIPrime register, in application
// order.
std::vector<CircuitGate> weight_reduction_circuit(const Lattice& prime);

// Conjugate op by the circuit (op -> U op U^dagger) or by its inverse.
PauliOp apply_circuit(const std::vector<CircuitGate>& gates, const PauliOp& op,
                      bool inverse = false);

// Z-type local stabilizers together with every X-type gauge generator.
std::vector<PauliOp> gauge_fix_toric(const SubsystemCode& code);

DecodingLayout build_decoding_layout(const SubsystemCode& code);

// Canonical versioned JSON listing of the generators.
std::string code_dump(const SubsystemCode& code);

}  // namespace saqd
