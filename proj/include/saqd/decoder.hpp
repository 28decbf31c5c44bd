// Two-stage decoding: flux validation over the local relations, then qudit
// correction over the stabilizer checks. Both stages reduce to H y = sigma
// with at most two nonzero entries per column of H.
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "saqd/code.hpp"

namespace saqd {

class DecoderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sparse m x n matrix over Z_d, stored by column.
struct CheckMatrix {
  int m = 0;
  int n = 0;
  int d = 2;
  std::vector<std::vector<std::pair<int, int>>> cols;  // (row, value)

  CheckMatrix() = default;
  CheckMatrix(int m_, int n_, int d_) : m(m_), n(n_), d(d_), cols(n_) {}

  // Adds value to entry (row, col); zero results are dropped.
  void add(int row, int col, int value);
  int max_column_weight() const;
  std::vector<int> apply(const std::vector<int>& y) const;

  // Header "m n d" followed by one "row col value" line per entry.
  void write_text(std::ostream& os) const;
  static CheckMatrix read_text(std::istream& is);
};

// Rows are the local relations, columns the measured flux variables.
CheckMatrix build_validation_checks(const SubsystemCode& code);
// Rows are the local X stabilizers, columns the qudits of the decoding frame.
CheckMatrix build_correction_checks(const SubsystemCode& code);

struct GraphEdge {
  int u;   // check node, or -1 for a column with no entries
  int v;   // second check node or the auxiliary node
  int cu;  // coefficient of the column at u
  int cv;  // coefficient at v (0 when v is the auxiliary node)
};

class SyndromeGraph {
 public:
  explicit SyndromeGraph(const CheckMatrix& H);

  int d() const { return d_; }
  int checks() const { return m_; }
  int aux() const { return m_; }
  int nodes() const { return m_ + 1; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const GraphEdge& edge(int e) const { return edges_[e]; }
  // (neighbour, edge) pairs sorted by neighbour, then edge.
  const std::vector<std::pair<int, int>>& adjacent(int node) const {
    return adj_[node];
  }
  // Coefficient of edge e at one of its check endpoints.
  int coefficient(int e, int node) const {
    return edges_[e].u == node ? edges_[e].cu : edges_[e].cv;
  }
  int inverse_unit(int a) const { return inv_[a]; }
  // True when moving charge around any cycle returns it unchanged, so the
  // charge of a cluster does not depend on the tree used to collect it.
  bool is_balanced() const;

 private:
  int m_;
  int d_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
  std::vector<int> inv_;
};

SyndromeGraph build_syndrome_graph(const CheckMatrix& H);

// Grow / merge / neutralize clustering decoder. Holds scratch arrays sized to
// one graph; reuse an instance per worker.
class ClusterDecoder {
 public:
  explicit ClusterDecoder(const SyndromeGraph& g);
  std::vector<int> decode(const std::vector<int>& sigma);

 private:
  struct Cluster {
    int root;
    int size;
    int charge;      // sum of factor * residual over members
    int aux_node;    // member node adjacent to the auxiliary node, or -1
    int aux_edge;
    bool active;
    std::vector<int> members;
    std::vector<int> frontier;
  };
  void merge(int big, int small, int u, int v, int e);
  void neutralize(int c, std::vector<int>& y);
  int charge_after_merge(int a, int b, int u, int v, int e);

  const SyndromeGraph& g_;
  std::vector<Cluster> clusters_;
  std::vector<int> owner_;         // node -> cluster id, -1 when free
  std::vector<int> factor_;        // node -> multiplier toward its root
  std::vector<int> residual_;      // node -> remaining charge
  std::vector<std::vector<std::pair<int, int>>> tree_;  // node -> (nbr, edge)
};

// Exact minimum-weight decoding for d = 2 by perfect matching of the defects
// under hop-count distances. A pair may also be retired through the boundary,
// and odd groups get one virtual vertex standing for it.
class MatchingDecoder {
 public:
  explicit MatchingDecoder(const SyndromeGraph& g);
  std::vector<int> decode(const std::vector<int>& sigma);

 private:
  void bfs(int source, bool prune, int target);

  const SyndromeGraph& g_;
  std::vector<int> bdist_;       // hop distance to the auxiliary node
  std::vector<int> toward_aux_;  // edge leading one hop closer to it
  std::vector<int> dist_;
  std::vector<int> via_;
  std::vector<int> defect_index_;
  std::vector<int> touched_;
};

std::vector<int> cluster_decode(const SyndromeGraph& g,
                                const std::vector<int>& sigma);
std::vector<int> mwpm_decode(const SyndromeGraph& g,
                             const std::vector<int>& sigma);

enum class DecoderKind { Clustering, Matching };

std::string decoder_name(DecoderKind k);
DecoderKind parse_decoder(const std::string& s);

struct DecoderConfig {
  DecoderKind validator = DecoderKind::Clustering;
  DecoderKind corrector = DecoderKind::Clustering;
};

struct TwoStageResult {
  std::vector<int> corrected_flux;
  std::vector<int> stabilizer_syndrome;
  std::vector<int> correction;  // Z exponents on physical qudits
};

// The check matrices, graphs and decoders of one code. The code object must
// outlive the instance.
class TwoStageDecoder {
 public:
  TwoStageDecoder(const SubsystemCode& code, DecoderConfig cfg);

  // The returned correction is subtracted from the residual.
  TwoStageResult decode(const std::vector<int>& noisy_flux);
  const CheckMatrix& validation_checks() const { return h1_; }
  const CheckMatrix& correction_checks() const { return h2_; }

 private:
  std::vector<int> solve(DecoderKind kind, bool first,
                         const std::vector<int>& sigma);

  const SubsystemCode& code_;
  DecoderConfig cfg_;
  CheckMatrix h1_;
  CheckMatrix h2_;
  SyndromeGraph g1_;
  SyndromeGraph g2_;
  ClusterDecoder c1_;
  ClusterDecoder c2_;
  MatchingDecoder m1_;
  MatchingDecoder m2_;
};

TwoStageResult two_stage_decode(const SubsystemCode& code,
                                const std::vector<int>& noisy_flux,
                                DecoderConfig cfg);

}  // namespace saqd
