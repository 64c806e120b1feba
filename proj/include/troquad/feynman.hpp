#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "troquad/permutahedron.hpp"
#include "troquad/polynomial.hpp"
#include "troquad/sample.hpp"
#include "troquad/sector.hpp"

namespace troquad {

struct Edge {
  std::uint32_t u;
  std::uint32_t v;
};

/// Euclidean Feynman graph with edge weights, masses and vertex momenta.
class FeynmanGraph {
 public:
  FeynmanGraph() = default;
  FeynmanGraph(std::string name, std::size_t num_vertices, std::vector<Edge> edges,
               std::vector<double> nu, double D, std::vector<double> masses_sq,
               std::vector<std::vector<double>> momenta);

  static FeynmanGraph from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const std::string& name() const { return name_; }
  std::size_t num_vertices() const { return V_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& nu() const { return nu_; }
  double D() const { return D_; }
  const std::vector<double>& masses_sq() const { return masses_sq_; }
  /// momenta()[v] has kinematic_dim() entries.
  const std::vector<std::vector<double>>& momenta() const { return momenta_; }
  std::size_t kinematic_dim() const { return kdim_; }

  int loops() const { return static_cast<int>(edges_.size()) - static_cast<int>(V_) + 1; }
  double omega() const;
  bool has_masses() const;
  bool has_momenta() const;
  std::uint64_t massive_mask() const;
  std::vector<std::uint32_t> momentum_vertices() const;

 private:
  std::string name_;
  std::size_t V_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> nu_;
  double D_ = 4.0;
  std::vector<double> masses_sq_;
  std::vector<std::vector<double>> momenta_;
  std::size_t kdim_ = 0;
};

FeynmanGraph load_graph(const std::string& path);

struct SymanzikValue {
  double log_psi;
  double log_phi;  // -inf when Phi vanishes identically or was not requested
  bool ok;         // false: evaluation rejected (non-finite or out of range)
};

/// Evaluates log Psi and log Phi at log coordinates y by eliminating the
/// reduced Laplacian with conductances exp(-y_e). Elimination only adds
/// non-negative quantities, so pivots never lose relative accuracy. Owns its
/// scratch space; use one instance per worker.
class SymanzikEvaluator {
 public:
  explicit SymanzikEvaluator(const FeynmanGraph& g);
  SymanzikValue evaluate(std::span<const double> y, bool need_phi = true);

 private:
  const FeynmanGraph* g_;
  std::size_t m_;                  // number of non-ground vertices
  std::vector<std::uint32_t> pos_;  // vertex -> row, ground maps to m_
  std::vector<double> cond_;       // m_ x m_ off-diagonal conductances
  std::vector<double> ground_;
  std::vector<double> q_;          // m_ x kdim momentum right-hand sides
};

SymanzikValue psi_phi_eval(const FeynmanGraph& g, std::span<const double> y);

/// Spanning-tree and spanning-2-forest sums; edges may include self-loops.
struct ForestSums {
  long double psi;
  long double phi_kin;
  long double phi_mass;  // Psi * sum x_e m_e^2
};
ForestSums forest_sums(std::size_t num_vertices, const std::vector<Edge>& edges,
                       const std::vector<std::vector<double>>& momenta,
                       const std::vector<double>& masses_sq,
                       std::span<const double> x);

/// Oracle by enumeration, E <= 14.
SymanzikValue psi_phi_reference(const FeynmanGraph& g, std::span<const double> x);

/// Expanded Symanzik polynomials, E <= 14.
SparsePolynomial psi_polynomial(const FeynmanGraph& g);
SparsePolynomial phi_polynomial(const FeynmanGraph& g);

/// Whether Phi of G with the edges of gamma contracted vanishes identically,
/// decided from its expanded coefficients.
bool contracted_phi_vanishes(const FeynmanGraph& g, std::uint64_t gamma);

/// Mass-momentum-spanning test from the combinatorial characterization.
bool is_mass_momentum_spanning(const FeynmanGraph& g, std::uint64_t gamma);

/// Loop number of an edge subset with components counted over all vertices.
int subgraph_loops(const FeynmanGraph& g, std::uint64_t gamma);

/// Table with r, loops and flags filled for every subgraph; logJ left zero.
SubsetTable feynman_r_table(const FeynmanGraph& g, const SubsetTableOptions& opt = {});

/// r table plus the J recursion; throws DivergenceError on r <= 0.
SubsetTable build_feynman_tables(const FeynmanGraph& g,
                                 const SubsetTableOptions& opt = {});

/// Strict non-empty subsets of momentum vertices whose momenta sum to zero.
std::vector<std::string> exceptional_momentum_warnings(const FeynmanGraph& g);

BooleanTable z_psi(const SubsetTable& t);
BooleanTable z_phi(const SubsetTable& t);

/// Tropical values log Psi^tr, log Phi^tr at a sample from sample_gp.
std::pair<double, double> feynman_trop_values(const SubsetTable& t,
                                              const TropicalSample& s);

/// Integrand and its expansion in D -> D - 2 eps; order k is
/// R * (log Psi + loops * log(Psi/Phi))^k / k!.
class FeynmanIntegrand {
 public:
  FeynmanIntegrand(const FeynmanGraph& g, const SubsetTable& t, int eps_order = 0);
  /// Fills out[0..eps_order]; sets the tropical values of `s`.
  bool operator()(TropicalSample& s, std::span<double> out);
  std::size_t orders() const { return static_cast<std::size_t>(order_) + 1; }

 private:
  const FeynmanGraph* g_;
  const SubsetTable* t_;
  int order_;
  bool need_phi_;
  SymanzikEvaluator eval_;
};

double feynman_integrand(const FeynmanGraph& g, const SubsetTable& t,
                         TropicalSample& s);
std::vector<double> eps_integrand(const FeynmanGraph& g, const SubsetTable& t,
                                  TropicalSample& s, int order);

/// Kernel drawing from sample_gp and evaluating FeynmanIntegrand.
KernelFactory feynman_kernel(const FeynmanGraph& g, const SubsetTable& t,
                             int eps_order = 0);

/// Vertex sets A and B of the refined fan for the Feynman integrand, via the
/// expanded polynomials; E <= 14.
std::pair<std::vector<RationalVector>, std::vector<RationalVector>>
feynman_point_sets(const FeynmanGraph& g);

/// Integrand relative to the tropical one for samples of a sector table
/// built from feynman_point_sets (or braid_fan_table on the r table).
class FeynmanSectorIntegrand {
 public:
  FeynmanSectorIntegrand(const FeynmanGraph& g, const SectorTable& t);
  bool operator()(const TropicalSample& s, std::span<double> out);

 private:
  const FeynmanGraph* g_;
  std::vector<std::vector<double>> weights_;
  SymanzikEvaluator eval_;
};

KernelFactory feynman_sector_kernel(const FeynmanGraph& g, const SectorTable& t);

}  // namespace troquad
