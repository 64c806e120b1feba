#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

/// Sum over all permutations of prod_{k<n} 1/r(A_k), A_k the first k elements.
double brute_force_J(std::size_t n, const std::function<double(std::uint64_t)>& r);

struct Multigraph {
  std::size_t V = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

/// All connected loopless multigraphs with 1 <= E <= max_edges, one per
/// isomorphism class.
std::vector<Multigraph> connected_multigraphs(std::size_t max_edges);

/// Spanning trees and spanning 2-forests by subset enumeration. Self-loops
/// are allowed (they never belong to a forest). Values are exact sums in
/// long double at the point x.
struct Forests {
  long double psi = 0;
  long double phi_kin = 0;
  long double phi_mass = 0;
  long double phi() const { return phi_kin + phi_mass; }
};
Forests enumerate_forests(std::size_t V,
                          const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                          const std::vector<std::vector<double>>& momenta,
                          const std::vector<double>& masses_sq, std::span<const double> x);

/// Phi of the graph with the edges in gamma contracted, at x restricted to
/// the remaining edges, evaluated by enumeration.
long double contracted_phi(std::size_t V,
                           const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                           const std::vector<std::vector<double>>& momenta,
                           const std::vector<double>& masses_sq, std::uint64_t gamma,
                           std::span<const double> x);

/// Exponent vectors of the Kirchhoff polynomial: complements of spanning trees.
std::vector<std::vector<int>> psi_support(
    std::size_t V, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

/// Period integral of prod x^nu / Psi^(D/2) over the projective simplex for
/// omega = 0 graphs, by tensor Gauss-Legendre in every Hepp sector with
/// `points` nodes per dimension.
double hepp_sector_quadrature(std::size_t V,
                              const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                              const std::vector<double>& nu, double D, int points);

struct QuadratureResult {
  double value;
  double error;
  int points;
};
/// Raises the number of nodes until successive results agree to `rel_tol`.
QuadratureResult adaptive_hepp_quadrature(
    std::size_t V, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
    const std::vector<double>& nu, double D, double rel_tol, int max_points = 14);

/// Asymptotic Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda);
/// One-sample KS p-value of data against a continuous CDF.
double ks_pvalue(std::vector<double> data, const std::function<double(double)>& cdf);
/// Pearson chi-squared p-value of observed counts against probabilities.
double chi_squared_pvalue(const std::vector<std::uint64_t>& observed,
                          const std::vector<double>& probabilities);

}  // namespace oracle
