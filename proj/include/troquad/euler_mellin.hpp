#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "troquad/estimator.hpp"
#include "troquad/polynomial.hpp"
#include "troquad/sector.hpp"

namespace troquad {

/// Projective integral of prod a_i^alpha_i / prod b_j^beta_j over the
/// positive orthant, with complex coefficients and powers. Powers use the
/// principal branch of the logarithm.
struct EulerMellinProblem {
  std::vector<SparsePolynomial> numerators;
  std::vector<Complex> numerator_powers;
  std::vector<SparsePolynomial> denominators;
  std::vector<Complex> denominator_powers;

  std::size_t n_vars() const;
  void validate() const;
};

/// Point sets A = sum Re(alpha_i) NP(a_i) and B = sum Re(beta_j) NP(b_j);
/// factors with negative real power move to the other side.
std::pair<std::vector<RationalVector>, std::vector<RationalVector>>
euler_mellin_point_sets(const EulerMellinProblem& p);

/// Integrand relative to its tropical approximation on a sample's sector.
/// Writes (Re, Im); rejects when a denominator vanishes.
class EulerMellinIntegrand {
 public:
  EulerMellinIntegrand(const EulerMellinProblem& p, const SectorTable& t);
  bool operator()(const TropicalSample& s, std::span<double> out) const;

 private:
  const EulerMellinProblem* p_;
  std::vector<std::vector<double>> weights_;
};

KernelFactory euler_mellin_kernel(const EulerMellinProblem& p, const SectorTable& t);

/// Parses "re" or "re:im".
Complex parse_power(const std::string& text);

}  // namespace troquad
