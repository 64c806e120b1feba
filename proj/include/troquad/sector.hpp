#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "troquad/alias_table.hpp"
#include "troquad/estimator.hpp"
#include "troquad/permutahedron.hpp"
#include "troquad/random.hpp"
#include "troquad/rational.hpp"
#include "troquad/sample.hpp"

namespace troquad {

/// One maximal simplicial cone of the refined normal fan. The integrand's
/// tropical part behaves like the monomial x^weight on it.
struct SimplicialSector {
  std::vector<RationalVector> generators;  // n-1 vectors of length n
  RationalVector weight;
  Rational factor_exact;
  double factor = 0.0;
  /// coef[k][i] = generators[k][i] / <generators[k], weight>
  std::vector<std::vector<double>> coef;
};

/// Validates the invariants and computes the sector factor
/// |det(u_1, ..., u_{n-1}, 1)| / prod_k <u_k, w>.
SimplicialSector make_sector(std::vector<RationalVector> generators,
                             RationalVector weight);

class SectorTable {
 public:
  SectorTable() = default;
  SectorTable(std::size_t n, std::vector<SimplicialSector> sectors);

  std::size_t n() const { return n_; }
  const std::vector<SimplicialSector>& sectors() const { return sectors_; }
  double total() const { return total_; }
  const Rational& total_exact() const { return total_exact_; }
  const AliasTable& alias() const { return alias_; }

 private:
  std::size_t n_ = 0;
  std::vector<SimplicialSector> sectors_;
  Rational total_exact_;
  double total_ = 0.0;
  AliasTable alias_;
};

/// Sectors on which max_B <y,.> - max_A <y,.> is linear, for point sets A and
/// B on hyperplanes of equal degree. Desk scale: intended for n <= 8.
SectorTable build_refined_fan(const std::vector<RationalVector>& a_points,
                              const std::vector<RationalVector>& b_points);

/// Sectors given by Weyl chambers for a generalized permutahedron input with
/// r(A) = z_A(A) - z_B(A); chamber factors are 1 / prod_k r(A_k).
SectorTable braid_fan_table(const BooleanTable& r);

SectorTable parse_sector_table(std::istream& in);
SectorTable load_sector_table(const std::string& path);
void write_sector_table(std::ostream& out, const SectorTable& t);

/// Draws a point of the sector: log x = sum_k coef[k] * (-log xi_k),
/// shifted so that the maximum coordinate is zero.
void sample_in_sector(const SimplicialSector& s, RandomStream& rng,
                      TropicalSample& out);
void sample_from_table(const SectorTable& t, RandomStream& rng, TropicalSample& out);
TropicalSample sample_from_table(const SectorTable& t, RandomStream& rng);

/// Integrand of a tropical sample; false marks a rejected evaluation.
using SampleIntegrand = std::function<bool(const TropicalSample&, std::span<double>)>;

struct SectorEstimate {
  EstimateReport combined;
  std::vector<double> sector_estimate;
  std::vector<double> sector_std_error;
  bool std_error_defined = true;
};

/// Per-sector Monte Carlo: sum_C I_C * mean_C(f), variances added.
SectorEstimate estimate_per_sector(const SectorTable& t, const SampleIntegrand& f,
                                   std::uint64_t n_per_sector, RandomStream& rng,
                                   double reject_threshold = 1e-6);

/// Index of a sector containing direction y, or -1. Uses barycentric
/// coordinates in the generators modulo the all-ones vector.
long find_sector(const SectorTable& t, std::span<const double> y);

}  // namespace troquad
