#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "troquad/random.hpp"
#include "troquad/sample.hpp"

namespace troquad {

using Subset = std::uint64_t;

/// A real function on the subsets of {0, ..., n-1}, indexed by bitmask.
class BooleanTable {
 public:
  BooleanTable() = default;
  BooleanTable(std::size_t n, std::vector<double> values);
  static BooleanTable from_function(std::size_t n,
                                    const std::function<double(Subset)>& f);

  std::size_t n() const { return n_; }
  Subset full() const { return (Subset{1} << n_) - 1; }
  double operator[](Subset a) const { return values_[a]; }
  double& operator[](Subset a) { return values_[a]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

constexpr std::uint32_t kMassMomentumSpanning = 1u;

struct SubsetRecord {
  double r;
  double logJ;
  std::uint32_t loops;
  std::uint32_t flags;
};
static_assert(sizeof(SubsetRecord) == 24);

class SubsetTable {
 public:
  SubsetTable() = default;
  SubsetTable(std::size_t n, std::vector<SubsetRecord> records);

  std::size_t n() const { return n_; }
  Subset full() const { return (Subset{1} << n_) - 1; }
  const SubsetRecord& operator[](Subset a) const { return records_[a]; }
  SubsetRecord& operator[](Subset a) { return records_[a]; }
  const std::vector<SubsetRecord>& records() const { return records_; }

  double log_I_tr() const { return records_.back().logJ; }
  std::uint64_t bytes() const { return records_.size() * sizeof(SubsetRecord); }

 private:
  std::size_t n_ = 0;
  std::vector<SubsetRecord> records_;
};

/// Bytes needed for a table over n elements.
std::uint64_t table_bytes(std::size_t n);

struct SupermodularReport {
  bool ok = true;
  bool exhaustive = true;
  Subset a = 0, b = 0;
  double z_a = 0, z_b = 0, z_meet = 0, z_join = 0;
  std::string describe() const;
};

/// Checks z(A) + z(B) <= z(A & B) + z(A | B) through the equivalent local
/// inequalities on pairs A+i, A+j. Exhaustive for n <= 20, otherwise checks
/// `samples` random local pairs.
SupermodularReport check_supermodular(const BooleanTable& z,
                                      std::uint64_t samples = 1000000,
                                      std::uint64_t seed = 1);

/// w[sigma[k]] = z(A_k) - z(A_{k-1}) with A_k = {sigma[0..k-1]}.
std::vector<double> vertex_from_permutation(const BooleanTable& z,
                                            const std::vector<std::uint32_t>& sigma);

struct SubsetTableOptions {
  std::uint64_t max_bytes = std::uint64_t{8} << 30;
  /// r at or below tolerance * max|r| counts as non-positive.
  double tolerance = 1e-12;
};

/// Fills r and logJ (loops and flags left zero) and checks r > 0 on all
/// non-empty proper subsets.
SubsetTable build_subset_table(const BooleanTable& r,
                               const SubsetTableOptions& opt = {});

/// The r field of every record as a boolean table.
BooleanTable r_values(const SubsetTable& t);

/// Runs the J recursion over a table whose r fields are already set.
void fill_log_j(SubsetTable& t, const SubsetTableOptions& opt = {});

/// Draws from the tropical measure of a generalized permutahedron without
/// triangulation: elements are removed from the full set one at a time.
void sample_gp(const SubsetTable& t, RandomStream& rng, TropicalSample& out);
TropicalSample sample_gp(const SubsetTable& t, RandomStream& rng);

/// <log x, vertex_from_permutation(z, sigma)> for a sample from sample_gp.
double trop_values_at_sample(const BooleanTable& z, const TropicalSample& s);

void write_subset_table(std::ostream& out, const SubsetTable& t);
SubsetTable read_subset_table(std::istream& in);
void save_subset_table(const std::string& path, const SubsetTable& t);
SubsetTable load_subset_table(const std::string& path);

std::string format_subset(Subset a, std::size_t n);

}  // namespace troquad
