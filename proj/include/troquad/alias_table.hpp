#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "troquad/random.hpp"

namespace troquad {

/// Walker/Vose alias table for O(1) draws from a finite distribution.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights);

  std::size_t size() const { return prob_.size(); }

  std::size_t sample(RandomStream& rng) const {
    const double u = rng.uniform() * static_cast<double>(prob_.size());
    auto column = static_cast<std::size_t>(u);
    if (column >= prob_.size()) column = prob_.size() - 1;
    const double frac = u - static_cast<double>(column);
    return frac < prob_[column] ? column : alias_[column];
  }

  /// Probability of outcome i implied by the table.
  double probability(std::size_t i) const;

  const std::vector<double>& acceptance() const { return prob_; }
  const std::vector<std::uint32_t>& aliases() const { return alias_; }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace troquad
