#include "troquad/alias_table.hpp"

#include <cmath>

#include "troquad/errors.hpp"

namespace troquad {

AliasTable::AliasTable(const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw Error("alias table needs at least one outcome");
  long double total = 0.0L;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error("alias table weights must be finite and non-negative");
    }
    total += w;
  }
  if (!(total > 0.0L)) throw Error("alias table weights sum to zero");

  std::vector<long double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = static_cast<long double>(weights[i]) * n / total;
    (scaled[i] < 1.0L ? small : large).push_back(i);
  }
  prob_.assign(n, 1.0);
  alias_.resize(n);
  for (std::size_t i = 0; i < n; ++i) alias_[i] = static_cast<std::uint32_t>(i);

  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    prob_[s] = static_cast<double>(scaled[s]);
    alias_[s] = static_cast<std::uint32_t>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0L;
    if (scaled[l] < 1.0L) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers differ from 1 only by rounding.
  for (std::size_t i : small) prob_[i] = 1.0;
  for (std::size_t i : large) prob_[i] = 1.0;
}

double AliasTable::probability(std::size_t i) const {
  long double p = prob_[i];
  for (std::size_t j = 0; j < prob_.size(); ++j) {
    if (alias_[j] == i && j != i) p += 1.0L - prob_[j];
  }
  return static_cast<double>(p / prob_.size());
}

}  // namespace troquad
