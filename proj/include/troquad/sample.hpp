#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace troquad {

/// A point drawn from the tropical measure, in log coordinates with
/// max_k log_x[k] = 0, plus the chamber or sector it came from.
struct TropicalSample {
  std::vector<double> log_x;
  std::vector<std::uint32_t> sigma;  // chain A_k = {sigma[0], ..., sigma[k-1]}
  std::size_t sector = 0;
  double log_psi_tr = 0.0;
  double log_phi_tr = 0.0;

  explicit TropicalSample(std::size_t n = 0) : log_x(n, 0.0), sigma(n, 0) {}
};

}  // namespace troquad
