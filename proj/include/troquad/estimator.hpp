#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "troquad/random.hpp"

namespace troquad {

/// Streaming mean and central moment sums up to order four for a vector of
/// orders, with the pairwise merge of Chan, Golub and LeVeque (extended to
/// higher moments by Pebay).
class EstimatorState {
 public:
  explicit EstimatorState(std::size_t orders = 1, double scale = 1.0);

  void add(std::span<const double> values);
  void add(double value) { add(std::span<const double>(&value, 1)); }
  void reject() { ++rejected_; }

  /// Throws on mismatched order count or scale.
  void merge(const EstimatorState& other);

  std::uint64_t count() const { return count_; }
  std::uint64_t rejected() const { return rejected_; }
  std::size_t orders() const { return mean_.size(); }
  double scale() const { return scale_; }
  double mean(std::size_t k = 0) const { return mean_[k]; }
  double m2(std::size_t k = 0) const { return m2_[k]; }
  double m3(std::size_t k = 0) const { return m3_[k]; }
  double m4(std::size_t k = 0) const { return m4_[k]; }

  double estimate(std::size_t k = 0) const { return scale_ * mean_[k]; }
  /// NaN when fewer than two samples were accepted.
  double std_error(std::size_t k = 0) const;
  /// N * M4 / M2^2; NaN without spread. Large values warn that the standard
  /// error itself is poorly estimated.
  double kurtosis(std::size_t k = 0) const;

 private:
  std::uint64_t count_ = 0;
  std::uint64_t rejected_ = 0;
  double scale_;
  std::vector<double> mean_;
  std::vector<double> m2_;
  std::vector<double> m3_;
  std::vector<double> m4_;
};

EstimatorState merge(EstimatorState a, const EstimatorState& b);

struct EstimateReport {
  double I_tr = 0.0;
  std::vector<double> estimate;
  std::vector<double> std_error;
  std::vector<double> kurtosis;
  std::uint64_t n_samples = 0;
  std::uint64_t n_rejected = 0;
  double seconds_preprocess = 0.0;
  double seconds_sampling = 0.0;
  double samples_per_second = 0.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  static EstimateReport from_state(const EstimatorState& s);
  nlohmann::json to_json() const;
};

/// std_error * sqrt(N) / |estimate| for order 0; NaN when the estimate is
/// zero or the standard error is undefined.
double sigma_over_I(const EstimateReport& r);

/// Draws one sample and writes the integrand values for every order into
/// `out`. Returns false when the sample is rejected.
using Kernel = std::function<bool(RandomStream&, std::span<double>)>;
/// Builds a kernel owning its own scratch space; called once per worker.
using KernelFactory = std::function<Kernel()>;

struct EstimateOptions {
  std::uint64_t n_samples = 1000000;
  std::uint64_t seed = 42;
  unsigned workers = 1;
  double reject_threshold = 1e-6;
  double scale = 1.0;
  std::size_t orders = 1;
};

/// Runs `n_samples` attempts split over workers; worker w draws from
/// RandomStream(seed, w) and the states are merged in worker order, so the
/// result depends only on (seed, workers).
EstimateReport estimate(const KernelFactory& factory, const EstimateOptions& opt);

/// Same split and merge, returning the merged state.
EstimatorState run_workers(const KernelFactory& factory, const EstimateOptions& opt);

}  // namespace troquad
