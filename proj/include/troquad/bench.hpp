#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "troquad/feynman.hpp"
#include "troquad/random.hpp"

namespace troquad {

/// Random 4-regular simple graph on E/2 + 2 vertices with one vertex
/// removed: E edges, E/2 loops, D = 4, unit weights, so omega = 0. Retries
/// until the subgraph table is convergent.
FeynmanGraph random_phi4_graph(int edges, RandomStream& rng, int max_tries = 100000);

struct BenchOptions {
  std::uint64_t n_samples = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::uint64_t max_bytes = std::uint64_t{8} << 30;
  /// Preprocessing is repeated until this much time has accumulated.
  double min_timing_seconds = 0.05;
};

struct BenchRow {
  int edges = 0;
  int loops = 0;
  bool skipped = false;
  std::string note;
  double estimate = 0.0;
  double std_error = 0.0;
  double sigma_over_I = 0.0;
  double samples_per_second = 0.0;
  double seconds_preprocess = 0.0;
  std::uint64_t table_bytes = 0;
  nlohmann::json graph;

  nlohmann::json to_json() const;
};

BenchRow bench_row(int edges, const BenchOptions& opt);
std::vector<BenchRow> run_bench(const std::vector<int>& sizes, const BenchOptions& opt);

/// Seconds per build_feynman_tables call, averaged over repeated runs.
double time_preprocess(const FeynmanGraph& g, double min_seconds,
                       std::uint64_t max_bytes = std::uint64_t{8} << 30);

}  // namespace troquad
