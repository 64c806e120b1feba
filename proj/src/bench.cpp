#include "troquad/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "troquad/errors.hpp"

namespace troquad {

namespace {

using Clock = std::chrono::steady_clock;

bool pairing_graph(int vertices, RandomStream& rng, std::vector<Edge>& edges) {
  std::vector<std::uint32_t> stubs;
  for (int v = 0; v < vertices; ++v) {
    for (int k = 0; k < 4; ++k) stubs.push_back(static_cast<std::uint32_t>(v));
  }
  for (std::size_t i = stubs.size(); i > 1; --i) {
    std::swap(stubs[i - 1], stubs[rng.below(i)]);
  }
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  edges.clear();
  for (std::size_t i = 0; i < stubs.size(); i += 2) {
    auto a = stubs[i], b = stubs[i + 1];
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) return false;
    edges.push_back({a, b});
  }
  return true;
}

}  // namespace

FeynmanGraph random_phi4_graph(int E, RandomStream& rng, int max_tries) {
  if (E < 6 || E % 2 != 0) throw Error("benchmark graphs need an even edge count >= 6");
  const int vertices = E / 2 + 2;
  std::vector<Edge> full;
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    if (!pairing_graph(vertices, rng, full)) continue;
    // Remove the last vertex and its four edges.
    const auto cut = static_cast<std::uint32_t>(vertices - 1);
    std::vector<Edge> edges;
    for (const auto& e : full) {
      if (e.u != cut && e.v != cut) edges.push_back(e);
    }
    try {
      FeynmanGraph g("phi4_E" + std::to_string(E), static_cast<std::size_t>(vertices - 1),
                     edges, {}, 4.0, {}, {});
      build_feynman_tables(g);
      return g;
    } catch (const DivergenceError&) {
      continue;
    } catch (const ParseError&) {
      continue;  // disconnected after removal
    }
  }
  throw Error("no convergent benchmark graph found with E = " + std::to_string(E));
}

double time_preprocess(const FeynmanGraph& g, double min_seconds, std::uint64_t max_bytes) {
  SubsetTableOptions opt;
  opt.max_bytes = max_bytes;
  int runs = 0;
  double total = 0.0;
  volatile double sink = 0.0;
  do {
    const auto t0 = Clock::now();
    const SubsetTable t = build_feynman_tables(g, opt);
    total += std::chrono::duration<double>(Clock::now() - t0).count();
    sink = t.log_I_tr();
    ++runs;
  } while (total < min_seconds);
  (void)sink;
  return total / runs;
}

nlohmann::json BenchRow::to_json() const {
  nlohmann::json j = {{"E", edges}, {"loops", loops}, {"skipped", skipped},
                      {"table_bytes", table_bytes}};
  if (!note.empty()) j["note"] = note;
  if (!skipped) {
    j["estimate"] = estimate;
    j["std_error"] = std_error;
    j["sigma_over_I"] = sigma_over_I;
    j["samples_per_second"] = samples_per_second;
    j["seconds_preprocess"] = seconds_preprocess;
    j["graph"] = graph;
  }
  return j;
}

BenchRow bench_row(int E, const BenchOptions& opt) {
  BenchRow row;
  row.edges = E;
  row.loops = E / 2;
  row.table_bytes = table_bytes(static_cast<std::size_t>(E));
  if (row.table_bytes > opt.max_bytes) {
    row.skipped = true;
    row.note = "table of " + std::to_string(row.table_bytes) +
               " bytes exceeds the memory cap";
    return row;
  }
  RandomStream rng(opt.seed, 1000 + static_cast<std::uint64_t>(E));
  const FeynmanGraph g = random_phi4_graph(E, rng);
  row.graph = g.to_json();
  row.seconds_preprocess = time_preprocess(g, opt.min_timing_seconds, opt.max_bytes);
  SubsetTableOptions topt;
  topt.max_bytes = opt.max_bytes;
  const SubsetTable t = build_feynman_tables(g, topt);
  EstimateOptions eo;
  eo.n_samples = opt.n_samples;
  eo.seed = opt.seed;
  eo.workers = opt.workers;
  eo.scale = std::exp(t.log_I_tr());
  const EstimateReport r = estimate(feynman_kernel(g, t), eo);
  row.estimate = r.estimate[0];
  row.std_error = r.std_error[0];
  row.sigma_over_I = sigma_over_I(r);
  row.samples_per_second = r.samples_per_second;
  return row;
}

std::vector<BenchRow> run_bench(const std::vector<int>& sizes, const BenchOptions& opt) {
  std::vector<BenchRow> rows;
  for (int E : sizes) rows.push_back(bench_row(E, opt));
  return rows;
}

}  // namespace troquad
