#include "troquad/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "troquad/bench.hpp"
#include "troquad/errors.hpp"
#include "troquad/euler_mellin.hpp"
#include "troquad/feynman.hpp"

namespace troquad {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kTableFormat = "TROPFEYN1";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path cache_dir() {
  if (const char* d = std::getenv("TROQUAD_CACHE_DIR"); d && *d) return d;
  if (const char* h = std::getenv("HOME"); h && *h) return fs::path(h) / ".cache" / "troquad";
  return {};
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

nlohmann::json subset_json(Subset a, std::size_t n) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (a >> i & 1) j.push_back(i);
  }
  return j;
}

struct Common {
  std::uint64_t n_samples = 1000000;
  std::uint64_t seed = 42;
  unsigned workers = 1;
  int eps_order = 0;
  std::string table;
  std::string max_mem = "8G";
  double reject_threshold = 1e-6;
  bool no_cache = false;
};

SubsetTableOptions table_options(const Common& c) {
  SubsetTableOptions o;
  o.max_bytes = parse_bytes(c.max_mem);
  return o;
}

void print_divergent(std::ostream& err, const DivergenceError& e, std::size_t n) {
  err << "error: " << e.what() << "\n";
  err << "divergent subgraphs (edge indices):\n";
  std::size_t shown = 0;
  for (Subset s : e.subsets()) {
    if (shown++ == 50) {
      err << "  ... " << e.subsets().size() - 50 << " more\n";
      break;
    }
    err << "  " << format_subset(s, n) << "\n";
  }
}

/// Loads a table from --table, the cache, or builds (and caches) it.
SubsetTable obtain_table(const std::string& graph_path, const FeynmanGraph& g,
                         const Common& c, std::ostream& err) {
  if (!c.table.empty()) {
    SubsetTable t = load_subset_table(c.table);
    if (t.n() != g.num_edges()) {
      throw ParseError(c.table + ": table has n = " + std::to_string(t.n()) +
                       " but the graph has " + std::to_string(g.num_edges()) + " edges");
    }
    return t;
  }
  fs::path file;
  if (!c.no_cache) {
    const fs::path dir = cache_dir();
    if (!dir.empty()) {
      const std::string key = read_file(graph_path) + '\0' + kTableFormat;
      file = dir / (hex64(fnv1a(key)) + ".tropfeyn");
      std::error_code ec;
      if (fs::exists(file, ec)) {
        try {
          SubsetTable t = load_subset_table(file.string());
          if (t.n() == g.num_edges()) return t;
        } catch (const Error&) {
        }
        err << "warning: ignoring unreadable cache entry " << file << "\n";
      }
    }
  }
  SubsetTable t = build_feynman_tables(g, table_options(c));
  if (!file.empty()) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    const fs::path tmp = file.string() + ".tmp";
    try {
      save_subset_table(tmp.string(), t);
      fs::rename(tmp, file, ec);
    } catch (const Error&) {
      err << "warning: could not write table cache in " << file.parent_path() << "\n";
    }
  }
  return t;
}

int cmd_check(const std::string& path, const Common& c, std::ostream& out,
              std::ostream& err) {
  const FeynmanGraph g = load_graph(path);
  const std::size_t E = g.num_edges();
  SubsetTable t = feynman_r_table(g, table_options(c));
  const Subset full = t.full();
  double min_r = std::numeric_limits<double>::infinity();
  Subset argmin = 0;
  std::uint64_t mm = 0;
  std::vector<Subset> bad;
  for (Subset s = 1; s < full; ++s) {
    if (t[s].flags & kMassMomentumSpanning) ++mm;
    if (t[s].r < min_r) {
      min_r = t[s].r;
      argmin = s;
    }
  }
  const auto warnings = exceptional_momentum_warnings(g);
  nlohmann::json j = {{"name", g.name()},
                      {"num_vertices", g.num_vertices()},
                      {"num_edges", E},
                      {"loops", g.loops()},
                      {"omega", g.omega()},
                      {"min_r", E > 1 ? nlohmann::json(min_r) : nlohmann::json(nullptr)},
                      {"argmin_subgraph", subset_json(argmin, E)},
                      {"mass_momentum_spanning_proper", mm},
                      {"warnings", warnings}};
  err << "graph " << (g.name().empty() ? path : g.name()) << ": V = " << g.num_vertices()
      << ", E = " << E << ", loops = " << g.loops() << ", D = " << g.D() << "\n";
  err << "omega = " << g.omega() << "\n";
  if (E > 1) {
    err << "min r over non-empty proper subgraphs = " << min_r << " at "
        << format_subset(argmin, E) << "\n";
  }
  err << "mass-momentum-spanning proper subgraphs: " << mm << " of " << (full - 1) << "\n";
  err << "note: convergence is required on every proper subgraph, not only motic ones\n";
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  try {
    fill_log_j(t, table_options(c));
  } catch (const DivergenceError& e) {
    j["convergent"] = false;
    nlohmann::json subs = nlohmann::json::array();
    for (Subset s : e.subsets()) subs.push_back(subset_json(s, E));
    j["divergent_subgraphs"] = subs;
    out << j.dump() << "\n";
    print_divergent(err, e, E);
    return kExitDivergent;
  }
  j["convergent"] = true;
  j["I_tr"] = std::exp(t.log_I_tr());
  err << "convergent; I_tr = " << std::exp(t.log_I_tr()) << "\n";
  out << j.dump() << "\n";
  return kExitOk;
}

int cmd_preprocess(const std::string& path, const std::string& output, const Common& c,
                   std::ostream& out, std::ostream& err) {
  const FeynmanGraph g = load_graph(path);
  err << "table: 2^" << g.num_edges() << " records, " << table_bytes(g.num_edges())
      << " bytes\n";
  const auto t0 = Clock::now();
  const SubsetTable t = build_feynman_tables(g, table_options(c));
  const double secs = seconds_since(t0);
  save_subset_table(output, t);
  out << nlohmann::json{{"table", output},
                        {"n", t.n()},
                        {"bytes", t.bytes()},
                        {"I_tr", std::exp(t.log_I_tr())},
                        {"log_I_tr", t.log_I_tr()},
                        {"seconds_preprocess", secs}}
             .dump()
      << "\n";
  return kExitOk;
}

int cmd_hepp(const std::string& path, const Common& c, std::ostream& out, std::ostream& err) {
  const FeynmanGraph g = load_graph(path);
  const SubsetTable t = obtain_table(path, g, c, err);
  err << "I_tr = " << std::setprecision(17) << std::exp(t.log_I_tr())
      << ", log I_tr = " << t.log_I_tr() << "\n";
  out << nlohmann::json{{"I_tr", std::exp(t.log_I_tr())}, {"log_I_tr", t.log_I_tr()}}.dump()
      << "\n";
  return kExitOk;
}

int cmd_integrate(const std::string& path, const Common& c, std::ostream& out,
                  std::ostream& err) {
  const FeynmanGraph g = load_graph(path);
  for (const auto& w : exceptional_momentum_warnings(g)) err << "warning: " << w << "\n";
  const auto t0 = Clock::now();
  const SubsetTable t = obtain_table(path, g, c, err);
  const double prep = seconds_since(t0);
  EstimateOptions eo;
  eo.n_samples = c.n_samples;
  eo.seed = c.seed;
  eo.workers = c.workers;
  eo.reject_threshold = c.reject_threshold;
  eo.scale = std::exp(t.log_I_tr());
  eo.orders = static_cast<std::size_t>(c.eps_order) + 1;
  EstimateReport r = estimate(feynman_kernel(g, t, c.eps_order), eo);
  r.seconds_preprocess = prep;
  err << "estimate = " << std::setprecision(10) << r.estimate[0] << " +- " << r.std_error[0]
      << " (" << r.n_samples << " samples, " << r.n_rejected << " rejected)\n";
  out << r.to_json().dump() << "\n";
  return kExitOk;
}

int cmd_sample(const std::string& path, const Common& c, std::ostream& out,
               std::ostream& err) {
  const FeynmanGraph g = load_graph(path);
  const SubsetTable t = obtain_table(path, g, c, err);
  RandomStream rng(c.seed, 0);
  TropicalSample s(t.n());
  for (std::uint64_t i = 0; i < c.n_samples; ++i) {
    sample_gp(t, rng, s);
    const auto [psi, phi] = feynman_trop_values(t, s);
    out << nlohmann::json{{"log_x", s.log_x},
                          {"sigma", s.sigma},
                          {"log_psi_tr", psi},
                          {"log_phi_tr", phi}}
               .dump()
        << "\n";
  }
  return kExitOk;
}

int cmd_euler_mellin(const std::vector<std::string>& num, const std::vector<std::string>& den,
                     const std::vector<std::string>& powers, const std::string& sectors,
                     const std::string& write_sectors, const Common& c, std::ostream& out,
                     std::ostream& err) {
  EulerMellinProblem p;
  if (powers.size() != num.size() + den.size()) {
    throw ParseError("--powers needs " + std::to_string(num.size() + den.size()) +
                     " entries (numerators first, then denominators)");
  }
  for (std::size_t i = 0; i < num.size(); ++i) {
    p.numerators.push_back(load_polynomial(num[i]));
    p.numerator_powers.push_back(parse_power(powers[i]));
  }
  for (std::size_t j = 0; j < den.size(); ++j) {
    p.denominators.push_back(load_polynomial(den[j]));
    p.denominator_powers.push_back(parse_power(powers[num.size() + j]));
  }
  p.validate();
  const auto t0 = Clock::now();
  SectorTable table;
  if (sectors == "auto") {
    const auto [a, b] = euler_mellin_point_sets(p);
    table = build_refined_fan(a, b);
  } else {
    table = load_sector_table(sectors);
  }
  const double prep = seconds_since(t0);
  if (!write_sectors.empty()) {
    std::ofstream f(write_sectors);
    if (!f) throw Error("cannot write " + write_sectors);
    write_sector_table(f, table);
  }
  err << table.sectors().size() << " sectors, I_tr = " << table.total() << "\n";
  EstimateOptions eo;
  eo.n_samples = c.n_samples;
  eo.seed = c.seed;
  eo.workers = c.workers;
  eo.reject_threshold = c.reject_threshold;
  eo.scale = table.total();
  eo.orders = 2;
  EstimateReport r = estimate(euler_mellin_kernel(p, table), eo);
  r.seconds_preprocess = prep;
  nlohmann::json j = r.to_json();
  j["n_sectors"] = table.sectors().size();
  err << "estimate = " << std::setprecision(10) << r.estimate[0]
      << (std::signbit(r.estimate[1]) ? " - " : " + ") << std::abs(r.estimate[1]) << "i +- (" << r.std_error[0] << ", " << r.std_error[1] << ")\n";
  out << j.dump() << "\n";
  return kExitOk;
}

int cmd_bench(const std::vector<int>& sizes, const Common& c, std::ostream& out,
              std::ostream& err) {
  BenchOptions bo;
  bo.n_samples = c.n_samples;
  bo.seed = c.seed;
  bo.workers = c.workers;
  bo.max_bytes = parse_bytes(c.max_mem);
  err << "trend comparison only: graphs are random phi^4-like graphs, hardware differs\n";
  err << std::setw(4) << "E" << std::setw(7) << "loops" << std::setw(12) << "sigma_I/I"
      << std::setw(14) << "samples/s" << std::setw(14) << "preproc[s]" << std::setw(14)
      << "table bytes" << "\n";
  nlohmann::json rows = nlohmann::json::array();
  for (int E : sizes) {
    const BenchRow row = bench_row(E, bo);
    rows.push_back(row.to_json());
    err << std::setw(4) << row.edges << std::setw(7) << row.loops;
    if (row.skipped) {
      err << "  skipped: " << row.note << "\n";
      continue;
    }
    err << std::setw(12) << std::setprecision(3) << row.sigma_over_I << std::setw(14)
        << std::setprecision(3) << row.samples_per_second << std::setw(14)
        << std::setprecision(3) << row.seconds_preprocess << std::setw(14) << row.table_bytes
        << "\n";
  }
  out << nlohmann::json{{"label", "trend comparison only"}, {"rows", rows}}.dump() << "\n";
  return kExitOk;
}

void add_sampling_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("-n,--samples", c.n_samples, "Number of samples")
      ->check(CLI::Range(std::uint64_t{2}, std::numeric_limits<std::uint64_t>::max()));
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::Range(1u, 4096u));
  cmd->add_option("--reject-threshold", c.reject_threshold,
                  "Abort when the rejected fraction exceeds this");
}

void add_table_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--table", c.table, "Precomputed subset table file");
  cmd->add_option("--max-mem", c.max_mem, "Memory cap for the subset table (e.g. 512M, 8G)");
  cmd->add_flag("--no-cache", c.no_cache, "Do not read or write the table cache");
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t parse_bytes(const std::string& text) {
  if (text.empty()) throw ParseError("empty memory size");
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::logic_error&) {
    throw ParseError("invalid memory size '" + text + "'");
  }
  double mult = 1.0;
  const std::string suffix = text.substr(pos);
  if (suffix == "K" || suffix == "k") mult = 1024.0;
  else if (suffix == "M" || suffix == "m") mult = 1024.0 * 1024.0;
  else if (suffix == "G" || suffix == "g") mult = 1024.0 * 1024.0 * 1024.0;
  else if (!suffix.empty()) throw ParseError("invalid memory size '" + text + "'");
  if (!(v >= 0.0)) throw ParseError("invalid memory size '" + text + "'");
  return static_cast<std::uint64_t>(v * mult);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tropical Monte Carlo quadrature for Feynman and Euler-Mellin integrals",
               "troquad"};
  app.require_subcommand(1);
  Common c;
  std::string graph;
  std::string output;

  auto* check = app.add_subcommand("check", "Validate a graph and report convergence");
  check->add_option("graph", graph, "Graph JSON file")->required();
  check->add_option("--max-mem", c.max_mem, "Memory cap for the subset table");

  auto* pre = app.add_subcommand("preprocess", "Build and save the subset table");
  pre->add_option("graph", graph, "Graph JSON file")->required();
  pre->add_option("-o,--output", output, "Output table file")->required();
  pre->add_option("--max-mem", c.max_mem, "Memory cap for the subset table");

  auto* hepp = app.add_subcommand("hepp", "Print the tropical normalization I_tr");
  hepp->add_option("graph", graph, "Graph JSON file")->required();
  add_table_flags(hepp, c);

  auto* integ = app.add_subcommand("integrate", "Estimate the Feynman integral");
  integ->add_option("graph", graph, "Graph JSON file")->required();
  add_sampling_flags(integ, c);
  add_table_flags(integ, c);
  integ->add_option("--eps-order", c.eps_order, "Highest order of the D = D0 - 2 eps expansion")
      ->check(CLI::Range(0, 32));

  auto* samp = app.add_subcommand("sample", "Print tropical samples as JSON lines");
  samp->add_option("graph", graph, "Graph JSON file")->required();
  samp->add_option("-n,--samples", c.n_samples, "Number of samples");
  samp->add_option("--seed", c.seed, "Random seed");
  add_table_flags(samp, c);

  std::vector<std::string> num, den, powers;
  std::string sectors = "auto", write_sectors;
  auto* em = app.add_subcommand("euler-mellin", "Estimate a projective Euler-Mellin integral");
  em->add_option("--poly-num", num, "Numerator polynomial files");
  em->add_option("--poly-den", den, "Denominator polynomial files")->required();
  em->add_option("--powers", powers, "Powers (re or re:im), numerators first")
      ->required()
      ->delimiter(',');
  em->add_option("--sectors", sectors, "Sector table file, or 'auto'");
  em->add_option("--write-sectors", write_sectors, "Write the sector table used");
  add_sampling_flags(em, c);

  std::vector<int> sizes{6, 8, 10, 12};
  auto* bench = app.add_subcommand("bench", "Benchmark random phi^4-like graphs");
  bench->add_option("--sizes", sizes, "Edge counts")->delimiter(',');
  bench->add_option("-n,--samples", c.n_samples, "Samples per graph");
  bench->add_option("--seed", c.seed, "Random seed");
  bench->add_option("--workers", c.workers, "Worker threads");
  bench->add_option("--max-mem", c.max_mem, "Memory cap for subset tables");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*check) return cmd_check(graph, c, out, err);
    if (*pre) return cmd_preprocess(graph, output, c, out, err);
    if (*hepp) return cmd_hepp(graph, c, out, err);
    if (*integ) return cmd_integrate(graph, c, out, err);
    if (*samp) return cmd_sample(graph, c, out, err);
    if (*em) return cmd_euler_mellin(num, den, powers, sectors, write_sectors, c, out, err);
    if (*bench) {
      if (c.n_samples < 2) c.n_samples = 2;
      if (c.n_samples == 1000000) c.n_samples = 100000;
      return cmd_bench(sizes, c, out, err);
    }
  } catch (const DivergenceError& e) {
    print_divergent(err, e, 64);
    return kExitDivergent;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergent;
  } catch (const RejectionBudgetError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRejection;
  } catch (const MemoryCapError& e) {
    err << "error: " << e.what() << "\n";
    return kExitMemory;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitInvalid;
}

}  // namespace troquad
