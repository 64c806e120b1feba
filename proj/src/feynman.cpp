#include "troquad/feynman.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "troquad/cones.hpp"
#include "troquad/errors.hpp"

namespace troquad {

namespace {

constexpr double kLogLimit = 700.0;
constexpr std::size_t kMaxReferenceEdges = 14;

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

bool nonzero(const std::vector<double>& p) {
  return std::any_of(p.begin(), p.end(), [](double v) { return v != 0.0; });
}

double norm2(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return s;
}

bool is_nonzero_omega(double omega) { return std::abs(omega) > 1e-12; }

ParseError field_error(const std::string& field, const std::string& msg) {
  return ParseError(field + ": " + msg);
}

double as_number(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number()) throw field_error(field, "expected a number");
  return j.get<double>();
}

std::vector<double> number_list(const nlohmann::json& j, const std::string& field,
                                std::size_t expected) {
  if (!j.is_array()) throw field_error(field, "expected an array");
  if (j.size() != expected) {
    throw field_error(field, "expected " + std::to_string(expected) +
                                 " entries, found " + std::to_string(j.size()));
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// Squared threshold below which a momentum sum counts as zero.
double momentum_tolerance(const std::vector<std::vector<double>>& momenta) {
  double scale = 0.0;
  for (const auto& p : momenta) scale += norm2(p);
  return 1e-18 * (1.0 + scale);
}

}  // namespace

FeynmanGraph::FeynmanGraph(std::string name, std::size_t num_vertices,
                           std::vector<Edge> edges, std::vector<double> nu, double D,
                           std::vector<double> masses_sq,
                           std::vector<std::vector<double>> momenta)
    : name_(std::move(name)),
      V_(num_vertices),
      edges_(std::move(edges)),
      nu_(std::move(nu)),
      D_(D),
      masses_sq_(std::move(masses_sq)),
      momenta_(std::move(momenta)) {
  if (V_ == 0) throw field_error("num_vertices", "must be positive");
  if (edges_.empty()) throw field_error("edges", "graph has no edges");
  if (edges_.size() > 64) throw field_error("edges", "at most 64 edges supported");
  const std::size_t E = edges_.size();
  for (std::size_t i = 0; i < E; ++i) {
    const auto& e = edges_[i];
    const std::string f = "edges[" + std::to_string(i) + "]";
    if (e.u >= V_ || e.v >= V_) {
      throw field_error(f, "vertex out of range (num_vertices = " +
                               std::to_string(V_) + ")");
    }
    if (e.u == e.v) throw field_error(f, "self-loop not allowed");
  }
  if (nu_.empty()) nu_.assign(E, 1.0);
  if (nu_.size() != E) {
    throw field_error("nu", "expected " + std::to_string(E) + " entries");
  }
  for (std::size_t i = 0; i < E; ++i) {
    if (!(nu_[i] > 0.0) || !std::isfinite(nu_[i])) {
      throw field_error("nu[" + std::to_string(i) + "]", "must be positive");
    }
  }
  if (!(D_ > 0.0) || !std::isfinite(D_)) throw field_error("D", "must be positive");
  if (masses_sq_.empty()) masses_sq_.assign(E, 0.0);
  if (masses_sq_.size() != E) {
    throw field_error("masses_sq", "expected " + std::to_string(E) + " entries");
  }
  for (std::size_t i = 0; i < E; ++i) {
    if (!(masses_sq_[i] >= 0.0) || !std::isfinite(masses_sq_[i])) {
      throw field_error("masses_sq[" + std::to_string(i) + "]",
                        "must be finite and non-negative");
    }
  }
  if (momenta_.empty()) momenta_.assign(V_, {});
  if (momenta_.size() != V_) {
    throw field_error("momenta", "expected " + std::to_string(V_) + " vertex entries");
  }
  kdim_ = momenta_.front().size();
  for (std::size_t v = 0; v < V_; ++v) {
    if (momenta_[v].size() != kdim_) {
      throw field_error("momenta[" + std::to_string(v) + "]",
                        "expected " + std::to_string(kdim_) + " components");
    }
    for (double c : momenta_[v]) {
      if (!std::isfinite(c)) {
        throw field_error("momenta[" + std::to_string(v) + "]", "non-finite component");
      }
    }
  }
  for (std::size_t c = 0; c < kdim_; ++c) {
    double s = 0.0;
    for (std::size_t v = 0; v < V_; ++v) s += momenta_[v][c];
    if (std::abs(s) > 1e-10) {
      std::ostringstream os;
      os << "momentum not conserved: component " << c << " sums to " << s;
      throw field_error("momenta", os.str());
    }
  }
  UnionFind uf(V_);
  std::size_t comps = V_;
  for (const auto& e : edges_) {
    if (uf.unite(e.u, e.v)) --comps;
  }
  if (comps != 1) throw ParseError("graph not connected");
}

FeynmanGraph FeynmanGraph::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("graph file must contain a JSON object");
  std::string name;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw field_error("name", "expected a string");
    name = j["name"].get<std::string>();
  }
  if (!j.contains("num_vertices")) throw field_error("num_vertices", "missing");
  if (!j["num_vertices"].is_number_integer() || j["num_vertices"].get<long long>() <= 0) {
    throw field_error("num_vertices", "expected a positive integer");
  }
  const auto V = static_cast<std::size_t>(j["num_vertices"].get<long long>());
  if (!j.contains("edges")) throw field_error("edges", "missing");
  if (!j["edges"].is_array()) throw field_error("edges", "expected an array");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < j["edges"].size(); ++i) {
    const auto& e = j["edges"][i];
    const std::string f = "edges[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw field_error(f, "expected a pair of vertex indices");
    }
    const long long a = e[0].get<long long>();
    const long long b = e[1].get<long long>();
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= V ||
        static_cast<std::size_t>(b) >= V) {
      throw field_error(f, "vertex out of range (num_vertices = " + std::to_string(V) + ")");
    }
    edges.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
  }
  const std::size_t E = edges.size();
  std::vector<double> nu;
  if (j.contains("nu")) nu = number_list(j["nu"], "nu", E);
  if (!j.contains("D")) throw field_error("D", "missing");
  const double D = as_number(j["D"], "D");
  std::vector<double> masses;
  if (j.contains("masses_sq")) masses = number_list(j["masses_sq"], "masses_sq", E);

  std::size_t kdim = 0;
  bool kdim_given = false;
  if (j.contains("kinematic_dim")) {
    if (!j["kinematic_dim"].is_number_integer() || j["kinematic_dim"].get<long long>() < 0) {
      throw field_error("kinematic_dim", "expected a non-negative integer");
    }
    kdim = static_cast<std::size_t>(j["kinematic_dim"].get<long long>());
    kdim_given = true;
  }
  std::vector<std::vector<double>> momenta;
  if (j.contains("momenta")) {
    const auto& m = j["momenta"];
    if (!m.is_array()) throw field_error("momenta", "expected an array");
    if (m.size() != V) {
      throw field_error("momenta", "expected " + std::to_string(V) + " vertex entries");
    }
    if (!kdim_given && V > 0) {
      if (!m[0].is_array()) throw field_error("momenta[0]", "expected an array");
      kdim = m[0].size();
    }
    for (std::size_t v = 0; v < V; ++v) {
      momenta.push_back(number_list(m[v], "momenta[" + std::to_string(v) + "]", kdim));
    }
  } else {
    momenta.assign(V, std::vector<double>(kdim, 0.0));
  }
  return FeynmanGraph(name, V, std::move(edges), std::move(nu), D, std::move(masses),
                      std::move(momenta));
}

nlohmann::json FeynmanGraph::to_json() const {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : edges_) edges.push_back({e.u, e.v});
  return {{"name", name_},       {"num_vertices", V_},    {"edges", edges},
          {"nu", nu_},           {"D", D_},               {"masses_sq", masses_sq_},
          {"momenta", momenta_}, {"kinematic_dim", kdim_}};
}

FeynmanGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": invalid JSON: " + e.what());
  }
  try {
    return FeynmanGraph::from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

double FeynmanGraph::omega() const {
  double s = 0.0;
  for (double v : nu_) s += v;
  return s - loops() * D_ / 2.0;
}

bool FeynmanGraph::has_masses() const {
  return std::any_of(masses_sq_.begin(), masses_sq_.end(),
                     [](double m) { return m > 0.0; });
}

bool FeynmanGraph::has_momenta() const {
  return std::any_of(momenta_.begin(), momenta_.end(), nonzero);
}

std::uint64_t FeynmanGraph::massive_mask() const {
  std::uint64_t m = 0;
  for (std::size_t e = 0; e < masses_sq_.size(); ++e) {
    if (masses_sq_[e] > 0.0) m |= std::uint64_t{1} << e;
  }
  return m;
}

std::vector<std::uint32_t> FeynmanGraph::momentum_vertices() const {
  std::vector<std::uint32_t> out;
  for (std::size_t v = 0; v < V_; ++v) {
    if (nonzero(momenta_[v])) out.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

SymanzikEvaluator::SymanzikEvaluator(const FeynmanGraph& g) : g_(&g) {
  const std::size_t V = g.num_vertices();
  m_ = V - 1;
  // Grounding the vertex with the largest momentum keeps the momentum
  // elimination free of cancellations for two-point kinematics.
  std::size_t ground = V - 1;
  double best = 0.0;
  for (std::size_t v = 0; v < V; ++v) {
    const double n2 = norm2(g.momenta()[v]);
    if (n2 > best) {
      best = n2;
      ground = v;
    }
  }
  pos_.resize(V);
  std::uint32_t next = 0;
  for (std::size_t v = 0; v < V; ++v) {
    pos_[v] = v == ground ? static_cast<std::uint32_t>(m_) : next++;
  }
  cond_.resize(m_ * m_);
  ground_.resize(m_);
  q_.resize(m_ * g.kinematic_dim());
}

SymanzikValue SymanzikEvaluator::evaluate(std::span<const double> y, bool need_phi) {
  const FeynmanGraph& g = *g_;
  const std::size_t m = m_;
  const std::size_t kd = g.kinematic_dim();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double sum_y = 0.0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (!(std::abs(y[e]) <= kLogLimit)) return {0.0, kNegInf, false};
    sum_y += y[e];
  }
  std::fill(cond_.begin(), cond_.end(), 0.0);
  std::fill(ground_.begin(), ground_.end(), 0.0);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const double c = std::exp(-y[e]);
    const std::uint32_t a = pos_[g.edges()[e].u];
    const std::uint32_t b = pos_[g.edges()[e].v];
    if (a == m) {
      ground_[b] += c;
    } else if (b == m) {
      ground_[a] += c;
    } else {
      cond_[a * m + b] += c;
      cond_[b * m + a] += c;
    }
  }
  const bool kin = need_phi && kd > 0;
  if (kin) {
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      const std::uint32_t r = pos_[v];
      if (r == m) continue;
      for (std::size_t c = 0; c < kd; ++c) q_[r * kd + c] = g.momenta()[v][c];
    }
  }

  double logdet = 0.0;
  double trace = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double* row = &cond_[k * m];
    double d = ground_[k];
    for (std::size_t j = k + 1; j < m; ++j) d += row[j];
    if (!(d > 0.0) || !std::isfinite(d)) return {0.0, kNegInf, false};
    logdet += std::log(d);
    if (kin) {
      for (std::size_t c = 0; c < kd; ++c) trace += q_[k * kd + c] * q_[k * kd + c] / d;
    }
    for (std::size_t i = k + 1; i < m; ++i) {
      const double mik = cond_[i * m + k];
      if (mik == 0.0) continue;
      const double f = mik / d;  // <= 1
      double* ri = &cond_[i * m];
      for (std::size_t j = k + 1; j < m; ++j) {
        if (j != i) ri[j] += f * row[j];
      }
      ground_[i] += f * ground_[k];
      if (kin) {
        for (std::size_t c = 0; c < kd; ++c) q_[i * kd + c] += f * q_[k * kd + c];
      }
    }
  }
  SymanzikValue out{sum_y + logdet, kNegInf, true};
  if (need_phi) {
    double mass = 0.0;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      if (g.masses_sq()[e] > 0.0) mass += std::exp(y[e]) * g.masses_sq()[e];
    }
    const double total = trace + mass;
    if (total > 0.0) out.log_phi = out.log_psi + std::log(total);
  }
  if (!std::isfinite(out.log_psi)) out.ok = false;
  return out;
}

SymanzikValue psi_phi_eval(const FeynmanGraph& g, std::span<const double> y) {
  SymanzikEvaluator ev(g);
  return ev.evaluate(y, true);
}

namespace {

// Calls f(subset, component root of vertex 0 per vertex) for every spanning
// tree (kind 1) or spanning 2-forest (kind 2) of the multigraph.
template <typename F>
void for_each_forest(std::size_t V, const std::vector<Edge>& edges, int components,
                     F&& f) {
  const std::size_t E = edges.size();
  if (V < static_cast<std::size_t>(components)) return;
  const std::size_t size = V - static_cast<std::size_t>(components);
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << E); ++s) {
    if (static_cast<std::size_t>(std::popcount(s)) != size) continue;
    UnionFind uf(V);
    bool acyclic = true;
    for (std::uint64_t rest = s; rest && acyclic; rest &= rest - 1) {
      const auto e = static_cast<std::size_t>(std::countr_zero(rest));
      acyclic = uf.unite(edges[e].u, edges[e].v);
    }
    if (acyclic) f(s, uf);
  }
}

std::vector<double> side_momentum(std::size_t V, UnionFind& uf,
                                  const std::vector<std::vector<double>>& momenta) {
  const std::uint32_t root = uf.find(0);
  const std::size_t kd = momenta.empty() ? 0 : momenta.front().size();
  std::vector<double> p(kd, 0.0);
  for (std::uint32_t v = 0; v < V; ++v) {
    if (uf.find(v) != root) continue;
    for (std::size_t c = 0; c < kd; ++c) p[c] += momenta[v][c];
  }
  return p;
}

}  // namespace

ForestSums forest_sums(std::size_t V, const std::vector<Edge>& edges,
                       const std::vector<std::vector<double>>& momenta,
                       const std::vector<double>& masses_sq,
                       std::span<const double> x) {
  if (edges.size() > 20) throw Error("forest enumeration limited to 20 edges");
  const std::size_t E = edges.size();
  auto complement_product = [&](std::uint64_t s) {
    long double prod = 1.0L;
    for (std::size_t e = 0; e < E; ++e) {
      if (!(s >> e & 1)) prod *= x[e];
    }
    return prod;
  };
  ForestSums out{0.0L, 0.0L, 0.0L};
  for_each_forest(V, edges, 1, [&](std::uint64_t s, UnionFind&) {
    out.psi += complement_product(s);
  });
  const double tol = momentum_tolerance(momenta);
  for_each_forest(V, edges, 2, [&](std::uint64_t s, UnionFind& uf) {
    const double p2 = norm2(side_momentum(V, uf, momenta));
    if (p2 > tol) out.phi_kin += p2 * complement_product(s);
  });
  long double mass = 0.0L;
  for (std::size_t e = 0; e < E; ++e) mass += static_cast<long double>(x[e]) * masses_sq[e];
  out.phi_mass = out.psi * mass;
  return out;
}

SymanzikValue psi_phi_reference(const FeynmanGraph& g, std::span<const double> x) {
  if (g.num_edges() > kMaxReferenceEdges) {
    throw Error("reference enumeration refused: E = " + std::to_string(g.num_edges()) +
                " > " + std::to_string(kMaxReferenceEdges));
  }
  const ForestSums s = forest_sums(g.num_vertices(), g.edges(), g.momenta(),
                                   g.masses_sq(), x);
  const long double phi = s.phi_kin + s.phi_mass;
  return {static_cast<double>(std::log(s.psi)),
          phi > 0.0L ? static_cast<double>(std::log(phi))
                     : -std::numeric_limits<double>::infinity(),
          true};
}

SparsePolynomial psi_polynomial(const FeynmanGraph& g) {
  if (g.num_edges() > kMaxReferenceEdges) throw Error("psi expansion limited to E <= 14");
  const std::size_t E = g.num_edges();
  std::vector<SparsePolynomial::Term> terms;
  for_each_forest(g.num_vertices(), g.edges(), 1, [&](std::uint64_t s, UnionFind&) {
    std::vector<int> exp(E);
    for (std::size_t e = 0; e < E; ++e) exp[e] = (s >> e & 1) ? 0 : 1;
    terms.push_back({std::move(exp), Complex(1.0, 0.0)});
  });
  return SparsePolynomial(E, std::move(terms));
}

SparsePolynomial phi_polynomial(const FeynmanGraph& g) {
  if (g.num_edges() > kMaxReferenceEdges) throw Error("phi expansion limited to E <= 14");
  const std::size_t E = g.num_edges();
  const std::size_t V = g.num_vertices();
  std::vector<SparsePolynomial::Term> terms;
  const double tol = momentum_tolerance(g.momenta());
  for_each_forest(V, g.edges(), 2, [&](std::uint64_t s, UnionFind& uf) {
    const double p2 = norm2(side_momentum(V, uf, g.momenta()));
    if (p2 <= tol) return;
    std::vector<int> exp(E);
    for (std::size_t e = 0; e < E; ++e) exp[e] = (s >> e & 1) ? 0 : 1;
    terms.push_back({std::move(exp), Complex(p2, 0.0)});
  });
  for_each_forest(V, g.edges(), 1, [&](std::uint64_t s, UnionFind&) {
    for (std::size_t m = 0; m < E; ++m) {
      if (!(g.masses_sq()[m] > 0.0)) continue;
      std::vector<int> exp(E);
      for (std::size_t e = 0; e < E; ++e) exp[e] = (s >> e & 1) ? 0 : 1;
      exp[m] += 1;
      terms.push_back({std::move(exp), Complex(g.masses_sq()[m], 0.0)});
    }
  });
  return SparsePolynomial(E, std::move(terms));
}

bool contracted_phi_vanishes(const FeynmanGraph& g, std::uint64_t gamma) {
  const std::size_t V = g.num_vertices();
  UnionFind uf(V);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (gamma >> e & 1) uf.unite(g.edges()[e].u, g.edges()[e].v);
  }
  std::map<std::uint32_t, std::uint32_t> id;
  for (std::uint32_t v = 0; v < V; ++v) id.emplace(uf.find(v), static_cast<std::uint32_t>(id.size()));
  const std::size_t W = id.size();
  std::vector<std::vector<double>> momenta(W, std::vector<double>(g.kinematic_dim(), 0.0));
  for (std::uint32_t v = 0; v < V; ++v) {
    auto& p = momenta[id[uf.find(v)]];
    for (std::size_t c = 0; c < g.kinematic_dim(); ++c) p[c] += g.momenta()[v][c];
  }
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (gamma >> e & 1) continue;
    if (g.masses_sq()[e] > 0.0) return false;  // Psi of G/gamma never vanishes
    edges.push_back({id[uf.find(g.edges()[e].u)], id[uf.find(g.edges()[e].v)]});
  }
  const double tol = momentum_tolerance(g.momenta());
  bool vanishes = true;
  for_each_forest(W, edges, 2, [&](std::uint64_t, UnionFind& f) {
    if (norm2(side_momentum(W, f, momenta)) > tol) vanishes = false;
  });
  return vanishes;
}

bool is_mass_momentum_spanning(const FeynmanGraph& g, std::uint64_t gamma) {
  if ((g.massive_mask() & ~gamma) != 0) return false;
  const auto mv = g.momentum_vertices();
  if (mv.size() <= 1) return true;
  UnionFind uf(g.num_vertices());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (gamma >> e & 1) uf.unite(g.edges()[e].u, g.edges()[e].v);
  }
  const std::uint32_t root = uf.find(mv.front());
  return std::all_of(mv.begin(), mv.end(),
                     [&](std::uint32_t v) { return uf.find(v) == root; });
}

int subgraph_loops(const FeynmanGraph& g, std::uint64_t gamma) {
  UnionFind uf(g.num_vertices());
  int loops = 0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if ((gamma >> e & 1) && !uf.unite(g.edges()[e].u, g.edges()[e].v)) ++loops;
  }
  return loops;
}

SubsetTable feynman_r_table(const FeynmanGraph& g, const SubsetTableOptions& opt) {
  const std::size_t E = g.num_edges();
  if (E > 32) throw MemoryCapError("subset tables limited to E <= 32", 0);
  const std::uint64_t need = table_bytes(E);
  if (need > opt.max_bytes) {
    throw MemoryCapError("subset table needs " + std::to_string(need) +
                             " bytes (2^" + std::to_string(E) + " records of " +
                             std::to_string(sizeof(SubsetRecord)) +
                             " bytes), above the cap of " + std::to_string(opt.max_bytes),
                         need);
  }
  const double omega = g.omega();
  if (is_nonzero_omega(omega) && !g.has_masses() && !g.has_momenta()) {
    throw Error("exceptional kinematics: Φ ≡ 0 (no masses or momenta, omega != 0)");
  }
  const double half_d = g.D() / 2.0;
  const std::uint64_t massive = g.massive_mask();
  const auto mv = g.momentum_vertices();
  const std::size_t V = g.num_vertices();

  std::vector<SubsetRecord> rec(std::size_t{1} << E);
  UnionFind uf(V);
  for (std::uint64_t s = 0; s < rec.size(); ++s) {
    std::iota(uf.parent.begin(), uf.parent.end(), 0u);
    int loops = 0;
    double nu_sum = 0.0;
    for (std::uint64_t rest = s; rest; rest &= rest - 1) {
      const auto e = static_cast<std::size_t>(std::countr_zero(rest));
      nu_sum += g.nu()[e];
      if (!uf.unite(g.edges()[e].u, g.edges()[e].v)) ++loops;
    }
    bool mm = (massive & ~s) == 0;
    if (mm && mv.size() > 1) {
      const std::uint32_t root = uf.find(mv.front());
      for (std::uint32_t v : mv) mm = mm && uf.find(v) == root;
    }
    rec[s].loops = static_cast<std::uint32_t>(loops);
    rec[s].flags = mm ? kMassMomentumSpanning : 0u;
    rec[s].r = nu_sum - half_d * loops - (mm ? omega : 0.0);
    rec[s].logJ = 0.0;
  }
  rec[0].r = 1.0;
  return SubsetTable(E, std::move(rec));
}

SubsetTable build_feynman_tables(const FeynmanGraph& g, const SubsetTableOptions& opt) {
  SubsetTable t = feynman_r_table(g, opt);
  fill_log_j(t, opt);
  return t;
}

std::vector<std::string> exceptional_momentum_warnings(const FeynmanGraph& g) {
  std::vector<std::string> out;
  const auto mv = g.momentum_vertices();
  const std::size_t k = mv.size();
  if (k < 3) return out;
  if (k > 20) {
    out.push_back("exceptional-momenta check skipped: more than 20 external vertices");
    return out;
  }
  const double tol = 1e-10;
  const std::uint64_t all = (std::uint64_t{1} << k) - 1;
  // Subsets containing the first momentum vertex suffice, complements are equivalent.
  for (std::uint64_t s = 1; s < all; s += 2) {
    std::vector<double> p(g.kinematic_dim(), 0.0);
    std::vector<std::uint32_t> verts;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(s >> i & 1)) continue;
      verts.push_back(mv[i]);
      for (std::size_t c = 0; c < p.size(); ++c) p[c] += g.momenta()[mv[i]][c];
    }
    if (std::sqrt(norm2(p)) <= tol) {
      std::string msg = "exceptional kinematics suspected: momenta of vertices {";
      for (std::size_t i = 0; i < verts.size(); ++i) {
        msg += (i ? "," : "") + std::to_string(verts[i]);
      }
      out.push_back(msg + "} sum to zero");
    }
  }
  return out;
}

BooleanTable z_psi(const SubsetTable& t) {
  std::vector<double> v;
  for (const auto& r : t.records()) v.push_back(r.loops);
  return BooleanTable(t.n(), std::move(v));
}

BooleanTable z_phi(const SubsetTable& t) {
  std::vector<double> v;
  for (const auto& r : t.records()) {
    v.push_back(r.loops + ((r.flags & kMassMomentumSpanning) ? 1.0 : 0.0));
  }
  return BooleanTable(t.n(), std::move(v));
}

std::pair<double, double> feynman_trop_values(const SubsetTable& t,
                                              const TropicalSample& s) {
  double psi = 0.0, phi = 0.0;
  Subset chain = 0;
  std::uint32_t loops = 0, zphi = 0;
  for (std::uint32_t e : s.sigma) {
    chain |= Subset{1} << e;
    const SubsetRecord& r = t[chain];
    const std::uint32_t nz = r.loops + (r.flags & kMassMomentumSpanning);
    if (r.loops != loops) psi += s.log_x[e] * (r.loops - loops);
    if (nz != zphi) phi += s.log_x[e] * (nz - zphi);
    loops = r.loops;
    zphi = nz;
  }
  return {psi, phi};
}

FeynmanIntegrand::FeynmanIntegrand(const FeynmanGraph& g, const SubsetTable& t,
                                   int eps_order)
    : g_(&g), t_(&t), order_(eps_order), eval_(g) {
  if (eps_order < 0) throw Error("eps order must be non-negative");
  if (t.n() != g.num_edges()) throw Error("table does not match the graph");
  need_phi_ = is_nonzero_omega(g.omega()) || eps_order > 0;
  if (need_phi_ && !g.has_masses() && !g.has_momenta()) {
    throw Error("exceptional kinematics: Φ ≡ 0, so log Φ terms are undefined");
  }
}

bool FeynmanIntegrand::operator()(TropicalSample& s, std::span<double> out) {
  const auto [psi_tr, phi_tr] = feynman_trop_values(*t_, s);
  s.log_psi_tr = psi_tr;
  s.log_phi_tr = phi_tr;
  const SymanzikValue v = eval_.evaluate(s.log_x, need_phi_);
  if (!v.ok) return false;
  if (need_phi_ && !std::isfinite(v.log_phi)) return false;
  const double omega = g_->omega();
  const double dpsi = v.log_psi - psi_tr;
  double log_r = -(g_->D() / 2.0) * dpsi;
  if (is_nonzero_omega(omega)) log_r += omega * (dpsi - (v.log_phi - phi_tr));
  out[0] = std::exp(log_r);
  if (order_ > 0) {
    const double l = v.log_psi + g_->loops() * (v.log_psi - v.log_phi);
    for (int k = 1; k <= order_; ++k) out[k] = out[k - 1] * l / k;
  }
  return true;
}

double feynman_integrand(const FeynmanGraph& g, const SubsetTable& t, TropicalSample& s) {
  FeynmanIntegrand f(g, t, 0);
  double v = 0.0;
  if (!f(s, std::span<double>(&v, 1))) return std::numeric_limits<double>::quiet_NaN();
  return v;
}

std::vector<double> eps_integrand(const FeynmanGraph& g, const SubsetTable& t,
                                  TropicalSample& s, int order) {
  FeynmanIntegrand f(g, t, order);
  std::vector<double> v(f.orders());
  if (!f(s, v)) v.assign(v.size(), std::numeric_limits<double>::quiet_NaN());
  return v;
}

KernelFactory feynman_kernel(const FeynmanGraph& g, const SubsetTable& t, int eps_order) {
  // Fail early on invalid configurations rather than inside a worker.
  FeynmanIntegrand probe(g, t, eps_order);
  (void)probe;
  return [&g, &t, eps_order]() -> Kernel {
    auto f = std::make_shared<FeynmanIntegrand>(g, t, eps_order);
    auto s = std::make_shared<TropicalSample>(t.n());
    return [f, s, &t](RandomStream& rng, std::span<double> out) {
      sample_gp(t, rng, *s);
      return (*f)(*s, out);
    };
  };
}

namespace {

std::vector<RationalVector> scaled_support(const SparsePolynomial& p, const Rational& c) {
  std::vector<RationalVector> pts;
  for (const auto& t : p.terms()) {
    RationalVector v;
    for (int e : t.exponent) v.push_back(c * e);
    pts.push_back(std::move(v));
  }
  return polytope_vertices(std::move(pts));
}

std::vector<RationalVector> minkowski(const std::vector<RationalVector>& a,
                                      const std::vector<RationalVector>& b) {
  std::vector<RationalVector> out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      RationalVector s(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] + y[i];
      out.push_back(std::move(s));
    }
  }
  return polytope_vertices(std::move(out));
}

}  // namespace

std::pair<std::vector<RationalVector>, std::vector<RationalVector>>
feynman_point_sets(const FeynmanGraph& g) {
  const std::size_t E = g.num_edges();
  RationalVector nu;
  for (double v : g.nu()) nu.push_back(to_rational(v));
  std::vector<RationalVector> a{nu};
  std::vector<RationalVector> b{RationalVector(E, Rational(0))};
  const Rational omega = to_rational(g.omega());
  const Rational psi_pow = to_rational(g.D()) / 2 - omega;
  if (psi_pow != 0) {
    const auto pts = scaled_support(psi_polynomial(g), abs(psi_pow));
    if (psi_pow > 0) b = minkowski(b, pts);
    else a = minkowski(a, pts);
  }
  if (is_nonzero_omega(g.omega())) {
    const SparsePolynomial phi = phi_polynomial(g);
    if (phi.empty()) throw Error("exceptional kinematics: Φ ≡ 0");
    const auto pts = scaled_support(phi, abs(omega));
    if (omega > 0) b = minkowski(b, pts);
    else a = minkowski(a, pts);
  }
  return {a, b};
}

FeynmanSectorIntegrand::FeynmanSectorIntegrand(const FeynmanGraph& g,
                                               const SectorTable& t)
    : g_(&g), eval_(g) {
  if (t.n() != g.num_edges()) throw Error("sector table does not match the graph");
  for (const auto& s : t.sectors()) {
    std::vector<double> w;
    for (const auto& x : s.weight) w.push_back(to_double(x));
    weights_.push_back(std::move(w));
  }
}

bool FeynmanSectorIntegrand::operator()(const TropicalSample& s, std::span<double> out) {
  const double omega = g_->omega();
  const bool need_phi = is_nonzero_omega(omega);
  const SymanzikValue v = eval_.evaluate(s.log_x, need_phi);
  if (!v.ok || (need_phi && !std::isfinite(v.log_phi))) return false;
  const auto& w = weights_[s.sector];
  double log_f = 0.0;
  for (std::size_t e = 0; e < w.size(); ++e) {
    log_f += (g_->nu()[e] + w[e]) * s.log_x[e];
  }
  log_f -= (g_->D() / 2.0 - omega) * v.log_psi;
  if (need_phi) log_f -= omega * v.log_phi;
  out[0] = std::exp(log_f);
  return true;
}

KernelFactory feynman_sector_kernel(const FeynmanGraph& g, const SectorTable& t) {
  return [&g, &t]() -> Kernel {
    auto f = std::make_shared<FeynmanSectorIntegrand>(g, t);
    auto s = std::make_shared<TropicalSample>(t.n());
    return [f, s, &t](RandomStream& rng, std::span<double> out) {
      sample_from_table(t, rng, *s);
      return (*f)(*s, out);
    };
  };
}

}  // namespace troquad
