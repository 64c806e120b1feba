#include "troquad/sector.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "troquad/cones.hpp"
#include "troquad/errors.hpp"

namespace troquad {

namespace {

std::string sector_label(std::size_t i) { return "sector " + std::to_string(i); }

Rational coordinate_sum(const RationalVector& v) {
  Rational s = 0;
  for (const auto& x : v) s += x;
  return s;
}

std::vector<double> to_doubles(const RationalVector& v) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(to_double(x));
  return out;
}

std::string format_point(const std::vector<double>& y) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
  os << ')';
  return os.str();
}

}  // namespace

SimplicialSector make_sector(std::vector<RationalVector> generators,
                             RationalVector weight) {
  const std::size_t n = weight.size();
  if (n < 2) throw Error("sectors need n >= 2");
  if (generators.size() != n - 1) {
    throw Error("expected " + std::to_string(n - 1) + " generators, got " +
                std::to_string(generators.size()));
  }
  for (const auto& u : generators) {
    if (u.size() != n) throw Error("generator length does not match weight");
  }
  if (coordinate_sum(weight) != 0) throw Error("weight not orthogonal to 1");

  std::vector<RationalVector> m;
  for (const auto& u : generators) m.push_back(u);
  m.push_back(RationalVector(n, Rational(1)));
  // Rows u_k and 1: the determinant equals det(u_1, ..., u_{n-1}, 1) up to
  // transposition.
  const Rational det = determinant(m);
  if (det == 0) throw Error("degenerate cone");

  SimplicialSector s;
  Rational factor = abs(det);
  for (const auto& u : generators) {
    const Rational pairing = dot(u, weight);
    if (pairing <= 0) throw Error("non-positive pairing");
    factor /= pairing;
    std::vector<double> c;
    for (const auto& x : u) c.push_back(to_double(x / pairing));
    s.coef.push_back(std::move(c));
  }
  s.generators = std::move(generators);
  s.weight = std::move(weight);
  s.factor_exact = factor;
  s.factor = to_double(factor);
  return s;
}

SectorTable::SectorTable(std::size_t n, std::vector<SimplicialSector> sectors)
    : n_(n), sectors_(std::move(sectors)) {
  if (sectors_.empty()) throw Error("sector table is empty");
  total_exact_ = 0;
  std::vector<double> w;
  for (const auto& s : sectors_) {
    if (s.weight.size() != n) throw Error("sector dimension does not match n");
    total_exact_ += s.factor_exact;
    w.push_back(s.factor);
  }
  total_ = to_double(total_exact_);
  if (!(total_ > 0.0) || !std::isfinite(total_)) {
    throw Error("sector table total is not positive and finite");
  }
  alias_ = AliasTable(w);
}

namespace {

void check_same_hyperplane(const std::vector<RationalVector>& pts,
                           const char* name, std::size_t n, Rational& degree) {
  if (pts.empty()) throw ConvergenceError(std::string(name) + " has no points");
  degree = coordinate_sum(pts.front());
  for (const auto& p : pts) {
    if (p.size() != n) throw Error(std::string(name) + " points differ in length");
    if (coordinate_sum(p) != degree) {
      throw ConvergenceError(std::string(name) +
                             " does not lie in a hyperplane <1,v> = const");
    }
  }
}

std::vector<RationalVector> dedupe(std::vector<RationalVector> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Rows <y, p - q> >= 0 for q != p, restricted to y_n = 0.
std::vector<RationalVector> normal_rows(const std::vector<RationalVector>& pts,
                                        std::size_t self) {
  std::vector<RationalVector> rows;
  const std::size_t d = pts[self].size() - 1;
  for (std::size_t q = 0; q < pts.size(); ++q) {
    if (q == self) continue;
    RationalVector r(d);
    for (std::size_t i = 0; i < d; ++i) r[i] = pts[self][i] - pts[q][i];
    rows.push_back(std::move(r));
  }
  return rows;
}

RationalVector lift(const RationalVector& ray) {
  RationalVector u(ray);
  u.push_back(0);
  return u;
}

}  // namespace

SectorTable build_refined_fan(const std::vector<RationalVector>& a_in,
                              const std::vector<RationalVector>& b_in) {
  if (b_in.empty()) throw ConvergenceError("B has no points");
  const std::size_t n = b_in.front().size();
  if (n < 2) throw Error("refined fan needs n >= 2");
  Rational deg_a, deg_b;
  check_same_hyperplane(a_in, "A", n, deg_a);
  check_same_hyperplane(b_in, "B", n, deg_b);
  if (deg_a != deg_b) {
    throw ConvergenceError("A and B lie in different hyperplanes (degrees " +
                           format_rational(deg_a) + " and " +
                           format_rational(deg_b) + ")");
  }
  const auto a_pts = polytope_vertices(a_in);
  const auto b_pts = dedupe(b_in);

  std::vector<RationalVector> diffs;
  for (const auto& b : b_pts) {
    RationalVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = b[i] - b_pts.front()[i];
    diffs.push_back(std::move(v));
  }
  if (rank_of(diffs) != n - 1) {
    throw ConvergenceError("R1 violated: B is not full-dimensional in its hyperplane");
  }

  const std::size_t d = n - 1;
  std::vector<SimplicialSector> sectors;
  for (std::size_t bi = 0; bi < b_pts.size(); ++bi) {
    const auto b_rows = normal_rows(b_pts, bi);
    const auto b_rays = extreme_rays(b_rows);
    if (rank_of(b_rays) < d) continue;  // not a vertex of B
    for (std::size_t ai = 0; ai < a_pts.size(); ++ai) {
      auto rows = b_rows;
      if (a_pts.size() > 1) {
        const auto a_rows = normal_rows(a_pts, ai);
        rows.insert(rows.end(), a_rows.begin(), a_rows.end());
      }
      const auto rays = a_pts.size() > 1 ? extreme_rays(rows) : b_rays;
      if (rays.size() < d || rank_of(rays) < d) continue;

      RationalVector w(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = b_pts[bi][i] - a_pts[ai][i];
      for (const auto& r : rays) {
        const RationalVector u = lift(r);
        if (dot(u, w) <= 0) {
          const auto y = to_doubles(u);
          throw ConvergenceError(
              "R2 violated: divergent direction y = " + format_point(y), y);
        }
      }
      for (const auto& cone : triangulate_cone(rays, rows)) {
        std::vector<RationalVector> gens;
        for (const auto& r : cone) gens.push_back(lift(r));
        sectors.push_back(make_sector(std::move(gens), w));
      }
    }
  }
  if (sectors.empty()) throw ConvergenceError("refined fan has no maximal cones");
  return SectorTable(n, std::move(sectors));
}

SectorTable braid_fan_table(const BooleanTable& r) {
  const std::size_t n = r.n();
  if (n < 2 || n > 8) throw Error("braid fan table supports 2 <= n <= 8");
  std::vector<RationalVector> r_exact(std::size_t{1} << n);
  for (Subset a = 1; a < r_exact.size(); ++a) {
    if (a != r.full() && !(r[a] > 0.0)) {
      throw DivergenceError("divergent: r <= 0 on " + format_subset(a, n), {a});
    }
  }
  std::vector<std::uint32_t> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0u);
  std::vector<SimplicialSector> sectors;
  do {
    std::vector<RationalVector> gens;
    RationalVector w(n, Rational(0));
    Subset chain = 0;
    Rational prev = 0;
    RationalVector u(n, Rational(0));
    for (std::size_t k = 0; k + 1 < n; ++k) {
      chain |= Subset{1} << sigma[k];
      u[sigma[k]] = -1;
      gens.push_back(u);
      const Rational rk = to_rational(r[chain]);
      w[sigma[k]] = -(rk - prev);
      prev = rk;
    }
    w[sigma[n - 1]] = prev;
    sectors.push_back(make_sector(std::move(gens), std::move(w)));
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return SectorTable(n, std::move(sectors));
}

SectorTable parse_sector_table(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      const auto first = out.find_first_not_of(" \t\r");
      if (first == std::string::npos) {
        out.clear();
        return true;
      }
      if (out[first] == '#') continue;
      return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) {
    return ParseError("line " + std::to_string(line_no) + ": " + msg);
  };
  auto fields = [](const std::string& s) {
    std::istringstream ls(s);
    std::vector<std::string> f;
    for (std::string t; ls >> t;) f.push_back(t);
    return f;
  };

  do {
    if (!next_line(line)) throw ParseError("empty sector table");
  } while (line.empty());
  if (fields(line) != std::vector<std::string>{"TROPSEC", "1"}) {
    throw fail("expected header 'TROPSEC 1'");
  }
  do {
    if (!next_line(line)) throw fail("missing 'n <n>' line");
  } while (line.empty());
  auto nf = fields(line);
  if (nf.size() != 2 || nf[0] != "n") throw fail("expected 'n <n>'");
  std::size_t n = 0;
  try {
    n = std::stoul(nf[1]);
  } catch (const std::exception&) {
    throw fail("invalid n");
  }
  if (n < 2) throw fail("n must be at least 2");

  auto read_vec = [&](const std::vector<std::string>& f) {
    if (f.size() != n + 1) {
      throw fail("expected " + std::to_string(n) + " entries after '" + f[0] + "'");
    }
    RationalVector v;
    for (std::size_t i = 1; i < f.size(); ++i) {
      try {
        v.push_back(parse_rational(f[i]));
      } catch (const ParseError& e) {
        throw fail(e.what());
      }
    }
    return v;
  };

  std::vector<SimplicialSector> sectors;
  while (true) {
    bool more = next_line(line);
    while (more && line.empty()) more = next_line(line);
    if (!more) break;
    auto f = fields(line);
    if (f[0] != "w") throw fail("expected 'w' line starting a sector");
    const std::size_t index = sectors.size();
    RationalVector w = read_vec(f);
    std::vector<RationalVector> gens;
    std::optional<double> stored;
    while (next_line(line) && !line.empty()) {
      f = fields(line);
      if (f[0] == "u") {
        gens.push_back(read_vec(f));
      } else if (f[0] == "f" && f.size() == 2) {
        try {
          stored = std::stod(f[1]);
        } catch (const std::exception&) {
          throw fail("invalid sector factor");
        }
      } else {
        throw fail("unexpected '" + f[0] + "' in " + sector_label(index));
      }
    }
    SimplicialSector s;
    try {
      s = make_sector(std::move(gens), std::move(w));
    } catch (const Error& e) {
      throw ParseError(sector_label(index) + ": " + e.what());
    }
    if (stored) {
      const double diff = std::abs(*stored - s.factor);
      if (diff > 1e-9 * std::abs(s.factor)) {
        throw ParseError(sector_label(index) + ": stored factor " +
                         std::to_string(*stored) + " differs from recomputed " +
                         std::to_string(s.factor));
      }
    }
    sectors.push_back(std::move(s));
  }
  if (sectors.empty()) throw ParseError("sector table has no sectors");
  return SectorTable(n, std::move(sectors));
}

SectorTable load_sector_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sector table " + path);
  try {
    return parse_sector_table(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_sector_table(std::ostream& out, const SectorTable& t) {
  out << "TROPSEC 1\n";
  out << "n " << t.n() << "\n";
  out.precision(17);
  for (const auto& s : t.sectors()) {
    out << "\nw";
    for (const auto& x : s.weight) out << ' ' << format_rational(x);
    out << '\n';
    for (const auto& u : s.generators) {
      out << 'u';
      for (const auto& x : u) out << ' ' << format_rational(x);
      out << '\n';
    }
    out << "f " << s.factor << '\n';
  }
}

void sample_in_sector(const SimplicialSector& s, RandomStream& rng,
                      TropicalSample& out) {
  const std::size_t n = s.weight.size();
  out.log_x.assign(n, 0.0);
  for (const auto& c : s.coef) {
    const double e = -std::log(rng.uniform());
    for (std::size_t i = 0; i < n; ++i) out.log_x[i] += c[i] * e;
  }
  const double top = *std::max_element(out.log_x.begin(), out.log_x.end());
  for (double& v : out.log_x) v -= top;
}

void sample_from_table(const SectorTable& t, RandomStream& rng, TropicalSample& out) {
  const std::size_t c = t.alias().sample(rng);
  sample_in_sector(t.sectors()[c], rng, out);
  out.sector = c;
}

TropicalSample sample_from_table(const SectorTable& t, RandomStream& rng) {
  TropicalSample s(t.n());
  sample_from_table(t, rng, s);
  return s;
}

SectorEstimate estimate_per_sector(const SectorTable& t, const SampleIntegrand& f,
                                   std::uint64_t n_per_sector, RandomStream& rng,
                                   double reject_threshold) {
  if (n_per_sector == 0) throw Error("need at least one sample per sector");
  SectorEstimate out;
  double total = 0.0;
  double var = 0.0;
  std::uint64_t accepted = 0, rejected = 0;
  TropicalSample s(t.n());
  double value = 0.0;
  for (std::size_t c = 0; c < t.sectors().size(); ++c) {
    const auto& sec = t.sectors()[c];
    EstimatorState st(1, sec.factor);
    for (std::uint64_t i = 0; i < n_per_sector; ++i) {
      sample_in_sector(sec, rng, s);
      s.sector = c;
      if (f(s, std::span<double>(&value, 1)) && std::isfinite(value)) {
        st.add(value);
      } else {
        st.reject();
      }
    }
    accepted += st.count();
    rejected += st.rejected();
    out.sector_estimate.push_back(st.count() ? st.estimate() : 0.0);
    const double se = st.std_error();
    out.sector_std_error.push_back(se);
    total += out.sector_estimate.back();
    if (std::isfinite(se)) {
      var += se * se;
    } else {
      out.std_error_defined = false;
    }
  }
  const std::uint64_t attempted = accepted + rejected;
  if (static_cast<double>(rejected) > reject_threshold * static_cast<double>(attempted)) {
    throw RejectionBudgetError("rejection budget exceeded: " +
                                   std::to_string(rejected) + " of " +
                                   std::to_string(attempted) + " samples rejected",
                               rejected, attempted);
  }
  out.combined.I_tr = t.total();
  out.combined.estimate = {total};
  out.combined.std_error = {out.std_error_defined
                                ? std::sqrt(var)
                                : std::numeric_limits<double>::quiet_NaN()};
  out.combined.n_samples = accepted;
  out.combined.n_rejected = rejected;
  return out;
}

long find_sector(const SectorTable& t, std::span<const double> y) {
  const std::size_t n = t.n();
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = y[i];
  for (std::size_t c = 0; c < t.sectors().size(); ++c) {
    const auto& s = t.sectors()[c];
    Eigen::MatrixXd m(n, n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) m(i, k) = to_double(s.generators[k][i]);
    }
    m.col(n - 1).setOnes();
    const Eigen::VectorXd lambda = m.partialPivLu().solve(rhs);
    bool inside = true;
    for (std::size_t k = 0; k + 1 < n; ++k) inside = inside && lambda[k] >= -1e-12;
    if (inside) return static_cast<long>(c);
  }
  return -1;
}

}  // namespace troquad
