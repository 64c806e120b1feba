#include "troquad/permutahedron.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "troquad/errors.hpp"

namespace troquad {

namespace {

constexpr std::size_t kMaxN = 32;
constexpr char kMagic[8] = {'T', 'R', 'O', 'P', 'F', 'E', 'Y', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(value >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw ParseError("table file truncated");
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(buf[i]) << (8 * i);
  }
  return value;
}

bool le_violation(double lhs, double rhs) {
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return lhs > rhs + 1e-12 * scale;
}

}  // namespace

BooleanTable::BooleanTable(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (n > kMaxN) throw Error("boolean table limited to n <= 32");
  if (values_.size() != (std::size_t{1} << n)) {
    throw Error("boolean table over n=" + std::to_string(n) + " needs 2^n values");
  }
}

BooleanTable BooleanTable::from_function(std::size_t n,
                                         const std::function<double(Subset)>& f) {
  std::vector<double> v(std::size_t{1} << n);
  for (Subset a = 0; a < v.size(); ++a) v[a] = f(a);
  return BooleanTable(n, std::move(v));
}

SubsetTable::SubsetTable(std::size_t n, std::vector<SubsetRecord> records)
    : n_(n), records_(std::move(records)) {
  if (records_.size() != (std::size_t{1} << n)) {
    throw Error("subset table over n=" + std::to_string(n) + " needs 2^n records");
  }
}

std::uint64_t table_bytes(std::size_t n) {
  return (std::uint64_t{1} << n) * sizeof(SubsetRecord);
}

std::string format_subset(Subset a, std::size_t n) {
  std::string s = "{";
  bool first = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a >> i & 1)) continue;
    if (!first) s += ",";
    s += std::to_string(i);
    first = false;
  }
  return s + "}";
}

std::string SupermodularReport::describe() const {
  if (ok) return exhaustive ? "supermodular" : "no violation found (sampled)";
  std::ostringstream os;
  os << "supermodularity violated at A=" << format_subset(a, 64)
     << ", B=" << format_subset(b, 64) << ": z(A)+z(B) = " << z_a << "+" << z_b
     << " > z(A&B)+z(A|B) = " << z_meet << "+" << z_join;
  return os.str();
}

SupermodularReport check_supermodular(const BooleanTable& z,
                                      std::uint64_t samples, std::uint64_t seed) {
  SupermodularReport rep;
  const std::size_t n = z.n();
  auto test = [&](Subset base, std::size_t i, std::size_t j) {
    const Subset a = base | (Subset{1} << i);
    const Subset b = base | (Subset{1} << j);
    if (le_violation(z[a] + z[b], z[base] + z[a | b])) {
      rep.ok = false;
      rep.a = a;
      rep.b = b;
      rep.z_a = z[a];
      rep.z_b = z[b];
      rep.z_meet = z[base];
      rep.z_join = z[a | b];
      return true;
    }
    return false;
  };
  if (n <= 20) {
    for (Subset base = 0; base <= z.full(); ++base) {
      for (std::size_t i = 0; i < n; ++i) {
        if (base >> i & 1) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
          if (base >> j & 1) continue;
          if (test(base, i, j)) return rep;
        }
      }
    }
    return rep;
  }
  rep.exhaustive = false;
  RandomStream rng(seed);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const std::size_t i = rng.below(n);
    std::size_t j = rng.below(n - 1);
    if (j >= i) ++j;
    Subset base = rng.next_u64() & z.full();
    base &= ~((Subset{1} << i) | (Subset{1} << j));
    if (test(base, std::min(i, j), std::max(i, j))) return rep;
  }
  return rep;
}

std::vector<double> vertex_from_permutation(const BooleanTable& z,
                                            const std::vector<std::uint32_t>& sigma) {
  if (sigma.size() != z.n()) throw Error("permutation length does not match n");
  std::vector<double> w(z.n(), 0.0);
  Subset chain = 0;
  Subset seen = 0;
  for (std::uint32_t e : sigma) {
    if (e >= z.n() || (seen >> e & 1)) throw Error("sigma is not a permutation");
    seen |= Subset{1} << e;
    const Subset next = chain | (Subset{1} << e);
    w[e] = z[next] - z[chain];
    chain = next;
  }
  return w;
}

BooleanTable r_values(const SubsetTable& t) {
  std::vector<double> v;
  v.reserve(t.records().size());
  for (const auto& rec : t.records()) v.push_back(rec.r);
  return BooleanTable(t.n(), std::move(v));
}

void fill_log_j(SubsetTable& t, const SubsetTableOptions& opt) {
  const std::size_t n = t.n();
  const Subset full = t.full();
  double scale = 0.0;
  for (Subset a = 1; a < full; ++a) scale = std::max(scale, std::abs(t[a].r));
  const double tol = opt.tolerance * std::max(scale, 1.0);
  std::vector<Subset> bad;
  for (Subset a = 1; a < full; ++a) {
    if (!(t[a].r > tol)) bad.push_back(a);
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "divergent: r <= 0 on " << bad.size() << " subset(s):";
    for (std::size_t k = 0; k < bad.size() && k < 20; ++k) {
      os << ' ' << format_subset(bad[k], n);
    }
    if (bad.size() > 20) os << " ...";
    throw DivergenceError(os.str(), std::move(bad));
  }

  // q[A] = logJ(A) - log r(A), the summand contributed by A to its supersets.
  std::vector<double> q(std::size_t{1} << n);
  t[0].r = 1.0;
  t[0].logJ = 0.0;
  q[0] = 0.0;
  double terms[64];
  for (Subset a = 1; a <= full; ++a) {
    double top = -std::numeric_limits<double>::infinity();
    int m = 0;
    for (Subset rest = a; rest; rest &= rest - 1) {
      const Subset e = rest & (~rest + 1);
      terms[m] = q[a ^ e];
      top = std::max(top, terms[m]);
      ++m;
    }
    double sum = 0.0;
    for (int k = 0; k < m; ++k) sum += std::exp(terms[k] - top);
    t[a].logJ = top + std::log(sum);
    q[a] = a == full ? 0.0 : t[a].logJ - std::log(t[a].r);
  }
}

SubsetTable build_subset_table(const BooleanTable& r, const SubsetTableOptions& opt) {
  const std::size_t n = r.n();
  if (n == 0) throw Error("subset table needs n >= 1");
  if (n > kMaxN) throw MemoryCapError("n > 32 is not supported", 0);
  const std::uint64_t need = table_bytes(n);
  if (need > opt.max_bytes) {
    throw MemoryCapError("subset table needs " + std::to_string(need) +
                             " bytes (2^" + std::to_string(n) + " records of " +
                             std::to_string(sizeof(SubsetRecord)) +
                             " bytes), above the cap of " +
                             std::to_string(opt.max_bytes),
                         need);
  }
  std::vector<SubsetRecord> rec(std::size_t{1} << n, SubsetRecord{0, 0, 0, 0});
  for (Subset a = 0; a < rec.size(); ++a) {
    if (!std::isfinite(r[a])) {
      throw Error("r is not finite on subset " + format_subset(a, n));
    }
    rec[a].r = r[a];
  }
  SubsetTable t(n, std::move(rec));
  fill_log_j(t, opt);
  return t;
}

void sample_gp(const SubsetTable& t, RandomStream& rng, TropicalSample& out) {
  const std::size_t n = t.n();
  out.log_x.resize(n);
  out.sigma.resize(n);
  Subset a = t.full();
  double kappa = 0.0;
  for (std::size_t m = n; m > 0; --m) {
    const double log_ja = t[a].logJ;
    double u = rng.uniform();
    Subset pick = 0;
    for (Subset rest = a; rest; rest &= rest - 1) {
      const Subset e = rest & (~rest + 1);
      pick = e;
      const SubsetRecord& sub = t[a ^ e];
      const double p = std::exp(sub.logJ - log_ja) / sub.r;
      u -= p;
      if (u < 0.0) break;
    }
    const auto idx = static_cast<std::uint32_t>(std::countr_zero(pick));
    out.sigma[m - 1] = idx;
    out.log_x[idx] = kappa;
    a ^= pick;
    if (a) kappa += std::log(rng.uniform()) / t[a].r;
  }
  out.sector = 0;
}

TropicalSample sample_gp(const SubsetTable& t, RandomStream& rng) {
  TropicalSample s(t.n());
  sample_gp(t, rng, s);
  return s;
}

double trop_values_at_sample(const BooleanTable& z, const TropicalSample& s) {
  double v = 0.0;
  Subset chain = 0;
  for (std::uint32_t e : s.sigma) {
    const Subset next = chain | (Subset{1} << e);
    const double dz = z[next] - z[chain];
    if (dz != 0.0) v += s.log_x[e] * dz;
    chain = next;
  }
  return v;
}

void write_subset_table(std::ostream& out, const SubsetTable& t) {
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.n()));
  for (const auto& r : t.records()) {
    std::uint64_t bits;
    std::memcpy(&bits, &r.r, 8);
    put_le<std::uint64_t>(out, bits);
    std::memcpy(&bits, &r.logJ, 8);
    put_le<std::uint64_t>(out, bits);
    put_le<std::uint32_t>(out, r.loops);
    put_le<std::uint32_t>(out, r.flags);
  }
  if (!out) throw Error("failed writing subset table");
}

SubsetTable read_subset_table(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("not a subset table file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) {
    throw ParseError("unsupported table version " + std::to_string(version));
  }
  const auto n = get_le<std::uint32_t>(in);
  if (n == 0 || n > kMaxN) throw ParseError("table has invalid n " + std::to_string(n));
  std::vector<SubsetRecord> rec(std::size_t{1} << n);
  for (auto& r : rec) {
    std::uint64_t bits = get_le<std::uint64_t>(in);
    std::memcpy(&r.r, &bits, 8);
    bits = get_le<std::uint64_t>(in);
    std::memcpy(&r.logJ, &bits, 8);
    r.loops = get_le<std::uint32_t>(in);
    r.flags = get_le<std::uint32_t>(in);
  }
  return SubsetTable(n, std::move(rec));
}

void save_subset_table(const std::string& path, const SubsetTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_subset_table(out, t);
}

SubsetTable load_subset_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open table file " + path);
  return read_subset_table(in);
}

}  // namespace troquad
