#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "troquad/errors.hpp"
#include "troquad/permutahedron.hpp"
#include "troquad/polynomial.hpp"
#include "troquad/rational.hpp"

using namespace troquad;

namespace {

BooleanTable by_size(std::size_t n, const std::function<double(int)>& f) {
  return BooleanTable::from_function(n, [&](Subset a) { return f(std::popcount(a)); });
}

BooleanTable random_r(std::size_t n, RandomStream& rng) {
  return BooleanTable::from_function(
      n, [&](Subset a) { return a == 0 ? 1.0 : 0.25 + 3.0 * rng.uniform(); });
}

/// Sum of convex functions of |A & S_i| plus a modular part: supermodular,
/// integer valued.
BooleanTable random_supermodular(std::size_t n, RandomStream& rng) {
  std::vector<Subset> sets(3);
  std::vector<int> weight(3), lin(n);
  for (auto& s : sets) s = rng.below(Subset{1} << n);
  for (auto& w : weight) w = static_cast<int>(rng.below(4));
  for (auto& l : lin) l = static_cast<int>(rng.below(7)) - 3;
  return BooleanTable::from_function(n, [&](Subset a) {
    double z = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (a >> i & 1) z += lin[i];
    }
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const int c = std::popcount(a & sets[k]);
      z += weight[k] * c * c;
    }
    return z;
  });
}

std::vector<std::uint32_t> identity(std::size_t n) {
  std::vector<std::uint32_t> s(n);
  std::iota(s.begin(), s.end(), 0u);
  return s;
}

SubsetTable triangle_d6() {
  return build_subset_table(by_size(3, [](int k) { return k == 0 ? 1.0 : double(k); }));
}

}  // namespace

TEST_CASE("check_supermodular") {
  CHECK(check_supermodular(by_size(4, [](int k) { return k * (k + 1) / 2.0; })).ok);
  CHECK(check_supermodular(by_size(3, [](int k) { return double(k * k); })).ok);
  const auto rep = check_supermodular(by_size(2, [](int k) { return -double(k * k); }));
  CHECK_FALSE(rep.ok);
  CHECK(rep.exhaustive);
  CHECK(((rep.a == 1 && rep.b == 2) || (rep.a == 2 && rep.b == 1)));
  CHECK(rep.z_a == -1.0);
  CHECK(rep.z_join == -4.0);
  CHECK(rep.describe().find("violated") != std::string::npos);

  RandomStream rng(3);
  for (int i = 0; i < 20; ++i) CHECK(check_supermodular(random_supermodular(6, rng)).ok);
}

TEST_CASE("vertex_from_permutation") {
  const auto pi4 = by_size(4, [](int k) { return k * (k + 1) / 2.0; });
  std::vector<std::uint32_t> sigma{2, 0, 3, 1};
  const auto w = vertex_from_permutation(pi4, sigma);
  for (std::size_t k = 0; k < 4; ++k) CHECK(w[sigma[k]] == double(k + 1));

  const auto zero = by_size(3, [](int) { return 0.0; });
  CHECK(vertex_from_permutation(zero, identity(3)) == std::vector<double>{0, 0, 0});

  // loop numbers of the triangle's edge subsets
  const auto loops = BooleanTable::from_function(3, [](Subset a) { return a == 7 ? 1.0 : 0.0; });
  CHECK(vertex_from_permutation(loops, identity(3)) == std::vector<double>{0, 0, 1});
  CHECK_THROWS_AS(vertex_from_permutation(loops, {0, 0, 1}), Error);
}

TEST_CASE("vertex map maximizes on the chamber") {
  RandomStream rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial % 4;
    const auto z = random_supermodular(n, rng);
    std::vector<std::vector<double>> vertices;
    auto tau = identity(n);
    do vertices.push_back(vertex_from_permutation(z, tau));
    while (std::next_permutation(tau.begin(), tau.end()));

    for (int k = 0; k < 10; ++k) {
      std::vector<std::uint32_t> sigma = identity(n);
      for (std::size_t i = n; i > 1; --i) std::swap(sigma[i - 1], sigma[rng.below(i)]);
      // y increasing along sigma: y[sigma[0]] is the smallest
      RationalVector y(n);
      Rational acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += Rational(1 + static_cast<int>(rng.below(5)), 7);
        y[sigma[i]] = acc;
      }
      auto pair = [&](const std::vector<double>& v) {
        Rational s = 0;
        for (std::size_t i = 0; i < n; ++i) s += y[i] * to_rational(v[i]);
        return s;
      };
      const Rational here = pair(vertex_from_permutation(z, sigma));
      Rational best = pair(vertices[0]);
      for (const auto& v : vertices) best = std::max(best, pair(v));
      CHECK(here == best);
    }
  }
}

TEST_CASE("build_subset_table") {
  auto t = build_subset_table(by_size(2, [](int) { return 1.0; }));
  CHECK(std::exp(t.log_I_tr()) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(t.bytes() == 4 * 24);
  CHECK(table_bytes(6) == 1536);

  CHECK(std::exp(triangle_d6().log_I_tr()) == doctest::Approx(3.0).epsilon(1e-14));

  try {
    build_subset_table(BooleanTable(2, {1.0, 0.0, 1.0, 5.0}));
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.subsets() == std::vector<std::uint64_t>{1});
  }
  try {
    build_subset_table(BooleanTable(2, {1.0, -1.0, -2.0, 5.0}));
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.subsets().size() == 2);
  }

  SubsetTableOptions small;
  small.max_bytes = 1000;
  try {
    build_subset_table(by_size(6, [](int) { return 1.0; }), small);
    FAIL("expected a memory cap error");
  } catch (const MemoryCapError& e) {
    CHECK(e.required_bytes() == 1536);
  }
}

TEST_CASE("brute-force identity") {
  RandomStream rng(2024);
  for (std::size_t n = 1; n <= 7; ++n) {
    for (int i = 0; i < 5; ++i) {
      const auto r = random_r(n, rng);
      const auto t = build_subset_table(r);
      const double brute = oracle::brute_force_J(n, [&](Subset a) { return r[a]; });
      CHECK(std::exp(t.log_I_tr()) == doctest::Approx(brute).epsilon(1e-9));
    }
  }
}

TEST_CASE("sample_gp structure") {
  RandomStream rng(1);
  const auto t = triangle_d6();
  for (int i = 0; i < 1000; ++i) {
    const auto s = sample_gp(t, rng);
    CHECK(s.log_x[s.sigma[2]] == 0.0);
    CHECK(*std::max_element(s.log_x.begin(), s.log_x.end()) == 0.0);
    CHECK(s.log_x[s.sigma[0]] <= s.log_x[s.sigma[1]]);
    CHECK(s.log_x[s.sigma[1]] <= s.log_x[s.sigma[2]]);
  }
}

TEST_CASE("sample_gp chamber frequencies") {
  RandomStream rng(7);
  {
    const auto t = build_subset_table(by_size(2, [](int) { return 1.0; }));
    std::uint64_t first = 0;
    const int N = 100000;
    for (int i = 0; i < N; ++i) first += sample_gp(t, rng).sigma[0] == 0;
    CHECK(oracle::chi_squared_pvalue({first, N - first}, {0.5, 0.5}) > 1e-3);
  }
  {
    const auto t = triangle_d6();
    std::map<std::vector<std::uint32_t>, std::uint64_t> counts;
    for (int i = 0; i < 100000; ++i) ++counts[sample_gp(t, rng).sigma];
    REQUIRE(counts.size() == 6);
    std::vector<std::uint64_t> obs;
    for (auto& [k, v] : counts) obs.push_back(v);
    CHECK(oracle::chi_squared_pvalue(obs, std::vector<double>(6, 1.0 / 6)) > 1e-3);
  }
}

TEST_CASE("trop_values_at_sample") {
  RandomStream rng(8);
  const auto t = triangle_d6();
  const auto zero = by_size(3, [](int) { return 0.0; });
  const auto loops = BooleanTable::from_function(3, [](Subset a) { return a == 7 ? 1.0 : 0.0; });
  const SparsePolynomial psi(3, {{{1, 0, 0}, 1.0}, {{0, 1, 0}, 1.0}, {{0, 0, 1}, 1.0}});
  // z = loops is the facet function of NP(Psi) shifted: NP(Psi) = simplex of degree 1
  for (int i = 0; i < 10000; ++i) {
    const auto s = sample_gp(t, rng);
    CHECK(trop_values_at_sample(zero, s) == 0.0);
    CHECK(trop_values_at_sample(loops, s) ==
          doctest::Approx(trop_eval_log(psi, s.log_x)).epsilon(1e-12));
  }

  TropicalSample s(3);
  s.sigma = {0, 1, 2};
  s.log_x = {-2, -1, 0};
  CHECK(trop_values_at_sample(loops, s) == 0.0);
}

TEST_CASE("table file round trip") {
  RandomStream rng(4);
  auto t = build_subset_table(random_r(5, rng));
  t[3].loops = 2;
  t[3].flags = kMassMomentumSpanning;
  std::stringstream buf;
  write_subset_table(buf, t);
  const std::string bytes = buf.str();
  CHECK(bytes.size() == 16 + 32 * 24);
  CHECK(bytes.substr(0, 8) == "TROPFEYN");
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 5);
  std::stringstream in(bytes);
  const auto u = read_subset_table(in);
  REQUIRE(u.n() == 5);
  for (Subset a = 0; a < 32; ++a) {
    CHECK(u[a].r == t[a].r);
    CHECK(u[a].logJ == t[a].logJ);
    CHECK(u[a].loops == t[a].loops);
    CHECK(u[a].flags == t[a].flags);
  }
  std::stringstream bad("NOTATABLE_______");
  CHECK_THROWS_AS(read_subset_table(bad), ParseError);
  std::stringstream cut(bytes.substr(0, 100));
  CHECK_THROWS_AS(read_subset_table(cut), ParseError);
  CHECK(format_subset(5, 4) == "{0,2}");
}
