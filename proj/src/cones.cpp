#include "troquad/cones.hpp"

#include <algorithm>
#include <boost/dynamic_bitset.hpp>
#include <numeric>

#include "troquad/errors.hpp"

namespace troquad {

namespace {

using boost::multiprecision::cpp_int;
using Bits = boost::dynamic_bitset<>;

int sign_of(const Rational& r) { return r.sign(); }

struct Ray {
  RationalVector v;
  Bits zero;  // processed rows at which the ray is tight
};

}  // namespace

std::size_t rank_of(const std::vector<RationalVector>& input) {
  if (input.empty()) return 0;
  std::vector<RationalVector> m(input);
  const std::size_t cols = m.front().size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.size() && m[pivot][c] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = rank + 1; r < m.size(); ++r) {
      if (m[r][c] == 0) continue;
      const Rational f = m[r][c] / m[rank][c];
      for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

Rational determinant(std::vector<RationalVector> m) {
  const std::size_t n = m.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && m[pivot][c] == 0) ++pivot;
    if (pivot == n) return 0;
    if (pivot != c) {
      std::swap(m[pivot], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (m[r][c] == 0) continue;
      const Rational f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

RationalVector primitive(const RationalVector& v) {
  cpp_int lcm_den = 1;
  for (const auto& x : v) {
    lcm_den = boost::multiprecision::lcm(lcm_den, denominator(x));
  }
  std::vector<cpp_int> ints;
  cpp_int g = 0;
  for (const auto& x : v) {
    const cpp_int i = numerator(x) * (lcm_den / denominator(x));
    ints.push_back(i);
    g = boost::multiprecision::gcd(g, i);
  }
  if (g == 0) throw Error("zero vector has no primitive representative");
  RationalVector out;
  out.reserve(v.size());
  for (const auto& i : ints) out.emplace_back(i / abs(g));
  return out;
}

std::vector<RationalVector> extreme_rays(const std::vector<RationalVector>& rows) {
  if (rows.empty()) throw Error("cone without constraints is not pointed");
  const std::size_t d = rows.front().size();
  const std::size_t m = rows.size();

  // Greedily pick d independent rows for the initial simplicial cone.
  std::vector<std::size_t> basis;
  std::vector<RationalVector> chosen;
  for (std::size_t i = 0; i < m && basis.size() < d; ++i) {
    chosen.push_back(rows[i]);
    if (rank_of(chosen) == chosen.size()) {
      basis.push_back(i);
    } else {
      chosen.pop_back();
    }
  }
  if (basis.size() < d) throw Error("cone is not pointed");

  // Rays of {A0 y >= 0} are the columns of A0^{-1}: solve A0 y = e_j.
  std::vector<Ray> rays;
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<RationalVector> aug(d, RationalVector(d + 1));
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) aug[r][c] = chosen[r][c];
      aug[r][d] = (r == j) ? 1 : 0;
    }
    for (std::size_t c = 0; c < d; ++c) {
      std::size_t p = c;
      while (aug[p][c] == 0) ++p;
      std::swap(aug[p], aug[c]);
      const Rational inv = 1 / aug[c][c];
      for (auto& x : aug[c]) x *= inv;
      for (std::size_t r = 0; r < d; ++r) {
        if (r == c || aug[r][c] == 0) continue;
        const Rational f = aug[r][c];
        for (std::size_t k = 0; k <= d; ++k) aug[r][k] -= f * aug[c][k];
      }
    }
    RationalVector y(d);
    for (std::size_t r = 0; r < d; ++r) y[r] = aug[r][d];
    Ray ray{primitive(y), Bits(m)};
    for (std::size_t b = 0; b < d; ++b) {
      if (b != j) ray.zero.set(basis[b]);
    }
    rays.push_back(std::move(ray));
  }

  Bits processed(m);
  for (std::size_t b : basis) processed.set(b);

  for (std::size_t i = 0; i < m; ++i) {
    if (processed.test(i)) continue;
    processed.set(i);
    std::vector<Rational> value(rays.size());
    std::vector<std::size_t> pos, neg;
    std::vector<Ray> next;
    for (std::size_t k = 0; k < rays.size(); ++k) {
      value[k] = dot(rows[i], rays[k].v);
      const int s = sign_of(value[k]);
      if (s > 0) pos.push_back(k);
      if (s < 0) neg.push_back(k);
      if (s >= 0) {
        Ray r = rays[k];
        if (s == 0) r.zero.set(i);
        next.push_back(std::move(r));
      }
    }
    for (std::size_t p : pos) {
      for (std::size_t q : neg) {
        const Bits common = rays[p].zero & rays[q].zero;
        if (common.count() + 2 < d) continue;
        bool adjacent = true;
        for (std::size_t k = 0; k < rays.size() && adjacent; ++k) {
          if (k == p || k == q) continue;
          if (common.is_subset_of(rays[k].zero)) adjacent = false;
        }
        if (!adjacent) continue;
        RationalVector v(d);
        for (std::size_t c = 0; c < d; ++c) {
          v[c] = value[p] * rays[q].v[c] - value[q] * rays[p].v[c];
        }
        Ray r{primitive(v), common};
        r.zero.set(i);
        next.push_back(std::move(r));
      }
    }
    rays = std::move(next);
    if (rays.empty()) break;
  }

  std::vector<RationalVector> out;
  out.reserve(rays.size());
  for (auto& r : rays) out.push_back(std::move(r.v));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void pull(const std::vector<std::size_t>& face, std::size_t dim,
          const std::vector<RationalVector>& rays,
          const std::vector<Bits>& tight, std::size_t n_rows,
          std::vector<std::size_t>& stack,
          std::vector<std::vector<std::size_t>>& out) {
  if (face.size() == dim) {
    std::vector<std::size_t> simplex(stack);
    simplex.insert(simplex.end(), face.begin(), face.end());
    out.push_back(std::move(simplex));
    return;
  }
  // Rays are sorted, so the smallest index is lexicographically smallest.
  const std::size_t apex = *std::min_element(face.begin(), face.end());
  std::vector<std::vector<std::size_t>> facets;
  for (std::size_t row = 0; row < n_rows; ++row) {
    std::vector<std::size_t> g;
    for (std::size_t k : face) {
      if (tight[k].test(row)) g.push_back(k);
    }
    if (g.size() + 1 < dim || g.size() == face.size()) continue;
    if (std::find(g.begin(), g.end(), apex) != g.end()) continue;
    if (std::find(facets.begin(), facets.end(), g) != facets.end()) continue;
    std::vector<RationalVector> vecs;
    for (std::size_t k : g) vecs.push_back(rays[k]);
    if (rank_of(vecs) != dim - 1) continue;
    facets.push_back(std::move(g));
  }
  stack.push_back(apex);
  for (const auto& g : facets) pull(g, dim - 1, rays, tight, n_rows, stack, out);
  stack.pop_back();
}

}  // namespace

std::vector<std::vector<RationalVector>> triangulate_cone(
    const std::vector<RationalVector>& input_rays,
    const std::vector<RationalVector>& rows) {
  if (input_rays.empty()) return {};
  std::vector<RationalVector> rays(input_rays);
  std::sort(rays.begin(), rays.end());
  const std::size_t dim = rank_of(rays);
  std::vector<Bits> tight(rays.size(), Bits(rows.size()));
  for (std::size_t k = 0; k < rays.size(); ++k) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (dot(rows[r], rays[k]) == 0) tight[k].set(r);
    }
  }
  std::vector<std::size_t> face(rays.size());
  std::iota(face.begin(), face.end(), 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> simplices;
  pull(face, dim, rays, tight, rows.size(), stack, simplices);

  std::vector<std::vector<RationalVector>> out;
  out.reserve(simplices.size());
  for (const auto& s : simplices) {
    std::vector<RationalVector> cone;
    for (std::size_t k : s) cone.push_back(rays[k]);
    out.push_back(std::move(cone));
  }
  return out;
}

}  // namespace troquad

namespace troquad {

std::vector<RationalVector> polytope_vertices(std::vector<RationalVector> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 1) return pts;
  const std::size_t n = pts.front().size();

  // Coordinates on which the projection of the affine hull is injective: the
  // pivot columns of the difference matrix.
  std::vector<RationalVector> m;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    RationalVector d(n);
    for (std::size_t c = 0; c < n; ++c) d[c] = pts[i][c] - pts[0][c];
    m.push_back(std::move(d));
  }
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t c = 0; c < n && row < m.size(); ++c) {
    std::size_t p = row;
    while (p < m.size() && m[p][c] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[row]);
    for (std::size_t r = row + 1; r < m.size(); ++r) {
      if (m[r][c] == 0) continue;
      const Rational f = m[r][c] / m[row][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[row][k];
    }
    pivots.push_back(c);
    ++row;
  }
  const std::size_t k = pivots.size();
  if (k == 0) return {pts.front()};

  std::vector<RationalVector> proj;
  for (const auto& p : pts) {
    RationalVector v;
    for (std::size_t c : pivots) v.push_back(p[c]);
    proj.push_back(std::move(v));
  }
  std::vector<RationalVector> out;
  for (std::size_t i = 0; i < proj.size(); ++i) {
    std::vector<RationalVector> rows;
    for (std::size_t j = 0; j < proj.size(); ++j) {
      if (j == i) continue;
      RationalVector r(k);
      for (std::size_t c = 0; c < k; ++c) r[c] = proj[i][c] - proj[j][c];
      rows.push_back(std::move(r));
    }
    const auto rays = extreme_rays(rows);
    if (rays.size() >= k && rank_of(rays) == k) out.push_back(pts[i]);
  }
  return out;
}

}  // namespace troquad
