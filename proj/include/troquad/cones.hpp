#pragma once

#include <cstddef>
#include <vector>

#include "troquad/rational.hpp"

namespace troquad {

/// Rank of a list of rational vectors.
std::size_t rank_of(const std::vector<RationalVector>& rows);

/// Determinant of a square rational matrix given by rows.
Rational determinant(std::vector<RationalVector> rows);

/// Scales a nonzero vector to the primitive integer vector on its ray.
RationalVector primitive(const RationalVector& v);

/// Extreme rays of the polyhedral cone {y : <a_i, y> >= 0 for all rows a_i},
/// by the double description method. Requires the rows to span the space
/// (pointed cone); returns an empty list for the trivial cone {0}.
std::vector<RationalVector> extreme_rays(const std::vector<RationalVector>& rows);

/// Vertices of the convex hull of a point set of any dimension.
std::vector<RationalVector> polytope_vertices(std::vector<RationalVector> points);

/// Simplicial cones (as lists of rays) triangulating the cone spanned by
/// `rays`, whose facets are cut out by `rows`. Pulling triangulation from the
/// lexicographically smallest ray, applied recursively to faces.
std::vector<std::vector<RationalVector>> triangulate_cone(
    const std::vector<RationalVector>& rays,
    const std::vector<RationalVector>& rows);

}  // namespace troquad
