#pragma once

#include <span>
#include <vector>

#include "densitree/matrix.hpp"

namespace densitree {

struct Edge;

/// Edges of the Delaunay triangulation of the rows of `points` (d = 2 or 3).
///
/// Incremental Bowyer-Watson insertion in index order with exact predicates.
/// Cospherical ties are resolved by strict in-sphere conflict in that fixed
/// order, so the output is deterministic. Exact duplicates are not inserted;
/// each is joined to the first point with the same coordinates.
std::vector<Edge> delaunay_edges(const Matrix& points);

namespace predicates {

/// Sign of det[p1 - p0, ..., pd - p0] for d + 1 points of dimension d.
int orientation(std::span<const std::span<const double>> simplex);

/// Sign telling whether q lies strictly inside (+1), on (0) or outside (-1)
/// the circumsphere of a non-degenerate simplex. Orientation-independent.
int in_sphere(std::span<const std::span<const double>> simplex, std::span<const double> q);

}  // namespace predicates

}  // namespace densitree
