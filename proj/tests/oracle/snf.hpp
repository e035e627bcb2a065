#pragma once

// Test-only homology oracle: relative simplicial homology H_q(K, L) over the
// integers by Smith normal form of the boundary matrices. It builds its own
// faces and orientations from the cell list and shares no code with the
// library.

#include <cstdint>
#include <vector>

namespace oracle {

using IntMatrix = std::vector<std::vector<std::int64_t>>;

/// Nonzero diagonal entries of the Smith normal form (positive, each
/// dividing the next).
std::vector<std::int64_t> smith_diagonal(IntMatrix m);

struct RelativeHomology {
  std::vector<long> betti;                   // rank of H_q(K, L), q = 0..dim
  std::vector<std::vector<std::int64_t>> torsion;  // torsion coefficients of H_q(K, L)
};

/// K: the complex generated by `cells` (each dim+1 vertex indices).
/// L: the closure of `subcomplex_facets` (each dim vertex indices).
RelativeHomology relative_homology(int dim, const std::vector<std::vector<int>>& cells,
                                   const std::vector<std::vector<int>>& subcomplex_facets);

/// Betti numbers of H_q(K, L) from ranks over GF(p) with sparse
/// elimination; for complexes too large for the dense Smith form.
/// Agrees with relative_homology() whenever the homology has no p-torsion.
std::vector<long> relative_betti_mod_p(int dim, const std::vector<std::vector<int>>& cells,
                                       const std::vector<std::vector<int>>& subcomplex_facets);

}  // namespace oracle
