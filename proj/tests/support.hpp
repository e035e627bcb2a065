#pragma once

// Random instances shared by the test binaries.

#include <random>

#include "hct/regular.hpp"

namespace hct::testing {

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

/// SPD with eigenvalues roughly in [0.5, 0.5 + 2 dim].
inline Matrix random_gram(Index dim, std::mt19937_64& rng) {
  const Matrix m = gaussian(dim, dim, rng);
  return m.transpose() * m / 2.0 + 0.5 * Matrix::Identity(dim, dim);
}

inline Matrix low_rank(Index rows, Index cols, Index rank, std::mt19937_64& rng) {
  return gaussian(rows, rank, rng) * gaussian(rank, cols, rng);
}

struct RandomComplexShape {
  Index n0 = 4, n1 = 7, n2 = 5;
  Index r0 = 2, r1 = 3;  // ranks of A0 and A1; r0 + r1 <= n1
};

/// H0 -> H1 -> H2 with random Gram metrics and A1 A0 = 0 exactly up to
/// rounding; the cohomology has dimension n1 - r0 - r1.
inline ComplexPair random_complex(const RandomComplexShape& s, std::mt19937_64& rng) {
  auto h0 = InnerProductSpace::create(random_gram(s.n0, rng), "H0");
  auto h1 = InnerProductSpace::create(random_gram(s.n1, rng), "H1");
  auto h2 = InnerProductSpace::create(random_gram(s.n2, rng), "H2");
  const Matrix a0 = low_rank(s.n1, s.n0, s.r0, rng);
  Matrix a1 = Matrix::Zero(s.n2, s.n1);
  if (s.r1 > 0) {
    // Rows of A1 annihilate R(A0).
    const Matrix q = column_space(a0);
    const Matrix comp = null_space(q.transpose());
    a1 = gaussian(s.n2, s.r1, rng) * gaussian(s.r1, comp.cols(), rng) * comp.transpose();
  }
  return make_complex(BoundedOperator(h0, h1, a0), BoundedOperator(h1, h2, a1), 1e-10);
}

inline std::shared_ptr<const ComplexPair> shared(ComplexPair cp) {
  return std::make_shared<const ComplexPair>(std::move(cp));
}

}  // namespace hct::testing
