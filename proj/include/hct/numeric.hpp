#pragma once

// Gram-metric dense linear algebra: whitening, weighted SVD, projectors and
// pseudoinverses. Every basis returned here is orthonormal in the metric of
// the space it lives in, not in the Euclidean one.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <string>

#include "hct/error.hpp"

namespace hct {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Largest space dimension that is densified for factorizations.
inline constexpr Index kMaxDenseDim = 20000;

/// Gram condition estimate above which a warning is emitted.
inline constexpr double kConditionWarning = 1e12;

/// Default multiplier of the rank cutoff tol_factor * sigma_max * eps * max(m, n).
inline constexpr double kDefaultTolFactor = 100.0;

/// Receives diagnostic warnings (ill-conditioned Grams and the like).
/// The default sink writes to stderr; pass an empty function to silence.
void set_warning_sink(std::function<void(const std::string&)> sink);
void warn(const std::string& message);

/// Cholesky factor of an SPD Gram matrix, G = L * L^T.
struct GramFactor {
  Index space_dim = 0;
  Matrix lower_factor;
  /// (max L_ii / min L_ii)^2, a cheap lower bound for cond(G).
  double condition_estimate = 1.0;

  /// L^T x: Euclidean coordinates in which the Gram metric becomes the identity.
  Matrix whiten(const Matrix& x) const;
  /// L^{-T} y: inverse of whiten().
  Matrix unwhiten(const Matrix& y) const;
  /// G^{-1} b.
  Matrix solve(const Matrix& b) const;
};

/// Factor an SPD matrix. Throws NotSymmetric (relative asymmetry above 1e-12)
/// or NotPositiveDefinite (non-positive pivot).
GramFactor cholesky_whiten(const Matrix& gram);

struct SvdOptions {
  double tol_factor = kDefaultTolFactor;
  bool compute_vectors = true;
};

/// A = U * diag(sigma) * V^T * G0 with U^T G1 U = I and V^T G0 V = I.
/// When vectors are requested the bases are square (full), so the trailing
/// columns of U and V span N(A*) and N(A) respectively.
struct WeightedSVD {
  Matrix left_basis;
  Vector singular_values;
  Matrix right_basis;
  double rank_tolerance = 0.0;

  Index rank() const;
  double sigma_max() const;
  /// Smallest singular value above rank_tolerance, or 0 if rank() == 0.
  double sigma_min_positive() const;
};

WeightedSVD weighted_svd(const Matrix& a, const GramFactor& domain, const GramFactor& codomain,
                         const SvdOptions& options = {});
WeightedSVD weighted_svd(const Matrix& a, const Matrix& domain_gram, const Matrix& codomain_gram,
                         const SvdOptions& options = {});

struct KernelRange {
  Matrix kernel;  // dim(H0) x (dim H0 - rank), G0-orthonormal
  Matrix range;   // dim(H1) x rank, G1-orthonormal
  Index rank = 0;
};

/// Requires an SVD computed with vectors.
KernelRange kernel_range_bases(const WeightedSVD& svd);

/// Returns true if basis^T G basis = I within tol.
bool is_gram_orthonormal(const Matrix& basis, const Matrix& gram, double tol = 1e-10);

/// P = B B^T G. Throws BasisNotOrthonormal.
Matrix orthogonal_projector(const Matrix& basis, const Matrix& gram);

/// Weighted Moore-Penrose inverse: (A restricted to N(A)^perp)^{-1} on R(A),
/// extended by zero on R(A)^perp.
Matrix weighted_pseudoinverse(const Matrix& a, const Matrix& domain_gram, const Matrix& codomain_gram,
                              double tol_factor = kDefaultTolFactor);
Matrix weighted_pseudoinverse(const WeightedSVD& svd, const GramFactor& codomain);

/// Singular values of A in the (G0, G1) metrics from the generalized
/// eigenproblem A^T G1 A v = s^2 G0 v, ascending. Values only; used for
/// spaces too large for a dense SVD. Kernel detection works at sqrt(eps)
/// resolution, so rank_tolerance is reported for the squared values.
struct NormalSpectrum {
  Vector singular_values;  // ascending
  double rank_tolerance = 0.0;
  Index kernel_dim = 0;
  double sigma_min_positive = 0.0;
};

NormalSpectrum normal_spectrum(const SparseMatrix& a, const SparseMatrix& domain_gram,
                               const SparseMatrix& codomain_gram, double tol_factor = kDefaultTolFactor);

/// Orthonormalize the columns of `basis` in the G-metric into a canonical
/// representative of their span: reduced column echelon form on the lowest
/// entity indices, then Gram-Schmidt in pivot order with positive pivots.
/// The result depends only on span(basis), not on the input columns.
Matrix canonical_basis(const Matrix& basis, const Matrix& gram, double tol = 1e-9);

/// Relative Frobenius asymmetry ||G - G^T|| / ||G||.
double asymmetry(const Matrix& m);

/// Largest principal angle (radians) between two G-orthonormal bases of
/// subspaces of the same space; pi/2 if dimensions differ.
double max_subspace_angle(const Matrix& a, const Matrix& b, const Matrix& gram);

/// Stacks the columns of two bases and returns the numerical rank of the
/// union (Euclidean SVD, relative tolerance).
Index union_rank(const Matrix& a, const Matrix& b, double rel_tol = 1e-9);

/// Euclidean-orthonormal basis of the column space; singular values below
/// rel_tol * sigma_max (or below abs_floor) count as zero.
Matrix column_space(const Matrix& m, double rel_tol = 1e-9, double abs_floor = 0.0);

/// Euclidean-orthonormal basis of the null space, same cutoff rule.
Matrix null_space(const Matrix& m, double rel_tol = 1e-9, double abs_floor = 0.0);

}  // namespace hct
