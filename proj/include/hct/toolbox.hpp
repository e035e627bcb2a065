#pragma once

// Finite-dimensional Hilbert complexes: spaces with Gram inner products,
// operators between them, their weighted adjoints, complex pairs
// H0 --A0--> H1 --A1--> H2 and everything derived from them (reduced
// constants, refined Helmholtz splittings, cohomology, end operators).
//
// In finite dimension every densely defined closed operator is a total
// bounded operator and every range is closed; closedness is therefore
// reported quantitatively as a rank gap sigma_min+ / rank_tolerance.

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hct/numeric.hpp"

namespace hct {

class InnerProductSpace {
 public:
  InnerProductSpace(Matrix gram, std::string label = {});

  static std::shared_ptr<const InnerProductSpace> create(Matrix gram, std::string label = {});
  static std::shared_ptr<const InnerProductSpace> euclidean(Index dim, std::string label = {});

  Index dim() const { return gram_.rows(); }
  const Matrix& gram() const { return gram_; }
  const GramFactor& factor() const { return factor_; }
  const std::string& label() const { return label_; }

  double inner(const Vector& x, const Vector& y) const { return x.dot(gram_ * y); }
  double norm(const Vector& x) const;

 private:
  Matrix gram_;
  GramFactor factor_;
  std::string label_;
};

using SpacePtr = std::shared_ptr<const InnerProductSpace>;

class BoundedOperator {
 public:
  BoundedOperator(SpacePtr domain, SpacePtr codomain, Matrix matrix);

  static BoundedOperator zero(SpacePtr domain, SpacePtr codomain);
  static BoundedOperator identity(SpacePtr space);

  const SpacePtr& domain() const { return domain_; }
  const SpacePtr& codomain() const { return codomain_; }
  const Matrix& matrix() const { return matrix_; }

  Vector operator()(const Vector& x) const;
  bool is_zero() const { return matrix_.size() == 0 || matrix_.isZero(0.0); }

 private:
  SpacePtr domain_;
  SpacePtr codomain_;
  Matrix matrix_;
};

/// A* = G0^{-1} A^T G1, so that <Ax, y>_1 = <x, A*y>_0.
BoundedOperator adjoint(const BoundedOperator& a);

/// outer * inner; the codomain of inner must be the domain of outer.
BoundedOperator compose(const BoundedOperator& outer, const BoundedOperator& inner);

WeightedSVD svd_of(const BoundedOperator& a, const SvdOptions& options = {});

/// Largest weighted singular value.
double operator_norm(const BoundedOperator& a);

enum class SubspaceKind { Kernel, Range, Cohomology, PreBasis, Other };

const char* to_string(SubspaceKind kind) noexcept;

/// Columns are orthonormal in the Gram metric of `space`.
struct SubspaceBasis {
  SpacePtr space;
  Matrix columns;
  SubspaceKind kind = SubspaceKind::Other;

  Index dim() const { return columns.cols(); }
};

/// Validates orthonormality (BasisNotOrthonormal) and shape.
SubspaceBasis make_basis(SpacePtr space, Matrix columns, SubspaceKind kind);

struct KernelRangeResult {
  SubspaceBasis kernel;
  SubspaceBasis range;
  Index rank = 0;
  WeightedSVD svd;
};

KernelRangeResult kernel_and_range(const BoundedOperator& a, double tol_factor = kDefaultTolFactor);

/// Gram-orthogonal projector onto span(basis).
BoundedOperator projector(const SubspaceBasis& basis);

/// (A restricted to N(A)^perp)^{-1} on R(A), extended by zero.
BoundedOperator pseudoinverse(const BoundedOperator& a, double tol_factor = kDefaultTolFactor);

/// Best constant of ||x|| <= c ||Ax|| on N(A)^perp. A zero operator has no
/// reduced part; c is then +infinity and has_reduced_part is false.
struct ReducedConstant {
  double c = std::numeric_limits<double>::infinity();
  double sigma_min_positive = 0.0;
  bool has_reduced_part = false;
  Index rank = 0;
  /// sigma_min+ / rank_tolerance; +infinity when the tolerance is 0.
  double rank_gap = std::numeric_limits<double>::infinity();
};

ReducedConstant reduced_constant(const BoundedOperator& a, double tol_factor = kDefaultTolFactor);
ReducedConstant reduced_constant(const WeightedSVD& svd);

class ComplexPair {
 public:
  const BoundedOperator& a0() const { return a0_; }
  const BoundedOperator& a1() const { return a1_; }
  const SpacePtr& h0() const { return a0_.domain(); }
  const SpacePtr& h1() const { return a0_.codomain(); }
  const SpacePtr& h2() const { return a1_.codomain(); }
  /// ||A1 A0|| / (||A1|| ||A0||), 0 when either factor vanishes.
  double composition_residual() const { return composition_residual_; }
  /// Same for the dual pair: ||A0* A1*|| / (||A0*|| ||A1*||).
  double dual_residual() const { return dual_residual_; }

 private:
  friend ComplexPair make_complex(BoundedOperator a0, BoundedOperator a1, double tol);
  ComplexPair(BoundedOperator a0, BoundedOperator a1) : a0_(std::move(a0)), a1_(std::move(a1)) {}

  BoundedOperator a0_;
  BoundedOperator a1_;
  double composition_residual_ = 0.0;
  double dual_residual_ = 0.0;
};

/// Throws ShapeMismatch when codomain(A0) != domain(A1) and
/// ComplexPropertyViolated when either residual exceeds tol.
ComplexPair make_complex(BoundedOperator a0, BoundedOperator a1, double tol = 1e-10);

/// H2 --A1*--> H1 --A0*--> H0.
ComplexPair dual_complex(const ComplexPair& cp);

/// H1 = R(A0) (+) N01 (+) R(A1*), all sums Gram-orthogonal.
struct HelmholtzSplit {
  SubspaceBasis range;     // R(A0)
  SubspaceBasis harmonic;  // N01 = N(A1) cap N(A0*)
  SubspaceBasis corange;   // R(A1*)
  BoundedOperator p_range;
  BoundedOperator p_harmonic;
  BoundedOperator p_corange;
  /// max |P_R + P_H + P_C - I| entrywise.
  double sum_residual = 0.0;
  /// max over pairwise products P_i P_j, i != j, entrywise.
  double cross_residual = 0.0;
  /// max over i of |G P_i - P_i^T G| entrywise, relative to max |G|.
  double self_adjoint_residual = 0.0;
  /// dim N01 from the kernel of A0 A0* + A1* A1 (cross-check).
  Index harmonic_dim_hodge = 0;
  ReducedConstant a0_constant;
  ReducedConstant a1_constant;
};

HelmholtzSplit refined_helmholtz(const ComplexPair& cp, double tol_factor = kDefaultTolFactor);

struct ElementSplit {
  Vector range_part;
  Vector harmonic_part;
  Vector corange_part;
  /// max |<x_i, x_j>| / ||x||^2 over distinct parts.
  double orthogonality_residual = 0.0;
  /// ||x - sum of parts|| / ||x||.
  double reconstruction_residual = 0.0;
};

ElementSplit decompose_element(const HelmholtzSplit& split, const Vector& x);
ElementSplit decompose_element(const ComplexPair& cp, const Vector& x);

struct MiniFatReport {
  bool ranges_closed = true;
  double rank_gap_a0 = 0.0;
  double rank_gap_a1 = 0.0;
  Index cohomology_dim = 0;
  Index cohomology_dim_hodge = 0;
  ReducedConstant a0;
  ReducedConstant a1;
  /// Constants of the adjoints from their own SVDs.
  double c_a0_adjoint = 0.0;
  double c_a1_adjoint = 0.0;
  double helmholtz_sum_residual = 0.0;
  double helmholtz_cross_residual = 0.0;
  /// min over samples of (c0^2 |A0* y|^2 + c1^2 |A1 y|^2 - |y|^2) / |y|^2.
  double combined_estimate_margin = 0.0;
  int samples = 0;
  /// Compactness holds trivially in finite dimension.
  bool compactness_vacuous = true;
  bool passed = false;
};

MiniFatReport mini_fat(const ComplexPair& cp, std::uint64_t seed, int samples = 100,
                       double tol_factor = kDefaultTolFactor);

/// End operators of a long complex: iota_left embeds N(A_first), pi_left is
/// its adjoint, pi_right projects onto coordinates of N(A_last*) and
/// iota_right is its adjoint.
struct LongComplexEnds {
  BoundedOperator iota_left;
  BoundedOperator pi_left;
  BoundedOperator pi_right;
  BoundedOperator iota_right;
  /// Cohomology of the extended complex at K_left, H_first, H_last, K_right.
  std::array<Index, 4> end_cohomology{};
  /// |iota pi - projector onto the kernel| at both ends, entrywise.
  double left_projector_residual = 0.0;
  double right_projector_residual = 0.0;
};

LongComplexEnds long_complex_ends(const std::vector<BoundedOperator>& chain, double tol = 1e-10);

/// Deterministic Gaussian samples in H (Euclidean coordinates).
Matrix random_samples(Index dim, int count, std::uint64_t seed);

/// Mixes a base seed with a stream id (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hct
