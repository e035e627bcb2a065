#pragma once

// Regular decompositions and regular potentials of a complex pair, the
// projector algebra they induce, pre-bases of the cohomology and the
// three-term decompositions built from them.
//
// A "regular subspace" has no intrinsic meaning in finite dimension. It is
// modelled as a caller-designated subspace of H1 (default: all of H1), and
// boundedness constants are reported as computed operator norms.

#include <optional>

#include "hct/toolbox.hpp"

namespace hct {

/// Q1 + A0 Q0 = id on H1.
struct RegularDecomposition {
  std::shared_ptr<const ComplexPair> complex;
  Matrix q1;  // H1 -> H1
  Matrix q0;  // H1 -> H0
  /// G1-orthonormal basis of the designated regular subspace of H1.
  Matrix regular_basis;
  /// max |Q1 + A0 Q0 - I| entrywise.
  double residual = 0.0;
  double q1_norm = 0.0;
  double q0_norm = 0.0;
};

/// Validates the identity (DecompositionResidualTooLarge above tol) and
/// that range(Q1) lies in the regular subspace.
RegularDecomposition make_regular_decomposition(std::shared_ptr<const ComplexPair> cp, Matrix q1, Matrix q0,
                                                std::optional<Matrix> regular_basis = std::nullopt,
                                                double tol = 1e-10);

/// Q1 = id, Q0 = 0 with H1+ = H1.
RegularDecomposition trivial_decomposition(std::shared_ptr<const ComplexPair> cp);

/// A right inverse of `target` on its range: target * P = id on R(target).
/// P is stored as a map on the whole codomain of the target (it need only
/// be meaningful on R(target)).
struct PotentialOperator {
  BoundedOperator target;
  Matrix p;              // dim(domain) x dim(codomain) of target
  Matrix range_basis;    // Gram-orthonormal basis of R(target)
  double residual = 0.0; // max |target P r - r| over the range basis, entrywise

  Vector operator()(const Vector& r) const { return p * r; }
};

/// Checks target * P = id on R(target) within tol (DecompositionResidualTooLarge).
PotentialOperator make_potential(const BoundedOperator& target, Matrix p, double tol = 1e-10);

/// The weighted pseudoinverse as a potential.
PotentialOperator pseudoinverse_potential(const BoundedOperator& target);

/// P := Q1 (A1 reduced)^{-1}. Throws NoReducedPart when A1 = 0.
PotentialOperator potential_from_decomposition(const RegularDecomposition& rd);

/// Q~ := P A1, N~ := id - Q~.
struct WeakDecomposition {
  Matrix q_tilde;
  Matrix n_tilde;
};

WeakDecomposition decomposition_from_potential(const PotentialOperator& p);

struct ProjectorDiagnostics {
  double q_idempotence = 0.0;   // |Q^2 - Q|
  double n_idempotence = 0.0;   // |N^2 - N|
  double qn = 0.0;              // |Q N|
  double nq = 0.0;              // |N Q|
  double sum = 0.0;             // |Q + N - I|
  double i_minus_square = 0.0;  // |(Q - N)^2 - I|
  /// Smallest singular value of I- = 2Q - I, measured in the Gram metric
  /// when one is given. Equals 1 for Gram-orthogonal Q; below 1 for oblique Q.
  double i_minus_margin = 0.0;
  bool passed = false;  // all identity residuals <= tol
};

ProjectorDiagnostics projector_diagnostics(const Matrix& q_tilde, const Matrix& n_tilde, double tol = 1e-9,
                                           const GramFactor* metric = nullptr);

/// For an exact pair (N01 = {0}): Q1 = P_A1 A1, Q0 = P_A0 N~. Throws NotExact.
RegularDecomposition exact_decomposition(std::shared_ptr<const ComplexPair> cp, const PotentialOperator& p_a1,
                                         const PotentialOperator& p_a0);

/// Rank evidence for directness of an exact decomposition.
struct DirectnessReport {
  Index rank_q1 = 0;
  Index dim_kernel_a1 = 0;
  Index rank_union = 0;
  bool direct = false;
};

DirectnessReport exact_directness(const RegularDecomposition& rd);

/// |‖x‖^2 - <x, p1> - <A0* x, p0>| / ‖x‖^2 for x = p1 + A0 p0.
/// Throws DecompositionMismatch when x differs from p1 + A0 p0 by more than 1e-10 relative.
double pairing_identity(const ComplexPair& cp, const Vector& x, const Vector& p1, const Vector& p0);

/// Kernel elements of A1 whose harmonic projections form a basis of N01,
/// together with I_H (B-coordinates -> harmonic coordinates).
struct PreBasis {
  std::shared_ptr<const ComplexPair> complex;
  Matrix columns;    // B, in N(A1)
  Matrix harmonic;   // G1-orthonormal basis of N01
  Matrix i_h;        // harmonic^T G1 pi_delta B, square
  double condition = 1.0;
};

/// With no candidates the harmonic basis itself is used ("auto" mode).
/// Throws NotAPreBasis if a candidate leaves N(A1) or the projections are
/// rank-deficient.
PreBasis build_prebasis(std::shared_ptr<const ComplexPair> cp, const std::optional<Matrix>& candidates = {});

struct ThreeTermSplit {
  Vector x1;  // Q^_1 x = P_A1 A1 x
  Vector xb;  // Q^_inf x, in span(B)
  Vector p0;  // Q^_0 x, with A0 p0 the potential part
  Vector b_coords;
  double reconstruction_residual = 0.0;  // |x - x1 - xb - A0 p0| / |x|
};

/// The three decomposition operators as matrices.
struct ThreeTermOperators {
  Matrix q1;    // H1 -> H1
  Matrix qinf;  // H1 -> H1, range in span(B)
  Matrix q0;    // H1 -> H0
  /// max |Q1 + Qinf + A0 Q0 - I| entrywise.
  double identity_residual = 0.0;
};

ThreeTermOperators three_term_operators(const ComplexPair& cp, const PotentialOperator& p_a1,
                                        const PotentialOperator& p_a0, const PreBasis& pb);

ThreeTermSplit three_term_decomposition(const ComplexPair& cp, const PotentialOperator& p_a1,
                                        const PotentialOperator& p_a0, const PreBasis& pb, const Vector& x);

struct AlternativeProjectionReport {
  /// dim(N01 cap span(B_d)^perp), expected 0.
  Index harmonic_perp_d = 0;
  /// dim(N01 cap span(B_delta)^perp), expected 0.
  Index harmonic_perp_delta = 0;
  /// N(A1) cap span(B_delta)^perp == R(A0).
  bool kernel_equals_range = false;
  /// N(A0*) cap span(B_d)^perp == R(A1*).
  bool cokernel_equals_corange = false;
  Index dim_kernel_perp = 0;
  Index dim_range_a0 = 0;
  Index dim_cokernel_perp = 0;
  Index dim_range_a1s = 0;
  bool passed = false;
};

/// pb_d: pre-basis of the pair; pb_delta: pre-basis of the dual pair
/// (columns in N(A0*)).
AlternativeProjectionReport alternative_projection_check(const ComplexPair& cp, const PreBasis& pb_d,
                                                         const PreBasis& pb_delta);

}  // namespace hct
