#include "hct/regular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hct {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Matrix identity(Index n) { return Matrix::Identity(n, n); }

// Gram-orthonormal basis of the whole space.
Matrix full_basis(const InnerProductSpace& space) { return space.factor().unwhiten(identity(space.dim())); }

Index cohomology_dim(const ComplexPair& cp) {
  SvdOptions vals;
  vals.compute_vectors = false;
  const Index r0 = svd_of(cp.a0(), vals).rank();
  const Index r1 = svd_of(cp.a1(), vals).rank();
  return cp.h1()->dim() - r0 - r1;
}

void require_target(const PotentialOperator& p, const BoundedOperator& a, const char* what) {
  if (p.target.domain()->dim() != a.domain()->dim() || p.target.codomain()->dim() != a.codomain()->dim()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": potential does not match the operator");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

RegularDecomposition make_regular_decomposition(std::shared_ptr<const ComplexPair> cp, Matrix q1, Matrix q0,
                                                std::optional<Matrix> regular_basis, double tol) {
  if (!cp) throw Error(ErrorCode::InvalidArgument, "regular decomposition without a complex");
  const SpacePtr& h0 = cp->h0();
  const SpacePtr& h1 = cp->h1();
  const Index n1 = h1->dim();
  if (q1.rows() != n1 || q1.cols() != n1 || q0.rows() != h0->dim() || q0.cols() != n1) {
    throw Error(ErrorCode::ShapeMismatch, "decomposition operators have the wrong shape");
  }
  RegularDecomposition rd;
  rd.complex = cp;
  rd.regular_basis = regular_basis ? std::move(*regular_basis) : full_basis(*h1);
  if (rd.regular_basis.rows() != n1) throw Error(ErrorCode::ShapeMismatch, "regular basis does not live in H1");
  if (!is_gram_orthonormal(rd.regular_basis, h1->gram())) {
    throw Error(ErrorCode::BasisNotOrthonormal, "regular basis");
  }
  rd.residual = max_abs(q1 + cp->a0().matrix() * q0 - identity(n1));
  if (rd.residual > tol) {
    throw Error(ErrorCode::DecompositionResidualTooLarge, "|Q1 + A0 Q0 - I| = " + fmt(rd.residual));
  }
  const Matrix off = q1 - orthogonal_projector(rd.regular_basis, h1->gram()) * q1;
  const double scale = std::max(1.0, max_abs(q1));
  if (max_abs(off) > tol * scale) {
    throw Error(ErrorCode::DecompositionResidualTooLarge, "range of Q1 leaves the regular subspace");
  }
  rd.q1 = std::move(q1);
  rd.q0 = std::move(q0);
  rd.q1_norm = operator_norm(BoundedOperator(h1, h1, rd.q1));
  rd.q0_norm = operator_norm(BoundedOperator(h1, h0, rd.q0));
  return rd;
}

RegularDecomposition trivial_decomposition(std::shared_ptr<const ComplexPair> cp) {
  if (!cp) throw Error(ErrorCode::InvalidArgument, "regular decomposition without a complex");
  const Index n1 = cp->h1()->dim();
  return make_regular_decomposition(cp, identity(n1), Matrix::Zero(cp->h0()->dim(), n1));
}

PotentialOperator make_potential(const BoundedOperator& target, Matrix p, double tol) {
  const Index n1 = target.domain()->dim();
  const Index n2 = target.codomain()->dim();
  if (p.rows() != n1 || p.cols() != n2) throw Error(ErrorCode::ShapeMismatch, "potential has the wrong shape");
  KernelRangeResult kr = kernel_and_range(target);
  PotentialOperator out{target, std::move(p), std::move(kr.range.columns), 0.0};
  const Matrix& r = out.range_basis;
  if (r.cols() > 0) {
    out.residual = max_abs(target.matrix() * out.p * r - r) / std::max(max_abs(r), 1e-300);
  }
  if (out.residual > tol) {
    throw Error(ErrorCode::DecompositionResidualTooLarge, "|A P r - r| = " + fmt(out.residual));
  }
  return out;
}

PotentialOperator pseudoinverse_potential(const BoundedOperator& target) {
  return make_potential(target, pseudoinverse(target).matrix(), 1e-9);
}

PotentialOperator potential_from_decomposition(const RegularDecomposition& rd) {
  const BoundedOperator& a1 = rd.complex->a1();
  if (a1.is_zero()) throw Error(ErrorCode::NoReducedPart, "A1 = 0 has no reduced part to invert");
  const BoundedOperator a1_pinv = pseudoinverse(a1);
  if (a1_pinv.is_zero()) throw Error(ErrorCode::NoReducedPart, "A1 has numerical rank 0");
  return make_potential(a1, rd.q1 * a1_pinv.matrix(), 1e-9);
}

WeakDecomposition decomposition_from_potential(const PotentialOperator& p) {
  const Index n1 = p.target.domain()->dim();
  WeakDecomposition out;
  out.q_tilde = p.p * p.target.matrix();
  out.n_tilde = identity(n1) - out.q_tilde;
  return out;
}

ProjectorDiagnostics projector_diagnostics(const Matrix& q, const Matrix& n, double tol, const GramFactor* metric) {
  const Index dim = q.rows();
  if (q.cols() != dim || n.rows() != dim || n.cols() != dim) {
    throw Error(ErrorCode::ShapeMismatch, "projector diagnostics need two square operators of equal size");
  }
  if (metric && metric->space_dim != dim) throw Error(ErrorCode::ShapeMismatch, "metric does not match operators");
  const Matrix id = identity(dim);
  ProjectorDiagnostics d;
  d.q_idempotence = max_abs(q * q - q);
  d.n_idempotence = max_abs(n * n - n);
  d.qn = max_abs(q * n);
  d.nq = max_abs(n * q);
  d.sum = max_abs(q + n - id);
  const Matrix qmn = q - n;
  d.i_minus_square = max_abs(qmn * qmn - id);
  if (dim == 0) {
    d.i_minus_margin = 1.0;
  } else {
    Matrix i_minus = 2.0 * q - id;
    if (metric) {
      // L^T M L^{-T}: the same operator in whitened coordinates.
      const Matrix m_lt = metric->lower_factor.triangularView<Eigen::Lower>().solve(i_minus.transpose()).transpose();
      i_minus = metric->whiten(m_lt);
    }
    Eigen::BDCSVD<Matrix> svd(i_minus);
    d.i_minus_margin = svd.singularValues().minCoeff();
  }
  d.passed = std::max({d.q_idempotence, d.n_idempotence, d.qn, d.nq, d.sum, d.i_minus_square}) <= tol;
  return d;
}

RegularDecomposition exact_decomposition(std::shared_ptr<const ComplexPair> cp, const PotentialOperator& p_a1,
                                         const PotentialOperator& p_a0) {
  if (!cp) throw Error(ErrorCode::InvalidArgument, "exact decomposition without a complex");
  require_target(p_a1, cp->a1(), "exact decomposition");
  require_target(p_a0, cp->a0(), "exact decomposition");
  const Index k = cohomology_dim(*cp);
  if (k > 0) {
    throw Error(ErrorCode::NotExact, "cohomology has dimension " + std::to_string(k) +
                                         "; use the three-term decomposition");
  }
  const WeakDecomposition w = decomposition_from_potential(p_a1);
  Matrix q0 = p_a0.p * w.n_tilde;
  return make_regular_decomposition(cp, w.q_tilde, std::move(q0), std::nullopt, 1e-9);
}

DirectnessReport exact_directness(const RegularDecomposition& rd) {
  const BoundedOperator& a1 = rd.complex->a1();
  const KernelRangeResult kr = kernel_and_range(a1);
  const Matrix range_q1 = column_space(rd.q1, 1e-9);
  DirectnessReport out;
  out.rank_q1 = range_q1.cols();
  out.dim_kernel_a1 = kr.kernel.dim();
  out.rank_union = union_rank(range_q1, kr.kernel.columns);
  out.direct = out.rank_union == out.rank_q1 + out.dim_kernel_a1;
  return out;
}

double pairing_identity(const ComplexPair& cp, const Vector& x, const Vector& p1, const Vector& p0) {
  const InnerProductSpace& h0 = *cp.h0();
  const InnerProductSpace& h1 = *cp.h1();
  if (x.size() != h1.dim() || p1.size() != h1.dim() || p0.size() != h0.dim()) {
    throw Error(ErrorCode::ShapeMismatch, "pairing identity arguments have the wrong size");
  }
  const Vector a0p0 = cp.a0().matrix() * p0;
  const double scale = std::max({h1.norm(x), h1.norm(p1), h1.norm(a0p0)});
  if (scale == 0.0) return 0.0;
  const double mismatch = h1.norm(x - p1 - a0p0) / scale;
  if (mismatch > 1e-10) {
    throw Error(ErrorCode::DecompositionMismatch, "x differs from p1 + A0 p0 by " + fmt(mismatch));
  }
  const double xx = h1.inner(x, x);
  if (xx == 0.0) return 0.0;
  const Vector a0s_x = adjoint(cp.a0()).matrix() * x;
  return std::abs(xx - h1.inner(x, p1) - h0.inner(a0s_x, p0)) / xx;
}

PreBasis build_prebasis(std::shared_ptr<const ComplexPair> cp, const std::optional<Matrix>& candidates) {
  if (!cp) throw Error(ErrorCode::InvalidArgument, "pre-basis without a complex");
  const HelmholtzSplit split = refined_helmholtz(*cp);
  const InnerProductSpace& h1 = *cp->h1();
  const Matrix& g = h1.gram();
  const Index n1 = h1.dim();
  const Index k = split.harmonic.dim();

  PreBasis pb;
  pb.complex = cp;
  pb.harmonic = split.harmonic.columns;
  pb.columns = candidates ? *candidates : pb.harmonic;
  const Matrix& b = pb.columns;
  if (b.rows() != n1) throw Error(ErrorCode::ShapeMismatch, "pre-basis candidates do not live in H1");
  if (b.cols() != k) {
    throw Error(ErrorCode::NotAPreBasis, std::to_string(b.cols()) + " candidates for a cohomology of dimension " +
                                             std::to_string(k));
  }

  const BoundedOperator& a1 = cp->a1();
  const double a1_norm = operator_norm(a1);
  double col_scale = 0.0;
  for (Index j = 0; j < b.cols(); ++j) {
    const double nb = h1.norm(b.col(j));
    col_scale = std::max(col_scale, nb);
    const double na = cp->h2()->norm(a1.matrix() * b.col(j));
    if (na > 1e-9 * std::max(a1_norm, 1.0) * nb) {
      throw Error(ErrorCode::NotAPreBasis, "candidate " + std::to_string(j) + " is not in the kernel of A1");
    }
  }
  if (k == 0) {
    pb.i_h = Matrix(0, 0);
    return pb;
  }

  const Matrix pi_delta = identity(n1) - split.p_range.matrix();
  pb.i_h = pb.harmonic.transpose() * g * pi_delta * b;
  Eigen::JacobiSVD<Matrix> svd(pb.i_h);
  const Vector sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  if (smin <= 1e-8 * col_scale) {
    throw Error(ErrorCode::NotAPreBasis, "harmonic projections of the candidates are rank-deficient");
  }
  pb.condition = sv[0] / smin;
  return pb;
}

namespace {

// I_H^{-1} H^T G pi_delta: H1 -> B-coordinates.
Matrix coordinate_map(const ComplexPair& cp, const PreBasis& pb) {
  const Index n1 = cp.h1()->dim();
  if (pb.columns.cols() == 0) return Matrix(0, n1);
  const Matrix& g = cp.h1()->gram();
  const KernelRangeResult r0 = kernel_and_range(cp.a0());
  const Matrix pi_delta = identity(n1) - projector(r0.range).matrix();
  return pb.i_h.fullPivLu().solve(pb.harmonic.transpose() * g * pi_delta);
}

void require_prebasis(const ComplexPair& cp, const PreBasis& pb) {
  if (pb.columns.rows() != cp.h1()->dim() || pb.harmonic.rows() != cp.h1()->dim() ||
      pb.i_h.rows() != pb.columns.cols() || pb.i_h.cols() != pb.columns.cols()) {
    throw Error(ErrorCode::NotAPreBasis, "pre-basis does not belong to this complex");
  }
}

}  // namespace

ThreeTermOperators three_term_operators(const ComplexPair& cp, const PotentialOperator& p_a1,
                                        const PotentialOperator& p_a0, const PreBasis& pb) {
  require_target(p_a1, cp.a1(), "three-term decomposition");
  require_target(p_a0, cp.a0(), "three-term decomposition");
  require_prebasis(cp, pb);
  const Index n1 = cp.h1()->dim();
  const WeakDecomposition w = decomposition_from_potential(p_a1);
  ThreeTermOperators out;
  out.q1 = w.q_tilde;
  out.qinf = pb.columns * (coordinate_map(cp, pb) * w.n_tilde);
  out.q0 = p_a0.p * (w.n_tilde - out.qinf);
  out.identity_residual = max_abs(out.q1 + out.qinf + cp.a0().matrix() * out.q0 - identity(n1));
  return out;
}

ThreeTermSplit three_term_decomposition(const ComplexPair& cp, const PotentialOperator& p_a1,
                                        const PotentialOperator& p_a0, const PreBasis& pb, const Vector& x) {
  require_target(p_a1, cp.a1(), "three-term decomposition");
  require_target(p_a0, cp.a0(), "three-term decomposition");
  require_prebasis(cp, pb);
  const InnerProductSpace& h1 = *cp.h1();
  if (x.size() != h1.dim()) throw Error(ErrorCode::ShapeMismatch, "field does not live in H1");
  ThreeTermSplit out;
  out.x1 = p_a1.p * (p_a1.target.matrix() * x);
  const Vector nx = x - out.x1;
  out.b_coords = coordinate_map(cp, pb) * nx;
  out.xb = pb.columns * out.b_coords;
  out.p0 = p_a0.p * (nx - out.xb);
  const double nrm = h1.norm(x);
  const Vector rest = x - out.x1 - out.xb - cp.a0().matrix() * out.p0;
  out.reconstruction_residual = nrm == 0.0 ? h1.norm(rest) : h1.norm(rest) / nrm;
  return out;
}

AlternativeProjectionReport alternative_projection_check(const ComplexPair& cp, const PreBasis& pb_d,
                                                         const PreBasis& pb_delta) {
  const Matrix& g = cp.h1()->gram();
  const Index n1 = cp.h1()->dim();
  if (pb_d.columns.rows() != n1 || pb_delta.columns.rows() != n1) {
    throw Error(ErrorCode::ShapeMismatch, "pre-bases do not live in H1");
  }
  const HelmholtzSplit split = refined_helmholtz(cp);
  const Matrix& h = split.harmonic.columns;
  const KernelRangeResult k1 = kernel_and_range(cp.a1());
  const KernelRangeResult k0s = kernel_and_range(adjoint(cp.a0()));

  // Subspaces of the form span(S) cap span(B)^perp with S Gram-orthonormal:
  // S c with B^T G S c = 0. Entries of B^T G S are O(|B|), so an absolute
  // floor relative to the column scale separates zero from nonzero.
  auto restrict_perp = [&](const Matrix& s, const Matrix& b) -> Matrix {
    if (s.cols() == 0) return Matrix(n1, 0);
    if (b.cols() == 0) return s;
    double scale = 0.0;
    for (Index j = 0; j < b.cols(); ++j) scale = std::max(scale, std::sqrt(b.col(j).dot(g * b.col(j))));
    const Matrix c = b.transpose() * g * s;
    return s * null_space(c, 1e-9, 1e-9 * std::max(scale, 1e-300));
  };

  AlternativeProjectionReport rep;
  rep.harmonic_perp_d = restrict_perp(h, pb_d.columns).cols();
  rep.harmonic_perp_delta = restrict_perp(h, pb_delta.columns).cols();

  const Matrix kernel_perp = restrict_perp(k1.kernel.columns, pb_delta.columns);
  const Matrix range_a0 = split.range.columns;
  rep.dim_kernel_perp = kernel_perp.cols();
  rep.dim_range_a0 = range_a0.cols();
  rep.kernel_equals_range = rep.dim_kernel_perp == rep.dim_range_a0 &&
                            union_rank(kernel_perp, range_a0) == rep.dim_range_a0;

  const Matrix cokernel_perp = restrict_perp(k0s.kernel.columns, pb_d.columns);
  const Matrix range_a1s = split.corange.columns;
  rep.dim_cokernel_perp = cokernel_perp.cols();
  rep.dim_range_a1s = range_a1s.cols();
  rep.cokernel_equals_corange = rep.dim_cokernel_perp == rep.dim_range_a1s &&
                                union_rank(cokernel_perp, range_a1s) == rep.dim_range_a1s;

  rep.passed = rep.harmonic_perp_d == 0 && rep.harmonic_perp_delta == 0 && rep.kernel_equals_range &&
               rep.cokernel_equals_corange;
  return rep;
}

}  // namespace hct
