#include "hct/toolbox.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hct {

namespace {

void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what) {
  if (a == b) return;
  if (a->dim() != b->dim() || !(a->gram().array() == b->gram().array()).all()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": spaces differ");
  }
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Frobenius norm of A in the whitened coordinates of its spaces; an upper
// bound for the weighted operator norm.
double weighted_frobenius(const Matrix& a, const GramFactor& domain, const GramFactor& codomain) {
  if (a.size() == 0) return 0.0;
  const Matrix t = domain.lower_factor.triangularView<Eigen::Lower>().solve(a.transpose()).transpose();
  return codomain.whiten(t).norm();
}

GramFactor block_factor(const GramFactor& a, const GramFactor& b) {
  GramFactor f;
  f.space_dim = a.space_dim + b.space_dim;
  f.lower_factor = Matrix::Zero(f.space_dim, f.space_dim);
  f.lower_factor.topLeftCorner(a.space_dim, a.space_dim) = a.lower_factor;
  f.lower_factor.bottomRightCorner(b.space_dim, b.space_dim) = b.lower_factor;
  f.condition_estimate = std::max(a.condition_estimate, b.condition_estimate);
  return f;
}

double relative_composition(const BoundedOperator& outer, const BoundedOperator& inner) {
  const Matrix prod = outer.matrix() * inner.matrix();
  if (prod.size() == 0 || prod.isZero(0.0)) return 0.0;
  const double n_outer = operator_norm(outer);
  const double n_inner = operator_norm(inner);
  if (n_outer == 0.0 || n_inner == 0.0) return 0.0;
  const double num = weighted_frobenius(prod, inner.domain()->factor(), outer.codomain()->factor());
  return num / (n_outer * n_inner);
}

}  // namespace

InnerProductSpace::InnerProductSpace(Matrix gram, std::string label)
    : gram_(std::move(gram)), factor_(cholesky_whiten(gram_)), label_(std::move(label)) {}

std::shared_ptr<const InnerProductSpace> InnerProductSpace::create(Matrix gram, std::string label) {
  return std::make_shared<const InnerProductSpace>(std::move(gram), std::move(label));
}

std::shared_ptr<const InnerProductSpace> InnerProductSpace::euclidean(Index dim, std::string label) {
  return create(Matrix::Identity(dim, dim), std::move(label));
}

double InnerProductSpace::norm(const Vector& x) const { return std::sqrt(std::max(0.0, inner(x, x))); }

BoundedOperator::BoundedOperator(SpacePtr domain, SpacePtr codomain, Matrix matrix)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), matrix_(std::move(matrix)) {
  if (!domain_ || !codomain_) throw Error(ErrorCode::InvalidArgument, "operator needs both spaces");
  if (matrix_.rows() != codomain_->dim() || matrix_.cols() != domain_->dim()) {
    std::ostringstream os;
    os << "matrix is " << matrix_.rows() << "x" << matrix_.cols() << ", spaces have dims "
       << domain_->dim() << " -> " << codomain_->dim();
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
}

BoundedOperator BoundedOperator::zero(SpacePtr domain, SpacePtr codomain) {
  const Index m = codomain->dim();
  const Index n = domain->dim();
  return {std::move(domain), std::move(codomain), Matrix::Zero(m, n)};
}

BoundedOperator BoundedOperator::identity(SpacePtr space) {
  const Index n = space->dim();
  return {space, space, Matrix::Identity(n, n)};
}

Vector BoundedOperator::operator()(const Vector& x) const {
  if (x.size() != domain_->dim()) throw Error(ErrorCode::ShapeMismatch, "vector does not live in the domain");
  return matrix_ * x;
}

BoundedOperator adjoint(const BoundedOperator& a) {
  const Matrix rhs = a.matrix().transpose() * a.codomain()->gram();
  Matrix m = a.domain()->dim() > 0 ? a.domain()->factor().solve(rhs) : Matrix(0, a.codomain()->dim());
  return {a.codomain(), a.domain(), std::move(m)};
}

BoundedOperator compose(const BoundedOperator& outer, const BoundedOperator& inner) {
  require_same_space(inner.codomain(), outer.domain(), "compose");
  return {inner.domain(), outer.codomain(), outer.matrix() * inner.matrix()};
}

WeightedSVD svd_of(const BoundedOperator& a, const SvdOptions& options) {
  return weighted_svd(a.matrix(), a.domain()->factor(), a.codomain()->factor(), options);
}

double operator_norm(const BoundedOperator& a) {
  if (a.is_zero()) return 0.0;
  SvdOptions opts;
  opts.compute_vectors = false;
  return svd_of(a, opts).sigma_max();
}

const char* to_string(SubspaceKind kind) noexcept {
  switch (kind) {
    case SubspaceKind::Kernel: return "kernel";
    case SubspaceKind::Range: return "range";
    case SubspaceKind::Cohomology: return "cohomology";
    case SubspaceKind::PreBasis: return "prebasis";
    case SubspaceKind::Other: return "other";
  }
  return "other";
}

SubspaceBasis make_basis(SpacePtr space, Matrix columns, SubspaceKind kind) {
  if (columns.rows() != space->dim()) throw Error(ErrorCode::ShapeMismatch, "basis rows differ from space dim");
  if (!is_gram_orthonormal(columns, space->gram())) {
    throw Error(ErrorCode::BasisNotOrthonormal, "columns are not Gram-orthonormal within 1e-10");
  }
  return {std::move(space), std::move(columns), kind};
}

KernelRangeResult kernel_and_range(const BoundedOperator& a, double tol_factor) {
  SvdOptions opts;
  opts.tol_factor = tol_factor;
  KernelRangeResult out;
  out.svd = svd_of(a, opts);
  KernelRange kr = kernel_range_bases(out.svd);
  out.rank = kr.rank;
  out.kernel = {a.domain(), std::move(kr.kernel), SubspaceKind::Kernel};
  out.range = {a.codomain(), std::move(kr.range), SubspaceKind::Range};
  return out;
}

BoundedOperator projector(const SubspaceBasis& basis) {
  return {basis.space, basis.space, orthogonal_projector(basis.columns, basis.space->gram())};
}

BoundedOperator pseudoinverse(const BoundedOperator& a, double tol_factor) {
  SvdOptions opts;
  opts.tol_factor = tol_factor;
  const WeightedSVD svd = svd_of(a, opts);
  return {a.codomain(), a.domain(), weighted_pseudoinverse(svd, a.codomain()->factor())};
}

ReducedConstant reduced_constant(const WeightedSVD& svd) {
  ReducedConstant rc;
  rc.rank = svd.rank();
  if (rc.rank == 0) return rc;
  rc.has_reduced_part = true;
  rc.sigma_min_positive = svd.sigma_min_positive();
  rc.c = 1.0 / rc.sigma_min_positive;
  rc.rank_gap = svd.rank_tolerance > 0.0 ? rc.sigma_min_positive / svd.rank_tolerance
                                         : std::numeric_limits<double>::infinity();
  return rc;
}

ReducedConstant reduced_constant(const BoundedOperator& a, double tol_factor) {
  SvdOptions opts;
  opts.tol_factor = tol_factor;
  opts.compute_vectors = false;
  return reduced_constant(svd_of(a, opts));
}

ComplexPair make_complex(BoundedOperator a0, BoundedOperator a1, double tol) {
  require_same_space(a0.codomain(), a1.domain(), "make_complex");
  ComplexPair cp(std::move(a0), std::move(a1));
  cp.composition_residual_ = relative_composition(cp.a1_, cp.a0_);
  if (cp.composition_residual_ > tol) {
    std::ostringstream os;
    os << "||A1 A0|| / (||A1|| ||A0||) = " << cp.composition_residual_ << " exceeds " << tol;
    throw Error(ErrorCode::ComplexPropertyViolated, os.str());
  }
  cp.dual_residual_ = relative_composition(adjoint(cp.a0_), adjoint(cp.a1_));
  if (cp.dual_residual_ > tol) {
    std::ostringstream os;
    os << "||A0* A1*|| / (||A0*|| ||A1*||) = " << cp.dual_residual_ << " exceeds " << tol;
    throw Error(ErrorCode::ComplexPropertyViolated, os.str());
  }
  return cp;
}

ComplexPair dual_complex(const ComplexPair& cp) {
  return make_complex(adjoint(cp.a1()), adjoint(cp.a0()), 1e-9);
}

HelmholtzSplit refined_helmholtz(const ComplexPair& cp, double tol_factor) {
  const SpacePtr& h1 = cp.h1();
  const Index n1 = h1->dim();
  SvdOptions opts;
  opts.tol_factor = tol_factor;

  const WeightedSVD svd0 = svd_of(cp.a0(), opts);
  const WeightedSVD svd1 = svd_of(cp.a1(), opts);
  const Index r0 = svd0.rank();
  const Index r1 = svd1.rank();

  // N01 as the kernel of [A1; A0*] : H1 -> H2 x H0.
  const BoundedOperator a0s = adjoint(cp.a0());
  Matrix stacked(cp.h2()->dim() + cp.h0()->dim(), n1);
  stacked << cp.a1().matrix(), a0s.matrix();
  const GramFactor prod_factor = block_factor(cp.h2()->factor(), cp.h0()->factor());
  const WeightedSVD svd_s = weighted_svd(stacked, h1->factor(), prod_factor, opts);
  const KernelRange kr_s = kernel_range_bases(svd_s);

  HelmholtzSplit out{
      {h1, svd0.left_basis.leftCols(r0), SubspaceKind::Range},
      {h1, canonical_basis(kr_s.kernel, h1->gram()), SubspaceKind::Cohomology},
      {h1, svd1.right_basis.leftCols(r1), SubspaceKind::Range},
      BoundedOperator::zero(h1, h1),
      BoundedOperator::zero(h1, h1),
      BoundedOperator::zero(h1, h1),
      0.0,
      0.0,
      0.0,
      0,
      {},
      {},
  };
  out.p_range = projector(out.range);
  out.p_harmonic = projector(out.harmonic);
  out.p_corange = projector(out.corange);
  out.a0_constant = reduced_constant(svd0);
  out.a1_constant = reduced_constant(svd1);

  const Matrix& pr = out.p_range.matrix();
  const Matrix& ph = out.p_harmonic.matrix();
  const Matrix& pc = out.p_corange.matrix();
  out.sum_residual = max_abs(pr + ph + pc - Matrix::Identity(n1, n1));
  out.cross_residual = std::max({max_abs(pr * ph), max_abs(ph * pr), max_abs(pr * pc), max_abs(pc * pr),
                                 max_abs(ph * pc), max_abs(pc * ph)});
  const Matrix& g = h1->gram();
  const double gscale = std::max(max_abs(g), 1e-300);
  out.self_adjoint_residual =
      std::max({max_abs(g * pr - pr.transpose() * g), max_abs(g * ph - ph.transpose() * g),
                max_abs(g * pc - pc.transpose() * g)}) /
      gscale;

  // Cross-check: kernel of the Hodge-type operator A0 A0* + A1* A1 on H1.
  const Matrix hodge = cp.a0().matrix() * a0s.matrix() + adjoint(cp.a1()).matrix() * cp.a1().matrix();
  SvdOptions vals = opts;
  vals.compute_vectors = false;
  const WeightedSVD svd_h = weighted_svd(hodge, h1->factor(), h1->factor(), vals);
  out.harmonic_dim_hodge = n1 - svd_h.rank();
  if (out.harmonic_dim_hodge != out.harmonic.dim()) {
    std::ostringstream os;
    os << "cohomology dimension " << out.harmonic.dim() << " (stacked kernel) disagrees with "
       << out.harmonic_dim_hodge << " (Hodge kernel)";
    warn(os.str());
  }
  return out;
}

ElementSplit decompose_element(const HelmholtzSplit& split, const Vector& x) {
  const SpacePtr& h1 = split.range.space;
  if (x.size() != h1->dim()) throw Error(ErrorCode::ShapeMismatch, "field does not live in H1");
  ElementSplit out;
  out.range_part = split.p_range.matrix() * x;
  out.harmonic_part = split.p_harmonic.matrix() * x;
  out.corange_part = split.p_corange.matrix() * x;
  const double nx2 = h1->inner(x, x);
  if (nx2 == 0.0) return out;
  out.orthogonality_residual = std::max({std::abs(h1->inner(out.range_part, out.harmonic_part)),
                                         std::abs(h1->inner(out.range_part, out.corange_part)),
                                         std::abs(h1->inner(out.harmonic_part, out.corange_part))}) /
                               nx2;
  out.reconstruction_residual =
      h1->norm(x - out.range_part - out.harmonic_part - out.corange_part) / std::sqrt(nx2);
  return out;
}

ElementSplit decompose_element(const ComplexPair& cp, const Vector& x) {
  return decompose_element(refined_helmholtz(cp), x);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix random_samples(Index dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(dim, count);
  for (int j = 0; j < count; ++j) {
    for (Index i = 0; i < dim; ++i) out(i, j) = normal(rng);
  }
  return out;
}

MiniFatReport mini_fat(const ComplexPair& cp, std::uint64_t seed, int samples, double tol_factor) {
  MiniFatReport rep;
  const HelmholtzSplit split = refined_helmholtz(cp, tol_factor);
  rep.a0 = split.a0_constant;
  rep.a1 = split.a1_constant;
  rep.rank_gap_a0 = rep.a0.rank_gap;
  rep.rank_gap_a1 = rep.a1.rank_gap;
  rep.cohomology_dim = split.harmonic.dim();
  rep.cohomology_dim_hodge = split.harmonic_dim_hodge;
  rep.helmholtz_sum_residual = split.sum_residual;
  rep.helmholtz_cross_residual = split.cross_residual;

  const BoundedOperator a0s = adjoint(cp.a0());
  const BoundedOperator a1s = adjoint(cp.a1());
  const ReducedConstant c0s = reduced_constant(a0s, tol_factor);
  const ReducedConstant c1s = reduced_constant(a1s, tol_factor);
  rep.c_a0_adjoint = c0s.c;
  rep.c_a1_adjoint = c1s.c;

  const SpacePtr& h1 = cp.h1();
  const double c0 = rep.a0.has_reduced_part ? rep.a0.c : 0.0;
  const double c1 = rep.a1.has_reduced_part ? rep.a1.c : 0.0;
  const Matrix z = random_samples(h1->dim(), samples, seed);
  const Matrix complement = Matrix::Identity(h1->dim(), h1->dim()) - split.p_harmonic.matrix();
  double margin = std::numeric_limits<double>::infinity();
  int used = 0;
  for (int j = 0; j < samples; ++j) {
    const Vector y = complement * z.col(j);
    const double ny2 = h1->inner(y, y);
    if (!(ny2 > 0.0)) continue;
    const Vector a0y = a0s.matrix() * y;
    const Vector a1y = cp.a1().matrix() * y;
    const double bound = c0 * c0 * cp.h0()->inner(a0y, a0y) + c1 * c1 * cp.h2()->inner(a1y, a1y);
    margin = std::min(margin, (bound - ny2) / ny2);
    ++used;
  }
  rep.samples = used;
  rep.combined_estimate_margin = used > 0 ? margin : 0.0;

  const bool dims_agree = rep.cohomology_dim == rep.cohomology_dim_hodge;
  const bool helm_ok = rep.helmholtz_sum_residual <= 1e-10 && rep.helmholtz_cross_residual <= 1e-10;
  const bool margin_ok = rep.combined_estimate_margin >= -1e-9;
  auto c_equal = [](const ReducedConstant& a, const ReducedConstant& b) {
    if (a.has_reduced_part != b.has_reduced_part) return false;
    if (!a.has_reduced_part) return true;
    return std::abs(a.c - b.c) <= 1e-10 * std::max(a.c, b.c);
  };
  rep.passed = dims_agree && helm_ok && margin_ok && c_equal(rep.a0, c0s) && c_equal(rep.a1, c1s);
  return rep;
}

LongComplexEnds long_complex_ends(const std::vector<BoundedOperator>& chain, double tol) {
  if (chain.empty()) throw Error(ErrorCode::InvalidArgument, "long_complex_ends needs a nonempty chain");
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    make_complex(chain[i], chain[i + 1], tol);  // throws ComplexPropertyViolated
  }
  const BoundedOperator& first = chain.front();
  const BoundedOperator& last = chain.back();

  const KernelRangeResult kl = kernel_and_range(first);
  const SubspaceBasis left{first.domain(), canonical_basis(kl.kernel.columns, first.domain()->gram()),
                           SubspaceKind::Kernel};
  const BoundedOperator last_adj = adjoint(last);
  const KernelRangeResult kr = kernel_and_range(last_adj);
  const SubspaceBasis right{last.codomain(), canonical_basis(kr.kernel.columns, last.codomain()->gram()),
                            SubspaceKind::Kernel};

  const SpacePtr k_left = InnerProductSpace::euclidean(left.dim(), "ker(A_first)");
  const SpacePtr k_right = InnerProductSpace::euclidean(right.dim(), "ker(A_last*)");
  BoundedOperator iota_left(k_left, first.domain(), left.columns);
  BoundedOperator pi_left = adjoint(iota_left);
  BoundedOperator iota_right(k_right, last.codomain(), right.columns);
  BoundedOperator pi_right = adjoint(iota_right);

  LongComplexEnds out{iota_left, pi_left, pi_right, iota_right, {}, 0.0, 0.0};
  out.left_projector_residual =
      max_abs(iota_left.matrix() * pi_left.matrix() - orthogonal_projector(left.columns, left.space->gram()));
  out.right_projector_residual = max_abs(iota_right.matrix() * pi_right.matrix() -
                                         orthogonal_projector(right.columns, right.space->gram()));

  // Extended complex 0 -> K_left -> H_first -> ... -> H_last -> K_right -> 0.
  const SpacePtr zero_space = InnerProductSpace::euclidean(0, "0");
  auto cohomology = [](const BoundedOperator& in, const BoundedOperator& outop) {
    const ComplexPair p = make_complex(in, outop, 1e-9);
    return refined_helmholtz(p).harmonic.dim();
  };
  out.end_cohomology[0] = cohomology(BoundedOperator::zero(zero_space, k_left), iota_left);
  out.end_cohomology[1] = cohomology(iota_left, first);
  out.end_cohomology[2] = cohomology(last, pi_right);
  out.end_cohomology[3] = cohomology(pi_right, BoundedOperator::zero(k_right, zero_space));
  return out;
}

}  // namespace hct
