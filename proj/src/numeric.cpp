#include "hct/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

namespace hct {

namespace {

std::mutex g_sink_mutex;
std::function<void(const std::string&)> g_sink = [](const std::string& msg) {
  std::cerr << "hct warning: " << msg << '\n';
};

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
}

}  // namespace

void set_warning_sink(std::function<void(const std::string&)> sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) g_sink(message);
}

double asymmetry(const Matrix& m) {
  const double scale = m.norm();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).norm() / scale;
}

Matrix GramFactor::whiten(const Matrix& x) const {
  return lower_factor.transpose().triangularView<Eigen::Upper>() * x;
}

Matrix GramFactor::unwhiten(const Matrix& y) const {
  return lower_factor.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix GramFactor::solve(const Matrix& b) const {
  Matrix y = lower_factor.triangularView<Eigen::Lower>().solve(b);
  return lower_factor.transpose().triangularView<Eigen::Upper>().solve(y);
}

GramFactor cholesky_whiten(const Matrix& gram) {
  require_square(gram, "Gram matrix");
  if (gram.rows() > kMaxDenseDim) {
    throw Error(ErrorCode::SizeLimitExceeded,
                "Gram dimension " + std::to_string(gram.rows()) + " exceeds dense limit");
  }
  GramFactor f;
  f.space_dim = gram.rows();
  if (f.space_dim == 0) {
    f.lower_factor.resize(0, 0);
    return f;
  }
  const double asym = asymmetry(gram);
  if (asym > 1e-12) {
    std::ostringstream os;
    os << "relative asymmetry " << asym << " exceeds 1e-12";
    throw Error(ErrorCode::NotSymmetric, os.str());
  }
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "non-positive pivot during Cholesky factorization");
  }
  f.lower_factor = llt.matrixL();
  const Vector diag = f.lower_factor.diagonal();
  if (!(diag.minCoeff() > 0.0) || !diag.allFinite()) {
    throw Error(ErrorCode::NotPositiveDefinite, "non-positive pivot during Cholesky factorization");
  }
  const double ratio = diag.maxCoeff() / diag.minCoeff();
  f.condition_estimate = ratio * ratio;
  if (f.condition_estimate > kConditionWarning) {
    std::ostringstream os;
    os << "Gram condition estimate " << f.condition_estimate << " above " << kConditionWarning;
    warn(os.str());
  }
  return f;
}

Index WeightedSVD::rank() const {
  Index r = 0;
  for (Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values[i] > rank_tolerance) ++r;
  }
  return r;
}

double WeightedSVD::sigma_max() const {
  return singular_values.size() > 0 ? singular_values[0] : 0.0;
}

double WeightedSVD::sigma_min_positive() const {
  const Index r = rank();
  return r > 0 ? singular_values[r - 1] : 0.0;
}

WeightedSVD weighted_svd(const Matrix& a, const GramFactor& domain, const GramFactor& codomain,
                         const SvdOptions& options) {
  if (a.rows() != codomain.space_dim || a.cols() != domain.space_dim) {
    std::ostringstream os;
    os << "operator is " << a.rows() << "x" << a.cols() << " but spaces have dims " << domain.space_dim
       << " -> " << codomain.space_dim;
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
  if (std::max(a.rows(), a.cols()) > kMaxDenseDim) {
    throw Error(ErrorCode::SizeLimitExceeded, "operator too large for dense weighted SVD");
  }
  const Index m = a.rows();
  const Index n = a.cols();
  WeightedSVD out;

  // B = L1^T A L0^{-T}
  Matrix b;
  if (m > 0 && n > 0) {
    Matrix t = domain.lower_factor.triangularView<Eigen::Lower>().solve(a.transpose()).transpose();
    b = codomain.whiten(t);
  } else {
    b = Matrix::Zero(m, n);
  }

  if (m == 0 || n == 0) {
    out.singular_values.resize(0);
    if (options.compute_vectors) {
      out.left_basis = codomain.unwhiten(Matrix::Identity(m, m));
      out.right_basis = domain.unwhiten(Matrix::Identity(n, n));
    }
    return out;
  }

  if (options.compute_vectors) {
    Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.singular_values = svd.singularValues();
    out.left_basis = codomain.unwhiten(svd.matrixU());
    out.right_basis = domain.unwhiten(svd.matrixV());
  } else {
    Eigen::BDCSVD<Matrix> svd(b);
    out.singular_values = svd.singularValues();
  }
  const double smax = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
  out.rank_tolerance = options.tol_factor * smax * kEps * static_cast<double>(std::max(m, n));
  return out;
}

WeightedSVD weighted_svd(const Matrix& a, const Matrix& domain_gram, const Matrix& codomain_gram,
                         const SvdOptions& options) {
  return weighted_svd(a, cholesky_whiten(domain_gram), cholesky_whiten(codomain_gram), options);
}

KernelRange kernel_range_bases(const WeightedSVD& svd) {
  const Index n0 = svd.right_basis.cols();
  const Index n1 = svd.left_basis.cols();
  if (svd.right_basis.rows() != n0 || svd.left_basis.rows() != n1) {
    throw Error(ErrorCode::InvalidArgument, "kernel_range_bases needs an SVD with full bases");
  }
  KernelRange kr;
  kr.rank = svd.rank();
  kr.kernel = svd.right_basis.rightCols(n0 - kr.rank);
  kr.range = svd.left_basis.leftCols(kr.rank);
  return kr;
}

bool is_gram_orthonormal(const Matrix& basis, const Matrix& gram, double tol) {
  if (basis.rows() != gram.rows()) return false;
  if (basis.cols() == 0) return true;
  const Matrix c = basis.transpose() * gram * basis;
  return (c - Matrix::Identity(c.rows(), c.cols())).cwiseAbs().maxCoeff() <= tol;
}

Matrix orthogonal_projector(const Matrix& basis, const Matrix& gram) {
  require_square(gram, "Gram matrix");
  if (basis.rows() != gram.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "basis rows do not match space dimension");
  }
  if (!is_gram_orthonormal(basis, gram)) {
    throw Error(ErrorCode::BasisNotOrthonormal, "basis^T G basis differs from identity by more than 1e-10");
  }
  return basis * (basis.transpose() * gram);
}

Matrix weighted_pseudoinverse(const WeightedSVD& svd, const GramFactor& codomain) {
  const Index r = svd.rank();
  const Index n0 = svd.right_basis.rows();
  const Index n1 = svd.left_basis.rows();
  if (r == 0) return Matrix::Zero(n0, n1);
  const Matrix ur = svd.left_basis.leftCols(r);
  // U_r^T G1 = (L (L^T U_r))^T
  const Matrix g_ur = codomain.lower_factor.triangularView<Eigen::Lower>() * codomain.whiten(ur);
  const Vector inv = svd.singular_values.head(r).cwiseInverse();
  return svd.right_basis.leftCols(r) * inv.asDiagonal() * g_ur.transpose();
}

Matrix weighted_pseudoinverse(const Matrix& a, const Matrix& domain_gram, const Matrix& codomain_gram,
                              double tol_factor) {
  const GramFactor f0 = cholesky_whiten(domain_gram);
  const GramFactor f1 = cholesky_whiten(codomain_gram);
  SvdOptions opts;
  opts.tol_factor = tol_factor;
  return weighted_pseudoinverse(weighted_svd(a, f0, f1, opts), f1);
}

NormalSpectrum normal_spectrum(const SparseMatrix& a, const SparseMatrix& domain_gram,
                               const SparseMatrix& codomain_gram, double tol_factor) {
  if (a.cols() != domain_gram.rows() || a.rows() != codomain_gram.rows() ||
      domain_gram.rows() != domain_gram.cols() || codomain_gram.rows() != codomain_gram.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "normal_spectrum: operator and Gram shapes disagree");
  }
  const Index n = a.cols();
  if (n > kMaxDenseDim) throw Error(ErrorCode::SizeLimitExceeded, "normal_spectrum: domain too large");
  NormalSpectrum out;
  if (n == 0) return out;
  const SparseMatrix k_sparse = SparseMatrix(a.transpose()) * codomain_gram * a;
  Matrix k = Matrix(k_sparse);
  k = 0.5 * (k + k.transpose()).eval();
  Matrix g = Matrix(domain_gram);
  if (asymmetry(g) > 1e-12) throw Error(ErrorCode::NotSymmetric, "domain Gram not symmetric");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(k, g, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "normal_spectrum: generalized eigensolver failed");
  }
  const Vector lambda = ges.eigenvalues().cwiseMax(0.0);
  const double lmax = lambda.maxCoeff();
  out.rank_tolerance = tol_factor * kEps * lmax * static_cast<double>(std::max(a.rows(), a.cols()));
  out.singular_values = lambda.cwiseSqrt();
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] <= out.rank_tolerance) {
      ++out.kernel_dim;
    } else {
      out.sigma_min_positive = out.singular_values[i];
      break;
    }
  }
  return out;
}

Matrix canonical_basis(const Matrix& basis, const Matrix& gram, double tol) {
  const Index n = basis.rows();
  const Index k = basis.cols();
  if (k == 0) return Matrix(n, 0);
  Matrix e = basis;
  const double scale = e.cwiseAbs().maxCoeff();
  std::vector<Index> pivot_rows;
  Index p = 0;
  for (Index i = 0; i < n && p < k; ++i) {
    Index best = -1;
    double best_val = tol * scale;
    for (Index j = p; j < k; ++j) {
      if (std::abs(e(i, j)) > best_val) {
        best_val = std::abs(e(i, j));
        best = j;
      }
    }
    if (best < 0) continue;
    e.col(p).swap(e.col(best));
    e.col(p) /= e(i, p);
    for (Index j = 0; j < k; ++j) {
      if (j != p && e(i, j) != 0.0) e.col(j) -= e(i, j) * e.col(p);
    }
    pivot_rows.push_back(i);
    ++p;
  }
  if (p < k) throw Error(ErrorCode::InvalidArgument, "canonical_basis: columns are linearly dependent");
  // Gram-Schmidt in the G-metric, two passes.
  for (Index j = 0; j < k; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index l = 0; l < j; ++l) {
        const double c = e.col(l).dot(gram * e.col(j));
        e.col(j) -= c * e.col(l);
      }
    }
    const double nrm = std::sqrt(e.col(j).dot(gram * e.col(j)));
    e.col(j) /= nrm;
    if (e(pivot_rows[j], j) < 0.0) e.col(j) = -e.col(j);
  }
  return e;
}

double max_subspace_angle(const Matrix& a, const Matrix& b, const Matrix& gram) {
  if (a.cols() != b.cols()) return std::numbers::pi / 2;
  if (a.cols() == 0) return 0.0;
  const Matrix c = a.transpose() * gram * b;
  Eigen::JacobiSVD<Matrix> svd(c);
  const double cmin = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(cmin);
}

Index union_rank(const Matrix& a, const Matrix& b, double rel_tol) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "union_rank: row counts differ");
  Matrix s(a.rows(), a.cols() + b.cols());
  s << a, b;
  if (s.cols() == 0 || s.rows() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(s);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > rel_tol * sv[0]) ++r;
  }
  return r;
}

namespace {

Index numerical_rank(const Vector& sv, double rel_tol, double abs_floor) {
  if (sv.size() == 0) return 0;
  const double cut = std::max(rel_tol * sv[0], abs_floor);
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cut) ++r;
  }
  return r;
}

}  // namespace

Matrix column_space(const Matrix& m, double rel_tol, double abs_floor) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Index r = numerical_rank(svd.singularValues(), rel_tol, abs_floor);
  return svd.matrixU().leftCols(r);
}

Matrix null_space(const Matrix& m, double rel_tol, double abs_floor) {
  const Index n = m.cols();
  if (n == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(n, n);
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Index r = numerical_rank(svd.singularValues(), rel_tol, abs_floor);
  return svd.matrixV().rightCols(n - r);
}

}  // namespace hct
