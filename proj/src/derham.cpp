#include "hct/derham.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hct {

const char* to_string(MassScheme s) noexcept {
  return s == MassScheme::DecDiagonal ? "dec-diagonal" : "whitney-galerkin";
}

MassScheme parse_scheme(const std::string& name) {
  if (name == "whitney-galerkin" || name == "whitney") return MassScheme::WhitneyGalerkin;
  if (name == "dec-diagonal" || name == "dec") return MassScheme::DecDiagonal;
  throw Error(ErrorCode::ConfigError, "unknown mass scheme '" + name + "'");
}

int form_components(int d, int q) {
  if (q < 0 || q > d) return 0;
  int c = 1;
  for (int i = 0; i < q; ++i) c = c * (d - i) / (i + 1);
  return c;
}

WeightField WeightField::unit(int dim) { return WeightField{std::vector<DegreeWeight>(dim + 1)}; }

const DegreeWeight& WeightField::at(int q) const {
  static const DegreeWeight unit_weight;
  if (q < 0 || q >= static_cast<int>(degrees.size())) return unit_weight;
  return degrees[q];
}

WeightField WeightField::random_spd(const SimplicialMesh& mesh, std::uint64_t seed, double lo, double hi) {
  const int d = mesh.dim();
  const Index cells = mesh.count(d);
  WeightField w;
  w.degrees.resize(d + 1);
  for (int q = 0; q <= d; ++q) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(q)));
    std::uniform_real_distribution<double> uni(lo, hi);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int k = form_components(d, q);
    DegreeWeight& dw = w.degrees[q];
    if (k == 1) {
      dw.kind = DegreeWeight::Kind::Scalar;
      dw.scalars.resize(cells);
      for (Index c = 0; c < cells; ++c) dw.scalars[c] = uni(rng);
      continue;
    }
    dw.kind = DegreeWeight::Kind::Matrix;
    dw.matrices.reserve(cells);
    for (Index c = 0; c < cells; ++c) {
      Matrix g(k, k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) g(i, j) = normal(rng);
      }
      const Matrix r = Eigen::HouseholderQR<Matrix>(g).householderQ();
      Vector l(k);
      for (int i = 0; i < k; ++i) l[i] = uni(rng);
      Matrix m = r.transpose() * l.asDiagonal() * r;
      dw.matrices.push_back(0.5 * (m + m.transpose()));
    }
  }
  return w;
}

WeightField WeightField::constant_matrix(const SimplicialMesh& mesh, int degree, const Matrix& m) {
  WeightField w = unit(mesh.dim());
  if (degree < 0 || degree > mesh.dim()) throw Error(ErrorCode::InvalidWeight, "weight degree out of range");
  DegreeWeight& dw = w.degrees[degree];
  dw.kind = DegreeWeight::Kind::Matrix;
  dw.matrices.assign(mesh.count(mesh.dim()), m);
  return w;
}

WeightField WeightField::constant_scalar(const SimplicialMesh& mesh, double s) {
  WeightField w = unit(mesh.dim());
  for (DegreeWeight& dw : w.degrees) {
    dw.kind = DegreeWeight::Kind::Scalar;
    dw.scalars.assign(mesh.count(mesh.dim()), s);
  }
  return w;
}

void validate_weights(const SimplicialMesh& mesh, const WeightField& w) {
  const int d = mesh.dim();
  const Index cells = mesh.count(d);
  if (static_cast<int>(w.degrees.size()) > d + 1) throw Error(ErrorCode::InvalidWeight, "more weight degrees than forms");
  for (int q = 0; q < static_cast<int>(w.degrees.size()); ++q) {
    const DegreeWeight& dw = w.degrees[q];
    const std::string where = "degree " + std::to_string(q);
    switch (dw.kind) {
      case DegreeWeight::Kind::Unit:
        break;
      case DegreeWeight::Kind::Scalar:
        if (static_cast<Index>(dw.scalars.size()) != cells) {
          throw Error(ErrorCode::InvalidWeight, where + ": one scalar per cell required");
        }
        for (double s : dw.scalars) {
          if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidWeight, where + ": non-positive scalar");
        }
        break;
      case DegreeWeight::Kind::Matrix: {
        const int k = form_components(d, q);
        if (static_cast<Index>(dw.matrices.size()) != cells) {
          throw Error(ErrorCode::InvalidWeight, where + ": one matrix per cell required");
        }
        for (const Matrix& m : dw.matrices) {
          if (m.rows() != k || m.cols() != k) {
            throw Error(ErrorCode::InvalidWeight, where + ": matrices must be " + std::to_string(k) + "x" +
                                                      std::to_string(k));
          }
          if (!m.allFinite() || asymmetry(m) > 1e-12) throw Error(ErrorCode::InvalidWeight, where + ": asymmetric matrix");
          Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
          if (es.eigenvalues().minCoeff() < 1e-12) {
            throw Error(ErrorCode::InvalidWeight, where + ": matrix is not positive definite");
          }
        }
        break;
      }
    }
  }
}

namespace {

struct CellGeometry {
  Matrix points;  // (d+1) x d, rows in sorted vertex order
  Matrix grads;   // (d+1) x d, gradients of the barycentric coordinates
  double volume = 0.0;
};

CellGeometry cell_geometry(const SimplicialMesh& mesh, const Simplex& cell) {
  const int d = mesh.dim();
  CellGeometry g;
  g.points.resize(d + 1, d);
  for (int k = 0; k <= d; ++k) g.points.row(k) = mesh.vertices().row(cell[k]);
  Matrix j(d, d);
  for (int k = 0; k < d; ++k) j.col(k) = (g.points.row(k + 1) - g.points.row(0)).transpose();
  const Matrix jinv = j.inverse();
  g.grads.resize(d + 1, d);
  g.grads.bottomRows(d) = jinv;
  g.grads.row(0) = -jinv.colwise().sum();
  double fact = 1.0;
  for (int k = 2; k <= d; ++k) fact *= k;
  g.volume = std::abs(j.determinant()) / fact;
  return g;
}

// Sorted k-subsets of {0, ..., n-1}.
std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return out;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// Proxy coordinates v = S w of form coefficients w (lexicographic
// component order). Only 2-forms in 3-D need a non-identity map.
Matrix proxy_map(int d, int q) {
  const int k = form_components(d, q);
  if (d == 3 && q == 2) {
    Matrix s = Matrix::Zero(3, 3);
    s(0, 2) = 1.0;
    s(1, 1) = -1.0;
    s(2, 0) = 1.0;
    return s;
  }
  return Matrix::Identity(k, k);
}

Matrix form_weight(const DegreeWeight& w, Index cell, int d, int q) {
  const int k = form_components(d, q);
  switch (w.kind) {
    case DegreeWeight::Kind::Unit:
      return Matrix::Identity(k, k);
    case DegreeWeight::Kind::Scalar:
      return w.scalars.at(cell) * Matrix::Identity(k, k);
    case DegreeWeight::Kind::Matrix: {
      const Matrix s = proxy_map(d, q);
      return s.transpose() * w.matrices.at(cell) * s;
    }
  }
  return Matrix::Identity(k, k);
}

Index global_index(const SimplicialMesh& mesh, int q, const Simplex& cell, const std::vector<int>& local) {
  Simplex s{-1, -1, -1, -1};
  for (int i = 0; i <= q; ++i) s[i] = cell[local[i]];
  return mesh.find(q, s);
}

SparseMatrix whitney_mass(const SimplicialMesh& mesh, int q, const DegreeWeight& weight) {
  const int d = mesh.dim();
  const int k = form_components(d, q);
  const auto local = subsets(d + 1, q + 1);
  const auto axes = subsets(d, q);
  double qfact = 1.0;
  for (int i = 2; i <= q; ++i) qfact *= i;
  const double denom = (d + 1.0) * (d + 2.0);

  std::vector<Eigen::Triplet<double>> trip;
  const auto& cells = mesh.simplices(d);
  for (Index c = 0; c < static_cast<Index>(cells.size()); ++c) {
    const CellGeometry g = cell_geometry(mesh, cells[c]);
    const Matrix w = form_weight(weight, c, d, q);
    // coeff[a][i]: form part multiplying lambda_{sigma_a[i]} in phi_{sigma_a}.
    std::vector<std::vector<Vector>> coeff(local.size(), std::vector<Vector>(q + 1, Vector(k)));
    for (std::size_t a = 0; a < local.size(); ++a) {
      const std::vector<int>& s = local[a];
      for (int i = 0; i <= q; ++i) {
        std::vector<int> rest;
        for (int j = 0; j <= q; ++j) {
          if (j != i) rest.push_back(s[j]);
        }
        for (int ic = 0; ic < k; ++ic) {
          Matrix m(q, q);
          for (int r = 0; r < q; ++r) {
            for (int col = 0; col < q; ++col) m(r, col) = g.grads(rest[r], axes[ic][col]);
          }
          const double det = q == 0 ? 1.0 : m.determinant();
          coeff[a][i][ic] = qfact * ((i % 2 == 0) ? 1.0 : -1.0) * det;
        }
      }
    }
    std::vector<Index> gidx(local.size());
    for (std::size_t a = 0; a < local.size(); ++a) gidx[a] = global_index(mesh, q, cells[c], local[a]);
    for (std::size_t a = 0; a < local.size(); ++a) {
      for (std::size_t b = 0; b < local.size(); ++b) {
        double v = 0.0;
        for (int i = 0; i <= q; ++i) {
          for (int j = 0; j <= q; ++j) {
            const double lam = (local[a][i] == local[b][j]) ? 2.0 : 1.0;
            v += coeff[a][i].dot(w * coeff[b][j]) * lam;
          }
        }
        trip.emplace_back(gidx[a], gidx[b], v * g.volume / denom);
      }
    }
  }
  SparseMatrix m(mesh.count(q), mesh.count(q));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// Circumcenter of the points (rows) within their affine hull.
Vector circumcenter(const Matrix& pts) {
  const Index k = pts.rows() - 1;
  const Vector p0 = pts.row(0).transpose();
  if (k == 0) return p0;
  Matrix e(k, pts.cols());
  for (Index i = 0; i < k; ++i) e.row(i) = pts.row(i + 1) - pts.row(0);
  const Matrix a = e * e.transpose();
  const Vector rhs = 0.5 * a.diagonal();
  const Vector coef = a.ldlt().solve(rhs);
  return p0 + e.transpose() * coef;
}

double simplex_volume(const Matrix& pts) {
  const Index k = pts.rows() - 1;
  if (k == 0) return 1.0;
  Matrix e(pts.cols(), k);
  for (Index i = 0; i < k; ++i) e.col(i) = (pts.row(i + 1) - pts.row(0)).transpose();
  double fact = 1.0;
  for (Index i = 2; i <= k; ++i) fact *= static_cast<double>(i);
  return std::sqrt(std::max(0.0, (e.transpose() * e).determinant())) / fact;
}

Matrix rows_of(const Matrix& pts, const std::vector<int>& idx) {
  Matrix out(idx.size(), pts.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = pts.row(idx[i]);
  return out;
}

// Signed circumcentric dual volume of the local simplex `s` inside one cell,
// summed over the flags s = s_q < s_{q+1} < ... < cell.
double dual_volume_in_cell(const Matrix& pts, const std::vector<int>& s) {
  const int d = static_cast<int>(pts.rows()) - 1;
  double total = 0.0;
  std::vector<Vector> centers{circumcenter(rows_of(pts, s))};
  std::vector<int> current = s;
  std::function<void(double)> walk = [&](double sign) {
    if (static_cast<int>(current.size()) == d + 1) {
      Matrix c(centers.size(), pts.cols());
      for (std::size_t i = 0; i < centers.size(); ++i) c.row(i) = centers[i].transpose();
      total += sign * simplex_volume(c);
      return;
    }
    for (int v = 0; v <= d; ++v) {
      if (std::find(current.begin(), current.end(), v) != current.end()) continue;
      const Matrix face = rows_of(pts, current);
      std::vector<int> next = current;
      next.push_back(v);
      std::sort(next.begin(), next.end());
      const Vector c_face = centers.back();
      const Vector c_next = circumcenter(rows_of(pts, next));
      // Normal of the face inside the larger simplex, pointing to v.
      Vector n = pts.row(v).transpose() - c_face;
      if (face.rows() > 1) {
        Matrix e(pts.cols(), face.rows() - 1);
        for (Index i = 1; i < face.rows(); ++i) e.col(i - 1) = (face.row(i) - face.row(0)).transpose();
        const Matrix qb = Eigen::HouseholderQR<Matrix>(e).householderQ() * Matrix::Identity(e.rows(), e.cols());
        n -= qb * (qb.transpose() * n);
      }
      const double side = (c_next - c_face).dot(n);
      const double step = side >= 0.0 ? 1.0 : -1.0;
      const std::vector<int> saved = current;
      current = next;
      centers.push_back(c_next);
      walk(sign * step);
      centers.pop_back();
      current = saved;
    }
  };
  walk(1.0);
  return total;
}

SparseMatrix dec_mass(const SimplicialMesh& mesh, int q, const DegreeWeight& weight) {
  const int d = mesh.dim();
  if (weight.kind == DegreeWeight::Kind::Matrix) {
    throw Error(ErrorCode::InvalidWeight, "dec-diagonal supports unit and scalar weights only");
  }
  const auto local = subsets(d + 1, q + 1);
  Vector dual = Vector::Zero(mesh.count(q));
  const auto& cells = mesh.simplices(d);
  for (Index c = 0; c < static_cast<Index>(cells.size()); ++c) {
    Matrix pts(d + 1, d);
    for (int k = 0; k <= d; ++k) pts.row(k) = mesh.vertices().row(cells[c][k]);
    const double s = weight.kind == DegreeWeight::Kind::Scalar ? weight.scalars.at(c) : 1.0;
    for (const auto& l : local) {
      dual[global_index(mesh, q, cells[c], l)] += s * dual_volume_in_cell(pts, l);
    }
  }
  SparseMatrix m(mesh.count(q), mesh.count(q));
  std::vector<Eigen::Triplet<double>> trip;
  const double scale = dual.cwiseAbs().maxCoeff();
  for (Index i = 0; i < mesh.count(q); ++i) {
    const Simplex& sx = mesh.simplices(q)[i];
    Matrix pts(q + 1, d);
    for (int k = 0; k <= q; ++k) pts.row(k) = mesh.vertices().row(sx[k]);
    const double primal = simplex_volume(pts);
    if (!(dual[i] > 1e-12 * scale)) {
      std::ostringstream os;
      os << "dec-diagonal: dual volume " << dual[i] << " of " << q << "-simplex " << i
         << " is not positive (mesh is not well-centered)";
      throw Error(ErrorCode::NonSPDMass, os.str());
    }
    trip.emplace_back(i, i, dual[i] / primal);
  }
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix restrict_rows_cols(const SparseMatrix& a, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  std::vector<Index> rmap(a.rows(), -1), cmap(a.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = static_cast<Index>(i);
  for (std::size_t i = 0; i < cols.size(); ++i) cmap[cols[i]] = static_cast<Index>(i);
  std::vector<Eigen::Triplet<double>> trip;
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const Index r = rmap[it.row()];
      const Index c = cmap[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  }
  SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SparseMatrix to_double(const IncidenceMatrix& d) {
  SparseMatrix out(d.rows(), d.cols());
  std::vector<Eigen::Triplet<double>> trip;
  for (Index r = 0; r < d.outerSize(); ++r) {
    for (IncidenceMatrix::InnerIterator it(d, r); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Index weighted_rank(const BoundedOperator& a) {
  if (a.matrix().size() == 0) return 0;
  SvdOptions vals;
  vals.compute_vectors = false;
  return svd_of(a, vals).rank();
}

}  // namespace

SparseMatrix mass_matrix(const SimplicialMesh& mesh, int q, const DegreeWeight& weight, MassScheme scheme) {
  if (q < 0 || q > mesh.dim()) throw Error(ErrorCode::InvalidArgument, "form degree out of range");
  return scheme == MassScheme::DecDiagonal ? dec_mass(mesh, q, weight) : whitney_mass(mesh, q, weight);
}

DiscreteDeRham assemble_complex(const SimplicialMesh& mesh, const BoundaryPartition& partition,
                                const WeightField& weights, MassScheme scheme) {
  validate_weights(mesh, weights);
  const int d = mesh.dim();
  DiscreteDeRham c;
  c.dim_ = d;
  c.scheme_ = scheme;
  c.partition_ = partition.description;
  const auto removed = gamma_t_closure(mesh, partition);
  c.dofs_.resize(d + 1);
  for (int q = 0; q <= d; ++q) {
    const std::vector<Index>& gone = q < static_cast<int>(removed.size()) ? removed[q] : std::vector<Index>{};
    std::size_t g = 0;
    for (Index i = 0; i < mesh.count(q); ++i) {
      if (g < gone.size() && gone[g] == i) {
        ++g;
        continue;
      }
      c.dofs_[q].push_back(i);
    }
  }
  c.coboundary_.resize(d);
  for (int q = 0; q < d; ++q) {
    c.coboundary_[q] = restrict_rows_cols(to_double(mesh.incidence(q)), c.dofs_[q + 1], c.dofs_[q]);
  }
  c.mass_.resize(d + 1);
  for (int q = 0; q <= d; ++q) {
    c.mass_[q] = restrict_rows_cols(mass_matrix(mesh, q, weights.at(q), scheme), c.dofs_[q], c.dofs_[q]);
  }
  c.cache_->spaces.assign(d + 1, nullptr);
  return c;
}

SpacePtr DiscreteDeRham::space(int q) const {
  if (q < 0 || q > dim_) return InnerProductSpace::euclidean(0, "0");
  std::lock_guard<std::mutex> lock(cache_->mutex);
  if (cache_->spaces.size() != static_cast<std::size_t>(dim_ + 1)) cache_->spaces.assign(dim_ + 1, nullptr);
  SpacePtr& s = cache_->spaces[q];
  if (!s) {
    if (dof_count(q) > kMaxDenseDim) {
      throw Error(ErrorCode::SizeLimitExceeded, "degree " + std::to_string(q) + " has " +
                                                    std::to_string(dof_count(q)) + " DOFs; dense limit is " +
                                                    std::to_string(kMaxDenseDim));
    }
    Matrix g = Matrix(mass_[q]);
    g = 0.5 * (g + g.transpose()).eval();
    try {
      s = InnerProductSpace::create(std::move(g), "L2(" + std::to_string(q) + ")");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotPositiveDefinite) throw Error(ErrorCode::NonSPDMass, e.what());
      throw;
    }
  }
  return s;
}

BoundedOperator DiscreteDeRham::op(int q) const {
  if (q < -1 || q > dim_) throw Error(ErrorCode::InvalidArgument, "operator degree out of range");
  if (q == -1 || q == dim_) return BoundedOperator::zero(space(q), space(q + 1));
  return BoundedOperator(space(q), space(q + 1), Matrix(coboundary_[q]));
}

ComplexPair DiscreteDeRham::pair(int q) const {
  if (q < 0 || q > dim_) throw Error(ErrorCode::InvalidArgument, "pair degree out of range");
  return make_complex(op(q - 1), op(q));
}

std::vector<BoundedOperator> DiscreteDeRham::chain() const {
  std::vector<BoundedOperator> out;
  for (int q = 0; q < dim_; ++q) out.push_back(op(q));
  return out;
}

bool integer_complex_property(const SimplicialMesh& mesh) {
  for (int q = 0; q + 1 < mesh.dim(); ++q) {
    const IncidenceMatrix prod = mesh.incidence(q + 1) * mesh.incidence(q);
    for (Index r = 0; r < prod.outerSize(); ++r) {
      for (IncidenceMatrix::InnerIterator it(prod, r); it; ++it) {
        if (it.value() != 0) return false;
      }
    }
  }
  return true;
}

ProxyComplex vector_proxies(const DiscreteDeRham& c) {
  if (c.dim() != 2 && c.dim() != 3) throw Error(ErrorCode::WrongDimension, "vector proxies need a 2-D or 3-D complex");
  std::vector<BoundedOperator> ops = c.chain();
  LongComplexEnds ends = long_complex_ends(ops);
  if (c.dim() == 3) {
    return ProxyComplex{{"L2", "L2_eps", "L2_mu", "L2"},
                        {"grad_t", "mu^-1 rot_t", "div_t mu"},
                        {"-div_n eps", "eps^-1 rot_n", "-grad_n"},
                        {},
                        std::move(ops),
                        std::move(ends)};
  }
  return ProxyComplex{{"L2", "L2_eps", "L2_mu"},
                      {"grad_t", "rot_t"},
                      {"-div_n eps", "eps^-1 Rot_n"},
                      {"Rot_t", "div_t"},
                      std::move(ops),
                      std::move(ends)};
}

SubspaceBasis dirichlet_neumann_fields(const DiscreteDeRham& c, int q) {
  return refined_helmholtz(c.pair(q)).harmonic;
}

std::vector<Index> cohomology_dims(const DiscreteDeRham& c) {
  const int d = c.dim();
  std::vector<Index> rank(d + 2, 0);
  for (int q = 0; q < d; ++q) rank[q + 1] = weighted_rank(c.op(q));
  std::vector<Index> out(d + 1);
  // rank[q + 1] is the rank of d_q; rank[0] and rank[d + 1] are the zero ends.
  for (int q = 0; q <= d; ++q) out[q] = c.dof_count(q) - rank[q + 1] - rank[q];
  return out;
}

DualityReport betti_duality_check(const SimplicialMesh& mesh, const BoundaryPartition& partition,
                                  MassScheme scheme) {
  const int d = mesh.dim();
  DualityReport rep;
  rep.dims_t = cohomology_dims(assemble_complex(mesh, partition, WeightField::unit(d), scheme));
  rep.dims_n = cohomology_dims(assemble_complex(mesh, complement(partition), WeightField::unit(d), scheme));
  rep.all_passed = true;
  for (int q = 0; q <= d; ++q) {
    const bool ok = rep.dims_t[q] == rep.dims_n[d - q];
    rep.passed.push_back(ok);
    rep.all_passed = rep.all_passed && ok;
  }
  return rep;
}

WeightIndependenceReport weight_independence(const SimplicialMesh& mesh, const BoundaryPartition& partition,
                                             const std::vector<WeightField>& weights, MassScheme scheme) {
  if (weights.size() < 2) throw Error(ErrorCode::InvalidArgument, "weight independence needs at least two weights");
  const int d = mesh.dim();
  WeightIndependenceReport rep;
  std::vector<Matrix> reference(d + 1);
  rep.dims_equal = true;
  for (std::size_t w = 0; w < weights.size(); ++w) {
    const DiscreteDeRham c = assemble_complex(mesh, partition, weights[w], scheme);
    std::vector<Index> dims(d + 1);
    std::vector<double> angles(d + 1, 0.0);
    for (int q = 0; q <= d; ++q) {
      const Matrix h = column_space(dirichlet_neumann_fields(c, q).columns);
      dims[q] = h.cols();
      if (w == 0) {
        reference[q] = h;
      } else {
        angles[q] = max_subspace_angle(reference[q], h, Matrix::Identity(h.rows(), h.rows()));
      }
    }
    if (w > 0 && dims != rep.dims.front()) rep.dims_equal = false;
    rep.dims.push_back(std::move(dims));
    rep.angles.push_back(std::move(angles));
  }
  return rep;
}

std::vector<PoincareDegree> poincare_constants(const DiscreteDeRham& c, std::uint64_t seed, int samples) {
  std::vector<PoincareDegree> out;
  for (int q = 0; q < c.dim(); ++q) {
    PoincareDegree p;
    p.q = q;
    const BoundedOperator a = c.op(q);
    p.constant = reduced_constant(a);
    const ReducedConstant adj = reduced_constant(adjoint(a));
    p.adjoint_constant = adj.c;
    if (p.constant.has_reduced_part && adj.has_reduced_part) {
      p.equality_residual = std::abs(p.constant.c - adj.c) / p.constant.c;
    } else {
      p.equality_residual = p.constant.has_reduced_part == adj.has_reduced_part
                                ? 0.0
                                : std::numeric_limits<double>::infinity();
    }
    const MiniFatReport mf = mini_fat(c.pair(q), derive_seed(seed, static_cast<std::uint64_t>(q)), samples);
    p.combined_margin = mf.combined_estimate_margin;
    p.samples = mf.samples;
    out.push_back(p);
  }
  return out;
}

SparsePoincare poincare_constant_sparse(const DiscreteDeRham& c, int q, std::uint64_t seed, int samples) {
  if (q < 0 || q >= c.dim()) throw Error(ErrorCode::InvalidArgument, "degree out of range");
  const SparseMatrix& d = c.coboundary(q);
  const SparseMatrix& m0 = c.mass(q);
  const SparseMatrix& m1 = c.mass(q + 1);
  const NormalSpectrum ns = normal_spectrum(d, m0, m1);
  SparsePoincare out;
  out.kernel_dim = ns.kernel_dim;
  if (!(ns.sigma_min_positive > 0.0)) throw Error(ErrorCode::NoReducedPart, "d_q has no reduced part");
  out.constant = 1.0 / ns.sigma_min_positive;
  if (q != 0 || ns.kernel_dim != 0) {
    out.combined_margin = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const Matrix z = random_samples(d.cols(), samples, seed);
  double margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < samples; ++j) {
    const Vector y = z.col(j);
    const Vector dy = d * y;
    const double ny2 = y.dot(m0 * y);
    const double bound = out.constant * out.constant * dy.dot(m1 * dy);
    margin = std::min(margin, (bound - ny2) / ny2);
  }
  out.combined_margin = margin;
  return out;
}

ElementSplit helmholtz_field_decomposition(const DiscreteDeRham& c, int q, const Vector& field) {
  return decompose_element(c.pair(q), field);
}

}  // namespace hct
