#pragma once

// Discrete de Rham complexes on simplicial meshes with mixed boundary
// conditions: restricted coboundaries, weighted mass matrices (Whitney
// Galerkin or diagonal circumcentric), and the analyses built on them.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hct/mesh.hpp"
#include "hct/toolbox.hpp"

namespace hct {

enum class MassScheme { WhitneyGalerkin, DecDiagonal };

const char* to_string(MassScheme s) noexcept;
/// "whitney-galerkin" (or "whitney") and "dec-diagonal" (or "dec");
/// throws ConfigError otherwise.
MassScheme parse_scheme(const std::string& name);

/// Weight of one degree: unit, a positive scalar per cell, or an SPD matrix
/// per cell acting on form values. Matrices are given in vector-proxy
/// coordinates; for 2-forms in 3-D the proxy of w = (w01, w02, w12) is
/// (w12, -w02, w01).
struct DegreeWeight {
  enum class Kind { Unit, Scalar, Matrix };
  Kind kind = Kind::Unit;
  std::vector<double> scalars;
  std::vector<hct::Matrix> matrices;
};

struct WeightField {
  std::vector<DegreeWeight> degrees;  // one per degree 0..dim; missing means unit

  static WeightField unit(int dim);
  /// Per-cell SPD matrices W = R^T diag(l) R (random rotation, eigenvalues in
  /// [lo, hi]) at every degree whose forms have more than one component,
  /// random scalars in [lo, hi] elsewhere.
  static WeightField random_spd(const SimplicialMesh& mesh, std::uint64_t seed, double lo = 0.5, double hi = 2.0);
  /// The same constant matrix on every cell at `degree`, unit elsewhere.
  static WeightField constant_matrix(const SimplicialMesh& mesh, int degree, const hct::Matrix& w);
  /// The same constant scalar on every cell at every degree.
  static WeightField constant_scalar(const SimplicialMesh& mesh, double s);

  const DegreeWeight& at(int q) const;
};

/// Number of components of a q-form in d dimensions, binomial(d, q).
int form_components(int d, int q);

/// Throws InvalidWeight on non-positive scalars, asymmetric or non-SPD
/// matrices (eigenvalue below 1e-12) and wrong sizes.
void validate_weights(const SimplicialMesh& mesh, const WeightField& w);

/// Mass matrix of all q-simplices (no boundary elimination).
SparseMatrix mass_matrix(const SimplicialMesh& mesh, int q, const DegreeWeight& weight, MassScheme scheme);

class DiscreteDeRham {
 public:
  int dim() const { return dim_; }
  MassScheme scheme() const { return scheme_; }
  const std::string& partition_description() const { return partition_; }

  /// Global simplex indices of the retained q-DOFs, ascending.
  const std::vector<Index>& dofs(int q) const { return dofs_.at(q); }
  Index dof_count(int q) const { return static_cast<Index>(dofs_.at(q).size()); }

  /// Restricted coboundary d_q: DOFs(q) -> DOFs(q+1).
  const SparseMatrix& coboundary(int q) const { return coboundary_.at(q); }
  const SparseMatrix& mass(int q) const { return mass_.at(q); }

  /// Dense space for degree q (-1 and dim+1 give 0-dimensional spaces).
  /// Throws SizeLimitExceeded above kMaxDenseDim.
  SpacePtr space(int q) const;
  /// d_q as a bounded operator; zero maps at both ends (q = -1, q = dim).
  BoundedOperator op(int q) const;
  /// (d_{q-1}, d_q) with H1 the degree-q space.
  ComplexPair pair(int q) const;
  /// d_0, ..., d_{dim-1}.
  std::vector<BoundedOperator> chain() const;

 private:
  friend DiscreteDeRham assemble_complex(const SimplicialMesh&, const BoundaryPartition&, const WeightField&,
                                         MassScheme);
  int dim_ = 0;
  MassScheme scheme_ = MassScheme::WhitneyGalerkin;
  std::string partition_;
  std::vector<std::vector<Index>> dofs_;
  std::vector<SparseMatrix> coboundary_;
  std::vector<SparseMatrix> mass_;
  // Dense spaces are factored on first use and shared between copies.
  struct SpaceCache {
    std::mutex mutex;
    std::vector<SpacePtr> spaces;
  };
  std::shared_ptr<SpaceCache> cache_ = std::make_shared<SpaceCache>();
};

/// Eliminates every q-simplex that is a face of a Gamma_t facet.
DiscreteDeRham assemble_complex(const SimplicialMesh& mesh, const BoundaryPartition& partition,
                                const WeightField& weights = {}, MassScheme scheme = MassScheme::WhitneyGalerkin);

/// Exact check d_{q+1} d_q = 0 on the full integer incidence matrices.
bool integer_complex_property(const SimplicialMesh& mesh);

/// The long complex with vector-proxy labels and end operators.
struct ProxyComplex {
  std::vector<std::string> space_labels;     // e.g. L2, L2_eps, L2_mu, L2
  std::vector<std::string> operator_labels;  // e.g. grad_t, mu^-1 rot_t, div_t mu
  std::vector<std::string> adjoint_labels;   // e.g. -div_n eps, eps^-1 rot_n, -grad_n
  /// 2-D only: the rotated (grad-perp) reading of the same matrices.
  std::vector<std::string> rotated_operator_labels;
  std::vector<BoundedOperator> operators;
  LongComplexEnds ends;
};

/// Requires dim >= 2 (WrongDimension otherwise). The space weights are the
/// ones the complex was assembled with.
ProxyComplex vector_proxies(const DiscreteDeRham& c);

/// Gram-orthonormal basis of N(d_q) cap N(d_{q-1}*).
SubspaceBasis dirichlet_neumann_fields(const DiscreteDeRham& c, int q);

/// dim of the cohomology at each degree 0..dim via weighted ranks.
std::vector<Index> cohomology_dims(const DiscreteDeRham& c);

struct DualityReport {
  std::vector<Index> dims_t;  // d^q(Gamma_t)
  std::vector<Index> dims_n;  // d^q(Gamma_n)
  std::vector<bool> passed;   // d^q(Gamma_t) == d^{dim-q}(Gamma_n)
  bool all_passed = false;
};

DualityReport betti_duality_check(const SimplicialMesh& mesh, const BoundaryPartition& partition,
                                  MassScheme scheme = MassScheme::WhitneyGalerkin);

struct WeightIndependenceReport {
  std::vector<std::vector<Index>> dims;  // per weight field, per degree
  /// Largest principal angle between the harmonic space of each weight and
  /// that of the first one (Euclidean coordinates), per weight, per degree.
  std::vector<std::vector<double>> angles;
  bool dims_equal = false;
};

WeightIndependenceReport weight_independence(const SimplicialMesh& mesh, const BoundaryPartition& partition,
                                             const std::vector<WeightField>& weights,
                                             MassScheme scheme = MassScheme::WhitneyGalerkin);

struct PoincareDegree {
  int q = 0;
  ReducedConstant constant;          // of d_q
  double adjoint_constant = 0.0;     // of d_q*, from its own SVD
  double equality_residual = 0.0;    // |c - c*| / c
  double combined_margin = 0.0;      // (v') at degree q, min over samples
  int samples = 0;
};

/// c_q for q = 0..dim-1 and (v') on `samples` random fields per degree.
std::vector<PoincareDegree> poincare_constants(const DiscreteDeRham& c, std::uint64_t seed, int samples = 100);

/// Poincare constant of d_q from the sparse generalized eigenproblem
/// (values only); for meshes too large for the dense weighted SVD.
struct SparsePoincare {
  double constant = 0.0;
  Index kernel_dim = 0;
  /// (v') evaluated on random fields when the kernel of d_q and the range of
  /// d_{q-1} are trivial (only then are the samples automatically orthogonal
  /// to the harmonic space); NaN otherwise.
  double combined_margin = 0.0;
};

SparsePoincare poincare_constant_sparse(const DiscreteDeRham& c, int q, std::uint64_t seed, int samples = 100);

ElementSplit helmholtz_field_decomposition(const DiscreteDeRham& c, int q, const Vector& field);

}  // namespace hct
