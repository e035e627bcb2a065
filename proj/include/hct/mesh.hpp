#pragma once

// Simplicial meshes of dimension 1 to 3, their oriented sub-simplices and
// integer incidence matrices, boundary partitions and the generator catalog.
//
// Every q-simplex is stored as its sorted vertex tuple; simplices of one
// dimension are numbered lexicographically. The orientation of a simplex is
// the one induced by its sorted tuple, so the incidence entry between a
// (q+1)-simplex and the face obtained by deleting its i-th vertex is (-1)^i.

#include <Eigen/SparseCore>

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hct/numeric.hpp"

namespace hct {

/// Sorted vertex indices; only the first q+1 entries are used, the rest are -1.
using Simplex = std::array<int, 4>;
using IncidenceMatrix = Eigen::SparseMatrix<int, Eigen::RowMajor>;

class SimplicialMesh {
 public:
  /// Validates the cells (InvertedCell, DuplicateCell, NonManifold,
  /// WrongDimension) and builds all sub-simplices. `vertices` is
  /// n_vertices x dim; cells hold dim+1 vertex indices each.
  SimplicialMesh(Matrix vertices, const std::vector<std::vector<int>>& cells);

  int dim() const { return dim_; }
  const Matrix& vertices() const { return vertices_; }
  Index count(int q) const { return static_cast<Index>(simplices_.at(q).size()); }
  const std::vector<Simplex>& simplices(int q) const { return simplices_.at(q); }

  /// Index of a sorted q-simplex, or -1.
  Index find(int q, const Simplex& s) const;

  /// D_q: (q+1)-simplices x q-simplices, entries in {-1, 0, 1}.
  const IncidenceMatrix& incidence(int q) const { return incidence_.at(q); }

  /// Facets (codimension-1 simplices) with exactly one adjacent cell, ascending.
  const std::vector<Index>& boundary_facets() const { return boundary_facets_; }

  /// Labels attached to boundary facets, keyed by facet index.
  const std::map<Index, std::string>& boundary_labels() const { return labels_; }
  void set_boundary_label(Index facet, std::string label);

  Eigen::VectorXd centroid(int q, Index i) const;

  /// Alternating count of simplices.
  long euler_characteristic() const;

 private:
  int dim_ = 0;
  Matrix vertices_;
  std::vector<std::vector<Simplex>> simplices_;
  std::vector<IncidenceMatrix> incidence_;
  std::vector<Index> boundary_facets_;
  std::map<Index, std::string> labels_;
};

/// Signed volume (times dim!) of a cell given in the order of its vertex list.
double signed_volume(const Matrix& vertices, const std::vector<int>& cell);

/// Boundary facets split into Gamma_t (essential conditions) and Gamma_n.
struct BoundaryPartition {
  std::vector<Index> gamma_t;
  std::vector<Index> gamma_n;
  std::string description;
};

using FacetPredicate = std::function<bool(const Eigen::VectorXd& centroid, const std::string& label)>;

BoundaryPartition mark_boundary(const SimplicialMesh& mesh, const FacetPredicate& on_gamma_t,
                                std::string description = "custom");

/// Named predicates:
///   none | all
///   halfspace:x<=0.5   (x|y|z, one of <= < >= >, a number)
///   faces:[x0,x1,y0,y1,z0,z1]   (facets on the bounding-box sides)
///   labels:[a,b,...]   (facets whose boundary label is listed)
/// Throws ConfigError on malformed specs.
BoundaryPartition partition_from_spec(const SimplicialMesh& mesh, const std::string& spec);

/// Swaps the roles of Gamma_t and Gamma_n.
BoundaryPartition complement(const BoundaryPartition& p);

/// q-simplices that are faces of some Gamma_t facet, per degree, as sorted
/// index lists. These are the eliminated degrees of freedom.
std::vector<std::vector<Index>> gamma_t_closure(const SimplicialMesh& mesh, const BoundaryPartition& p);

/// Generator catalog. Counts of top cells:
///   interval(n)     n edges on [0,1]
///   square-grid(n)  2n^2 triangles on [0,1]^2, diagonals alternating (union jack)
///   square-hole(n)  16n^2 triangles, 3n x 3n grid with the middle n x n block removed
///   l-shape(n)      6n^2 triangles, 2n x 2n grid without the upper-right quadrant
///   cube-grid(n)    6n^3 tetrahedra, each cube cut along its main diagonal
///   cube-tunnel(n)  144n^3 tetrahedra, 3n^3 grid minus the middle n x n x 3n column
/// Throws UnknownGenerator or BadParams (n < 1, or above the size limit).
SimplicialMesh generate_mesh(const std::string& name, int n);

const std::vector<std::string>& generator_names();

/// Versioned JSON mesh format; see README.
std::string mesh_to_json(const SimplicialMesh& mesh);
SimplicialMesh mesh_from_json(const std::string& text);

}  // namespace hct
