#pragma once

// Glue between library meshes and the homology oracle.

#include <string>
#include <vector>

#include "hct/derham.hpp"
#include "oracle/snf.hpp"

namespace hct::testing {

inline std::vector<int> tuple(const Simplex& s, int q) { return std::vector<int>(s.begin(), s.begin() + q + 1); }

inline std::vector<std::vector<int>> cells_of(const SimplicialMesh& m) {
  std::vector<std::vector<int>> out;
  for (const Simplex& s : m.simplices(m.dim())) out.push_back(tuple(s, m.dim()));
  return out;
}

inline std::vector<std::vector<int>> facets_of(const SimplicialMesh& m, const std::vector<Index>& facets) {
  std::vector<std::vector<int>> out;
  for (Index f : facets) out.push_back(tuple(m.simplices(m.dim() - 1)[f], m.dim() - 1));
  return out;
}

/// Oracle dimensions of H^q(K, Gamma_t) for every q.
inline std::vector<long> oracle_dims(const SimplicialMesh& m, const BoundaryPartition& p, bool sparse = false) {
  if (sparse) return oracle::relative_betti_mod_p(m.dim(), cells_of(m), facets_of(m, p.gamma_t));
  return oracle::relative_homology(m.dim(), cells_of(m), facets_of(m, p.gamma_t)).betti;
}

struct SuiteCase {
  std::string generator;
  int n;
  std::string partition;
};

/// The mesh/partition suite used for the cohomology and duality checks.
inline std::vector<SuiteCase> cohomology_suite() {
  std::vector<SuiteCase> s;
  for (const char* p : {"none", "all", "faces:[x0]"}) s.push_back({"interval", 4, p});
  for (const char* p : {"none", "all", "faces:[x0]", "faces:[x0,x1]", "faces:[x0,y0]", "halfspace:x<=0.5"}) {
    s.push_back({"square-grid", 4, p});
  }
  for (const char* p : {"none", "all", "faces:[x0]", "faces:[x0,x1]"}) s.push_back({"square-hole", 1, p});
  for (const char* p : {"none", "all", "faces:[y0]"}) s.push_back({"l-shape", 2, p});
  for (const char* p : {"none", "all", "faces:[x0]", "faces:[x0,x1]", "faces:[x0,y0,z0]"}) {
    s.push_back({"cube-grid", 2, p});
  }
  for (const char* p : {"none", "all", "faces:[z0]", "faces:[x0,x1]"}) s.push_back({"cube-tunnel", 1, p});
  return s;
}

}  // namespace hct::testing
