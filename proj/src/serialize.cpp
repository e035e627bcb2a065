#include "hct/serialize.hpp"

#include <cmath>
#include <limits>

namespace hct {

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorCode::ParseError, "expected a number, got " + j.dump());
}

Json matrix_to_json(const Matrix& m, const std::string& format) {
  Json j;
  j["format"] = format;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  if (format == "dense") {
    Json data = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) data.push_back(number(m(r, c)));
    }
    j["data"] = std::move(data);
  } else if (format == "coo") {
    Json entries = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) {
        if (m(r, c) != 0.0) entries.push_back(Json::array({r, c, number(m(r, c))}));
      }
    }
    j["entries"] = std::move(entries);
  } else {
    throw Error(ErrorCode::InvalidArgument, "matrix format must be 'dense' or 'coo'");
  }
  return j;
}

Json sparse_to_json(const SparseMatrix& m) {
  Json j;
  j["format"] = "coo";
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  // Row-major order regardless of storage, for stable output.
  std::vector<std::tuple<Index, Index, double>> e;
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) e.emplace_back(it.row(), it.col(), it.value());
  }
  std::sort(e.begin(), e.end());
  Json entries = Json::array();
  for (const auto& [r, c, v] : e) entries.push_back(Json::array({r, c, number(v)}));
  j["entries"] = std::move(entries);
  return j;
}

Matrix matrix_from_json(const Json& j) {
  try {
    const std::string format = j.at("format").get<std::string>();
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    if (rows < 0 || cols < 0) throw Error(ErrorCode::ParseError, "negative matrix shape");
    Matrix m = Matrix::Zero(rows, cols);
    if (format == "dense") {
      const Json& data = j.at("data");
      if (static_cast<Index>(data.size()) != rows * cols) throw Error(ErrorCode::ParseError, "dense data has the wrong length");
      for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = number_from(data[r * cols + c]);
      }
    } else if (format == "coo") {
      for (const Json& e : j.at("entries")) {
        const Index r = e.at(0).get<Index>();
        const Index c = e.at(1).get<Index>();
        if (r < 0 || r >= rows || c < 0 || c >= cols) throw Error(ErrorCode::ParseError, "coo entry out of range");
        m(r, c) += number_from(e.at(2));
      }
    } else {
      throw Error(ErrorCode::ParseError, "unknown matrix format '" + format + "'");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("matrix: ") + e.what());
  }
}

Json space_to_json(const InnerProductSpace& s, const std::string& format) {
  Json j;
  j["label"] = s.label();
  j["dim"] = s.dim();
  j["condition_estimate"] = number(s.factor().condition_estimate);
  j["gram"] = matrix_to_json(s.gram(), format);
  return j;
}

Json operator_to_json(const BoundedOperator& a, const std::string& format) {
  Json j;
  j["domain"] = a.domain()->label();
  j["codomain"] = a.codomain()->label();
  j["matrix"] = matrix_to_json(a.matrix(), format);
  return j;
}

Json basis_to_json(const SubspaceBasis& b) {
  Json j;
  j["kind"] = to_string(b.kind);
  j["space"] = b.space ? b.space->label() : "";
  j["dim"] = b.dim();
  j["columns"] = matrix_to_json(b.columns);
  return j;
}

Json to_json(const ReducedConstant& c) {
  Json j;
  j["c"] = number(c.c);
  j["sigma_min_positive"] = number(c.sigma_min_positive);
  j["has_reduced_part"] = c.has_reduced_part;
  j["rank"] = c.rank;
  j["rank_gap"] = number(c.rank_gap);
  return j;
}

Json to_json(const MiniFatReport& r) {
  Json j;
  j["ranges_closed"] = r.ranges_closed;
  j["rank_gap_a0"] = number(r.rank_gap_a0);
  j["rank_gap_a1"] = number(r.rank_gap_a1);
  j["cohomology_dim"] = r.cohomology_dim;
  j["cohomology_dim_hodge"] = r.cohomology_dim_hodge;
  j["a0"] = to_json(r.a0);
  j["a1"] = to_json(r.a1);
  j["c_a0_adjoint"] = number(r.c_a0_adjoint);
  j["c_a1_adjoint"] = number(r.c_a1_adjoint);
  j["helmholtz_sum_residual"] = number(r.helmholtz_sum_residual);
  j["helmholtz_cross_residual"] = number(r.helmholtz_cross_residual);
  j["combined_estimate_margin"] = number(r.combined_estimate_margin);
  j["samples"] = r.samples;
  j["compactness_vacuous"] = r.compactness_vacuous;
  j["passed"] = r.passed;
  return j;
}

Json to_json(const HelmholtzSplit& s) {
  Json j;
  j["dim_range"] = s.range.dim();
  j["dim_harmonic"] = s.harmonic.dim();
  j["dim_corange"] = s.corange.dim();
  j["harmonic_dim_hodge"] = s.harmonic_dim_hodge;
  j["sum_residual"] = number(s.sum_residual);
  j["cross_residual"] = number(s.cross_residual);
  j["self_adjoint_residual"] = number(s.self_adjoint_residual);
  return j;
}

Json to_json(const ProjectorDiagnostics& d) {
  Json j;
  j["q_idempotence"] = number(d.q_idempotence);
  j["n_idempotence"] = number(d.n_idempotence);
  j["qn"] = number(d.qn);
  j["nq"] = number(d.nq);
  j["sum"] = number(d.sum);
  j["i_minus_square"] = number(d.i_minus_square);
  j["i_minus_margin"] = number(d.i_minus_margin);
  j["passed"] = d.passed;
  return j;
}

Json to_json(const AlternativeProjectionReport& r) {
  Json j;
  j["harmonic_perp_d"] = r.harmonic_perp_d;
  j["harmonic_perp_delta"] = r.harmonic_perp_delta;
  j["kernel_equals_range"] = r.kernel_equals_range;
  j["cokernel_equals_corange"] = r.cokernel_equals_corange;
  j["dim_kernel_perp"] = r.dim_kernel_perp;
  j["dim_range_a0"] = r.dim_range_a0;
  j["dim_cokernel_perp"] = r.dim_cokernel_perp;
  j["dim_range_a1s"] = r.dim_range_a1s;
  j["passed"] = r.passed;
  return j;
}

Json to_json(const DualityReport& r) {
  Json j;
  j["dims_t"] = r.dims_t;
  j["dims_n"] = r.dims_n;
  j["passed"] = r.passed;
  j["all_passed"] = r.all_passed;
  return j;
}

Json to_json(const WeightIndependenceReport& r) {
  Json j;
  j["dims"] = r.dims;
  Json angles = Json::array();
  for (const auto& row : r.angles) {
    Json a = Json::array();
    for (double v : row) a.push_back(number(v));
    angles.push_back(std::move(a));
  }
  j["angles"] = std::move(angles);
  j["dims_equal"] = r.dims_equal;
  return j;
}

Json to_json(const PoincareDegree& p) {
  Json j;
  j["q"] = p.q;
  j["constant"] = to_json(p.constant);
  j["adjoint_constant"] = number(p.adjoint_constant);
  j["equality_residual"] = number(p.equality_residual);
  j["combined_margin"] = number(p.combined_margin);
  j["samples"] = p.samples;
  return j;
}

Json to_json(const LongComplexEnds& e) {
  Json j;
  j["kernel_left_dim"] = e.iota_left.domain()->dim();
  j["kernel_right_dim"] = e.iota_right.domain()->dim();
  j["end_cohomology"] = e.end_cohomology;
  j["left_projector_residual"] = number(e.left_projector_residual);
  j["right_projector_residual"] = number(e.right_projector_residual);
  return j;
}

}  // namespace hct
