#pragma once

// JSON forms of the core objects and diagnostic records.
//
// Matrices: {"format": "dense", "rows", "cols", "data": row-major} or
// {"format": "coo", "rows", "cols", "entries": [[i, j, v], ...]}.
// Non-finite numbers are written as the strings "inf", "-inf", "nan".

#include <string>

#include "json.hpp"

#include "hct/derham.hpp"
#include "hct/regular.hpp"
#include "hct/toolbox.hpp"

namespace hct {

using Json = nlohmann::ordered_json;

Json number(double v);
/// Inverse of number(); accepts numbers and the three special strings.
double number_from(const Json& j);

Json matrix_to_json(const Matrix& m, const std::string& format = "dense");
Json sparse_to_json(const SparseMatrix& m);
Matrix matrix_from_json(const Json& j);

Json space_to_json(const InnerProductSpace& s, const std::string& format = "dense");
Json operator_to_json(const BoundedOperator& a, const std::string& format = "dense");
Json basis_to_json(const SubspaceBasis& b);

Json to_json(const ReducedConstant& c);
Json to_json(const MiniFatReport& r);
Json to_json(const HelmholtzSplit& s);  // dimensions and residuals only
Json to_json(const ProjectorDiagnostics& d);
Json to_json(const AlternativeProjectionReport& r);
Json to_json(const DualityReport& r);
Json to_json(const WeightIndependenceReport& r);
Json to_json(const PoincareDegree& p);
Json to_json(const LongComplexEnds& e);

}  // namespace hct
