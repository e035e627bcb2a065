#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hct/serialize.hpp"

namespace hct {
namespace {

TEST(Serialize, NonFiniteNumbersRoundTrip) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(number(inf), Json("inf"));
  EXPECT_EQ(number(-inf), Json("-inf"));
  EXPECT_TRUE(std::isnan(number_from(number(std::nan("")))));
  EXPECT_EQ(number_from(number(inf)), inf);
  EXPECT_EQ(number_from(Json(2.5)), 2.5);
  EXPECT_THROW(number_from(Json("big")), Error);
}

TEST(Serialize, MatrixFormatsRoundTrip) {
  Matrix m(2, 3);
  m << 1, 0, -2.5, 0, 3, 0;
  for (const char* f : {"dense", "coo"}) {
    EXPECT_EQ(matrix_from_json(matrix_to_json(m, f)), m) << f;
  }
  const Json sparse = sparse_to_json(m.sparseView());
  EXPECT_EQ(sparse["entries"].size(), 3u);
  EXPECT_EQ(matrix_from_json(sparse), m);
  EXPECT_THROW(matrix_to_json(m, "csr"), Error);
}

TEST(Serialize, MalformedMatricesAreParseErrors) {
  for (const char* text : {R"({"format":"dense","rows":2,"cols":2,"data":[1,2,3]})",
                           R"({"format":"coo","rows":2,"cols":2,"entries":[[2,0,1]]})",
                           R"({"format":"banded","rows":1,"cols":1})", R"({"rows":1})"}) {
    try {
      matrix_from_json(Json::parse(text));
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << text;
    }
  }
}

TEST(Serialize, OperatorAndConstant) {
  auto h = InnerProductSpace::euclidean(2, "E2");
  const Json j = operator_to_json(BoundedOperator::identity(h));
  EXPECT_EQ(j["domain"], "E2");
  EXPECT_EQ(matrix_from_json(j["matrix"]), Matrix::Identity(2, 2));
  const Json c = to_json(reduced_constant(BoundedOperator::zero(h, h)));
  EXPECT_EQ(c["c"], "inf");
  EXPECT_EQ(c["has_reduced_part"], false);
}

}  // namespace
}  // namespace hct
