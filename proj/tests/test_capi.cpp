#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "hct/hct.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  hct_string_free(s);
  return out;
}

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(hct_version(), "1.0.0");
  EXPECT_STREQ(hct_status_name(0), "Ok");
  EXPECT_STREQ(hct_status_name(17), "UnknownGenerator");
  EXPECT_STREQ(hct_status_name(999), "Unknown");
}

TEST(CApi, MeshLifecycle) {
  hct_mesh* m = nullptr;
  ASSERT_EQ(hct_mesh_generate("square-grid", 2, &m), HCT_OK);
  int dim = 0;
  size_t counts[4];
  ASSERT_EQ(hct_mesh_counts(m, &dim, counts), HCT_OK);
  EXPECT_EQ(dim, 2);
  EXPECT_EQ(counts[0], 9u);
  EXPECT_EQ(counts[1], 16u);
  EXPECT_EQ(counts[2], 8u);
  EXPECT_EQ(counts[3], 0u);
  char* json = nullptr;
  ASSERT_EQ(hct_mesh_to_json(m, &json), HCT_OK);
  const std::string text = take(json);
  hct_mesh* back = nullptr;
  ASSERT_EQ(hct_mesh_from_json(text.c_str(), &back), HCT_OK);
  size_t counts2[4];
  hct_mesh_counts(back, nullptr, counts2);
  EXPECT_EQ(counts2[2], 8u);
  hct_mesh_free(back);
  hct_mesh_free(m);
}

TEST(CApi, ErrorsCarryCodesAndMessages) {
  hct_mesh* m = nullptr;
  EXPECT_EQ(hct_mesh_generate("torus", 2, &m), 17);
  EXPECT_EQ(m, nullptr);
  EXPECT_NE(std::string(hct_last_error()).find("torus"), std::string::npos);
  EXPECT_EQ(hct_mesh_generate(nullptr, 2, &m), 1);
  EXPECT_EQ(hct_mesh_from_json("{", &m), 22);
  hct_mesh_free(nullptr);
  hct_complex_free(nullptr);
}

TEST(CApi, ComplexQueries) {
  hct_mesh* m = nullptr;
  ASSERT_EQ(hct_mesh_generate("square-hole", 1, &m), HCT_OK);
  hct_complex* c = nullptr;
  ASSERT_EQ(hct_complex_assemble(m, "none", "whitney", &c), HCT_OK);
  hct_mesh_free(m);
  size_t h = 0;
  ASSERT_EQ(hct_complex_harmonic_dim(c, 1, &h), HCT_OK);
  EXPECT_EQ(h, 1u);
  double pc = 0;
  ASSERT_EQ(hct_complex_poincare_constant(c, 0, &pc), HCT_OK);
  EXPECT_TRUE(std::isfinite(pc));
  EXPECT_GT(pc, 0.0);
  char* js = nullptr;
  ASSERT_EQ(hct_complex_matrix_json(c, "d", 0, &js), HCT_OK);
  EXPECT_NE(take(js).find("\"coo\""), std::string::npos);
  EXPECT_EQ(hct_complex_matrix_json(c, "d", 2, &js), 1);
  EXPECT_EQ(hct_complex_dofs(c, 7, &h), 1);
  EXPECT_EQ(hct_complex_assemble(nullptr, "none", "whitney", &c), 1);
  hct_complex_free(c);
}

TEST(CApi, RunWritesTheReport) {
  const auto dir = std::filesystem::temp_directory_path() / "hct-capi-run";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"schema": 1, "seed": 2, "mesh": {"generator": "interval", "n": 4},
                            "partition": ["none", "all"], "experiments": ["duality"]})";
  char* json = nullptr;
  int passed = -1;
  const std::string out = (dir / "r.csv").string();
  ASSERT_EQ(hct_run(cfg.string().c_str(), out.c_str(), &json, &passed), HCT_OK) << hct_last_error();
  EXPECT_EQ(passed, 1);
  const std::string report = take(json);
  char* csv = nullptr;
  ASSERT_EQ(hct_report_convert(report.c_str(), "csv", &csv), HCT_OK);
  char* file = nullptr;
  ASSERT_EQ(hct_read_file(out.c_str(), &file), HCT_OK);
  EXPECT_EQ(take(csv), take(file));
  EXPECT_EQ(hct_report_convert(report.c_str(), "yaml", &csv), 1);
  EXPECT_EQ(hct_run((dir / "missing.json").string().c_str(), nullptr, nullptr, nullptr), 23);
  std::filesystem::remove_all(dir);
}

}  // namespace
