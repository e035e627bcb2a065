// Command-line front end. Uses only the C interface.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "hct/hct.h"

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitError = 2;

int report_error(hct_status s) {
  std::fprintf(stderr, "hct: %s\n", hct_last_error());
  (void)s;
  return kExitError;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  hct_string_free(s);
  return out;
}

int emit(const std::string& content, const std::string& out) {
  if (out.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return 0;
  }
  if (hct_status s = hct_write_file_atomic(out.c_str(), content.c_str())) return report_error(s);
  return 0;
}

int cmd_run(const std::string& config, const std::string& out, bool quiet) {
  char* json = nullptr;
  int passed = 0;
  if (hct_status s = hct_run(config.c_str(), out.empty() ? nullptr : out.c_str(), &json, &passed)) {
    return report_error(s);
  }
  const std::string report = take(json);
  if (!quiet) {
    char* csv = nullptr;
    if (hct_status s = hct_report_convert(report.c_str(), "csv", &csv)) return report_error(s);
    const std::string table = take(csv);
    std::fwrite(table.data(), 1, table.size(), stdout);
  }
  std::printf("all_passed: %s\n", passed ? "true" : "false");
  return passed ? 0 : kExitFailed;
}

int cmd_mesh(const std::string& name, int n, const std::string& out) {
  hct_mesh* mesh = nullptr;
  if (hct_status s = hct_mesh_generate(name.c_str(), n, &mesh)) return report_error(s);
  char* json = nullptr;
  hct_status s = hct_mesh_to_json(mesh, &json);
  int dim = 0;
  size_t counts[4] = {0, 0, 0, 0};
  if (!s) s = hct_mesh_counts(mesh, &dim, counts);
  hct_mesh_free(mesh);
  if (s) return report_error(s);
  const int rc = emit(take(json), out);
  if (rc == 0 && !out.empty()) {
    std::printf("%s(%d): dim %d, simplices %zu %zu %zu %zu\n", name.c_str(), n, dim, counts[0], counts[1], counts[2],
                counts[3]);
  }
  return rc;
}

int cmd_report(const std::string& file, const std::string& format, const std::string& out) {
  char* text = nullptr;
  if (hct_status s = hct_read_file(file.c_str(), &text)) return report_error(s);
  const std::string doc = take(text);
  char* converted = nullptr;
  if (hct_status s = hct_report_convert(doc.c_str(), format.c_str(), &converted)) return report_error(s);
  return emit(take(converted), out);
}

int cmd_info(const std::string& generator, int n, const std::string& file, const std::string& partition,
             const std::string& scheme) {
  hct_mesh* mesh = nullptr;
  hct_status s = 0;
  if (!file.empty()) {
    char* text = nullptr;
    if ((s = hct_read_file(file.c_str(), &text))) return report_error(s);
    const std::string doc = take(text);
    s = hct_mesh_from_json(doc.c_str(), &mesh);
  } else {
    s = hct_mesh_generate(generator.c_str(), n, &mesh);
  }
  if (s) return report_error(s);
  hct_complex* c = nullptr;
  s = hct_complex_assemble(mesh, partition.c_str(), scheme.c_str(), &c);
  hct_mesh_free(mesh);
  if (s) return report_error(s);
  int dim = 0;
  hct_complex_dim(c, &dim);
  std::printf("q,dofs,harmonic_dim,poincare_constant\n");
  for (int q = 0; q <= dim && !s; ++q) {
    size_t dofs = 0, h = 0;
    double pc = 0.0;
    if ((s = hct_complex_dofs(c, q, &dofs)) || (s = hct_complex_harmonic_dim(c, q, &h)) ||
        (s = hct_complex_poincare_constant(c, q, &pc))) {
      break;
    }
    std::printf("%d,%zu,%zu,%.17g\n", q, dofs, h, pc);
  }
  hct_complex_free(c);
  return s ? report_error(s) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hilbert complexes, regular decompositions and discrete de Rham experiments"};
  app.set_version_flag("--version", std::string(hct_version()));
  app.require_subcommand(1);

  std::string config, out, format = "csv", name, file, params, partition = "none", scheme = "whitney";
  int n = 4;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run the experiments of a configuration file");
  run->add_option("config", config, "Configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Report path; overrides the configured output (.csv selects CSV)");
  run->add_flag("-q,--quiet", quiet, "Print only the summary line");

  auto* mesh = app.add_subcommand("mesh", "Generate a mesh and write it as JSON");
  mesh->add_option("generator", name, "interval | square-grid | square-hole | l-shape | cube-grid | cube-tunnel")
      ->required();
  auto* n_opt = mesh->add_option("-n,--n", n, "Resolution")->check(CLI::PositiveNumber);
  mesh->add_option("--params", params, "Generator parameters, e.g. n=8")->excludes(n_opt);
  mesh->add_option("--out", out, "Output path (default stdout)");

  auto* report = app.add_subcommand("report", "Convert a JSON report");
  report->add_option("file", file, "Report (JSON)")->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--out", out, "Output path (default stdout)");

  auto* info = app.add_subcommand("info", "Cohomology dimensions and constants of one discrete complex");
  auto* gen_opt = info->add_option("--generator", name, "Mesh generator");
  info->add_option("-n,--n", n, "Resolution")->check(CLI::PositiveNumber);
  info->add_option("--mesh", file, "Mesh file (JSON)")->check(CLI::ExistingFile)->excludes(gen_opt);
  info->add_option("--partition", partition, "none | all | halfspace:... | faces:[...] | labels:[...]");
  info->add_option("--scheme", scheme, "whitney | dec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  if (*run) return cmd_run(config, out, quiet);
  if (*mesh) {
    if (!params.empty()) {
      const auto eq = params.find('=');
      const std::string key = eq == std::string::npos ? std::string("n") : params.substr(0, eq);
      const std::string value = eq == std::string::npos ? params : params.substr(eq + 1);
      char* end = nullptr;
      const long v = std::strtol(value.c_str(), &end, 10);
      if (key != "n" || value.empty() || *end != '\0' || v < 1 || v > 1000000) {
        std::fprintf(stderr, "hct: --params expects n=<positive integer>\n");
        return kExitError;
      }
      n = static_cast<int>(v);
    }
    return cmd_mesh(name, n, out);
  }
  if (*report) return cmd_report(file, format, out);
  if (name.empty() && file.empty()) {
    std::fprintf(stderr, "hct: info needs --generator or --mesh\n");
    return kExitError;
  }
  return cmd_info(name, n, file, partition, scheme);
}
