#include "hct/hct.h"

#include <cstring>
#include <memory>
#include <string>

#include "hct/harness.hpp"

struct hct_mesh {
  hct::SimplicialMesh mesh;
};

struct hct_complex {
  std::unique_ptr<hct::DiscreteDeRham> complex;
};

namespace {

thread_local std::string last_error;

hct_status fail(hct::ErrorCode code, const std::string& message) {
  last_error = message;
  return static_cast<hct_status>(code);
}

template <typename F>
hct_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return HCT_OK;
  } catch (const hct::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return fail(hct::ErrorCode::SizeLimitExceeded, "out of memory");
  } catch (const std::exception& e) {
    return fail(hct::ErrorCode::Internal, e.what());
  } catch (...) {
    return fail(hct::ErrorCode::Internal, "unknown exception");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) throw hct::Error(hct::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

void need_degree(const hct::DiscreteDeRham& c, int q) {
  if (q < 0 || q > c.dim()) {
    throw hct::Error(hct::ErrorCode::InvalidArgument, "degree " + std::to_string(q) + " out of range");
  }
}

}  // namespace

extern "C" {

const char* hct_version(void) { return hct::kToolVersion; }

const char* hct_last_error(void) { return last_error.c_str(); }

const char* hct_status_name(hct_status code) {
  if (code < 0 || code > static_cast<int>(hct::ErrorCode::Internal)) return "Unknown";
  return hct::to_string(static_cast<hct::ErrorCode>(code));
}

hct_status hct_mesh_generate(const char* name, int n, hct_mesh** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = new hct_mesh{hct::generate_mesh(name, n)};
  });
}

hct_status hct_mesh_from_json(const char* text, hct_mesh** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new hct_mesh{hct::mesh_from_json(text)};
  });
}

hct_status hct_mesh_to_json(const hct_mesh* mesh, char** out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(out, "out");
    *out = dup(hct::mesh_to_json(mesh->mesh));
  });
}

hct_status hct_mesh_counts(const hct_mesh* mesh, int* dim, size_t counts[4]) {
  return guarded([&] {
    need(mesh, "mesh");
    if (dim) *dim = mesh->mesh.dim();
    if (counts) {
      for (int q = 0; q < 4; ++q) counts[q] = q <= mesh->mesh.dim() ? mesh->mesh.count(q) : 0;
    }
  });
}

void hct_mesh_free(hct_mesh* mesh) { delete mesh; }

hct_status hct_complex_assemble(const hct_mesh* mesh, const char* partition, const char* scheme, hct_complex** out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(out, "out");
    const auto part = hct::partition_from_spec(mesh->mesh, partition ? partition : "none");
    const auto s = hct::parse_scheme(scheme ? scheme : "whitney");
    auto c = std::make_unique<hct::DiscreteDeRham>(
        hct::assemble_complex(mesh->mesh, part, hct::WeightField::unit(mesh->mesh.dim()), s));
    *out = new hct_complex{std::move(c)};
  });
}

hct_status hct_complex_dim(const hct_complex* c, int* dim) {
  return guarded([&] {
    need(c, "complex");
    need(dim, "dim");
    *dim = c->complex->dim();
  });
}

hct_status hct_complex_dofs(const hct_complex* c, int q, size_t* dofs) {
  return guarded([&] {
    need(c, "complex");
    need(dofs, "dofs");
    need_degree(*c->complex, q);
    *dofs = static_cast<size_t>(c->complex->dof_count(q));
  });
}

hct_status hct_complex_harmonic_dim(const hct_complex* c, int q, size_t* dim) {
  return guarded([&] {
    need(c, "complex");
    need(dim, "dim");
    need_degree(*c->complex, q);
    const auto pair = c->complex->pair(q);
    *dim = static_cast<size_t>(hct::refined_helmholtz(pair).harmonic.dim());
  });
}

hct_status hct_complex_poincare_constant(const hct_complex* c, int q, double* constant) {
  return guarded([&] {
    need(c, "complex");
    need(constant, "constant");
    need_degree(*c->complex, q);
    *constant = hct::reduced_constant(c->complex->op(q)).c;
  });
}

hct_status hct_complex_matrix_json(const hct_complex* c, const char* kind, int q, char** out) {
  return guarded([&] {
    need(c, "complex");
    need(kind, "kind");
    need(out, "out");
    need_degree(*c->complex, q);
    const std::string k = kind;
    if (k == "d") {
      if (q >= c->complex->dim()) throw hct::Error(hct::ErrorCode::InvalidArgument, "no coboundary at top degree");
      *out = dup(hct::sparse_to_json(c->complex->coboundary(q)).dump());
    } else if (k == "mass") {
      *out = dup(hct::sparse_to_json(c->complex->mass(q)).dump());
    } else {
      throw hct::Error(hct::ErrorCode::InvalidArgument, "kind must be 'd' or 'mass'");
    }
  });
}

void hct_complex_free(hct_complex* c) { delete c; }

hct_status hct_run(const char* config_path, const char* output_override, char** report_json, int* all_passed) {
  return guarded([&] {
    need(config_path, "config_path");
    hct::ExperimentConfig cfg = hct::load_config(config_path);
    if (output_override && *output_override) {
      cfg.output_path = output_override;
      const std::string p = output_override;
      if (p.size() >= 4 && p.compare(p.size() - 4, 4, ".csv") == 0) cfg.output_format = "csv";
      if (p.size() >= 5 && p.compare(p.size() - 5, 5, ".json") == 0) cfg.output_format = "json";
    }
    const hct::Report report = hct::run(cfg);
    const std::string json = hct::report_json_string(report);
    if (!cfg.output_path.empty()) {
      hct::write_file_atomic(cfg.output_path, cfg.output_format == "csv" ? hct::report_to_csv(report) : json);
    }
    if (report_json) *report_json = dup(json);
    if (all_passed) *all_passed = report.all_passed ? 1 : 0;
  });
}

hct_status hct_report_convert(const char* report_json, const char* format, char** out) {
  return guarded([&] {
    need(report_json, "report_json");
    need(out, "out");
    const std::string f = format ? format : "json";
    hct::Json doc;
    try {
      doc = hct::Json::parse(report_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw hct::Error(hct::ErrorCode::ParseError, std::string("report: ") + e.what());
    }
    if (f == "csv") {
      *out = dup(hct::report_to_csv(doc));
    } else if (f == "json") {
      *out = dup(doc.dump(2) + "\n");
    } else {
      throw hct::Error(hct::ErrorCode::InvalidArgument, "format must be 'json' or 'csv'");
    }
  });
}

hct_status hct_read_file(const char* path, char** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = dup(hct::read_file(path));
  });
}

hct_status hct_write_file_atomic(const char* path, const char* content) {
  return guarded([&] {
    need(path, "path");
    need(content, "content");
    hct::write_file_atomic(path, content);
  });
}

void hct_string_free(char* s) { std::free(s); }

}  // extern "C"
