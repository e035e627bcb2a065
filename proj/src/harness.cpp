#include "hct/harness.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace hct {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- files

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto '" + path + "'");
  }
}

// ---------------------------------------------------------------- threads

int thread_budget() {
  if (const char* env = std::getenv("HCT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(thread_budget()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failed_at = n;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          // Report the first failing index, as a serial loop would.
          if (i < failed_at) {
            failed_at = i;
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------- config

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"mini-fat",        "duality",        "weights",
                                              "poincare-convergence", "helmholtz-demo",
                                              "regular-decomposition-suite"};
  return names;
}

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, field + ": " + what);
}

void allow_keys(const Json& obj, const std::string& field, std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) config_error(field + "/" + it.key(), "unknown field");
  }
}

template <typename T>
T get_as(const Json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(field, "has the wrong type (" + std::string(j.type_name()) + ")");
  }
}

int positive_int(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) config_error(field, "must be an integer");
  const int v = j.get<int>();
  if (v < 1) config_error(field, "must be positive");
  return v;
}

void check_weight_spec(const Json& w, const std::string& field) {
  if (w.is_string()) {
    const std::string s = w.get<std::string>();
    if (s != "unit" && s != "random-spd") config_error(field, "unknown weight '" + s + "'");
    return;
  }
  if (!w.is_object()) config_error(field, "must be a string or an object");
  const std::string kind = get_as<std::string>(w.value("kind", Json("")), field + "/kind");
  if (kind == "unit") {
    allow_keys(w, field, {"kind"});
  } else if (kind == "scalar") {
    allow_keys(w, field, {"kind", "value"});
    if (!w.contains("value") || !w["value"].is_number() || !(w["value"].get<double>() > 0.0)) {
      config_error(field + "/value", "must be a positive number");
    }
  } else if (kind == "random-spd") {
    allow_keys(w, field, {"kind", "seed", "min", "max"});
  } else if (kind == "matrix") {
    allow_keys(w, field, {"kind", "degree", "value"});
    if (!w.contains("degree") || !w["degree"].is_number_integer()) config_error(field + "/degree", "required integer");
    if (!w.contains("value") || !w["value"].is_array()) config_error(field + "/value", "required matrix (array of rows)");
  } else {
    config_error(field + "/kind", "unknown weight kind '" + kind + "'");
  }
}

WeightField build_weights(const Json& w, const SimplicialMesh& mesh, std::uint64_t seed) {
  if (w.is_string()) {
    if (w.get<std::string>() == "random-spd") return WeightField::random_spd(mesh, seed);
    return WeightField::unit(mesh.dim());
  }
  const std::string kind = w["kind"].get<std::string>();
  if (kind == "scalar") return WeightField::constant_scalar(mesh, w["value"].get<double>());
  if (kind == "random-spd") {
    return WeightField::random_spd(mesh, w.value("seed", seed), w.value("min", 0.5), w.value("max", 2.0));
  }
  if (kind == "matrix") {
    const auto rows = w["value"].get<std::vector<std::vector<double>>>();
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != static_cast<std::size_t>(m.cols())) {
        throw Error(ErrorCode::ConfigError, "weights/value: ragged matrix");
      }
      for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    }
    return WeightField::constant_matrix(mesh, w["degree"].get<int>(), m);
  }
  return WeightField::unit(mesh.dim());
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) config_error("/", "config must be a JSON object");
  allow_keys(doc, "", {"schema", "seed", "mesh", "partition", "weights", "scheme", "degrees", "experiments", "output"});

  ExperimentConfig cfg;
  cfg.echo = doc;
  if (!doc.contains("schema")) config_error("/schema", "required");
  if (!doc["schema"].is_number_integer() || doc["schema"].get<int>() != kConfigSchema) {
    config_error("/schema", "unsupported schema " + doc["schema"].dump() + " (expected 1)");
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) config_error("/seed", "must be a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }

  if (!doc.contains("mesh") || !doc["mesh"].is_object()) config_error("/mesh", "required object");
  const Json& mesh = doc["mesh"];
  if (mesh.contains("file")) {
    allow_keys(mesh, "/mesh", {"file"});
    fs::path p(get_as<std::string>(mesh["file"], "/mesh/file"));
    if (p.is_relative()) p = fs::path(base_dir) / p;
    cfg.mesh_file = p.string();
  } else {
    allow_keys(mesh, "/mesh", {"generator", "n"});
    if (!mesh.contains("generator")) config_error("/mesh", "needs 'generator' or 'file'");
    cfg.mesh_generator = get_as<std::string>(mesh["generator"], "/mesh/generator");
    const auto& names = generator_names();
    if (std::find(names.begin(), names.end(), cfg.mesh_generator) == names.end()) {
      config_error("/mesh/generator", "unknown generator '" + cfg.mesh_generator + "'");
    }
    if (!mesh.contains("n")) config_error("/mesh/n", "required");
    cfg.mesh_n = positive_int(mesh["n"], "/mesh/n");
  }

  if (doc.contains("partition")) {
    const Json& p = doc["partition"];
    if (p.is_string()) {
      cfg.partitions = {p.get<std::string>()};
    } else if (p.is_array() && !p.empty()) {
      cfg.partitions.clear();
      for (std::size_t i = 0; i < p.size(); ++i) {
        cfg.partitions.push_back(get_as<std::string>(p[i], "/partition/" + std::to_string(i)));
      }
    } else {
      config_error("/partition", "must be a string or a non-empty array of strings");
    }
  }
  if (doc.contains("weights")) {
    cfg.weights = doc["weights"];
    check_weight_spec(cfg.weights, "/weights");
  }
  if (doc.contains("scheme")) {
    try {
      cfg.scheme = parse_scheme(get_as<std::string>(doc["scheme"], "/scheme"));
    } catch (const Error&) {
      config_error("/scheme", "must be 'whitney-galerkin' or 'dec-diagonal'");
    }
  }
  if (doc.contains("degrees")) {
    if (!doc["degrees"].is_array()) config_error("/degrees", "must be an array of integers");
    for (std::size_t i = 0; i < doc["degrees"].size(); ++i) {
      const Json& q = doc["degrees"][i];
      if (!q.is_number_integer() || q.get<int>() < 0 || q.get<int>() > 3) {
        config_error("/degrees/" + std::to_string(i), "must be an integer in 0..3");
      }
      cfg.degrees.push_back(q.get<int>());
    }
  }

  if (!doc.contains("experiments") || !doc["experiments"].is_array()) config_error("/experiments", "required array");
  const auto& known = experiment_names();
  for (std::size_t i = 0; i < doc["experiments"].size(); ++i) {
    const Json& e = doc["experiments"][i];
    const std::string field = "/experiments/" + std::to_string(i);
    ExperimentSpec spec;
    if (e.is_string()) {
      spec.name = e.get<std::string>();
    } else if (e.is_object()) {
      if (!e.contains("name")) config_error(field, "needs a 'name'");
      spec.name = get_as<std::string>(e["name"], field + "/name");
      spec.options = e;
      spec.options.erase("name");
    } else {
      config_error(field, "must be a name or an object");
    }
    if (std::find(known.begin(), known.end(), spec.name) == known.end()) {
      config_error(field, "unknown experiment '" + spec.name + "'");
    }
    cfg.experiments.push_back(std::move(spec));
  }

  if (doc.contains("output")) {
    const Json& o = doc["output"];
    if (!o.is_object()) config_error("/output", "must be an object");
    allow_keys(o, "/output", {"path", "format"});
    if (o.contains("path")) cfg.output_path = get_as<std::string>(o["path"], "/output/path");
    if (o.contains("format")) cfg.output_format = get_as<std::string>(o["format"], "/output/format");
    if (cfg.output_format != "json" && cfg.output_format != "csv") {
      config_error("/output/format", "must be 'json' or 'csv'");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  const fs::path dir = fs::path(path).parent_path();
  return parse_config(text, dir.empty() ? "." : dir.string());
}

// ---------------------------------------------------------------- experiments

namespace {

constexpr double kIdentityTol = 1e-9;
constexpr double kHelmholtzTol = 1e-10;
constexpr double kConstantTol = 1e-10;
constexpr double kMarginTol = 1e-9;

struct MeshCase {
  std::string label;
  SimplicialMesh mesh;
};

struct Context {
  const ExperimentConfig& cfg;
  const MeshCase& mesh;
  WeightField weights;
  std::vector<int> degrees;
  std::uint64_t seed;
};

// Options are validated against the keys each experiment understands.
void allow_options(const ExperimentSpec& e, std::initializer_list<const char*> keys) {
  allow_keys(e.options, "/experiments(" + e.name + ")", keys);
}

// A check passes when value <= tolerance, or for margins when value >= -tolerance.
Record check(const std::string& mesh, const std::string& part, int q, const std::string& quantity, double value,
             double tol) {
  const bool margin = quantity.size() >= 7 && quantity.compare(quantity.size() - 7, 7, "_margin") == 0;
  const bool ok = margin ? value >= -tol : value <= tol;
  return {mesh, part, q, quantity, value, tol, ok ? "pass" : "fail"};
}

Record info(const std::string& mesh, const std::string& part, int q, const std::string& quantity, double value) {
  return {mesh, part, q, quantity, value, 0.0, "info"};
}

void finish(ExperimentResult& r) {
  r.passed = std::none_of(r.records.begin(), r.records.end(), [](const Record& x) { return x.status == "fail"; });
}

double c_residual(const ReducedConstant& a, double adjoint_c) {
  if (!a.has_reduced_part) return std::isinf(adjoint_c) ? 0.0 : 1.0;
  return std::abs(a.c - adjoint_c) / a.c;
}

struct Task {
  std::size_t partition;
  int q;
};

std::vector<Task> tasks_for(std::size_t partitions, const std::vector<int>& degrees) {
  std::vector<Task> t;
  for (std::size_t p = 0; p < partitions; ++p) {
    for (int q : degrees) t.push_back({p, q});
  }
  return t;
}

std::vector<DiscreteDeRham> assemble_all(const Context& ctx, std::vector<BoundaryPartition>& parts) {
  parts.clear();
  for (const std::string& s : ctx.cfg.partitions) parts.push_back(partition_from_spec(ctx.mesh.mesh, s));
  std::vector<DiscreteDeRham> out;
  for (const auto& p : parts) out.push_back(assemble_complex(ctx.mesh.mesh, p, ctx.weights, ctx.cfg.scheme));
  return out;
}

ExperimentResult run_mini_fat(const Context& ctx, const ExperimentSpec& spec) {
  allow_options(spec, {"samples", "expect"});
  const int samples = spec.options.value("samples", 100);
  ExperimentResult res{spec.name, {}, Json::array(), true};
  std::vector<BoundaryPartition> parts;
  const auto complexes = assemble_all(ctx, parts);
  const auto tasks = tasks_for(parts.size(), ctx.degrees);
  std::vector<MiniFatReport> reports(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const ComplexPair cp = complexes[tasks[i].partition].pair(tasks[i].q);
    reports[i] = mini_fat(cp, derive_seed(ctx.seed, i), samples);
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string& m = ctx.mesh.label;
    const std::string& p = parts[tasks[i].partition].description;
    const int q = tasks[i].q;
    const MiniFatReport& r = reports[i];
    auto& rec = res.records;
    rec.push_back(info(m, p, q, "cohomology_dim", static_cast<double>(r.cohomology_dim)));
    rec.push_back(check(m, p, q, "cohomology_dim_crosscheck",
                        std::abs(static_cast<double>(r.cohomology_dim - r.cohomology_dim_hodge)), 0.0));
    if (spec.options.contains("expect")) {
      const Json& ex = spec.options["expect"];
      const std::string key = std::to_string(q);
      if (ex.contains(key)) {
        rec.push_back(check(m, p, q, "cohomology_dim_expected_error",
                            std::abs(static_cast<double>(r.cohomology_dim) - ex[key].get<double>()), 0.0));
      }
    }
    rec.push_back(info(m, p, q, "c_a0", r.a0.c));
    rec.push_back(info(m, p, q, "c_a1", r.a1.c));
    rec.push_back(check(m, p, q, "c_a0_adjoint_residual", c_residual(r.a0, r.c_a0_adjoint), kConstantTol));
    rec.push_back(check(m, p, q, "c_a1_adjoint_residual", c_residual(r.a1, r.c_a1_adjoint), kConstantTol));
    rec.push_back(info(m, p, q, "rank_gap_a0", r.rank_gap_a0));
    rec.push_back(info(m, p, q, "rank_gap_a1", r.rank_gap_a1));
    rec.push_back(check(m, p, q, "helmholtz_sum_residual", r.helmholtz_sum_residual, kHelmholtzTol));
    rec.push_back(check(m, p, q, "helmholtz_cross_residual", r.helmholtz_cross_residual, kHelmholtzTol));
    rec.push_back(check(m, p, q, "combined_estimate_margin", r.combined_estimate_margin, kMarginTol));
    Json d = to_json(r);
    d["mesh"] = m;
    d["partition"] = p;
    d["q"] = q;
    res.details.push_back(std::move(d));
  }
  finish(res);
  return res;
}

struct SuiteEntry {
  std::string generator;
  int n;
  std::vector<std::string> partitions;
};

const std::vector<SuiteEntry>& duality_suite() {
  static const std::vector<SuiteEntry> suite{
      {"interval", 4, {"none", "all", "faces:[x0]"}},
      {"square-grid", 4, {"none", "all", "faces:[x0]", "faces:[x0,x1]", "halfspace:x<=0.5"}},
      {"square-hole", 1, {"none", "all", "faces:[x0]", "faces:[x0,x1]"}},
      {"l-shape", 2, {"none", "all", "faces:[y0]"}},
      {"cube-grid", 2, {"none", "all", "faces:[x0]", "faces:[x0,x1]"}},
      {"cube-tunnel", 1, {"none", "all", "faces:[z0]"}},
  };
  return suite;
}

ExperimentResult run_duality(const Context& ctx, const ExperimentSpec& spec) {
  allow_options(spec, {"catalog"});
  ExperimentResult res{spec.name, {}, Json::array(), true};
  struct Job {
    std::string label;
    std::shared_ptr<const SimplicialMesh> mesh;
    std::string partition;
  };
  std::vector<Job> jobs;
  if (spec.options.value("catalog", false)) {
    for (const SuiteEntry& e : duality_suite()) {
      auto mesh = std::make_shared<const SimplicialMesh>(generate_mesh(e.generator, e.n));
      const std::string label = e.generator + "(" + std::to_string(e.n) + ")";
      for (const auto& p : e.partitions) jobs.push_back({label, mesh, p});
    }
  } else {
    auto mesh = std::make_shared<const SimplicialMesh>(ctx.mesh.mesh);
    for (const auto& p : ctx.cfg.partitions) jobs.push_back({ctx.mesh.label, mesh, p});
  }
  std::vector<DualityReport> reports(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    reports[i] = betti_duality_check(*jobs[i].mesh, partition_from_spec(*jobs[i].mesh, jobs[i].partition),
                                     ctx.cfg.scheme);
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const DualityReport& r = reports[i];
    const int d = static_cast<int>(r.dims_t.size()) - 1;
    for (int q = 0; q <= d; ++q) {
      res.records.push_back(info(jobs[i].label, jobs[i].partition, q, "d_t", static_cast<double>(r.dims_t[q])));
      res.records.push_back(info(jobs[i].label, jobs[i].partition, q, "d_n_dual",
                                 static_cast<double>(r.dims_n[d - q])));
      res.records.push_back(check(jobs[i].label, jobs[i].partition, q, "duality_gap",
                                  std::abs(static_cast<double>(r.dims_t[q] - r.dims_n[d - q])), 0.0));
    }
    Json dj = to_json(r);
    dj["mesh"] = jobs[i].label;
    dj["partition"] = jobs[i].partition;
    res.details.push_back(std::move(dj));
  }
  finish(res);
  return res;
}

ExperimentResult run_weights(const Context& ctx, const ExperimentSpec& spec) {
  allow_options(spec, {"count", "min", "max"});
  const int count = spec.options.value("count", 10);
  const double lo = spec.options.value("min", 0.5);
  const double hi = spec.options.value("max", 2.0);
  if (count < 1) config_error("/experiments(weights)/count", "must be positive");
  ExperimentResult res{spec.name, {}, Json::array(), true};
  std::vector<WeightField> fields{ctx.weights};
  for (int i = 0; i < count; ++i) {
    fields.push_back(WeightField::random_spd(ctx.mesh.mesh, derive_seed(ctx.seed, 1000 + i), lo, hi));
  }
  std::vector<WeightIndependenceReport> reports(ctx.cfg.partitions.size());
  parallel_for(reports.size(), [&](std::size_t i) {
    const BoundaryPartition p = partition_from_spec(ctx.mesh.mesh, ctx.cfg.partitions[i]);
    reports[i] = weight_independence(ctx.mesh.mesh, p, fields, ctx.cfg.scheme);
  });
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const std::string& p = ctx.cfg.partitions[i];
    for (int q : ctx.degrees) {
      Index lo_d = r.dims[0][q], hi_d = r.dims[0][q];
      double angle = 0.0;
      for (std::size_t w = 0; w < r.dims.size(); ++w) {
        lo_d = std::min(lo_d, r.dims[w][q]);
        hi_d = std::max(hi_d, r.dims[w][q]);
        angle = std::max(angle, r.angles[w][q]);
      }
      res.records.push_back(info(ctx.mesh.label, p, q, "harmonic_dim", static_cast<double>(r.dims[0][q])));
      res.records.push_back(check(ctx.mesh.label, p, q, "harmonic_dim_spread", static_cast<double>(hi_d - lo_d), 0.0));
      res.records.push_back(info(ctx.mesh.label, p, q, "max_subspace_angle", angle));
    }
    Json dj = to_json(r);
    dj["partition"] = p;
    dj["weights"] = static_cast<int>(fields.size());
    res.details.push_back(std::move(dj));
  }
  finish(res);
  return res;
}

ExperimentResult run_poincare(const Context& ctx, const ExperimentSpec& spec) {
  allow_options(spec, {"generator", "resolutions", "partition", "degree", "target", "rel_tol", "samples",
                       "dense_limit"});
  std::string generator = spec.options.value("generator", std::string());
  if (generator.empty()) generator = ctx.cfg.mesh_generator.empty() ? "square-grid" : ctx.cfg.mesh_generator;
  const std::vector<int> resolutions = spec.options.value("resolutions", std::vector<int>{8, 16, 32, 64});
  const std::string partition = spec.options.value("partition", std::string("all"));
  const int q = spec.options.value("degree", 0);
  const double rel_tol = spec.options.value("rel_tol", 0.02);
  const int samples = spec.options.value("samples", 100);
  const Index dense_limit = spec.options.value("dense_limit", 2500);
  if (resolutions.empty()) config_error("/experiments(poincare-convergence)/resolutions", "must not be empty");

  double target = std::numeric_limits<double>::quiet_NaN();
  if (spec.options.contains("target")) {
    target = spec.options["target"].get<double>();
  } else if (q == 0 && partition == "all") {
    if (generator == "square-grid") target = 1.0 / (std::numbers::pi * std::sqrt(2.0));
    if (generator == "interval") target = 1.0 / std::numbers::pi;
    if (generator == "cube-grid") target = 1.0 / (std::numbers::pi * std::sqrt(3.0));
  }

  struct Point {
    std::string label;
    double c = 0.0;
    double adjoint_residual = 0.0;
    double margin = 0.0;
    std::string route;
  };
  std::vector<Point> pts(resolutions.size());
  parallel_for(resolutions.size(), [&](std::size_t i) {
    const int n = resolutions[i];
    const SimplicialMesh mesh = generate_mesh(generator, n);
    const DiscreteDeRham c = assemble_complex(mesh, partition_from_spec(mesh, partition),
                                              WeightField::unit(mesh.dim()), ctx.cfg.scheme);
    Point& pt = pts[i];
    pt.label = generator + "(" + std::to_string(n) + ")";
    const std::uint64_t seed = derive_seed(ctx.seed, static_cast<std::uint64_t>(n));
    if (c.dof_count(q) <= dense_limit && c.dof_count(q + 1) <= dense_limit) {
      pt.route = "weighted-svd";
      const BoundedOperator a = c.op(q);
      const ReducedConstant rc = reduced_constant(a);
      if (!rc.has_reduced_part) throw Error(ErrorCode::NoReducedPart, pt.label + ": d_q = 0");
      pt.c = rc.c;
      pt.adjoint_residual = c_residual(rc, reduced_constant(adjoint(a)).c);
      pt.margin = mini_fat(c.pair(q), seed, samples).combined_estimate_margin;
    } else {
      pt.route = "normal-spectrum";
      const SparsePoincare sp = poincare_constant_sparse(c, q, seed, samples);
      pt.c = sp.constant;
      pt.margin = sp.combined_margin;
      pt.adjoint_residual = std::numeric_limits<double>::quiet_NaN();
    }
  });

  ExperimentResult res{spec.name, {}, Json::array(), true};
  for (const Point& pt : pts) {
    res.records.push_back(info(pt.label, partition, q, "poincare_constant", pt.c));
    if (!std::isnan(pt.adjoint_residual)) {
      res.records.push_back(check(pt.label, partition, q, "adjoint_constant_residual", pt.adjoint_residual,
                                  kConstantTol));
    }
    if (!std::isnan(pt.margin)) {
      res.records.push_back(check(pt.label, partition, q, "combined_estimate_margin", pt.margin, kMarginTol));
    }
    Json d;
    d["mesh"] = pt.label;
    d["route"] = pt.route;
    d["constant"] = number(pt.c);
    res.details.push_back(std::move(d));
  }
  const std::string series = generator + "(" + std::to_string(resolutions.front()) + ".." +
                             std::to_string(resolutions.back()) + ")";
  if (!std::isnan(target)) {
    res.records.push_back(info(series, partition, q, "target", target));
    res.records.push_back(check(series, partition, q, "relative_error_finest",
                                std::abs(pts.back().c - target) / target, rel_tol));
    // Successive values must move towards the target.
    double violation = 0.0;
    const double dir = target >= pts.front().c ? 1.0 : -1.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      violation = std::max(violation, dir * (pts[i - 1].c - pts[i].c) / target);
    }
    res.records.push_back(check(series, partition, q, "monotonicity_violation", violation, 0.0));
  }
  finish(res);
  return res;
}

ExperimentResult run_helmholtz(const Context& ctx, const ExperimentSpec& spec) {
  allow_options(spec, {"samples"});
  const int samples = spec.options.value("samples", 100);
  ExperimentResult res{spec.name, {}, Json::array(), true};
  std::vector<BoundaryPartition> parts;
  const auto complexes = assemble_all(ctx, parts);
  const auto tasks = tasks_for(parts.size(), ctx.degrees);
  struct Out {
    HelmholtzSplit split;
    double orth = 0.0, recon = 0.0, energy = 0.0;
  };
  std::vector<std::optional<Out>> outs(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const ComplexPair cp = complexes[tasks[i].partition].pair(tasks[i].q);
    Out o{refined_helmholtz(cp)};
    const InnerProductSpace& h1 = *cp.h1();
    const Matrix z = random_samples(h1.dim(), samples, derive_seed(ctx.seed, i));
    for (int s = 0; s < samples; ++s) {
      const Vector x = z.col(s);
      const ElementSplit e = decompose_element(o.split, x);
      const double xx = h1.inner(x, x);
      if (!(xx > 0.0)) continue;
      o.orth = std::max(o.orth, e.orthogonality_residual);
      o.recon = std::max(o.recon, e.reconstruction_residual);
      const double parts_energy = h1.inner(e.range_part, e.range_part) + h1.inner(e.harmonic_part, e.harmonic_part) +
                                  h1.inner(e.corange_part, e.corange_part);
      o.energy = std::max(o.energy, std::abs(xx - parts_energy) / xx);
    }
    outs[i] = std::move(o);
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Out& o = *outs[i];
    const std::string& m = ctx.mesh.label;
    const std::string& p = parts[tasks[i].partition].description;
    const int q = tasks[i].q;
    auto& rec = res.records;
    rec.push_back(info(m, p, q, "dim_range", static_cast<double>(o.split.range.dim())));
    rec.push_back(info(m, p, q, "dim_harmonic", static_cast<double>(o.split.harmonic.dim())));
    rec.push_back(info(m, p, q, "dim_corange", static_cast<double>(o.split.corange.dim())));
    rec.push_back(check(m, p, q, "projector_sum_residual", o.split.sum_residual, kHelmholtzTol));
    rec.push_back(check(m, p, q, "projector_cross_residual", o.split.cross_residual, kHelmholtzTol));
    rec.push_back(check(m, p, q, "self_adjoint_residual", o.split.self_adjoint_residual, kHelmholtzTol));
    rec.push_back(check(m, p, q, "orthogonality_residual", o.orth, kHelmholtzTol));
    rec.push_back(check(m, p, q, "reconstruction_residual", o.recon, kHelmholtzTol));
    rec.push_back(check(m, p, q, "energy_residual", o.energy, kHelmholtzTol));
    Json d = to_json(o.split);
    d["partition"] = p;
    d["q"] = q;
    res.details.push_back(std::move(d));
  }
  finish(res);
  return res;
}

ExperimentResult run_regular(const Context& ctx, const ExperimentSpec& spec) {
  allow_options(spec, {"samples"});
  const int samples = spec.options.value("samples", 20);
  ExperimentResult res{spec.name, {}, Json::array(), true};
  std::vector<BoundaryPartition> parts;
  const auto complexes = assemble_all(ctx, parts);
  std::vector<int> degrees;
  for (int q : ctx.degrees) {
    if (q < ctx.mesh.mesh.dim()) degrees.push_back(q);
  }
  const auto tasks = tasks_for(parts.size(), degrees);
  std::vector<std::vector<Record>> recs(tasks.size());
  std::vector<Json> details(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const std::string& m = ctx.mesh.label;
    const std::string& p = parts[tasks[i].partition].description;
    const int q = tasks[i].q;
    auto& rec = recs[i];
    const auto cp = std::make_shared<const ComplexPair>(complexes[tasks[i].partition].pair(q));
    if (cp->a1().is_zero()) {
      rec.push_back(info(m, p, q, "skipped_zero_operator", 1.0));
      return;
    }
    const Index n1 = cp->h1()->dim();
    const RegularDecomposition trivial = trivial_decomposition(cp);
    const PotentialOperator p_a1 = potential_from_decomposition(trivial);
    const PotentialOperator p_a0 = pseudoinverse_potential(cp->a0());
    rec.push_back(check(m, p, q, "potential_residual", p_a1.residual, kIdentityTol));

    const WeakDecomposition w = decomposition_from_potential(p_a1);
    const ProjectorDiagnostics diag = projector_diagnostics(w.q_tilde, w.n_tilde, kIdentityTol, &cp->h1()->factor());
    rec.push_back(check(m, p, q, "q_idempotence", diag.q_idempotence, kIdentityTol));
    rec.push_back(check(m, p, q, "n_idempotence", diag.n_idempotence, kIdentityTol));
    rec.push_back(check(m, p, q, "qn_product", std::max(diag.qn, diag.nq), kIdentityTol));
    rec.push_back(check(m, p, q, "i_minus_square", diag.i_minus_square, kIdentityTol));
    rec.push_back(check(m, p, q, "i_minus_excess_margin", diag.i_minus_margin - 1.0, kIdentityTol));
    const Matrix& a1 = cp->a1().matrix();
    const double a1_scale = std::max(1.0, a1.cwiseAbs().maxCoeff());
    rec.push_back(check(m, p, q, "a1_invariance", (a1 * w.q_tilde - a1).cwiseAbs().maxCoeff() / a1_scale,
                        kIdentityTol));
    const KernelRangeResult k1 = kernel_and_range(cp->a1());
    const double on_kernel = k1.kernel.dim() > 0 ? (w.q_tilde * k1.kernel.columns).cwiseAbs().maxCoeff() : 0.0;
    rec.push_back(check(m, p, q, "q_on_kernel", on_kernel, kIdentityTol));

    const PreBasis pb = build_prebasis(cp);
    const PreBasis pb_delta = build_prebasis(std::make_shared<const ComplexPair>(dual_complex(*cp)));
    const ThreeTermOperators ops = three_term_operators(*cp, p_a1, p_a0, pb);
    rec.push_back(info(m, p, q, "cohomology_dim", static_cast<double>(pb.columns.cols())));
    rec.push_back(check(m, p, q, "three_term_identity", ops.identity_residual, kIdentityTol));

    double pairing = 0.0;
    const Matrix z = random_samples(n1, samples, derive_seed(ctx.seed, i));
    for (int s = 0; s < samples; ++s) {
      const ThreeTermSplit t = three_term_decomposition(*cp, p_a1, p_a0, pb, z.col(s));
      pairing = std::max(pairing, pairing_identity(*cp, z.col(s), t.x1 + t.xb, t.p0));
    }
    rec.push_back(check(m, p, q, "pairing_identity", pairing, kIdentityTol));

    if (pb.columns.cols() == 0) {
      const RegularDecomposition ex = exact_decomposition(cp, p_a1, p_a0);
      const DirectnessReport dr = exact_directness(ex);
      rec.push_back(check(m, p, q, "exact_decomposition_residual", ex.residual, kIdentityTol));
      rec.push_back(check(m, p, q, "exact_directness_defect",
                          static_cast<double>(std::abs(dr.rank_q1 + dr.dim_kernel_a1 - dr.rank_union) +
                                              std::abs(dr.rank_union - n1)),
                          0.0));
    }
    const AlternativeProjectionReport alt = alternative_projection_check(*cp, pb, pb_delta);
    rec.push_back(check(m, p, q, "harmonic_perp_d_dim", static_cast<double>(alt.harmonic_perp_d), 0.0));
    rec.push_back(check(m, p, q, "harmonic_perp_delta_dim", static_cast<double>(alt.harmonic_perp_delta), 0.0));
    rec.push_back(check(m, p, q, "kernel_perp_equals_range", alt.kernel_equals_range ? 0.0 : 1.0, 0.0));
    rec.push_back(check(m, p, q, "cokernel_perp_equals_corange", alt.cokernel_equals_corange ? 0.0 : 1.0, 0.0));

    Json d;
    d["partition"] = p;
    d["q"] = q;
    d["projectors"] = to_json(diag);
    d["alternative_projection"] = to_json(alt);
    d["prebasis_condition"] = number(pb.condition);
    details[i] = std::move(d);
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    res.records.insert(res.records.end(), recs[i].begin(), recs[i].end());
    if (!details[i].is_null()) res.details.push_back(std::move(details[i]));
  }
  finish(res);
  return res;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Report run(const ExperimentConfig& cfg) {
  Report report;
  report.config = cfg.echo;
  report.generated_at = utc_now();

  MeshCase mesh{cfg.mesh_file.empty() ? cfg.mesh_generator + "(" + std::to_string(cfg.mesh_n) + ")"
                                      : fs::path(cfg.mesh_file).filename().string(),
                cfg.mesh_file.empty() ? generate_mesh(cfg.mesh_generator, cfg.mesh_n)
                                      : mesh_from_json(read_file(cfg.mesh_file))};
  std::vector<int> degrees = cfg.degrees;
  if (degrees.empty()) {
    for (int q = 0; q <= mesh.mesh.dim(); ++q) degrees.push_back(q);
  }
  for (int q : degrees) {
    if (q > mesh.mesh.dim()) config_error("/degrees", "degree " + std::to_string(q) + " exceeds the mesh dimension");
  }
  for (const std::string& p : cfg.partitions) partition_from_spec(mesh.mesh, p);  // validate early

  for (std::size_t e = 0; e < cfg.experiments.size(); ++e) {
    const ExperimentSpec& spec = cfg.experiments[e];
    const std::uint64_t seed = derive_seed(cfg.seed, e);
    Context ctx{cfg, mesh, build_weights(cfg.weights, mesh.mesh, derive_seed(cfg.seed, 0xFFFF)), degrees, seed};
    ExperimentResult r;
    try {
      if (spec.name == "mini-fat") r = run_mini_fat(ctx, spec);
      else if (spec.name == "duality") r = run_duality(ctx, spec);
      else if (spec.name == "weights") r = run_weights(ctx, spec);
      else if (spec.name == "poincare-convergence") r = run_poincare(ctx, spec);
      else if (spec.name == "helmholtz-demo") r = run_helmholtz(ctx, spec);
      else r = run_regular(ctx, spec);
    } catch (const nlohmann::json::exception& ex) {
      config_error("/experiments/" + std::to_string(e), std::string("bad option: ") + ex.what());
    }
    report.all_passed = report.all_passed && r.passed;
    report.experiments.push_back(std::move(r));
  }
  return report;
}

// ---------------------------------------------------------------- output

Json report_to_json(const Report& r) {
  Json j;
  j["tool"] = "hct";
  j["version"] = kToolVersion;
  j["schema"] = kConfigSchema;
  j["generated_at"] = r.generated_at;
  j["config"] = r.config;
  j["all_passed"] = r.all_passed;
  Json exps = Json::array();
  for (const ExperimentResult& e : r.experiments) {
    Json je;
    je["name"] = e.name;
    je["passed"] = e.passed;
    Json recs = Json::array();
    for (const Record& x : e.records) {
      Json jr;
      jr["mesh"] = x.mesh;
      jr["partition"] = x.partition;
      jr["q"] = x.q < 0 ? Json(nullptr) : Json(x.q);
      jr["quantity"] = x.quantity;
      jr["value"] = number(x.value);
      jr["tolerance"] = number(x.tolerance);
      jr["status"] = x.status;
      recs.push_back(std::move(jr));
    }
    je["records"] = std::move(recs);
    je["details"] = e.details;
    exps.push_back(std::move(je));
  }
  j["experiments"] = std::move(exps);
  return j;
}

std::string report_json_string(const Report& r) { return report_to_json(r).dump(2) + "\n"; }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, j.get<double>());
  return std::string(buf, r.ptr);
}

}  // namespace

std::string report_to_csv(const Json& report) {
  std::ostringstream os;
  os << "experiment,mesh,partition,q,quantity,value,tolerance,status\n";
  try {
    if (!report.contains("experiments")) return os.str();
    for (const Json& e : report.at("experiments")) {
      const std::string name = e.at("name").get<std::string>();
      for (const Json& r : e.at("records")) {
        os << csv_field(name) << ',' << csv_field(r.at("mesh").get<std::string>()) << ','
           << csv_field(r.at("partition").get<std::string>()) << ','
           << (r.at("q").is_null() ? std::string() : std::to_string(r.at("q").get<int>())) << ','
           << csv_field(r.at("quantity").get<std::string>()) << ',' << csv_number(r.at("value")) << ','
           << csv_number(r.at("tolerance")) << ',' << csv_field(r.at("status").get<std::string>()) << '\n';
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + ex.what());
  }
  return os.str();
}

std::string report_to_csv(const Report& r) { return report_to_csv(report_to_json(r)); }

}  // namespace hct
