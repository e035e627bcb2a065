// Acceptance suite: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "hct/harness.hpp"
#include "mesh_support.hpp"
#include "support.hpp"

#ifndef HCT_CLI_PATH
#define HCT_CLI_PATH "hct"
#endif

namespace {

using namespace hct;
using hct::testing::cohomology_suite;
using hct::testing::gaussian;
using hct::testing::random_complex;
using hct::testing::shared;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Tracker {
  bool pass = true;
  std::string first_failure;
  double worst = 0.0;

  void expect(bool ok, const std::string& what) {
    if (!ok && pass) first_failure = what;
    pass = pass && ok;
  }
  void bound(double value, double tol, const std::string& what) {
    worst = std::max(worst, value);
    if (!(value <= tol)) {
      std::ostringstream os;
      os << what << " = " << value << " > " << tol;
      expect(false, os.str());
    }
  }
  Outcome outcome(const std::string& summary) const {
    std::ostringstream os;
    os << summary;
    if (!pass) os << "; first failure: " << first_failure;
    return {pass, os.str()};
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::string label(const std::string& g, int n) { return g + "(" + std::to_string(n) + ")"; }

// De Rham complexes used by several criteria: the suite meshes under Gamma_t = none and all.
std::vector<std::pair<std::string, DiscreteDeRham>> derham_instances(bool weighted) {
  std::vector<std::pair<std::string, DiscreteDeRham>> out;
  std::uint64_t seed = 100;
  for (const char* g : {"interval", "square-grid", "square-hole", "l-shape", "cube-grid", "cube-tunnel"}) {
    const int n = std::string(g) == "interval" || std::string(g) == "square-grid" ? 4
                  : std::string(g) == "cube-tunnel" || std::string(g) == "square-hole" ? 1 : 2;
    const SimplicialMesh m = generate_mesh(g, n);
    for (const char* p : {"none", "all", "faces:[x0]"}) {
      const WeightField w = weighted ? WeightField::random_spd(m, seed++) : WeightField::unit(m.dim());
      out.emplace_back(label(g, n) + " " + p, assemble_complex(m, partition_from_spec(m, p), w));
    }
  }
  return out;
}

Outcome criterion_1() {
  Tracker t;
  int meshes = 0;
  for (const std::string& g : generator_names()) {
    const bool three_d = g.rfind("cube", 0) == 0;
    const int top = three_d ? 6 : 16;
    for (int n = 1; n <= top; ++n) {
      const SimplicialMesh m = generate_mesh(g, n);
      t.expect(integer_complex_property(m), label(g, n));
      ++meshes;
    }
  }
  return t.outcome(std::to_string(meshes) + " meshes, d_{q+1} d_q = 0 exactly");
}

Outcome criterion_2() {
  Tracker t;
  std::mt19937_64 rng(2);
  std::vector<BoundedOperator> ops;
  for (int k = 0; k < 20; ++k) {
    const Index m = 3 + k % 6, n = 2 + k % 5;
    auto h0 = InnerProductSpace::create(hct::testing::random_gram(n, rng));
    auto h1 = InnerProductSpace::create(hct::testing::random_gram(m, rng));
    ops.emplace_back(h0, h1, gaussian(m, n, rng));
  }
  for (const auto& [name, c] : derham_instances(true)) {
    for (int q = 0; q < c.dim(); ++q) {
      if (c.dof_count(q) > 0 && c.dof_count(q + 1) > 0) ops.push_back(c.op(q));
    }
  }
  double worst_pair = 0.0, worst_inv = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const BoundedOperator& a = ops[i];
    const BoundedOperator as = adjoint(a);
    const Matrix x = random_samples(a.domain()->dim(), 100, derive_seed(2, 2 * i));
    const Matrix y = random_samples(a.codomain()->dim(), 100, derive_seed(2, 2 * i + 1));
    const double norm_a = operator_norm(a);
    for (int s = 0; s < 100; ++s) {
      const double lhs = a.codomain()->inner(a(x.col(s)), y.col(s));
      const double rhs = a.domain()->inner(x.col(s), as(y.col(s)));
      const double scale = norm_a * a.domain()->norm(x.col(s)) * a.codomain()->norm(y.col(s));
      if (scale > 0) worst_pair = std::max(worst_pair, std::abs(lhs - rhs) / scale);
    }
    worst_inv = std::max(worst_inv, max_abs(adjoint(as).matrix() - a.matrix()) / std::max(max_abs(a.matrix()), 1e-300));
  }
  t.bound(worst_pair, 1e-10, "pairing residual");
  t.bound(worst_inv, 1e-12, "double adjoint");
  return t.outcome(std::to_string(ops.size()) + " operators, max pairing residual " + fmt(worst_pair) +
                   ", max |A** - A| " + fmt(worst_inv));
}

Outcome criterion_3() {
  Tracker t;
  std::mt19937_64 rng(3);
  double worst = 0.0;
  int instances = 0;
  for (int k = 0; k < 60; ++k) {
    const Index m = 2 + k % 8, n = 2 + (k * 3) % 7;
    const Index r = 1 + k % std::min(m, n);
    auto h0 = InnerProductSpace::create(hct::testing::random_gram(n, rng));
    auto h1 = InnerProductSpace::create(hct::testing::random_gram(m, rng));
    const BoundedOperator a(h0, h1, hct::testing::low_rank(m, n, r, rng));
    const ReducedConstant c = reduced_constant(a);
    const double cs = reduced_constant(adjoint(a)).c;
    t.expect(c.has_reduced_part, "random instance without reduced part");
    worst = std::max(worst, std::abs(c.c - cs) / c.c);
    ++instances;
  }
  int degrees = 0;
  for (const auto& [name, c] : derham_instances(true)) {
    for (int q = 0; q < c.dim(); ++q) {
      const BoundedOperator a = c.op(q);
      const ReducedConstant rc = reduced_constant(a);
      const double cs = reduced_constant(adjoint(a)).c;
      if (!rc.has_reduced_part) {
        t.expect(std::isinf(cs), name + " q=" + std::to_string(q) + ": adjoint has a reduced part");
        continue;
      }
      worst = std::max(worst, std::abs(rc.c - cs) / rc.c);
      ++degrees;
    }
  }
  t.bound(worst, 1e-10, "relative |c - c*|");
  return t.outcome(std::to_string(instances) + " abstract instances, " + std::to_string(degrees) +
                   " de Rham degrees, max relative gap " + fmt(worst));
}

Outcome criterion_4() {
  Tracker t;
  double worst = 0.0;
  int fields = 0;
  for (const auto& [name, c] : derham_instances(true)) {
    for (int q = 0; q <= c.dim(); ++q) {
      if (c.dof_count(q) == 0) continue;
      const ComplexPair cp = c.pair(q);
      const HelmholtzSplit s = refined_helmholtz(cp);
      const std::string where = name + " q=" + std::to_string(q);
      t.bound(s.sum_residual, 1e-10, where + " projector sum");
      t.bound(s.cross_residual, 1e-10, where + " annihilation");
      worst = std::max({worst, s.sum_residual, s.cross_residual});
      const Matrix z = random_samples(c.dof_count(q), 100, derive_seed(4, fields));
      for (int k = 0; k < 100; ++k) {
        const ElementSplit e = decompose_element(s, z.col(k));
        t.bound(e.orthogonality_residual, 1e-10, where + " orthogonality");
        t.bound(e.reconstruction_residual, 1e-10, where + " reconstruction");
        worst = std::max({worst, e.orthogonality_residual, e.reconstruction_residual});
        ++fields;
      }
    }
  }
  return t.outcome(std::to_string(fields) + " weighted random fields, max residual " + fmt(worst));
}

Outcome criterion_5() {
  Tracker t;
  int cases = 0;
  for (const auto& c : cohomology_suite()) {
    const SimplicialMesh m = generate_mesh(c.generator, c.n);
    const BoundaryPartition p = partition_from_spec(m, c.partition);
    const std::vector<Index> dims = cohomology_dims(assemble_complex(m, p));
    const std::vector<long> oracle = hct::testing::oracle_dims(m, p);
    std::vector<long> got(dims.begin(), dims.end());
    t.expect(got == oracle, label(c.generator, c.n) + " " + c.partition);
    ++cases;
  }
  auto d1 = [](const std::string& g, int n, const std::string& p, int q) {
    const SimplicialMesh m = generate_mesh(g, n);
    return cohomology_dims(assemble_complex(m, partition_from_spec(m, p)))[q];
  };
  const std::vector<Index> square{d1("square-grid", 4, "none", 1), d1("square-grid", 4, "all", 1),
                                  d1("square-grid", 4, "faces:[x0]", 1), d1("square-grid", 4, "faces:[x0,x1]", 1)};
  t.expect(square == std::vector<Index>{0, 0, 0, 1}, "square d^1");
  t.expect(d1("square-hole", 1, "none", 1) == 1 && d1("square-hole", 1, "all", 1) == 1, "annulus d^1");
  const SimplicialMesh cube = generate_mesh("cube-grid", 2);
  t.expect(cohomology_dims(assemble_complex(cube, partition_from_spec(cube, "none"))) == std::vector<Index>{1, 0, 0, 0},
           "cube dims");
  t.expect(d1("cube-tunnel", 1, "none", 1) == 1, "cube-tunnel d^1");
  return t.outcome(std::to_string(cases) + " mesh/partition cases agree with the Smith-form oracle; named cases hold");
}

Outcome criterion_6() {
  Tracker t;
  int checks = 0;
  for (const auto& c : cohomology_suite()) {
    const SimplicialMesh m = generate_mesh(c.generator, c.n);
    const DualityReport r = betti_duality_check(m, partition_from_spec(m, c.partition));
    for (std::size_t q = 0; q < r.passed.size(); ++q) {
      t.expect(r.passed[q], label(c.generator, c.n) + " " + c.partition + " q=" + std::to_string(q));
      ++checks;
    }
  }
  return t.outcome(std::to_string(checks) + " (case, q) pairs");
}

Outcome criterion_7() {
  Tracker t;
  double angle = 0.0;
  for (const auto& [g, n] : std::vector<std::pair<std::string, int>>{{"square-hole", 1}, {"cube-tunnel", 1}}) {
    const SimplicialMesh m = generate_mesh(g, n);
    std::vector<WeightField> w{WeightField::unit(m.dim())};
    for (int k = 0; k < 10; ++k) w.push_back(WeightField::random_spd(m, derive_seed(7, k)));
    for (const char* p : {"none", "all", "faces:[x0]"}) {
      const WeightIndependenceReport r = weight_independence(m, partition_from_spec(m, p), w);
      t.expect(r.dims_equal, label(g, n) + " " + p);
      for (const auto& row : r.angles) {
        for (double a : row) angle = std::max(angle, a);
      }
    }
  }
  return t.outcome("annulus and cube-tunnel, 10 random SPD fields, 3 partitions; largest subspace angle " +
                   fmt(angle) + " rad (informational)");
}

Outcome criterion_8() {
  Tracker t;
  const ExperimentConfig cfg = parse_config(R"({"schema": 1, "seed": 8,
    "mesh": {"generator": "square-grid", "n": 8},
    "experiments": [{"name": "poincare-convergence", "generator": "square-grid",
                     "resolutions": [8, 16, 32, 64], "partition": "all", "samples": 100}]})");
  const Report r = run(cfg);
  double c64 = 0.0, err = 1.0, min_margin = std::numeric_limits<double>::infinity();
  int margins = 0;
  std::vector<double> seq;
  for (const Record& x : r.experiments.at(0).records) {
    if (x.quantity == "poincare_constant") seq.push_back(x.value);
    if (x.quantity == "combined_estimate_margin") {
      min_margin = std::min(min_margin, x.value);
      ++margins;
    }
    if (x.quantity == "relative_error_finest") err = x.value;
  }
  const double target = 1.0 / (std::numbers::pi * std::sqrt(2.0));
  t.expect(seq.size() == 4, "four resolutions");
  if (!seq.empty()) c64 = seq.back();
  t.bound(std::abs(c64 - target) / target, 0.02, "relative error at n=64");
  for (std::size_t i = 1; i < seq.size(); ++i) t.expect(seq[i] > seq[i - 1], "monotone sequence");
  t.expect(margins == 4, "combined estimate evaluated on every mesh");
  t.expect(min_margin >= 0.0, "combined estimate margin nonnegative");
  t.expect(r.all_passed, "report checks");
  std::string s;
  for (double v : seq) s += (s.empty() ? "" : ", ") + fmt(v);
  return t.outcome("c = [" + s + "], target " + fmt(target) + ", relative error " + fmt(err) +
                   ", min (v') margin " + fmt(min_margin));
}

// Projector identities of the weak decomposition built from a potential.
void projector_checks(Tracker& t, const std::shared_ptr<const ComplexPair>& cp, const PotentialOperator& p,
                      const std::string& where, double& worst) {
  const WeakDecomposition w = decomposition_from_potential(p);
  const ProjectorDiagnostics d = projector_diagnostics(w.q_tilde, w.n_tilde, 1e-9, &cp->h1()->factor());
  const Matrix& a1 = cp->a1().matrix();
  const KernelRangeResult k = kernel_and_range(cp->a1());
  const double inv = max_abs(a1 * w.q_tilde - a1) / std::max(1.0, max_abs(a1));
  const double ker = k.kernel.dim() ? max_abs(w.q_tilde * k.kernel.columns) : 0.0;
  for (const auto& [v, n] : std::vector<std::pair<double, std::string>>{{d.q_idempotence, "Q^2 - Q"},
                                                                       {d.n_idempotence, "N^2 - N"},
                                                                       {d.i_minus_square, "I_-^2 - I"},
                                                                       {inv, "A1 Q - A1"},
                                                                       {ker, "Q on N(A1)"}}) {
    t.bound(v, 1e-9, where + " " + n);
    worst = std::max(worst, v);
  }
}

Outcome criterion_9() {
  Tracker t;
  double worst = 0.0;
  std::mt19937_64 rng(9);
  int instances = 0;
  for (int k = 0; k < 20; ++k) {
    const auto cp = shared(random_complex({3, 8, 5, 1 + k % 3, 1 + k % 4}, rng));
    projector_checks(t, cp, potential_from_decomposition(trivial_decomposition(cp)), "abstract", worst);
    // An oblique right inverse as well.
    const KernelRangeResult kr = kernel_and_range(cp->a1());
    const PotentialOperator pinv = pseudoinverse_potential(cp->a1());
    const Matrix oblique = pinv.p + kr.kernel.columns * gaussian(kr.kernel.dim(), 5, rng);
    projector_checks(t, cp, make_potential(cp->a1(), oblique, 1e-9), "abstract oblique", worst);
    instances += 2;
  }
  for (const auto& [name, c] : derham_instances(true)) {
    for (int q = 0; q < c.dim(); ++q) {
      const auto cp = shared(c.pair(q));
      if (cp->a1().is_zero() || cp->h1()->dim() == 0) continue;
      projector_checks(t, cp, pseudoinverse_potential(cp->a1()), name, worst);
      ++instances;
    }
  }
  double three = 0.0;
  const SimplicialMesh ann = generate_mesh("square-hole", 1);
  for (const char* p : {"none", "all", "faces:[x0]"}) {
    const DiscreteDeRham c = assemble_complex(ann, partition_from_spec(ann, p), WeightField::random_spd(ann, 99));
    for (int q = 0; q < 2; ++q) {
      const auto cp = shared(c.pair(q));
      if (cp->a1().is_zero()) continue;
      const PotentialOperator p1 = pseudoinverse_potential(cp->a1());
      const PotentialOperator p0 = pseudoinverse_potential(cp->a0());
      const PreBasis pb = build_prebasis(cp);
      const ThreeTermOperators ops = three_term_operators(*cp, p1, p0, pb);
      t.bound(ops.identity_residual, 1e-9, std::string("annulus three-term ") + p);
      three = std::max(three, ops.identity_residual);
    }
  }
  return t.outcome(std::to_string(instances) + " decompositions, max projector residual " + fmt(worst) +
                   ", max three-term residual on the annulus " + fmt(three));
}

Outcome criterion_10() {
  Tracker t;
  double worst = 0.0;
  int tested = 0;
  std::mt19937_64 rng(10);
  auto check = [&](const ComplexPair& cp, const Vector& x, const Vector& p1, const Vector& p0, const std::string& w) {
    const double r = pairing_identity(cp, x, p1, p0);
    t.bound(r, 1e-9, w);
    worst = std::max(worst, r);
    ++tested;
  };
  for (int k = 0; k < 10; ++k) {
    // Exact pairs: r0 + r1 = n1.
    const auto cp = shared(random_complex({4, 7, 6, 3, 4}, rng));
    const RegularDecomposition rd =
        exact_decomposition(cp, pseudoinverse_potential(cp->a1()), pseudoinverse_potential(cp->a0()));
    for (int s = 0; s < 10; ++s) {
      const Vector x = gaussian(7, 1, rng);
      check(*cp, x, rd.q1 * x, rd.q0 * x, "exact abstract");
    }
    // Pairs with cohomology, three-term splits with perturbed pre-bases.
    const auto ch = shared(random_complex({3, 9, 4, 2, 3}, rng));
    const PotentialOperator p1 = pseudoinverse_potential(ch->a1()), p0 = pseudoinverse_potential(ch->a0());
    const PreBasis pb = build_prebasis(ch, build_prebasis(ch).harmonic + ch->a0().matrix() * gaussian(3, 4, rng));
    for (int s = 0; s < 10; ++s) {
      const Vector x = gaussian(9, 1, rng);
      const ThreeTermSplit sp = three_term_decomposition(*ch, p1, p0, pb, x);
      check(*ch, x, sp.x1 + sp.xb, sp.p0, "three-term abstract");
    }
  }
  for (const auto& [name, c] : derham_instances(true)) {
    for (int q = 0; q < c.dim(); ++q) {
      const auto cp = shared(c.pair(q));
      if (cp->a1().is_zero() || cp->h1()->dim() == 0) continue;
      const PotentialOperator p1 = pseudoinverse_potential(cp->a1()), p0 = pseudoinverse_potential(cp->a0());
      const PreBasis pb = build_prebasis(cp);
      const Matrix z = random_samples(cp->h1()->dim(), 10, derive_seed(10, tested));
      for (int s = 0; s < 10; ++s) {
        const ThreeTermSplit sp = three_term_decomposition(*cp, p1, p0, pb, z.col(s));
        check(*cp, z.col(s), sp.x1 + sp.xb, sp.p0, name);
      }
    }
  }
  return t.outcome(std::to_string(tested) + " decompositions, max residual " + fmt(worst));
}

Outcome criterion_11() {
  Tracker t;
  int checks = 0;
  for (const auto& [g, n] : std::vector<std::pair<std::string, int>>{{"square-hole", 1}, {"cube-tunnel", 1}}) {
    const SimplicialMesh m = generate_mesh(g, n);
    for (const char* p : {"none", "all", "faces:[x0]"}) {
      const DiscreteDeRham c = assemble_complex(m, partition_from_spec(m, p));
      for (int q = 0; q <= m.dim(); ++q) {
        if (c.dof_count(q) == 0) continue;
        const auto cp = shared(c.pair(q));
        const PreBasis pd = build_prebasis(cp);
        const PreBasis pdelta = build_prebasis(shared(dual_complex(*cp)));
        const AlternativeProjectionReport r = alternative_projection_check(*cp, pd, pdelta);
        t.expect(r.passed, label(g, n) + " " + p + " q=" + std::to_string(q));
        ++checks;
      }
    }
  }
  return t.outcome(std::to_string(checks) + " (mesh, partition, q) rank tests");
}

std::string strip_timestamp(const std::string& path) {
  Json j = Json::parse(read_file(path));
  j.erase("generated_at");
  return j.dump();
}

Outcome criterion_12() {
  Tracker t;
  const auto dir = std::filesystem::temp_directory_path() / ("hct-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"schema": 1, "seed": 1234,
    "mesh": {"generator": "square-hole", "n": 1}, "partition": ["none", "all", "faces:[x0]"],
    "weights": {"kind": "random-spd", "seed": 5},
    "experiments": ["mini-fat", "duality", {"name": "weights", "count": 3}, "helmholtz-demo",
                    "regular-decomposition-suite"]})";
  std::vector<std::string> payloads;
  for (const char* threads : {"1", "1", "4"}) {
    const auto out = dir / ("report-" + std::to_string(payloads.size()) + ".json");
    const std::string cmd = std::string("HCT_THREADS=") + threads + " \"" + HCT_CLI_PATH + "\" run -q \"" +
                            cfg.string() + "\" --out \"" + out.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    t.expect(rc == 0, "hct run exit status " + std::to_string(rc));
    if (rc == 0) payloads.push_back(strip_timestamp(out.string()));
  }
  t.expect(payloads.size() == 3, "three runs");
  if (payloads.size() == 3) {
    t.expect(payloads[0] == payloads[1], "repeated run differs");
    t.expect(payloads[0] == payloads[2], "thread count changes the payload");
  }
  std::filesystem::remove_all(dir);
  return t.outcome("3 runs of `hct run` (1, 1, 4 threads), payloads compared without the timestamp");
}

}  // namespace

int main() {
  hct::set_warning_sink({});
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
    double time_limit;  // seconds, 0: none
  };
  const std::vector<Criterion> criteria{
      {1, "exact complex property", criterion_1, 10.0},
      {2, "adjoint characterization", criterion_2, 0.0},
      {3, "best-constant equality", criterion_3, 0.0},
      {4, "refined Helmholtz decomposition", criterion_4, 0.0},
      {5, "cohomology dimensions vs homology oracle", criterion_5, 60.0},
      {6, "Betti duality", criterion_6, 0.0},
      {7, "weight independence", criterion_7, 0.0},
      {8, "Poincare convergence", criterion_8, 120.0},
      {9, "regular-decomposition operator algebra", criterion_9, 0.0},
      {10, "pairing identity", criterion_10, 0.0},
      {11, "alternative projection", criterion_11, 0.0},
      {12, "determinism", criterion_12, 0.0},
  };
  bool all = true;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0 && secs > c.time_limit) {
      o.pass = false;
      o.detail += "; runtime " + fmt(secs) + " s exceeds " + fmt(c.time_limit) + " s";
    }
    all = all && o.pass;
    std::printf("%s criterion %2d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
