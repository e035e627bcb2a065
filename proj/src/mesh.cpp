#include "hct/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace hct {

namespace {

Simplex make_simplex(const int* v, int n) {
  Simplex s{-1, -1, -1, -1};
  std::copy(v, v + n, s.begin());
  std::sort(s.begin(), s.begin() + n);
  return s;
}

// All (k)-element sub-tuples of a sorted (n)-tuple, each sorted.
void for_each_subset(const Simplex& s, int n, int k, const std::function<void(const Simplex&)>& fn) {
  std::array<int, 4> idx{};
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    Simplex sub{-1, -1, -1, -1};
    for (int i = 0; i < k; ++i) sub[i] = s[idx[i]];
    fn(sub);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::string tuple_string(const Simplex& s, int n) {
  std::ostringstream os;
  for (int i = 0; i < n; ++i) os << (i ? "," : "") << s[i];
  return os.str();
}

}  // namespace

double signed_volume(const Matrix& vertices, const std::vector<int>& cell) {
  const Index d = vertices.cols();
  Matrix j(d, d);
  for (Index k = 0; k < d; ++k) j.col(k) = (vertices.row(cell[k + 1]) - vertices.row(cell[0])).transpose();
  return d == 0 ? 0.0 : j.determinant();
}

SimplicialMesh::SimplicialMesh(Matrix vertices, const std::vector<std::vector<int>>& cells)
    : vertices_(std::move(vertices)) {
  dim_ = static_cast<int>(vertices_.cols());
  if (dim_ < 1 || dim_ > 3) throw Error(ErrorCode::WrongDimension, "meshes must have dimension 1, 2 or 3");
  if (cells.empty()) throw Error(ErrorCode::InvalidArgument, "mesh has no cells");
  const int nv = static_cast<int>(vertices_.rows());

  double extent = 0.0;
  for (Index c = 0; c < vertices_.cols(); ++c) {
    extent = std::max(extent, vertices_.col(c).maxCoeff() - vertices_.col(c).minCoeff());
  }
  const double vol_floor = 1e-13 * std::pow(std::max(extent, 1e-300), dim_);

  simplices_.resize(dim_ + 1);
  std::vector<Simplex>& top = simplices_[dim_];
  top.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::vector<int>& cell = cells[c];
    if (static_cast<int>(cell.size()) != dim_ + 1) {
      throw Error(ErrorCode::WrongDimension, "cell " + std::to_string(c) + " does not have " +
                                                 std::to_string(dim_ + 1) + " vertices");
    }
    for (int v : cell) {
      if (v < 0 || v >= nv) throw Error(ErrorCode::InvalidArgument, "cell " + std::to_string(c) + " vertex out of range");
    }
    const double vol = signed_volume(vertices_, cell);
    if (!(vol > vol_floor)) {
      throw Error(ErrorCode::InvertedCell, "cell " + std::to_string(c) + " has non-positive signed volume");
    }
    top.push_back(make_simplex(cell.data(), dim_ + 1));
  }
  std::sort(top.begin(), top.end());
  for (std::size_t c = 1; c < top.size(); ++c) {
    if (top[c] == top[c - 1]) throw Error(ErrorCode::DuplicateCell, "cell {" + tuple_string(top[c], dim_ + 1) + "}");
  }

  for (int q = 0; q < dim_; ++q) {
    std::vector<Simplex>& sq = simplices_[q];
    for (const Simplex& t : top) for_each_subset(t, dim_ + 1, q + 1, [&](const Simplex& s) { sq.push_back(s); });
    std::sort(sq.begin(), sq.end());
    sq.erase(std::unique(sq.begin(), sq.end()), sq.end());
  }

  incidence_.resize(dim_);
  for (int q = 0; q < dim_; ++q) {
    const std::vector<Simplex>& hi = simplices_[q + 1];
    std::vector<Eigen::Triplet<int>> trip;
    trip.reserve(hi.size() * (q + 2));
    for (std::size_t r = 0; r < hi.size(); ++r) {
      for (int i = 0; i <= q + 1; ++i) {
        Simplex face{-1, -1, -1, -1};
        for (int k = 0, m = 0; k <= q + 1; ++k) {
          if (k != i) face[m++] = hi[r][k];
        }
        trip.emplace_back(static_cast<int>(r), static_cast<int>(find(q, face)), (i % 2 == 0) ? 1 : -1);
      }
    }
    IncidenceMatrix d(static_cast<Index>(hi.size()), count(q));
    d.setFromTriplets(trip.begin(), trip.end());
    incidence_[q] = std::move(d);
  }

  // Facet-cell adjacency counts from the top incidence.
  std::vector<int> adjacent(count(dim_ - 1), 0);
  const IncidenceMatrix& dt = incidence_[dim_ - 1];
  for (Index r = 0; r < dt.outerSize(); ++r) {
    for (IncidenceMatrix::InnerIterator it(dt, r); it; ++it) ++adjacent[it.col()];
  }
  for (Index f = 0; f < static_cast<Index>(adjacent.size()); ++f) {
    if (adjacent[f] > 2) {
      throw Error(ErrorCode::NonManifold,
                  "facet {" + tuple_string(simplices_[dim_ - 1][f], dim_) + "} is shared by " +
                      std::to_string(adjacent[f]) + " cells");
    }
    if (adjacent[f] == 1) boundary_facets_.push_back(f);
  }
}

Index SimplicialMesh::find(int q, const Simplex& s) const {
  const std::vector<Simplex>& v = simplices_.at(q);
  auto it = std::lower_bound(v.begin(), v.end(), s);
  if (it == v.end() || *it != s) return -1;
  return static_cast<Index>(it - v.begin());
}

void SimplicialMesh::set_boundary_label(Index facet, std::string label) {
  if (!std::binary_search(boundary_facets_.begin(), boundary_facets_.end(), facet)) {
    throw Error(ErrorCode::InvalidArgument, "label on facet " + std::to_string(facet) + " which is not a boundary facet");
  }
  labels_[facet] = std::move(label);
}

Eigen::VectorXd SimplicialMesh::centroid(int q, Index i) const {
  const Simplex& s = simplices_.at(q).at(i);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim_);
  for (int k = 0; k <= q; ++k) c += vertices_.row(s[k]).transpose();
  return c / (q + 1);
}

long SimplicialMesh::euler_characteristic() const {
  long chi = 0;
  for (int q = 0; q <= dim_; ++q) chi += (q % 2 == 0 ? 1 : -1) * static_cast<long>(count(q));
  return chi;
}

BoundaryPartition mark_boundary(const SimplicialMesh& mesh, const FacetPredicate& on_gamma_t, std::string description) {
  BoundaryPartition p;
  p.description = std::move(description);
  static const std::string empty;
  const auto& labels = mesh.boundary_labels();
  for (Index f : mesh.boundary_facets()) {
    auto it = labels.find(f);
    const bool t = on_gamma_t(mesh.centroid(mesh.dim() - 1, f), it == labels.end() ? empty : it->second);
    (t ? p.gamma_t : p.gamma_n).push_back(f);
  }
  return p;
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> bracket_list(const std::string& spec, const std::string& body) {
  if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
    throw Error(ErrorCode::ConfigError, "partition '" + spec + "': expected a bracketed list");
  }
  std::vector<std::string> out;
  std::stringstream ss(body.substr(1, body.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int axis_of(char c, int dim, const std::string& spec) {
  const int a = c == 'x' ? 0 : c == 'y' ? 1 : c == 'z' ? 2 : -1;
  if (a < 0 || a >= dim) throw Error(ErrorCode::ConfigError, "partition '" + spec + "': bad axis");
  return a;
}

}  // namespace

BoundaryPartition partition_from_spec(const SimplicialMesh& mesh, const std::string& raw) {
  const std::string spec = trim(raw);
  const int dim = mesh.dim();
  if (spec == "none") return mark_boundary(mesh, [](const auto&, const auto&) { return false; }, spec);
  if (spec == "all") return mark_boundary(mesh, [](const auto&, const auto&) { return true; }, spec);

  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::ConfigError, "unknown partition '" + spec + "'");
  const std::string kind = trim(spec.substr(0, colon));
  const std::string body = trim(spec.substr(colon + 1));

  if (kind == "halfspace") {
    if (body.empty()) throw Error(ErrorCode::ConfigError, "partition '" + spec + "': empty halfspace");
    const int axis = axis_of(body[0], dim, spec);
    std::string rest = body.substr(1);
    std::string op;
    for (const char* cand : {"<=", ">=", "<", ">"}) {
      if (rest.rfind(cand, 0) == 0) {
        op = cand;
        break;
      }
    }
    if (op.empty()) throw Error(ErrorCode::ConfigError, "partition '" + spec + "': expected one of <= < >= >");
    double value = 0.0;
    try {
      std::size_t used = 0;
      const std::string num = trim(rest.substr(op.size()));
      value = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "partition '" + spec + "': bad number");
    }
    return mark_boundary(
        mesh,
        [=](const Eigen::VectorXd& c, const std::string&) {
          const double x = c[axis];
          if (op == "<=") return x <= value;
          if (op == "<") return x < value;
          if (op == ">=") return x >= value;
          return x > value;
        },
        spec);
  }

  if (kind == "faces") {
    const Matrix& v = mesh.vertices();
    const Eigen::VectorXd lo = v.colwise().minCoeff();
    const Eigen::VectorXd hi = v.colwise().maxCoeff();
    const double tol = 1e-12 * std::max(1.0, (hi - lo).maxCoeff());
    std::vector<std::pair<int, bool>> sides;
    for (const std::string& f : bracket_list(spec, body)) {
      if (f.size() != 2 || (f[1] != '0' && f[1] != '1')) {
        throw Error(ErrorCode::ConfigError, "partition '" + spec + "': bad side '" + f + "'");
      }
      sides.emplace_back(axis_of(f[0], dim, spec), f[1] == '1');
    }
    return mark_boundary(
        mesh,
        [=](const Eigen::VectorXd& c, const std::string&) {
          for (const auto& [axis, upper] : sides) {
            const double target = upper ? hi[axis] : lo[axis];
            if (std::abs(c[axis] - target) <= tol) return true;
          }
          return false;
        },
        spec);
  }

  if (kind == "labels") {
    const std::vector<std::string> names = bracket_list(spec, body);
    return mark_boundary(
        mesh,
        [=](const Eigen::VectorXd&, const std::string& label) {
          return !label.empty() && std::find(names.begin(), names.end(), label) != names.end();
        },
        spec);
  }
  throw Error(ErrorCode::ConfigError, "unknown partition kind '" + kind + "'");
}

BoundaryPartition complement(const BoundaryPartition& p) {
  return {p.gamma_n, p.gamma_t, "complement(" + p.description + ")"};
}

std::vector<std::vector<Index>> gamma_t_closure(const SimplicialMesh& mesh, const BoundaryPartition& p) {
  const int d = mesh.dim();
  std::vector<std::vector<Index>> out(d + 1);
  for (Index f : p.gamma_t) {
    const Simplex& facet = mesh.simplices(d - 1).at(f);
    for (int q = 0; q < d; ++q) {
      for_each_subset(facet, d, q + 1, [&](const Simplex& s) { out[q].push_back(mesh.find(q, s)); });
    }
  }
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

namespace {

constexpr long kMaxGeneratedCells = 2'000'000;

SimplicialMesh compact(const Matrix& vertices, std::vector<std::vector<int>> cells) {
  std::vector<int> remap(vertices.rows(), -1);
  int next = 0;
  for (auto& c : cells) {
    for (int& v : c) {
      if (remap[v] < 0) remap[v] = next++;
    }
  }
  // Keep the original vertex order among the used ones.
  next = 0;
  for (Index v = 0; v < vertices.rows(); ++v) {
    if (remap[v] >= 0) remap[v] = next++;
  }
  Matrix kept(next, vertices.cols());
  for (Index v = 0; v < vertices.rows(); ++v) {
    if (remap[v] >= 0) kept.row(remap[v]) = vertices.row(v);
  }
  for (auto& c : cells) {
    for (int& v : c) v = remap[v];
  }
  return SimplicialMesh(std::move(kept), cells);
}

SimplicialMesh square_mesh(int m, const std::function<bool(int, int)>& keep) {
  const int w = m + 1;
  Matrix v(w * w, 2);
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i <= m; ++i) v.row(j * w + i) << double(i) / m, double(j) / m;
  }
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (!keep(i, j)) continue;
      const int a = j * w + i, b = a + 1, c = a + w + 1, d = a + w;
      if ((i + j) % 2 == 0) {
        cells.push_back({a, b, c});
        cells.push_back({a, c, d});
      } else {
        cells.push_back({a, b, d});
        cells.push_back({b, c, d});
      }
    }
  }
  return compact(v, std::move(cells));
}

SimplicialMesh cube_mesh(int m, const std::function<bool(int, int, int)>& keep) {
  const int w = m + 1;
  auto id = [w](int i, int j, int k) { return (k * w + j) * w + i; };
  Matrix v(w * w * w, 3);
  for (int k = 0; k <= m; ++k) {
    for (int j = 0; j <= m; ++j) {
      for (int i = 0; i <= m; ++i) v.row(id(i, j, k)) << double(i) / m, double(j) / m, double(k) / m;
    }
  }
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<std::vector<int>> cells;
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        if (!keep(i, j, k)) continue;
        for (const auto& p : perms) {
          int pos[3] = {i, j, k};
          std::vector<int> cell{id(i, j, k)};
          for (int s = 0; s < 3; ++s) {
            ++pos[p[s]];
            cell.push_back(id(pos[0], pos[1], pos[2]));
          }
          if (signed_volume(v, cell) < 0) std::swap(cell[2], cell[3]);
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return compact(v, std::move(cells));
}

void check_size(const std::string& name, int n, long cells) {
  if (n < 1) throw Error(ErrorCode::BadParams, name + ": resolution must be a positive integer");
  if (cells > kMaxGeneratedCells) {
    throw Error(ErrorCode::BadParams, name + ": " + std::to_string(cells) + " cells exceed the generator limit");
  }
}

}  // namespace

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names{"interval", "square-grid", "square-hole",
                                              "l-shape", "cube-grid", "cube-tunnel"};
  return names;
}

SimplicialMesh generate_mesh(const std::string& name, int n) {
  const long ln = n;
  if (name == "interval") {
    check_size(name, n, ln);
    Matrix v(n + 1, 1);
    for (int i = 0; i <= n; ++i) v(i, 0) = double(i) / n;
    std::vector<std::vector<int>> cells;
    for (int i = 0; i < n; ++i) cells.push_back({i, i + 1});
    return SimplicialMesh(std::move(v), cells);
  }
  if (name == "square-grid") {
    check_size(name, n, 2 * ln * ln);
    return square_mesh(n, [](int, int) { return true; });
  }
  if (name == "square-hole") {
    check_size(name, n, 16 * ln * ln);
    return square_mesh(3 * n, [n](int i, int j) { return !(i >= n && i < 2 * n && j >= n && j < 2 * n); });
  }
  if (name == "l-shape") {
    check_size(name, n, 6 * ln * ln);
    return square_mesh(2 * n, [n](int i, int j) { return !(i >= n && j >= n); });
  }
  if (name == "cube-grid") {
    check_size(name, n, 6 * ln * ln * ln);
    return cube_mesh(n, [](int, int, int) { return true; });
  }
  if (name == "cube-tunnel") {
    check_size(name, n, 144 * ln * ln * ln);
    return cube_mesh(3 * n, [n](int i, int j, int) { return !(i >= n && i < 2 * n && j >= n && j < 2 * n); });
  }
  throw Error(ErrorCode::UnknownGenerator, "no generator named '" + name + "'");
}

std::string mesh_to_json(const SimplicialMesh& mesh) {
  using nlohmann::ordered_json;
  const int d = mesh.dim();
  ordered_json j;
  j["format"] = "hct-mesh";
  j["version"] = 1;
  j["dim"] = d;
  ordered_json verts = ordered_json::array();
  for (Index v = 0; v < mesh.vertices().rows(); ++v) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < d; ++c) row.push_back(mesh.vertices()(v, c));
    verts.push_back(std::move(row));
  }
  j["vertices"] = std::move(verts);
  ordered_json cells = ordered_json::array();
  for (const Simplex& s : mesh.simplices(d)) {
    std::vector<int> cell(s.begin(), s.begin() + d + 1);
    // Stored tuples are sorted; restore positive orientation.
    if (signed_volume(mesh.vertices(), cell) < 0) std::swap(cell[0], cell[1]);
    cells.push_back(cell);
  }
  j["cells"] = std::move(cells);
  ordered_json labels = ordered_json::object();
  for (const auto& [facet, label] : mesh.boundary_labels()) {
    const Simplex& s = mesh.simplices(d - 1)[facet];
    labels[tuple_string(s, d)] = label;
  }
  j["boundary_labels"] = std::move(labels);
  return j.dump(1);
}

SimplicialMesh mesh_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("mesh file: ") + e.what());
  }
  try {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "mesh file: top level must be an object");
    if (j.contains("version") && j["version"].get<int>() != 1) {
      throw Error(ErrorCode::ParseError, "mesh file: unsupported version " + j["version"].dump());
    }
    if (!j.contains("vertices") || !j.contains("cells")) {
      throw Error(ErrorCode::ParseError, "mesh file: 'vertices' and 'cells' are required");
    }
    const auto& jv = j["vertices"];
    if (!jv.is_array() || jv.empty()) throw Error(ErrorCode::ParseError, "mesh file: 'vertices' must be a non-empty array");
    const std::size_t d = jv[0].size();
    Matrix v(static_cast<Index>(jv.size()), static_cast<Index>(d));
    for (std::size_t i = 0; i < jv.size(); ++i) {
      if (!jv[i].is_array() || jv[i].size() != d) {
        throw Error(ErrorCode::ParseError, "mesh file: vertices[" + std::to_string(i) + "] has the wrong length");
      }
      for (std::size_t c = 0; c < d; ++c) v(i, c) = jv[i][c].get<double>();
    }
    if (j.contains("dim") && j["dim"].get<std::size_t>() != d) {
      throw Error(ErrorCode::WrongDimension, "mesh file: 'dim' disagrees with the vertex coordinates");
    }
    std::vector<std::vector<int>> cells = j["cells"].get<std::vector<std::vector<int>>>();
    SimplicialMesh mesh(std::move(v), cells);

    const int md = mesh.dim();
    auto attach = [&](std::vector<int> facet, const std::string& label) {
      if (static_cast<int>(facet.size()) != md) {
        throw Error(ErrorCode::ParseError, "mesh file: boundary label facet has the wrong size");
      }
      const Simplex s = make_simplex(facet.data(), md);
      const Index f = mesh.find(md - 1, s);
      if (f < 0) throw Error(ErrorCode::ParseError, "mesh file: labelled facet {" + tuple_string(s, md) + "} not in mesh");
      mesh.set_boundary_label(f, label);
    };
    if (j.contains("boundary_labels")) {
      const auto& bl = j["boundary_labels"];
      if (bl.is_object()) {
        for (auto it = bl.begin(); it != bl.end(); ++it) {
          std::vector<int> facet;
          std::stringstream ss(it.key());
          std::string tok;
          while (std::getline(ss, tok, ',')) facet.push_back(std::stoi(tok));
          attach(std::move(facet), it.value().get<std::string>());
        }
      } else if (bl.is_array()) {
        for (const auto& e : bl) attach(e.at("facet").get<std::vector<int>>(), e.at("label").get<std::string>());
      } else {
        throw Error(ErrorCode::ParseError, "mesh file: 'boundary_labels' must be an object or an array");
      }
    }
    return mesh;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("mesh file: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::ParseError, std::string("mesh file: bad facet key: ") + e.what());
  }
}

}  // namespace hct
