#include "contactrom/mesh.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace contactrom::fem {

using json = nlohmann::json;

namespace {

double quad_corner_jacobian(const Mesh& mesh, const std::array<int, 4>& q, int corner) {
  // Bilinear map Jacobian at corner c equals the cross product of the two edge
  // vectors leaving that corner.
  Eigen::Vector2d p0 = mesh.nodes.row(q[std::size_t(corner)]).head<2>();
  Eigen::Vector2d p1 = mesh.nodes.row(q[std::size_t((corner + 1) % 4)]).head<2>();
  Eigen::Vector2d p3 = mesh.nodes.row(q[std::size_t((corner + 3) % 4)]).head<2>();
  Eigen::Vector2d e1 = p1 - p0;
  Eigen::Vector2d e3 = p3 - p0;
  return e1.x() * e3.y() - e1.y() * e3.x();
}

}  // namespace

void Mesh::validate() const {
  const int n = n_nodes();
  auto check_node = [&](int id) {
    if (id < 0 || id >= n) throw Error("mesh: node index out of range");
  };
  for (std::size_t e = 0; e < quads.size(); ++e) {
    for (int id : quads[e]) check_node(id);
    for (int c = 0; c < 4; ++c) {
      if (quad_corner_jacobian(*this, quads[e], c) <= 0.0)
        throw Error("mesh: inverted element " + std::to_string(e));
    }
  }
  if (!quads.empty() && quad_body.size() != quads.size())
    throw Error("mesh: quad_body size mismatch");
  for (const auto& b : bars)
    for (int id : b) check_node(id);
  for (const auto& [name, segs] : surfaces) {
    for (std::size_t s = 0; s < segs.size(); ++s) {
      check_node(segs[s][0]);
      check_node(segs[s][1]);
      if (s > 0 && segs[s][0] != segs[s - 1][1])
        throw Error("mesh: surface '" + name + "' is not a connected polyline");
    }
  }
}

std::vector<int> surface_nodes(const Mesh& mesh, const std::string& surface) {
  auto it = mesh.surfaces.find(surface);
  if (it == mesh.surfaces.end()) throw Error("mesh: unknown surface '" + surface + "'");
  std::vector<int> out;
  for (std::size_t s = 0; s < it->second.size(); ++s) {
    if (s == 0) out.push_back(it->second[s][0]);
    out.push_back(it->second[s][1]);
  }
  return out;
}

Eigen::VectorXd surface_weights(const Mesh& mesh, const std::string& surface) {
  auto it = mesh.surfaces.find(surface);
  if (it == mesh.surfaces.end()) throw Error("mesh: unknown surface '" + surface + "'");
  std::vector<int> nodes = surface_nodes(mesh, surface);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(Eigen::Index(nodes.size()));
  for (std::size_t s = 0; s < it->second.size(); ++s) {
    Eigen::VectorXd a = mesh.nodes.row(it->second[s][0]);
    Eigen::VectorXd b = mesh.nodes.row(it->second[s][1]);
    double half = 0.5 * (b - a).norm();
    w(Eigen::Index(s)) += half;
    w(Eigen::Index(s) + 1) += half;
  }
  return w;
}

Mesh half_disc_mesh(double radius, int m, int n_layers) {
  if (m < 2 || n_layers < 1) throw Error("half_disc_mesh: bad subdivision");
  Mesh mesh;
  mesh.dim = 2;

  const double s = 0.5 * radius;  // inner block half-width
  const int nx = 2 * m, ny = m;
  const int n_inner = (nx + 1) * (ny + 1);
  const int ring = 4 * m;  // segments along inner boundary and arc

  auto inner_id = [&](int i, int j) { return j * (nx + 1) + i; };

  std::vector<Eigen::Vector2d> pts;
  pts.reserve(std::size_t(n_inner + n_layers * (ring + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      pts.emplace_back(-s + double(i) * s / double(m), double(j) * s / double(m));

  mesh.quads.reserve(std::size_t(nx * ny + ring * n_layers));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      mesh.quads.push_back(
          {inner_id(i, j), inner_id(i + 1, j), inner_id(i + 1, j + 1), inner_id(i, j + 1)});

  // Inner ring: up the left side, across the top, down the right side.
  std::vector<int> ring_ids;
  ring_ids.reserve(std::size_t(ring + 1));
  for (int j = 0; j <= ny; ++j) ring_ids.push_back(inner_id(0, j));
  for (int i = 1; i <= nx; ++i) ring_ids.push_back(inner_id(i, ny));
  for (int j = ny - 1; j >= 0; --j) ring_ids.push_back(inner_id(nx, j));

  // Annular band between the inner ring and the arc, graded toward the arc.
  const double grade = 0.75;
  std::vector<double> rho(std::size_t(n_layers) + 1, 0.0);
  {
    double denom = (1.0 - std::pow(grade, double(n_layers)));
    for (int l = 1; l <= n_layers; ++l)
      rho[std::size_t(l)] = (1.0 - std::pow(grade, double(l))) / denom;
  }

  std::vector<std::vector<int>> layer_ids(std::size_t(n_layers) + 1);
  layer_ids[0] = ring_ids;
  for (int l = 1; l <= n_layers; ++l) {
    layer_ids[std::size_t(l)].reserve(std::size_t(ring + 1));
    for (int k = 0; k <= ring; ++k) {
      double t = double(k) / double(ring);
      double phi = std::numbers::pi * (1.0 - t);
      Eigen::Vector2d arc(radius * std::cos(phi), radius * std::sin(phi));
      Eigen::Vector2d inner = pts[std::size_t(ring_ids[std::size_t(k)])];
      Eigen::Vector2d p = (1.0 - rho[std::size_t(l)]) * inner + rho[std::size_t(l)] * arc;
      layer_ids[std::size_t(l)].push_back(int(pts.size()));
      pts.push_back(p);
    }
  }
  for (int l = 0; l < n_layers; ++l) {
    const auto& lo = layer_ids[std::size_t(l)];
    const auto& hi = layer_ids[std::size_t(l) + 1];
    for (int k = 0; k < ring; ++k)
      mesh.quads.push_back({lo[std::size_t(k)], lo[std::size_t(k) + 1],
                            hi[std::size_t(k) + 1], hi[std::size_t(k)]});
  }
  // Band quads wind counterclockwise only left of the apex; fix orientation
  // per-element below after nodes are in place.

  mesh.nodes.resize(Eigen::Index(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) mesh.nodes.row(Eigen::Index(i)) = pts[i];

  for (auto& q : mesh.quads) {
    if (quad_corner_jacobian(mesh, q, 0) < 0.0) std::swap(q[1], q[3]);
  }
  mesh.quad_body.assign(mesh.quads.size(), 0);

  // Arc surface, CCW for the body (interior below the arc): from (r,0) to (-r,0).
  auto& arc_surf = mesh.surfaces["arc"];
  const auto& outer = layer_ids[std::size_t(n_layers)];
  for (int k = ring; k > 0; --k)
    arc_surf.push_back({outer[std::size_t(k)], outer[std::size_t(k) - 1]});

  // Base surface (flat edge y=0), CCW: from (-r,0) to (r,0): outer end, inner
  // bottom row, outer end.
  auto& base = mesh.surfaces["base"];
  base.push_back({outer[0], ring_ids[0]});
  for (int i = 0; i < nx; ++i) base.push_back({inner_id(i, 0), inner_id(i + 1, 0)});
  base.push_back({ring_ids[std::size_t(ring)], outer[std::size_t(ring)]});

  mesh.validate();
  return mesh;
}

Mesh rect_grid_mesh(double x0, double y0, double lx, double ly, int nx, int ny) {
  if (nx < 2 || ny < 2) throw Error("rect_grid_mesh: need at least 2x2 nodes");
  Mesh mesh;
  mesh.dim = 2;
  mesh.nodes.resize(Eigen::Index(nx) * ny, 2);
  auto id = [&](int i, int j) { return j * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      mesh.nodes.row(id(i, j)) << x0 + lx * double(i) / double(nx - 1),
          y0 + ly * double(j) / double(ny - 1);
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i)
      mesh.quads.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  mesh.quad_body.assign(mesh.quads.size(), 0);

  auto& bottom = mesh.surfaces["bottom"];
  for (int i = 0; i + 1 < nx; ++i) bottom.push_back({id(i, 0), id(i + 1, 0)});
  auto& right = mesh.surfaces["right"];
  for (int j = 0; j + 1 < ny; ++j) right.push_back({id(nx - 1, j), id(nx - 1, j + 1)});
  auto& top = mesh.surfaces["top"];
  for (int i = nx - 1; i > 0; --i) top.push_back({id(i, ny - 1), id(i - 1, ny - 1)});
  auto& left = mesh.surfaces["left"];
  for (int j = ny - 1; j > 0; --j) left.push_back({id(0, j), id(0, j - 1)});

  mesh.validate();
  return mesh;
}

Mesh segment_mesh(int n_nodes) {
  if (n_nodes < 2) throw Error("segment_mesh: need at least 2 nodes");
  Mesh mesh;
  mesh.dim = 1;
  mesh.nodes.resize(n_nodes, 1);
  for (int i = 0; i < n_nodes; ++i) mesh.nodes(i, 0) = double(i) / double(n_nodes - 1);
  for (int i = 0; i + 1 < n_nodes; ++i) mesh.bars.push_back({i, i + 1});
  auto& all = mesh.surfaces["all"];
  for (int i = 0; i + 1 < n_nodes; ++i) all.push_back({i, i + 1});
  return mesh;
}

Mesh mirror_y(const Mesh& mesh) {
  Mesh out = mesh;
  out.nodes.col(1) *= -1.0;
  for (auto& q : out.quads) std::swap(q[1], q[3]);
  for (auto& [name, segs] : out.surfaces) {
    std::reverse(segs.begin(), segs.end());
    for (auto& s : segs) std::swap(s[0], s[1]);
  }
  out.validate();
  return out;
}

Mesh translate(Mesh mesh, double dx, double dy) {
  mesh.nodes.col(0).array() += dx;
  if (mesh.dim > 1) mesh.nodes.col(1).array() += dy;
  return mesh;
}

Mesh merge(const Mesh& a, const Mesh& b) {
  if (a.dim != b.dim) throw Error("merge: dimension mismatch");
  Mesh out = a;
  const int off = a.n_nodes();
  out.nodes.conservativeResize(a.n_nodes() + b.n_nodes(), a.dim);
  out.nodes.bottomRows(b.n_nodes()) = b.nodes;

  int body_off = 0;
  for (int id : a.quad_body) body_off = std::max(body_off, id + 1);
  for (std::size_t e = 0; e < b.quads.size(); ++e) {
    std::array<int, 4> q = b.quads[e];
    for (auto& id : q) id += off;
    out.quads.push_back(q);
    out.quad_body.push_back(b.quad_body[e] + body_off);
  }
  for (auto bar : b.bars) {
    bar[0] += off;
    bar[1] += off;
    out.bars.push_back(bar);
  }
  for (const auto& [name, segs] : b.surfaces) {
    if (out.surfaces.count(name)) throw Error("merge: duplicate surface '" + name + "'");
    auto& dst = out.surfaces[name];
    for (auto s : segs) {
      s[0] += off;
      s[1] += off;
      dst.push_back(s);
    }
  }
  return out;
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  util::write_matrix(dir / "coords.bin", mesh.nodes);

  json j;
  j["dim"] = mesh.dim;
  j["nodes"] = mesh.n_nodes();
  j["coords_file"] = "coords.bin";
  j["elements"] = json::object();
  j["elements"]["quads"] = mesh.quads;
  j["elements"]["quad_body"] = mesh.quad_body;
  j["elements"]["bars"] = mesh.bars;
  j["surfaces"] = json::object();
  for (const auto& [name, segs] : mesh.surfaces) j["surfaces"][name] = segs;

  std::ofstream out(dir / "mesh.json");
  out << j.dump(2) << "\n";
}

Mesh load_mesh(const std::filesystem::path& dir) {
  std::ifstream in(dir / "mesh.json");
  if (!in) throw Error("load_mesh: cannot open " + (dir / "mesh.json").string());
  json j = json::parse(in);

  Mesh mesh;
  mesh.dim = j.at("dim").get<int>();
  int n = j.at("nodes").get<int>();
  mesh.nodes = util::read_matrix(dir / j.at("coords_file").get<std::string>(), n, mesh.dim);
  mesh.quads = j.at("elements").at("quads").get<std::vector<std::array<int, 4>>>();
  mesh.quad_body = j.at("elements").at("quad_body").get<std::vector<int>>();
  mesh.bars = j.at("elements").at("bars").get<std::vector<std::array<int, 2>>>();
  for (const auto& [name, segs] : j.at("surfaces").items())
    mesh.surfaces[name] = segs.get<std::vector<std::array<int, 2>>>();
  mesh.validate();
  return mesh;
}

}  // namespace contactrom::fem
