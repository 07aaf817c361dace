#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "contactrom/util.hpp"

namespace contactrom::fem {

/// Geometry shared by the 2D benchmarks (bilinear quads) and the 1D rope (bars).
/// Surfaces are named, ordered segment lists; segment orientation follows the
/// counterclockwise boundary of the owning body so the outward normal is the
/// tangent rotated by -90 degrees.
struct Mesh {
  int dim = 2;
  Eigen::MatrixXd nodes;                     // n_nodes x dim
  std::vector<std::array<int, 4>> quads;     // counterclockwise
  std::vector<int> quad_body;                // body index per quad
  std::vector<std::array<int, 2>> bars;      // 1D elements
  std::map<std::string, std::vector<std::array<int, 2>>> surfaces;

  int n_nodes() const { return int(nodes.rows()); }
  int n_dofs() const { return dim * n_nodes(); }

  /// Index checks, quad orientation/Jacobian positivity, surface connectivity.
  void validate() const;
};

/// Ordered unique node ids along a named surface polyline.
std::vector<int> surface_nodes(const Mesh& mesh, const std::string& surface);

/// Node-centered dual quadrature weights: half-sum of adjacent segment lengths
/// in the reference configuration, ordered like surface_nodes().
Eigen::VectorXd surface_weights(const Mesh& mesh, const std::string& surface);

/// Structured generators for the benchmark geometries (no external mesher).

/// Half-disc of given radius over the x-axis, flat edge on y=0, meshed with an
/// inner block plus an annular band of nq_arc = 4*m segments on the arc.
/// Surfaces: "arc" (curved side) and "base" (flat side), both CCW-oriented.
Mesh half_disc_mesh(double radius, int m, int n_layers);

/// Axis-aligned rectangular grid [x0,x0+lx] x [y0,y0+ly] with nx x ny nodes.
/// Surfaces: "bottom", "right", "top", "left" (CCW orientation).
Mesh rect_grid_mesh(double x0, double y0, double lx, double ly, int nx, int ny);

/// 1D uniform segment mesh on [0,1] with n nodes. Surface "all" lists the bars.
Mesh segment_mesh(int n_nodes);

/// Mirror a 2D mesh about the x-axis (y -> -y), restoring CCW quad orientation
/// and reversing surface polylines so normals stay outward.
Mesh mirror_y(const Mesh& mesh);

/// Translate all nodes.
Mesh translate(Mesh mesh, double dx, double dy);

/// Concatenate two meshes into one (node indices of b shifted); body ids of b
/// are offset past a's. Surface names must not collide.
Mesh merge(const Mesh& a, const Mesh& b);

/// JSON manifest {nodes, elements, surfaces} plus raw little-endian float64
/// coordinate block, written as <dir>/mesh.json and <dir>/coords.bin.
void save_mesh(const Mesh& mesh, const std::filesystem::path& dir);
Mesh load_mesh(const std::filesystem::path& dir);

}  // namespace contactrom::fem
