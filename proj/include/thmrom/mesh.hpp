#pragma once

#include "thmrom/types.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

namespace thmrom {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Horizontal band y in (y_low, y_high) whose cells get label 1; all other
/// cells get label 2.
struct BandRegion {
  double y_low = 0.0;
  double y_high = 0.0;
};

/// Structured triangulation of the unit square: n x n squares, each split
/// along its (i,j)-(i+1,j+1) diagonal. Immutable after construction.
class Mesh {
 public:
  int cells_per_side() const { return n_; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::vector<int>& cell_labels() const { return labels_; }
  /// Sorted indices of vertices on the boundary of the square.
  const std::vector<int>& boundary_vertices() const { return boundary_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  /// Maximum edge length, sqrt(2)/n.
  double h() const;
  /// Grid spacing 1/n.
  double spacing() const { return 1.0 / n_; }

  double signed_area(int cell) const;
  Point centroid(int cell) const;
  bool is_boundary_vertex(int v) const { return on_boundary_[v] != 0; }

  friend Mesh build_unit_square_mesh(int n, std::optional<BandRegion> region);

 private:
  int n_ = 0;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<int> labels_;
  std::vector<int> boundary_;
  std::vector<char> on_boundary_;
};

/// Throws std::invalid_argument if n < 1 or if a band edge is not a multiple
/// of 1/n (interfaces must align with cell edges).
Mesh build_unit_square_mesh(int n, std::optional<BandRegion> region = std::nullopt);

/// Writes vertices.csv and cells.csv (with labels) into `dir`.
void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir);

struct BcSpec {
  bool u_dirichlet = true;
  bool p_dirichlet = true;
  bool theta_dirichlet = true;

  static BcSpec all_dirichlet() { return {}; }
  /// Dirichlet displacement, Neumann pressure and temperature.
  static BcSpec clamped_insulated() { return {true, false, false}; }
};

/// P1 dof map of one field with its Dirichlet restriction. Dof of
/// (vertex v, component c) is v * components + c.
struct FieldSpace {
  Field field = Field::p;
  int components = 1;
  int n_dofs = 0;
  std::vector<int> free_index;   // dof -> position among free dofs, or -1
  std::vector<int> free_dofs;    // free position -> dof
  std::vector<int> constrained;  // sorted constrained dofs

  int n_free() const { return static_cast<int>(free_dofs.size()); }
  int dof(int vertex, int component) const { return vertex * components + component; }
};

class SpaceSet {
 public:
  SpaceSet(std::shared_ptr<const Mesh> mesh, BcSpec bc);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const BcSpec& bc() const { return bc_; }

  const FieldSpace& space(Field f) const;
  const FieldSpace& u() const { return u_; }
  const FieldSpace& p() const { return p_; }
  const FieldSpace& theta() const { return theta_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  BcSpec bc_;
  FieldSpace u_, p_, theta_;
};

std::shared_ptr<const SpaceSet> build_spaces(std::shared_ptr<const Mesh> mesh, BcSpec bc);

}  // namespace thmrom
