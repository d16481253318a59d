#include "thmrom/mesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace thmrom {

namespace {

bool resolved_by_grid(double y, int n) {
  const double k = y * n;
  return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k));
}

FieldSpace make_field_space(const Mesh& mesh, Field field, int components, bool dirichlet) {
  FieldSpace s;
  s.field = field;
  s.components = components;
  s.n_dofs = mesh.num_vertices() * components;
  s.free_index.assign(s.n_dofs, -1);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    for (int c = 0; c < components; ++c) {
      const int d = s.dof(v, c);
      if (dirichlet && mesh.is_boundary_vertex(v)) {
        s.constrained.push_back(d);
      } else {
        s.free_index[d] = static_cast<int>(s.free_dofs.size());
        s.free_dofs.push_back(d);
      }
    }
  }
  return s;
}

}  // namespace

double Mesh::h() const { return std::sqrt(2.0) / n_; }

double Mesh::signed_area(int cell) const {
  const auto& c = cells_[cell];
  const Point& a = vertices_[c[0]];
  const Point& b = vertices_[c[1]];
  const Point& d = vertices_[c[2]];
  return 0.5 * ((b.x - a.x) * (d.y - a.y) - (d.x - a.x) * (b.y - a.y));
}

Point Mesh::centroid(int cell) const {
  const auto& c = cells_[cell];
  Point g;
  for (int k = 0; k < 3; ++k) {
    g.x += vertices_[c[k]].x / 3.0;
    g.y += vertices_[c[k]].y / 3.0;
  }
  return g;
}

Mesh build_unit_square_mesh(int n, std::optional<BandRegion> region) {
  if (n < 1) throw std::invalid_argument("build_unit_square_mesh: n must be >= 1");
  if (region) {
    if (!(region->y_low < region->y_high))
      throw std::invalid_argument("build_unit_square_mesh: empty band");
    if (!resolved_by_grid(region->y_low, n) || !resolved_by_grid(region->y_high, n)) {
      std::ostringstream msg;
      msg << "build_unit_square_mesh: band (" << region->y_low << ", " << region->y_high
          << ") is not resolved by a " << n << "x" << n << " grid";
      throw std::invalid_argument(msg.str());
    }
  }

  Mesh m;
  m.n_ = n;
  const int nv = n + 1;
  m.vertices_.reserve(static_cast<size_t>(nv) * nv);
  m.on_boundary_.assign(static_cast<size_t>(nv) * nv, 0);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const int v = j * nv + i;
      // i / n keeps grid coordinates exact at 0 and 1.
      m.vertices_.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
      if (i == 0 || i == n || j == 0 || j == n) {
        m.on_boundary_[v] = 1;
        m.boundary_.push_back(v);
      }
    }
  }

  m.cells_.reserve(2 * static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * nv + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + nv;
      const int v11 = v01 + 1;
      m.cells_.push_back({v00, v10, v11});
      m.cells_.push_back({v00, v11, v01});
    }
  }

  m.labels_.assign(m.cells_.size(), 2);
  if (region) {
    for (int c = 0; c < m.num_cells(); ++c) {
      const double y = m.centroid(c).y;
      if (y > region->y_low && y < region->y_high) m.labels_[c] = 1;
    }
  }
  return m;
}

void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream vout(dir / "vertices.csv");
  vout << "vertex,x,y,boundary\n" << std::setprecision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto& p = mesh.vertices()[v];
    vout << v << ',' << p.x << ',' << p.y << ',' << (mesh.is_boundary_vertex(v) ? 1 : 0) << '\n';
  }
  std::ofstream cout_(dir / "cells.csv");
  cout_ << "cell,v0,v1,v2,label\n";
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells()[c];
    cout_ << c << ',' << t[0] << ',' << t[1] << ',' << t[2] << ',' << mesh.cell_labels()[c] << '\n';
  }
}

SpaceSet::SpaceSet(std::shared_ptr<const Mesh> mesh, BcSpec bc)
    : mesh_(std::move(mesh)), bc_(bc) {
  if (!mesh_) throw std::invalid_argument("SpaceSet: null mesh");
  u_ = make_field_space(*mesh_, Field::u, 2, bc_.u_dirichlet);
  p_ = make_field_space(*mesh_, Field::p, 1, bc_.p_dirichlet);
  theta_ = make_field_space(*mesh_, Field::theta, 1, bc_.theta_dirichlet);
}

const FieldSpace& SpaceSet::space(Field f) const {
  switch (f) {
    case Field::u: return u_;
    case Field::p: return p_;
    case Field::theta: return theta_;
  }
  throw std::invalid_argument("SpaceSet::space: bad field");
}

std::shared_ptr<const SpaceSet> build_spaces(std::shared_ptr<const Mesh> mesh, BcSpec bc) {
  return std::make_shared<const SpaceSet>(std::move(mesh), bc);
}

}  // namespace thmrom
