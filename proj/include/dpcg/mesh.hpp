#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpcg/error.hpp"

namespace dpcg {

/// Coordinates in the plane; the second component is unused (zero) in 1D.
using Point = std::array<double, 2>;

/// Boundary part a facet belongs to: the Dirichlet part or the contact part.
enum class BoundaryTag { Dirichlet, Contact };

inline std::string_view to_string(BoundaryTag tag) {
  return tag == BoundaryTag::Dirichlet ? "DIRICHLET" : "CONTACT";
}

inline BoundaryTag parse_boundary_tag(std::string_view text) {
  if (text == "DIRICHLET") return BoundaryTag::Dirichlet;
  if (text == "CONTACT") return BoundaryTag::Contact;
  throw InvalidInput("unknown boundary tag '" + std::string(text) + "'");
}

/// A boundary facet: an endpoint in 1D (both entries equal), an edge in 2D.
struct Facet {
  std::array<std::size_t, 2> vertices{};
  BoundaryTag tag = BoundaryTag::Dirichlet;
};

/// Vertex indices of a segment (first two entries) or triangle.
using Cell = std::array<std::size_t, 3>;

/// Simplicial mesh of an interval or a planar polygon with a two-part boundary.
///
/// Meshes produced by refine() keep the coarse vertices first and append edge
/// midpoints. Children of cell c are stored at c*k .. c*k+k-1 with k = 2 (1D)
/// or 4 (2D); children of 2D facet f at 2f, 2f+1. The ancestry lookups in
/// GalerkinHierarchy rely on this layout.
class Mesh {
 public:
  Mesh(int dim, std::vector<Point> vertices, std::vector<Cell> cells, std::vector<Facet> facets, int level = 0,
       std::vector<std::array<std::size_t, 2>> midpoint_parents = {})
      : dim_(dim),
        vertices_(std::move(vertices)),
        cells_(std::move(cells)),
        facets_(std::move(facets)),
        level_(level),
        midpoint_parents_(std::move(midpoint_parents)) {
    validate();
  }

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int level() const { return level_; }
  [[nodiscard]] std::size_t vertices_per_cell() const { return static_cast<std::size_t>(dim_) + 1; }
  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }
  [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Cell>& cells() const { return cells_; }
  [[nodiscard]] const std::vector<Facet>& facets() const { return facets_; }

  /// For a refined mesh: the coarse edge whose midpoint is vertex
  /// (coarse_vertex_count() + i). Empty for a base mesh.
  [[nodiscard]] const std::vector<std::array<std::size_t, 2>>& midpoint_parents() const { return midpoint_parents_; }
  [[nodiscard]] std::size_t coarse_vertex_count() const { return vertices_.size() - midpoint_parents_.size(); }

  [[nodiscard]] double cell_measure(std::size_t c) const {
    const Cell& cell = cells_[c];
    const Point& a = vertices_[cell[0]];
    const Point& b = vertices_[cell[1]];
    if (dim_ == 1) return std::abs(b[0] - a[0]);
    const Point& d = vertices_[cell[2]];
    return 0.5 * std::abs((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]));
  }

  /// (N-1)-measure of a facet; counting measure in 1D.
  [[nodiscard]] double facet_measure(std::size_t f) const {
    if (dim_ == 1) return 1.0;
    const Point& a = vertices_[facets_[f].vertices[0]];
    const Point& b = vertices_[facets_[f].vertices[1]];
    return std::hypot(b[0] - a[0], b[1] - a[1]);
  }

  [[nodiscard]] double measure() const {
    double total = 0.0;
    for (std::size_t c = 0; c < cells_.size(); ++c) total += cell_measure(c);
    return total;
  }

  /// Bounding-box diagonal.
  [[nodiscard]] double diameter() const {
    Point lo = vertices_.front();
    Point hi = vertices_.front();
    for (const Point& v : vertices_) {
      for (int k = 0; k < 2; ++k) {
        lo[k] = std::min(lo[k], v[k]);
        hi[k] = std::max(hi[k], v[k]);
      }
    }
    return std::hypot(hi[0] - lo[0], hi[1] - lo[1]);
  }

  [[nodiscard]] std::size_t count_facets(BoundaryTag tag) const {
    std::size_t n = 0;
    for (const Facet& f : facets_) n += (f.tag == tag) ? 1 : 0;
    return n;
  }

 private:
  using Key = std::pair<std::size_t, std::size_t>;
  static Key edge_key(std::size_t a, std::size_t b) { return a < b ? Key{a, b} : Key{b, a}; }

  void validate() const {
    if (dim_ != 1 && dim_ != 2) throw InvalidInput("mesh dimension must be 1 or 2");
    if (vertices_.empty() || cells_.empty()) throw InvalidInput("mesh has no vertices or no cells");
    if (midpoint_parents_.size() > vertices_.size()) throw InvalidInput("inconsistent refinement record");

    for (const Point& v : vertices_)
      if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw InvalidInput("non-finite vertex coordinate");

    std::vector<char> used(vertices_.size(), 0);
    const std::size_t k = vertices_per_cell();
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      for (std::size_t i = 0; i < k; ++i) {
        if (cells_[c][i] >= vertices_.size())
          throw InvalidInput("cell " + std::to_string(c) + " references a missing vertex");
        used[cells_[c][i]] = 1;
      }
      if (!(cell_measure(c) > 0.0)) throw InvalidInput("cell " + std::to_string(c) + " has zero volume");
    }
    for (std::size_t v = 0; v < used.size(); ++v)
      if (!used[v]) throw InvalidInput("vertex " + std::to_string(v) + " belongs to no cell");

    // Topological boundary: facets owned by exactly one cell.
    std::map<Key, int> owners;
    for (const Cell& cell : cells_) {
      if (dim_ == 1) {
        owners[{cell[0], cell[0]}] += 1;
        owners[{cell[1], cell[1]}] += 1;
      } else {
        owners[edge_key(cell[0], cell[1])] += 1;
        owners[edge_key(cell[1], cell[2])] += 1;
        owners[edge_key(cell[2], cell[0])] += 1;
      }
    }
    std::map<Key, int> tagged;
    for (const Facet& f : facets_) {
      if (f.vertices[0] >= vertices_.size() || f.vertices[1] >= vertices_.size())
        throw InvalidInput("facet references a missing vertex");
      if (dim_ == 1 && f.vertices[0] != f.vertices[1]) throw InvalidInput("1D facets are single vertices");
      tagged[edge_key(f.vertices[0], f.vertices[1])] += 1;
    }
    for (const auto& [key, count] : owners) {
      if (count > 2) throw InvalidInput("non-conforming mesh: facet shared by more than two cells");
      const auto it = tagged.find(key);
      const int tags = it == tagged.end() ? 0 : it->second;
      if (count == 1 && tags != 1)
        throw InvalidInput("boundary facet (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                           ") must be tagged exactly once");
      if (count == 2 && tags != 0) throw InvalidInput("interior facet carries a boundary tag");
    }
    for (const auto& [key, count] : tagged)
      if (owners.find(key) == owners.end()) throw InvalidInput("tagged facet is not a mesh facet");

    if (count_facets(BoundaryTag::Contact) == 0) throw InvalidInput("contact boundary part is empty");
    if (count_facets(BoundaryTag::Dirichlet) == 0) throw InvalidInput("Dirichlet boundary part is empty");
  }

  int dim_;
  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<Facet> facets_;
  int level_;
  std::vector<std::array<std::size_t, 2>> midpoint_parents_;
};

/// Uniform refinement: midpoint bisection in 1D, red refinement in 2D.
inline Mesh refine(const Mesh& mesh) {
  std::vector<Point> vertices = mesh.vertices();
  std::vector<std::array<std::size_t, 2>> parents;
  std::vector<Cell> cells;
  std::vector<Facet> facets;

  if (mesh.dim() == 1) {
    cells.reserve(2 * mesh.num_cells());
    for (const Cell& c : mesh.cells()) {
      const std::size_t m = vertices.size();
      const Point& a = mesh.vertices()[c[0]];
      const Point& b = mesh.vertices()[c[1]];
      vertices.push_back({0.5 * (a[0] + b[0]), 0.0});
      parents.push_back({c[0], c[1]});
      cells.push_back({c[0], m, 0});
      cells.push_back({m, c[1], 0});
    }
    facets = mesh.facets();
  } else {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoints;
    auto midpoint = [&](std::size_t a, std::size_t b) {
      const auto key = a < b ? std::pair{a, b} : std::pair{b, a};
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      const std::size_t m = vertices.size();
      const Point& pa = mesh.vertices()[a];
      const Point& pb = mesh.vertices()[b];
      vertices.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
      parents.push_back({key.first, key.second});
      midpoints.emplace(key, m);
      return m;
    };
    cells.reserve(4 * mesh.num_cells());
    for (const Cell& c : mesh.cells()) {
      const std::size_t mab = midpoint(c[0], c[1]);
      const std::size_t mbc = midpoint(c[1], c[2]);
      const std::size_t mca = midpoint(c[2], c[0]);
      cells.push_back({c[0], mab, mca});
      cells.push_back({mab, c[1], mbc});
      cells.push_back({mca, mbc, c[2]});
      cells.push_back({mab, mbc, mca});
    }
    facets.reserve(2 * mesh.facets().size());
    for (const Facet& f : mesh.facets()) {
      const std::size_t m = midpoint(f.vertices[0], f.vertices[1]);
      facets.push_back({{f.vertices[0], m}, f.tag});
      facets.push_back({{m, f.vertices[1]}, f.tag});
    }
  }
  return Mesh(mesh.dim(), std::move(vertices), std::move(cells), std::move(facets), mesh.level() + 1,
              std::move(parents));
}

/// Uniform mesh of [a, b] with `cells` segments.
inline Mesh make_interval(double a, double b, std::size_t cells, BoundaryTag left, BoundaryTag right) {
  if (cells == 0 || !(b > a)) throw InvalidInput("interval needs b > a and at least one cell");
  std::vector<Point> vertices;
  std::vector<Cell> cs;
  for (std::size_t i = 0; i <= cells; ++i)
    vertices.push_back({a + (b - a) * static_cast<double>(i) / static_cast<double>(cells), 0.0});
  for (std::size_t i = 0; i < cells; ++i) cs.push_back({i, i + 1, 0});
  std::vector<Facet> facets{{{0, 0}, left}, {{cells, cells}, right}};
  return Mesh(1, std::move(vertices), std::move(cs), std::move(facets));
}

struct RectangleTags {
  BoundaryTag left = BoundaryTag::Dirichlet;
  BoundaryTag right = BoundaryTag::Contact;
  BoundaryTag bottom = BoundaryTag::Dirichlet;
  BoundaryTag top = BoundaryTag::Contact;
};

/// Structured triangulation of [x0,x1]x[y0,y1], each square split along its diagonal.
inline Mesh make_rectangle(double x0, double x1, double y0, double y1, std::size_t nx, std::size_t ny,
                           RectangleTags tags = {}) {
  if (nx == 0 || ny == 0 || !(x1 > x0) || !(y1 > y0)) throw InvalidInput("degenerate rectangle");
  const auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<Point> vertices;
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      vertices.push_back({x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(nx),
                          y0 + (y1 - y0) * static_cast<double>(j) / static_cast<double>(ny)});
  std::vector<Cell> cells;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<Facet> facets;
  for (std::size_t i = 0; i < nx; ++i) facets.push_back({{id(i, 0), id(i + 1, 0)}, tags.bottom});
  for (std::size_t j = 0; j < ny; ++j) facets.push_back({{id(nx, j), id(nx, j + 1)}, tags.right});
  for (std::size_t i = nx; i > 0; --i) facets.push_back({{id(i, ny), id(i - 1, ny)}, tags.top});
  for (std::size_t j = ny; j > 0; --j) facets.push_back({{id(0, j), id(0, j - 1)}, tags.left});
  return Mesh(2, std::move(vertices), std::move(cells), std::move(facets));
}

// Mesh exchange format (see docs/formats.md):
//
//   DIMENSION <1|2>
//   VERTICES <n>      followed by n lines "x" (1D) or "x y" (2D)
//   CELLS <n>         followed by n lines of 2 (1D) or 3 (2D) zero-based vertex indices
//   FACETS <n>        followed by n lines "<v> TAG" (1D) or "<v0> <v1> TAG" (2D)
//
// Lines starting with '#' and blank lines are ignored.

inline std::string write_mesh_text(const Mesh& mesh) {
  std::ostringstream os;
  os.precision(17);
  os << "DIMENSION " << mesh.dim() << '\n';
  os << "VERTICES " << mesh.num_vertices() << '\n';
  for (const Point& v : mesh.vertices()) {
    os << v[0];
    if (mesh.dim() == 2) os << ' ' << v[1];
    os << '\n';
  }
  os << "CELLS " << mesh.num_cells() << '\n';
  for (const Cell& c : mesh.cells()) {
    os << c[0] << ' ' << c[1];
    if (mesh.dim() == 2) os << ' ' << c[2];
    os << '\n';
  }
  os << "FACETS " << mesh.facets().size() << '\n';
  for (const Facet& f : mesh.facets()) {
    os << f.vertices[0];
    if (mesh.dim() == 2) os << ' ' << f.vertices[1];
    os << ' ' << to_string(f.tag) << '\n';
  }
  return os.str();
}

inline Mesh read_mesh_text(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  std::size_t next = 0;
  auto header = [&](std::string_view keyword) {
    if (next >= lines.size()) throw InvalidInput("mesh text: missing section " + std::string(keyword));
    std::istringstream is(lines[next++]);
    std::string word;
    long long count = -1;
    is >> word >> count;
    if (word != keyword || !is || count < 0)
      throw InvalidInput("mesh text: expected '" + std::string(keyword) + " <count>'");
    return static_cast<std::size_t>(count);
  };
  auto row = [&]() -> std::istringstream {
    if (next >= lines.size()) throw InvalidInput("mesh text: unexpected end of file");
    return std::istringstream(lines[next++]);
  };

  const std::size_t dim_value = header("DIMENSION");
  if (dim_value != 1 && dim_value != 2) throw InvalidInput("mesh text: DIMENSION must be 1 or 2");
  const int dim = static_cast<int>(dim_value);

  std::vector<Point> vertices(header("VERTICES"));
  for (Point& v : vertices) {
    auto is = row();
    is >> v[0];
    if (dim == 2) is >> v[1];
    if (!is) throw InvalidInput("mesh text: malformed vertex line");
  }
  std::vector<Cell> cells(header("CELLS"));
  for (Cell& c : cells) {
    auto is = row();
    is >> c[0] >> c[1];
    if (dim == 2) is >> c[2];
    if (!is) throw InvalidInput("mesh text: malformed cell line");
  }
  std::vector<Facet> facets(header("FACETS"));
  for (Facet& f : facets) {
    auto is = row();
    std::string tag;
    is >> f.vertices[0];
    if (dim == 2) {
      is >> f.vertices[1];
    } else {
      f.vertices[1] = f.vertices[0];
    }
    is >> tag;
    if (!is) throw InvalidInput("mesh text: malformed facet line");
    f.tag = parse_boundary_tag(tag);
  }
  if (next != lines.size()) throw InvalidInput("mesh text: trailing content");
  return Mesh(dim, std::move(vertices), std::move(cells), std::move(facets));
}

}  // namespace dpcg
