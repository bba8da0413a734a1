#pragma once

#include "rotafem/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rotafem {

enum class Subdomain : std::uint8_t { Whole, Elastic, Poro };
enum class EdgeClass : std::uint8_t { Interior, Boundary, Interface };

const char* to_string(Subdomain s);
const char* to_string(EdgeClass c);

struct Edge {
  std::array<int, 2> v{-1, -1};      // sorted vertex indices
  std::array<int, 2> cells{-1, -1};  // cells[1] == -1 on the boundary
};

/// Straight-line interface used to tag subdomains of a structured mesh.
enum class Partition { None, HorizontalMidline, LShapeDiagonal };

// Conforming triangulation. Cells are counterclockwise; cell_edges[c][i] is
// the edge opposite local vertex i. refinement_edge[c] is the local index of
// the newest-vertex-bisection edge (again "opposite vertex i").
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<Subdomain> cell_subdomain;
  std::vector<std::uint8_t> refinement_edge;

  // Derived by classify_edges().
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> cell_edges;
  std::vector<EdgeClass> edge_class;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return cells.size(); }
  std::size_t num_edges() const { return edges.size(); }

  Vec2 vertex(int cell, int local) const { return vertices[cells[cell][local]]; }
  Vec2 centroid(int cell) const;
  double signed_area(int cell) const;
  double area(int cell) const { return std::abs(signed_area(cell)); }

  bool has_interface() const;
  std::size_t count_edges(EdgeClass c) const;
  std::size_t count_cells(Subdomain s) const;
};

Mesh build_unit_square(int n, Partition partition = Partition::None);
Mesh build_l_shape(int n, Partition partition = Partition::None);

/// Rebuilds the edge table and tags every edge. Throws TopologyError when an
/// edge has more than two incident cells.
void classify_edges(Mesh& mesh);

/// Newest: one bisection of every marked cell.
/// Halving: all three edges of a marked cell are split (four children of half
/// the diameter).
enum class BisectionMode { Newest, Halving };

/// Newest-vertex bisection of the marked cells plus the conformity closure.
Mesh bisect(const Mesh& mesh, const std::vector<int>& marked, BisectionMode mode = BisectionMode::Newest);

/// One Gauss-Seidel pass of Laplacian smoothing on vertices that lie neither
/// on the domain boundary nor on the interface.
Mesh smooth(const Mesh& mesh);

double cell_diameter(const Mesh& mesh, int cell);
double edge_length(const Mesh& mesh, int edge);
double max_cell_diameter(const Mesh& mesh);

/// 2 * inradius / diameter; 0 for degenerate cells.
double cell_quality(const Mesh& mesh, int cell);
double min_cell_quality(const Mesh& mesh);
double min_angle(const Mesh& mesh);

/// Vertices on Boundary edges, and vertices on Interface edges.
std::vector<std::uint8_t> boundary_vertex_mask(const Mesh& mesh);
std::vector<std::uint8_t> interface_vertex_mask(const Mesh& mesh);

/// Throws TopologyError on hanging vertices, inverted cells or bad tags.
void check_conformity(const Mesh& mesh);

using CellData = std::map<std::string, std::vector<double>>;

/// Legacy ASCII VTK unstructured grid with integer subdomain tags plus any
/// extra per-cell scalar arrays.
void write_vtk(const std::string& path, const Mesh& mesh, const CellData& cell_data = {});

}  // namespace rotafem
