#include "rotafem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <unordered_map>

namespace rotafem {

const char* to_string(Subdomain s) {
  switch (s) {
    case Subdomain::Whole: return "whole";
    case Subdomain::Elastic: return "elastic";
    case Subdomain::Poro: return "poro";
  }
  return "?";
}

const char* to_string(EdgeClass c) {
  switch (c) {
    case EdgeClass::Interior: return "interior";
    case EdgeClass::Boundary: return "boundary";
    case EdgeClass::Interface: return "interface";
  }
  return "?";
}

Vec2 Mesh::centroid(int cell) const {
  return (vertex(cell, 0) + vertex(cell, 1) + vertex(cell, 2)) / 3.0;
}

double Mesh::signed_area(int cell) const {
  const Vec2 a = vertex(cell, 1) - vertex(cell, 0);
  const Vec2 b = vertex(cell, 2) - vertex(cell, 0);
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

bool Mesh::has_interface() const { return count_edges(EdgeClass::Interface) > 0; }

std::size_t Mesh::count_edges(EdgeClass c) const {
  return static_cast<std::size_t>(std::count(edge_class.begin(), edge_class.end(), c));
}

std::size_t Mesh::count_cells(Subdomain s) const {
  return static_cast<std::size_t>(std::count(cell_subdomain.begin(), cell_subdomain.end(), s));
}

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double sq_len(const Vec2& a, const Vec2& b) { return (a - b).squaredNorm(); }

std::uint8_t longest_edge(const Mesh& m, int c) {
  const auto& t = m.cells[c];
  double best = -1.0;
  std::uint8_t arg = 0;
  for (std::uint8_t i = 0; i < 3; ++i) {
    const double l = sq_len(m.vertices[t[(i + 1) % 3]], m.vertices[t[(i + 2) % 3]]);
    // Strict comparison keeps the first of equal-length edges.
    if (l > best * (1.0 + 1e-12)) {
      best = l;
      arg = i;
    }
  }
  return arg;
}

// Squares are split along the bottom-left -> top-right diagonal.
void add_square(Mesh& m, int bl, int br, int tr, int tl) {
  m.cells.push_back({bl, br, tr});
  m.cells.push_back({bl, tr, tl});
}

void finalize(Mesh& m) {
  m.refinement_edge.resize(m.cells.size());
  for (std::size_t c = 0; c < m.cells.size(); ++c) m.refinement_edge[c] = longest_edge(m, static_cast<int>(c));
  classify_edges(m);
}

}  // namespace

Mesh build_unit_square(int n, Partition partition) {
  if (n < 1) throw InvalidArgument("build_unit_square: n must be positive");
  if (partition == Partition::HorizontalMidline && n % 2 != 0)
    throw InvalidArgument("build_unit_square: the y = 1/2 interface requires an even n");
  if (partition == Partition::LShapeDiagonal)
    throw InvalidArgument("build_unit_square: diagonal partition belongs to the L-shape");

  Mesh m;
  const double h = 1.0 / n;
  m.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(i * h, j * h);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) add_square(m, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));

  m.cell_subdomain.assign(m.cells.size(), Subdomain::Whole);
  if (partition == Partition::HorizontalMidline) {
    for (std::size_t c = 0; c < m.cells.size(); ++c)
      m.cell_subdomain[c] = m.centroid(static_cast<int>(c)).y() < 0.5 ? Subdomain::Poro : Subdomain::Elastic;
  }
  finalize(m);
  return m;
}

Mesh build_l_shape(int n, Partition partition) {
  if (n < 1) throw InvalidArgument("build_l_shape: n must be positive");
  if (partition == Partition::HorizontalMidline)
    throw InvalidArgument("build_l_shape: the L-shape interface is the diagonal y = x");

  Mesh m;
  const double h = 1.0 / n;
  const int side = 2 * n + 1;
  std::vector<int> id(static_cast<std::size_t>(side * side), -1);
  // Grid index i, j in [0, 2n] maps to x = -1 + i h; the open upper-right
  // quadrant x > 0, y > 0 is removed.
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      if (i > n && j > n) continue;
      id[j * side + i] = static_cast<int>(m.vertices.size());
      m.vertices.emplace_back(-1.0 + i * h, -1.0 + j * h);
    }
  }
  for (int j = 0; j + 1 < side; ++j) {
    for (int i = 0; i + 1 < side; ++i) {
      if (i >= n && j >= n) continue;
      add_square(m, id[j * side + i], id[j * side + i + 1], id[(j + 1) * side + i + 1], id[(j + 1) * side + i]);
    }
  }

  m.cell_subdomain.assign(m.cells.size(), Subdomain::Whole);
  if (partition == Partition::LShapeDiagonal) {
    for (std::size_t c = 0; c < m.cells.size(); ++c) {
      const Vec2 g = m.centroid(static_cast<int>(c));
      m.cell_subdomain[c] = g.y() > g.x() ? Subdomain::Poro : Subdomain::Elastic;
    }
  }
  finalize(m);
  return m;
}

void classify_edges(Mesh& m) {
  const std::size_t nc = m.cells.size();
  if (m.cell_subdomain.size() != nc) throw TopologyError("classify_edges: subdomain tags missing");
  m.edges.clear();
  m.cell_edges.assign(nc, {-1, -1, -1});
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(nc * 2);
  for (std::size_t c = 0; c < nc; ++c) {
    for (int i = 0; i < 3; ++i) {
      const int a = m.cells[c][(i + 1) % 3];
      const int b = m.cells[c][(i + 2) % 3];
      auto [it, inserted] = lookup.try_emplace(edge_key(a, b), static_cast<int>(m.edges.size()));
      if (inserted) {
        Edge e;
        e.v = {std::min(a, b), std::max(a, b)};
        e.cells = {static_cast<int>(c), -1};
        m.edges.push_back(e);
      } else {
        Edge& e = m.edges[it->second];
        if (e.cells[1] != -1)
          throw TopologyError("classify_edges: edge (" + std::to_string(a) + "," + std::to_string(b) +
                              ") has more than two incident cells");
        e.cells[1] = static_cast<int>(c);
      }
      m.cell_edges[c][i] = it->second;
    }
  }
  m.edge_class.resize(m.edges.size());
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    const auto& cells = m.edges[e].cells;
    if (cells[1] < 0)
      m.edge_class[e] = EdgeClass::Boundary;
    else if (m.cell_subdomain[cells[0]] != m.cell_subdomain[cells[1]])
      m.edge_class[e] = EdgeClass::Interface;
    else
      m.edge_class[e] = EdgeClass::Interior;
  }
}

Mesh bisect(const Mesh& mesh, const std::vector<int>& marked, BisectionMode mode) {
  const std::size_t ne = mesh.num_edges();
  std::vector<std::uint8_t> edge_marked(ne, 0);
  for (int c : marked) {
    if (c < 0 || static_cast<std::size_t>(c) >= mesh.num_cells())
      throw InvalidArgument("bisect: marked cell index out of range");
    if (mode == BisectionMode::Halving)
      for (int e : mesh.cell_edges[c]) edge_marked[e] = 1;
    else
      edge_marked[mesh.cell_edges[c][mesh.refinement_edge[c]]] = 1;
  }
  if (std::none_of(edge_marked.begin(), edge_marked.end(), [](auto b) { return b != 0; })) return mesh;

  // Closure: a cell with any marked edge must split its refinement edge.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const auto& ce = mesh.cell_edges[c];
      const int ref = ce[mesh.refinement_edge[c]];
      if (edge_marked[ref]) continue;
      if (edge_marked[ce[0]] || edge_marked[ce[1]] || edge_marked[ce[2]]) {
        edge_marked[ref] = 1;
        changed = true;
      }
    }
  }

  Mesh out;
  out.vertices = mesh.vertices;
  std::unordered_map<std::uint64_t, int> midpoint;
  for (std::size_t e = 0; e < ne; ++e) {
    if (!edge_marked[e]) continue;
    const auto& ev = mesh.edges[e].v;
    midpoint.emplace(edge_key(ev[0], ev[1]), static_cast<int>(out.vertices.size()));
    out.vertices.push_back(0.5 * (mesh.vertices[ev[0]] + mesh.vertices[ev[1]]));
  }
  auto mid_of = [&](int a, int b) -> int {
    auto it = midpoint.find(edge_key(a, b));
    return it == midpoint.end() ? -1 : it->second;
  };

  out.cells.reserve(mesh.num_cells() * 2);
  // Cells are kept in "peak first" form: (peak, b, c) with refinement edge bc.
  struct Pending {
    std::array<int, 3> v;
    Subdomain tag;
  };
  std::vector<Pending> stack;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    const int r = mesh.refinement_edge[c];
    stack.push_back({{t[r], t[(r + 1) % 3], t[(r + 2) % 3]}, mesh.cell_subdomain[c]});
    while (!stack.empty()) {
      Pending p = stack.back();
      stack.pop_back();
      const int m = mid_of(p.v[1], p.v[2]);
      if (m < 0) {
        out.cells.push_back(p.v);
        out.cell_subdomain.push_back(p.tag);
        out.refinement_edge.push_back(0);
        continue;
      }
      // Children (m, a, b) and (m, c, a); their refinement edges are ab and ca.
      stack.push_back({{m, p.v[2], p.v[0]}, p.tag});
      stack.push_back({{m, p.v[0], p.v[1]}, p.tag});
    }
  }
  classify_edges(out);
  return out;
}

std::vector<std::uint8_t> boundary_vertex_mask(const Mesh& mesh) {
  std::vector<std::uint8_t> mask(mesh.num_vertices(), 0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    if (mesh.edge_class[e] == EdgeClass::Boundary) mask[mesh.edges[e].v[0]] = mask[mesh.edges[e].v[1]] = 1;
  return mask;
}

std::vector<std::uint8_t> interface_vertex_mask(const Mesh& mesh) {
  std::vector<std::uint8_t> mask(mesh.num_vertices(), 0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    if (mesh.edge_class[e] == EdgeClass::Interface) mask[mesh.edges[e].v[0]] = mask[mesh.edges[e].v[1]] = 1;
  return mask;
}

namespace {

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double triangle_quality(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
  const double area = std::abs(triangle_area(a, b, c));
  const double diam = std::max({la, lb, lc});
  if (diam == 0.0) return 0.0;
  const double inradius = 2.0 * area / (la + lb + lc);
  return 2.0 * inradius / diam;
}

}  // namespace

Mesh smooth(const Mesh& mesh) {
  Mesh out = mesh;
  const auto boundary = boundary_vertex_mask(mesh);
  const auto iface = interface_vertex_mask(mesh);
  const std::size_t nv = mesh.num_vertices();

  std::vector<std::vector<int>> vertex_cells(nv);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (int v : mesh.cells[c]) vertex_cells[v].push_back(static_cast<int>(c));
  std::vector<std::vector<int>> neighbours(nv);
  for (const auto& e : mesh.edges) {
    neighbours[e.v[0]].push_back(e.v[1]);
    neighbours[e.v[1]].push_back(e.v[0]);
  }

  auto& X = out.vertices;
  for (std::size_t v = 0; v < nv; ++v) {
    if (boundary[v] || iface[v] || neighbours[v].empty()) continue;
    Vec2 target = Vec2::Zero();
    for (int w : neighbours[v]) target += X[w];
    target /= static_cast<double>(neighbours[v].size());
    if ((target - X[v]).norm() == 0.0) continue;

    const Vec2 old = X[v];
    std::vector<double> old_area;
    double old_quality = 1e300;
    for (int c : vertex_cells[v]) {
      const auto& t = out.cells[c];
      old_area.push_back(triangle_area(X[t[0]], X[t[1]], X[t[2]]));
      old_quality = std::min(old_quality, triangle_quality(X[t[0]], X[t[1]], X[t[2]]));
    }
    X[v] = target;
    bool accept = true;
    double new_quality = 1e300;
    for (std::size_t i = 0; i < vertex_cells[v].size() && accept; ++i) {
      const auto& t = out.cells[vertex_cells[v][i]];
      const double a = triangle_area(X[t[0]], X[t[1]], X[t[2]]);
      if (a < 0.1 * old_area[i]) accept = false;
      new_quality = std::min(new_quality, triangle_quality(X[t[0]], X[t[1]], X[t[2]]));
    }
    if (!accept || new_quality < old_quality) X[v] = old;
  }
  return out;
}

double cell_diameter(const Mesh& mesh, int cell) {
  const Vec2 a = mesh.vertex(cell, 0), b = mesh.vertex(cell, 1), c = mesh.vertex(cell, 2);
  return std::sqrt(std::max({sq_len(a, b), sq_len(b, c), sq_len(c, a)}));
}

double edge_length(const Mesh& mesh, int edge) {
  const auto& e = mesh.edges[edge];
  return (mesh.vertices[e.v[0]] - mesh.vertices[e.v[1]]).norm();
}

double max_cell_diameter(const Mesh& mesh) {
  double h = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) h = std::max(h, cell_diameter(mesh, static_cast<int>(c)));
  return h;
}

double cell_quality(const Mesh& mesh, int cell) {
  return triangle_quality(mesh.vertex(cell, 0), mesh.vertex(cell, 1), mesh.vertex(cell, 2));
}

double min_cell_quality(const Mesh& mesh) {
  double q = 1.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) q = std::min(q, cell_quality(mesh, static_cast<int>(c)));
  return q;
}

double min_angle(const Mesh& mesh) {
  double best = std::numbers::pi;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    for (int i = 0; i < 3; ++i) {
      const Vec2 p = mesh.vertex(static_cast<int>(c), i);
      const Vec2 a = mesh.vertex(static_cast<int>(c), (i + 1) % 3) - p;
      const Vec2 b = mesh.vertex(static_cast<int>(c), (i + 2) % 3) - p;
      const double cosang = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
      best = std::min(best, std::acos(cosang));
    }
  }
  return best;
}

void check_conformity(const Mesh& mesh) {
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    if (!(mesh.signed_area(static_cast<int>(c)) > 0.0))
      throw TopologyError("cell " + std::to_string(c) + " is not counterclockwise");

  // A hanging vertex lies strictly inside some edge.
  std::vector<std::vector<int>> vertex_edges(mesh.num_vertices());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    vertex_edges[mesh.edges[e].v[0]].push_back(static_cast<int>(e));
    vertex_edges[mesh.edges[e].v[1]].push_back(static_cast<int>(e));
  }
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Vec2 a = mesh.vertices[mesh.edges[e].v[0]];
    const Vec2 b = mesh.vertices[mesh.edges[e].v[1]];
    const Vec2 mid = 0.5 * (a + b);
    const double len = (b - a).norm();
    // Candidates: vertices adjacent to either endpoint's neighbours.
    for (int end : mesh.edges[e].v) {
      for (int f : vertex_edges[end]) {
        for (int w : mesh.edges[f].v) {
          if (w == mesh.edges[e].v[0] || w == mesh.edges[e].v[1]) continue;
          const Vec2 p = mesh.vertices[w];
          const double cross = (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
          if (std::abs(cross) <= 1e-12 * len * len && (p - mid).norm() < 0.5 * len * (1.0 - 1e-12))
            throw TopologyError("hanging vertex " + std::to_string(w) + " on edge " + std::to_string(e));
        }
      }
    }
    const auto& cells = mesh.edges[e].cells;
    const bool iface = cells[1] >= 0 && mesh.cell_subdomain[cells[0]] != mesh.cell_subdomain[cells[1]];
    if ((mesh.edge_class[e] == EdgeClass::Interface) != iface)
      throw TopologyError("edge " + std::to_string(e) + " has an inconsistent interface tag");
    if ((mesh.edge_class[e] == EdgeClass::Boundary) != (cells[1] < 0))
      throw TopologyError("edge " + std::to_string(e) + " has an inconsistent boundary tag");
  }
}

void write_vtk(const std::string& path, const Mesh& mesh, const CellData& cell_data) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_vtk: cannot open " + path);
  os.precision(17);
  os << "# vtk DataFile Version 3.0\nrotafem mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices) os << v.x() << ' ' << v.y() << " 0\n";
  os << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
  for (const auto& t : mesh.cells) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) os << "5\n";
  os << "CELL_DATA " << mesh.num_cells() << '\n';
  os << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
  for (auto s : mesh.cell_subdomain) os << static_cast<int>(s) << '\n';
  for (const auto& [name, values] : cell_data) {
    if (values.size() != mesh.num_cells()) throw InvalidArgument("write_vtk: cell data '" + name + "' has wrong size");
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : values) os << x << '\n';
  }
}

}  // namespace rotafem
