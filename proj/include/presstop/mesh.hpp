#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace presstop {

using Index = std::ptrdiff_t;

// Structured grid of unit square bilinear elements.
//
// Nodes and elements are numbered column-major with the row index growing
// downward: node(row, col) = col * (nely + 1) + row and
// element(row, col) = col * nely + row, all 0-based. Element-wise fields are
// therefore laid out exactly like a column-major (nely x nelx) image.
struct GridMesh {
  Index nelx = 0;
  Index nely = 0;
  Index nel = 0;
  Index nno = 0;

  Index node(Index row, Index col) const { return col * (nely + 1) + row; }
  Index element(Index row, Index col) const { return col * nely + row; }
  Index element_row(Index e) const { return e % nely; }
  Index element_col(Index e) const { return e / nely; }
  Index node_row(Index n) const { return n % (nely + 1); }
  Index node_col(Index n) const { return n / (nely + 1); }

  // Physical coordinates with y pointing up (bottom edge at y = 0).
  double node_x(Index n) const { return static_cast<double>(node_col(n)); }
  double node_y(Index n) const { return static_cast<double>(nely - node_row(n)); }

  bool operator==(const GridMesh&) const = default;
};

// Per-element DOF bookkeeping and edge node sets.
//
// Element-local node order is counterclockwise in physical coordinates,
// starting at the bottom-left corner: (bottom-left, bottom-right, top-right,
// top-left). Node n owns displacement DOFs 2n (x) and 2n + 1 (y). The element
// matrices of the darcy and elasticity modules assume this order.
struct DofMaps {
  std::vector<std::array<Index, 4>> p_dofs;
  std::vector<std::array<Index, 8>> u_dofs;
  // Edge node lists, ordered top-to-bottom (left/right) or left-to-right
  // (bottom/top).
  std::vector<Index> left_nodes;
  std::vector<Index> right_nodes;
  std::vector<Index> bottom_nodes;
  std::vector<Index> top_nodes;
  Index n_p_dofs = 0;
  Index n_u_dofs = 0;
};

// Element sets: non-design solid, non-design void, and design (active).
struct ActiveSets {
  std::vector<Index> nds;
  std::vector<Index> ndv;
  std::vector<Index> act;

  bool operator==(const ActiveSets&) const = default;
};

struct Mesh {
  GridMesh grid;
  DofMaps dofs;
};

Mesh build_mesh(Index nelx, Index nely);

// act = complement of nds U ndv. Throws std::invalid_argument on overlap or
// out-of-range indices; inputs need not be sorted.
ActiveSets make_active_sets(const GridMesh& grid, std::vector<Index> nds,
                            std::vector<Index> ndv);

// Unique, sorted nodes of the given elements.
std::vector<Index> element_nodes(const DofMaps& dofs,
                                 const std::vector<Index>& elements);

}  // namespace presstop
