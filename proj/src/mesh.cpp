#include "presstop/mesh.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace presstop {

Mesh build_mesh(Index nelx, Index nely) {
  if (nelx < 1 || nely < 1) {
    throw std::invalid_argument("build_mesh: grid dimensions must be positive, got " +
                                std::to_string(nelx) + " x " + std::to_string(nely));
  }
  Mesh mesh;
  GridMesh& g = mesh.grid;
  g.nelx = nelx;
  g.nely = nely;
  g.nel = nelx * nely;
  g.nno = (nelx + 1) * (nely + 1);

  DofMaps& d = mesh.dofs;
  d.n_p_dofs = g.nno;
  d.n_u_dofs = 2 * g.nno;
  d.p_dofs.resize(static_cast<std::size_t>(g.nel));
  d.u_dofs.resize(static_cast<std::size_t>(g.nel));
  for (Index col = 0; col < nelx; ++col) {
    for (Index row = 0; row < nely; ++row) {
      const Index e = g.element(row, col);
      const std::array<Index, 4> nodes = {g.node(row + 1, col), g.node(row + 1, col + 1),
                                          g.node(row, col + 1), g.node(row, col)};
      d.p_dofs[e] = nodes;
      for (int a = 0; a < 4; ++a) {
        d.u_dofs[e][2 * a] = 2 * nodes[a];
        d.u_dofs[e][2 * a + 1] = 2 * nodes[a] + 1;
      }
    }
  }

  for (Index row = 0; row <= nely; ++row) {
    d.left_nodes.push_back(g.node(row, 0));
    d.right_nodes.push_back(g.node(row, nelx));
  }
  for (Index col = 0; col <= nelx; ++col) {
    d.bottom_nodes.push_back(g.node(nely, col));
    d.top_nodes.push_back(g.node(0, col));
  }
  return mesh;
}

ActiveSets make_active_sets(const GridMesh& grid, std::vector<Index> nds,
                            std::vector<Index> ndv) {
  auto normalize = [&](std::vector<Index>& v, const char* what) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (!v.empty() && (v.front() < 0 || v.back() >= grid.nel)) {
      throw std::invalid_argument(std::string(what) + " element index out of range");
    }
  };
  normalize(nds, "non-design solid");
  normalize(ndv, "non-design void");

  std::vector<Index> both;
  std::set_intersection(nds.begin(), nds.end(), ndv.begin(), ndv.end(),
                        std::back_inserter(both));
  if (!both.empty()) {
    throw std::invalid_argument("non-design solid and void regions overlap at element " +
                                std::to_string(both.front()));
  }

  ActiveSets sets;
  std::vector<char> frozen(static_cast<std::size_t>(grid.nel), 0);
  for (Index e : nds) frozen[e] = 1;
  for (Index e : ndv) frozen[e] = 1;
  for (Index e = 0; e < grid.nel; ++e) {
    if (!frozen[e]) sets.act.push_back(e);
  }
  sets.nds = std::move(nds);
  sets.ndv = std::move(ndv);
  return sets;
}

std::vector<Index> element_nodes(const DofMaps& dofs, const std::vector<Index>& elements) {
  std::vector<Index> nodes;
  nodes.reserve(elements.size() * 4);
  for (Index e : elements) {
    const auto& pd = dofs.p_dofs.at(static_cast<std::size_t>(e));
    nodes.insert(nodes.end(), pd.begin(), pd.end());
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

}  // namespace presstop
