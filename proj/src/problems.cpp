#include "presstop/problems.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace presstop {

using nlohmann::json;

namespace {

// Ordered nodal pressure assignment; later assignments overwrite earlier ones.
class PressureTable {
 public:
  void set(const std::vector<Index>& nodes, double value) {
    for (Index n : nodes) values_[n] = value;
  }
  std::vector<PressureBc> bcs() const {
    std::vector<PressureBc> out;
    out.reserve(values_.size());
    for (const auto& [node, value] : values_) out.push_back({node, value});
    return out;
  }

 private:
  std::map<Index, double> values_;
};

std::vector<Index> both_dofs(const std::vector<Index>& nodes) {
  std::vector<Index> dofs;
  for (Index n : nodes) {
    dofs.push_back(2 * n);
    dofs.push_back(2 * n + 1);
  }
  return dofs;
}

std::vector<Index> sorted_unique(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Elements with row in [r0, r1) and column in [c0, c1).
std::vector<Index> element_block(const GridMesh& g, Index r0, Index r1, Index c0, Index c1) {
  std::vector<Index> out;
  for (Index c = std::max<Index>(c0, 0); c < std::min(c1, g.nelx); ++c) {
    for (Index r = std::max<Index>(r0, 0); r < std::min(r1, g.nely); ++r) {
      out.push_back(g.element(r, c));
    }
  }
  return out;
}

ProblemSpec base_spec(const std::string& name, Index nelx, Index nely, double volfrac, double penal,
                      double rmin, double etaf, double betaf, int lst, int maxit) {
  ProblemSpec s;
  s.name = name;
  s.nelx = nelx;
  s.nely = nely;
  s.volfrac = volfrac;
  s.material.penal = penal;
  s.rmin = rmin;
  s.flow.etaf = etaf;
  s.flow.betaf = betaf;
  s.lst = lst;
  s.maxit = maxit;
  return s;
}

// ---- configuration parsing ----------------------------------------------

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "name", "nelx", "nely", "volfrac", "penal", "rmin", "etaf", "betaf", "lst", "maxit",
      "move_limit", "E0", "Emin", "nu", "Kv", "epsf", "r", "Dels", "Pin", "pressure",
      "supports", "fixed_dofs", "nds", "ndv", "nds_regions", "ndv_regions"};
  return keys;
}

template <class T>
T get_required(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw ConfigError(std::string("config: missing required key '") + key + "'");
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: key '") + key + "' has the wrong type: " + e.what());
  }
}

template <class T>
void get_optional(const json& cfg, const char* key, T& out) {
  if (!cfg.contains(key)) return;
  try {
    out = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: key '") + key + "' has the wrong type: " + e.what());
  }
}

Index require_integer(const json& v, const char* what) {
  if (!v.is_number_integer()) throw ConfigError(std::string("config: ") + what + " must be an integer");
  return v.get<Index>();
}

std::vector<Index> index_list(const json& v, const char* what) {
  if (!v.is_array()) throw ConfigError(std::string("config: ") + what + " must be an array");
  std::vector<Index> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(require_integer(e, what));
  return out;
}

// floor(fraction * n) for a fraction given as a number or an exact "p/q" or
// integer string.
Index fraction_bound(const json& v, Index n) {
  double value = 0.0;
  Index bound = 0;
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      auto whole = [&](const std::string& part) {
        std::size_t used = 0;
        const long long value = std::stoll(part, &used);
        if (used != part.size()) throw std::invalid_argument(part);
        return value;
      };
      const long long num = whole(s.substr(0, slash));
      const long long den = slash == std::string::npos ? 1 : whole(s.substr(slash + 1));
      if (den <= 0 || num < 0) throw std::invalid_argument(s);
      value = static_cast<double>(num) / static_cast<double>(den);
      bound = static_cast<Index>((num * n) / den);
    } catch (const std::logic_error&) {
      throw ConfigError("config: region fraction '" + s + "' is not of the form p/q");
    }
  } else if (v.is_number()) {
    value = v.get<double>();
    bound = static_cast<Index>(std::floor(value * static_cast<double>(n) + 1e-9));
  } else {
    throw ConfigError("config: region fraction must be a number or a 'p/q' string");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ConfigError("config: region fraction " + std::to_string(value) + " outside [0, 1]");
  }
  return bound;
}

std::vector<Index> parse_regions(const json& regions, const GridMesh& g, const char* what) {
  if (!regions.is_array()) throw ConfigError(std::string("config: ") + what + " must be an array");
  std::vector<Index> out;
  for (const auto& reg : regions) {
    if (!reg.is_object() || !reg.contains("rows") || !reg.contains("cols") ||
        !reg["rows"].is_array() || reg["rows"].size() != 2 || !reg["cols"].is_array() ||
        reg["cols"].size() != 2) {
      throw ConfigError(std::string("config: each entry of ") + what +
                        " needs 'rows' and 'cols' as [start, end] fraction pairs");
    }
    const Index r0 = fraction_bound(reg["rows"][0], g.nely);
    const Index r1 = fraction_bound(reg["rows"][1], g.nely);
    const Index c0 = fraction_bound(reg["cols"][0], g.nelx);
    const Index c1 = fraction_bound(reg["cols"][1], g.nelx);
    if (r0 > r1 || c0 > c1) throw ConfigError(std::string("config: empty-range region in ") + what);
    const auto block = element_block(g, r0, r1, c0, c1);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

std::vector<Index> edge_nodes(const DofMaps& d, const json& edges) {
  if (!edges.is_array()) throw ConfigError("config: 'edges' must be an array");
  std::vector<Index> out;
  for (const auto& e : edges) {
    const std::string name = e.is_string() ? e.get<std::string>() : "";
    const std::vector<Index>* nodes = nullptr;
    if (name == "left") nodes = &d.left_nodes;
    else if (name == "right") nodes = &d.right_nodes;
    else if (name == "bottom") nodes = &d.bottom_nodes;
    else if (name == "top") nodes = &d.top_nodes;
    else throw ConfigError("config: unknown edge '" + e.dump() + "' (left, right, bottom, top)");
    out.insert(out.end(), nodes->begin(), nodes->end());
  }
  return out;
}

Index corner_node(const GridMesh& g, const std::string& corner) {
  if (corner == "bottom-left") return g.node(g.nely, 0);
  if (corner == "bottom-right") return g.node(g.nely, g.nelx);
  if (corner == "top-left") return g.node(0, 0);
  if (corner == "top-right") return g.node(0, g.nelx);
  throw ConfigError("config: unknown corner '" + corner + "'");
}

// Node selection shared by pressure and support entries.
std::vector<Index> select_nodes(const json& entry, const Mesh& mesh, const ActiveSets& sets) {
  std::vector<Index> nodes;
  bool any = false;
  if (entry.contains("nodes")) {
    any = true;
    const auto list = index_list(entry["nodes"], "'nodes'");
    nodes.insert(nodes.end(), list.begin(), list.end());
  }
  if (entry.contains("edges")) {
    any = true;
    const auto list = edge_nodes(mesh.dofs, entry["edges"]);
    nodes.insert(nodes.end(), list.begin(), list.end());
  }
  if (entry.contains("corners")) {
    any = true;
    if (!entry["corners"].is_array()) throw ConfigError("config: 'corners' must be an array");
    for (const auto& c : entry["corners"]) {
      if (!c.is_string()) throw ConfigError("config: corner names must be strings");
      nodes.push_back(corner_node(mesh.grid, c.get<std::string>()));
    }
  }
  if (entry.contains("element_nodes")) {
    any = true;
    const auto els = index_list(entry["element_nodes"], "'element_nodes'");
    for (Index e : els) {
      if (e < 0 || e >= mesh.grid.nel) throw ConfigError("config: element index out of range");
    }
    const auto list = element_nodes(mesh.dofs, els);
    nodes.insert(nodes.end(), list.begin(), list.end());
  }
  if (entry.contains("ndv_nodes") && entry["ndv_nodes"].is_boolean() && entry["ndv_nodes"].get<bool>()) {
    any = true;
    const auto list = element_nodes(mesh.dofs, sets.ndv);
    nodes.insert(nodes.end(), list.begin(), list.end());
  }
  if (!any) {
    throw ConfigError("config: boundary entry selects no nodes (use nodes, edges, corners, "
                      "element_nodes or ndv_nodes)");
  }
  for (Index n : nodes) {
    if (n < 0 || n >= mesh.grid.nno) throw ConfigError("config: node index " + std::to_string(n) + " out of range");
  }
  return nodes;
}

}  // namespace

// ---- validation ------------------------------------------------------------

bool removes_rigid_body_modes(const GridMesh& grid, const std::vector<Index>& fixed_u_dofs) {
  if (fixed_u_dofs.size() < 3) return false;
  Eigen::MatrixXd modes(static_cast<Index>(fixed_u_dofs.size()), 3);
  for (std::size_t k = 0; k < fixed_u_dofs.size(); ++k) {
    const Index dof = fixed_u_dofs[k];
    const Index n = dof / 2;
    const double x = grid.node_x(n), y = grid.node_y(n);
    if (dof % 2 == 0) modes.row(static_cast<Index>(k)) << 1.0, 0.0, -y;
    else modes.row(static_cast<Index>(k)) << 0.0, 1.0, x;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(modes);
  qr.setThreshold(1e-10);
  return qr.rank() == 3;
}

void validate(const ProblemSpec& s) {
  auto fail = [&](const std::string& msg) { throw ConfigError("problem '" + s.name + "': " + msg); };
  if (s.nelx < 1 || s.nely < 1) fail("grid dimensions must be positive");
  if (!(s.volfrac > 0.0 && s.volfrac < 1.0)) fail("volfrac must lie in (0, 1)");
  if (!(s.rmin > 0.0)) fail("rmin must be positive");
  if (s.lst != 0 && s.lst != 1) fail("lst must be 0 or 1");
  if (s.maxit < 0) fail("maxit must be non-negative");
  if (!(s.move_limit > 0.0 && s.move_limit <= 1.0)) fail("move_limit must lie in (0, 1]");
  try {
    s.flow.validate();
    s.material.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }

  const Index nel = s.nelx * s.nely;
  const Index nno = (s.nelx + 1) * (s.nely + 1);
  if (s.pressure_bcs.empty()) fail("no prescribed pressure nodes");
  for (std::size_t k = 0; k < s.pressure_bcs.size(); ++k) {
    const auto& bc = s.pressure_bcs[k];
    if (bc.node < 0 || bc.node >= nno) fail("pressure node " + std::to_string(bc.node) + " out of range");
    if (k > 0 && bc.node <= s.pressure_bcs[k - 1].node) fail("pressure nodes must be sorted and unique");
    if (bc.value != 0.0 && bc.value != s.flow.Pin) {
      fail("prescribed pressures must be 0 or Pin, got " + std::to_string(bc.value));
    }
  }
  for (std::size_t k = 0; k < s.fixed_u_dofs.size(); ++k) {
    const Index d = s.fixed_u_dofs[k];
    if (d < 0 || d >= 2 * nno) fail("fixed DOF " + std::to_string(d) + " out of range");
    if (k > 0 && d <= s.fixed_u_dofs[k - 1]) fail("fixed DOFs must be sorted and unique");
  }
  GridMesh g;
  g.nelx = s.nelx;
  g.nely = s.nely;
  g.nel = nel;
  g.nno = nno;
  if (!removes_rigid_body_modes(g, s.fixed_u_dofs)) {
    fail("displacement supports do not prevent rigid-body motion");
  }
  ActiveSets expected;
  try {
    expected = make_active_sets(g, s.sets.nds, s.sets.ndv);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (expected != s.sets) fail("active sets are not the sorted complement of the non-design regions");
  if (s.sets.act.empty()) fail("no design elements");
}

// ---- benchmark registry --------------------------------------------------------

ProblemSpec make_arch(Index nelx, Index nely, ArchSides sides) {
  ProblemSpec s = base_spec("arch", nelx, nely, 0.30, 3.0, 2.4, 0.2, 8.0, 1, 100);
  const Mesh mesh = build_mesh(nelx, nely);
  const DofMaps& d = mesh.dofs;
  PressureTable p;
  p.set(d.top_nodes, 0.0);
  if (sides == ArchSides::zero_pressure) {
    p.set(d.left_nodes, 0.0);
    p.set(d.right_nodes, 0.0);
  }
  p.set(d.bottom_nodes, s.flow.Pin);
  s.pressure_bcs = p.bcs();
  s.fixed_u_dofs = sorted_unique(both_dofs({d.left_nodes.back(), d.right_nodes.back()}));
  s.sets = make_active_sets(mesh.grid, {}, {});
  return s;
}

ProblemSpec make_piston(Index nelx, Index nely) {
  ProblemSpec s = base_spec("piston", nelx, nely, 0.20, 3.0, 2.4, 0.1, 8.0, 1, 150);
  const Mesh mesh = build_mesh(nelx, nely);
  const DofMaps& d = mesh.dofs;
  PressureTable p;
  p.set(d.bottom_nodes, 0.0);
  p.set(d.top_nodes, s.flow.Pin);
  s.pressure_bcs = p.bcs();

  // Bottom node at 0-based position ceil((nelx + 1) / 2) along the edge.
  const Index pin = d.bottom_nodes[static_cast<std::size_t>((nelx + 2) / 2)];
  std::vector<Index> fixed = {2 * pin, 2 * pin + 1};
  for (Index n : d.left_nodes) fixed.push_back(2 * n);
  for (Index n : d.right_nodes) fixed.push_back(2 * n);
  s.fixed_u_dofs = sorted_unique(std::move(fixed));
  s.sets = make_active_sets(mesh.grid, {}, {});
  return s;
}

ProblemSpec make_chamber(Index nelx, Index nely) {
  ProblemSpec s = base_spec("chamber", nelx, nely, 0.20, 3.0, 6.0, 0.1, 10.0, 1, 200);
  const Mesh mesh = build_mesh(nelx, nely);
  const GridMesh& g = mesh.grid;
  const DofMaps& d = mesh.dofs;

  // Half-open [start, end) row / column ranges from floor-divided fractions.
  const Index wall = 2 * nelx / 3;
  auto s1 = element_block(g, 3 * nely / 8, 17 * nely / 40, wall, nelx);
  auto s2 = element_block(g, 23 * nely / 40, 5 * nely / 8, wall, nelx);
  auto v1 = element_block(g, 17 * nely / 40, nely, 7 * nelx / 15, 8 * nelx / 15);
  auto v2 = element_block(g, 17 * nely / 40, 23 * nely / 40, 8 * nelx / 15, nelx);
  std::vector<Index> nds = s1;
  nds.insert(nds.end(), s2.begin(), s2.end());
  std::vector<Index> ndv = v1;
  ndv.insert(ndv.end(), v2.begin(), v2.end());
  s.sets = make_active_sets(g, nds, ndv);

  auto wall_fix = element_block(g, 3 * nely / 8, 17 * nely / 40, nelx - 1, nelx);
  const auto s2fix = element_block(g, 23 * nely / 40, 25 * nely / 40, nelx - 1, nelx);
  wall_fix.insert(wall_fix.end(), s2fix.begin(), s2fix.end());
  const auto fixx = element_nodes(d, wall_fix);

  PressureTable p;
  p.set(d.top_nodes, 0.0);
  p.set(d.left_nodes, 0.0);
  p.set(d.right_nodes, 0.0);
  p.set(element_nodes(d, s.sets.ndv), s.flow.Pin);
  p.set(d.bottom_nodes, s.flow.Pin);
  s.pressure_bcs = p.bcs();

  std::vector<Index> fixed = both_dofs({d.bottom_nodes.front(), d.bottom_nodes.back()});
  const auto wall_dofs = both_dofs(fixx);
  fixed.insert(fixed.end(), wall_dofs.begin(), wall_dofs.end());
  s.fixed_u_dofs = sorted_unique(std::move(fixed));
  return s;
}

std::vector<std::string> problem_names() { return {"arch", "piston", "chamber"}; }

ProblemSpec make_named(const std::string& name, Index nelx, Index nely) {
  const bool sized = nelx > 0 && nely > 0;
  if (name == "arch") return sized ? make_arch(nelx, nely) : make_arch();
  if (name == "piston") return sized ? make_piston(nelx, nely) : make_piston();
  if (name == "chamber") return sized ? make_chamber(nelx, nely) : make_chamber();
  std::string list;
  for (const auto& n : problem_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown problem '" + name + "' (available: " + list + ", custom)");
}

// ---- configuration files -------------------------------------------------------

ProblemSpec build_custom(const json& cfg) {
  if (!cfg.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, value] : cfg.items()) {
    if (!known_keys().count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }

  ProblemSpec s;
  s.name = "custom";
  get_optional(cfg, "name", s.name);
  s.nelx = get_required<Index>(cfg, "nelx");
  s.nely = get_required<Index>(cfg, "nely");
  if (s.nelx < 1 || s.nely < 1) throw ConfigError("config: nelx and nely must be positive");
  s.volfrac = get_required<double>(cfg, "volfrac");
  s.material.penal = get_required<double>(cfg, "penal");
  s.rmin = get_required<double>(cfg, "rmin");
  s.flow.etaf = get_required<double>(cfg, "etaf");
  s.flow.betaf = get_required<double>(cfg, "betaf");
  s.lst = get_required<int>(cfg, "lst");
  s.maxit = get_required<int>(cfg, "maxit");
  get_optional(cfg, "move_limit", s.move_limit);
  get_optional(cfg, "E0", s.material.E0);
  get_optional(cfg, "Emin", s.material.Emin);
  get_optional(cfg, "nu", s.material.nu);
  get_optional(cfg, "Kv", s.flow.Kv);
  get_optional(cfg, "epsf", s.flow.epsf);
  get_optional(cfg, "r", s.flow.r);
  get_optional(cfg, "Dels", s.flow.Dels);
  get_optional(cfg, "Pin", s.flow.Pin);

  const Mesh mesh = build_mesh(s.nelx, s.nely);

  std::vector<Index> nds, ndv;
  if (cfg.contains("nds")) nds = index_list(cfg["nds"], "'nds'");
  if (cfg.contains("ndv")) ndv = index_list(cfg["ndv"], "'ndv'");
  if (cfg.contains("nds_regions")) {
    const auto r = parse_regions(cfg["nds_regions"], mesh.grid, "'nds_regions'");
    nds.insert(nds.end(), r.begin(), r.end());
  }
  if (cfg.contains("ndv_regions")) {
    const auto r = parse_regions(cfg["ndv_regions"], mesh.grid, "'ndv_regions'");
    ndv.insert(ndv.end(), r.begin(), r.end());
  }
  try {
    s.sets = make_active_sets(mesh.grid, nds, ndv);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  const json pressure = cfg.value("pressure", json::array());
  if (!pressure.is_array()) throw ConfigError("config: 'pressure' must be an array");
  PressureTable table;
  for (const auto& entry : pressure) {
    if (!entry.is_object() || !entry.contains("value")) {
      throw ConfigError("config: each pressure entry needs a node selection and a 'value'");
    }
    double value = 0.0;
    const auto& v = entry["value"];
    if (v.is_string() && v.get<std::string>() == "Pin") value = s.flow.Pin;
    else if (v.is_number()) value = v.get<double>();
    else throw ConfigError("config: pressure value must be a number or \"Pin\"");
    table.set(select_nodes(entry, mesh, s.sets), value);
  }
  s.pressure_bcs = table.bcs();

  std::vector<Index> fixed;
  if (cfg.contains("fixed_dofs")) fixed = index_list(cfg["fixed_dofs"], "'fixed_dofs'");
  if (cfg.contains("supports")) {
    if (!cfg["supports"].is_array()) throw ConfigError("config: 'supports' must be an array");
    for (const auto& entry : cfg["supports"]) {
      if (!entry.is_object()) throw ConfigError("config: support entries must be objects");
      const std::string dofs = entry.value("dofs", std::string("xy"));
      if (dofs != "x" && dofs != "y" && dofs != "xy") {
        throw ConfigError("config: support 'dofs' must be x, y or xy");
      }
      for (Index n : select_nodes(entry, mesh, s.sets)) {
        if (dofs.find('x') != std::string::npos) fixed.push_back(2 * n);
        if (dofs.find('y') != std::string::npos) fixed.push_back(2 * n + 1);
      }
    }
  }
  s.fixed_u_dofs = sorted_unique(std::move(fixed));

  validate(s);
  return s;
}

json to_config(const ProblemSpec& s) {
  json cfg;
  cfg["name"] = s.name;
  cfg["nelx"] = s.nelx;
  cfg["nely"] = s.nely;
  cfg["volfrac"] = s.volfrac;
  cfg["penal"] = s.material.penal;
  cfg["rmin"] = s.rmin;
  cfg["etaf"] = s.flow.etaf;
  cfg["betaf"] = s.flow.betaf;
  cfg["lst"] = s.lst;
  cfg["maxit"] = s.maxit;
  cfg["move_limit"] = s.move_limit;
  cfg["E0"] = s.material.E0;
  cfg["Emin"] = s.material.Emin;
  cfg["nu"] = s.material.nu;
  cfg["Kv"] = s.flow.Kv;
  cfg["epsf"] = s.flow.epsf;
  cfg["r"] = s.flow.r;
  cfg["Dels"] = s.flow.Dels;
  cfg["Pin"] = s.flow.Pin;

  std::map<double, std::vector<Index>> by_value;
  for (const auto& bc : s.pressure_bcs) by_value[bc.value].push_back(bc.node);
  json pressure = json::array();
  for (const auto& [value, nodes] : by_value) {
    // Pin is written symbolically so a later Pin override carries over.
    const json v = (value != 0.0 && value == s.flow.Pin) ? json("Pin") : json(value);
    pressure.push_back({{"nodes", nodes}, {"value", v}});
  }
  cfg["pressure"] = pressure;
  cfg["fixed_dofs"] = s.fixed_u_dofs;
  cfg["nds"] = s.sets.nds;
  cfg["ndv"] = s.sets.ndv;
  return cfg;
}

}  // namespace presstop
