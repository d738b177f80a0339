#include "adq/configspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adq {

const Cell& ConfigSpace::cell(int id) const {
  if (id < 0 || id >= static_cast<int>(cells.size())) throw ConfigError("unknown cell id");
  return cells[id];
}

int ConfigSpace::cell_id(const std::string& label) const {
  for (auto& c : cells)
    if (c.label == label) return c.id;
  throw ConfigError("unknown cell label " + label);
}

std::vector<int> ConfigSpace::cells_up_to(int n) const {
  std::vector<int> out;
  for (auto& [dim, ids] : skeleton)
    if (dim <= n) out.insert(out.end(), ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

using I64Vec = std::vector<long long>;

long long ext_gcd(long long a, long long b, long long& x, long long& y) {
  if (b == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return std::llabs(a);
  }
  long long x1, y1;
  long long g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

int leading(const I64Vec& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0) return static_cast<int>(i);
  return -1;
}

void hnf_insert(std::vector<I64Vec>& basis, I64Vec v) {
  std::size_t i = 0;
  while (i < basis.size()) {
    int q = leading(v);
    if (q < 0) return;
    int p = leading(basis[i]);
    if (q < p) break;
    if (q == p) {
      long long x, y;
      long long a = basis[i][p], b = v[p];
      long long g = ext_gcd(a, b, x, y);
      I64Vec nb(v.size()), nv(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) {
        nb[j] = x * basis[i][j] + y * v[j];
        nv[j] = (a / g) * v[j] - (b / g) * basis[i][j];
      }
      if (nb[p] < 0)
        for (auto& e : nb) e = -e;
      basis[i] = nb;
      v = nv;
    }
    ++i;
  }
  if (leading(v) < 0) return;
  if (v[leading(v)] < 0)
    for (auto& e : v) e = -e;
  basis.insert(basis.begin() + static_cast<long>(i), v);
}

int matrix_rank(const RMatrix& A) {
  if (A.size() == 0) return 0;
  Eigen::FullPivLU<RMatrix> lu(A);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

Cell make_cell(int id, int dim, RMatrix Lambda, std::string label, int height) {
  Cell c;
  c.id = id;
  c.dim = dim;
  c.Lambda = std::move(Lambda);
  c.label = std::move(label);
  if (dim > 0) {
    if (matrix_rank(c.Lambda) != dim) throw ConfigError("degenerate Lambda for cell " + c.label);
    int d = static_cast<int>(c.Lambda.cols());
    c.rational = static_cast<int>(isotropy_lattice(c, height).size()) == d - dim;
  }
  return c;
}

RMatrix rows_of(const std::vector<RVector>& v) {
  RMatrix M(v.size(), v.empty() ? 0 : v[0].size());
  for (std::size_t i = 0; i < v.size(); ++i) M.row(static_cast<long>(i)) = v[i].transpose();
  return M;
}

}  // namespace

std::vector<IVector> lattice_basis(const std::vector<IVector>& generators, int d) {
  std::vector<I64Vec> basis;
  for (auto& g : generators) {
    I64Vec v(d);
    for (int j = 0; j < d; ++j) v[j] = g[j];
    hnf_insert(basis, v);
  }
  std::vector<IVector> out;
  for (auto& b : basis) {
    IVector v(d);
    for (int j = 0; j < d; ++j) v[j] = static_cast<int>(b[j]);
    out.push_back(v);
  }
  return out;
}

std::vector<IVector> isotropy_lattice(const Cell& cell, int height) {
  int d = static_cast<int>(cell.Lambda.cols());
  if (cell.dim == 0 || cell.kind == CellKind::sphere) {
    std::vector<IVector> out;
    for (int j = 0; j < d; ++j) out.push_back(IVector::Unit(d, j));
    return out;
  }
  double scale = cell.Lambda.cwiseAbs().maxCoeff();
  std::vector<IVector> found;
  IVector v = IVector::Constant(d, -height);
  while (true) {
    if (!v.isZero()) {
      RVector r = cell.Lambda * v.cast<double>();
      if (r.norm() <= 1e-9 * scale * v.cast<double>().norm()) found.push_back(v);
    }
    int j = 0;
    while (j < d && v[j] == height) v[j++] = -height;
    if (j == d) break;
    ++v[j];
  }
  return lattice_basis(found, d);
}

double covolume(const Cell& cell, int height) {
  if (cell.dim < 1) throw ConfigError("covolume requires n >= 1");
  int d = static_cast<int>(cell.Lambda.cols());
  auto K = isotropy_lattice(cell, height);
  if (static_cast<int>(K.size()) != d - cell.dim) throw ConfigError("covolume: irrational cell");
  if (K.empty()) return std::abs(cell.Lambda.determinant());
  RMatrix Km(K.size(), d);
  for (std::size_t i = 0; i < K.size(); ++i) Km.row(static_cast<long>(i)) = K[i].cast<double>().transpose();
  // Orthonormal complement of span(K).
  Eigen::JacobiSVD<RMatrix> svd(Km, Eigen::ComputeFullV);
  RMatrix Q = svd.matrixV().rightCols(cell.dim);
  double det = (cell.Lambda * Q).determinant();
  double volK = std::sqrt((Km * Km.transpose()).determinant());
  return std::abs(det) / volK;
}

std::vector<IVector> transverse_basis(const std::vector<IVector>& isotropy, int d) {
  int r = static_cast<int>(isotropy.size());
  int need = d - r;
  std::vector<IVector> cand;
  for (int j = 0; j < d; ++j) cand.push_back(IVector::Unit(d, j));
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      if (j != k)
        for (int s : {1, -1}) cand.push_back(IVector::Unit(d, j) + s * IVector::Unit(d, k));
  std::vector<int> pick(need);
  std::function<bool(int, int)> search = [&](int pos, int start) -> bool {
    if (pos == need) {
      Eigen::MatrixXd M(d, d);
      for (int i = 0; i < need; ++i) M.row(i) = cand[pick[i]].cast<double>().transpose();
      for (int i = 0; i < r; ++i) M.row(need + i) = isotropy[i].cast<double>().transpose();
      return std::abs(std::abs(M.determinant()) - 1.0) < 1e-9;
    }
    for (int c = start; c < static_cast<int>(cand.size()); ++c) {
      pick[pos] = c;
      if (search(pos + 1, c + 1)) return true;
    }
    return false;
  };
  if (!search(0, 0)) throw ConfigError("transverse_basis: no unimodular completion found");
  std::vector<IVector> out;
  for (int i = 0; i < need; ++i) out.push_back(cand[pick[i]]);
  return out;
}

SpacePtr builtin_space(SpaceKind kind, const SpaceParams& p) {
  auto S = std::make_shared<ConfigSpace>();
  S->kind = kind;
  S->d = p.d;
  auto lam = [&](std::size_t i) {
    if (i >= p.lambdas.size()) throw ConfigError("builtin_space: missing lambda vector");
    const RVector& v = p.lambdas[i];
    if (v.size() != p.d) throw ConfigError("builtin_space: lambda has wrong dimension");
    if (v.norm() == 0) throw ConfigError("builtin_space: zero lambda");
    return v;
  };
  auto zero_cells = [&](int& next) {
    S->cells.push_back(make_cell(next++, 0, RMatrix(0, p.d), "+inf", p.height));
    S->cells.push_back(make_cell(next++, 0, RMatrix(0, p.d), "-inf", p.height));
    S->skeleton[0] = {0, 1};
  };
  auto one_cell = [&](int& next, const RVector& l, const std::string& label) {
    int id = next++;
    S->cells.push_back(make_cell(id, 1, l.transpose(), label, p.height));
    S->skeleton[1].push_back(id);
    S->boundary[id] = {{0, true, 1}, {1, true, -1}};
    return id;
  };
  int next = 0;
  switch (kind) {
    case SpaceKind::point:
      S->cells.push_back(make_cell(next++, 0, RMatrix(0, p.d), "*", p.height));
      S->skeleton[0] = {0};
      break;
    case SpaceKind::interface:
      zero_cells(next);
      one_cell(next, lam(0), "R");
      break;
    case SpaceKind::disk: {
      int n = p.disk_dim;
      if (n < 1) throw ConfigError("disk: dimension must be >= 1");
      std::vector<RVector> rows;
      for (int i = 0; i < n; ++i) rows.push_back(lam(i));
      S->cells.push_back(make_cell(next++, n, rows_of(rows), "D", p.height));
      Cell sph;
      sph.id = next++;
      sph.dim = 0;
      sph.kind = CellKind::sphere;
      sph.Lambda = RMatrix(0, p.d);
      sph.label = "S";
      S->cells.push_back(sph);
      S->skeleton[0] = {1};
      S->skeleton[n] = {0};
      S->boundary[0] = {{1, true, 1}};
      break;
    }
    case SpaceKind::quarter: {
      zero_cells(next);
      int r1 = one_cell(next, lam(0), "R1");
      int r2 = one_cell(next, lam(1), "R2");
      int id = next++;
      S->cells.push_back(make_cell(id, 2, rows_of({lam(0), lam(1)}), "R12", p.height));
      S->skeleton[2] = {id};
      S->boundary[id] = {{r1, true, 1}, {r2, false, 1}};
      break;
    }
    case SpaceKind::infinite_square: {
      zero_cells(next);
      std::vector<int> r(4);
      for (int a = 0; a < 4; ++a) r[a] = one_cell(next, lam(a), "R" + std::to_string(a + 1));
      for (int a = 0; a < 4; ++a) {
        int b = (a + 1) % 4;
        int id = next++;
        S->cells.push_back(make_cell(id, 2, rows_of({lam(a), lam(b)}),
                                     "R" + std::to_string(a + 1) + std::to_string(b + 1), p.height));
        S->skeleton[2].push_back(id);
        S->boundary[id] = {{r[a], true, 1}, {r[b], false, 1}};
      }
      break;
    }
  }
  if (kind == SpaceKind::quarter || kind == SpaceKind::infinite_square)
    for (auto& c : S->cells)
      if (!c.rational) throw ConfigError("builtin_space: irrational cell " + c.label);
  return S;
}

ConfigPoint translate(const ConfigSpace& space, const ConfigPoint& w, const RVector& x) {
  const Cell& c = space.cell(w.cell);
  if (c.dim == 0 || c.kind == CellKind::sphere) return w;
  if (x.size() != space.d) throw ConfigError("translate: wrong vector dimension");
  return {w.cell, w.y + c.Lambda * x};
}

ConfigPoint scale(const ConfigSpace& space, const ConfigPoint& w, double t) {
  if (t <= 0) throw ConfigError("scale: t must be positive");
  const Cell& c = space.cell(w.cell);
  if (c.dim == 0 || c.kind == CellKind::sphere) return w;
  return {w.cell, t * w.y};
}

std::vector<Traversal> boundary_loop(const ConfigSpace& space, int cell) {
  const Cell& c = space.cell(cell);
  if (c.dim != 1 && c.dim != 2) throw ConfigError("boundary_loop: cell must have dimension 1 or 2");
  auto it = space.boundary.find(cell);
  if (it == space.boundary.end()) throw ConfigError("boundary_loop: missing boundary data");
  return it->second;
}

}  // namespace adq
