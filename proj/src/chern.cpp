#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "adq/invariants.hpp"

namespace adq {

long Mesh::points() const {
  long n = 1;
  for (auto& f : factors) n *= f.resolution;
  return n;
}

Mesh Mesh::halved() const {
  Mesh m = *this;
  for (auto& f : m.factors)
    f.resolution = f.kind == FactorKind::segment ? (f.resolution - 1) / 2 + 1 : f.resolution / 2;
  return m;
}

std::string Mesh::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) os << " x ";
    const auto& f = factors[i];
    os << (f.kind == FactorKind::torus ? "T" : f.kind == FactorKind::loop ? "loop" : "seg") << "["
       << f.resolution << (f.deriv == DerivKind::spectral ? ",spectral" : ",fd") << "]";
  }
  os << " orientation " << (orientation >= 0 ? "+" : "-");
  return os.str();
}

cplx even_constant(int m) {
  switch (m) {
    case 0: return 1.0;
    case 2: return 1.0 / (-2.0 * kPi * I);
    case 4: return 1.0 / (2.0 * std::pow(-2.0 * kPi * I, 2));
    default: throw InvariantError("even pairing requires m in {0,2,4}");
  }
}

cplx odd_constant(int m) {
  switch (m) {
    case 1: return -I / (2.0 * kPi);
    case 3: return 1.0 / (24.0 * kPi * kPi);
    default: throw InvariantError("odd pairing requires m in {1,3}");
  }
}

namespace {

struct Perm {
  std::vector<int> p;
  int sign;
};

std::vector<Perm> permutations(int m) {
  std::vector<int> p(m);
  std::iota(p.begin(), p.end(), 0);
  std::vector<Perm> out;
  do {
    int inv = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (p[i] > p[j]) ++inv;
    out.push_back({p, inv % 2 ? -1 : 1});
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Trigonometric differentiation matrix on n equispaced points of a period L.
RMatrix spectral_matrix(int n, double L) {
  RMatrix D = RMatrix::Zero(n, n);
  const double h = 2 * kPi / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double x = (i - j) * h / 2;
      double s = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = 0.5 * s * (n % 2 == 0 ? 1.0 / std::tan(x) : 1.0 / std::sin(x));
    }
  return D * (2 * kPi / L);
}

class Grid {
 public:
  explicit Grid(const Mesh& m) : mesh_(m) {
    for (auto& f : m.factors) {
      if (f.resolution < 8) throw InvariantError("mesh factor resolution must be >= 8");
      if (f.length <= 0) throw InvariantError("mesh factor length must be positive");
    }
    int D = m.dim();
    stride_.assign(D, 1);
    for (int a = D - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * m.factors[a + 1].resolution;
    for (auto& f : m.factors)
      spec_.push_back(f.deriv == DerivKind::spectral && f.kind != FactorKind::segment
                          ? spectral_matrix(f.resolution, f.length)
                          : RMatrix());
  }

  long size() const { return mesh_.points(); }
  int index(long p, int a) const { return static_cast<int>((p / stride_[a]) % mesh_.factors[a].resolution); }

  double step(int a) const {
    const auto& f = mesh_.factors[a];
    return f.kind == FactorKind::segment ? f.length / (f.resolution - 1) : f.length / f.resolution;
  }

  RVector coords(long p) const {
    RVector x(mesh_.dim());
    for (int a = 0; a < mesh_.dim(); ++a) x[a] = index(p, a) * step(a);
    return x;
  }

  double weight(long p) const {
    double w = 1.0;
    for (int a = 0; a < mesh_.dim(); ++a) {
      const auto& f = mesh_.factors[a];
      double h = step(a);
      if (f.kind == FactorKind::segment) {
        int i = index(p, a);
        if (i == 0 || i == f.resolution - 1) h *= 0.5;
      }
      w *= h;
    }
    return w;
  }

  CMatrix derivative(const std::vector<CMatrix>& F, long p, int a) const {
    const auto& f = mesh_.factors[a];
    const int n = f.resolution;
    const int i = index(p, a);
    const long base = p - static_cast<long>(i) * stride_[a];
    auto at = [&](int j) -> const CMatrix& { return F[base + static_cast<long>(j) * stride_[a]]; };
    const double h = step(a);
    if (f.kind == FactorKind::segment) {
      if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2 * h);
      if (i == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2 * h);
      return (at(i + 1) - at(i - 1)) / (2 * h);
    }
    if (f.deriv == DerivKind::spectral) {
      CMatrix out = CMatrix::Zero(F[p].rows(), F[p].cols());
      for (int j = 0; j < n; ++j)
        if (j != i) out += spec_[a](i, j) * at(j);
      return out;
    }
    return (at((i + 1) % n) - at((i + n - 1) % n)) / (2 * h);
  }

 private:
  const Mesh& mesh_;
  std::vector<long> stride_;
  std::vector<RMatrix> spec_;
};

std::vector<CMatrix> sample(const Grid& g, const FieldFn& F, Exec exec) {
  std::vector<CMatrix> out(g.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long p = 0; p < g.size(); ++p) out[p] = F(g.coords(p));
  } else {
    for (long p = 0; p < g.size(); ++p) out[p] = F(g.coords(p));
  }
  return out;
}

cplx reduce(const std::vector<cplx>& v) {
  cplx s = 0.0;
  for (auto& x : v) s += x;
  return s;
}

cplx even_integral(const Mesh& mesh, const FieldFn& field, Exec exec) {
  const int m = mesh.dim();
  if (m % 2) throw InvariantError("chern_even: mesh dimension must be even");
  cplx c = even_constant(m);
  if (m == 0) {
    CMatrix P = field(RVector(0));
    return P.trace();
  }
  Grid g(mesh);
  auto P = sample(g, field, exec);
  for (auto& p : P)
    if (max_abs(p * p - p) > 1e-8 || hermiticity_defect(p) > 1e-8)
      throw InvariantError("chern_even: sample is not a projection");
  const auto perms = permutations(m);
  std::vector<cplx> local(g.size());
  auto body = [&](long p) {
    std::vector<CMatrix> d(m);
    for (int a = 0; a < m; ++a) d[a] = g.derivative(P, p, a);
    cplx acc = 0.0;
    for (auto& pr : perms) {
      CMatrix X = P[p];
      for (int a = 0; a < m; ++a) X = X * d[pr.p[a]];
      acc += static_cast<double>(pr.sign) * X.trace();
    }
    local[p] = acc * g.weight(p);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long p = 0; p < g.size(); ++p) body(p);
  } else {
    for (long p = 0; p < g.size(); ++p) body(p);
  }
  return c * reduce(local) * static_cast<double>(mesh.orientation);
}

cplx odd_integral(const Mesh& mesh, const FieldFn& field, Exec exec) {
  const int m = mesh.dim();
  if (m % 2 == 0) throw InvariantError("chern_odd: mesh dimension must be odd");
  cplx c = odd_constant(m);
  Grid g(mesh);
  auto X = sample(g, field, exec);
  std::vector<CMatrix> Xi(X.size());
  for (std::size_t p = 0; p < X.size(); ++p) {
    Eigen::JacobiSVD<CMatrix> svd(X[p]);
    if (svd.singularValues().minCoeff() < 1e-8) throw InvariantError("chern_odd: field is not invertible");
    Xi[p] = X[p].inverse();
  }
  const auto perms = permutations(m);
  std::vector<cplx> local(g.size());
  auto body = [&](long p) {
    cplx acc = 0.0;
    if (m == 1) {
      acc = (Xi[p] * g.derivative(X, p, 0)).trace();
    } else {
      std::vector<CMatrix> dx(m), dxi(m);
      for (int a = 0; a < m; ++a) {
        dx[a] = g.derivative(X, p, a);
        dxi[a] = g.derivative(Xi, p, a);
      }
      for (auto& pr : perms)
        acc += static_cast<double>(pr.sign) * (Xi[p] * dx[pr.p[0]] * dxi[pr.p[1]] * dx[pr.p[2]]).trace();
    }
    local[p] = acc * g.weight(p);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long p = 0; p < g.size(); ++p) body(p);
  } else {
    for (long p = 0; p < g.size(); ++p) body(p);
  }
  return c * reduce(local) * static_cast<double>(mesh.orientation);
}

ChernResult finish(const Mesh& mesh, cplx v, std::optional<cplx> half) {
  ChernResult r;
  r.value = v.real();
  r.imag_residual = std::abs(v.imag());
  r.mesh = mesh;
  r.rounded = std::lround(r.value);
  r.nearest_integer_distance = std::abs(r.value - static_cast<double>(r.rounded));
  r.refinement_delta = half ? std::abs(v.real() - half->real()) : 0.0;
  return r;
}

}  // namespace

ChernResult chern_even(const Mesh& mesh, const FieldFn& P, bool refine, Exec exec) {
  cplx v = even_integral(mesh, P, exec);
  std::optional<cplx> h;
  if (refine && mesh.dim() > 0) h = even_integral(mesh.halved(), P, exec);
  return finish(mesh, v, h);
}

ChernResult chern_odd(const Mesh& mesh, const FieldFn& x, bool refine, Exec exec) {
  cplx v = odd_integral(mesh, x, exec);
  std::optional<cplx> h;
  if (refine) h = odd_integral(mesh.halved(), x, exec);
  return finish(mesh, v, h);
}

int fhs_chern2d(const std::function<CMatrix(double, double)>& P, int n) {
  if (n < 4) throw InvariantError("fhs_chern2d: grid too coarse");
  std::vector<CMatrix> frame(n * n);
  int rank = -1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CMatrix p = P(2 * kPi * i / n, 2 * kPi * j / n);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(p);
      int r = 0;
      for (int e = 0; e < p.rows(); ++e)
        if (es.eigenvalues()[e] > 0.5) ++r;
      if (rank >= 0 && r != rank) throw InvariantError("fhs_chern2d: rank changes over the torus");
      rank = r;
      frame[i * n + j] = es.eigenvectors().rightCols(r);
    }
  if (rank == 0) return 0;
  auto link = [&](int i, int j, int di, int dj) {
    const CMatrix& a = frame[i * n + j];
    const CMatrix& b = frame[((i + di) % n) * n + (j + dj) % n];
    cplx z = (a.adjoint() * b).determinant();
    if (std::abs(z) < 1e-12) throw InvariantError("fhs_chern2d: singular link");
    return z / std::abs(z);
  };
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx w = link(i, j, 1, 0) * link((i + 1) % n, j, 0, 1) * std::conj(link(i, (j + 1) % n, 1, 0)) *
               std::conj(link(i, j, 0, 1));
      double F = std::arg(w);
      if (std::abs(F) > 0.9 * kPi) throw InvariantError("fhs_chern2d: plaquette flux near pi");
      total += F;
    }
  // Berry flux counts with the opposite sign to the c_2 normalization.
  return -static_cast<int>(std::lround(total / (2 * kPi)));
}

// ---- loop Chern numbers ---------------------------------------------------

namespace {

bool standard_grading(const CMatrix& J) {
  const int N = static_cast<int>(J.rows());
  if (N % 2) return false;
  CMatrix ref = CMatrix::Zero(N, N);
  for (int i = 0; i < N; ++i) ref(i, i) = i < N / 2 ? 1.0 : -1.0;
  return max_abs(J - ref) < 1e-14;
}

CMatrix field_of(const CMatrix& H, PairingClass cls, int N) {
  if (cls == PairingClass::even) return fermi_projection(H);
  return H.block(N / 2, 0, N / 2, N / 2);
}

CMatrix bloch(const std::vector<CMatrix>& f, const std::vector<IVector>& support, const RVector& k) {
  CMatrix H = CMatrix::Zero(f[0].rows(), f[0].cols());
  for (std::size_t q = 0; q < support.size(); ++q)
    H += f[q] * std::exp(I * k.dot(support[q].cast<double>()));
  return H;
}

struct Leg {
  int cell;
  bool forward;
  double frac;  // share of the leg's samples with u in [0,1]
};

ConfigPoint leg_point(const Symbol& S, const Leg& leg, double tau) {
  double tp = leg.forward ? tau : 1.0 - tau;
  double u = tp < leg.frac ? tp / leg.frac : 1.0 + (tp - leg.frac) / (1.0 - leg.frac);
  return S.chart_point(leg.cell, {u});
}

double piece_variation(const Symbol& S, int cell, double u0, double u1, PairingClass cls) {
  const int coarse = 4;
  long nk = 1;
  for (int j = 0; j < S.d; ++j) nk *= coarse;
  double tv = 0.0;
  const int steps = 16;
  std::vector<std::vector<CMatrix>> coeffs(steps + 1);
  for (int i = 0; i <= steps; ++i) coeffs[i] = S.coeffs(S.chart_point(cell, {u0 + (u1 - u0) * i / steps}));
  for (long idx = 0; idx < nk; ++idx) {
    RVector k(S.d);
    long r = idx;
    for (int j = 0; j < S.d; ++j) {
      k[j] = 2 * kPi * ((r % coarse) + 0.5) / coarse;
      r /= coarse;
    }
    CMatrix prev;
    for (int i = 0; i <= steps; ++i) {
      CMatrix F = field_of(bloch(coeffs[i], S.support, k), cls, S.N);
      if (i) tv += (F - prev).norm();
      prev = F;
    }
  }
  return tv;
}

double det_of(const std::vector<RVector>& kdirs, int d) {
  if (static_cast<int>(kdirs.size()) != d) throw InvariantError("loop_chern: one kdir per torus direction");
  RMatrix V(d, d);
  for (int i = 0; i < d; ++i) {
    if (kdirs[i].size() != d) throw InvariantError("loop_chern: kdir has wrong dimension");
    V.row(i) = kdirs[i].transpose();
  }
  return d == 0 ? 1.0 : V.determinant();
}

}  // namespace

ChernResult loop_chern(const Symbol& S, int cell, PairingClass cls, const std::vector<RVector>& kdirs,
                       const LoopChernOptions& opt) {
  const ConfigSpace& sp = *S.space;
  const Cell& c = sp.cell(cell);
  const int d = S.d;
  const double det = det_of(kdirs, d);
  if (cls == PairingClass::odd) {
    if (!S.J || !standard_grading(*S.J)) throw InvariantError("loop_chern: odd class needs J in standard grading");
  }
  auto run = [&](const Mesh& mesh, const FieldFn& F) {
    return cls == PairingClass::even ? chern_even(mesh, F, opt.refine, opt.exec)
                                     : chern_odd(mesh, F, opt.refine, opt.exec);
  };
  auto scaled = [&](ChernResult r, double s) {
    r.value *= s;
    r.rounded = std::lround(r.value);
    r.nearest_integer_distance = std::abs(r.value - static_cast<double>(r.rounded));
    return r;
  };
  Mesh torus;
  for (int j = 0; j < d; ++j) torus.factors.push_back(torus_factor(opt.torus_res, opt.torus_deriv));
  const double orient = opt.reverse ? -1.0 : 1.0;

  // Signed sum over a discrete boundary (S^0).
  auto point_sum = [&](const std::vector<std::pair<ConfigPoint, int>>& pts) {
    ChernResult total;
    total.mesh = torus;
    for (auto& [w, sign] : pts) {
      auto f = S.coeffs(w);
      FieldFn F = [&, f](const RVector& k) { return field_of(bloch(f, S.support, k), cls, S.N); };
      auto r = run(torus, F);
      total.value += sign * r.value;
      total.imag_residual += r.imag_residual;
      total.refinement_delta += r.refinement_delta;
    }
    return scaled(total, det * orient);
  };

  if (c.dim == 1 && sp.kind != SpaceKind::disk) {
    std::vector<std::pair<ConfigPoint, int>> pts;
    for (auto& tr : boundary_loop(sp, cell)) pts.push_back({ConfigPoint{tr.cell, RVector(0)}, tr.sign});
    return point_sum(pts);
  }

  // Closed loop parametrized by s in [0, length).
  std::function<ConfigPoint(double)> point;
  double length = 1.0;
  std::vector<Leg> legs;
  if (sp.kind == SpaceKind::disk) {
    const int sph = sp.cell_id("S");
    if (c.dim == 1) {
      RVector plus(1), minus(1);
      plus[0] = 1.0;
      minus[0] = -1.0;
      return point_sum({{ConfigPoint{sph, plus}, 1}, {ConfigPoint{sph, minus}, -1}});
    }
    if (c.dim != 2) throw InvariantError("loop_chern: disk boundary supported for n <= 2");
    length = 2 * kPi;
    point = [&S, sph](double s) { return S.chart_point(sph, {s}); };
  } else {
    if (c.dim != 2) throw InvariantError("loop_chern: cell must be a 1- or 2-cell");
    for (auto& tr : boundary_loop(sp, cell)) {
      Leg leg{tr.cell, tr.forward, 0.5};
      if (opt.adaptive) {
        double a = piece_variation(S, tr.cell, 0.0, 1.0, cls);
        double b = piece_variation(S, tr.cell, 1.0, 2.0, cls);
        leg.frac = a + b > 0 ? std::clamp(a / (a + b), 0.1, 0.9) : 0.5;
      }
      legs.push_back(leg);
    }
    length = static_cast<double>(legs.size());
    point = [&S, &legs](double s) {
      int i = std::min(static_cast<int>(std::floor(s)), static_cast<int>(legs.size()) - 1);
      return leg_point(S, legs[i], s - i);
    };
  }
  if (opt.reverse) {
    auto fwd = point;
    point = [fwd, length](double s) { return fwd(s == 0.0 ? 0.0 : length - s); };
  }

  Mesh mesh = torus;
  mesh.factors.push_back(loop_factor(opt.loop_res, length));
  // Coefficients for every loop sample of the full and halved meshes.
  std::map<long, std::vector<CMatrix>> cache;
  auto key = [](double s) { return std::lround(s * 1e9); };
  for (int res : {opt.loop_res, opt.loop_res / 2})
    for (int i = 0; i < res; ++i) {
      double s = length * i / res;
      if (!cache.count(key(s))) cache[key(s)] = S.coeffs(point(s));
    }
  FieldFn F = [&](const RVector& p) {
    auto it = cache.find(key(p[d]));
    std::vector<CMatrix> f = it != cache.end() ? it->second : S.coeffs(point(p[d]));
    return field_of(bloch(f, S.support, p.head(d)), cls, S.N);
  };
  auto r = run(mesh, F);
  r.mesh.orientation = opt.reverse ? -1 : 1;
  return scaled(r, det);
}

}  // namespace adq
