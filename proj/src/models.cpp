#include <cmath>
#include <map>

#include "adq/symbols.hpp"

namespace adq {

namespace {

// {0, +e1, -e1, +e2, -e2, ...}
std::vector<IVector> nearest_support(int d) {
  std::vector<IVector> s{IVector::Zero(d)};
  for (int j = 0; j < d; ++j) {
    s.push_back(IVector::Unit(d, j));
    s.push_back(-IVector::Unit(d, j));
  }
  return s;
}

inline int plus(int j) { return 1 + 2 * j; }
inline int minus(int j) { return 2 + 2 * j; }

SpacePtr point_space(int d) {
  SpaceParams p;
  p.d = d;
  return builtin_space(SpaceKind::point, p);
}

std::vector<int> all_cells(const ConfigSpace& sp) {
  std::vector<int> c;
  for (auto& cell : sp.cells) c.push_back(cell.id);
  return c;
}

double weight(double u) { return 1.0 - 0.5 * u; }

using Coeffs = std::vector<CMatrix>;

Coeffs coons(const Coeffs& ea, const Coeffs& eb, const Coeffs& bulk, const Coeffs& far, double ua,
             double ub) {
  double wa = weight(ua), wb = weight(ub);
  Coeffs out(bulk.size());
  for (std::size_t q = 0; q < bulk.size(); ++q)
    out[q] = far[q] + (ea[q] - far[q]) * wb + (eb[q] - far[q]) * wa - (bulk[q] - far[q]) * wa * wb;
  return out;
}

}  // namespace

Symbol model_constant(const CMatrix& h, int d) {
  Symbol S;
  S.name = "constant";
  S.N = static_cast<int>(h.rows());
  S.d = d;
  S.space = point_space(d);
  S.support = {IVector::Zero(d)};
  S.coeffs = [h](const ConfigPoint&) { return Coeffs{h}; };
  S.cells = {0};
  return S;
}

Symbol model_qwz(double m) {
  if (m == 0.0 || std::abs(m) == 2.0) throw SymbolError("model_qwz: critical mass");
  Symbol S;
  S.name = "qwz";
  S.N = 2;
  S.d = 2;
  S.space = point_space(2);
  S.support = nearest_support(2);
  Coeffs f(5);
  f[0] = m * pauli(3);
  f[plus(0)] = 0.5 * (pauli(3) - I * pauli(1));
  f[minus(0)] = 0.5 * (pauli(3) + I * pauli(1));
  f[plus(1)] = 0.5 * (pauli(3) - I * pauli(2));
  f[minus(1)] = 0.5 * (pauli(3) + I * pauli(2));
  S.coeffs = [f](const ConfigPoint&) { return f; };
  S.cells = {0};
  return S;
}

Symbol model_interface(const Symbol& plus_s, const Symbol& minus_s, const RVector& lambda) {
  if (plus_s.N != minus_s.N || plus_s.d != minus_s.d)
    throw SymbolError("model_interface: dimension mismatch");
  Symbol S;
  S.name = "interface";
  S.N = plus_s.N;
  S.d = plus_s.d;
  SpaceParams p;
  p.d = S.d;
  p.lambdas = {lambda};
  S.space = builtin_space(SpaceKind::interface, p);

  std::map<std::vector<int>, int> index;
  auto key = [](const IVector& q) { return std::vector<int>(q.data(), q.data() + q.size()); };
  for (auto* src : {&plus_s, &minus_s})
    for (auto& q : src->support)
      if (!index.count(key(q))) {
        index[key(q)] = static_cast<int>(S.support.size());
        S.support.push_back(q);
      }
  auto embed = [&](const Symbol& src) {
    Coeffs c(S.support.size(), CMatrix::Zero(S.N, S.N));
    auto f = src.coeffs(ConfigPoint{0, RVector(0)});
    for (std::size_t i = 0; i < src.support.size(); ++i) c[index[key(src.support[i])]] = f[i];
    return c;
  };
  Coeffs fp = embed(plus_s), fm = embed(minus_s);
  int cell_plus = S.space->cell_id("+inf"), cell_minus = S.space->cell_id("-inf");
  Profile prof = S.profile;
  S.coeffs = [=](const ConfigPoint& w) {
    if (w.cell == cell_plus) return fp;
    if (w.cell == cell_minus) return fm;
    double f = 0.5 * prof.u_of_y(w.y[0]);
    Coeffs c(fp.size());
    for (std::size_t i = 0; i < fp.size(); ++i) c[i] = f * fm[i] + (1.0 - f) * fp[i];
    return c;
  };
  S.cells = all_cells(*S.space);
  if (plus_s.J && minus_s.J && max_abs(*plus_s.J - *minus_s.J) == 0.0) S.J = plus_s.J;
  return S;
}

namespace corner {

CMatrix gamma_a() { return kron(pauli(1), pauli(1)); }
CMatrix gamma_b() { return kron(pauli(1), pauli(3)); }
CMatrix gamma_c() { return kron(pauli(1), pauli(2)); }
CMatrix gamma_d() { return kron(pauli(2), pauli(0)); }
CMatrix chiral() { return kron(pauli(3), pauli(0)); }

CMatrix mirror() {
  CMatrix M = CMatrix::Zero(4, 4);
  M.block(0, 0, 2, 2) = pauli(1);
  M.block(2, 2, 2, 2) = pauli(3);
  return M;
}

CMatrix endpoint() {
  CMatrix S = CMatrix::Zero(4, 4);
  CMatrix A = pauli(1) + pauli(3);
  S.block(2, 0, 2, 2) = A;
  S.block(0, 2, 2, 2) = A.adjoint();
  return S;
}

CMatrix bulk(double mu, double k1, double k2) {
  return (1 + mu * std::cos(k1)) * gamma_a() + (1 + mu * std::cos(k2)) * gamma_b() -
         mu * std::sin(k1) * gamma_c() + mu * std::sin(k2) * gamma_d();
}

}  // namespace corner

Symbol model_corner_quarter(double mu, double ell) {
  if (!(mu > 1.0)) throw SymbolError("model_corner_quarter: requires mu > 1");
  using namespace corner;
  Symbol S;
  S.name = "corner_quarter";
  S.N = 4;
  S.d = 2;
  SpaceParams p;
  p.d = 2;
  p.lambdas = {RVector::Unit(2, 0), RVector::Unit(2, 1)};
  S.space = builtin_space(SpaceKind::quarter, p);
  S.profile.ell = ell;
  S.support = nearest_support(2);

  Coeffs fb(5);
  fb[0] = gamma_a() + gamma_b();
  fb[plus(0)] = 0.5 * mu * gamma_a() + 0.5 * I * mu * gamma_c();
  fb[minus(0)] = 0.5 * mu * gamma_a() - 0.5 * I * mu * gamma_c();
  fb[plus(1)] = 0.5 * mu * gamma_b() - 0.5 * I * mu * gamma_d();
  fb[minus(1)] = 0.5 * mu * gamma_b() + 0.5 * I * mu * gamma_d();

  // Scalar path from S(0) = gamma_b to S(1) through chiral invertible
  // matrices: lower-left block exp(t L) B0 with exp(L) B0 = sigma1 + sigma3.
  const CMatrix S0 = gamma_b();
  const CMatrix B0 = S0.block(2, 0, 2, 2);
  const CMatrix A = pauli(1) + pauli(3);
  const CMatrix L = matrix_log_gl(A * B0.inverse());
  auto spath = [L, B0](double t) {
    CMatrix S = CMatrix::Zero(4, 4);
    CMatrix B = matrix_exp(t * L) * B0;
    S.block(2, 0, 2, 2) = B;
    S.block(0, 2, 2, 2) = B.adjoint();
    return S;
  };
  const CMatrix S1 = spath(1.0);
  const CMatrix Mm = mirror();

  auto e1 = [=](double u) {
    Coeffs c(5, CMatrix::Zero(4, 4));
    if (u <= 1.0) {
      for (int q = 0; q < 5; ++q) c[q] = (1.0 - u) * fb[q];
      c[0] += u * S0;
    } else {
      c[0] = spath(std::min(u - 1.0, 1.0));
    }
    return c;
  };
  // Mirror image: q = (q1,q2) -> (q2,q1) and conjugation by M.
  static const int swap_q[5] = {0, plus(1), minus(1), plus(0), minus(0)};
  auto e2 = [=](double u) {
    Coeffs a = e1(u), c(5);
    for (int q = 0; q < 5; ++q) c[q] = Mm * a[swap_q[q]] * Mm.adjoint();
    return c;
  };
  Coeffs far(5, CMatrix::Zero(4, 4));
  far[0] = S1;

  const int c_plus = S.space->cell_id("+inf"), c_minus = S.space->cell_id("-inf");
  const int r1 = S.space->cell_id("R1"), r2 = S.space->cell_id("R2"), r12 = S.space->cell_id("R12");
  const Profile prof = S.profile;
  S.coeffs = [=](const ConfigPoint& w) -> Coeffs {
    if (w.cell == c_plus) return fb;
    if (w.cell == c_minus) return far;
    if (w.cell == r1) return e1(prof.u_of_y(w.y[0]));
    if (w.cell == r2) return e2(prof.u_of_y(w.y[0]));
    if (w.cell == r12) {
      double u1 = prof.u_of_y(w.y[0]), u2 = prof.u_of_y(w.y[1]);
      return coons(e1(u1), e2(u2), fb, far, u1, u2);
    }
    throw SymbolError("corner symbol: unknown cell");
  };
  S.cells = all_cells(*S.space);
  S.J = chiral();
  SpatialSymmetry m;
  m.U = Mm;
  m.point_map = [=](const ConfigPoint& w) -> ConfigPoint {
    if (w.cell == r1) return {r2, w.y};
    if (w.cell == r2) return {r1, w.y};
    if (w.cell == r12) {
      RVector y(2);
      y << w.y[1], w.y[0];
      return {r12, y};
    }
    return w;
  };
  S.mirror = m;
  return S;
}

namespace hinge {

CMatrix gamma(int i) {
  switch (i) {
    case 0: return kron(pauli(0), pauli(3));
    case 1: return kron(pauli(3), pauli(1));
    case 2: return kron(pauli(0), pauli(2));
    case 3: return kron(pauli(2), pauli(1));
    default: throw SymbolError("hinge::gamma index out of range");
  }
}

CMatrix mass() { return kron(pauli(1), pauli(1)); }

CMatrix bulk(const RVector& k) {
  CMatrix H = (2.0 + std::cos(k[0]) + std::cos(k[1]) + std::cos(k[2])) * gamma(0);
  for (int i = 0; i < 3; ++i) H += std::sin(k[i]) * gamma(i + 1);
  return H;
}

}  // namespace hinge

Symbol model_hinge_square(double mu, const std::vector<int>& signs, bool inversion, double ell) {
  if (mu == 0.0) throw SymbolError("model_hinge_square: mu must be nonzero");
  if (signs.size() != 4) throw SymbolError("model_hinge_square: four signs required");
  for (int s : signs)
    if (s != 1 && s != -1) throw SymbolError("model_hinge_square: signs must be +1 or -1");
  if (inversion)
    for (int a = 0; a < 2; ++a)
      if (signs[a] != -signs[a + 2])
        throw SymbolError("model_hinge_square: inversion requires s_a = -s_{a+2}");
  using namespace hinge;
  Symbol S;
  S.name = "hinge_square";
  S.N = 4;
  S.d = 3;
  SpaceParams p;
  p.d = 3;
  p.lambdas = {RVector::Unit(3, 0), RVector::Unit(3, 1), -RVector::Unit(3, 0), -RVector::Unit(3, 1)};
  S.space = builtin_space(SpaceKind::infinite_square, p);
  S.profile.ell = ell;
  S.support = nearest_support(3);

  const CMatrix G0 = gamma(0), MM = mass();
  Coeffs fb(7);
  fb[0] = 2.0 * G0;
  for (int j = 0; j < 3; ++j) {
    fb[plus(j)] = 0.5 * (G0 - I * gamma(j + 1));
    fb[minus(j)] = 0.5 * (G0 + I * gamma(j + 1));
  }
  auto edge = [=](double u, int s) {
    Coeffs c(7);
    if (u <= 1.0) {
      c[0] = 2.0 * G0 + 2.0 * mu * u * (1.0 - u) * s * MM;
      for (int j = 0; j < 3; ++j) {
        c[plus(j)] = 0.5 * (1.0 - u) * G0 - 0.5 * I * gamma(j + 1);
        c[minus(j)] = 0.5 * (1.0 - u) * G0 + 0.5 * I * gamma(j + 1);
      }
    } else {
      double v = std::min(u, 2.0);
      c[0] = (2.0 - v) * 2.0 * G0 + (v - 1.0) * G0;
      for (int j = 0; j < 3; ++j) {
        c[plus(j)] = -(2.0 - v) * 0.5 * I * gamma(j + 1);
        c[minus(j)] = (2.0 - v) * 0.5 * I * gamma(j + 1);
      }
    }
    return c;
  };
  Coeffs far(7, CMatrix::Zero(4, 4));
  far[0] = G0;

  const int c_plus = S.space->cell_id("+inf"), c_minus = S.space->cell_id("-inf");
  const int r0 = S.space->cell_id("R1"), q0 = S.space->cell_id("R12");
  const Profile prof = S.profile;
  const std::vector<int> sg = signs;
  S.coeffs = [=](const ConfigPoint& w) -> Coeffs {
    if (w.cell == c_plus) return fb;
    if (w.cell == c_minus) return far;
    if (w.cell >= r0 && w.cell < r0 + 4) return edge(prof.u_of_y(w.y[0]), sg[w.cell - r0]);
    if (w.cell >= q0 && w.cell < q0 + 4) {
      int a = w.cell - q0, b = (a + 1) % 4;
      double ua = prof.u_of_y(w.y[0]), ub = prof.u_of_y(w.y[1]);
      return coons(edge(ua, sg[a]), edge(ub, sg[b]), fb, far, ua, ub);
    }
    throw SymbolError("hinge symbol: unknown cell");
  };
  S.cells = all_cells(*S.space);
  SpatialSymmetry inv;
  inv.U = G0;
  inv.point_map = [=](const ConfigPoint& w) -> ConfigPoint {
    if (w.cell >= r0 && w.cell < r0 + 4) return {r0 + (w.cell - r0 + 2) % 4, w.y};
    if (w.cell >= q0 && w.cell < q0 + 4) return {q0 + (w.cell - q0 + 2) % 4, w.y};
    return w;
  };
  S.inversion = inv;
  return S;
}

Symbol model_dirac_defect(int d, int n, double ell) {
  if (!((d == 1 && n == 1) || (d == 2 && n == 2)))
    throw SymbolError("model_dirac_defect: supported (d,n) are (1,1) and (2,2)");
  const int p = d + n;
  auto gam = clifford_generators(p + 1);
  Symbol S;
  S.name = "dirac_defect";
  S.N = static_cast<int>(gam[0].rows());
  S.d = d;
  SpaceParams sp;
  sp.d = d;
  sp.disk_dim = n;
  for (int i = 0; i < n; ++i) sp.lambdas.push_back(RVector::Unit(d, i));
  S.space = builtin_space(SpaceKind::disk, sp);
  S.profile.ell = ell;
  S.support = nearest_support(d);
  const int nq = static_cast<int>(S.support.size());
  S.J = gam[p];

  // Components F_i(k, direction) as Fourier coefficient rows, and the center
  // value c.
  using Field = std::vector<std::vector<cplx>>;  // [component][q]
  auto zero_field = [=]() { return Field(p, std::vector<cplx>(nq, 0.0)); };
  std::vector<double> center(p, 0.0);
  std::function<Field(const RVector&)> sphere_field;
  if (d == 1) {
    center[0] = 1.0;
    sphere_field = [=](const RVector& dir) {
      Field F = zero_field();
      if (dir[0] > 0) {
        F[0][plus(0)] = F[0][minus(0)] = 0.5;  // cos k
        F[1][plus(0)] = -0.5 * I;              // sin k
        F[1][minus(0)] = 0.5 * I;
      } else {
        F[0][0] = 1.0;
      }
      return F;
    };
  } else {
    const double m = -2.0;
    center[3] = -1.0;
    sphere_field = [=](const RVector& dir) {
      Field F = zero_field();
      for (int j = 0; j < 2; ++j) {
        F[j][plus(j)] = -0.5 * I;
        F[j][minus(j)] = 0.5 * I;
        F[3][plus(j)] = F[3][minus(j)] = 0.5;
      }
      F[2][0] = dir[1];
      F[3][0] = m + dir[0];
      return F;
    };
  }
  auto assemble = [=](const Field& F, double rho) {
    Coeffs c(nq, CMatrix::Zero(S.N, S.N));
    for (int i = 0; i < p; ++i) {
      for (int q = 0; q < nq; ++q) c[q] += rho * F[i][q] * gam[i];
      c[0] += (1.0 - rho) * center[i] * gam[i];
    }
    return c;
  };
  const int disk = S.space->cell_id("D"), sph = S.space->cell_id("S");
  const Profile prof = S.profile;
  S.coeffs = [=](const ConfigPoint& w) -> Coeffs {
    if (w.cell == sph) return assemble(sphere_field(w.y), 1.0);
    if (w.cell == disk) {
      double r = w.y.norm();
      if (r == 0.0) return assemble(zero_field(), 0.0);
      return assemble(sphere_field(w.y / r), std::tanh(r / prof.ell));
    }
    throw SymbolError("dirac symbol: unknown cell");
  };
  S.cells = all_cells(*S.space);
  return S;
}

}  // namespace adq
