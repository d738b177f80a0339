#include "adq/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <omp.h>

namespace adq {

int Symbol::max_range() const {
  int r = 0;
  for (auto& q : support) r = std::max(r, q.cwiseAbs().maxCoeff());
  return r;
}

bool Symbol::has_cell(int c) const { return std::find(cells.begin(), cells.end(), c) != cells.end(); }

namespace {

int disk_dim(const ConfigSpace& sp) {
  for (auto& c : sp.cells)
    if (c.kind == CellKind::affine && c.dim > 0 && sp.kind == SpaceKind::disk) return c.dim;
  return 0;
}

RVector direction(int n, const std::vector<double>& u, std::size_t offset) {
  RVector v(n);
  if (n == 1) {
    v[0] = (u.size() > offset && u[offset] < 0) ? -1.0 : 1.0;
  } else if (n == 2) {
    double th = u.size() > offset ? u[offset] : 0.0;
    v << std::cos(th), std::sin(th);
  } else {
    double th = u.size() > offset ? u[offset] : 0.0;
    double ph = u.size() > offset + 1 ? u[offset + 1] : 0.0;
    v.setZero();
    v[0] = std::sin(th) * std::cos(ph);
    v[1] = std::sin(th) * std::sin(ph);
    v[2] = std::cos(th);
  }
  return v;
}

}  // namespace

ConfigPoint Symbol::chart_point(int cell, const std::vector<double>& u) const {
  const ConfigSpace& sp = *space;
  const Cell& c = sp.cell(cell);
  if (c.kind == CellKind::sphere) return {cell, direction(disk_dim(sp), u, 0)};
  if (c.dim == 0) return {cell, RVector(0)};
  if (sp.kind == SpaceKind::disk) {
    double r = u.empty() ? 0.0 : u[0];
    RVector dir = direction(c.dim, u, 1);
    if (r >= 1.0) return {sp.boundary.at(cell)[0].cell, dir};
    return {cell, dir * profile.ell * std::atanh(std::max(r, 0.0))};
  }
  if (c.dim == 1) {
    const auto& b = sp.boundary.at(cell);
    double v = u.at(0);
    if (v <= 0.0) return {b[0].cell, RVector(0)};
    if (v >= 2.0) return {b[1].cell, RVector(0)};
    RVector y(1);
    y[0] = profile.y_of_u(v);
    return {cell, y};
  }
  if (c.dim == 2) {
    const auto& b = sp.boundary.at(cell);
    int ra = b[0].cell, rb = b[1].cell;
    double ua = u.at(0), ub = u.at(1);
    if (ua >= 2.0 || ub >= 2.0) return {sp.boundary.at(ra)[1].cell, RVector(0)};
    if (ua <= 0.0 && ub <= 0.0) return {sp.boundary.at(ra)[0].cell, RVector(0)};
    if (ub <= 0.0) return chart_point(ra, {ua});
    if (ua <= 0.0) return chart_point(rb, {ub});
    RVector y(2);
    y << profile.y_of_u(ua), profile.y_of_u(ub);
    return {cell, y};
  }
  throw SymbolError("chart_point: unsupported cell");
}

CMatrix eval_symbol(const Symbol& S, const ConfigPoint& w, const RVector& k) {
  if (k.size() != S.d) throw SymbolError("eval_symbol: momentum has wrong dimension");
  auto f = S.coeffs(w);
  CMatrix H = CMatrix::Zero(S.N, S.N);
  for (std::size_t i = 0; i < S.support.size(); ++i) {
    double ph = k.dot(S.support[i].cast<double>());
    H += f[i] * std::exp(I * ph);
  }
  return H;
}

std::vector<ConfigPoint> cell_samples(const Symbol& S, int cell, int res) {
  const ConfigSpace& sp = *S.space;
  const Cell& c = sp.cell(cell);
  std::vector<ConfigPoint> out;
  auto grid = [&](int i) { return res > 1 ? 2.0 * i / (res - 1) : 1.0; };
  if (c.kind == CellKind::sphere) {
    int n = disk_dim(sp);
    if (n == 1) {
      out.push_back(S.chart_point(cell, {1.0}));
      out.push_back(S.chart_point(cell, {-1.0}));
    } else {
      for (int i = 0; i < res; ++i) out.push_back(S.chart_point(cell, {2 * kPi * i / res}));
    }
    return out;
  }
  if (c.dim == 0) return {S.chart_point(cell, {})};
  if (sp.kind == SpaceKind::disk) {
    for (int i = 0; i < res; ++i) {
      double r = res > 1 ? static_cast<double>(i) / (res - 1) : 0.0;
      if (c.dim == 1) {
        out.push_back(S.chart_point(cell, {r, 1.0}));
        out.push_back(S.chart_point(cell, {r, -1.0}));
      } else {
        for (int j = 0; j < res; ++j) out.push_back(S.chart_point(cell, {r, 2 * kPi * j / res}));
      }
    }
    return out;
  }
  if (c.dim == 1) {
    for (int i = 0; i < res; ++i) out.push_back(S.chart_point(cell, {grid(i)}));
    return out;
  }
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j) out.push_back(S.chart_point(cell, {grid(i), grid(j)}));
  return out;
}

namespace {

RVector k_point(long idx, int d, int k_res) {
  RVector k(d);
  for (int j = 0; j < d; ++j) {
    k[j] = 2 * kPi * static_cast<double>(idx % k_res) / k_res;
    idx /= k_res;
  }
  return k;
}

double min_abs_eig(const CMatrix& H) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().minCoeff();
}

}  // namespace

GapCertificate gap_on(const Symbol& S, const std::vector<int>& cells, int k_res, int omega_res,
                      Exec exec) {
  if (k_res < 2 || omega_res < 2) throw SymbolError("gap_on: resolutions must be >= 2");
  std::vector<ConfigPoint> omegas;
  for (int c : cells) {
    auto s = cell_samples(S, c, omega_res);
    omegas.insert(omegas.end(), s.begin(), s.end());
  }
  long nk = 1;
  for (int j = 0; j < S.d; ++j) nk *= k_res;
  const long total = nk * static_cast<long>(omegas.size());

  // Coefficients are evaluated once per omega.
  std::vector<std::vector<CMatrix>> coeffs(omegas.size());
  for (std::size_t i = 0; i < omegas.size(); ++i) coeffs[i] = S.coeffs(omegas[i]);

  double best = std::numeric_limits<double>::infinity();
  long best_idx = 0;
  auto eval = [&](long idx) {
    long wi = idx / nk;
    RVector k = k_point(idx % nk, S.d, k_res);
    CMatrix H = CMatrix::Zero(S.N, S.N);
    for (std::size_t q = 0; q < S.support.size(); ++q)
      H += coeffs[wi][q] * std::exp(I * k.dot(S.support[q].cast<double>()));
    return min_abs_eig(H);
  };
  if (exec == Exec::serial) {
    for (long i = 0; i < total; ++i) {
      double g = eval(i);
      if (g < best) {
        best = g;
        best_idx = i;
      }
    }
  } else {
#pragma omp parallel
    {
      double lb = std::numeric_limits<double>::infinity();
      long li = 0;
#pragma omp for schedule(static)
      for (long i = 0; i < total; ++i) {
        double g = eval(i);
        if (g < lb) {
          lb = g;
          li = i;
        }
      }
#pragma omp critical
      {
        if (lb < best || (lb == best && li < best_idx)) {
          best = lb;
          best_idx = li;
        }
      }
    }
  }
  GapCertificate cert;
  cert.region = cells;
  cert.min_gap = best;
  cert.k_grid = k_res;
  cert.omega_samples = static_cast<int>(omegas.size());
  cert.argmin_omega = omegas[best_idx / nk];
  cert.argmin_k = k_point(best_idx % nk, S.d, k_res);
  return cert;
}

double symmetry_check(const Symbol& S, SymmetryKind which, int omega_res, int k_samples,
                      unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uk(0.0, 2 * kPi);
  double worst = 0.0;
  for (int c : S.cells) {
    for (auto& w : cell_samples(S, c, omega_res)) {
      for (int s = 0; s < k_samples; ++s) {
        RVector k(S.d);
        for (int j = 0; j < S.d; ++j) k[j] = uk(rng);
        CMatrix H = eval_symbol(S, w, k);
        double defect = 0.0;
        switch (which) {
          case SymmetryKind::chiral: {
            if (!S.J) throw SymbolError("symmetry_check: no chiral operator");
            defect = max_abs(*S.J * H * *S.J + H);
            break;
          }
          case SymmetryKind::mirror: {
            if (!S.mirror) throw SymbolError("symmetry_check: no mirror data");
            RVector ks = k;
            std::swap(ks[0], ks[1]);
            const auto& m = *S.mirror;
            CMatrix Hm = m.U * eval_symbol(S, m.point_map(w), ks) * m.U.adjoint();
            defect = max_abs(Hm - H);
            break;
          }
          case SymmetryKind::inversion: {
            if (!S.inversion) throw SymbolError("symmetry_check: no inversion data");
            const auto& g = *S.inversion;
            CMatrix Hi = g.U * eval_symbol(S, g.point_map(w), -k) * g.U.adjoint();
            defect = max_abs(Hi - H);
            break;
          }
        }
        worst = std::max(worst, defect);
      }
    }
  }
  return worst;
}

Symbol restrict(const Symbol& S, const std::vector<int>& cells) {
  const ConfigSpace& sp = *S.space;
  for (int c : cells) {
    if (!S.has_cell(c)) throw SymbolError("restrict: cell outside the symbol domain");
    auto it = sp.boundary.find(c);
    if (it == sp.boundary.end()) continue;
    for (auto& t : it->second) {
      if (std::find(cells.begin(), cells.end(), t.cell) == cells.end())
        throw SymbolError("restrict: cell selection is not closed");
    }
  }
  Symbol R = S;
  R.cells = cells;
  std::sort(R.cells.begin(), R.cells.end());
  return R;
}

Symbol restrict_to_point(const Symbol& S, int zero_cell) {
  if (S.space->cell(zero_cell).dim != 0) throw SymbolError("restrict_to_point: not a 0-cell");
  auto coeffs = S.coeffs(ConfigPoint{zero_cell, RVector(0)});
  Symbol P;
  P.name = S.name + "@" + S.space->cell(zero_cell).label;
  P.N = S.N;
  P.d = S.d;
  SpaceParams sp;
  sp.d = S.d;
  P.space = builtin_space(SpaceKind::point, sp);
  P.support = S.support;
  P.coeffs = [coeffs](const ConfigPoint&) { return coeffs; };
  P.cells = {0};
  P.J = S.J;
  return P;
}

double symbol_hermiticity(const Symbol& S, int samples, unsigned seed) {
  std::vector<ConfigPoint> omegas;
  for (int c : S.cells) {
    auto s = cell_samples(S, c, 9);
    omegas.insert(omegas.end(), s.begin(), s.end());
  }
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uk(0.0, 2 * kPi);
  std::uniform_int_distribution<std::size_t> uw(0, omegas.size() - 1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    RVector k(S.d);
    for (int j = 0; j < S.d; ++j) k[j] = uk(rng);
    worst = std::max(worst, hermiticity_defect(eval_symbol(S, omegas[uw(rng)], k)));
  }
  return worst;
}

}  // namespace adq
