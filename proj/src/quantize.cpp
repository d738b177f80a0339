#include "adq/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adq {

LatticeRegion LatticeRegion::make(const std::vector<int>& L, const std::vector<bool>& periodic) {
  if (L.size() != periodic.size()) throw QuantizeError("LatticeRegion: size mismatch");
  LatticeRegion R;
  R.d = static_cast<int>(L.size());
  for (std::size_t j = 0; j < L.size(); ++j) {
    if (L[j] < 1) throw QuantizeError("LatticeRegion: L_j must be >= 1");
    R.dirs.push_back({L[j], periodic[j]});
  }
  R.basis = Eigen::MatrixXi::Identity(R.d, R.d);
  return R;
}

LatticeRegion LatticeRegion::open_box(const std::vector<int>& L) {
  return make(L, std::vector<bool>(L.size(), false));
}

LatticeRegion LatticeRegion::with_basis(const Eigen::MatrixXi& B) const {
  if (B.rows() != d || B.cols() != d) throw QuantizeError("LatticeRegion: basis has wrong shape");
  if (std::abs(std::abs(B.cast<double>().determinant()) - 1.0) > 1e-9)
    throw QuantizeError("LatticeRegion: basis must be unimodular");
  LatticeRegion R = *this;
  R.basis = B;
  return R;
}

long LatticeRegion::sites() const {
  long n = 1;
  for (auto& dir : dirs) n *= dir.L;
  return n;
}

long LatticeRegion::index(const IVector& n) const {
  long i = 0;
  for (int j = 0; j < d; ++j) i = i * dirs[j].L + n[j];
  return i;
}

IVector LatticeRegion::coords(long i) const {
  IVector n(d);
  for (int j = d - 1; j >= 0; --j) {
    n[j] = static_cast<int>(i % dirs[j].L);
    i /= dirs[j].L;
  }
  return n;
}

namespace {

Eigen::MatrixXi integer_inverse(const Eigen::MatrixXi& B) {
  Eigen::MatrixXd inv = B.cast<double>().inverse();
  Eigen::MatrixXi out = inv.array().round().cast<int>().matrix();
  if ((B * out - Eigen::MatrixXi::Identity(B.rows(), B.cols())).cwiseAbs().maxCoeff() != 0)
    throw QuantizeError("basis is not unimodular");
  return out;
}

// Wraps n into the region; false if the hop leaves an open direction.
bool wrap(const LatticeRegion& R, IVector& n) {
  for (int j = 0; j < R.d; ++j) {
    int L = R.dirs[j].L;
    if (R.dirs[j].periodic) {
      n[j] = ((n[j] % L) + L) % L;
    } else if (n[j] < 0 || n[j] >= L) {
      return false;
    }
  }
  return true;
}

void check_wrap(const LatticeRegion& R, const std::vector<IVector>& steps) {
  for (auto& dn : steps)
    for (int j = 0; j < R.d; ++j)
      if (R.dirs[j].periodic && R.dirs[j].L <= 2 * std::abs(dn[j]))
        throw QuantizeError("quantize: periodic length must exceed twice the hopping range");
}

// Appends the upper-triangle part of the block contributions
// (x,y) += A and (y,x) += A^*.
void add_hop(std::vector<SparseHermitian::Entry>& out, int N, long x, long y, const CMatrix& A) {
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      cplx v = A(a, b);
      if (v == cplx(0.0)) continue;
      int r = static_cast<int>(x * N + a), c = static_cast<int>(y * N + b);
      // (r,c) gets v; its mirror (c,r) gets conj(v) from the adjoint block.
      if (r <= c) out.push_back({r, c, v});
      if (c <= r) out.push_back({c, r, std::conj(v)});
    }
}

SparseHermitian assemble(int dim, std::vector<std::vector<SparseHermitian::Entry>>& parts) {
  std::size_t total = 0;
  for (auto& p : parts) total += p.size();
  std::vector<SparseHermitian::Entry> all;
  all.reserve(total);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return SparseHermitian::from_triplets(dim, std::move(all));
}

}  // namespace

LatticeHamiltonian quantize(const Symbol& S, const ConfigPoint& omega, double t,
                            const LatticeRegion& region, Exec exec) {
  if (!(t > 0.0 && t <= 1.0)) throw QuantizeError("quantize: t must lie in (0,1]");
  if (region.d != S.d) throw QuantizeError("quantize: region dimension mismatch");
  if (!S.has_cell(omega.cell)) throw QuantizeError("quantize: omega outside the symbol domain");
  const Eigen::MatrixXi Binv = integer_inverse(region.basis);
  std::vector<IVector> steps;
  for (auto& q : S.support) steps.push_back(Binv * q);
  check_wrap(region, steps);

  const long ns = region.sites();
  const int N = S.N;
  if (ns * N > (1L << 31) - 1) throw QuantizeError("quantize: region too large");
  std::vector<std::vector<SparseHermitian::Entry>> parts(ns);
  auto site = [&](long i) {
    IVector n = region.coords(i);
    RVector x = (region.basis * n).cast<double>();
    auto f = S.coeffs(translate(*S.space, omega, t * x));
    auto& out = parts[i];
    for (std::size_t q = 0; q < steps.size(); ++q) {
      IVector m = n - steps[q];
      if (!wrap(region, m)) continue;
      add_hop(out, N, i, region.index(m), 0.5 * f[q]);
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < ns; ++i) site(i);
  } else {
    for (long i = 0; i < ns; ++i) site(i);
  }
  LatticeHamiltonian H;
  H.region = region;
  H.N = N;
  H.matrix = assemble(static_cast<int>(ns * N), parts);
  H.omega = omega;
  H.t = t;
  H.symbol = S.name;
  return H;
}

BlochSetup bloch_setup(const Symbol& S, int cell) {
  const Cell& c = S.space->cell(cell);
  BlochSetup setup;
  setup.isotropy = isotropy_lattice(c);
  int n = (c.dim == 0 || c.kind == CellKind::sphere) ? 0 : c.dim;
  if (static_cast<int>(setup.isotropy.size()) != S.d - n)
    throw QuantizeError("quantize_bloch: irrational cell");
  setup.transverse = transverse_basis(setup.isotropy, S.d);
  return setup;
}

LatticeHamiltonian quantize_bloch(const Symbol& S, const ConfigPoint& omega, double t,
                                  const LatticeRegion& region_perp, const RVector& k_par,
                                  const BlochSetup& setup) {
  if (!(t > 0.0 && t <= 1.0)) throw QuantizeError("quantize_bloch: t must lie in (0,1]");
  const int np = static_cast<int>(setup.transverse.size());
  const int r = static_cast<int>(setup.isotropy.size());
  if (region_perp.d != np) throw QuantizeError("quantize_bloch: region must span the transverse directions");
  if (k_par.size() != r) throw QuantizeError("quantize_bloch: one momentum per isotropy vector");
  Eigen::MatrixXi B(S.d, S.d);
  for (int j = 0; j < np; ++j) B.col(j) = setup.transverse[j];
  for (int j = 0; j < r; ++j) B.col(np + j) = setup.isotropy[j];
  const Eigen::MatrixXi Binv = integer_inverse(B);
  std::vector<IVector> dperp;
  std::vector<cplx> phase;
  for (auto& q : S.support) {
    IVector c = Binv * q;
    dperp.push_back(c.head(np));
    double ph = 0.0;
    for (int j = 0; j < r; ++j) ph += k_par[j] * c[np + j];
    phase.push_back(std::exp(I * ph));
  }
  check_wrap(region_perp, dperp);

  const long ns = region_perp.sites();
  const int N = S.N;
  std::vector<std::vector<SparseHermitian::Entry>> parts(ns);
  for (long i = 0; i < ns; ++i) {
    IVector n = region_perp.coords(i);
    IVector xi = IVector::Zero(S.d);
    for (int j = 0; j < np; ++j) xi += n[j] * setup.transverse[j];
    auto f = S.coeffs(translate(*S.space, omega, t * xi.cast<double>()));
    for (std::size_t q = 0; q < dperp.size(); ++q) {
      IVector m = n - dperp[q];
      if (!wrap(region_perp, m)) continue;
      add_hop(parts[i], N, i, region_perp.index(m), 0.5 * phase[q] * f[q]);
    }
  }
  LatticeHamiltonian H;
  H.region = region_perp;
  H.N = N;
  H.matrix = assemble(static_cast<int>(ns * N), parts);
  H.omega = omega;
  H.t = t;
  H.symbol = S.name + "/bloch";
  return H;
}

double covariance_check(const Symbol& S, const ConfigPoint& omega, const IVector& x, double t,
                        const LatticeRegion& region) {
  for (auto& dir : region.dirs)
    if (dir.periodic) throw QuantizeError("covariance_check: region must be open");
  const Eigen::MatrixXi Binv = integer_inverse(region.basis);
  const IVector dn = Binv * x;
  CMatrix H0 = quantize(S, omega, t, region).dense();
  ConfigPoint shifted = translate(*S.space, omega, t * x.cast<double>());
  CMatrix H1 = quantize(S, shifted, t, region).dense();
  const int N = S.N;
  std::vector<long> inner;
  for (long i = 0; i < region.sites(); ++i) {
    IVector n = region.coords(i) + dn;
    if (wrap(region, n)) inner.push_back(i);
  }
  if (inner.empty()) throw QuantizeError("covariance_check: region too small for the shift");
  double worst = 0.0;
  for (long a : inner) {
    long sa = region.index(region.coords(a) + dn);
    for (long b : inner) {
      long sb = region.index(region.coords(b) + dn);
      double e = max_abs(H1.block(a * N, b * N, N, N) - H0.block(sa * N, sb * N, N, N));
      worst = std::max(worst, e);
    }
  }
  return worst;
}

LatticeHamiltonian truncate_with_padding(const LatticeHamiltonian& H,
                                         const std::function<bool(const IVector&)>& mask,
                                         const CMatrix& S_pad) {
  const int N = H.N;
  if (S_pad.rows() != N || S_pad.cols() != N) throw QuantizeError("padding: S_pad has wrong size");
  if (!is_hermitian(S_pad)) throw QuantizeError("padding: S_pad must be hermitian");
  if (spectral_gap(S_pad) < 1e-12) throw QuantizeError("padding: S_pad is singular");
  const long ns = H.region.sites();
  std::vector<char> in(ns);
  for (long i = 0; i < ns; ++i) in[i] = mask(H.region.coords(i)) ? 1 : 0;
  std::vector<SparseHermitian::Entry> out;
  for (auto& e : H.matrix.entries())
    if (in[e.row / N] && in[e.col / N]) out.push_back(e);
  for (long i = 0; i < ns; ++i) {
    if (in[i]) continue;
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b)
        if (S_pad(a, b) != cplx(0.0))
          out.push_back({static_cast<int>(i * N + a), static_cast<int>(i * N + b), S_pad(a, b)});
  }
  LatticeHamiltonian P = H;
  P.matrix = SparseHermitian::from_triplets(H.matrix.dim(), std::move(out));
  P.padding = S_pad;
  return P;
}

double locality_defect(const LatticeHamiltonian& H, const Symbol& S) {
  const int N = H.N;
  const auto& R = H.region;
  double worst = 0.0;
  for (auto& e : H.matrix.entries()) {
    IVector a = R.coords(e.row / N), b = R.coords(e.col / N);
    IVector dn = a - b;
    for (int j = 0; j < R.d; ++j)
      if (R.dirs[j].periodic) {
        int L = R.dirs[j].L;
        dn[j] = ((dn[j] % L) + L) % L;
        if (dn[j] > L / 2) dn[j] -= L;
      }
    IVector q = R.basis * dn;
    bool inside = false;
    for (auto& s : S.support)
      if (s == q || s == -q) inside = true;
    if (!inside) worst = std::max(worst, std::abs(e.value));
  }
  return worst;
}

double chain_gap(const Symbol& S, int cell, double t, int k_samples) {
  const Cell& c = S.space->cell(cell);
  if (c.dim != 1) throw QuantizeError("chain_gap: cell must be one-dimensional");
  BlochSetup setup = bloch_setup(S, cell);
  const double s = (c.Lambda * setup.transverse[0].cast<double>())(0, 0);
  const double half = S.profile.ell * std::atanh(1.0 - 1e-3);
  const int margin = 8 + S.max_range();
  const int Lc = static_cast<int>(std::ceil(2.0 * half / (t * std::abs(s)))) + 2 * margin;
  LatticeRegion R = LatticeRegion::open_box({Lc});
  const int r = static_cast<int>(setup.isotropy.size());
  long nk = 1;
  for (int j = 0; j < r; ++j) nk *= k_samples;
  double best = std::numeric_limits<double>::infinity();
  for (double shift : {0.0, 0.5}) {
    RVector y0(1);
    y0[0] = -t * s * (0.5 * (Lc - 1) - shift);
    ConfigPoint w{cell, y0};
    for (long idx = 0; idx < nk; ++idx) {
      RVector k(r);
      long rem = idx;
      for (int j = 0; j < r; ++j) {
        k[j] = 2 * kPi * static_cast<double>(rem % k_samples) / k_samples;
        rem /= k_samples;
      }
      auto H = quantize_bloch(S, w, t, R, k, setup);
      auto eig = eig_hermitian(H.dense());
      for (int e = 0; e < eig.values.size(); ++e) {
        double end_weight = 0.0;
        for (int site = 0; site < margin; ++site) {
          int n = s > 0 ? Lc - 1 - site : site;
          end_weight += eig.vectors.col(e).segment(n * S.N, S.N).squaredNorm();
        }
        if (end_weight < 0.5) best = std::min(best, std::abs(eig.values[e]));
      }
    }
  }
  return best;
}

GapBisection gap_bisection(const Symbol& S, const std::vector<int>& cells, double target,
                           double t_max, double t_min, int iterations) {
  std::vector<int> edges;
  for (int c : cells)
    if (S.space->cell(c).dim == 1) edges.push_back(c);
  if (edges.empty()) throw QuantizeError("gap_bisection: no 1-cells in the selection");
  const int ks = S.d >= 3 ? 8 : 16;
  auto gap = [&](double t) {
    double g = std::numeric_limits<double>::infinity();
    for (int c : edges) g = std::min(g, chain_gap(S, c, t, ks));
    return g;
  };
  GapBisection out;
  out.target = target;
  double g_hi = gap(t_max);
  if (g_hi >= target) {
    out.t0 = t_max;
    out.gap_at_t0 = g_hi;
    out.ok = true;
    return out;
  }
  // Bracket by halving downward; small t means long chains.
  double hi = t_max, lo = 0.5 * t_max, g_lo = 0.0;
  for (;;) {
    lo = std::max(lo, t_min);
    g_lo = gap(lo);
    if (g_lo >= target) break;
    if (lo <= t_min) {
      out.t0 = t_min;
      out.gap_at_t0 = g_lo;
      return out;
    }
    hi = lo;
    lo *= 0.5;
  }
  for (int i = 0; i < iterations; ++i) {
    double mid = 0.5 * (lo + hi);
    double g = gap(mid);
    if (g >= target) {
      lo = mid;
      g_lo = g;
    } else {
      hi = mid;
    }
    ++out.iterations;
  }
  out.t0 = lo;
  out.gap_at_t0 = g_lo;
  out.ok = true;
  return out;
}

}  // namespace adq
