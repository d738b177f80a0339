#include <algorithm>
#include <cmath>
#include <limits>

#include "adq/invariants.hpp"

namespace adq {

RVector site_weights(const LatticeRegion& R, int N, const std::function<double(const IVector&)>& chi) {
  RVector w(R.sites() * N);
  for (long i = 0; i < R.sites(); ++i) w.segment(i * N, N).setConstant(chi(R.coords(i)));
  return w;
}

namespace {

// (1 (x) J) V for a site-local J.
CMatrix apply_site_operator(const CMatrix& J, const CMatrix& V) {
  const long N = J.rows();
  CMatrix out(V.rows(), V.cols());
  for (long i = 0; i < V.rows() / N; ++i) out.middleRows(i * N, N) = J * V.middleRows(i * N, N);
  return out;
}

RVector expand(const std::vector<double>& chi, long sites, int N) {
  RVector w(sites * N);
  if (chi.empty()) {
    w.setOnes();
    return w;
  }
  if (static_cast<long>(chi.size()) != sites) throw InvariantError("site weight vector has wrong length");
  for (long i = 0; i < sites; ++i) w.segment(i * N, N).setConstant(chi[i]);
  return w;
}

}  // namespace

DefectReport zero_mode_index(const LatticeHamiltonian& H, const CMatrix& J, double tol,
                             const std::vector<double>& chi) {
  const int N = H.N;
  if (J.rows() != N) throw InvariantError("zero_mode_index: J has wrong size");
  const long sites = H.region.sites();
  CMatrix Hd = H.dense();
  DefectReport rep;
  rep.tol = tol;
  for (const auto& e : H.matrix.entries()) {
    const int a = e.row / N, b = e.col / N;
    cplx jhj = 0.0;
    for (int p = 0; p < N; ++p)
      for (int q = 0; q < N; ++q)
        jhj += J(e.row % N, p) * Hd(a * N + p, b * N + q) * J(q, e.col % N);
    rep.chiral_defect = std::max(rep.chiral_defect, std::abs(jhj + e.value));
  }
  if (rep.chiral_defect > 1e-10) throw InvariantError("zero_mode_index: lattice chiral symmetry violated");
  auto eig = eig_hermitian(Hd);
  std::vector<int> win;
  rep.next_eigenvalue = std::numeric_limits<double>::infinity();
  for (int e = 0; e < eig.values.size(); ++e) {
    double a = std::abs(eig.values[e]);
    if (a <= tol)
      win.push_back(e);
    else
      rep.next_eigenvalue = std::min(rep.next_eigenvalue, a);
  }
  rep.kernel_dim = static_cast<int>(win.size());
  rep.crowded = rep.next_eigenvalue < 10 * tol;
  const RVector w = expand(chi, sites, N);
  rep.spectrum = eig.values;
  rep.localization = (eig.vectors.cwiseAbs2().transpose() * w).eval();
  if (win.empty()) return rep;

  CMatrix V(Hd.rows(), win.size());
  for (std::size_t i = 0; i < win.size(); ++i) V.col(i) = eig.vectors.col(win[i]);
  CMatrix JV = apply_site_operator(J, V);
  CMatrix K = V.adjoint() * JV;
  double tr = K.trace().real();
  rep.global_index = static_cast<int>(std::lround(tr));
  rep.rounding_residual = std::abs(tr - rep.global_index);
  for (std::size_t i = 0; i < win.size(); ++i) {
    const auto v = V.col(i);
    ZeroMode z;
    z.eigenvalue = eig.values[win[i]];
    z.chirality = v.dot(JV.col(i)).real();
    z.localization = (v.adjoint() * w.asDiagonal() * v)(0, 0).real();
    rep.zero_modes.push_back(z);
  }
  // Chirality sectors of the window, then localized vectors in each.
  Eigen::SelfAdjointEigenSolver<CMatrix> ks(K);
  for (int sector : {1, -1}) {
    std::vector<int> cols;
    for (int i = 0; i < ks.eigenvalues().size(); ++i)
      if (sector * ks.eigenvalues()[i] > 0.5) cols.push_back(i);
    if (cols.empty()) continue;
    CMatrix W(V.rows(), cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) W.col(i) = V * ks.eigenvectors().col(cols[i]);
    Eigen::SelfAdjointEigenSolver<CMatrix> cs(W.adjoint() * w.asDiagonal() * W);
    int count = 0;
    for (int i = 0; i < cs.eigenvalues().size(); ++i)
      if (cs.eigenvalues()[i] > 0.5) ++count;
    (sector > 0 ? rep.sector_plus : rep.sector_minus) = count;
  }
  rep.zero_mode_index = rep.sector_plus - rep.sector_minus;
  return rep;
}

// ---- spectral flow --------------------------------------------------------

namespace {

struct Sample {
  double k;
  EigResult eig;
  int negatives;
};

Sample evaluate(const std::function<CMatrix(double)>& family, double k) {
  Sample s;
  s.k = k;
  s.eig = eig_hermitian(family(k));
  s.negatives = 0;
  for (int i = 0; i < s.eig.values.size(); ++i)
    if (s.eig.values[i] < 0) ++s.negatives;
  return s;
}

std::vector<int> window_states(const Sample& s, double window) {
  std::vector<int> out;
  for (int i = 0; i < s.eig.values.size(); ++i)
    if (std::abs(s.eig.values[i]) < window) out.push_back(i);
  return out;
}

class FlowTracker {
 public:
  FlowTracker(const std::function<CMatrix(double)>& f, double window, const RVector& chi, int max_depth,
              SpectralFlowResult& out)
      : family_(f), window_(window), chi_(chi), max_depth_(max_depth), out_(out) {}

  void interval(const Sample& a, const Sample& b, int depth) {
    const int dneg = b.negatives - a.negatives;
    // Window states at a against a doubled window at b.
    auto wa = window_states(a, window_), wb = window_states(b, 2 * window_);
    std::vector<Crossing> found;
    bool clean = true;
    if (!wa.empty()) {
      clean = !wb.empty();
      CMatrix Va(a.eig.vectors.rows(), wa.size()), Vb(b.eig.vectors.rows(), wb.size());
      for (std::size_t i = 0; i < wa.size(); ++i) Va.col(i) = a.eig.vectors.col(wa[i]);
      for (std::size_t i = 0; i < wb.size(); ++i) Vb.col(i) = b.eig.vectors.col(wb[i]);
      RMatrix O = (Va.adjoint() * Vb).cwiseAbs2();
      std::vector<int> match(wa.size(), -1);
      std::vector<bool> used(wb.size(), false);
      // Greedy by decreasing overlap.
      for (std::size_t step = 0; step < wa.size() && clean; ++step) {
        double bv = -1.0;
        int bi = -1, bj = -1;
        for (std::size_t i = 0; i < wa.size(); ++i) {
          if (match[i] >= 0) continue;
          for (std::size_t j = 0; j < wb.size(); ++j)
            if (!used[j] && O(i, j) > bv) {
              bv = O(i, j);
              bi = static_cast<int>(i);
              bj = static_cast<int>(j);
            }
        }
        if (bi < 0 || bv < 0.5) {
          clean = false;
          break;
        }
        match[bi] = bj;
        used[bj] = true;
      }
      for (std::size_t i = 0; i < wa.size() && clean; ++i) {
        double la = a.eig.values[wa[i]], lb = b.eig.values[wb[match[i]]];
        if ((la < 0) == (lb < 0)) continue;
        Crossing c;
        c.k = 0.5 * (a.k + b.k);
        c.direction = la < 0 ? 1 : -1;
        double loc_a = (Va.col(i).cwiseAbs2().array() * chi_.array()).sum();
        double loc_b = (Vb.col(match[i]).cwiseAbs2().array() * chi_.array()).sum();
        c.localization = 0.5 * (loc_a + loc_b);
        found.push_back(c);
      }
    }
    int net = 0;
    for (auto& c : found) net += c.direction;
    if (clean && net == -dneg) {
      for (auto& c : found) out_.crossings.push_back(c);
      return;
    }
    if (depth >= max_depth_) throw InvariantError("spectral_flow: untrackable crossing after maximal refinement");
    Sample m = evaluate(family_, 0.5 * (a.k + b.k));
    ++out_.evaluations;
    interval(a, m, depth + 1);
    interval(m, b, depth + 1);
  }

 private:
  const std::function<CMatrix(double)>& family_;
  double window_;
  const RVector& chi_;
  int max_depth_;
  SpectralFlowResult& out_;
};

}  // namespace

SpectralFlowResult spectral_flow(const std::function<CMatrix(double)>& family, int k_samples,
                                 double window, const RVector& diag_chi, int max_depth) {
  if (k_samples < 4) throw InvariantError("spectral_flow: need at least 4 samples");
  SpectralFlowResult out;
  std::vector<Sample> s(k_samples);
  // Offset by half a step to stay off symmetric momenta.
  auto kval = [&](int i) { return 2 * kPi * (i + 0.5) / k_samples; };
  for (int i = 0; i < k_samples; ++i) s[i] = evaluate(family, kval(i));
  out.evaluations = k_samples;
  FlowTracker tr(family, window, diag_chi, max_depth, out);
  for (int i = 0; i < k_samples; ++i) {
    Sample end = i + 1 < k_samples ? s[i + 1] : s[0];
    end.k = kval(i + 1);
    tr.interval(s[i], end, 0);
  }
  for (auto& c : out.crossings) {
    out.total += c.direction;
    if (c.localization > 0.5) out.flow += c.direction;
  }
  return out;
}

// ---- winding --------------------------------------------------------------

double flatten(double E, double g, int order) {
  if (order < 1) throw InvariantError("flatten: order must be positive");
  if (E >= g) return 1.0;
  if (E <= -g) return -1.0;
  // Int_0^x (1 - s^2)^n ds = sum_j C(n,j) (-1)^j x^(2j+1) / (2j+1)
  const double x = E / g;
  double num = 0.0, den = 0.0, binom = 1.0;
  for (int j = 0; j <= order; ++j) {
    double sgn = (j % 2) ? -1.0 : 1.0;
    num += sgn * binom * std::pow(x, 2 * j + 1) / (2 * j + 1);
    den += sgn * binom / (2 * j + 1);
    binom = binom * (order - j) / (j + 1);
  }
  return num / den;
}

namespace {

long parallel_cells(const LatticeRegion& R, const std::vector<int>& pd, std::vector<int>* dirs_out = nullptr) {
  long cells = 1;
  bool any = false;
  for (int j = 0; j < R.d; ++j) {
    bool use = pd.empty() ? R.dirs[j].periodic : std::find(pd.begin(), pd.end(), j) != pd.end();
    if (!use) continue;
    if (!R.dirs[j].periodic) throw InvariantError("defect_winding: parallel direction is not periodic");
    cells *= R.dirs[j].L;
    any = true;
    if (dirs_out) dirs_out->push_back(j);
  }
  if (!any) throw InvariantError("defect_winding: region needs a periodic direction");
  return cells;
}

// v . (x_b - x_a), minimal image along periodic directions.
double periodic_disp(const LatticeRegion& R, const RVector& v, IVector d) {
  for (int j = 0; j < R.d; ++j)
    if (R.dirs[j].periodic) {
      int L = R.dirs[j].L;
      d[j] = ((d[j] % L) + L) % L;
      if (2 * d[j] > L) d[j] -= L;
    }
  return v.dot((R.basis * d).cast<double>());
}

// U = -exp(i pi f(H)) through the Fourier blocks along direction p.  Returns
// false when H, chi or buffer are not invariant under shifts along p.
bool winding_reduced(const LatticeHamiltonian& H, int p, const RVector& v, const std::vector<double>& chi,
                     const std::vector<double>& buffer, const WindingOptions& opt, WindingResult& res) {
  const auto& R = H.region;
  const int N = H.N;
  const long sites = R.sites();
  const int L = R.dirs[p].L;
  const long T = sites / L;
  const int n = static_cast<int>(T) * N;

  // Slice index: coordinates with the p-th removed.
  std::vector<long> slice(sites);
  std::vector<int> shift(sites);
  std::vector<IVector> coords(sites);
  for (long a = 0; a < sites; ++a) {
    coords[a] = R.coords(a);
    IVector c = coords[a];
    shift[a] = c[p];
    c[p] = 0;
    long t = 0;
    for (int j = 0; j < R.d; ++j)
      if (j != p) t = t * R.dirs[j].L + c[j];
    slice[a] = t;
  }
  std::vector<long> rep(T, -1);  // site with n_p = 0 in each slice
  for (long a = 0; a < sites; ++a)
    if (shift[a] == 0) rep[slice[a]] = a;
  for (long a = 0; a < sites; ++a)
    if (chi[a] != chi[rep[slice[a]]] || buffer[a] != buffer[rep[slice[a]]]) return false;

  std::vector<CMatrix> h(L, CMatrix::Zero(n, n));
  auto visit = [&](auto&& fn) {
    for (const auto& e : H.matrix.entries()) {
      fn(e.row, e.col, e.value);
      if (e.row != e.col) fn(e.col, e.row, std::conj(e.value));
    }
  };
  double full = 0.0;
  visit([&](int r, int c, cplx val) {
    long sa = r / N, sb = c / N;
    full += std::norm(val);
    if (shift[sb] != 0) return;
    h[shift[sa]](slice[sa] * N + r % N, slice[sb] * N + c % N) += val;
  });
  // Every entry matches its shifted copy, and no shifted copy is missing.
  double pattern = 0.0;
  for (auto& m : h) pattern += m.squaredNorm();
  bool invariant = std::abs(pattern * L - full) <= 1e-10 * std::max(1.0, full);
  visit([&](int r, int c, cplx val) {
    long sa = r / N, sb = c / N;
    int dlt = ((shift[sa] - shift[sb]) % L + L) % L;
    if (std::abs(h[dlt](slice[sa] * N + r % N, slice[sb] * N + c % N) - val) > 1e-12) invariant = false;
  });
  if (!invariant) return false;

  const double g = opt.g;
  const int order = opt.order;
  std::vector<CMatrix> u(L, CMatrix::Zero(n, n));
  for (int j = 0; j < L; ++j) {
    const double k = 2 * kPi * j / L;
    CMatrix Hk = CMatrix::Zero(n, n);
    for (int dlt = 0; dlt < L; ++dlt) Hk += std::exp(-I * (k * dlt)) * h[dlt];
    CMatrix Uk = -matrix_function(eig_hermitian(Hk), [g, order](double E) {
      return std::exp(I * kPi * flatten(E, g, order));
    });
    for (int dlt = 0; dlt < L; ++dlt) u[dlt] += (std::exp(I * (k * dlt)) / static_cast<double>(L)) * Uk;
  }

  // Column sums are shift invariant; one representative column per slice.
  double tr = 0.0;
  for (long a = 0; a < sites; ++a) {
    if (shift[a] != 0 || chi[a] == 0.0) continue;
    double col = 0.0;
    for (long b = 0; b < sites; ++b) {
      double w = u[shift[b]].block(slice[b] * N, slice[a] * N, N, N).squaredNorm();
      if (w != 0.0) col += periodic_disp(R, v, coords[b] - coords[a]) * w;
    }
    tr += chi[a] * col;
  }
  res.value = tr;
  for (long a = 0; a < sites; ++a) {
    if (shift[a] != 0 || buffer[a] == 0.0) continue;
    const long t = slice[a];
    for (int dlt = 0; dlt < L; ++dlt) {
      CMatrix rows = u[dlt].middleRows(t * N, N);
      if (dlt == 0) rows.middleCols(t * N, N) -= CMatrix::Identity(N, N);
      res.off_defect_weight = std::max(res.off_defect_weight, rows.cwiseAbs().maxCoeff());
    }
  }
  return true;
}

void finish_winding(WindingResult& res, const WindingOptions& opt) {
  res.normalization = opt.normalization;
  res.per_volume = opt.normalization * res.value;
  res.decays = res.off_defect_weight <= opt.decay_tol;
  if (!res.decays) throw InvariantError("defect_winding: U - 1 does not decay away from the defect");
}

}  // namespace

WindingResult defect_winding(const LatticeHamiltonian& H, const RVector& v, const std::vector<double>& chi,
                             const std::vector<double>& buffer, const WindingOptions& opt) {
  const auto& R = H.region;
  if (v.size() != R.d) throw InvariantError("defect_winding: v has wrong dimension");
  if (static_cast<long>(chi.size()) != R.sites() || static_cast<long>(buffer.size()) != R.sites())
    throw InvariantError("defect_winding: weights have wrong length");
  std::vector<int> dirs;
  parallel_cells(R, opt.parallel_dirs, &dirs);
  if (opt.reduce && dirs.size() == 1) {
    WindingResult res;
    if (winding_reduced(H, dirs[0], v, chi, buffer, opt, res)) {
      finish_winding(res, opt);
      return res;
    }
  }
  return defect_winding(H, eig_hermitian(H.dense()), v, chi, buffer, opt);
}

WindingResult defect_winding(const LatticeHamiltonian& H, const EigResult& eig, const RVector& v,
                             const std::vector<double>& chi, const std::vector<double>& buffer,
                             const WindingOptions& opt) {
  const auto& R = H.region;
  const int N = H.N;
  const long sites = R.sites();
  if (v.size() != R.d) throw InvariantError("defect_winding: v has wrong dimension");
  if (eig.values.size() != sites * N) throw InvariantError("defect_winding: eigensystem has wrong size");
  if (static_cast<long>(chi.size()) != sites || static_cast<long>(buffer.size()) != sites)
    throw InvariantError("defect_winding: weights have wrong length");
  const long cells = parallel_cells(R, opt.parallel_dirs);

  // Only the chi columns and buffer rows of U are needed.
  const double g = opt.g;
  const int order = opt.order;
  CVector phase(eig.values.size());
  for (int e = 0; e < phase.size(); ++e) phase[e] = -std::exp(I * kPi * flatten(eig.values[e], g, order));
  const CMatrix VP = eig.vectors * phase.asDiagonal();

  std::vector<IVector> coords(sites);
  for (long a = 0; a < sites; ++a) coords[a] = R.coords(a);

  // (U^*[X,U])_aa = sum_b (x_b - x_a) |U_ba|^2
  WindingResult res;
  double tr = 0.0;
  for (long a = 0; a < sites; ++a) {
    if (chi[a] == 0.0) continue;
    CMatrix col = VP * eig.vectors.middleRows(a * N, N).adjoint();
    double acc = 0.0;
    for (long b = 0; b < sites; ++b) acc += periodic_disp(R, v, coords[b] - coords[a]) * col.middleRows(b * N, N).squaredNorm();
    tr += chi[a] * acc;
  }
  res.value = tr / static_cast<double>(cells);
  for (long a = 0; a < sites; ++a) {
    if (buffer[a] == 0.0) continue;
    CMatrix rows = VP.middleRows(a * N, N) * eig.vectors.adjoint();
    rows.middleCols(a * N, N) -= CMatrix::Identity(N, N);
    res.off_defect_weight = std::max(res.off_defect_weight, rows.cwiseAbs().maxCoeff());
  }
  finish_winding(res, opt);
  return res;
}

std::vector<CorrespondenceRow> correspondence_check(double symbol_side,
                                                    const std::vector<double>& t_list,
                                                    const std::function<double(double)>& lattice_side) {
  std::vector<CorrespondenceRow> rows;
  for (double t : t_list) {
    CorrespondenceRow r;
    r.t = t;
    r.symbol_side = symbol_side;
    r.lattice_side = lattice_side(t);
    r.difference = r.lattice_side - r.symbol_side;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace adq
