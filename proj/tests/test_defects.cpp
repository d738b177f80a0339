#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "adq/invariants.hpp"

using namespace adq;

namespace {

RVector kv(std::initializer_list<double> v) {
  RVector r(v.size());
  int i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

LatticeHamiltonian wrap(const CMatrix& H, const LatticeRegion& R, int N) {
  LatticeHamiltonian L;
  L.region = R;
  L.N = N;
  L.matrix = SparseHermitian::from_dense(H);
  return L;
}

// SSH chain, cell n = (A_n, B_n); intra v_n, inter w_n between B_n and A_{n+1}.
CMatrix ssh(const std::vector<double>& v, const std::vector<double>& w) {
  const int n = static_cast<int>(v.size());
  CMatrix H = CMatrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    H(2 * i, 2 * i + 1) = H(2 * i + 1, 2 * i) = v[i];
    if (i + 1 < n) H(2 * i + 1, 2 * i + 2) = H(2 * i + 2, 2 * i + 1) = w[i];
  }
  return H;
}

// Trivial left half, topological right half: one wall mode at the middle
// and one end mode at the right edge.
CMatrix ssh_wall(int n) {
  std::vector<double> v(n), w(n);
  for (int i = 0; i < n; ++i) {
    bool left = i < n / 2;
    v[i] = left ? 1.0 : 0.3;
    w[i] = left ? 0.3 : 1.0;
  }
  return ssh(v, w);
}

std::vector<double> window(int n, int lo, int hi) {
  std::vector<double> chi(n, 0.0);
  for (int i = lo; i < hi; ++i) chi[i] = 1.0;
  return chi;
}

}  // namespace

TEST_CASE("flatten") {
  const double g = 0.7;
  CHECK(flatten(0.0, g) == 0.0);
  CHECK(flatten(g, g) == doctest::Approx(1.0));
  CHECK(flatten(-g, g) == doctest::Approx(-1.0));
  CHECK(flatten(3.0, g) == 1.0);
  CHECK(flatten(-3.0, g) == -1.0);
  for (double x : {0.1, 0.35, 0.6}) {
    double u = x / g;
    CHECK(flatten(x, g) == doctest::Approx((15 * u - 10 * u * u * u + 3 * std::pow(u, 5)) / 8).epsilon(1e-14));
    CHECK(flatten(-x, g) == doctest::Approx(-flatten(x, g)));
  }
  for (int order : {1, 2, 3, 4}) {
    double prev = -1.0;
    for (int i = -50; i <= 50; ++i) {
      double f = flatten(i * g / 50, g, order);
      CHECK(f >= prev - 1e-15);
      prev = f;
    }
    CHECK(flatten(g, g, order) == doctest::Approx(1.0));
    // (1 - x^2)^order vanishes to that order at the edge.
    double e = 1e-3;
    CHECK(1.0 - flatten(g * (1 - e), g, order) < std::pow(10.0 * e, order + 1));
  }
}

TEST_CASE("zero_mode_index: SSH domain wall") {
  const int n = 100;
  CMatrix H = ssh_wall(n);
  auto L = wrap(H, LatticeRegion::open_box({n}), 2);
  auto chi = window(n, n / 4, 3 * n / 4);
  auto r = zero_mode_index(L, pauli(3), 1e-8, chi);
  CHECK(std::abs(r.zero_mode_index) == 1);
  CHECK(r.kernel_dim == 2);
  CHECK(r.global_index == 0);
  for (auto& z : r.zero_modes) CHECK(std::abs(z.eigenvalue) <= 1e-12);
  // Dense oracle: count eigenvalues below 1e-8 and read chirality of each.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  int plus = 0, minus = 0;
  for (int e = 0; e < es.eigenvalues().size(); ++e) {
    if (std::abs(es.eigenvalues()[e]) > 1e-8) continue;
    CVector v = es.eigenvectors().col(e);
    double inside = 0.0, chir = 0.0;
    for (int i = 0; i < n; ++i) {
      double a = std::norm(v[2 * i]), b = std::norm(v[2 * i + 1]);
      if (chi[i] > 0) inside += a + b;
      chir += a - b;
    }
    if (inside > 0.5) (chir > 0 ? plus : minus)++;
  }
  CHECK(r.zero_mode_index == plus - minus);
  CHECK(r.next_eigenvalue > 0.5);
  CHECK_FALSE(r.crowded);
}

TEST_CASE("zero_mode_index: trivial chain") {
  const int n = 40;
  CMatrix H = ssh(std::vector<double>(n, 1.0), std::vector<double>(n, 0.4));
  auto r = zero_mode_index(wrap(H, LatticeRegion::open_box({n}), 2), pauli(3), 1e-8);
  CHECK(r.zero_mode_index == 0);
  CHECK(r.kernel_dim == 0);
  CHECK(r.zero_modes.empty());
}

TEST_CASE("zero_mode_index: chirality violations and bad input") {
  const int n = 10;
  CMatrix H = ssh(std::vector<double>(n, 1.0), std::vector<double>(n, 0.4));
  H(0, 0) = 0.3;
  auto L = wrap(H, LatticeRegion::open_box({n}), 2);
  CHECK_THROWS_AS(zero_mode_index(L, pauli(3), 1e-8), InvariantError);
  CHECK_THROWS_AS(zero_mode_index(L, identity(3), 1e-8), InvariantError);
}

TEST_CASE("zero_mode_index is stable under chiral perturbations") {
  const int n = 100;
  CMatrix H0 = ssh_wall(n);
  auto chi = window(n, n / 4, 3 * n / 4);
  auto base = zero_mode_index(wrap(H0, LatticeRegion::open_box({n}), 2), pauli(3), 1e-6, chi);
  const double gap = base.next_eigenvalue;
  std::mt19937 rng(21);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    // Random off-diagonal (A-B) couplings up to two cells apart.
    CMatrix V = CMatrix::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
      for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
        cplx z(g(rng), g(rng));
        V(2 * i, 2 * j + 1) += z;
        V(2 * j + 1, 2 * i) += std::conj(z);
      }
    double nrm = Eigen::SelfAdjointEigenSolver<CMatrix>(V).eigenvalues().cwiseAbs().maxCoeff();
    V *= 0.4 * gap / nrm;
    auto r = zero_mode_index(wrap(H0 + V, LatticeRegion::open_box({n}), 2), pauli(3), 1e-6, chi);
    CHECK(r.zero_mode_index == base.zero_mode_index);
    CHECK(r.chiral_defect <= 1e-12);
  }
}

TEST_CASE("spectral_flow: flat family") {
  const int L = 6;
  auto R = LatticeRegion::open_box({L});
  RVector chi = site_weights(R, 2, [](const IVector&) { return 1.0; });
  auto fam = [L](double) { return kron(identity(L), pauli(3)); };
  auto r = spectral_flow(fam, 16, 0.5, chi);
  CHECK(r.flow == 0);
  CHECK(r.total == 0);
  CHECK(r.crossings.empty());
  CHECK_THROWS_AS(spectral_flow(fam, 2, 0.5, chi), InvariantError);
}

TEST_CASE("spectral_flow: QWZ cylinder with one edge selected") {
  const int L = 16;
  auto R = LatticeRegion::open_box({L});
  auto flow_for = [&](double m) {
    Symbol S = model_qwz(m);
    // Chain along e1, Bloch angle along e2.
    BlochSetup chain;
    chain.transverse = {IVector::Unit(2, 0)};
    chain.isotropy = {IVector::Unit(2, 1)};
    RVector chi = site_weights(R, 2, [&](const IVector& n) { return n[0] < L / 2 ? 1.0 : 0.0; });
    auto fam = [&, chain](double k) {
      return quantize_bloch(S, {0, RVector(0)}, 1.0, R, kv({k}), chain).dense();
    };
    return spectral_flow(fam, 32, 0.5, chi);
  };
  auto a = flow_for(1.0), b = flow_for(-1.0), c = flow_for(3.0);
  CHECK(std::abs(a.flow) == 1);
  CHECK(a.flow == -b.flow);
  CHECK(c.flow == 0);
  CHECK(a.total == 0);
  // The sign tracks the plaquette Chern number of the bulk.
  Symbol S = model_qwz(1.0);
  int f = fhs_chern2d([&](double x, double y) { return fermi_projection(eval_symbol(S, {0, RVector(0)}, kv({x, y}))); }, 24);
  CHECK(std::abs(a.flow) == std::abs(f));
}

TEST_CASE("defect_winding: gapped bulk has no winding") {
  Symbol S = model_qwz(1.0);
  auto R = LatticeRegion::make({8, 8}, {true, true});
  auto H = quantize(S, {0, RVector(0)}, 1.0, R);
  std::vector<double> chi(R.sites(), 1.0), buffer(R.sites(), 0.0);
  WindingOptions o;
  o.g = 0.5;
  o.parallel_dirs = {1};
  auto w = defect_winding(H, kv({0.0, 1.0}), chi, buffer, o);
  CHECK(std::abs(w.value) < 1e-10);
  CHECK(w.decays);
}

namespace {

struct InterfaceCase {
  LatticeHamiltonian H;
  std::vector<double> chi, buffer;
  RVector v;
  WindingOptions opt;
};

// Straight QWZ interface along e2 on a W x Lp torus, wall in the middle.
InterfaceCase interface_case(int W, int Lp) {
  Symbol S = model_interface(model_qwz(1.0), model_qwz(-1.0), kv({1.0, 0.0}));
  const int cell = S.space->cell_id("R");
  BlochSetup setup = bloch_setup(S, cell);
  IVector b = setup.isotropy[0];
  if (b[1] > 0) b = -b;  // (b, lambda) positively oriented
  const int c0 = W / 2, hw = W / 4;
  const double t = 1.0;
  const double s = (S.space->cell(cell).Lambda * setup.transverse[0].cast<double>())(0, 0);
  Eigen::MatrixXi B(2, 2);
  B.col(0) = setup.transverse[0];
  B.col(1) = b;
  auto R = LatticeRegion::make({W, Lp}, {true, true}).with_basis(B);
  InterfaceCase c;
  c.H = quantize(S, {cell, kv({-t * s * c0})}, t, R);
  c.chi.resize(R.sites());
  c.buffer.resize(R.sites());
  for (long i = 0; i < R.sites(); ++i) {
    int beta = R.coords(i)[0];
    c.chi[i] = std::abs(beta - c0) < hw ? 1.0 : 0.0;
    c.buffer[i] = std::abs(beta - c0) == hw ? 1.0 : 0.0;
  }
  c.opt.g = 0.8 * gap_on(S, S.space->zero_cells(), 32, 2).min_gap;
  c.opt.decay_tol = 1e-3;
  c.opt.parallel_dirs = {1};
  c.v = b.cast<double>().normalized();
  return c;
}

}  // namespace

TEST_CASE("defect_winding: interface, reduced and dense routes agree") {
  auto c = interface_case(40, 8);
  auto red = defect_winding(c.H, c.v, c.chi, c.buffer, c.opt);
  auto den = defect_winding(c.H, eig_hermitian(c.H.dense()), c.v, c.chi, c.buffer, c.opt);
  CHECK(std::abs(red.value - den.value) < 1e-9);
  CHECK(std::abs(red.off_defect_weight - den.off_defect_weight) < 1e-9);
  auto neg = defect_winding(c.H, RVector(-c.v), c.chi, c.buffer, c.opt);
  CHECK(std::abs(neg.value + red.value) < 1e-12);
  auto o = c.opt;
  o.normalization = 0.5;
  auto half = defect_winding(c.H, c.v, c.chi, c.buffer, o);
  CHECK(half.value == doctest::Approx(red.value));
  CHECK(half.per_volume == doctest::Approx(0.5 * red.value));
  o.decay_tol = 1e-30;
  CHECK_THROWS_AS(defect_winding(c.H, c.v, c.chi, c.buffer, o), InvariantError);
}

TEST_CASE("defect_winding: interface value equals the bulk Chern difference") {
  auto c = interface_case(40, 32);
  auto w = defect_winding(c.H, c.v, c.chi, c.buffer, c.opt);
  CHECK(std::abs(w.value + 2.0) < 0.05);
  CHECK(w.decays);
}

TEST_CASE("correspondence table") {
  auto rows = correspondence_check(1.0, {0.4, 0.7, 1.0}, [](double t) { return 1.0 + 0.01 * t; });
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].t == 0.7);
  CHECK(rows[2].difference == doctest::Approx(0.01));
  CHECK(rows[0].symbol_side == 1.0);
}
