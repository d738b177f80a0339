#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "adq/quantize.hpp"

using namespace adq;

namespace {

RVector kv(std::initializer_list<double> v) {
  RVector r(v.size());
  int i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

IVector iv(std::initializer_list<int> v) {
  IVector r(v.size());
  int i = 0;
  for (int x : v) r[i++] = x;
  return r;
}

RVector sorted(RVector v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

RVector concat(const std::vector<RVector>& parts) {
  long n = 0;
  for (auto& p : parts) n += p.size();
  RVector out(n);
  long o = 0;
  for (auto& p : parts) {
    out.segment(o, p.size()) = p;
    o += p.size();
  }
  return sorted(out);
}

RVector spectrum(const CMatrix& H) { return Eigen::SelfAdjointEigenSolver<CMatrix>(H).eigenvalues(); }

Symbol hop_chain() {
  Symbol S;
  S.name = "chain";
  S.N = 2;
  S.d = 1;
  SpaceParams p;
  p.d = 1;
  S.space = builtin_space(SpaceKind::point, p);
  S.support = {iv({0}), iv({1}), iv({-1})};
  S.coeffs = [](const ConfigPoint&) {
    return std::vector<CMatrix>{CMatrix::Zero(2, 2), 0.5 * pauli(1), 0.5 * pauli(1)};
  };
  S.cells = {0};
  return S;
}

}  // namespace

TEST_CASE("translation invariant on-site symbol gives block diagonal sigma3") {
  Symbol S = model_constant(pauli(3), 2);
  auto H = quantize(S, {0, RVector(0)}, 1.0, LatticeRegion::open_box({3, 4})).dense();
  CHECK(H.rows() == 24);
  CMatrix expect = kron(identity(12), pauli(3));
  CHECK(max_abs(H - expect) == 0.0);
}

TEST_CASE("periodic chain: spectrum equals the discrete Fourier oracle") {
  Symbol S = hop_chain();
  const int L = 4;
  auto H = quantize(S, {0, RVector(0)}, 1.0, LatticeRegion::make({L}, {true}));
  std::vector<RVector> parts;
  for (int m = 0; m < L; ++m) parts.push_back(spectrum(eval_symbol(S, {0, RVector(0)}, kv({2 * kPi * m / L}))));
  RVector oracle = concat(parts);
  RVector got = sorted(spectrum(H.dense()));
  CHECK((got - oracle).cwiseAbs().maxCoeff() < 1e-12);
  // Circulant check by hand: eigenvalues are +-cos(2 pi m / L).
  std::vector<double> hand;
  for (int m = 0; m < L; ++m) {
    hand.push_back(std::cos(2 * kPi * m / L));
    hand.push_back(-std::cos(2 * kPi * m / L));
  }
  std::sort(hand.begin(), hand.end());
  for (int i = 0; i < 2 * L; ++i) CHECK(std::abs(got[i] - hand[i]) < 1e-12);
}

TEST_CASE("bulk consistency on full periodic regions") {
  std::vector<Symbol> models = {model_qwz(1.0), model_qwz(-2.5), model_corner_quarter(1.5)};
  for (auto& S : models) {
    const int L = 6;
    int cell = S.space->zero_cells()[0];
    auto H = quantize(S, {cell, RVector(0)}, 1.0, LatticeRegion::make({L, L}, {true, true}));
    std::vector<RVector> parts;
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b)
        parts.push_back(spectrum(eval_symbol(S, {cell, RVector(0)}, kv({2 * kPi * a / L, 2 * kPi * b / L}))));
    CHECK((sorted(spectrum(H.dense())) - concat(parts)).cwiseAbs().maxCoeff() < 1e-10);
  }
  Symbol Hs = model_hinge_square(1.0, {1, 1, -1, -1});
  const int L = 4;
  auto H = quantize(Hs, {0, RVector(0)}, 1.0, LatticeRegion::make({L, L, L}, {true, true, true}));
  std::vector<RVector> parts;
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b)
      for (int c = 0; c < L; ++c)
        parts.push_back(spectrum(hinge::bulk(kv({2 * kPi * a / L, 2 * kPi * b / L, 2 * kPi * c / L}))));
  CHECK((sorted(spectrum(H.dense())) - concat(parts)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("matrix elements follow the symmetrized formula") {
  Symbol S = model_interface(model_qwz(1.0), model_qwz(-1.0), kv({1.0, 1.0}));
  const int r = S.space->cell_id("R");
  const double t = 0.3;
  ConfigPoint w{r, kv({-0.7})};
  auto R = LatticeRegion::open_box({5, 4});
  CMatrix H = quantize(S, w, t, R).dense();
  const int N = S.N;
  auto f_at = [&](const IVector& x, const IVector& q) -> CMatrix {
    auto f = S.coeffs(translate(*S.space, w, t * x.cast<double>()));
    for (std::size_t i = 0; i < S.support.size(); ++i)
      if (S.support[i] == q) return f[i];
    return CMatrix::Zero(N, N);
  };
  double worst = 0.0;
  for (long a = 0; a < R.sites(); ++a)
    for (long b = 0; b < R.sites(); ++b) {
      IVector x = R.coords(a), y = R.coords(b);
      CMatrix expect = 0.5 * (f_at(x, x - y) + f_at(y, y - x).adjoint());
      worst = std::max(worst, max_abs(H.block(a * N, b * N, N, N) - expect));
    }
  CHECK(worst < 1e-15);
}

TEST_CASE("small t: neighbouring blocks vary by O(t)") {
  Symbol S = model_interface(model_qwz(1.0), model_qwz(-1.0), kv({1.0, 0.0}));
  const int r = S.space->cell_id("R");
  for (double t : {0.1, 0.05, 0.025}) {
    auto R = LatticeRegion::open_box({9, 1});
    CMatrix H = quantize(S, {r, kv({0.0})}, t, R).dense();
    double worst = 0.0;
    for (int i = 0; i + 1 < 9; ++i)
      worst = std::max(worst, max_abs(H.block(i * 2, i * 2, 2, 2) - H.block((i + 1) * 2, (i + 1) * 2, 2, 2)));
    CHECK(worst <= 1.1 * t);
    CHECK(worst > 0.0);
  }
}

TEST_CASE("bloch reduction") {
  SUBCASE("point space reduces to eval_symbol") {
    Symbol S = model_qwz(1.0);
    auto setup = bloch_setup(S, 0);
    CHECK(setup.isotropy.size() == 2);
    CHECK(setup.transverse.empty());
    RVector k = kv({0.4, -1.3});
    auto H = quantize_bloch(S, {0, RVector(0)}, 1.0, LatticeRegion::make({}, {}), k, setup);
    CHECK(max_abs(H.dense() - eval_symbol(S, {0, RVector(0)}, k)) < 1e-14);
  }
  SUBCASE("interface cylinder matches the periodic strip") {
    Symbol S = model_interface(model_qwz(1.0), model_qwz(-1.0), kv({1.0, 0.0}));
    const int r = S.space->cell_id("R");
    auto setup = bloch_setup(S, r);
    REQUIRE(setup.isotropy.size() == 1);
    ConfigPoint w{r, kv({-4.0})};
    const int L1 = 10, L2 = 6;
    const double t = 0.8;
    auto full = quantize(S, w, t, LatticeRegion::make({L1, L2}, {false, true}));
    std::vector<RVector> parts;
    auto perp = LatticeRegion::open_box({L1});
    for (int j = 0; j < L2; ++j)
      parts.push_back(spectrum(quantize_bloch(S, w, t, perp, kv({2 * kPi * j / L2}), setup).dense()));
    CHECK((sorted(spectrum(full.dense())) - concat(parts)).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("hinge 2-cell: k3 slices against the full 3d lattice") {
    Symbol S = model_hinge_square(1.0, {1, 1, -1, -1});
    const int c = S.space->cell_id("R12");
    auto setup = bloch_setup(S, c);
    REQUIRE(setup.isotropy.size() == 1);
    CHECK(std::abs(setup.isotropy[0][2]) == 1);
    ConfigPoint w{c, kv({-2.0, -2.5})};
    const double t = 0.5;
    const int L = 4, L3 = 4;
    auto full = quantize(S, w, t, LatticeRegion::make({L, L, L3}, {false, false, true}));
    auto perp = LatticeRegion::open_box({L, L});
    std::vector<RVector> parts;
    for (int j = 0; j < L3; ++j)
      parts.push_back(spectrum(quantize_bloch(S, w, t, perp, kv({2 * kPi * j / L3}), setup).dense()));
    CHECK((sorted(spectrum(full.dense())) - concat(parts)).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("irrational cell is rejected") {
    Symbol S = model_interface(model_qwz(1.0), model_qwz(-1.0), kv({1.0, std::sqrt(2.0)}));
    CHECK_THROWS_AS(bloch_setup(S, S.space->cell_id("R")), QuantizeError);
  }
}

TEST_CASE("covariance") {
  Symbol P = model_qwz(1.0);
  CHECK(covariance_check(P, {0, RVector(0)}, iv({1, 2}), 1.0, LatticeRegion::open_box({6, 6})) == 0.0);

  Symbol I = model_interface(model_qwz(1.0), model_qwz(-1.0), kv({1.0, 0.0}));
  const int r = I.space->cell_id("R");
  CHECK(covariance_check(I, {r, kv({-2.0})}, iv({1, 0}), 1.0, LatticeRegion::open_box({8, 4})) <= 1e-12);

  Symbol Q = model_corner_quarter(1.5);
  const int q = Q.space->cell_id("R12");
  CHECK(covariance_check(Q, {q, kv({-1.0, -1.5})}, iv({2, 3}), 0.5, LatticeRegion::open_box({8, 8})) <= 1e-12);

  // Region too small for the shift.
  CHECK_THROWS_AS(covariance_check(Q, {q, kv({0.0, 0.0})}, iv({9, 0}), 0.5, LatticeRegion::open_box({8, 8})),
                  QuantizeError);
  CHECK_THROWS_AS(covariance_check(P, {0, RVector(0)}, iv({1, 0}), 1.0, LatticeRegion::make({6, 6}, {true, false})),
                  QuantizeError);
}

TEST_CASE("padding truncation") {
  Symbol S = model_corner_quarter(1.5);
  const int q = S.space->cell_id("R12");
  const int L = 10;
  auto H = quantize(S, {q, kv({-2.0, -2.0})}, 0.5, LatticeRegion::open_box({L, L}));
  const CMatrix Sp = corner::endpoint();

  auto all = truncate_with_padding(H, [](const IVector&) { return true; }, Sp);
  CHECK(max_abs(all.dense() - H.dense()) == 0.0);

  auto none = truncate_with_padding(H, [](const IVector&) { return false; }, Sp);
  CHECK(max_abs(none.dense() - kron(identity(L * L), Sp)) == 0.0);
  RVector pe = spectrum(Sp);
  RVector ne = sorted(spectrum(none.dense()));
  for (int i = 0; i < ne.size(); ++i) CHECK(std::abs(std::abs(ne[i]) - std::abs(pe[0])) < 1e-12);

  // Quarter mask: the low-lying spectrum of the padded operator is that of
  // the extracted block, since spec(S_pad) = +-sqrt(2).
  auto mask = [](const IVector& n) { return n[0] >= 3 && n[1] >= 3; };
  auto P = truncate_with_padding(H, mask, Sp);
  std::vector<long> keep;
  for (long i = 0; i < H.region.sites(); ++i)
    if (mask(H.region.coords(i))) keep.push_back(i);
  const int N = S.N;
  CMatrix D = H.dense(), sub(keep.size() * N, keep.size() * N);
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = 0; b < keep.size(); ++b) sub.block(a * N, b * N, N, N) = D.block(keep[a] * N, keep[b] * N, N, N);
  auto low = [](const RVector& e) {
    std::vector<double> v;
    for (int i = 0; i < e.size(); ++i)
      if (std::abs(e[i]) < 1.0) v.push_back(e[i]);
    return v;
  };
  auto lp = low(spectrum(P.dense())), ls = low(spectrum(sub));
  REQUIRE(lp.size() == ls.size());
  CHECK(!lp.empty());
  for (std::size_t i = 0; i < lp.size(); ++i) CHECK(std::abs(lp[i] - ls[i]) < 1e-10);

  CHECK_THROWS_AS(truncate_with_padding(H, mask, CMatrix::Zero(4, 4)), QuantizeError);
  CHECK_THROWS_AS(truncate_with_padding(H, mask, pauli(3)), QuantizeError);
}

TEST_CASE("hermiticity and locality of every quantization") {
  struct Case {
    Symbol S;
    ConfigPoint w;
    double t;
    LatticeRegion R;
  };
  Symbol I = model_interface(model_qwz(1.0), model_qwz(-1.0), kv({2.0, 1.0}));
  Symbol Q = model_corner_quarter(1.5);
  Symbol Hs = model_hinge_square(1.0, {1, -1, -1, 1});
  Symbol D = model_dirac_defect(2, 2);
  std::vector<Case> cases = {
      {model_qwz(1.0), {0, RVector(0)}, 1.0, LatticeRegion::make({5, 6}, {true, false})},
      {I, {I.space->cell_id("R"), kv({-3.0})}, 0.6, LatticeRegion::make({7, 5}, {false, true})},
      {Q, {Q.space->cell_id("R12"), kv({-2.0, -1.0})}, 0.4, LatticeRegion::open_box({7, 7})},
      {Hs, {Hs.space->cell_id("R23"), kv({-1.0, -1.0})}, 0.7, LatticeRegion::make({4, 4, 3}, {false, false, true})},
      {D, {D.space->cell_id("D"), kv({-2.0, -2.0})}, 0.5, LatticeRegion::open_box({6, 6})},
  };
  for (auto& c : cases) {
    auto H = quantize(c.S, c.w, c.t, c.R);
    CHECK(hermiticity_defect(H.dense()) <= 1e-12);
    CHECK(locality_defect(H, c.S) == 0.0);
    auto Hser = quantize(c.S, c.w, c.t, c.R, Exec::serial);
    CHECK(max_abs(Hser.dense() - H.dense()) == 0.0);
  }
  // Tilted basis: next-nearest hops in lattice coordinates, still local.
  Eigen::MatrixXi B(2, 2);
  B << 1, 1, 0, 1;
  auto R = LatticeRegion::open_box({5, 5}).with_basis(B);
  auto H = quantize(I, {I.space->cell_id("R"), kv({-1.0})}, 0.5, R);
  CHECK(locality_defect(H, I) == 0.0);
  CHECK(hermiticity_defect(H.dense()) <= 1e-12);
}

TEST_CASE("quantize preconditions") {
  Symbol S = model_qwz(1.0);
  ConfigPoint w{0, RVector(0)};
  CHECK_THROWS_AS(quantize(S, w, 0.0, LatticeRegion::open_box({3, 3})), QuantizeError);
  CHECK_THROWS_AS(quantize(S, w, 1.5, LatticeRegion::open_box({3, 3})), QuantizeError);
  CHECK_THROWS_AS(quantize(S, w, 1.0, LatticeRegion::make({2, 3}, {true, false})), QuantizeError);
  CHECK_THROWS_AS(quantize(S, w, 1.0, LatticeRegion::open_box({3})), QuantizeError);
  CHECK_THROWS_AS(LatticeRegion::open_box({0, 3}), QuantizeError);
  Eigen::MatrixXi B(2, 2);
  B << 2, 0, 0, 1;
  CHECK_THROWS_AS(LatticeRegion::open_box({3, 3}).with_basis(B), QuantizeError);
}

TEST_CASE("lattice region indexing") {
  auto R = LatticeRegion::open_box({3, 4, 5});
  CHECK(R.sites() == 60);
  for (long i = 0; i < R.sites(); ++i) CHECK(R.index(R.coords(i)) == i);
  CHECK(R.coords(1) == iv({0, 0, 1}));
}

TEST_CASE("gap persistence below the bisected t0") {
  Symbol S = model_corner_quarter(1.5);
  double g = gap_on(S, S.space->cells_up_to(1), 24, 41).min_gap;
  auto b = gap_bisection(S, S.space->cells_up_to(1), 0.5 * g);
  REQUIRE(b.ok);
  CHECK(b.t0 > 0.05);
  CHECK(b.t0 <= 1.0);
  CHECK(b.gap_at_t0 >= 0.5 * g);
  for (double f : {0.5, 0.75})
    for (int c : S.space->skeleton.at(1)) CHECK(chain_gap(S, c, f * b.t0) >= 0.5 * g);
}
