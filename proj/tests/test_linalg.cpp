#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "adq/linalg.hpp"

using namespace adq;

namespace {

CMatrix random_hermitian(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (A + A.adjoint());
}

CMatrix diag(std::initializer_list<cplx> v) {
  CVector d(v.size());
  int i = 0;
  for (cplx x : v) d[i++] = x;
  return d.asDiagonal();
}

}  // namespace

TEST_CASE("pauli matrices") {
  CMatrix s1(2, 2), s3(2, 2);
  s1 << 0, 1, 1, 0;
  s3 << 1, 0, 0, -1;
  CHECK(max_abs(pauli(1) - s1) == 0.0);
  CHECK(max_abs(pauli(3) - s3) == 0.0);
  CHECK(max_abs(pauli(0) - identity(2)) == 0.0);
  CHECK(max_abs(pauli(2) * pauli(2) - identity(2)) < 1e-15);
  for (int i = 0; i < 4; ++i) CHECK(is_hermitian(pauli(i)));
  CHECK_THROWS_AS(pauli(4), LinalgError);
  CHECK_THROWS_AS(pauli(-1), LinalgError);
}

TEST_CASE("kron") {
  CHECK(max_abs(kron(pauli(3), identity(2)) - diag({1, 1, -1, -1})) == 0.0);
  CHECK(max_abs(kron(identity(2), identity(2)) - identity(4)) == 0.0);
  CMatrix m = kron(pauli(1), pauli(1));
  CHECK(max_abs(m * m - identity(4)) == 0.0);
  CHECK(kron(identity(3), identity(2)).rows() == 6);
}

TEST_CASE("clifford generators") {
  auto g1 = clifford_generators(1);
  REQUIRE(g1.size() == 1);
  CHECK(max_abs(g1[0] - pauli(3)) == 0.0);
  auto g3 = clifford_generators(3);
  for (int i = 0; i < 3; ++i) CHECK(max_abs(g3[i] - pauli(i + 1)) == 0.0);
  auto g5 = clifford_generators(5);
  std::vector<CMatrix> expect = {kron(pauli(1), pauli(1)), kron(pauli(1), pauli(2)), kron(pauli(1), pauli(3)),
                                 kron(pauli(2), pauli(0)), kron(pauli(3), pauli(0))};
  for (int i = 0; i < 5; ++i) CHECK(max_abs(g5[i] - expect[i]) == 0.0);
  for (int m = 1; m <= 8; ++m) {
    auto g = clifford_generators(m);
    REQUIRE(static_cast<int>(g.size()) == m);
    const int dim = m == 1 ? 2 : 1 << (m / 2);
    for (int i = 0; i < m; ++i) {
      CHECK(g[i].rows() == dim);
      CHECK(is_hermitian(g[i]));
      CHECK(max_abs(g[i] * g[i] - identity(dim)) <= 1e-12);
      for (int j = 0; j < i; ++j) CHECK(max_abs(g[i] * g[j] + g[j] * g[i]) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(clifford_generators(0), LinalgError);
  CHECK_THROWS_AS(clifford_generators(9), LinalgError);
}

TEST_CASE("eig_hermitian examples") {
  auto e = eig_hermitian(CMatrix(pauli(3)));
  CHECK(e.values[0] == doctest::Approx(-1.0));
  CHECK(e.values[1] == doctest::Approx(1.0));

  // sigma1 x (sigma1 + sigma3) squares to 2, traceless: -sqrt2 twice, +sqrt2 twice.
  CMatrix H = kron(pauli(1), pauli(1) + pauli(3));
  REQUIRE(max_abs(H * H - 2.0 * identity(4)) < 1e-14);
  auto e4 = eig_hermitian(H);
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < 4; ++i) CHECK(e4.values[i] == doctest::Approx(i < 2 ? -r2 : r2).epsilon(1e-14));
  CHECK(max_abs(H * e4.vectors - e4.vectors * e4.values.cast<cplx>().asDiagonal()) <= 1e-9 * max_abs(H));

  auto ez = eig_hermitian(CMatrix(CMatrix::Zero(3, 3)));
  CHECK(ez.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(unitarity_defect(ez.vectors) < 1e-14);

  CMatrix bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(eig_hermitian(bad), LinalgError);
}

TEST_CASE("eig_hermitian residual, dense and sparse, small and LAPACK sizes") {
  std::mt19937 rng(3);
  for (int n : {5, 40, 90}) {
    CMatrix H = random_hermitian(n, rng);
    auto e = eig_hermitian(H);
    CHECK(max_abs(H * e.vectors - e.vectors * e.values.cast<cplx>().asDiagonal()) <= 1e-9 * max_abs(H));
    CHECK(unitarity_defect(e.vectors) < 1e-10);
    for (int i = 1; i < n; ++i) CHECK(e.values[i - 1] <= e.values[i]);
    auto es = eig_hermitian(SparseHermitian::from_dense(H));
    CHECK((es.values - e.values).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("eig_hermitian_near agrees with dense eigenvalues near the shift") {
  std::mt19937 rng(4);
  CMatrix H = random_hermitian(60, rng);
  auto dense = eig_hermitian(H);
  auto near = eig_hermitian_near(SparseHermitian::from_dense(H), 4, 0.0);
  std::vector<double> by_abs(dense.values.data(), dense.values.data() + dense.values.size());
  std::sort(by_abs.begin(), by_abs.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  std::vector<double> want(by_abs.begin(), by_abs.begin() + 4);
  std::sort(want.begin(), want.end());
  for (int i = 0; i < 4; ++i) CHECK(near.values[i] == doctest::Approx(want[i]).epsilon(1e-9));
  for (int i = 0; i < 4; ++i) {
    CVector v = near.vectors.col(i);
    CHECK((H * v - near.values[i] * v).norm() < 1e-8);
  }
}

TEST_CASE("sparse hermitian storage") {
  std::vector<SparseHermitian::Entry> e = {{0, 1, cplx(1, 2)}, {1, 0, cplx(3, 0)}, {1, 1, cplx(2, 0)}, {0, 1, cplx(0, 1)}};
  auto S = SparseHermitian::from_triplets(2, e);
  // (1,0) folds onto (0,1) conjugated; duplicates sum.
  CHECK(S.nnz() == 2);
  CHECK(S(0, 1) == cplx(4, 3));
  CHECK(S(1, 0) == cplx(4, -3));
  CHECK(S(1, 1) == cplx(2, 0));
  for (std::size_t i = 1; i < S.entries().size(); ++i) {
    auto a = S.entries()[i - 1], b = S.entries()[i];
    CHECK((a.row < b.row || (a.row == b.row && a.col < b.col)));
  }
  for (auto& x : S.entries()) CHECK(x.row <= x.col);
  CHECK(hermiticity_defect(S.to_dense()) == 0.0);
  CHECK(max_abs(CMatrix(S.to_sparse()) - S.to_dense()) == 0.0);
}

TEST_CASE("matrix_function examples") {
  auto sign = [](double x) { return x > 0 ? 1.0 : -1.0; };
  CHECK(max_abs(matrix_function(CMatrix(pauli(3)), sign) - pauli(3)) < 1e-14);
  auto ph = matrix_function_complex(CMatrix(pauli(3)), [&](double x) { return std::exp(I * kPi * sign(x)); });
  CHECK(max_abs(ph + identity(2)) < 1e-14);
  CHECK(max_abs(matrix_function(CMatrix(pauli(1)), [](double x) { return x * x; }) - identity(2)) < 1e-14);
  // Cubic on a random 4x4 matches the polynomial evaluated directly.
  std::mt19937 rng(5);
  CMatrix H = random_hermitian(4, rng);
  CMatrix direct = H * H * H - 2.0 * H + identity(4);
  CHECK(max_abs(matrix_function(H, [](double x) { return x * x * x - 2 * x + 1; }) - direct) < 1e-10);
}

TEST_CASE("matrix_log_gl") {
  CHECK(max_abs(matrix_log_gl(identity(2))) < 1e-14);
  CMatrix A = diag({std::exp(1.0), std::exp(2.0)});
  CHECK(max_abs(matrix_log_gl(A) - diag({1.0, 2.0})) < 1e-12);

  // sigma1 + sigma3 = sqrt2 * (reflection): eigenvalues +-sqrt2.  The cut on
  // the negative imaginary axis sends -sqrt2 to ln sqrt2 + i pi.
  CMatrix B = pauli(1) + pauli(3);
  CMatrix L = matrix_log_gl(B);
  Eigen::ComplexEigenSolver<CMatrix> es(L);
  std::vector<cplx> ev = {es.eigenvalues()[0], es.eigenvalues()[1]};
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  CHECK(std::abs(ev[0] - cplx(std::log(std::sqrt(2.0)), 0.0)) < 1e-12);
  CHECK(std::abs(ev[1] - cplx(std::log(std::sqrt(2.0)), kPi)) < 1e-12);
  CHECK(max_abs(matrix_exp(L) - B) < 1e-9 * max_abs(B));

  CHECK_THROWS_AS(matrix_log_gl(CMatrix(CMatrix::Zero(2, 2))), LinalgError);
  CHECK_THROWS_AS(matrix_log_gl(diag({cplx(0, -1), 1.0})), LinalgError);
}

TEST_CASE("matrix_log_gl round trip on random invertible matrices") {
  std::mt19937 rng(6);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix A(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) A(i, j) = cplx(g(rng), g(rng));
    A += 3.0 * identity(4);
    CHECK(max_abs(matrix_exp(matrix_log_gl(A)) - A) <= 1e-9 * max_abs(A));
  }
}

TEST_CASE("fermi_projection") {
  CHECK(max_abs(fermi_projection(CMatrix(pauli(3))) - diag({0.0, 1.0})) < 1e-14);
  CHECK(max_abs(fermi_projection(CMatrix(-identity(2))) - identity(2)) < 1e-14);
  CHECK(max_abs(fermi_projection(CMatrix(pauli(1))) - 0.5 * (identity(2) - pauli(1))) < 1e-14);
  CHECK_THROWS_AS(fermi_projection(CMatrix(CMatrix::Zero(2, 2))), LinalgError);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix H = random_hermitian(6, rng);
    if (spectral_gap(H) < 1e-3) continue;
    CMatrix P = fermi_projection(H);
    CHECK(max_abs(P * P - P) < 1e-10);
    CHECK(hermiticity_defect(P) < 1e-10);
  }
}

TEST_CASE("fermi_unitary") {
  const CMatrix J = pauli(3);
  CHECK(std::abs(fermi_unitary(CMatrix(pauli(1)), J)(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(fermi_unitary(CMatrix(pauli(2)), J)(0, 0) - I) < 1e-14);

  CMatrix A = pauli(1) + pauli(3);
  CMatrix H = CMatrix::Zero(4, 4);
  H.topRightCorner(2, 2) = A.adjoint();
  H.bottomLeftCorner(2, 2) = A;
  CMatrix J4 = kron(pauli(3), pauli(0));
  // Polar part of A: A (A^* A)^{-1/2}, and A^* A = 2.
  CMatrix polar = A / std::sqrt(2.0);
  CMatrix u = fermi_unitary(H, J4);
  CHECK(max_abs(u - polar) < 1e-12);
  CHECK(unitarity_defect(u) < 1e-9);

  CHECK_THROWS_AS(fermi_unitary(CMatrix(pauli(3)), J), LinalgError);
}

TEST_CASE("fermi_unitary reconstructs sign(H) for random chiral H") {
  std::mt19937 rng(8);
  std::normal_distribution<double> g;
  const CMatrix J = kron(pauli(3), identity(3));
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix A(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A(i, j) = cplx(g(rng), g(rng));
    CMatrix H = CMatrix::Zero(6, 6);
    H.topRightCorner(3, 3) = A.adjoint();
    H.bottomLeftCorner(3, 3) = A;
    if (spectral_gap(H) < 1e-3) continue;
    CMatrix u = fermi_unitary(H, J);
    CHECK(unitarity_defect(u) <= 1e-9);
    CMatrix rebuilt = CMatrix::Zero(6, 6);
    rebuilt.topRightCorner(3, 3) = u.adjoint();
    rebuilt.bottomLeftCorner(3, 3) = u;
    CMatrix sign = matrix_function(H, [](double x) { return x > 0 ? 1.0 : -1.0; });
    CHECK(max_abs(rebuilt - sign) <= 1e-9);
  }
}
