#include "adq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace adq {

double max_abs(const CMatrix& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const CMatrix& A) { return max_abs(A - A.adjoint()); }

bool is_hermitian(const CMatrix& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  double scale = std::max(max_abs(A), 1.0);
  return hermiticity_defect(A) <= rel_tol * scale;
}

double unitarity_defect(const CMatrix& U) {
  return max_abs(U.adjoint() * U - CMatrix::Identity(U.cols(), U.cols()));
}

CMatrix pauli(int i) {
  CMatrix s(2, 2);
  switch (i) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I, I, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw LinalgError("pauli index out of range");
  }
  return s;
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
  CMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

CMatrix identity(int n) { return CMatrix::Identity(n, n); }

namespace {

std::vector<CMatrix> clifford_odd(int m) {
  if (m == 1) return {pauli(3)};
  if (m == 3) return {pauli(1), pauli(2), pauli(3)};
  auto base = clifford_odd(m - 2);
  int n = static_cast<int>(base[0].rows());
  std::vector<CMatrix> out;
  for (auto& g : base) out.push_back(kron(pauli(1), g));
  out.push_back(kron(pauli(2), identity(n)));
  out.push_back(kron(pauli(3), identity(n)));
  return out;
}

}  // namespace

std::vector<CMatrix> clifford_generators(int m) {
  if (m < 1 || m > 8) throw LinalgError("clifford_generators: m must be in 1..8");
  if (m % 2 == 1) return clifford_odd(m);
  auto out = clifford_odd(m + 1);
  out.pop_back();
  return out;
}

SparseHermitian SparseHermitian::from_triplets(int dim, std::vector<Entry> entries) {
  SparseHermitian S(dim);
  std::map<std::pair<int, int>, cplx> acc;
  for (auto& e : entries) {
    if (e.row < 0 || e.col < 0 || e.row >= dim || e.col >= dim)
      throw LinalgError("SparseHermitian: index out of range");
    if (e.row <= e.col)
      acc[{e.row, e.col}] += e.value;
    else
      acc[{e.col, e.row}] += std::conj(e.value);
  }
  S.entries_.reserve(acc.size());
  for (auto& [key, v] : acc) {
    cplx val = v;
    if (key.first == key.second) {
      if (std::abs(val.imag()) > 1e-12 * std::max(1.0, std::abs(val)))
        throw LinalgError("SparseHermitian: diagonal entry not real");
      val = cplx(val.real(), 0.0);
    }
    S.entries_.push_back({key.first, key.second, val});
  }
  return S;
}

SparseHermitian SparseHermitian::from_dense(const CMatrix& A, double drop_tol) {
  if (!is_hermitian(A)) throw LinalgError("SparseHermitian::from_dense: not hermitian");
  SparseHermitian S(static_cast<int>(A.rows()));
  for (int r = 0; r < A.rows(); ++r)
    for (int c = r; c < A.cols(); ++c) {
      cplx v = (A(r, c) + std::conj(A(c, r))) * 0.5;
      if (std::abs(v) > drop_tol) S.entries_.push_back({r, c, r == c ? cplx(v.real(), 0) : v});
    }
  return S;
}

CMatrix SparseHermitian::to_dense() const {
  CMatrix A = CMatrix::Zero(dim_, dim_);
  for (auto& e : entries_) {
    A(e.row, e.col) = e.value;
    if (e.row != e.col) A(e.col, e.row) = std::conj(e.value);
  }
  return A;
}

Eigen::SparseMatrix<cplx> SparseHermitian::to_sparse() const {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(2 * entries_.size());
  for (auto& e : entries_) {
    t.emplace_back(e.row, e.col, e.value);
    if (e.row != e.col) t.emplace_back(e.col, e.row, std::conj(e.value));
  }
  Eigen::SparseMatrix<cplx> M(dim_, dim_);
  M.setFromTriplets(t.begin(), t.end());
  M.makeCompressed();
  return M;
}

cplx SparseHermitian::operator()(int r, int c) const {
  bool flip = r > c;
  if (flip) std::swap(r, c);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(r, c),
                             [](const Entry& e, const std::pair<int, int>& k) {
                               return std::make_pair(e.row, e.col) < k;
                             });
  if (it == entries_.end() || it->row != r || it->col != c) return 0.0;
  return flip ? std::conj(it->value) : it->value;
}

namespace {

EigResult eig_lapack(const CMatrix& H) {
  int n = static_cast<int>(H.rows());
  CMatrix A = H;
  RVector w(n);
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, A.data(), n, w.data());
  if (info != 0) throw LinalgError("zheevd failed with info " + std::to_string(info));
  return {w, A};
}

}  // namespace

EigResult eig_hermitian(const CMatrix& H) {
  if (H.rows() != H.cols()) throw LinalgError("eig_hermitian: matrix not square");
  if (!is_hermitian(H, 1e-10)) throw LinalgError("eig_hermitian: matrix not hermitian");
  if (H.rows() == 0) return {RVector(0), CMatrix(0, 0)};
  if (H.rows() > 64) return eig_lapack(H);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  if (es.info() != Eigen::Success) throw LinalgError("eig_hermitian: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigResult eig_hermitian(const SparseHermitian& H) { return eig_hermitian(H.to_dense()); }

EigResult eig_hermitian_near(const SparseHermitian& H, int k, double sigma, unsigned seed) {
  const int n = H.dim();
  if (k <= 0 || k > n) throw LinalgError("eig_hermitian_near: bad k");
  if (n <= 4 * k + 16) {
    auto full = eig_hermitian(H.to_dense());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return std::abs(full.values[a] - sigma) < std::abs(full.values[b] - sigma);
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    EigResult r{RVector(k), CMatrix(n, k)};
    for (int i = 0; i < k; ++i) {
      r.values[i] = full.values[idx[i]];
      r.vectors.col(i) = full.vectors.col(idx[i]);
    }
    return r;
  }

  Eigen::SparseMatrix<cplx> A = H.to_sparse();
  Eigen::SparseMatrix<cplx> Id(n, n);
  Id.setIdentity();
  Eigen::SparseMatrix<cplx> shifted = A - cplx(sigma) * Id;
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw LinalgError("eig_hermitian_near: factorization failed");

  // Lanczos on (H - sigma)^-1 with full reorthogonalization; restart-free, so
  // the Krylov dimension is taken generously.
  const int m = std::min(n, std::max(6 * k, k + 60));
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  CMatrix Q(n, m + 1);
  CVector q(n);
  for (int i = 0; i < n; ++i) q[i] = cplx(nd(rng), nd(rng));
  q.normalize();
  Q.col(0) = q;
  RVector alpha(m), beta(m);
  int used = m;
  for (int j = 0; j < m; ++j) {
    CVector w = lu.solve(Q.col(j));
    alpha[j] = Q.col(j).dot(w).real();
    for (int pass = 0; pass < 2; ++pass)
      w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).adjoint() * w);
    beta[j] = w.norm();
    if (beta[j] < 1e-13) {
      used = j + 1;
      break;
    }
    Q.col(j + 1) = w / beta[j];
  }
  RMatrix T = RMatrix::Zero(used, used);
  for (int j = 0; j < used; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < used) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(T);
  // Largest |theta| of the inverse are the eigenvalues closest to sigma.
  std::vector<int> idx(used);
  for (int i = 0; i < used; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
  });
  int kk = std::min(k, used);
  std::vector<std::pair<double, CVector>> pairs;
  for (int i = 0; i < kk; ++i) {
    CVector v = Q.leftCols(used) * es.eigenvectors().col(idx[i]).cast<cplx>();
    v.normalize();
    // Rayleigh quotient on the original operator for the final value.
    CVector Hv = A * v;
    pairs.emplace_back(v.dot(Hv).real(), v);
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  EigResult r{RVector(kk), CMatrix(n, kk)};
  for (int i = 0; i < kk; ++i) {
    r.values[i] = pairs[i].first;
    r.vectors.col(i) = pairs[i].second;
  }
  return r;
}

CMatrix matrix_function(const EigResult& eig, const std::function<cplx(double)>& f) {
  CVector fv(eig.values.size());
  for (int i = 0; i < eig.values.size(); ++i) {
    cplx v = f(eig.values[i]);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw LinalgError("matrix_function: f undefined on an eigenvalue");
    fv[i] = v;
  }
  return eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
}

CMatrix matrix_function(const CMatrix& H, const std::function<double(double)>& f) {
  return matrix_function(eig_hermitian(H), [&](double x) { return cplx(f(x), 0.0); });
}

CMatrix matrix_function_complex(const CMatrix& H, const std::function<cplx(double)>& f) {
  return matrix_function(eig_hermitian(H), f);
}

CMatrix matrix_log_gl(const CMatrix& A) {
  if (A.rows() != A.cols()) throw LinalgError("matrix_log_gl: matrix not square");
  Eigen::ComplexEigenSolver<CMatrix> es(A);
  if (es.info() != Eigen::Success) throw LinalgError("matrix_log_gl: eigensolver failed");
  const CVector& lam = es.eigenvalues();
  double scale = std::max(1.0, max_abs(A));
  CVector logs(lam.size());
  for (int i = 0; i < lam.size(); ++i) {
    if (std::abs(lam[i]) < 1e-12 * scale) throw LinalgError("matrix_log_gl: singular matrix");
    if (std::abs(lam[i].real()) < 1e-12 * std::abs(lam[i]) && lam[i].imag() < 0)
      throw LinalgError("matrix_log_gl: eigenvalue on the branch cut");
    double a = std::arg(lam[i]);
    if (a <= -kPi / 2) a += 2 * kPi;
    logs[i] = cplx(std::log(std::abs(lam[i])), a);
  }
  const CMatrix& V = es.eigenvectors();
  Eigen::PartialPivLU<CMatrix> lu(V);
  if (std::abs(lu.determinant()) < 1e-12)
    throw LinalgError("matrix_log_gl: matrix not diagonalizable to working precision");
  return V * logs.asDiagonal() * lu.inverse();
}

CMatrix matrix_exp(const CMatrix& A) { return A.exp(); }

CMatrix fermi_projection(const EigResult& eig, double gap_tol) {
  int n = static_cast<int>(eig.values.size());
  CMatrix P = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (std::abs(eig.values[i]) <= gap_tol) throw LinalgError("fermi_projection: gapless");
    if (eig.values[i] < 0) P += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
  }
  return P;
}

CMatrix fermi_projection(const CMatrix& H, double gap_tol) {
  return fermi_projection(eig_hermitian(H), gap_tol);
}

CMatrix fermi_unitary(const CMatrix& H, const CMatrix& J, double gap_tol) {
  if (max_abs(J * H + H * J) > 1e-10 * std::max(1.0, max_abs(H)))
    throw LinalgError("fermi_unitary: H is not chirally symmetric");
  int n = static_cast<int>(H.rows());
  int h = n / 2;
  CMatrix Jstd = CMatrix::Zero(n, n);
  Jstd.diagonal().head(h).setOnes();
  Jstd.diagonal().tail(n - h).setConstant(-1.0);
  if (max_abs(J - Jstd) > 1e-12) throw LinalgError("fermi_unitary: J must be diag(1,-1) grading");
  auto eig = eig_hermitian(H);
  for (int i = 0; i < n; ++i)
    if (std::abs(eig.values[i]) <= gap_tol) throw LinalgError("fermi_unitary: gapless");
  CMatrix S = matrix_function(eig, [](double x) { return cplx(x > 0 ? 1.0 : -1.0, 0.0); });
  return S.block(h, 0, n - h, h);
}

double spectral_gap(const CMatrix& H) {
  auto eig = eig_hermitian(H);
  return eig.values.cwiseAbs().minCoeff();
}

}  // namespace adq
