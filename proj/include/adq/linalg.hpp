#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace adq {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// Default threshold separating zero modes from gapped spectrum.
inline constexpr double kGapTol = 1e-8;

enum class Exec { serial, parallel };

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Max-entry norm, the norm used by every tolerance in this library.
double max_abs(const CMatrix& A);
double hermiticity_defect(const CMatrix& A);
bool is_hermitian(const CMatrix& A, double rel_tol = 1e-12);
double unitarity_defect(const CMatrix& U);

CMatrix pauli(int i);
CMatrix kron(const CMatrix& A, const CMatrix& B);
CMatrix identity(int n);

// Hermitian involutions of dimension 2^floor(m/2), pairwise anticommuting.
// m <= 8.
std::vector<CMatrix> clifford_generators(int m);

// Upper-triangle storage of a Hermitian matrix.
class SparseHermitian {
 public:
  struct Entry {
    int row;
    int col;
    cplx value;
  };

  SparseHermitian() = default;
  explicit SparseHermitian(int dim) : dim_(dim) {}

  // Entries with row > col are conjugated onto the upper triangle; duplicates
  // are summed.
  static SparseHermitian from_triplets(int dim, std::vector<Entry> entries);
  static SparseHermitian from_dense(const CMatrix& A, double drop_tol = 0.0);

  int dim() const { return dim_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  CMatrix to_dense() const;
  Eigen::SparseMatrix<cplx> to_sparse() const;
  cplx operator()(int r, int c) const;

 private:
  int dim_ = 0;
  std::vector<Entry> entries_;  // sorted by (row, col), row <= col
};

struct EigResult {
  RVector values;   // ascending
  CMatrix vectors;  // columns
};

// Dense Hermitian eigendecomposition. Small matrices use Eigen, larger ones
// LAPACK zheevd.
EigResult eig_hermitian(const CMatrix& H);
EigResult eig_hermitian(const SparseHermitian& H);

// The k eigenpairs closest to sigma, by shift-invert Lanczos with full
// reorthogonalization.  Sorted ascending.
EigResult eig_hermitian_near(const SparseHermitian& H, int k, double sigma = 0.0,
                             unsigned seed = 7);

CMatrix matrix_function(const CMatrix& H, const std::function<double(double)>& f);
CMatrix matrix_function_complex(const CMatrix& H, const std::function<cplx(double)>& f);
CMatrix matrix_function(const EigResult& eig, const std::function<cplx(double)>& f);

// Logarithm with branch cut on the negative imaginary axis: arg in (-pi/2, 3pi/2].
CMatrix matrix_log_gl(const CMatrix& A);
CMatrix matrix_exp(const CMatrix& A);

CMatrix fermi_projection(const CMatrix& H, double gap_tol = kGapTol);
CMatrix fermi_projection(const EigResult& eig, double gap_tol = kGapTol);

// Lower-left block of sign(H) in the grading of J = diag(1,...,-1,...).
CMatrix fermi_unitary(const CMatrix& H, const CMatrix& J, double gap_tol = kGapTol);

// Smallest |eigenvalue|.
double spectral_gap(const CMatrix& H);

}  // namespace adq
