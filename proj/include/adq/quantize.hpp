#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adq/symbols.hpp"

namespace adq {

class QuantizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Box of lattice sites n in prod [0, L_j), mapped to Z^d by x = basis * n.
// The basis is unimodular; the identity by default.
struct LatticeRegion {
  struct Dir {
    int L = 1;
    bool periodic = false;
  };
  int d = 0;
  std::vector<Dir> dirs;
  Eigen::MatrixXi basis;  // d x d, columns are the lattice directions

  static LatticeRegion open_box(const std::vector<int>& L);
  static LatticeRegion make(const std::vector<int>& L, const std::vector<bool>& periodic);
  LatticeRegion with_basis(const Eigen::MatrixXi& B) const;

  long sites() const;
  long index(const IVector& n) const;  // lexicographic, last direction fastest
  IVector coords(long i) const;
  IVector position(const IVector& n) const { return basis * n; }
};

struct LatticeHamiltonian {
  LatticeRegion region;
  int N = 0;
  SparseHermitian matrix;
  ConfigPoint omega;
  double t = 1.0;
  std::string symbol;
  std::optional<CMatrix> padding;

  int dim() const { return matrix.dim(); }
  CMatrix dense() const { return matrix.to_dense(); }
};

// <x|H|y> = 1/2 ( f_{x-y}(t x > w) + f_{y-x}(t y > w)^* ), with hops leaving an
// open direction dropped and periodic directions wrapped by minimal image.
LatticeHamiltonian quantize(const Symbol& S, const ConfigPoint& omega, double t,
                            const LatticeRegion& region, Exec exec = Exec::parallel);

// Bloch reduction along the isotropy lattice of omega's cell.  The region
// spans the transverse directions; hops with isotropy component m carry
// the phase exp(i k_par . m).
struct BlochSetup {
  std::vector<IVector> isotropy;    // b_1..b_r
  std::vector<IVector> transverse;  // completes to a unimodular basis
};
BlochSetup bloch_setup(const Symbol& S, int cell);

LatticeHamiltonian quantize_bloch(const Symbol& S, const ConfigPoint& omega, double t,
                                  const LatticeRegion& region_perp, const RVector& k_par,
                                  const BlochSetup& setup);

// Max block discrepancy between the x-shifted quantization at omega and the
// quantization at (t x) > omega, over sites whose shift stays in the region.
double covariance_check(const Symbol& S, const ConfigPoint& omega, const IVector& x, double t,
                        const LatticeRegion& region);

// Sites outside the mask are decoupled and carry S_pad.
LatticeHamiltonian truncate_with_padding(const LatticeHamiltonian& H,
                                         const std::function<bool(const IVector&)>& mask,
                                         const CMatrix& S_pad);

// Max |entry| of H over pairs whose displacement lies outside the support.
double locality_defect(const LatticeHamiltonian& H, const Symbol& S);

// Smallest |eigenvalue| of the Bloch chains across a 1-cell, over a k grid
// and two sub-site offsets.  States concentrated on the hard-truncated bulk
// end of the chain are truncation artifacts and are skipped.
double chain_gap(const Symbol& S, int cell, double t, int k_samples = 16);

// Largest t in (0, t_max] for which the Bloch chains across every 1-cell of
// `cells` keep a gap >= target.  Bisection; t0 is reported, never assumed.
struct GapBisection {
  double t0 = 0.0;
  double gap_at_t0 = 0.0;
  double target = 0.0;
  int iterations = 0;
  bool ok = false;
};
GapBisection gap_bisection(const Symbol& S, const std::vector<int>& cells, double target,
                           double t_max = 1.0, double t_min = 0.05, int iterations = 12);

}  // namespace adq
