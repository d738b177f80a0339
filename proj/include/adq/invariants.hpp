#pragma once

#include <functional>
#include <string>
#include <vector>

#include "adq/quantize.hpp"

namespace adq {

class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- Chern pairings on product meshes ------------------------------------

enum class FactorKind { torus, loop, segment };
enum class DerivKind { spectral, finite_difference };

struct MeshFactor {
  FactorKind kind = FactorKind::torus;
  int resolution = 16;
  double length = 2 * kPi;  // period, or segment length
  DerivKind deriv = DerivKind::finite_difference;
};

struct Mesh {
  std::vector<MeshFactor> factors;
  int orientation = 1;

  int dim() const { return static_cast<int>(factors.size()); }
  long points() const;
  Mesh halved() const;
  std::string describe() const;
};

inline MeshFactor torus_factor(int n, DerivKind deriv = DerivKind::spectral) {
  return {FactorKind::torus, n, 2 * kPi, deriv};
}
inline MeshFactor loop_factor(int n, double length = 1.0) {
  return {FactorKind::loop, n, length, DerivKind::finite_difference};
}

// Field sampled at a mesh point, one coordinate per factor.
using FieldFn = std::function<CMatrix(const RVector&)>;

struct ChernResult {
  double value = 0.0;
  double imag_residual = 0.0;
  Mesh mesh;
  long rounded = 0;
  double nearest_integer_distance = 0.0;
  double refinement_delta = 0.0;  // |value - value at half resolution|
};

// Pairing constants: c_m Sum_rho sgn(rho) Int tr(...), with
// c_2 = 1/(-2 pi i), c_4 = 1/(2 (-2 pi i)^2), c_1 = -i/(2 pi), c_3 = 1/(24 pi^2).
cplx even_constant(int m);
cplx odd_constant(int m);

// Projection field, m = mesh dimension in {0, 2, 4}.
ChernResult chern_even(const Mesh& mesh, const FieldFn& P, bool refine = true,
                       Exec exec = Exec::parallel);

// Invertible field x, m in {1, 3}; pairs with Ch(x^{-1}, x, x^{-1}, x, ...).
// Unitary fields are the special case x^{-1} = x^*.
ChernResult chern_odd(const Mesh& mesh, const FieldFn& x, bool refine = true,
                      Exec exec = Exec::parallel);

// Plaquette Berry-flux integer on an n x n grid of T^2, normalized like
// chern_even.
int fhs_chern2d(const std::function<CMatrix(double, double)>& P, int n);

enum class PairingClass { even, odd };

struct LoopChernOptions {
  int torus_res = 24;
  int loop_res = 24;  // total samples around the loop
  DerivKind torus_deriv = DerivKind::spectral;
  bool adaptive = true;  // reallocate loop samples by field variation
  bool reverse = false;  // traverse the boundary backwards
  bool refine = true;
  Exec exec = Exec::parallel;
};

// Pairing of the boundary restriction of S around `cell` with
// Ch_{kdirs} # Ch_{boundary}.  kdirs has one d-vector per torus direction;
// the torus cocycle picks up det[kdirs].  Torus factors come first, the
// boundary parameter last.
ChernResult loop_chern(const Symbol& S, int cell, PairingClass cls,
                       const std::vector<RVector>& kdirs, const LoopChernOptions& opt = {});

// ---- Real-space defect invariants ----------------------------------------

struct ZeroMode {
  double eigenvalue = 0.0;
  double chirality = 0.0;     // <v|J|v>
  double localization = 0.0;  // <v|chi|v>
};

struct DefectReport {
  int zero_mode_index = 0;  // localized: (#J=+1) - (#J=-1) kernel vectors in the window
  int global_index = 0;     // round(Tr(J P_ker)) over the whole kernel
  double rounding_residual = 0.0;
  int kernel_dim = 0;
  double tol = kGapTol;
  double next_eigenvalue = 0.0;  // smallest |lambda| outside the window
  bool crowded = false;
  double chiral_defect = 0.0;
  std::vector<ZeroMode> zero_modes;
  int sector_plus = 0, sector_minus = 0;
  RVector spectrum;      // all eigenvalues, ascending
  RVector localization;  // <v|chi|v> per eigenvalue
};

// chi: per-site weight in [0,1] marking the defect locus; empty = all sites.
DefectReport zero_mode_index(const LatticeHamiltonian& H, const CMatrix& J, double tol,
                             const std::vector<double>& chi = {});

// Per-site weight -> per-basis-vector diagonal.
RVector site_weights(const LatticeRegion& R, int N, const std::function<double(const IVector&)>& chi);

struct Crossing {
  double k = 0.0;
  int direction = 0;  // +1 upward through 0
  double localization = 0.0;
};

struct SpectralFlowResult {
  int flow = 0;   // localized crossings (weight > 1/2)
  int total = 0;  // all crossings; 0 for a periodic finite family
  int evaluations = 0;
  std::vector<Crossing> crossings;
};

// family(k) must be 2 pi periodic; diag_chi weighs basis vectors.
SpectralFlowResult spectral_flow(const std::function<CMatrix(double)>& family, int k_samples,
                                 double window, const RVector& diag_chi, int max_depth = 8);

// Odd polynomial step on [-g, g] with f'(x) proportional to (1 - x^2)^order,
// +/-1 outside.  order 2 is the quintic (15x - 10x^3 + 3x^5)/8.
double flatten(double E, double g, int order = 2);

struct WindingOptions {
  double g = 0.5;  // half-width of the flattening window
  int order = 2;
  double normalization = 1.0;  // c_lambda / Vol(P) for the per-volume value
  double decay_tol = 1e-6;
  std::vector<int> parallel_dirs;  // empty: every periodic direction
  bool reduce = true;  // Fourier blocks along a single translation-invariant parallel direction
};

struct WindingResult {
  double value = 0.0;       // counting trace per unit cell along the defect
  double per_volume = 0.0;  // value times the normalization
  double normalization = 1.0;
  double off_defect_weight = 0.0;
  bool decays = false;
};

// T(U^* [v.X, U]) with U = -exp(i pi f(H)), X the site positions (minimal
// image along periodic directions), T the trace over the chi window divided
// by the number of unit cells along parallel_dirs.  `buffer` marks sites
// where U - 1 must have decayed below decay_tol.  The second form uses
// a supplied eigensystem of H and never reduces.
WindingResult defect_winding(const LatticeHamiltonian& H, const RVector& v, const std::vector<double>& chi,
                             const std::vector<double>& buffer, const WindingOptions& opt = {});
WindingResult defect_winding(const LatticeHamiltonian& H, const EigResult& eig, const RVector& v,
                             const std::vector<double>& chi, const std::vector<double>& buffer,
                             const WindingOptions& opt = {});

struct CorrespondenceRow {
  double t = 0.0;
  double symbol_side = 0.0;
  double lattice_side = 0.0;
  double difference = 0.0;
};

// Symbol side once, lattice side per t.
std::vector<CorrespondenceRow> correspondence_check(double symbol_side,
                                                    const std::vector<double>& t_list,
                                                    const std::function<double(double)>& lattice_side);

}  // namespace adq
