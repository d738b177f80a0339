#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adq/configspace.hpp"

namespace adq {

class SymbolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All Fourier coefficients f_q(w), in the order of Symbol::support.
using CoeffsFn = std::function<std::vector<CMatrix>(const ConfigPoint&)>;
using PointMap = std::function<ConfigPoint(const ConfigPoint&)>;

// Compactification of a cell chart coordinate y in R onto u in (0,2), with
// u -> 0 at the +inf end and u -> 2 at the -inf end.
struct Profile {
  double ell = 1.0;
  double u_of_y(double y) const { return 1.0 - std::tanh(y / ell); }
  double y_of_u(double u) const { return ell * std::atanh(1.0 - u); }
};

struct SpatialSymmetry {
  CMatrix U;           // internal matrix
  PointMap point_map;  // action on the configuration space
};

struct Symbol {
  std::string name;
  int N = 0;
  int d = 0;
  SpacePtr space;
  Profile profile;
  std::vector<IVector> support;
  CoeffsFn coeffs;
  std::vector<int> cells;  // active (restricted) domain
  std::optional<CMatrix> J;
  std::optional<SpatialSymmetry> mirror;     // acts on k by swapping k1 and k2
  std::optional<SpatialSymmetry> inversion;  // acts on k by k -> -k

  int max_range() const;
  bool has_cell(int c) const;

  // Point of the compactified chart of `cell`: one coordinate in [0,2] per
  // chart dimension; boundary values resolve to the attached lower cells.
  // For a disk cell the coordinates are (r in [0,1], direction angles).
  ConfigPoint chart_point(int cell, const std::vector<double>& u) const;
};

CMatrix eval_symbol(const Symbol& S, const ConfigPoint& w, const RVector& k);

struct GapCertificate {
  std::vector<int> region;
  double min_gap = 0.0;
  int k_grid = 0;
  int omega_samples = 0;
  ConfigPoint argmin_omega;
  RVector argmin_k;
};

// Sample points of a cell through its compactified chart, endpoints included.
std::vector<ConfigPoint> cell_samples(const Symbol& S, int cell, int omega_res);

GapCertificate gap_on(const Symbol& S, const std::vector<int>& cells, int k_res, int omega_res,
                      Exec exec = Exec::parallel);

enum class SymmetryKind { chiral, mirror, inversion };
double symmetry_check(const Symbol& S, SymmetryKind which, int omega_res = 7, int k_samples = 16,
                      unsigned seed = 11);

// Same coefficients, domain restricted to a closed subcomplex.
Symbol restrict(const Symbol& S, const std::vector<int>& cells);

// Restriction to a 0-cell as a translation-invariant symbol on the point space.
Symbol restrict_to_point(const Symbol& S, int zero_cell);

// Max over sampled (w,k) of the hermiticity defect.
double symbol_hermiticity(const Symbol& S, int samples = 1000, unsigned seed = 5);

// Model library.
Symbol model_qwz(double m);
Symbol model_constant(const CMatrix& h, int d);
Symbol model_interface(const Symbol& plus, const Symbol& minus, const RVector& lambda);
Symbol model_corner_quarter(double mu, double ell = 1.0);
Symbol model_hinge_square(double mu, const std::vector<int>& signs, bool inversion = false,
                          double ell = 1.0);

// Codimension-n Dirac defect: H = sum_i gamma_i F_i(k, y) with F a
// degree-one field on T^d x S^{n-1} interpolated radially to a constant unit
// vector at the center.  Supported (d,n): (1,1) and (2,2).
Symbol model_dirac_defect(int d, int n, double ell = 1.0);

// Corner model building blocks, exposed for tests.
namespace corner {
CMatrix gamma_a();
CMatrix gamma_b();
CMatrix gamma_c();
CMatrix gamma_d();
CMatrix chiral();
CMatrix mirror();
CMatrix endpoint();  // S(1)
CMatrix bulk(double mu, double k1, double k2);
}  // namespace corner

namespace hinge {
CMatrix gamma(int i);  // i = 0..3
CMatrix mass();        // sigma1 x sigma1
CMatrix bulk(const RVector& k);
}  // namespace hinge

}  // namespace adq
