#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "adq/linalg.hpp"

namespace adq {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using IVector = Eigen::VectorXi;

enum class CellKind {
  affine,  // open copy of R^n, translations act by y -> y + Lambda x
  sphere   // boundary sphere of a disk: translation-fixed points labelled by a unit direction
};

struct Cell {
  int id = 0;
  int dim = 0;
  CellKind kind = CellKind::affine;
  RMatrix Lambda;  // dim x d
  std::string label;
  bool rational = true;
};

struct ConfigPoint {
  int cell = 0;
  RVector y;  // chart coordinates; for sphere cells a unit direction
};

// One leg of a boundary traversal.  For a 1-cell "forward" runs from its
// +inf end to its -inf end.  For 0-cells sign is the +/- coefficient of the
// boundary S^0.
struct Traversal {
  int cell = 0;
  bool forward = true;
  int sign = 1;
};

enum class SpaceKind { point, interface, disk, quarter, infinite_square };

struct SpaceParams {
  int d = 2;
  std::vector<RVector> lambdas;  // normal vectors, or the rows of Lambda for a disk
  int disk_dim = 1;
  int height = 32;  // integer search height for rationality
};

class ConfigSpace {
 public:
  SpaceKind kind = SpaceKind::point;
  int d = 0;
  std::vector<Cell> cells;
  std::map<int, std::vector<int>> skeleton;        // dimension -> cell ids
  std::map<int, std::vector<Traversal>> boundary;  // per cell of dim >= 1

  const Cell& cell(int id) const;
  int cell_id(const std::string& label) const;
  std::vector<int> cells_up_to(int n) const;
  std::vector<int> zero_cells() const { return cells_up_to(0); }
};

using SpacePtr = std::shared_ptr<const ConfigSpace>;

SpacePtr builtin_space(SpaceKind kind, const SpaceParams& params = {});

ConfigPoint translate(const ConfigSpace& space, const ConfigPoint& w, const RVector& x);
ConfigPoint scale(const ConfigSpace& space, const ConfigPoint& w, double t);

// Primitive basis of ker(Lambda) intersected with Z^d.
std::vector<IVector> isotropy_lattice(const Cell& cell, int height = 32);

// Covolume of the image lattice Lambda Z^d in R^n.
double covolume(const Cell& cell, int height = 32);

// Integer vectors completing the isotropy basis to a unimodular basis of Z^d.
std::vector<IVector> transverse_basis(const std::vector<IVector>& isotropy, int d);

std::vector<Traversal> boundary_loop(const ConfigSpace& space, int cell);

// Integer Hermite normal form row basis of the lattice spanned by rows.
std::vector<IVector> lattice_basis(const std::vector<IVector>& generators, int d);

}  // namespace adq
