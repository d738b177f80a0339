#pragma once

#include <map>
#include <string>
#include <vector>

#include "adq/config.hpp"
#include "adq/invariants.hpp"

namespace adq {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An asserted comparison.  `value` is the raw number, `target` what it is
// compared against; pass iff |value - target| <= tol (relation "abs"), or
// value <= target ("le"), or value is odd ("odd").
struct Assertion {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;
  std::string relation = "abs";
  bool pass = false;
};

struct InvariantRecord {
  std::string invariant;
  double value = 0.0;
  long rounded = 0;
  std::string mesh;
  double refinement_delta = 0.0;
};

// One row per (parameter, eigenvalue) pair.
struct SpectrumRow {
  std::string family;
  double parameter = 0.0;
  int index = 0;
  double eigenvalue = 0.0;
  double localization = 0.0;
};

struct RunReport {
  std::string command;
  std::string experiment;
  nlohmann::json config;
  std::string hash;
  nlohmann::json gaps = nlohmann::json::array();
  nlohmann::json tables = nlohmann::json::object();
  std::vector<Assertion> assertions;
  std::vector<InvariantRecord> invariants;
  std::vector<SpectrumRow> spectrum;
  std::map<std::string, double> timing;  // seconds; excluded from determinism

  void check(const std::string& name, double value, double target, double tol);
  void check_le(const std::string& name, double value, double bound);
  void check_odd(const std::string& name, double value);
  void record(const std::string& invariant, const ChernResult& r);
  void record(const std::string& invariant, double value, const std::string& mesh);

  bool all_pass() const;
  nlohmann::json to_json() const;
  nlohmann::json invariants_json() const;
  std::string spectrum_csv() const;
};

// Writes report.json, invariants.json and spectrum.csv into dir.
void write_outputs(const RunReport& r, const std::string& dir);

RunReport run_experiment(const ExperimentConfig& c);  // dispatches on c.experiment
RunReport run_interface(const ExperimentConfig& c);
RunReport run_point_defect(const ExperimentConfig& c);
RunReport run_corner(const ExperimentConfig& c);
RunReport run_hinge(const ExperimentConfig& c);
RunReport run_custom(const ExperimentConfig& c);

RunReport cmd_chern(const ExperimentConfig& c);
RunReport cmd_spectrum(const ExperimentConfig& c);
// Entries of the quantized Hamiltonian go to the spectrum table as
// (row, col) pairs; the report carries its structural checks.
RunReport cmd_quantize_dump(const ExperimentConfig& c);

// Pieces shared with the tests.
struct CornerLattice {
  LatticeHamiltonian H;  // padded
  std::vector<double> chi;
  double t = 0.0;
};
CornerLattice corner_lattice(const Symbol& S, int size, int margin, double t);

// Quarter lattice of a hinge 2-cell as a Bloch family over the isotropy
// momentum; the tip sits `margin` sites in from the corner facing the bulk.
struct HingeFamily {
  std::function<CMatrix(double)> family;
  RVector chi;
};
HingeFamily hinge_family(const Symbol& S, int cell, int size, int margin, double t);

}  // namespace adq
