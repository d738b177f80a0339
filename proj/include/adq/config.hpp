#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace adq {

class ConfigFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One experiment run.  Every field has a default; optional fields resolve to
// an experiment-specific default (see resolved_* below and README.md).
struct ExperimentConfig {
  std::string experiment = "corner";  // interface | point-defect | corner | hinge | custom

  // Model parameters.
  std::string model = "qwz";        // custom / chern / spectrum: qwz | interface | corner | hinge | dirac
  std::optional<double> mu;         // corner 1.5, hinge 1.0
  double m = 1.0;                   // QWZ mass
  double m_plus = 1.0;              // interface: side lambda.x -> +inf
  double m_minus = -1.0;            // interface: side lambda.x -> -inf
  std::vector<int> signs = {1, 1, -1, -1};
  std::vector<double> lambda = {1.0, 0.0};
  double ell = 1.0;                 // chart length scale
  int dirac_dim = 0;                // point-defect: 1 or 2; 0 runs both

  // Numerics.
  std::optional<double> t;          // default: gap bisection
  std::optional<int> size;          // lattice side; corner 24, hinge 12, point-defect 60 / 21
  int grid = 24;                    // torus points per dimension
  int loop_grid = 24;               // samples around a boundary loop
  int hinge_grid = 16;
  int hinge_loop_grid = 80;
  int interface_width = 80;         // transverse sites of the interface cylinder
  int interface_length = 32;        // sites along the interface
  int margin = 2;                   // padding layers before a corner tip
  int flow_samples = 48;
  int samples = 64;                 // chern --unitary winding
  std::string unitary;              // chern: "winding" selects the unitary test field
  int k_res = 32;                   // gap certificates
  int omega_res = 41;
  double tol = 1e-3;                // zero-mode window
  double flatten_fraction = 0.8;    // flattening half-width / skeleton gap
  double chern_tol = 0.05;
  double refine_tol = 0.1;
  double hinge_tol = 0.1;
  double kernel_tol = 1e-10;
  double runtime_limit = 60.0;      // seconds, corner dense stage
  std::uint64_t seed = 7;

  std::string out_dir = "out";

  double resolved_mu() const;
  int resolved_size() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

// Parses a JSON document; unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);
void validate(const ExperimentConfig& c);

// "a,b,c" lists for flags.
std::vector<double> parse_real_list(const std::string& s);
std::vector<int> parse_int_list(const std::string& s);

// FNV-1a over the canonical JSON dump of the config without output paths.
std::string inputs_hash(const ExperimentConfig& c);

}  // namespace adq
