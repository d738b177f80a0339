// adq_cli: reproduce | chern | spectrum | quantize-dump

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "adq/experiments.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> grid, size, samples, dirac_dim, margin, flow_samples, loop_grid;
  std::optional<double> t, mu, m, m_plus, m_minus, tol;
  std::optional<std::string> signs, lambda, model, unitary;
  std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--out", o.out, "output directory");
  app->add_option("--grid", o.grid, "torus points per dimension");
  app->add_option("--size", o.size, "lattice side length");
  app->add_option("--t", o.t, "adiabatic scale in (0,1]; default from gap bisection");
  app->add_option("--mu", o.mu, "corner / hinge mass");
  app->add_option("--m", o.m, "QWZ mass");
  app->add_option("--m-plus", o.m_plus, "interface mass on the +inf side");
  app->add_option("--m-minus", o.m_minus, "interface mass on the -inf side");
  app->add_option("--signs", o.signs, "hinge signs a,b,c,d");
  app->add_option("--lambda", o.lambda, "interface normal x,y");
  app->add_option("--tol", o.tol, "zero-mode window");
  app->add_option("--seed", o.seed, "seed for randomized checks");
  app->add_option("--model", o.model, "qwz | interface | corner | hinge | dirac");
  app->add_option("--unitary", o.unitary, "chern: 'winding' evaluates exp(ik)");
  app->add_option("--samples", o.samples, "samples for --unitary and spectrum families");
  app->add_option("--dirac-dim", o.dirac_dim, "point-defect dimension 1 or 2 (0: both)");
  app->add_option("--margin", o.margin, "padding layers before a corner tip");
  app->add_option("--flow-samples", o.flow_samples, "k samples for spectral flow");
  app->add_option("--loop-grid", o.loop_grid, "samples around a boundary loop");
}

adq::ExperimentConfig build(const Overrides& o, const std::optional<std::string>& experiment) {
  adq::ExperimentConfig c;
  if (!o.config_path.empty()) c = adq::load_config(o.config_path);
  if (experiment) c.experiment = *experiment;
  if (o.out) c.out_dir = *o.out;
  if (o.grid) c.grid = *o.grid;
  if (o.size) c.size = *o.size;
  if (o.samples) c.samples = *o.samples;
  if (o.dirac_dim) c.dirac_dim = *o.dirac_dim;
  if (o.margin) c.margin = *o.margin;
  if (o.flow_samples) c.flow_samples = *o.flow_samples;
  if (o.loop_grid) c.loop_grid = *o.loop_grid;
  if (o.t) c.t = *o.t;
  if (o.mu) c.mu = *o.mu;
  if (o.m) c.m = *o.m;
  if (o.m_plus) c.m_plus = *o.m_plus;
  if (o.m_minus) c.m_minus = *o.m_minus;
  if (o.tol) c.tol = *o.tol;
  if (o.seed) c.seed = *o.seed;
  if (o.signs) c.signs = adq::parse_int_list(*o.signs);
  if (o.lambda) c.lambda = adq::parse_real_list(*o.lambda);
  if (o.model) c.model = *o.model;
  if (o.unitary) c.unitary = *o.unitary;
  adq::validate(c);
  return c;
}

int finish(const adq::RunReport& r, const std::string& dir) {
  adq::write_outputs(r, dir);
  for (const auto& a : r.assertions)
    std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << " value=" << a.value << " target=" << a.target
              << " tol=" << a.tol << " (" << a.relation << ")\n";
  for (const auto& inv : r.invariants) std::cout << inv.invariant << " = " << inv.value << " -> " << inv.rounded << "\n";
  std::cout << "wrote " << dir << "/{report.json,invariants.json,spectrum.csv}\n";
  return r.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adiabatic quantization and defect invariants"};
  app.require_subcommand(1);

  Overrides o_rep, o_chern, o_spec, o_dump;
  std::optional<std::string> experiment;
  auto* rep = app.add_subcommand("reproduce", "run an experiment pipeline");
  rep->add_option("experiment", experiment, "interface | point-defect | corner | hinge | custom");
  add_flags(rep, o_rep);
  auto* chern = app.add_subcommand("chern", "single Chern pairing");
  add_flags(chern, o_chern);
  auto* spec = app.add_subcommand("spectrum", "spectra as CSV");
  add_flags(spec, o_spec);
  auto* dump = app.add_subcommand("quantize-dump", "entries and checks of a quantized Hamiltonian");
  add_flags(dump, o_dump);

  CLI11_PARSE(app, argc, argv);

  try {
    if (rep->parsed()) {
      auto c = build(o_rep, experiment);
      return finish(adq::run_experiment(c), c.out_dir);
    }
    if (chern->parsed()) {
      auto c = build(o_chern, std::nullopt);
      return finish(adq::cmd_chern(c), c.out_dir);
    }
    if (spec->parsed()) {
      auto c = build(o_spec, std::nullopt);
      return finish(adq::cmd_spectrum(c), c.out_dir);
    }
    auto c = build(o_dump, std::nullopt);
    return finish(adq::cmd_quantize_dump(c), c.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
