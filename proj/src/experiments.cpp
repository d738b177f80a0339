#include "adq/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace adq {

using nlohmann::json;

// ---- report ---------------------------------------------------------------

void RunReport::check(const std::string& name, double value, double target, double tol) {
  assertions.push_back({name, value, target, tol, "abs", std::abs(value - target) <= tol});
}

void RunReport::check_le(const std::string& name, double value, double bound) {
  assertions.push_back({name, value, bound, 0.0, "le", value <= bound});
}

void RunReport::check_odd(const std::string& name, double value) {
  long r = std::lround(value);
  bool odd = std::abs(value - r) <= 1e-12 && (r % 2 != 0);
  assertions.push_back({name, value, 1.0, 0.0, "odd", odd});
}

void RunReport::record(const std::string& invariant, const ChernResult& r) {
  invariants.push_back({invariant, r.value, r.rounded, r.mesh.describe(), r.refinement_delta});
}

void RunReport::record(const std::string& invariant, double value, const std::string& mesh) {
  invariants.push_back({invariant, value, std::lround(value), mesh, 0.0});
}

bool RunReport::all_pass() const {
  for (const auto& a : assertions)
    if (!a.pass) return false;
  return true;
}

json RunReport::to_json() const {
  json as = json::array();
  for (const auto& a : assertions)
    as.push_back({{"name", a.name},
                  {"value", a.value},
                  {"target", a.target},
                  {"tol", a.tol},
                  {"relation", a.relation},
                  {"pass", a.pass}});
  json tm = json::object();
  for (const auto& [k, v] : timing) tm[k] = v;
  return json{{"command", command},
              {"experiment", experiment},
              {"config", config},
              {"inputs-hash", hash},
              {"gap_certificates", gaps},
              {"tables", tables},
              {"assertions", as},
              {"all_pass", all_pass()},
              {"invariants", invariants_json()},
              {"timing", tm}};
}

json RunReport::invariants_json() const {
  json out = json::array();
  for (const auto& r : invariants)
    out.push_back({{"invariant", r.invariant},
                   {"value", r.value},
                   {"rounded", r.rounded},
                   {"mesh", r.mesh},
                   {"refinement_delta", r.refinement_delta},
                   {"inputs-hash", hash}});
  return out;
}

std::string RunReport::spectrum_csv() const {
  std::ostringstream os;
  os << "family,parameter,index,eigenvalue,localization\n";
  char buf[160];
  for (const auto& r : spectrum) {
    std::snprintf(buf, sizeof buf, ",%.17g,%d,%.17g,%.17g\n", r.parameter, r.index, r.eigenvalue, r.localization);
    os << r.family << buf;
  }
  return os.str();
}

void write_outputs(const RunReport& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw ExperimentError("cannot write " + name + " in " + dir);
    out << text;
  };
  put("report.json", r.to_json().dump(2) + "\n");
  put("invariants.json", r.invariants_json().dump(2) + "\n");
  put("spectrum.csv", r.spectrum_csv());
}

// ---- shared pieces --------------------------------------------------------

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RunReport start(const std::string& command, const ExperimentConfig& c) {
  validate(c);
  RunReport r;
  r.command = command;
  r.experiment = c.experiment;
  r.config = c;
  r.hash = inputs_hash(c);
  return r;
}

json vec_json(const RVector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json ivec_json(const IVector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// Certified gap on `cells`; aborts with the argmin location when closed.
GapCertificate certify(RunReport& rep, const Symbol& S, const std::vector<int>& cells, const std::string& what,
                       int k_res, int omega_res) {
  GapCertificate g = gap_on(S, cells, k_res, omega_res);
  const Cell& at = S.space->cell(g.argmin_omega.cell);
  rep.gaps.push_back({{"region", what},
                      {"min_gap", g.min_gap},
                      {"k_grid", g.k_grid},
                      {"omega_samples", g.omega_samples},
                      {"argmin_cell", at.label},
                      {"argmin_y", vec_json(g.argmin_omega.y)},
                      {"argmin_k", vec_json(g.argmin_k)}});
  if (g.min_gap < 1e-6) {
    std::ostringstream os;
    os << "gap certificate failed on " << what << ": min gap " << g.min_gap << " at cell " << at.label
       << " y = (" << g.argmin_omega.y.transpose() << ") k = (" << g.argmin_k.transpose() << ")";
    throw ExperimentError(os.str());
  }
  return g;
}

json bisection_json(const GapBisection& b) {
  return {{"t0", b.t0}, {"gap_at_t0", b.gap_at_t0}, {"target", b.target}, {"iterations", b.iterations}, {"ok", b.ok}};
}

ConfigPoint bulk_point() { return {0, RVector(0)}; }

FieldFn qwz_projection(const Symbol& bulk) {
  return [bulk](const RVector& k) { return fermi_projection(eval_symbol(bulk, bulk_point(), k)); };
}

Mesh torus_mesh(int dim, int n) {
  Mesh m;
  for (int i = 0; i < dim; ++i) m.factors.push_back(torus_factor(n));
  return m;
}

int fhs_for(const Symbol& bulk, int n) {
  return fhs_chern2d(
      [&](double a, double b) {
        RVector k(2);
        k << a, b;
        return fermi_projection(eval_symbol(bulk, bulk_point(), k));
      },
      n);
}

void push_spectrum(RunReport& rep, const std::string& family, double param, const RVector& ev, const RVector& loc,
                   double window = std::numeric_limits<double>::infinity()) {
  for (int i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) <= window) rep.spectrum.push_back({family, param, i, ev[i], loc.size() ? loc[i] : 0.0});
}

void push_family(RunReport& rep, const std::string& family, const std::function<CMatrix(double)>& f,
                 const RVector& chi, int samples, double window = std::numeric_limits<double>::infinity()) {
  for (int i = 0; i < samples; ++i) {
    const double k = 2 * kPi * i / samples;
    auto eig = eig_hermitian(f(k));
    RVector loc = eig.vectors.cwiseAbs2().transpose() * chi;
    push_spectrum(rep, family, k, eig.values, loc, window);
  }
}

// Tip placement for a codimension-2 cell on a box of lattice coordinates n,
// x = sum_j n_j basis_j: the bulk lies where M (n - tip) >= 0 with
// M = Lambda * basis.
struct QuarterGeometry {
  RMatrix M;
  IVector tip;
  int size = 0;

  bool inside(const IVector& n) const { return (M * (n - tip).cast<double>()).minCoeff() >= -1e-9; }
  bool near_tip(const IVector& n) const { return (n - tip).cwiseAbs().maxCoeff() < size / 2; }
};

QuarterGeometry quarter_geometry(const Cell& c, const std::vector<IVector>& basis, int size, int margin) {
  if (c.dim != 2) throw ExperimentError("quarter lattice needs a 2-cell");
  RMatrix B(c.Lambda.cols(), 2);
  for (int j = 0; j < 2; ++j) B.col(j) = basis[j].cast<double>();
  QuarterGeometry q;
  q.M = c.Lambda * B;
  q.size = size;
  q.tip = IVector(2);
  for (int j = 0; j < 2; ++j) q.tip[j] = q.M.col(j).sum() > 0 ? margin : size - 1 - margin;
  return q;
}

}  // namespace

CornerLattice corner_lattice(const Symbol& S, int size, int margin, double t) {
  const int cell = S.space->cell_id("R12");
  const Cell& c = S.space->cell(cell);
  std::vector<IVector> basis = {IVector::Unit(2, 0), IVector::Unit(2, 1)};
  QuarterGeometry q = quarter_geometry(c, basis, size, margin);
  RVector y0 = -t * (c.Lambda * q.tip.cast<double>());
  auto R = LatticeRegion::open_box({size, size});
  CornerLattice out;
  out.t = t;
  out.H = truncate_with_padding(quantize(S, {cell, y0}, t, R), [q](const IVector& n) { return q.inside(n); },
                                corner::endpoint());
  out.chi.resize(R.sites());
  for (long i = 0; i < R.sites(); ++i) out.chi[i] = q.near_tip(R.coords(i)) ? 1.0 : 0.0;
  return out;
}

HingeFamily hinge_family(const Symbol& S, int cell, int size, int margin, double t) {
  const Cell& c = S.space->cell(cell);
  BlochSetup setup = bloch_setup(S, cell);
  QuarterGeometry q = quarter_geometry(c, setup.transverse, size, margin);
  RVector xt = RVector::Zero(S.d);
  for (int j = 0; j < 2; ++j) xt += q.tip[j] * setup.transverse[j].cast<double>();
  const ConfigPoint w{cell, -t * (c.Lambda * xt)};
  const auto R = LatticeRegion::open_box({size, size});
  HingeFamily out;
  out.chi = site_weights(R, S.N, [q](const IVector& n) { return q.near_tip(n) ? 1.0 : 0.0; });
  const CMatrix pad = hinge::gamma(0);
  out.family = [S, w, t, R, setup, q, pad](double k) {
    RVector kk(1);
    kk[0] = k;
    auto H = quantize_bloch(S, w, t, R, kk, setup);
    return truncate_with_padding(H, [q](const IVector& n) { return q.inside(n); }, pad).dense();
  };
  return out;
}

// ---- experiments ----------------------------------------------------------

RunReport run_interface(const ExperimentConfig& c) {
  RunReport rep = start("reproduce", c);
  Stopwatch total;
  RVector lam(2);
  lam << c.lambda[0], c.lambda[1];
  lam /= lam.norm();
  const Symbol plus = model_qwz(c.m_plus), minus = model_qwz(c.m_minus);
  const Symbol S = model_interface(plus, minus, lam);
  const GapCertificate g = certify(rep, S, S.space->zero_cells(), "0-skeleton", c.k_res, c.omega_res);

  // Bulk Chern numbers, integrated and by plaquettes.
  auto bulk_side = [&](const Symbol& B, const std::string& name) {
    ChernResult r = chern_even(torus_mesh(2, c.grid), qwz_projection(B));
    int f = fhs_for(B, c.grid);
    rep.record("chern_" + name, r);
    rep.record("fhs_" + name, f, "plaquette " + std::to_string(c.grid) + "x" + std::to_string(c.grid));
    rep.check("chern_" + name + "_integrality", r.value, static_cast<double>(r.rounded), c.chern_tol);
    rep.check("chern_" + name + "_matches_fhs", static_cast<double>(r.rounded), f, 0.0);
    return r;
  };
  const ChernResult cp = bulk_side(plus, "plus"), cm = bulk_side(minus, "minus");
  const double expected = static_cast<double>(cp.rounded - cm.rounded);

  const int cell = S.space->cell_id("R");
  BlochSetup setup = bloch_setup(S, cell);
  // Parallel direction oriented so that (b, lambda) is positive.
  IVector b = setup.isotropy[0];
  if (b[0] * lam[1] - b[1] * lam[0] < 0) b = -b;
  setup.isotropy[0] = b;

  ChernResult sym = loop_chern(S, cell, PairingClass::even, {RVector::Unit(2, 0), RVector::Unit(2, 1)},
                               [&] {
                                 LoopChernOptions o;
                                 o.torus_res = c.grid;
                                 o.loop_res = c.loop_grid;
                                 return o;
                               }());
  rep.record("symbol_side_loop_chern", sym);
  rep.check("symbol_side_equals_bulk_difference", sym.value, expected, c.chern_tol);

  const double t = c.t.value_or(1.0);
  const int W = c.interface_width, Lp = c.interface_length, c0 = W / 2, hw = W / 4;
  const double s = (S.space->cell(cell).Lambda * setup.transverse[0].cast<double>())(0, 0);
  RVector y0(1);
  y0[0] = -t * s * c0;
  const ConfigPoint w{cell, y0};
  Eigen::MatrixXi B(2, 2);
  B.col(0) = setup.transverse[0];
  B.col(1) = b;
  Stopwatch sw;
  const auto R = LatticeRegion::make({W, Lp}, {true, true}).with_basis(B);
  const auto H = quantize(S, w, t, R);
  std::vector<double> chi(R.sites()), buffer(R.sites());
  for (long i = 0; i < R.sites(); ++i) {
    int beta = R.coords(i)[0];
    chi[i] = std::abs(beta - c0) < hw ? 1.0 : 0.0;
    buffer[i] = std::abs(beta - c0) == hw ? 1.0 : 0.0;
  }
  const double c_lambda = covolume(S.space->cell(cell));
  WindingOptions wo;
  wo.g = c.flatten_fraction * g.min_gap;
  wo.normalization = c_lambda;
  wo.decay_tol = std::numeric_limits<double>::infinity();
  wo.parallel_dirs = {1};
  RVector v = b.cast<double>();
  v /= v.norm();
  const WindingResult wr = defect_winding(H, v, chi, buffer, wo);
  rep.timing["winding"] = sw.seconds();
  rep.record("winding_counting", wr.value, "cylinder " + std::to_string(W) + "x" + std::to_string(Lp));
  rep.record("winding_per_volume", wr.per_volume, "cylinder " + std::to_string(W) + "x" + std::to_string(Lp));
  rep.check("winding_equals_bulk_difference", wr.per_volume, expected, c.chern_tol);
  rep.check_le("winding_off_defect_weight", wr.off_defect_weight, 1e-6);

  Stopwatch sf;
  const auto Rp = LatticeRegion::make({W}, {true});
  const RVector dchi = site_weights(Rp, S.N, [&](const IVector& n) { return std::abs(n[0] - c0) < hw ? 1.0 : 0.0; });
  auto family = [&](double k) {
    RVector kk(1);
    kk[0] = k;
    return quantize_bloch(S, w, t, Rp, kk, setup).dense();
  };
  const SpectralFlowResult fl = spectral_flow(family, c.flow_samples, 0.5 * g.min_gap, dchi);
  rep.timing["spectral_flow"] = sf.seconds();
  rep.record("spectral_flow", fl.flow, "k samples " + std::to_string(c.flow_samples));
  rep.check("spectral_flow_equals_rounded_winding", fl.flow, std::lround(wr.per_volume), 0.0);
  rep.check("spectral_flow_total_periodic", fl.total, 0.0, 0.0);
  push_family(rep, "interface_bloch", family, dchi, c.flow_samples);

  rep.tables["correspondence"] = {{"bulk_difference", expected},
                                  {"symbol_side", sym.value},
                                  {"winding_counting", wr.value},
                                  {"c_lambda", c_lambda},
                                  {"winding_per_volume", wr.per_volume},
                                  {"spectral_flow", fl.flow},
                                  {"flow_evaluations", fl.evaluations},
                                  {"off_defect_weight", wr.off_defect_weight},
                                  {"t", t},
                                  {"flatten_halfwidth", wo.g},
                                  {"parallel_direction", ivec_json(b)}};
  rep.timing["total"] = total.seconds();
  return rep;
}

RunReport run_point_defect(const ExperimentConfig& c) {
  RunReport rep = start("reproduce", c);
  Stopwatch total;
  std::vector<int> dims = c.dirac_dim ? std::vector<int>{c.dirac_dim} : std::vector<int>{1, 2};
  json rows = json::array();
  for (int d : dims) {
    const std::string tag = "d" + std::to_string(d) + "n" + std::to_string(d);
    const Symbol S = model_dirac_defect(d, d, c.ell);
    const int sphere = S.space->cell_id("S");
    certify(rep, S, {sphere}, tag + " sphere", 16, 16);
    rep.check_le(tag + "_chiral_symmetry_defect", symmetry_check(S, SymmetryKind::chiral), 1e-12);

    LoopChernOptions o;
    o.torus_res = c.grid;
    o.loop_res = c.loop_grid;
    std::vector<RVector> kd;
    for (int j = 0; j < d; ++j) kd.push_back(RVector::Unit(d, j));
    const ChernResult sym = loop_chern(S, S.space->cell_id("D"), PairingClass::odd, kd, o);
    rep.record(tag + "_sphere_pairing", sym);
    rep.check(tag + "_sphere_pairing_magnitude", std::abs(sym.value), 1.0, c.chern_tol);

    const int L = (c.size && c.dirac_dim) ? *c.size : (d == 1 ? 60 : 21);
    const int mid = L / 2;
    const double t = c.t.value_or(1.0);
    Stopwatch sw;
    const auto R = LatticeRegion::open_box(std::vector<int>(d, L));
    const auto H = quantize(S, {S.space->cell_id("D"), RVector::Constant(d, -t * mid)}, t, R);
    std::vector<double> chi(R.sites());
    for (long i = 0; i < R.sites(); ++i) chi[i] = (R.coords(i).array() - mid).abs().maxCoeff() <= L / 4 ? 1.0 : 0.0;
    const DefectReport dr = zero_mode_index(H, *S.J, c.tol, chi);
    rep.timing[tag + "_zero_modes"] = sw.seconds();
    rep.record(tag + "_zero_mode_index", dr.zero_mode_index, "open box " + std::to_string(L) + "^" + std::to_string(d));
    rep.check(tag + "_zero_mode_index_magnitude", std::abs(dr.zero_mode_index), 1.0, 0.0);
    rep.check(tag + "_localized_midgap_states", dr.sector_plus + dr.sector_minus, 1.0, 0.0);
    push_spectrum(rep, tag, 0.0, dr.spectrum, dr.localization);
    json modes = json::array();
    for (const auto& z : dr.zero_modes)
      modes.push_back({{"eigenvalue", z.eigenvalue}, {"chirality", z.chirality}, {"localization", z.localization}});
    rows.push_back({{"defect", tag},
                    {"size", L},
                    {"t", t},
                    {"sphere_pairing", sym.value},
                    {"zero_mode_index", dr.zero_mode_index},
                    {"global_index", dr.global_index},
                    {"kernel_dim", dr.kernel_dim},
                    {"next_eigenvalue", dr.next_eigenvalue},
                    {"window", dr.tol},
                    {"zero_modes", modes}});
  }
  rep.tables["defects"] = rows;
  rep.timing["total"] = total.seconds();
  return rep;
}

RunReport run_corner(const ExperimentConfig& c) {
  RunReport rep = start("reproduce", c);
  Stopwatch total;
  const Symbol S = model_corner_quarter(c.resolved_mu(), c.ell);
  const GapCertificate g = certify(rep, S, S.space->cells_up_to(1), "1-skeleton", c.k_res, c.omega_res);
  rep.check_le("chiral_symmetry_defect", symmetry_check(S, SymmetryKind::chiral), 1e-12);
  rep.check_le("mirror_symmetry_defect", symmetry_check(S, SymmetryKind::mirror), 1e-12);

  const int cell = S.space->cell_id("R12");
  LoopChernOptions o;
  o.torus_res = c.grid;
  o.loop_res = c.loop_grid;
  const ChernResult loop =
      loop_chern(S, cell, PairingClass::odd, {RVector::Unit(2, 0), RVector::Unit(2, 1)}, o);
  rep.record("quarter_loop_chern", loop);
  rep.check("quarter_loop_chern_value", loop.value, 1.0, c.chern_tol);
  rep.check_le("quarter_loop_chern_refinement", loop.refinement_delta, c.refine_tol);

  Stopwatch sw;
  double t = 0.0;
  if (c.t) {
    t = *c.t;
  } else {
    const GapBisection gb = gap_bisection(S, S.space->cells_up_to(1), 0.5 * g.min_gap);
    rep.tables["gap_bisection"] = bisection_json(gb);
    if (!gb.ok) throw ExperimentError("gap bisection found no admissible t");
    t = gb.t0;
  }
  const int L = c.resolved_size();
  const CornerLattice lat = corner_lattice(S, L, c.margin, t);
  const DefectReport dr = zero_mode_index(lat.H, corner::chiral(), c.tol, lat.chi);
  rep.timing["zero_modes_dense"] = sw.seconds();
  rep.record("zero_mode_index", dr.zero_mode_index, "padded box " + std::to_string(L) + "x" + std::to_string(L));
  rep.check("zero_mode_index_magnitude", std::abs(dr.zero_mode_index), 1.0, 0.0);
  rep.check("zero_mode_index_parity", std::abs(dr.zero_mode_index) % 2, 1.0, 0.0);
  double lambda0 = 0.0;
  for (const auto& z : dr.zero_modes) lambda0 = std::max(lambda0, std::abs(z.eigenvalue));
  rep.check_le("kernel_eigenvalue", dr.zero_modes.empty() ? std::numeric_limits<double>::infinity() : lambda0,
               c.kernel_tol);
  push_spectrum(rep, "corner", t, dr.spectrum, dr.localization);

  json modes = json::array();
  for (const auto& z : dr.zero_modes)
    modes.push_back({{"eigenvalue", z.eigenvalue}, {"chirality", z.chirality}, {"localization", z.localization}});
  rep.tables["corner"] = {{"mu", c.resolved_mu()},
                          {"t", t},
                          {"size", L},
                          {"margin", c.margin},
                          {"skeleton_gap", g.min_gap},
                          {"loop_chern", loop.value},
                          {"zero_mode_index", dr.zero_mode_index},
                          {"global_index", dr.global_index},
                          {"sector_plus", dr.sector_plus},
                          {"sector_minus", dr.sector_minus},
                          {"kernel_dim", dr.kernel_dim},
                          {"next_eigenvalue", dr.next_eigenvalue},
                          {"window", dr.tol},
                          {"lambda0", lambda0},
                          {"zero_modes", modes}};
  rep.timing["total"] = total.seconds();
  return rep;
}

RunReport run_hinge(const ExperimentConfig& c) {
  RunReport rep = start("reproduce", c);
  Stopwatch total;
  const auto& sg = c.signs;
  const bool inversion = sg[0] == -sg[2] && sg[1] == -sg[3];
  const Symbol S = model_hinge_square(c.resolved_mu(), sg, inversion, c.ell);
  const GapCertificate g = certify(rep, S, S.space->cells_up_to(1), "1-skeleton", c.hinge_grid, 21);
  if (inversion) rep.check_le("inversion_symmetry_defect", symmetry_check(S, SymmetryKind::inversion), 1e-12);

  const int q0 = S.space->cell_id("R12"), r0 = S.space->cell_id("R1");
  LoopChernOptions o;
  o.torus_res = c.hinge_grid;
  o.loop_res = c.hinge_loop_grid;
  o.adaptive = false;
  std::vector<double> values(4);
  json table = json::array();
  Stopwatch sl;
  for (int a = 0; a < 4; ++a) {
    RVector la = S.space->cell(r0 + a).Lambda.row(0).transpose();
    RVector lb = S.space->cell(r0 + (a + 1) % 4).Lambda.row(0).transpose();
    const ChernResult r = loop_chern(S, q0 + a, PairingClass::even, {RVector::Unit(3, 2), la, lb}, o);
    values[a] = r.value;
    rep.record("hinge_loop_chern_" + S.space->cell(q0 + a).label, r);
    table.push_back({{"cell", S.space->cell(q0 + a).label},
                     {"value", r.value},
                     {"expected_pattern", 0.5 * (sg[a] - sg[(a + 1) % 4])},
                     {"refinement_delta", r.refinement_delta}});
  }
  rep.timing["loop_chern"] = sl.seconds();
  // One global sign, fixed by the largest entry.
  int lead = 0;
  for (int a = 1; a < 4; ++a)
    if (std::abs(values[a]) > std::abs(values[lead])) lead = a;
  const double pattern_lead = 0.5 * (sg[lead] - sg[(lead + 1) % 4]);
  const double sign = (pattern_lead == 0.0 || values[lead] * pattern_lead >= 0) ? 1.0 : -1.0;
  for (int a = 0; a < 4; ++a)
    rep.check("hinge_loop_chern_pattern_" + S.space->cell(q0 + a).label, values[a],
              sign * 0.5 * (sg[a] - sg[(a + 1) % 4]), c.hinge_tol);
  if (inversion)
    for (int a = 0; a < 2; ++a)
      rep.check("hinge_inversion_antisymmetry_" + std::to_string(a), values[a] + values[a + 2], 0.0, c.chern_tol);

  double t = 0.0;
  if (c.t) {
    t = *c.t;
  } else {
    const GapBisection gb = gap_bisection(S, S.space->cells_up_to(1), 0.5 * g.min_gap);
    rep.tables["gap_bisection"] = bisection_json(gb);
    if (!gb.ok) throw ExperimentError("gap bisection found no admissible t");
    t = gb.t0;
  }
  const int L = c.resolved_size();
  json flows = json::array();
  std::vector<int> fl;
  Stopwatch sf;
  for (const std::string lab : {"R12", "R23"}) {
    const int cell = S.space->cell_id(lab);
    const HingeFamily hf = hinge_family(S, cell, L, c.margin, t);
    const SpectralFlowResult f = spectral_flow(hf.family, c.flow_samples, 0.5 * g.min_gap, hf.chi);
    fl.push_back(f.flow);
    rep.record("hinge_spectral_flow_" + lab, f.flow, "quarter " + std::to_string(L) + "x" + std::to_string(L));
    rep.check("hinge_flow_matches_loop_" + lab, std::abs(f.flow), std::abs(std::lround(values[cell - q0])), 0.0);
    push_family(rep, "hinge_" + lab, hf.family, hf.chi, c.flow_samples, g.min_gap);
    flows.push_back({{"cell", lab}, {"flow", f.flow}, {"evaluations", f.evaluations}});
  }
  rep.timing["spectral_flow"] = sf.seconds();
  rep.check_odd("hinge_parity_R12_R23", std::abs(fl[0]) + std::abs(fl[1]));
  rep.tables["hinge"] = {{"mu", c.resolved_mu()},
                         {"signs", sg},
                         {"inversion", inversion},
                         {"skeleton_gap", g.min_gap},
                         {"global_sign", sign},
                         {"loop_chern", table},
                         {"t", t},
                         {"size", L},
                         {"flows", flows}};
  rep.timing["total"] = total.seconds();
  return rep;
}

RunReport run_custom(const ExperimentConfig& c) {
  if (c.model != "qwz") throw ExperimentError("custom experiment supports model qwz");
  RunReport rep = start("reproduce", c);
  const Symbol S = model_qwz(c.m);
  certify(rep, S, S.space->zero_cells(), "bulk", c.k_res, 2);
  const ChernResult r = chern_even(torus_mesh(2, c.grid), qwz_projection(S));
  const int f = fhs_for(S, c.grid);
  rep.record("bulk_chern", r);
  rep.record("fhs", f, "plaquette " + std::to_string(c.grid) + "x" + std::to_string(c.grid));
  rep.check("bulk_chern_integrality", r.value, static_cast<double>(r.rounded), c.chern_tol);
  rep.check("bulk_chern_matches_fhs", static_cast<double>(r.rounded), f, 0.0);
  return rep;
}

RunReport run_experiment(const ExperimentConfig& c) {
  if (c.experiment == "interface") return run_interface(c);
  if (c.experiment == "point-defect") return run_point_defect(c);
  if (c.experiment == "corner") return run_corner(c);
  if (c.experiment == "hinge") return run_hinge(c);
  if (c.experiment == "custom") return run_custom(c);
  throw ExperimentError("unknown experiment '" + c.experiment + "'");
}

// ---- thin commands --------------------------------------------------------

RunReport cmd_chern(const ExperimentConfig& c) {
  RunReport rep = start("chern", c);
  ChernResult r;
  std::string name;
  if (c.unitary == "winding") {
    Mesh m;
    m.factors.push_back(torus_factor(c.samples));
    r = chern_odd(m, [](const RVector& k) {
      CMatrix u(1, 1);
      u(0, 0) = std::exp(I * k[0]);
      return u;
    });
    name = "unitary_winding";
    rep.check("unitary_winding_value", r.value, 1.0, 1e-10);
  } else if (c.model == "qwz") {
    const Symbol S = model_qwz(c.m);
    certify(rep, S, S.space->zero_cells(), "bulk", c.grid, 2);
    r = chern_even(torus_mesh(2, c.grid), qwz_projection(S));
    name = "qwz_chern";
    const int f = fhs_for(S, c.grid);
    rep.record("fhs", f, "plaquette " + std::to_string(c.grid) + "x" + std::to_string(c.grid));
    rep.check("matches_fhs", static_cast<double>(r.rounded), f, 0.0);
  } else if (c.model == "corner") {
    const Symbol S = model_corner_quarter(c.resolved_mu(), c.ell);
    LoopChernOptions o;
    o.torus_res = c.grid;
    o.loop_res = c.loop_grid;
    r = loop_chern(S, S.space->cell_id("R12"), PairingClass::odd, {RVector::Unit(2, 0), RVector::Unit(2, 1)}, o);
    name = "quarter_loop_chern";
  } else if (c.model == "dirac") {
    const int d = c.dirac_dim ? c.dirac_dim : 1;
    const Symbol S = model_dirac_defect(d, d, c.ell);
    LoopChernOptions o;
    o.torus_res = c.grid;
    o.loop_res = c.loop_grid;
    std::vector<RVector> kd;
    for (int j = 0; j < d; ++j) kd.push_back(RVector::Unit(d, j));
    r = loop_chern(S, S.space->cell_id("D"), PairingClass::odd, kd, o);
    name = "sphere_pairing";
  } else if (c.model == "interface") {
    RVector lam(2);
    lam << c.lambda[0], c.lambda[1];
    lam /= lam.norm();
    const Symbol S = model_interface(model_qwz(c.m_plus), model_qwz(c.m_minus), lam);
    LoopChernOptions o;
    o.torus_res = c.grid;
    o.loop_res = c.loop_grid;
    r = loop_chern(S, S.space->cell_id("R"), PairingClass::even, {RVector::Unit(2, 0), RVector::Unit(2, 1)}, o);
    name = "interface_loop_chern";
  } else {
    throw ExperimentError("chern: model '" + c.model + "' has no single invariant; use reproduce hinge");
  }
  rep.record(name, r);
  rep.check(name + "_integrality", r.value, static_cast<double>(r.rounded), c.chern_tol);
  return rep;
}

RunReport cmd_spectrum(const ExperimentConfig& c) {
  RunReport rep = start("spectrum", c);
  if (c.model == "qwz") {
    const Symbol S = model_qwz(c.m);
    const int n = c.grid;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        RVector k(2);
        k << 2 * kPi * i / n, 2 * kPi * j / n;
        auto eig = eig_hermitian(eval_symbol(S, bulk_point(), k));
        push_spectrum(rep, "bulk", i * n + j, eig.values, RVector());
      }
  } else if (c.model == "hinge") {
    const auto& sg = c.signs;
    const bool inversion = sg[0] == -sg[2] && sg[1] == -sg[3];
    const Symbol S = model_hinge_square(c.resolved_mu(), sg, inversion, c.ell);
    const HingeFamily hf = hinge_family(S, S.space->cell_id("R23"), c.resolved_size(), c.margin, c.t.value_or(1.0));
    push_family(rep, "hinge_R23", hf.family, hf.chi, c.samples);
  } else if (c.model == "corner") {
    const Symbol S = model_corner_quarter(c.resolved_mu(), c.ell);
    double t = c.t.value_or(0.0);
    if (!c.t) {
      const double g = gap_on(S, S.space->cells_up_to(1), c.k_res, c.omega_res).min_gap;
      t = gap_bisection(S, S.space->cells_up_to(1), 0.5 * g).t0;
    }
    const CornerLattice lat = corner_lattice(S, c.resolved_size(), c.margin, t);
    const DefectReport dr = zero_mode_index(lat.H, corner::chiral(), c.tol, lat.chi);
    push_spectrum(rep, "corner", t, dr.spectrum, dr.localization);
    rep.record("zero_mode_index", dr.zero_mode_index, "padded box");
  } else if (c.model == "interface") {
    RVector lam(2);
    lam << c.lambda[0], c.lambda[1];
    lam /= lam.norm();
    const Symbol S = model_interface(model_qwz(c.m_plus), model_qwz(c.m_minus), lam);
    const int cell = S.space->cell_id("R");
    const BlochSetup setup = bloch_setup(S, cell);
    const double t = c.t.value_or(1.0);
    const int W = c.interface_width, c0 = W / 2;
    const double s = (S.space->cell(cell).Lambda * setup.transverse[0].cast<double>())(0, 0);
    RVector y0(1);
    y0[0] = -t * s * c0;
    const auto Rp = LatticeRegion::make({W}, {true});
    const RVector dchi = site_weights(Rp, S.N, [&](const IVector& n) { return std::abs(n[0] - c0) < W / 4 ? 1.0 : 0.0; });
    push_family(
        rep, "interface_bloch",
        [&](double k) {
          RVector kk(1);
          kk[0] = k;
          return quantize_bloch(S, {cell, y0}, t, Rp, kk, setup).dense();
        },
        dchi, c.samples);
  } else if (c.model == "dirac") {
    const int d = c.dirac_dim ? c.dirac_dim : 1;
    const Symbol S = model_dirac_defect(d, d, c.ell);
    const int L = c.size.value_or(d == 1 ? 60 : 21), mid = L / 2;
    const double t = c.t.value_or(1.0);
    const auto R = LatticeRegion::open_box(std::vector<int>(d, L));
    const auto H = quantize(S, {S.space->cell_id("D"), RVector::Constant(d, -t * mid)}, t, R);
    std::vector<double> chi(R.sites());
    for (long i = 0; i < R.sites(); ++i) chi[i] = (R.coords(i).array() - mid).abs().maxCoeff() <= L / 4 ? 1.0 : 0.0;
    const DefectReport dr = zero_mode_index(H, *S.J, c.tol, chi);
    push_spectrum(rep, "dirac", t, dr.spectrum, dr.localization);
  }
  return rep;
}

RunReport cmd_quantize_dump(const ExperimentConfig& c) {
  RunReport rep = start("quantize-dump", c);
  Symbol S;
  LatticeHamiltonian H;
  bool padded = false;
  const double t = c.t.value_or(1.0);
  const int L = c.size.value_or(8);
  if (c.model == "qwz") {
    S = model_qwz(c.m);
    H = quantize(S, bulk_point(), t, LatticeRegion::make({L, L}, {true, true}));
  } else if (c.model == "corner") {
    S = model_corner_quarter(c.resolved_mu(), c.ell);
    H = corner_lattice(S, L, c.margin, t).H;
    padded = true;
  } else if (c.model == "interface") {
    RVector lam(2);
    lam << c.lambda[0], c.lambda[1];
    lam /= lam.norm();
    S = model_interface(model_qwz(c.m_plus), model_qwz(c.m_minus), lam);
    RVector y0(1);
    y0[0] = -t * L / 2.0;
    H = quantize(S, {S.space->cell_id("R"), y0}, t, LatticeRegion::open_box({L, L}));
  } else if (c.model == "dirac") {
    const int d = c.dirac_dim ? c.dirac_dim : 1;
    S = model_dirac_defect(d, d, c.ell);
    H = quantize(S, {S.space->cell_id("D"), RVector::Constant(d, -t * (L / 2))}, t,
                 LatticeRegion::open_box(std::vector<int>(d, L)));
  } else {
    const auto& sg = c.signs;
    S = model_hinge_square(c.resolved_mu(), sg, false, c.ell);
    RVector y0 = RVector::Constant(2, -t * (L / 2));
    H = quantize(S, {S.space->cell_id("R12"), y0}, t, LatticeRegion::open_box({L, L, 4}));
  }
  const CMatrix D = H.dense();
  rep.check_le("hermiticity_defect", hermiticity_defect(D), 1e-14);
  if (!padded) rep.check_le("locality_defect", locality_defect(H, S), 0.0);
  rep.tables["hamiltonian"] = {{"symbol", H.symbol},
                               {"dim", H.dim()},
                               {"N", H.N},
                               {"sites", H.region.sites()},
                               {"stored_entries", H.matrix.nnz()},
                               {"t", t},
                               {"padded", padded}};
  // Stored (upper-triangle) entries: family "re"/"im", parameter = row, index = col.
  for (const auto& e : H.matrix.entries()) {
    rep.spectrum.push_back({"re", static_cast<double>(e.row), e.col, e.value.real(), 0.0});
    rep.spectrum.push_back({"im", static_cast<double>(e.row), e.col, e.value.imag(), 0.0});
  }
  return rep;
}

}  // namespace adq
