#include "adq/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace adq {

using nlohmann::json;

double ExperimentConfig::resolved_mu() const {
  if (mu) return *mu;
  return experiment == "hinge" || model == "hinge" ? 1.0 : 1.5;
}

int ExperimentConfig::resolved_size() const {
  if (size) return *size;
  if (experiment == "hinge") return 12;
  if (experiment == "point-defect") return dirac_dim == 2 ? 21 : 60;
  return 24;
}

namespace {

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    out.reset();
  else
    out = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment", "model",       "mu",          "m",           "m_plus",        "m_minus",
      "signs",      "lambda",      "ell",         "dirac_dim",   "t",             "size",
      "grid",       "loop_grid",   "hinge_grid",  "hinge_loop_grid", "interface_width",
      "interface_length", "margin", "flow_samples", "samples",   "unitary",       "k_res",
      "omega_res",  "tol",         "flatten_fraction", "chern_tol", "refine_tol", "hinge_tol",
      "kernel_tol", "runtime_limit", "seed",      "out_dir"};
  return keys;
}

}  // namespace

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"experiment", c.experiment},
           {"model", c.model},
           {"mu", opt_json(c.mu)},
           {"m", c.m},
           {"m_plus", c.m_plus},
           {"m_minus", c.m_minus},
           {"signs", c.signs},
           {"lambda", c.lambda},
           {"ell", c.ell},
           {"dirac_dim", c.dirac_dim},
           {"t", opt_json(c.t)},
           {"size", opt_json(c.size)},
           {"grid", c.grid},
           {"loop_grid", c.loop_grid},
           {"hinge_grid", c.hinge_grid},
           {"hinge_loop_grid", c.hinge_loop_grid},
           {"interface_width", c.interface_width},
           {"interface_length", c.interface_length},
           {"margin", c.margin},
           {"flow_samples", c.flow_samples},
           {"samples", c.samples},
           {"unitary", c.unitary},
           {"k_res", c.k_res},
           {"omega_res", c.omega_res},
           {"tol", c.tol},
           {"flatten_fraction", c.flatten_fraction},
           {"chern_tol", c.chern_tol},
           {"refine_tol", c.refine_tol},
           {"hinge_tol", c.hinge_tol},
           {"kernel_tol", c.kernel_tol},
           {"runtime_limit", c.runtime_limit},
           {"seed", c.seed},
           {"out_dir", c.out_dir}};
}

void from_json(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigFileError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known_keys().count(it.key())) throw ConfigFileError("unknown config key '" + it.key() + "'");
  try {
    read(j, "experiment", c.experiment);
    read(j, "model", c.model);
    read_opt(j, "mu", c.mu);
    read(j, "m", c.m);
    read(j, "m_plus", c.m_plus);
    read(j, "m_minus", c.m_minus);
    read(j, "signs", c.signs);
    read(j, "lambda", c.lambda);
    read(j, "ell", c.ell);
    read(j, "dirac_dim", c.dirac_dim);
    read_opt(j, "t", c.t);
    read_opt(j, "size", c.size);
    read(j, "grid", c.grid);
    read(j, "loop_grid", c.loop_grid);
    read(j, "hinge_grid", c.hinge_grid);
    read(j, "hinge_loop_grid", c.hinge_loop_grid);
    read(j, "interface_width", c.interface_width);
    read(j, "interface_length", c.interface_length);
    read(j, "margin", c.margin);
    read(j, "flow_samples", c.flow_samples);
    read(j, "samples", c.samples);
    read(j, "unitary", c.unitary);
    read(j, "k_res", c.k_res);
    read(j, "omega_res", c.omega_res);
    read(j, "tol", c.tol);
    read(j, "flatten_fraction", c.flatten_fraction);
    read(j, "chern_tol", c.chern_tol);
    read(j, "refine_tol", c.refine_tol);
    read(j, "hinge_tol", c.hinge_tol);
    read(j, "kernel_tol", c.kernel_tol);
    read(j, "runtime_limit", c.runtime_limit);
    read(j, "seed", c.seed);
    read(j, "out_dir", c.out_dir);
  } catch (const json::exception& e) {
    throw ConfigFileError(std::string("config type error: ") + e.what());
  }
}

void validate(const ExperimentConfig& c) {
  static const std::set<std::string> experiments = {"interface", "point-defect", "corner", "hinge", "custom"};
  static const std::set<std::string> models = {"qwz", "interface", "corner", "hinge", "dirac"};
  auto fail = [](const std::string& msg) { throw ConfigFileError("invalid config: " + msg); };
  if (!experiments.count(c.experiment)) fail("unknown experiment '" + c.experiment + "'");
  if (!models.count(c.model)) fail("unknown model '" + c.model + "'");
  if (c.signs.size() != 4) fail("signs needs four entries");
  for (int s : c.signs)
    if (s != 1 && s != -1) fail("signs must be +1 or -1");
  if (c.lambda.size() != 2) fail("lambda must have two components for the planar interface");
  if (std::hypot(c.lambda[0], c.lambda[1]) == 0.0) fail("lambda must be nonzero");
  if (c.dirac_dim < 0 || c.dirac_dim > 2) fail("dirac_dim must be 0, 1 or 2");
  if (c.t && !(*c.t > 0.0 && *c.t <= 1.0)) fail("t must lie in (0,1]");
  if (c.size && *c.size < 4) fail("size must be at least 4");
  if (c.grid < 4 || c.loop_grid < 8 || c.hinge_grid < 4 || c.hinge_loop_grid < 8) fail("mesh resolutions too small");
  if (c.grid % 2 || c.loop_grid % 2 || c.hinge_grid % 2 || c.hinge_loop_grid % 2)
    fail("mesh resolutions must be even so the mesh can be halved");
  if (c.interface_width < 16 || c.interface_length < 4) fail("interface lattice too small");
  if (c.margin < 0) fail("margin must be nonnegative");
  if (c.flow_samples < 4 || c.samples < 4) fail("sample counts too small");
  if (!(c.tol > 0.0)) fail("tol must be positive");
  if (!(c.flatten_fraction > 0.0 && c.flatten_fraction < 1.0)) fail("flatten_fraction must lie in (0,1)");
  if (!(c.ell > 0.0)) fail("ell must be positive");
  if (!c.unitary.empty() && c.unitary != "winding") fail("unitary must be 'winding' or empty");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigFileError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c = j.get<ExperimentConfig>();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigFileError("bad number '" + item + "' in list '" + s + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigFileError("bad number '" + item + "' in list '" + s + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_real_list(s)) {
    if (v != std::round(v)) throw ConfigFileError("expected integers in '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string inputs_hash(const ExperimentConfig& c) {
  json j = c;
  j.erase("out_dir");
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace adq
