#include "stefan/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stefan/csv.hpp"
#include "stefan/model.hpp"

namespace stefan {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_num(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == nullptr || *end != '\0')
    throw std::invalid_argument("config: " + key + ": not a number: '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  const double x = parse_num(key, v);
  const long long i = static_cast<long long>(x);
  if (static_cast<double>(i) != x)
    throw std::invalid_argument("config: " + key + ": expected an integer, got '" + v + "'");
  return i;
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "domain.period") cfg.domain.period = parse_num(key, v);
  else if (key == "domain.sigma") cfg.domain.sigma = parse_num(key, v);
  else if (key == "domain.horizon") cfg.domain.horizon = parse_num(key, v);
  else if (key == "grid.nx") cfg.grid.nx = static_cast<int>(parse_int(key, v));
  else if (key == "grid.nt") cfg.grid.nt = static_cast<int>(parse_int(key, v));
  else if (key == "region.kind") {
    if (v == "rectangle") cfg.region.kind = ControlRegion::Kind::rectangle;
    else if (v == "tilted_band") cfg.region.kind = ControlRegion::Kind::tilted_band;
    else throw std::invalid_argument("config: region.kind: unknown kind '" + v + "'");
  } else if (key == "region.a") cfg.region.a = parse_num(key, v);
  else if (key == "region.b") cfg.region.b = parse_num(key, v);
  else if (key == "region.c") cfg.region.c = parse_num(key, v);
  else if (key == "region.d") cfg.region.d = parse_num(key, v);
  else if (key == "region.start_x1") cfg.region.start_x1 = parse_num(key, v);
  else if (key == "region.end_x1") cfg.region.end_x1 = parse_num(key, v);
  else if (key == "region.slope") cfg.region.slope = parse_num(key, v);
  else if (key == "region.half_width") cfg.region.half_width = parse_num(key, v);
  else if (key == "initial.preset") cfg.initial = v;
  else if (key == "initial.mode_n") cfg.mode_n = static_cast<int>(parse_int(key, v));
  else if (key == "initial.mode_k") cfg.mode_k = static_cast<int>(parse_int(key, v));
  else if (key == "control.backend") {
    if (v == "kkt") cfg.backend = Backend::kkt;
    else if (v == "gramian_cg") cfg.backend = Backend::gramian_cg;
    else throw std::invalid_argument("config: control.backend: unknown backend '" + v + "'");
  } else if (key == "control.tolerance") cfg.tolerance = parse_num(key, v);
  else if (key == "lr.beta") cfg.lr.beta = parse_num(key, v);
  else if (key == "lr.depth") cfg.lr.J = static_cast<int>(parse_int(key, v));
  else if (key == "lr.nt_total") cfg.lr.nt_total = static_cast<int>(parse_int(key, v));
  else if (key == "lr.window_c") cfg.lr_window_c = parse_num(key, v);
  else if (key == "lr.window_d") cfg.lr_window_d = parse_num(key, v);
  else if (key == "observability.n") cfg.obs_n = parse_num(key, v);
  else if (key == "observability.K") cfg.obs_K = static_cast<int>(parse_int(key, v));
  else if (key == "observability.t_min") cfg.obs_t_min = parse_num(key, v);
  else if (key == "observability.t_max") cfg.obs_t_max = parse_num(key, v);
  else if (key == "observability.points") cfg.obs_points = static_cast<int>(parse_int(key, v));
  else if (key == "window.c") cfg.window_c = parse_num(key, v);
  else if (key == "window.d") cfg.window_d = parse_num(key, v);
  else if (key == "series.c") cfg.series_c = parse_num(key, v);
  else if (key == "series.d") cfg.series_d = parse_num(key, v);
  else if (key == "series.terms") cfg.series_terms = static_cast<int>(parse_int(key, v));
  else if (key == "spectrum.n_max") cfg.spectrum_n_max = static_cast<int>(parse_int(key, v));
  else if (key == "spectrum.K") cfg.spectrum_K = static_cast<int>(parse_int(key, v));
  else if (key == "output.dir") cfg.output_dir = v;
  else if (key == "seed") cfg.seed = static_cast<unsigned long long>(parse_int(key, v));
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  ExperimentConfig cfg = parse_config_text(ss.str());
  apply_env_overrides(cfg);
  return cfg;
}

namespace {
const char* kKeys[] = {
    "domain.period", "domain.sigma", "domain.horizon", "grid.nx", "grid.nt",
    "region.kind", "region.a", "region.b", "region.c", "region.d", "region.start_x1",
    "region.end_x1", "region.slope", "region.half_width", "initial.preset", "initial.mode_n",
    "initial.mode_k", "control.backend", "control.tolerance", "lr.beta", "lr.depth",
    "lr.nt_total", "lr.window_c", "lr.window_d", "observability.n", "observability.K",
    "observability.t_min", "observability.t_max", "observability.points", "window.c", "window.d",
    "series.c", "series.d", "series.terms", "spectrum.n_max", "spectrum.K", "output.dir", "seed"};
}

void apply_env_overrides(ExperimentConfig& cfg) {
  for (const char* key : kKeys) {
    std::string env = "STEFANCTL_";
    for (const char* p = key; *p; ++p)
      env += (*p == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    if (const char* v = std::getenv(env.c_str())) apply_override(cfg, key, v);
  }
}

State ExperimentConfig::make_initial() const {
  if (initial == "single_mode") return preset_single_mode(mode_n, mode_k, grid, domain);
  return preset_initial_data(initial, grid, domain);
}

void ExperimentConfig::validate() const {
  domain.validate();
  grid.validate_against(domain);
  if (!(tolerance > 0.0)) throw std::invalid_argument("config: control.tolerance must be > 0");
  if (lr.J < 1 || lr.J > 12) throw std::invalid_argument("config: lr.depth must be in 1..12");
  if (!(lr.beta > 0.0)) throw std::invalid_argument("config: lr.beta must be > 0");
  if (!(lr_window_c < lr_window_d) || lr_window_c <= -1.0 || lr_window_d >= 1.0)
    throw std::invalid_argument("config: lr window must satisfy -1 < c < d < 1");
  if (obs_K < 4) throw std::invalid_argument("config: observability.K must be >= 4");
  if (obs_points < 2) throw std::invalid_argument("config: observability.points must be >= 2");
  if (!(obs_t_min > 0.0 && obs_t_min < obs_t_max))
    throw std::invalid_argument("config: observability horizon grid must satisfy 0 < t_min < t_max");
  if (!(window_c < window_d) || window_c <= -1.0 || window_d >= 1.0)
    throw std::invalid_argument("config: window must satisfy -1 < c < d < 1");
  if (!(series_c < series_d) || series_c <= -1.0 || series_d >= 1.0)
    throw std::invalid_argument("config: series window must satisfy -1 < c < d < 1");
  if (series_terms < 1) throw std::invalid_argument("config: series.terms must be >= 1");
  if (spectrum_n_max < 1 || spectrum_K < 1)
    throw std::invalid_argument("config: spectrum sweep sizes must be >= 1");
  if (initial != "zero" && initial != "fig_hum" && initial != "single_mode")
    throw std::invalid_argument("config: initial.preset must be zero, fig_hum or single_mode");
}

std::string config_schema_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "domain.period = " << format_double(cfg.domain.period) << "\n";
  os << "domain.sigma = " << format_double(cfg.domain.sigma) << "\n";
  os << "domain.horizon = " << format_double(cfg.domain.horizon) << "\n";
  os << "grid.nx = " << cfg.grid.nx << "\n";
  os << "grid.nt = " << cfg.grid.nt << "\n";
  os << "region.kind = "
     << (cfg.region.kind == ControlRegion::Kind::rectangle ? "rectangle" : "tilted_band") << "\n";
  os << "region.a = " << format_double(cfg.region.a) << "\n";
  os << "region.b = " << format_double(cfg.region.b) << "\n";
  os << "region.c = " << format_double(cfg.region.c) << "\n";
  os << "region.d = " << format_double(cfg.region.d) << "\n";
  os << "region.start_x1 = " << format_double(cfg.region.start_x1) << "\n";
  os << "region.end_x1 = " << format_double(cfg.region.end_x1) << "\n";
  os << "region.slope = " << format_double(cfg.region.slope) << "\n";
  os << "region.half_width = " << format_double(cfg.region.half_width) << "\n";
  os << "initial.preset = " << cfg.initial << "\n";
  os << "initial.mode_n = " << cfg.mode_n << "\n";
  os << "initial.mode_k = " << cfg.mode_k << "\n";
  os << "control.backend = " << to_string(cfg.backend) << "\n";
  os << "control.tolerance = " << format_double(cfg.tolerance) << "\n";
  os << "lr.beta = " << format_double(cfg.lr.beta) << "\n";
  os << "lr.depth = " << cfg.lr.J << "\n";
  os << "lr.nt_total = " << cfg.lr.nt_total << "\n";
  os << "lr.window_c = " << format_double(cfg.lr_window_c) << "\n";
  os << "lr.window_d = " << format_double(cfg.lr_window_d) << "\n";
  os << "observability.n = " << format_double(cfg.obs_n) << "\n";
  os << "observability.K = " << cfg.obs_K << "\n";
  os << "observability.t_min = " << format_double(cfg.obs_t_min) << "\n";
  os << "observability.t_max = " << format_double(cfg.obs_t_max) << "\n";
  os << "observability.points = " << cfg.obs_points << "\n";
  os << "window.c = " << format_double(cfg.window_c) << "\n";
  os << "window.d = " << format_double(cfg.window_d) << "\n";
  os << "series.c = " << format_double(cfg.series_c) << "\n";
  os << "series.d = " << format_double(cfg.series_d) << "\n";
  os << "series.terms = " << cfg.series_terms << "\n";
  os << "spectrum.n_max = " << cfg.spectrum_n_max << "\n";
  os << "spectrum.K = " << cfg.spectrum_K << "\n";
  os << "output.dir = " << cfg.output_dir << "\n";
  os << "seed = " << cfg.seed << "\n";
  return os.str();
}

}  // namespace stefan
