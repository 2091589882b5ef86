#include "rpde/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace rpde {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end || !std::isfinite(out))
    throw ConfigError("key '" + key + "': '" + v + "' is not a finite number");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) throw ConfigError("key '" + key + "': '" + v + "' is not an unsigned integer");
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

// Pulls keys out of one section and reports leftovers.
class SectionReader {
 public:
  SectionReader(const IniSections& ini, const std::string& name) : name_(name) {
    if (auto it = ini.find(name); it != ini.end()) kv_ = it->second;
  }
  void done() const {
    if (!kv_.empty()) throw ConfigError("unknown key '" + kv_.begin()->first + "' in section [" + name_ + "]");
  }
  bool take(const std::string& key, std::string& out) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return false;
    out = it->second;
    kv_.erase(it);
    return true;
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  std::map<std::string, std::string> kv_;
};

}  // namespace

IniSections parse_ini(const std::string& text) {
  IniSections out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside of any section");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!out[section].emplace(key, value).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  const IniSections ini = parse_ini(text);
  static const std::set<std::string> known{"noise", "operator", "kernel", "exponents", "solve", "converge", "shift",
                                           "output"};
  for (const auto& [name, kv] : ini)
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");

  RunConfig cfg;
  std::string v;
  {
    SectionReader r(ini, "noise");
    if (r.take("kind", v)) {
      if (v == "fbm") cfg.noise.kind = NoiseKind::Fbm;
      else if (v == "sine") cfg.noise.kind = NoiseKind::Sine;
      else throw ConfigError("noise.kind must be 'fbm' or 'sine', got '" + v + "'");
    }
    if (r.take("hurst", v)) cfg.noise.hurst = to_double(r.qualified("hurst"), v);
    if (r.take("modes", v)) cfg.noise.modes = static_cast<int>(to_int(r.qualified("modes"), v));
    if (r.take("decay", v)) cfg.noise.decay = to_double(r.qualified("decay"), v);
    if (r.take("eigenvalues", v)) cfg.noise.eigenvalues = to_list(r.qualified("eigenvalues"), v);
    if (r.take("seed", v)) cfg.noise.seed = to_u64(r.qualified("seed"), v);
    if (r.take("level", v)) cfg.noise.level = static_cast<int>(to_int(r.qualified("level"), v));
    if (r.take("horizon", v)) cfg.noise.horizon = to_double(r.qualified("horizon"), v);
    if (r.take("amplitude", v)) cfg.noise.amplitude = to_double(r.qualified("amplitude"), v);
    if (r.take("lift_scale", v)) cfg.noise.lift_scale = to_double(r.qualified("lift_scale"), v);
    r.done();
  }
  {
    SectionReader r(ini, "operator");
    if (r.take("modes", v)) cfg.op.modes = static_cast<int>(to_int(r.qualified("modes"), v));
    if (r.take("eigenvalues", v) && v != "dirichlet_interval")
      cfg.op.eigenvalues = to_list(r.qualified("eigenvalues"), v);
    r.done();
  }
  {
    SectionReader r(ini, "kernel");
    if (r.take("profile", v)) {
      try {
        cfg.kernel.profile = parse_profile(v);
      } catch (const CoefficientError& e) {
        throw ConfigError(std::string("kernel.profile: ") + e.what());
      }
    }
    if (r.take("theta", v) && v != "parabola") cfg.kernel.theta = to_list(r.qualified("theta"), v);
    if (r.take("nodes", v)) cfg.kernel.nodes = static_cast<int>(to_int(r.qualified("nodes"), v));
    r.done();
  }
  {
    SectionReader r(ini, "exponents");
    if (r.take("alpha", v)) cfg.solve.alpha = to_double(r.qualified("alpha"), v);
    if (r.take("beta", v)) cfg.solve.beta = to_double(r.qualified("beta"), v);
    r.done();
  }
  {
    SectionReader r(ini, "solve");
    if (r.take("radius_factor", v)) cfg.solve.radius_factor = to_double(r.qualified("radius_factor"), v);
    if (r.take("lambda_star", v)) cfg.solve.lambda_star = to_double(r.qualified("lambda_star"), v);
    if (r.take("max_iterations", v))
      cfg.solve.max_iterations = static_cast<int>(to_int(r.qualified("max_iterations"), v));
    if (r.take("tolerance", v)) cfg.solve.tolerance = to_double(r.qualified("tolerance"), v);
    if (r.take("xi", v)) cfg.xi = to_list(r.qualified("xi"), v);
    r.done();
  }
  {
    SectionReader r(ini, "converge");
    if (r.take("levels", v)) {
      cfg.converge.levels.clear();
      for (double d : to_list(r.qualified("levels"), v)) {
        if (d != std::floor(d)) throw ConfigError("converge.levels must be integers");
        cfg.converge.levels.push_back(static_cast<int>(d));
      }
    }
    if (r.take("reference_level", v))
      cfg.converge.reference_level = static_cast<int>(to_int(r.qualified("reference_level"), v));
    r.done();
  }
  {
    SectionReader r(ini, "shift");
    if (r.take("fraction", v)) cfg.shift_fraction = to_double(r.qualified("fraction"), v);
    r.done();
  }
  {
    SectionReader r(ini, "output");
    if (r.take("dir", v)) cfg.output_dir = v;
    r.done();
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void RunConfig::validate() const {
  const double H = noise.hurst, a = solve.alpha, b = solve.beta;
  if (!(H > 1.0 / 3.0 && H <= 0.5)) throw ConfigError("constraint 1/3 < H <= 1/2 violated (noise.hurst)");
  if (noise.modes < 1 || noise.modes > 8) throw ConfigError("constraint 1 <= m <= 8 violated (noise.modes)");
  if (!(noise.decay > 0.0)) throw ConfigError("constraint decay > 0 violated (noise.decay)");
  if (!noise.eigenvalues.empty()) {
    if (static_cast<int>(noise.eigenvalues.size()) < noise.modes)
      throw ConfigError("constraint len(noise.eigenvalues) >= m violated");
    for (double l : noise.eigenvalues)
      if (!(l >= 0.0)) throw ConfigError("constraint lambda_n >= 0 violated (noise.eigenvalues)");
  }
  if (noise.level < 2 || noise.level > kMaxSampleLevel)
    throw ConfigError("constraint 2 <= level <= 12 violated (noise.level)");
  if (!(noise.horizon > 0.0)) throw ConfigError("constraint T > 0 violated (noise.horizon)");
  if (!(noise.lift_scale >= 0.0)) throw ConfigError("constraint lift_scale >= 0 violated (noise.lift_scale)");
  if (op.modes < 1 || op.modes > 8) throw ConfigError("constraint 1 <= M <= 8 violated (operator.modes)");
  if (!op.eigenvalues.empty()) {
    if (static_cast<int>(op.eigenvalues.size()) != op.modes)
      throw ConfigError("constraint len(operator.eigenvalues) = M violated");
    for (std::size_t j = 0; j < op.eigenvalues.size(); ++j) {
      if (!(op.eigenvalues[j] >= 0.0)) throw ConfigError("constraint mu_j >= 0 violated (operator.eigenvalues)");
      if (j > 0 && op.eigenvalues[j] < op.eigenvalues[j - 1])
        throw ConfigError("constraint mu_j nondecreasing violated (operator.eigenvalues)");
    }
  }
  if (!kernel.theta.empty() && static_cast<int>(kernel.theta.size()) < op.modes)
    throw ConfigError("constraint len(kernel.theta) >= M violated");
  if (kernel.nodes != 0) {
    if (kernel.nodes < 4 * std::max(op.modes, noise.modes))
      throw ConfigError("constraint P >= 4 M violated (kernel.nodes)");
    if (kernel.nodes % 16 != 0) throw ConfigError("constraint P multiple of 16 violated (kernel.nodes)");
  }
  if (!(b > 1.0 / 3.0)) throw ConfigError("constraint beta > 1/3 violated (exponents.beta)");
  if (!(b < a)) throw ConfigError("constraint beta < alpha violated (exponents)");
  if (!(a <= 0.5)) throw ConfigError("constraint alpha <= 1/2 violated (exponents.alpha)");
  if (!(a + 2.0 * b > 1.0)) throw ConfigError("constraint alpha + 2 beta > 1 violated (exponents)");
  if (!(a < H)) throw ConfigError("constraint alpha < H violated (exponents.alpha, noise.hurst)");
  if (!(solve.lambda_star > 0.0 && solve.lambda_star < 1.0))
    throw ConfigError("constraint 0 < lambda_star < 1 violated (solve.lambda_star)");
  if (solve.max_iterations < 1) throw ConfigError("constraint max_iterations >= 1 violated (solve.max_iterations)");
  if (!(solve.tolerance > 0.0)) throw ConfigError("constraint tolerance > 0 violated (solve.tolerance)");
  if (!(solve.radius_factor > 0.0)) throw ConfigError("constraint radius_factor > 0 violated (solve.radius_factor)");
  if (xi.empty() || static_cast<int>(xi.size()) > op.modes)
    throw ConfigError("constraint 1 <= len(solve.xi) <= M violated");
  if (converge.levels.empty()) throw ConfigError("constraint converge.levels non-empty violated");
  for (int l : converge.levels)
    if (l < 1 || l >= converge.reference_level)
      throw ConfigError("constraint 1 <= converge level < reference_level violated (converge.levels)");
  if (converge.reference_level > 16) throw ConfigError("constraint reference_level <= 16 violated");
  if (!(shift_fraction >= 0.0 && shift_fraction < 1.0))
    throw ConfigError("constraint 0 <= shift.fraction < 1 violated (shift.fraction)");
  if (output_dir.empty()) throw ConfigError("constraint output.dir non-empty violated");
}

QfBmSpec RunConfig::qfbm_spec() const {
  QfBmSpec s;
  s.hurst = noise.hurst;
  s.modes = noise.modes;
  s.decay = noise.decay;
  s.eigenvalues = noise.eigenvalues;
  s.seed = noise.seed;
  s.grid = grid();
  return s;
}

SpectralOperator RunConfig::spectral_operator() const {
  if (op.eigenvalues.empty()) return SpectralOperator::dirichlet_interval(op.modes);
  return SpectralOperator(Eigen::Map<const Eigen::VectorXd>(op.eigenvalues.data(), op.modes));
}

KernelSpec RunConfig::kernel_spec() const { return KernelSpec{kernel.profile, kernel.theta, kernel.nodes}; }

KernelCoefficient RunConfig::coefficient() const { return KernelCoefficient(kernel_spec(), op.modes, noise.modes); }

Eigen::VectorXd RunConfig::initial_value() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(op.modes);
  for (std::size_t i = 0; i < xi.size(); ++i) x(static_cast<Eigen::Index>(i)) = xi[i];
  return x;
}

Path RunConfig::noise_path(int lvl) const {
  const TimeGrid g(noise.horizon, lvl);
  if (noise.kind == NoiseKind::Sine) {
    if (noise.eigenvalues.empty()) return sine_noise(g, noise.modes, noise.amplitude, noise.decay);
    Path p = sine_noise(g, noise.modes, noise.amplitude, 0.0);
    for (int n = 0; n < noise.modes; ++n) p.values().row(n) *= std::sqrt(noise.eigenvalues[n]);
    return p;
  }
  QfBmSpec s = qfbm_spec();
  s.grid = g;
  return assemble_qfbm(s);
}

RoughLift RunConfig::lift(int lvl) const {
  RoughLift l = lift_on_grid(noise_path(lvl), solve.alpha);
  return noise.lift_scale == 1.0 ? l : scale_lift(l, noise.lift_scale);
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream o;
  o << "[noise]\n"
    << "kind = " << (c.noise.kind == NoiseKind::Fbm ? "fbm" : "sine") << "\n"
    << "hurst = " << fmt(c.noise.hurst) << "\n"
    << "modes = " << c.noise.modes << "\n"
    << "decay = " << fmt(c.noise.decay) << "\n";
  if (!c.noise.eigenvalues.empty()) o << "eigenvalues = " << fmt_list(c.noise.eigenvalues) << "\n";
  o << "seed = " << c.noise.seed << "\n"
    << "level = " << c.noise.level << "\n"
    << "horizon = " << fmt(c.noise.horizon) << "\n"
    << "amplitude = " << fmt(c.noise.amplitude) << "\n"
    << "lift_scale = " << fmt(c.noise.lift_scale) << "\n\n"
    << "[operator]\n"
    << "modes = " << c.op.modes << "\n"
    << "eigenvalues = " << (c.op.eigenvalues.empty() ? std::string("dirichlet_interval") : fmt_list(c.op.eigenvalues))
    << "\n\n"
    << "[kernel]\n"
    << "profile = " << to_string(c.kernel.profile) << "\n"
    << "theta = " << (c.kernel.theta.empty() ? std::string("parabola") : fmt_list(c.kernel.theta)) << "\n"
    << "nodes = " << c.kernel.nodes << "\n\n"
    << "[exponents]\n"
    << "alpha = " << fmt(c.solve.alpha) << "\n"
    << "beta = " << fmt(c.solve.beta) << "\n\n"
    << "[solve]\n"
    << "radius_factor = " << fmt(c.solve.radius_factor) << "\n"
    << "lambda_star = " << fmt(c.solve.lambda_star) << "\n"
    << "max_iterations = " << c.solve.max_iterations << "\n"
    << "tolerance = " << fmt(c.solve.tolerance) << "\n"
    << "xi = " << fmt_list(c.xi) << "\n\n"
    << "[converge]\n"
    << "levels = ";
  for (std::size_t i = 0; i < c.converge.levels.size(); ++i) o << (i ? ", " : "") << c.converge.levels[i];
  o << "\nreference_level = " << c.converge.reference_level << "\n\n"
    << "[shift]\n"
    << "fraction = " << fmt(c.shift_fraction) << "\n\n"
    << "[output]\n"
    << "dir = " << c.output_dir << "\n";
  return o.str();
}

}  // namespace rpde
