#include "nlsgd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nlsgd/error.hpp"
#include "nlsgd/stats.hpp"

namespace nlsgd {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  std::string kind;
  std::string arg;
  int line = 0;
  std::map<std::string, Entry> entries;

  std::string where(const std::string& key) const {
    const auto it = entries.find(key);
    const int l = it == entries.end() ? line : it->second.line;
    return "line " + std::to_string(l) + " ([" + kind + (arg.empty() ? "" : " " + arg) + "] " + key + ")";
  }

  const Entry* get(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  void check_all_used() const {
    for (const auto& [k, e] : entries)
      if (!e.used)
        throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + k + "' in [" + kind + "]");
  }

  double to_double(const std::string& key, const Entry& e) const {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE)
      throw ConfigError(where(key) + ": expected a real number, got '" + e.value + "'");
    return v;
  }

  std::uint64_t to_u64(const std::string& key, const Entry& e) const {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size())
      throw ConfigError(where(key) + ": expected a non-negative integer, got '" + e.value + "'");
    return v;
  }

  void read(const std::string& key, double& out) {
    if (const Entry* e = get(key)) out = to_double(key, *e);
  }
  void read(const std::string& key, std::uint64_t& out) {
    if (const Entry* e = get(key)) out = to_u64(key, *e);
  }
  void read_size(const std::string& key, std::size_t& out) {
    if (const Entry* e = get(key)) out = static_cast<std::size_t>(to_u64(key, *e));
  }
  void read(const std::string& key, std::string& out) {
    if (const Entry* e = get(key)) out = e->value;
  }
  void read_list(const std::string& key, std::vector<std::string>& out) {
    const Entry* e = get(key);
    if (!e) return;
    out.clear();
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError(where(key) + ": empty list item");
      out.push_back(item);
    }
  }
  void read_list(const std::string& key, std::vector<double>& out) {
    std::vector<std::string> items;
    read_list(key, items);
    if (items.empty()) return;
    out.clear();
    for (const auto& s : items) out.push_back(to_double(key, Entry{s, entries.at(key).line, true}));
  }
};

std::vector<Section> split_sections(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      const std::string inner = trim(std::string_view(line).substr(1, line.size() - 2));
      Section s;
      s.line = lineno;
      const auto sp = inner.find_first_of(" \t");
      s.kind = inner.substr(0, sp);
      if (sp != std::string::npos) s.arg = trim(inner.substr(sp));
      static const std::set<std::string> known{"experiment", "problem", "noise", "arm", "project", "verify"};
      if (!known.count(s.kind))
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + s.kind + "]");
      if (s.kind == "arm" && s.arg.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": [arm] needs a name");
      if (s.kind != "arm" && !s.arg.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": [" + s.kind + "] takes no argument");
      for (const auto& prev : sections)
        if (prev.kind == s.kind && prev.arg == s.arg)
          throw ConfigError("line " + std::to_string(lineno) + ": duplicate section [" + inner + "]");
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (sections.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    auto& entries = sections.back().entries;
    if (entries.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    entries.emplace(key, Entry{value, lineno, false});
  }
  return sections;
}

void read_noise(Section& s, const std::string& prefix, NoiseSpec& spec) {
  s.read(prefix + "type", spec.type);
  s.read(prefix + "alpha", spec.alpha);
  s.read(prefix + "x0", spec.x0);
  s.read(prefix + "gamma", spec.gamma);
  s.read(prefix + "shift", spec.shift);
}

const std::set<std::string> kNoiseTypes{"power_tail", "log_squared", "cauchy", "radial_power_tail", "mixture",
                                        "point_mass"};
const std::set<std::string> kNonlinTypes{"sign", "comp_clip", "comp_quant", "normalize", "joint_clip"};
const std::set<std::string> kMetrics{"dist2", "gradnorm2", "gap", "wavg_dist2", "min_gradnorm2", "avg_huber"};

void check_type(const Section& s, const std::string& key, const std::string& value, const std::set<std::string>& ok) {
  if (!ok.count(value)) {
    std::string list;
    for (const auto& v : ok) list += (list.empty() ? "" : ", ") + v;
    throw ConfigError(s.where(key) + ": unknown value '" + value + "' (expected one of " + list + ")");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  auto sections = split_sections(text);
  ExperimentConfig cfg;
  for (auto& s : sections) {
    if (s.kind == "experiment") {
      s.read("name", cfg.name);
      s.read("T", cfg.T);
      s.read("runs", cfg.runs);
      s.read("seed", cfg.seed);
      s.read("threads", cfg.threads);
      s.read("stride", cfg.stride);
      s.read_list("metrics", cfg.metrics);
      for (const auto& m : cfg.metrics) check_type(s, "metrics", m, kMetrics);
      s.read_list("tail_eps", cfg.tail_eps);
      s.read_size("bootstrap_n", cfg.bootstrap_n);
      s.read_list("x1", cfg.x1);
      if (cfg.T < 1) throw ConfigError(s.where("T") + ": T must be >= 1");
      if (cfg.runs < 1) throw ConfigError(s.where("runs") + ": runs must be >= 1");
      if (cfg.stride < 1) throw ConfigError(s.where("stride") + ": stride must be >= 1");
      if (cfg.bootstrap_n < 1) throw ConfigError(s.where("bootstrap_n") + ": bootstrap_n must be >= 1");
      for (double e : cfg.tail_eps)
        if (!(e > 0.0)) throw ConfigError(s.where("tail_eps") + ": thresholds must be positive");
    } else if (s.kind == "problem") {
      auto& p = cfg.problem;
      s.read("type", p.type);
      check_type(s, "type", p.type, {"quadratic", "isotropic", "smooth_nonconvex"});
      s.read_size("dim", p.dim);
      s.read("mu", p.mu);
      s.read("L", p.L);
      s.read("seed", p.seed);
      s.read("curvature", p.curvature);
      s.read("minimizer", p.minimizer);
      if (p.dim < 1) throw ConfigError(s.where("dim") + ": dim must be >= 1");
    } else if (s.kind == "noise") {
      auto& n = cfg.noise;
      read_noise(s, "", n);
      check_type(s, "type", n.type, kNoiseTypes);
      s.read("lambda", n.lambda);
      if (n.type == "mixture") {
        auto sym = std::make_shared<NoiseSpec>();
        sym->alpha = n.alpha;
        read_noise(s, "symmetric.", *sym);
        check_type(s, "symmetric.type", sym->type, kNoiseTypes);
        auto non = std::make_shared<NoiseSpec>();
        non->alpha = sym->alpha;
        non->shift = 1.0;
        read_noise(s, "nonsymmetric.", *non);
        check_type(s, "nonsymmetric.type", non->type, kNoiseTypes);
        if (sym->type == "mixture" || non->type == "mixture")
          throw ConfigError(s.where("type") + ": nested mixtures are not supported");
        n.symmetric = std::move(sym);
        n.nonsymmetric = std::move(non);
      }
    } else if (s.kind == "arm") {
      ArmSpec arm;
      arm.name = s.arg;
      for (char c : arm.name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
          throw ConfigError("line " + std::to_string(s.line) + ": arm name may use [A-Za-z0-9_-] only");
      s.read("nonlinearity", arm.nonlinearity.type);
      check_type(s, "nonlinearity", arm.nonlinearity.type, kNonlinTypes);
      s.read("m", arm.nonlinearity.m);
      s.read("M", arm.nonlinearity.M);
      s.read_size("levels", arm.nonlinearity.levels);
      s.read("range", arm.nonlinearity.range);
      s.read("a", arm.schedule.a);
      s.read("delta", arm.schedule.delta);
      try {
        arm.schedule.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError("line " + std::to_string(s.line) + ": " + e.what());
      }
      cfg.arms.push_back(std::move(arm));
    } else if (s.kind == "project") {
      s.read("stream", cfg.project.stream);
      check_type(s, "stream", cfg.project.stream, {"noise", "gradient"});
      s.read_size("n", cfg.project.n);
      s.read("seed", cfg.project.seed);
    } else if (s.kind == "verify") {
      auto& v = cfg.verify;
      s.read_size("axiom_samples", v.axiom_samples);
      s.read_size("huber_points", v.huber_points);
      s.read_size("huber_n_mc", v.huber_n_mc);
      s.read_size("selftest_n", v.selftest_n);
      s.read_size("effective_n", v.effective_n);
      s.read_size("mgf_directions", v.mgf_directions);
    }
    s.check_all_used();
  }
  if (cfg.x1.size() != 1 && cfg.x1.size() != cfg.problem.dim)
    throw ConfigError("x1 must have one value or exactly dim = " + std::to_string(cfg.problem.dim) + " values");

  // Surface model errors as config errors before any run starts.
  try {
    const auto noise = build_noise(cfg.noise, cfg.problem.dim);
    for (const auto& arm : cfg.arms) (void)build_nonlinearity(arm.nonlinearity, cfg.problem.dim);
    if (cfg.problem.type == "isotropic" && !(cfg.problem.curvature > 0.0))
      throw InvalidArgument("isotropic problem needs curvature > 0");
    if (cfg.problem.type == "quadratic" && (!(cfg.problem.mu > 0.0) || !(cfg.problem.L >= cfg.problem.mu)))
      throw InvalidArgument("quadratic problem needs 0 < mu <= L");
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

void echo_noise(std::ostringstream& os, const std::string& prefix, const NoiseSpec& n) {
  using stats::format_double;
  os << prefix << "type=" << n.type << "\n";
  os << prefix << "alpha=" << format_double(n.alpha) << "\n";
  os << prefix << "x0=" << format_double(n.x0) << "\n";
  os << prefix << "gamma=" << format_double(n.gamma) << "\n";
  os << prefix << "shift=" << format_double(n.shift) << "\n";
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (const auto& x : v) {
    if (!out.empty()) out += ",";
    if constexpr (std::is_same_v<T, double>)
      out += stats::format_double(x);
    else
      out += x;
  }
  return out;
}

}  // namespace

std::string canonical_text(const ExperimentConfig& c) {
  using stats::format_double;
  std::ostringstream os;
  os << "experiment.name=" << c.name << "\n";
  os << "experiment.T=" << c.T << "\n";
  os << "experiment.runs=" << c.runs << "\n";
  os << "experiment.seed=" << c.seed << "\n";
  os << "experiment.stride=" << c.stride << "\n";
  os << "experiment.metrics=" << join(c.metrics) << "\n";
  os << "experiment.tail_eps=" << join(c.tail_eps) << "\n";
  os << "experiment.bootstrap_n=" << c.bootstrap_n << "\n";
  os << "experiment.x1=" << join(c.x1) << "\n";
  const auto& p = c.problem;
  os << "problem.type=" << p.type << "\n";
  os << "problem.dim=" << p.dim << "\n";
  os << "problem.mu=" << format_double(p.mu) << "\n";
  os << "problem.L=" << format_double(p.L) << "\n";
  os << "problem.seed=" << p.seed << "\n";
  os << "problem.curvature=" << format_double(p.curvature) << "\n";
  os << "problem.minimizer=" << format_double(p.minimizer) << "\n";
  echo_noise(os, "noise.", c.noise);
  os << "noise.lambda=" << format_double(c.noise.lambda) << "\n";
  if (c.noise.symmetric) echo_noise(os, "noise.symmetric.", *c.noise.symmetric);
  if (c.noise.nonsymmetric) echo_noise(os, "noise.nonsymmetric.", *c.noise.nonsymmetric);
  for (const auto& a : c.arms) {
    const std::string pre = "arm." + a.name + ".";
    os << pre << "nonlinearity=" << a.nonlinearity.type << "\n";
    os << pre << "m=" << format_double(a.nonlinearity.m) << "\n";
    os << pre << "M=" << format_double(a.nonlinearity.M) << "\n";
    os << pre << "levels=" << a.nonlinearity.levels << "\n";
    os << pre << "range=" << format_double(a.nonlinearity.range) << "\n";
    os << pre << "a=" << format_double(a.schedule.a) << "\n";
    os << pre << "delta=" << format_double(a.schedule.delta) << "\n";
  }
  os << "project.stream=" << c.project.stream << "\n";
  os << "project.n=" << c.project.n << "\n";
  os << "project.seed=" << c.project.seed << "\n";
  const auto& v = c.verify;
  os << "verify.axiom_samples=" << v.axiom_samples << "\n";
  os << "verify.huber_points=" << v.huber_points << "\n";
  os << "verify.huber_n_mc=" << v.huber_n_mc << "\n";
  os << "verify.selftest_n=" << v.selftest_n << "\n";
  os << "verify.effective_n=" << v.effective_n << "\n";
  os << "verify.mgf_directions=" << v.mgf_directions << "\n";
  return os.str();
}

Problem build_problem(const ProblemSpec& spec) {
  if (spec.type == "quadratic") return make_quadratic(spec.dim, spec.mu, spec.L, spec.seed);
  if (spec.type == "smooth_nonconvex") return make_smooth_nonconvex(spec.dim, spec.seed);
  if (spec.type == "isotropic") {
    const auto n = static_cast<Eigen::Index>(spec.dim);
    Matrix A = spec.curvature * Matrix::Identity(n, n);
    Vector b = Vector::Constant(n, -spec.curvature * spec.minimizer);
    return Problem(problem::Quadratic{std::move(A), std::move(b)});
  }
  throw InvalidArgument("unknown problem type '" + spec.type + "'");
}

NoiseModel build_noise(const NoiseSpec& spec, std::size_t dim) {
  auto base = [&]() -> NoiseModel {
    if (spec.type == "power_tail") return NoiseModel::power_tail(dim, spec.alpha);
    if (spec.type == "log_squared") return NoiseModel::log_squared(dim);
    if (spec.type == "cauchy") return NoiseModel::cauchy(dim, spec.x0, spec.gamma);
    if (spec.type == "radial_power_tail") return NoiseModel::radial_power_tail(dim, spec.alpha);
    if (spec.type == "point_mass") return NoiseModel::point_mass(dim);
    if (spec.type == "mixture") {
      if (!spec.symmetric || !spec.nonsymmetric) throw InvalidArgument("mixture needs both components");
      return NoiseModel::mixture(spec.lambda, build_noise(*spec.symmetric, dim), build_noise(*spec.nonsymmetric, dim));
    }
    throw InvalidArgument("unknown noise type '" + spec.type + "'");
  }();
  if (spec.shift != 0.0 && spec.type != "mixture") return NoiseModel::shifted(std::move(base), spec.shift);
  return base;
}

NonlinearMap build_nonlinearity(const NonlinSpec& spec, std::size_t dim) {
  if (spec.type == "sign") return NonlinearMap::sign(dim);
  if (spec.type == "comp_clip") return NonlinearMap::comp_clip(dim, spec.m);
  if (spec.type == "comp_quant") return NonlinearMap::uniform_quantizer(dim, spec.levels, spec.range);
  if (spec.type == "normalize") return NonlinearMap::normalize(dim);
  if (spec.type == "joint_clip") return NonlinearMap::joint_clip(dim, spec.M);
  throw InvalidArgument("unknown nonlinearity '" + spec.type + "'");
}

Vector build_x1(const ExperimentConfig& config) {
  const auto n = static_cast<Eigen::Index>(config.problem.dim);
  if (config.x1.size() == 1) return Vector::Constant(n, config.x1.front());
  if (config.x1.size() != config.problem.dim) throw ConfigError("x1 length does not match the problem dimension");
  return Eigen::Map<const Vector>(config.x1.data(), n);
}

}  // namespace nlsgd
