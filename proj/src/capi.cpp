#include "nlsgd/nlsgd.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "nlsgd/config.hpp"
#include "nlsgd/error.hpp"
#include "nlsgd/harness.hpp"
#include "nlsgd/theory.hpp"

struct nlsgd_experiment {
  nlsgd::ExperimentConfig config;
  std::string arm;
  unsigned threads = 0;
};

struct nlsgd_nonlin {
  nlsgd::NonlinearMap map;
};

struct nlsgd_noise {
  nlsgd::NoiseModel model;
};

struct nlsgd_rng {
  nlsgd::RngStream stream;
};

namespace {

thread_local std::string g_last_error;

nlsgd_status fail(nlsgd_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <class F>
nlsgd_status guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return NLSGD_OK;
  } catch (const nlsgd::ConfigError& e) {
    return fail(NLSGD_ERR_CONFIG, e.what());
  } catch (const nlsgd::InvalidArgument& e) {
    return fail(NLSGD_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nlsgd::Unsupported& e) {
    return fail(NLSGD_ERR_UNSUPPORTED, e.what());
  } catch (const nlsgd::IoError& e) {
    return fail(NLSGD_ERR_IO, e.what());
  } catch (const nlsgd::NumericError& e) {
    return fail(NLSGD_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(NLSGD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NLSGD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(NLSGD_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (!p) throw nlsgd::InvalidArgument(std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlsgd::RunOptions options_of(const nlsgd_experiment* e) {
  nlsgd::RunOptions o;
  o.threads = e->threads;
  return o;
}

}  // namespace

extern "C" {

const char* nlsgd_version(void) { return NLSGD_VERSION_STRING; }

const char* nlsgd_last_error(void) { return g_last_error.c_str(); }

const char* nlsgd_status_name(nlsgd_status status) {
  switch (status) {
    case NLSGD_OK: return "ok";
    case NLSGD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NLSGD_ERR_UNSUPPORTED: return "unsupported";
    case NLSGD_ERR_CONFIG: return "config error";
    case NLSGD_ERR_IO: return "i/o error";
    case NLSGD_ERR_NUMERIC: return "numeric error";
    case NLSGD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void nlsgd_string_free(char* s) { std::free(s); }

nlsgd_status nlsgd_experiment_load(const char* path, nlsgd_experiment** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new nlsgd_experiment{nlsgd::load_config(path), {}, 0};
  });
}

nlsgd_status nlsgd_experiment_parse(const char* text, nlsgd_experiment** out) {
  return guard([&] {
    require(text, "text");
    require(out, "out");
    *out = nullptr;
    *out = new nlsgd_experiment{nlsgd::parse_config(text), {}, 0};
  });
}

void nlsgd_experiment_free(nlsgd_experiment* e) { delete e; }

nlsgd_status nlsgd_experiment_set_seed(nlsgd_experiment* e, uint64_t seed) {
  return guard([&] {
    require(e, "experiment");
    e->config.seed = seed;
  });
}

nlsgd_status nlsgd_experiment_set_runs(nlsgd_experiment* e, uint64_t runs) {
  return guard([&] {
    require(e, "experiment");
    if (runs < 1) throw nlsgd::InvalidArgument("runs must be >= 1");
    e->config.runs = runs;
  });
}

nlsgd_status nlsgd_experiment_set_threads(nlsgd_experiment* e, unsigned threads) {
  return guard([&] {
    require(e, "experiment");
    e->threads = threads;
  });
}

nlsgd_status nlsgd_experiment_set_arm(nlsgd_experiment* e, const char* arm) {
  return guard([&] {
    require(e, "experiment");
    const std::string name = arm ? arm : "";
    if (!name.empty()) {
      bool found = false;
      for (const auto& a : e->config.arms) found = found || a.name == name;
      if (!found) throw nlsgd::ConfigError("no arm named '" + name + "'");
    }
    e->arm = name;
  });
}

nlsgd_status nlsgd_experiment_canonical(const nlsgd_experiment* e, char** out) {
  return guard([&] {
    require(e, "experiment");
    require(out, "out");
    *out = dup_string(nlsgd::canonical_text(e->config));
  });
}

nlsgd_status nlsgd_simulate(const nlsgd_experiment* e, const char* out_dir) {
  return guard([&] {
    require(e, "experiment");
    require(out_dir, "out_dir");
    const auto result = nlsgd::simulate(e->config, e->arm, options_of(e));
    nlsgd::emit(out_dir, e->config, result);
  });
}

nlsgd_status nlsgd_tailprob(const nlsgd_experiment* e, const char* out_dir) {
  return guard([&] {
    require(e, "experiment");
    require(out_dir, "out_dir");
    const auto result = nlsgd::tailprob(e->config, e->arm, options_of(e));
    nlsgd::emit(out_dir, e->config, result);
  });
}

nlsgd_status nlsgd_theory(const nlsgd_experiment* e, nlsgd_format format, char** out) {
  return guard([&] {
    require(e, "experiment");
    require(out, "out");
    if (format != NLSGD_FORMAT_TEXT && format != NLSGD_FORMAT_CSV)
      throw nlsgd::InvalidArgument("unknown report format");
    if (e->config.arms.empty()) throw nlsgd::ConfigError("config defines no [arm] sections");
    std::string text = format == NLSGD_FORMAT_CSV ? "arm,key,value\n" : "";
    bool first = true;
    for (const auto& arm : e->config.arms) {
      if (!e->arm.empty() && arm.name != e->arm) continue;
      const auto report = nlsgd::theory_for_arm(e->config, arm);
      if (format == NLSGD_FORMAT_TEXT) {
        if (!first) text += "\n";
        text += report.to_text();
      } else {
        const std::string csv = report.to_csv();
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) text += arm.name + "," + line + "\n";
      }
      first = false;
    }
    *out = dup_string(text);
  });
}

nlsgd_status nlsgd_verify(const nlsgd_experiment* e, char** report, int* passed) {
  return guard([&] {
    require(e, "experiment");
    require(report, "report");
    require(passed, "passed");
    const auto res = nlsgd::verify_config(e->config, e->arm);
    std::string text;
    for (const auto& [k, v] : res.lines) text += k + "=" + v + "\n";
    text += std::string("verify=") + (res.passed ? "pass" : "fail") + "\n";
    *report = dup_string(text);
    *passed = res.passed ? 1 : 0;
  });
}

nlsgd_status nlsgd_project(const nlsgd_experiment* e, const char* out_dir, char** summary) {
  return guard([&] {
    require(e, "experiment");
    require(summary, "summary");
    const auto res = nlsgd::project(e->config);
    std::string text = "project.stream=" + e->config.project.stream + "\n";
    text += "project.n=" + std::to_string(res.points.rows()) + "\n";
    text += "project.mean_ratio=" + nlsgd::stats::format_double(res.mean_ratio) + "\n";
    double min_p = 1.0;
    for (std::size_t i = 0; i < res.ks.size(); ++i) {
      text += "project.ks." + std::to_string(i) + "=D:" + nlsgd::stats::format_double(res.ks[i].statistic) +
              " p:" + nlsgd::stats::format_double(res.ks[i].p_value) + "\n";
      min_p = std::min(min_p, res.ks[i].p_value);
    }
    text += "project.ks_min_p=" + nlsgd::stats::format_double(min_p) + "\n";
    if (out_dir) {
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      if (ec) throw nlsgd::IoError(std::string("cannot create '") + out_dir + "': " + ec.message());
      const auto path = std::filesystem::path(out_dir) / "projection.csv";
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      if (!f) throw nlsgd::IoError("cannot open '" + path.string() + "' for writing");
      f << nlsgd::format_points_csv(res.points);
      if (!f) throw nlsgd::IoError("write failed for '" + path.string() + "'");
    }
    *summary = dup_string(text);
  });
}

nlsgd_status nlsgd_rng_create(uint64_t seed, uint64_t stream, nlsgd_rng** out) {
  return guard([&] {
    require(out, "out");
    *out = new nlsgd_rng{nlsgd::RngStream(seed, stream)};
  });
}

void nlsgd_rng_free(nlsgd_rng* rng) { delete rng; }

nlsgd_status nlsgd_rng_uniform(nlsgd_rng* rng, double* out) {
  return guard([&] {
    require(rng, "rng");
    require(out, "out");
    *out = rng->stream.uniform();
  });
}

nlsgd_status nlsgd_nonlin_create(const char* type, size_t dim, double param, nlsgd_nonlin** out) {
  return guard([&] {
    require(type, "type");
    require(out, "out");
    const std::string t = type;
    nlsgd::NonlinSpec spec;
    spec.type = t;
    spec.m = param;
    spec.M = param;
    if (t == "comp_quant") throw nlsgd::InvalidArgument("use nlsgd_nonlin_create_quantizer for comp_quant");
    *out = new nlsgd_nonlin{nlsgd::build_nonlinearity(spec, dim)};
  });
}

nlsgd_status nlsgd_nonlin_create_quantizer(size_t dim, size_t levels, double range, nlsgd_nonlin** out) {
  return guard([&] {
    require(out, "out");
    *out = new nlsgd_nonlin{nlsgd::NonlinearMap::uniform_quantizer(dim, levels, range)};
  });
}

void nlsgd_nonlin_free(nlsgd_nonlin* map) { delete map; }

nlsgd_status nlsgd_nonlin_apply(const nlsgd_nonlin* map, const double* x, size_t n, double* out) {
  return guard([&] {
    require(map, "map");
    require(x, "x");
    require(out, "out");
    const auto len = static_cast<Eigen::Index>(n);
    Eigen::Map<const nlsgd::Vector> xin(x, len);
    Eigen::Map<nlsgd::Vector> xout(out, len);
    if (x == out) {
      const nlsgd::Vector copy = xin;
      map->map.apply(copy, xout);
    } else {
      map->map.apply(xin, xout);
    }
  });
}

nlsgd_status nlsgd_nonlin_bound(const nlsgd_nonlin* map, double* out) {
  return guard([&] {
    require(map, "map");
    require(out, "out");
    *out = map->map.uniform_bound();
  });
}

nlsgd_status nlsgd_nonlin_check_axioms(const nlsgd_nonlin* map, size_t samples, uint64_t seed, int* passed) {
  return guard([&] {
    require(map, "map");
    require(passed, "passed");
    if (samples < 1) throw nlsgd::InvalidArgument("samples must be >= 1");
    *passed = nlsgd::check_axioms(map->map, samples, seed).all_passed() ? 1 : 0;
  });
}

nlsgd_status nlsgd_noise_create(const char* type, size_t dim, double p1, double p2, nlsgd_noise** out) {
  return guard([&] {
    require(type, "type");
    require(out, "out");
    const std::string t = type;
    nlsgd::NoiseSpec spec;
    spec.type = t;
    spec.alpha = p1;
    if (t == "cauchy") {
      spec.x0 = p1;
      spec.gamma = p2;
    }
    if (t == "mixture") throw nlsgd::InvalidArgument("use nlsgd_noise_create_mixture for mixtures");
    *out = new nlsgd_noise{nlsgd::build_noise(spec, dim)};
  });
}

nlsgd_status nlsgd_noise_create_mixture(double lambda, const nlsgd_noise* symmetric, const nlsgd_noise* nonsymmetric,
                                        nlsgd_noise** out) {
  return guard([&] {
    require(symmetric, "symmetric");
    require(nonsymmetric, "nonsymmetric");
    require(out, "out");
    *out = new nlsgd_noise{nlsgd::NoiseModel::mixture(lambda, symmetric->model, nonsymmetric->model)};
  });
}

nlsgd_status nlsgd_noise_create_shifted(const nlsgd_noise* base, double offset, nlsgd_noise** out) {
  return guard([&] {
    require(base, "base");
    require(out, "out");
    *out = new nlsgd_noise{nlsgd::NoiseModel::shifted(base->model, offset)};
  });
}

void nlsgd_noise_free(nlsgd_noise* noise) { delete noise; }

nlsgd_status nlsgd_noise_sample(const nlsgd_noise* noise, nlsgd_rng* rng, double* out, size_t n) {
  return guard([&] {
    require(noise, "noise");
    require(rng, "rng");
    require(out, "out");
    Eigen::Map<nlsgd::Vector> z(out, static_cast<Eigen::Index>(n));
    noise->model.sample(rng->stream, z);
  });
}

nlsgd_status nlsgd_noise_density(const nlsgd_noise* noise, const double* z, size_t n, double* out) {
  return guard([&] {
    require(noise, "noise");
    require(z, "z");
    require(out, "out");
    *out = noise->model.density(Eigen::Map<const nlsgd::Vector>(z, static_cast<Eigen::Index>(n)));
  });
}

nlsgd_status nlsgd_noise_marginal_cdf(const nlsgd_noise* noise, double z, double* out) {
  return guard([&] {
    require(noise, "noise");
    require(out, "out");
    *out = noise->model.marginal_cdf(z);
  });
}

nlsgd_status nlsgd_eta_constants(const nlsgd_nonlin* map, const nlsgd_noise* noise, double* eta1, double* eta2) {
  return guard([&] {
    require(map, "map");
    require(noise, "noise");
    require(eta1, "eta1");
    require(eta2, "eta2");
    const auto eta = nlsgd::theory::eta_constants(map->map, noise->model);
    *eta1 = eta.eta1;
    *eta2 = eta.eta2;
  });
}

nlsgd_status nlsgd_zeta(double delta, double a, double mu, double gamma, double* out) {
  return guard([&] {
    require(out, "out");
    *out = nlsgd::theory::zeta(delta, a, mu, gamma);
  });
}

nlsgd_status nlsgd_competitor_rates(double p, double* nonconvex_exp, double* strongly_convex_exp) {
  return guard([&] {
    require(nonconvex_exp, "nonconvex_exp");
    require(strongly_convex_exp, "strongly_convex_exp");
    const auto r = nlsgd::theory::competitor_rates(p);
    *nonconvex_exp = r.nonconvex_exp;
    *strongly_convex_exp = r.strongly_convex_exp;
  });
}

nlsgd_status nlsgd_mixture_neighborhood(double lambda, double eta1, double eta2, double C, double* size,
                                        double* lambda_max) {
  return guard([&] {
    require(size, "size");
    require(lambda_max, "lambda_max");
    const auto nb = nlsgd::theory::mixture_neighborhood(lambda, eta1, eta2, C);
    *size = nb.size;
    *lambda_max = nb.lambda_max;
  });
}

}  // extern "C"
