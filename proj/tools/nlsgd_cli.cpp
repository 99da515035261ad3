#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "nlsgd/nlsgd.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerifyFailed = 2;

struct Options {
  std::string config;
  std::string out = ".";
  std::string format = "text";
  std::uint64_t seed = 0;
  std::uint64_t runs = 0;
  unsigned threads = 0;
  std::string arm;
};

struct ExperimentDeleter {
  void operator()(nlsgd_experiment* e) const { nlsgd_experiment_free(e); }
};
using Experiment = std::unique_ptr<nlsgd_experiment, ExperimentDeleter>;

struct StringDeleter {
  void operator()(char* s) const { nlsgd_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

int report(nlsgd_status s) {
  std::fprintf(stderr, "nlsgd: %s: %s\n", nlsgd_status_name(s), nlsgd_last_error());
  return kExitError;
}

int run_command(const std::string& name, const Options& opt, const CLI::App& sub) {
  nlsgd_experiment* raw = nullptr;
  if (auto s = nlsgd_experiment_load(opt.config.c_str(), &raw)) return report(s);
  Experiment e(raw);
  if (sub.count("--seed"))
    if (auto s = nlsgd_experiment_set_seed(e.get(), opt.seed)) return report(s);
  if (sub.count("--runs"))
    if (auto s = nlsgd_experiment_set_runs(e.get(), opt.runs)) return report(s);
  if (sub.count("--threads"))
    if (auto s = nlsgd_experiment_set_threads(e.get(), opt.threads)) return report(s);
  if (sub.count("--arm"))
    if (auto s = nlsgd_experiment_set_arm(e.get(), opt.arm.c_str())) return report(s);

  if (name == "simulate") {
    if (auto s = nlsgd_simulate(e.get(), opt.out.c_str())) return report(s);
    return kExitOk;
  }
  if (name == "tailprob") {
    if (auto s = nlsgd_tailprob(e.get(), opt.out.c_str())) return report(s);
    return kExitOk;
  }
  char* text = nullptr;
  if (name == "theory") {
    const auto fmt = opt.format == "csv" ? NLSGD_FORMAT_CSV : NLSGD_FORMAT_TEXT;
    if (auto s = nlsgd_theory(e.get(), fmt, &text)) return report(s);
    OwnedString owned(text);
    std::fputs(text, stdout);
    return kExitOk;
  }
  if (name == "verify") {
    int passed = 0;
    if (auto s = nlsgd_verify(e.get(), &text, &passed)) return report(s);
    OwnedString owned(text);
    std::fputs(text, stdout);
    return passed ? kExitOk : kExitVerifyFailed;
  }
  if (name == "project") {
    const char* out = sub.count("--out") ? opt.out.c_str() : nullptr;
    if (auto s = nlsgd_project(e.get(), out, &text)) return report(s);
    OwnedString owned(text);
    std::fputs(text, stdout);
    return kExitOk;
  }
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear SGD under heavy-tailed noise"};
  app.set_version_flag("--version", std::string(nlsgd_version()));
  app.require_subcommand(1);

  Options opt;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"simulate", "run every arm and write mean metric curves"},
      {"tailprob", "write bootstrap tail probabilities P(|x(t) - x*|^2 > eps)"},
      {"theory", "print the closed-form constants and bounds for every arm"},
      {"verify", "check axioms, the inner-product bound and sampler self-tests"},
      {"project", "2D random projection of the noise or gradient stream"},
  };
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", opt.config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override [experiment] seed");
    sub->add_option("--runs", opt.runs, "override [experiment] runs")->check(CLI::PositiveNumber);
    sub->add_option("--threads", opt.threads, "worker threads (0: config or hardware)");
    sub->add_option("--arm", opt.arm, "restrict to one arm");
    if (std::string(s.name) != "theory" && std::string(s.name) != "verify")
      sub->add_option("--out", opt.out, "output directory");
    if (std::string(s.name) == "theory")
      sub->add_option("--format", opt.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  for (const CLI::App* sub : app.get_subcommands()) return run_command(sub->get_name(), opt, *sub);
  return kExitError;
}
