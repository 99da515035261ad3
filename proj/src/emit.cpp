#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "nlsgd/error.hpp"
#include "nlsgd/harness.hpp"

namespace nlsgd {

namespace fs = std::filesystem;

std::string format_csv(const MetricSeries& series) {
  if (series.t.size() != series.values.size())
    throw InvalidArgument("format_csv: t and values differ in length for " + series.name);
  std::string out = "t,value\n";
  char buf[64];
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g\n", static_cast<unsigned long long>(series.t[i]), series.values[i]);
    out += buf;
  }
  return out;
}

MetricSeries parse_csv(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t,value") throw InvalidArgument("parse_csv: missing 't,value' header");
  MetricSeries s;
  s.name = name;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    unsigned long long t = 0;
    double v = 0.0;
    int used = 0;
    if (std::sscanf(line.c_str(), "%llu,%lf%n", &t, &v, &used) != 2 || static_cast<std::size_t>(used) != line.size())
      throw InvalidArgument("parse_csv: malformed row at line " + std::to_string(lineno));
    s.t.push_back(t);
    s.values.push_back(v);
  }
  return s;
}

std::string format_points_csv(const Matrix& points) {
  std::string out = "x,y\n";
  char buf[64];
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", points(i, 0), points(i, 1));
    out += buf;
  }
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string plot_script(const std::string& metric, const std::vector<std::string>& arms) {
  std::string s;
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  s += "set logscale x\n";
  if (metric.rfind("tail_", 0) != 0) s += "set logscale y\n";
  s += "set xlabel 't'\n";
  s += "set ylabel '" + metric + "'\n";
  s += "plot ";
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (i) s += ", \\\n     ";
    s += "'" + arms[i] + "__" + metric + ".csv' using 1:2 with lines title '" + arms[i] + "'";
  }
  s += "\n";
  return s;
}

}  // namespace

std::vector<std::string> emit(const std::string& out_dir, const ExperimentConfig& config,
                              const SimulationResult& result) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

  std::vector<std::string> files;
  std::map<std::string, std::vector<std::string>> by_metric;
  for (const auto& s : result.series) {
    const std::string file = s.name + ".csv";
    write_file(dir / file, format_csv(s));
    files.push_back(file);
    const auto sep = s.name.find("__");
    if (sep != std::string::npos) by_metric[s.name.substr(sep + 2)].push_back(s.name.substr(0, sep));
  }
  for (const auto& [metric, arms] : by_metric) {
    const std::string file = "plot_" + metric + ".gp";
    write_file(dir / file, plot_script(metric, arms));
    files.push_back(file);
  }

  std::string manifest = "tool=nlsgd\nversion=" + version_string() + "\n";
  manifest += canonical_text(config);
  for (const auto& [k, v] : result.notes) manifest += k + "=" + v + "\n";
  for (std::size_t i = 0; i < files.size(); ++i) manifest += "file." + std::to_string(i) + "=" + files[i] + "\n";
  write_file(dir / "manifest", manifest);
  files.push_back("manifest");
  return files;
}

}  // namespace nlsgd
