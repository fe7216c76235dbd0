#include "catbreed/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace catbreed {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);
  return f;
}

void finish(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("write failed: " + path);
}

void write_header(std::ofstream& f, const std::string& kind,
                  const Metadata& fields) {
  f << "format=" << kind << "\n";
  for (const auto& [k, v] : fields) f << k << "=" << v << "\n";
}

// reads key=value lines until the first non-header line, which is pushed
// back through the returned leftover string
Metadata read_header(std::ifstream& f, std::string& leftover) {
  Metadata m;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      leftover = line;
      break;
    }
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

const std::string& need(const Metadata& m, const std::string& key,
                        const std::string& path) {
  auto it = m.find(key);
  if (it == m.end()) throw IoError("missing header field '" + key + "' in " + path);
  return it->second;
}

void expect_format(const Metadata& m, const std::string& kind,
                   const std::string& path) {
  if (need(m, "format", path) != kind)
    throw IoError("unexpected format in " + path + ": got '" +
                  m.at("format") + "', want '" + kind + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_state(const std::string& path, const DensityMatrix& rho,
                 const Metadata& extra) {
  std::ofstream f = open_out(path);
  Metadata m = extra;
  m["rows"] = std::to_string(rho.rows());
  m["squeeze_convention"] = kSqueezeConventionTag;
  write_header(f, "state-v1", m);
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      if (j) f << ' ';
      f << format_double(rho(i, j).real()) << ' '
        << format_double(rho(i, j).imag());
    }
    f << '\n';
  }
  finish(f, path);
}

DensityMatrix read_state(const std::string& path, Metadata* meta) {
  std::ifstream f = open_in(path);
  std::string leftover;
  Metadata m = read_header(f, leftover);
  expect_format(m, "state-v1", path);
  int rows = std::stoi(need(m, "rows", path));
  DensityMatrix rho(rows, rows);
  for (int i = 0; i < rows; ++i) {
    std::string line;
    if (i == 0)
      line = leftover;
    else if (!std::getline(f, line))
      throw IoError("truncated state file: " + path);
    std::istringstream ss(line);
    for (int j = 0; j < rows; ++j) {
      double re, im;
      if (!(ss >> re >> im)) throw IoError("malformed state row in " + path);
      rho(i, j) = cd(re, im);
    }
  }
  if (meta) *meta = m;
  return rho;
}

void write_wigner_grid(const std::string& path, const WignerGrid& grid,
                       const Metadata& extra) {
  std::ofstream f = open_out(path);
  Metadata m = extra;
  const GridSpec& s = grid.spec;
  m["xmin"] = format_double(s.xmin);
  m["xmax"] = format_double(s.xmax);
  m["pmin"] = format_double(s.pmin);
  m["pmax"] = format_double(s.pmax);
  m["nx"] = std::to_string(s.nx);
  m["np"] = std::to_string(s.np);
  m["coverage_warning"] = grid.coverage_warning ? "1" : "0";
  write_header(f, "wigner-grid-v1", m);
  for (int i = 0; i < s.nx; ++i) {
    for (int j = 0; j < s.np; ++j) {
      if (j) f << ' ';
      f << format_double(grid.values(i, j));
    }
    f << '\n';
  }
  finish(f, path);
}

WignerGrid read_wigner_grid(const std::string& path, Metadata* meta) {
  std::ifstream f = open_in(path);
  std::string leftover;
  Metadata m = read_header(f, leftover);
  expect_format(m, "wigner-grid-v1", path);
  WignerGrid g;
  g.spec.xmin = std::stod(need(m, "xmin", path));
  g.spec.xmax = std::stod(need(m, "xmax", path));
  g.spec.pmin = std::stod(need(m, "pmin", path));
  g.spec.pmax = std::stod(need(m, "pmax", path));
  g.spec.nx = std::stoi(need(m, "nx", path));
  g.spec.np = std::stoi(need(m, "np", path));
  g.coverage_warning = need(m, "coverage_warning", path) == "1";
  g.values.resize(g.spec.nx, g.spec.np);
  for (int i = 0; i < g.spec.nx; ++i) {
    std::string line;
    if (i == 0)
      line = leftover;
    else if (!std::getline(f, line))
      throw IoError("truncated grid file: " + path);
    std::istringstream ss(line);
    for (int j = 0; j < g.spec.np; ++j)
      if (!(ss >> g.values(i, j)))
        throw IoError("malformed grid row in " + path);
  }
  if (meta) *meta = m;
  return g;
}

void write_wigner_pgm(const std::string& path, const WignerGrid& grid) {
  std::ofstream f = open_out(path);
  double lo = grid.values.minCoeff(), hi = grid.values.maxCoeff();
  double span = hi > lo ? hi - lo : 1.0;
  f << "P2\n" << grid.spec.np << ' ' << grid.spec.nx << "\n255\n";
  for (int i = grid.spec.nx - 1; i >= 0; --i) {
    for (int j = 0; j < grid.spec.np; ++j) {
      if (j) f << ' ';
      f << static_cast<int>(255.0 * (grid.values(i, j) - lo) / span + 0.5);
    }
    f << '\n';
  }
  finish(f, path);
}

void write_samples(const std::string& path, const SampleSet& s,
                   const Metadata& extra) {
  std::ofstream f = open_out(path);
  Metadata m = extra;
  m["units"] = units_name(s.units);
  m["seed"] = std::to_string(s.seed);
  m["sigma"] = format_double(s.model.sigma);
  m["delta"] = format_double(s.model.delta);
  m["jitter_deg"] = format_double(s.jitter_deg);
  m["jitter_kind"] = s.jitter_kind == JitterKind::Uniform ? "uniform" : "gaussian";
  m["count"] = std::to_string(s.records.size());
  write_header(f, "samples-v1", m);
  f << "# x0 x1 theta_deg accepted\n";
  for (const auto& r : s.records)
    f << format_double(r.x0) << ' ' << format_double(r.x1) << ' '
      << format_double(r.theta * 180.0 / kPi) << ' ' << (r.accepted ? 1 : 0)
      << '\n';
  finish(f, path);
}

SampleSet read_samples(const std::string& path, Metadata* meta) {
  std::ifstream f = open_in(path);
  std::string leftover;
  Metadata m = read_header(f, leftover);
  expect_format(m, "samples-v1", path);
  SampleSet s;
  s.units = parse_units(need(m, "units", path));
  s.seed = std::stoull(need(m, "seed", path));
  s.model.sigma = std::stod(need(m, "sigma", path));
  s.model.delta = std::stod(need(m, "delta", path));
  s.jitter_deg = std::stod(need(m, "jitter_deg", path));
  s.jitter_kind = need(m, "jitter_kind", path) == "gaussian"
                      ? JitterKind::Gaussian
                      : JitterKind::Uniform;
  size_t count = std::stoull(need(m, "count", path));
  s.records.reserve(count);
  std::string line = leftover;
  do {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    SampleRecord r;
    double deg;
    int acc;
    if (!(ss >> r.x0 >> r.x1 >> deg >> acc))
      throw IoError("malformed sample line in " + path);
    r.theta = deg * kPi / 180.0;
    r.accepted = acc != 0;
    s.records.push_back(r);
  } while (std::getline(f, line));
  if (s.records.size() != count)
    throw IoError("sample count mismatch in " + path);
  if (meta) *meta = m;
  return s;
}

void write_histogram(const std::string& path, const Histogram2D& h,
                     const Metadata& extra) {
  std::ofstream f = open_out(path);
  Metadata m = extra;
  m["bins"] = std::to_string(h.counts.rows());
  m["total"] = std::to_string(h.total);
  m["overflow"] = std::to_string(h.overflow);
  write_header(f, "histogram2d-v1", m);
  f << "# x_edges\n";
  for (size_t i = 0; i < h.x_edges.size(); ++i)
    f << (i ? " " : "") << format_double(h.x_edges[i]);
  f << "\n# y_edges\n";
  for (size_t i = 0; i < h.y_edges.size(); ++i)
    f << (i ? " " : "") << format_double(h.y_edges[i]);
  f << "\n# counts\n";
  for (Eigen::Index i = 0; i < h.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.counts.cols(); ++j)
      f << (j ? " " : "") << format_double(h.counts(i, j));
    f << '\n';
  }
  finish(f, path);
}

void write_tomography_result(const std::string& path,
                             const TomographyResult& res,
                             const TomographyConfig& cfg,
                             const ReplicaStats* stats, const Metadata& extra) {
  std::ofstream f = open_out(path);
  Metadata m = extra;
  m["eta_det"] = format_double(cfg.eta_det);
  m["cutoff"] = std::to_string(cfg.cutoff);
  m["bin_width"] = format_double(cfg.bin_width);
  m["x_max"] = format_double(cfg.x_max);
  std::string phases;
  for (size_t i = 0; i < cfg.phases_deg.size(); ++i)
    phases += (i ? "," : "") + format_double(cfg.phases_deg[i]);
  m["phases_deg"] = phases;
  m["max_iters"] = std::to_string(cfg.max_iters);
  m["tol"] = format_double(cfg.tol);
  m["log_likelihood"] = format_double(res.log_likelihood);
  m["iterations"] = std::to_string(res.iterations);
  m["converged"] = res.converged ? "1" : "0";
  m["used_dilution"] = res.used_dilution ? "1" : "0";
  m["probability_floored"] = res.probability_floored ? "1" : "0";
  m["rows"] = std::to_string(res.rho.rows());
  if (stats) {
    m["negativity_mean"] = format_double(stats->negativity_mean);
    m["negativity_std"] = format_double(stats->negativity_std);
    m["fidelity_mean"] = format_double(stats->fidelity_mean);
    m["fidelity_std"] = format_double(stats->fidelity_std);
    m["replicas_used"] = std::to_string(stats->replicas_used);
    m["replicas_excluded"] = std::to_string(stats->replicas_excluded);
  }
  write_header(f, "tomography-v1", m);
  f << "# density matrix, re im pairs\n";
  for (Eigen::Index i = 0; i < res.rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < res.rho.cols(); ++j)
      f << (j ? " " : "") << format_double(res.rho(i, j).real()) << ' '
        << format_double(res.rho(i, j).imag());
    f << '\n';
  }
  f << "# log-likelihood trace\n";
  for (double v : res.likelihood_trace) f << format_double(v) << '\n';
  finish(f, path);
}

Metadata read_key_value(const std::string& path) {
  std::ifstream f = open_in(path);
  Metadata m;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": expected key=value");
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

void write_key_value(const std::string& path, const Metadata& m) {
  std::ofstream f = open_out(path);
  for (const auto& [k, v] : m) f << k << "=" << v << "\n";
  finish(f, path);
}

}  // namespace catbreed
