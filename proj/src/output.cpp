#include "edchrom/output.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "edchrom/config.hpp"

namespace edchrom {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_profile_csv(std::ostream& out, const Snapshot& snapshot) {
  const std::size_t n = snapshot.w.components();
  const std::size_t m = snapshot.w.cells();
  out << 'z';
  for (std::size_t i = 1; i <= n; ++i) out << ",c" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",w" << i;
  out << '\n';
  const double dz = 1.0 / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    out << format_double((static_cast<double>(j) + 0.5) * dz);
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(snapshot.c(i, j));
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(snapshot.w(i, j));
    out << '\n';
  }
}

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> emit_profiles(const std::filesystem::path& dir,
                                                 const std::vector<Snapshot>& snapshots) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (const Snapshot& s : snapshots) {
    const auto path = dir / ("profile_t" + format_double(s.t) + ".csv");
    auto out = open_for_writing(path);
    write_profile_csv(out, s);
    check_written(out, path);
    paths.push_back(path);
  }
  return paths;
}

std::string manifest_json(const RunRequest& request, const RunResult& result) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["config"] = config_text(request);
  doc["scheme"] = std::string(scheme_name(request.config.scheme));
  doc["cells"] = request.config.cells;
  doc["steps"] = result.steps;
  doc["dt"] = {{"min", result.dt_min}, {"max", result.dt_max}, {"mean", result.dt_mean}};
  doc["newton_iterations"] = result.newton_iterations;
  doc["negative_steps"] = result.negative_steps;
  doc["min_w"] = result.min_w;
  const MassLedger& mass = result.mass;
  doc["mass"] = {{"initial", mass.initial},
                 {"final", mass.final},
                 {"inflow", mass.inflow},
                 {"outflow", mass.outflow},
                 {"max_step_defect", mass.max_step_defect},
                 {"imbalance", mass.imbalance()}};
  ordered_json outputs = ordered_json::array();
  for (const Snapshot& s : result.snapshots) outputs.push_back("profile_t" + format_double(s.t) + ".csv");
  doc["profiles"] = outputs;
  // Kept last and separate: the only run-to-run varying entry.
  doc["timings"] = {{"solver_seconds", result.wall_seconds}};
  return doc.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& dir, const RunRequest& request,
                    const RunResult& result) {
  std::filesystem::create_directories(dir);
  const auto path = dir / "manifest.json";
  auto out = open_for_writing(path);
  out << manifest_json(request, result);
  check_written(out, path);
}

void write_errors_csv(std::ostream& out, const std::vector<ErrorReport>& reports) {
  out << "scheme,nu,Da,T,m,e_m,e_m_trimmed,theta_m,seconds,status\n";
  for (const ErrorReport& r : reports) {
    out << scheme_name(r.scheme) << ',' << format_double(r.nu) << ',' << format_double(r.dispersion)
        << ',' << format_double(r.time) << ',' << r.cells << ',';
    if (r.failure.empty()) {
      out << format_double(r.error) << ',' << format_double(r.error_trimmed) << ',';
      if (r.order) out << format_double(*r.order);
      out << ',' << format_double(r.wall_seconds) << ",ok\n";
    } else {
      std::string msg = r.failure;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << ",,,," << msg << '\n';
    }
  }
}

void emit_errors(const std::filesystem::path& path, const std::vector<ErrorReport>& reports) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto out = open_for_writing(path);
  write_errors_csv(out, reports);
  check_written(out, path);
}

std::string format_table1(const std::vector<ErrorReport>& reports) {
  // Column pairs in the order D_a descending, then nu ascending.
  std::set<std::pair<double, double>> columns_set;  // (-Da, nu)
  std::set<std::size_t> cells;
  std::vector<SchemeKind> schemes;
  for (const ErrorReport& r : reports) {
    columns_set.insert({-r.dispersion, r.nu});
    cells.insert(r.cells);
    if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end()) schemes.push_back(r.scheme);
  }
  const std::vector<std::pair<double, double>> columns(columns_set.begin(), columns_set.end());

  std::ostringstream out;
  out << std::setw(6) << "m";
  for (const auto& [neg_da, nu] : columns) {
    std::ostringstream head;
    head << "Da=" << format_double(-neg_da) << ",nu=" << format_double(nu);
    out << " | " << std::setw(22) << head.str();
  }
  out << '\n';
  out << std::setw(6) << "";
  for (std::size_t k = 0; k < columns.size(); ++k) out << " | " << std::setw(12) << "e_m*1e6" << std::setw(10) << "theta";
  out << '\n';

  for (SchemeKind s : schemes) {
    out << scheme_name(s) << '\n';
    for (std::size_t m : cells) {
      out << std::setw(6) << m;
      for (const auto& [neg_da, nu] : columns) {
        const ErrorReport* hit = nullptr;
        for (const ErrorReport& r : reports) {
          if (r.scheme == s && r.cells == m && r.dispersion == -neg_da && r.nu == nu) hit = &r;
        }
        char e_buf[32] = "", t_buf[32] = "-";
        if (hit == nullptr) {
          std::snprintf(e_buf, sizeof e_buf, "n/a");
        } else if (!hit->failure.empty()) {
          std::snprintf(e_buf, sizeof e_buf, "failed");
        } else {
          std::snprintf(e_buf, sizeof e_buf, "%.2f", hit->error * 1e6);
          if (hit->order) std::snprintf(t_buf, sizeof t_buf, "%.2f", *hit->order);
        }
        out << " | " << std::setw(12) << e_buf << std::setw(10) << t_buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace edchrom
