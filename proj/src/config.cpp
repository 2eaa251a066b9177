#include "edchrom/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "edchrom/output.hpp"

namespace edchrom {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

Preset RunRequest::preset() const {
  Preset p;
  p.id = experiment.value_or(0);
  p.isotherm = isotherm;
  p.config = config;
  p.reference_scheme = reference_scheme;
  p.reference_cells = reference_cells;
  return p;
}

RunRequest request_from_preset(int experiment) {
  const Preset p = experiment_preset(experiment);
  RunRequest r;
  r.experiment = experiment;
  r.isotherm = p.isotherm;
  r.config = p.config;
  r.scheme_set = true;
  r.reference_scheme = p.reference_scheme;
  r.reference_cells = p.reference_cells;
  r.sweep_schemes.assign(kAllSchemes.begin(), kAllSchemes.end());
  return r;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
    const std::size_t start = k;
    while (k < s.size() && !std::isspace(static_cast<unsigned char>(s[k]))) ++k;
    if (k > start) out.push_back(s.substr(start, k - start));
  }
  return out;
}

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

class Parser {
 public:
  Parser(std::string_view source) : source_(source) {}

  const std::string& source() const { return source_; }

  [[noreturn]] void fail(const Entry& e, const std::string& msg) const {
    throw ConfigError(source_, e.line, e.section + "." + e.key + ": " + msg);
  }

  double number(const Entry& e, std::string_view token) const {
    token = trim(token);
    double x = 0.0;
    // from_chars rejects a leading '+'.
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const auto res = std::from_chars(token.data(), token.data() + token.size(), x);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
      fail(e, "expected a number, got '" + std::string(token) + "'");
    return x;
  }
  double number(const Entry& e) const { return number(e, e.value); }

  std::vector<double> numbers(const Entry& e, std::string_view text) const {
    std::vector<double> out;
    for (auto tok : split_ws(text)) out.push_back(number(e, tok));
    return out;
  }
  std::vector<double> numbers(const Entry& e) const { return numbers(e, e.value); }

  long long integer(const Entry& e) const {
    const std::string_view t = trim(e.value);
    long long x = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      fail(e, "expected an integer, got '" + std::string(t) + "'");
    return x;
  }
  std::size_t count(const Entry& e) const {
    const long long x = integer(e);
    if (x <= 0) fail(e, "must be positive");
    return static_cast<std::size_t>(x);
  }

  bool boolean(const Entry& e) const {
    const std::string_view t = trim(e.value);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    fail(e, "expected true or false");
  }

  SchemeKind scheme(const Entry& e) const {
    try {
      return parse_scheme(trim(e.value));
    } catch (const std::invalid_argument& ex) {
      fail(e, ex.what());
    }
  }

 private:
  std::string source_;
};

std::vector<Entry> tokenize(std::string_view text, std::string_view source) {
  std::vector<Entry> entries;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(std::string(source), line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(std::string(source), line_no, "empty section name");
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(std::string(source), line_no, "expected 'key = value'");
      if (section.empty())
        throw ConfigError(std::string(source), line_no, "key outside of any section");
      Entry e{section, std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
      if (e.key.empty()) throw ConfigError(std::string(source), line_no, "empty key");
      entries.push_back(std::move(e));
    }
    if (eol == text.size()) break;
  }
  return entries;
}

void apply_entry(RunRequest& r, const Entry& e, const Parser& p, bool& injection_reset) {
  SimulationConfig& c = r.config;
  const std::string& s = e.section;
  const std::string& k = e.key;
  if (s == "run") {
    if (k == "experiment") return;  // handled before the other keys
    if (k == "out") { r.out_dir = e.value; return; }
    if (k == "jobs") { r.jobs = static_cast<int>(p.count(e)); return; }
    if (k == "single_thread") { r.single_thread = p.boolean(e); return; }
    if (k == "table1") { r.table1 = p.boolean(e); return; }
    if (k == "sweep") { r.sweep = p.boolean(e); return; }
  } else if (s == "isotherm") {
    if (k == "a") { r.isotherm.a = p.numbers(e); return; }
    if (k == "b") { r.isotherm.b = p.numbers(e); return; }
    if (k == "porosity") { r.isotherm.porosity = p.number(e); return; }
    if (k == "nu") { r.isotherm.nu = p.number(e); return; }
  } else if (s == "stepper") {
    if (k == "scheme") { c.scheme = p.scheme(e); r.scheme_set = true; return; }
    if (k == "u") { c.u = p.number(e); return; }
    if (k == "Da") { c.dispersion = p.number(e); return; }
    if (k == "K") { c.cfl = p.number(e); return; }
    if (k == "T") { c.final_time = p.number(e); return; }
    if (k == "m") { c.cells = p.count(e); return; }
    if (k == "outputs") { c.output_times = p.numbers(e); return; }
    if (k == "newton_tol") { c.newton_tol = p.number(e); return; }
    if (k == "newton_max_iter") { c.newton_max_iter = static_cast<int>(p.count(e)); return; }
    if (k == "weno_epsilon") { c.weno_epsilon = p.number(e); return; }
    if (k == "max_dt") { c.max_dt = p.number(e); return; }
  } else if (s == "injection") {
    if (k == "interval") {
      if (!injection_reset) {
        c.injection = InjectionSchedule();
        injection_reset = true;
      }
      if (trim(e.value) == "none") return;
      const auto colon = e.value.find(':');
      if (colon == std::string::npos) p.fail(e, "expected 'start end : c1 .. cN'");
      const auto span = p.numbers(e, std::string_view(e.value).substr(0, colon));
      auto conc = p.numbers(e, std::string_view(e.value).substr(colon + 1));
      if (span.size() != 2) p.fail(e, "expected exactly two interval endpoints");
      if (c.injection.components() == 0) c.injection = InjectionSchedule(conc.size());
      try {
        c.injection.add(span[0], span[1], std::move(conc));
      } catch (const std::invalid_argument& ex) {
        p.fail(e, ex.what());
      }
      return;
    }
  } else if (s == "initial") {
    if (k == "kind") {
      const auto v = trim(e.value);
      if (v == "zero") c.initial.kind = InitialProfile::Kind::Zero;
      else if (v == "gaussian") c.initial.kind = InitialProfile::Kind::Gaussian;
      else p.fail(e, "expected zero or gaussian");
      return;
    }
    if (k == "sampling") {
      const auto v = trim(e.value);
      if (v == "point") c.initial.sampling = InitialProfile::Sampling::Point;
      else if (v == "average") c.initial.sampling = InitialProfile::Sampling::CellAverage;
      else p.fail(e, "expected point or average");
      return;
    }
    if (k == "amplitude") { c.initial.amplitude = p.numbers(e); return; }
    if (k == "center") { c.initial.center = p.number(e); return; }
    if (k == "sharpness") { c.initial.sharpness = p.number(e); return; }
  } else if (s == "harness") {
    if (k == "reference_scheme") { r.reference_scheme = p.scheme(e); return; }
    if (k == "mref") { r.reference_cells = p.count(e); return; }
    if (k == "sweep_schemes") {
      r.sweep_schemes.clear();
      for (auto tok : split_ws(e.value)) {
        Entry one = e;
        one.value = std::string(tok);
        r.sweep_schemes.push_back(p.scheme(one));
      }
      return;
    }
    if (k == "sweep_m") {
      r.sweep_cells.clear();
      for (double x : p.numbers(e)) {
        if (!(x >= 1.0) || x != std::floor(x)) p.fail(e, "cell counts must be positive integers");
        r.sweep_cells.push_back(static_cast<std::size_t>(x));
      }
      return;
    }
  } else {
    throw ConfigError(p.source(), e.line, "unknown section [" + s + "]");
  }
  p.fail(e, "unknown key");
}

}  // namespace

void apply_config_text(RunRequest& request, std::string_view text, std::string_view source) {
  const auto entries = tokenize(text, source);
  const Parser parser(source);
  for (const Entry& e : entries) {
    if (e.section == "run" && e.key == "experiment") {
      const long long id = parser.integer(e);
      try {
        RunRequest fresh = request_from_preset(static_cast<int>(id));
        fresh.out_dir = request.out_dir;
        fresh.jobs = request.jobs;
        fresh.single_thread = request.single_thread;
        fresh.table1 = request.table1;
        fresh.sweep = request.sweep;
        request = std::move(fresh);
      } catch (const std::invalid_argument& ex) {
        parser.fail(e, ex.what());
      }
    }
  }
  bool injection_reset = false;
  for (const Entry& e : entries) apply_entry(request, e, parser, injection_reset);
}

void validate_request(const RunRequest& r) {
  if (!r.scheme_set) {
    std::string names;
    for (SchemeKind s : kAllSchemes) names += (names.empty() ? "" : ", ") + std::string(scheme_name(s));
    throw ConfigError("missing scheme; expected one of: " + names);
  }
  try {
    const IsothermModel model(r.isotherm);
    r.config.validate(model.size());
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("invalid configuration: ") + ex.what());
  }
  if (r.jobs < 1) throw ConfigError("jobs must be at least 1");
  if (r.reference_cells == 0) throw ConfigError("mref must be positive");
}

RunRequest parse_config_text(std::string_view text, std::string_view source) {
  RunRequest r;
  apply_config_text(r, text, source);
  validate_request(r);
  return r;
}

RunRequest parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

namespace {

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) out += (out.empty() ? "" : " ") + format_double(x);
  return out;
}

}  // namespace

std::string config_text(const RunRequest& r) {
  const SimulationConfig& c = r.config;
  std::ostringstream out;
  out << "[run]\n";
  out << "out = " << r.out_dir << "\n";
  out << "jobs = " << r.jobs << "\n";
  out << "single_thread = " << (r.single_thread ? "true" : "false") << "\n";
  out << "table1 = " << (r.table1 ? "true" : "false") << "\n";
  out << "sweep = " << (r.sweep ? "true" : "false") << "\n";
  out << "\n[isotherm]\n";
  out << "a = " << join(r.isotherm.a) << "\n";
  out << "b = " << join(r.isotherm.b) << "\n";
  out << "porosity = " << format_double(r.isotherm.porosity) << "\n";
  out << "nu = " << format_double(r.isotherm.nu) << "\n";
  out << "\n[stepper]\n";
  out << "scheme = " << scheme_name(c.scheme) << "\n";
  out << "u = " << format_double(c.u) << "\n";
  out << "Da = " << format_double(c.dispersion) << "\n";
  out << "K = " << format_double(c.cfl) << "\n";
  out << "T = " << format_double(c.final_time) << "\n";
  out << "m = " << c.cells << "\n";
  out << "outputs = " << join(c.output_times) << "\n";
  out << "newton_tol = " << format_double(c.newton_tol) << "\n";
  out << "newton_max_iter = " << c.newton_max_iter << "\n";
  out << "weno_epsilon = " << format_double(c.weno_epsilon) << "\n";
  out << "max_dt = " << format_double(c.max_dt) << "\n";
  out << "\n[injection]\n";
  if (c.injection.intervals().empty()) out << "interval = none\n";
  for (const auto& iv : c.injection.intervals())
    out << "interval = " << format_double(iv.start) << " " << format_double(iv.end) << " : "
        << join(iv.concentration) << "\n";
  out << "\n[initial]\n";
  out << "kind = " << (c.initial.kind == InitialProfile::Kind::Gaussian ? "gaussian" : "zero") << "\n";
  out << "sampling = " << (c.initial.sampling == InitialProfile::Sampling::Point ? "point" : "average") << "\n";
  if (!c.initial.amplitude.empty()) out << "amplitude = " << join(c.initial.amplitude) << "\n";
  out << "center = " << format_double(c.initial.center) << "\n";
  out << "sharpness = " << format_double(c.initial.sharpness) << "\n";
  out << "\n[harness]\n";
  out << "reference_scheme = " << scheme_name(r.reference_scheme) << "\n";
  out << "mref = " << r.reference_cells << "\n";
  out << "sweep_schemes =";
  for (SchemeKind s : r.sweep_schemes) out << " " << scheme_name(s);
  out << "\n";
  out << "sweep_m =";
  for (std::size_t m : r.sweep_cells) out << " " << m;
  out << "\n";
  return out.str();
}

std::optional<RunRequest> parse_command_line(int argc, const char* const* argv) {
  CLI::App app{"Equilibrium-dispersive chromatography solver"};
  app.set_version_flag("--version", "edchrom 0.1.0");

  std::string config_path;
  std::optional<int> experiment;
  std::optional<std::string> scheme;
  std::optional<std::size_t> cells, mref;
  std::optional<double> nu, da, final_time, cfl;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
  std::vector<std::string> sweep_schemes;
  std::vector<std::size_t> sweep_cells;
  bool table1 = false, sweep = false, single_thread = false;

  app.add_option("--config", config_path, "Config file; flags override its values")->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment, "Experiment preset 1-4")->check(CLI::Range(1, 4));
  app.add_option("--scheme", scheme, "CHR-UPW, COMP-UPW1, COMP-UPW5, COMP-GLF, CHR-GLF or MUSCL");
  app.add_option("--m", cells, "Number of cells")->check(CLI::PositiveNumber);
  app.add_option("--mref", mref, "Reference cells for error studies")->check(CLI::PositiveNumber);
  app.add_option("--nu", nu, "Toth heterogeneity parameter in (0, 1]");
  app.add_option("--Da", da, "Apparent dispersion coefficient");
  app.add_option("--T", final_time, "Final time; output times beyond it are dropped");
  app.add_option("--K", cfl, "CFL factor, at most 1");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--table1", table1, "Smooth-data convergence table");
  app.add_flag("--sweep", sweep, "Efficiency sweep over schemes and cell counts");
  app.add_option("--sweep-schemes", sweep_schemes, "Schemes for --sweep");
  app.add_option("--sweep-m", sweep_cells, "Cell counts for --sweep and --table1");
  app.add_option("--jobs", jobs, "Parallel sweep entries")->check(CLI::PositiveNumber);
  app.add_flag("--single-thread", single_thread, "Force one job");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return std::nullopt;
    }
    throw ConfigError(e.what());
  }

  RunRequest r;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    if (experiment) r = request_from_preset(*experiment);
    apply_config_text(r, buf.str(), config_path);
  } else {
    r = request_from_preset(experiment.value_or(table1 ? 4 : 1));
  }

  if (scheme) {
    try {
      r.config.scheme = parse_scheme(*scheme);
      r.scheme_set = true;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--scheme: ") + e.what());
    }
  }
  if (cells) r.config.cells = *cells;
  if (mref) r.reference_cells = *mref;
  if (nu) r.isotherm.nu = *nu;
  if (da) r.config.dispersion = *da;
  if (cfl) r.config.cfl = *cfl;
  if (final_time) {
    auto& outs = r.config.output_times;
    outs.erase(std::remove_if(outs.begin(), outs.end(), [&](double t) { return t >= *final_time; }), outs.end());
    outs.push_back(*final_time);
    r.config.final_time = *final_time;
  }
  if (out_dir) r.out_dir = *out_dir;
  if (jobs) r.jobs = *jobs;
  if (!sweep_schemes.empty()) {
    r.sweep_schemes.clear();
    for (const auto& name : sweep_schemes) {
      try {
        r.sweep_schemes.push_back(parse_scheme(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--sweep-schemes: ") + e.what());
      }
    }
  }
  if (!sweep_cells.empty()) r.sweep_cells = sweep_cells;
  r.table1 = r.table1 || table1;
  r.sweep = r.sweep || sweep;
  r.single_thread = r.single_thread || single_thread;
  if (r.single_thread) r.jobs = 1;

  validate_request(r);
  return r;
}

}  // namespace edchrom
