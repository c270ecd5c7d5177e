#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vexlab/experiment.hpp"
#include "vexlab/format.hpp"

namespace vexlab {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::NormCheck: return "norm-check";
    case Mode::InequalityFuzz: return "inequality-fuzz";
    case Mode::Solve: return "solve";
    case Mode::Sweep: return "sweep";
    case Mode::Localized: return "localized";
    case Mode::BubbleDemo: return "bubble-demo";
    case Mode::SufficientCondition: return "sufficient-condition";
  }
  return "solve";
}

std::optional<Mode> parse_mode(const std::string& text) {
  for (Mode m : {Mode::NormCheck, Mode::InequalityFuzz, Mode::Solve, Mode::Sweep, Mode::Localized,
                 Mode::BubbleDemo, Mode::SufficientCondition})
    if (text == to_string(m)) return m;
  return std::nullopt;
}

namespace {

const char* profile_name(ProfileChoice p) {
  switch (p) {
    case ProfileChoice::Smooth: return "smooth";
    case ProfileChoice::Tent: return "tent";
    case ProfileChoice::Extremal: return "extremal";
  }
  return "smooth";
}

std::string join_messages(const std::vector<std::string>& msgs) {
  std::string out;
  for (const auto& m : msgs) out += (out.empty() ? "" : "; ") + m;
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back({});
  return out;
}

// Keys accepted per section.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"domain", {"dim", "lo", "hi", "cells"}},
      {"exponents", {"p", "q", "critical_tol"}},
      {"experiment", {"mode", "eps", "eps_schedule", "output_dir", "seed"}},
      {"solver", {"tol", "patience", "max_iters", "restarts", "eta0", "threads"}},
      {"function", {"u"}},
      {"fuzz", {"hoelder_trials", "elementary_samples", "elementary_cases"}},
      {"localized", {"center", "radii", "samples", "margin", "inclusion_slack"}},
      {"bubble", {"eps", "target_mass", "profile", "atoms"}},
      {"dichotomy", {"radius", "concentration", "compactness", "atom_radius", "atom_threshold"}},
  };
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::vector<std::string>& errors)
      : entries_(std::move(entries)), errors_(errors) {}

  const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void error(const Entry& e, const std::string& key, const std::string& what) {
    errors_.push_back("line " + std::to_string(e.line) + ": " + key + ": " + what);
  }

  void real(const std::string& key, double& out) {
    if (const Entry* e = find(key)) {
      if (auto v = to_real(e->value)) out = *v;
      else error(*e, key, "expected a number, got '" + e->value + "'");
    }
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const Entry* e = find(key)) {
      if (auto v = to_int(e->value)) out = static_cast<Int>(*v);
      else error(*e, key, "expected an integer, got '" + e->value + "'");
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const Entry* e = find(key)) {
      char* end = nullptr;
      const std::string& t = e->value;
      const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
      if (t.empty() || t[0] == '-' || end != t.c_str() + t.size()) error(*e, key, "expected a nonnegative integer");
      else out = v;
    }
  }

  void reals(const std::string& key, std::vector<double>& out) {
    if (const Entry* e = find(key)) {
      std::vector<double> v;
      for (const auto& tok : split(e->value, ',')) {
        if (auto x = to_real(tok)) v.push_back(*x);
        else {
          error(*e, key, "expected a comma-separated list of numbers, got '" + e->value + "'");
          return;
        }
      }
      out = std::move(v);
    }
  }

  void point(const std::string& key, Point& out) {
    std::vector<double> v;
    reals(key, v);
    if (v.empty()) return;
    if (v.size() > 2) {
      error(*find(key), key, "expected one or two coordinates");
      return;
    }
    out = {v[0], v.size() == 2 ? v[1] : out[1]};  // 1D keeps the inert coordinate
  }

  void field(const std::string& key, FieldSpec& out) {
    if (const Entry* e = find(key)) {
      try {
        out = FieldSpec::parse(e->value);
      } catch (const Error& err) {
        error(*e, key, err.what());
      }
    }
  }

  // "a b c; a b c" rows of fixed width.
  bool rows(const std::string& key, std::size_t width, std::vector<std::vector<double>>& out) {
    const Entry* e = find(key);
    if (!e) return false;
    out.clear();
    for (const auto& row : split(e->value, ';')) {
      std::istringstream in(row);
      std::vector<double> v;
      for (std::string tok; in >> tok;) {
        auto x = to_real(tok);
        if (!x) {
          error(*e, key, "bad number '" + tok + "'");
          return false;
        }
        v.push_back(*x);
      }
      if (v.size() != width) {
        error(*e, key, "each ';'-separated row needs " + std::to_string(width) + " numbers");
        return false;
      }
      out.push_back(std::move(v));
    }
    return true;
  }

  static std::optional<double> to_real(const std::string& raw) {
    const std::string t = trim(raw);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  }

  static std::optional<long long> to_int(const std::string& raw) {
    const std::string t = trim(raw);
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size()) return std::nullopt;
    return v;
  }

 private:
  std::map<std::string, Entry> entries_;
  std::vector<std::string>& errors_;
};

std::string list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + format_number(v[k]);
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

}  // namespace

ConfigError::ConfigError(ErrorKind kind, std::vector<std::string> messages)
    : Error(kind, join_messages(messages)), messages_(std::move(messages)) {}

Grid ExperimentConfig::grid() const {
  if (dim == 1) return Grid::interval(lo[0], hi[0], cells[0]);
  return Grid::rectangle(lo, hi, cells[0], cells[1]);
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  const auto pt = [&](const Point& x) {
    return dim == 2 ? format_number(x[0]) + ", " + format_number(x[1]) : format_number(x[0]);
  };
  out << "[domain]\n";
  out << "dim = " << dim << "\n";
  out << "lo = " << pt(lo) << "\n";
  out << "hi = " << pt(hi) << "\n";
  out << "cells = " << cells[0];
  if (dim == 2) out << ", " << cells[1];
  out << "\n\n[exponents]\n";
  out << "p = " << p.to_string() << "\n";
  out << "q = " << q.to_string() << "\n";
  out << "critical_tol = " << format_number(critical_tol) << "\n\n";
  out << "[experiment]\n";
  out << "mode = " << to_string(mode) << "\n";
  out << "eps = " << format_number(eps) << "\n";
  if (!eps_schedule.empty()) out << "eps_schedule = " << list(eps_schedule) << "\n";
  out << "output_dir = " << output_dir << "\n";
  out << "seed = " << seed << "\n\n";
  out << "[solver]\n";
  out << "tol = " << format_number(solver.tol) << "\n";
  out << "patience = " << solver.patience << "\n";
  out << "max_iters = " << solver.max_iters << "\n";
  out << "restarts = " << solver.restarts << "\n";
  out << "eta0 = " << format_number(solver.eta0) << "\n";
  out << "threads = " << solver.threads << "\n";
  if (u) out << "\n[function]\nu = " << u->to_string() << "\n";
  out << "\n[fuzz]\n";
  out << "hoelder_trials = " << hoelder_trials << "\n";
  out << "elementary_samples = " << elementary_samples << "\n";
  out << "elementary_cases = ";
  for (std::size_t k = 0; k < elementary_cases.size(); ++k) {
    const auto& c = elementary_cases[k];
    out << (k ? "; " : "") << format_number(c.p_lo) << ' ' << format_number(c.p_hi) << ' '
        << format_number(c.theta);
  }
  out << "\n\n[localized]\n";
  out << "center = " << pt(center) << "\n";
  if (!radii.empty()) out << "radii = " << list(radii) << "\n";
  out << "samples = " << samples << "\n";
  out << "margin = " << format_number(margin) << "\n";
  out << "inclusion_slack = " << format_number(inclusion_slack) << "\n\n";
  out << "[bubble]\n";
  if (!bubble_eps.empty()) out << "eps = " << list(bubble_eps) << "\n";
  out << "target_mass = " << format_number(target_mass) << "\n";
  out << "profile = " << profile_name(profile) << "\n";
  if (!atoms.empty()) {
    out << "atoms = ";
    for (std::size_t k = 0; k < atoms.size(); ++k)
      out << (k ? "; " : "") << format_number(atoms[k].center[0]) << ' ' << format_number(atoms[k].center[1]) << ' '
          << format_number(atoms[k].mass);
    out << "\n";
  }
  out << "\n[dichotomy]\n";
  out << "radius = " << format_number(dichotomy_radius) << "\n";
  out << "concentration = " << format_number(thresholds.concentration) << "\n";
  out << "compactness = " << format_number(thresholds.compactness) << "\n";
  out << "atom_radius = " << format_number(atom_radius) << "\n";
  out << "atom_threshold = " << format_number(atom_threshold) << "\n";
  return out.str();
}

ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::string> errors;
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::string section;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section)) errors.push_back(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      errors.push_back(where + "key '" + key + "' outside any section");
      continue;
    }
    const auto known = schema().find(section);
    if (known == schema().end()) continue;  // already reported
    if (!known->second.count(key)) {
      errors.push_back(where + "unknown key '" + key + "' in [" + section + "]");
      continue;
    }
    if (value.empty()) {
      errors.push_back(where + "empty value for '" + key + "'");
      continue;
    }
    auto [it, inserted] = sections[section].emplace(key, Entry{value, line_no});
    if (!inserted)
      errors.push_back(where + "duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) +
                       ")");
  }

  ExperimentConfig cfg;
  auto reader = [&](const std::string& name) { return Reader(sections[name], errors); };

  {
    Reader r = reader("domain");
    r.integer("dim", cfg.dim);
    r.point("lo", cfg.lo);
    r.point("hi", cfg.hi);
    std::vector<double> cells;
    r.reals("cells", cells);
    if (!cells.empty()) {
      const Entry& e = *r.find("cells");
      bool ok = cells.size() <= 2;
      for (double c : cells) ok = ok && c == std::floor(c) && c >= 0 && c < 1e7;
      if (!ok) r.error(e, "cells", "expected one or two positive integers");
      else cfg.cells = {static_cast<int>(cells[0]), static_cast<int>(cells.size() == 2 ? cells[1] : cells[0])};
    }
  }
  {
    Reader r = reader("exponents");
    r.field("p", cfg.p);
    r.field("q", cfg.q);
    r.real("critical_tol", cfg.critical_tol);
  }
  {
    Reader r = reader("experiment");
    if (const Entry* e = r.find("mode")) {
      if (auto m = parse_mode(e->value)) cfg.mode = *m;
      else r.error(*e, "mode", "unknown mode '" + e->value + "'");
    }
    r.real("eps", cfg.eps);
    r.reals("eps_schedule", cfg.eps_schedule);
    if (const Entry* e = r.find("output_dir")) cfg.output_dir = e->value;
    r.seed("seed", cfg.seed);
  }
  {
    Reader r = reader("solver");
    r.real("tol", cfg.solver.tol);
    r.integer("patience", cfg.solver.patience);
    r.integer("max_iters", cfg.solver.max_iters);
    r.integer("restarts", cfg.solver.restarts);
    r.real("eta0", cfg.solver.eta0);
    r.integer("threads", cfg.solver.threads);
  }
  {
    Reader r = reader("function");
    if (r.find("u")) {
      FieldSpec f{ConstantSpec{0.0}};
      r.field("u", f);
      cfg.u = f;
    }
  }
  {
    Reader r = reader("fuzz");
    r.integer("hoelder_trials", cfg.hoelder_trials);
    r.integer("elementary_samples", cfg.elementary_samples);
    std::vector<std::vector<double>> rows;
    if (r.rows("elementary_cases", 3, rows)) {
      cfg.elementary_cases.clear();
      for (const auto& v : rows) cfg.elementary_cases.push_back({v[0], v[1], v[2]});
    }
  }
  {
    Reader r = reader("localized");
    r.point("center", cfg.center);
    r.reals("radii", cfg.radii);
    r.integer("samples", cfg.samples);
    r.real("margin", cfg.margin);
    r.real("inclusion_slack", cfg.inclusion_slack);
  }
  {
    Reader r = reader("bubble");
    r.reals("eps", cfg.bubble_eps);
    r.real("target_mass", cfg.target_mass);
    if (const Entry* e = r.find("profile")) {
      if (e->value == "smooth") cfg.profile = ProfileChoice::Smooth;
      else if (e->value == "tent") cfg.profile = ProfileChoice::Tent;
      else if (e->value == "extremal") cfg.profile = ProfileChoice::Extremal;
      else r.error(*e, "profile", "expected smooth, tent or extremal");
    }
    std::vector<std::vector<double>> rows;
    if (r.rows("atoms", 3, rows))
      for (const auto& v : rows) cfg.atoms.push_back({{v[0], v[1]}, v[2]});
  }
  {
    Reader r = reader("dichotomy");
    r.real("radius", cfg.dichotomy_radius);
    r.real("concentration", cfg.thresholds.concentration);
    r.real("compactness", cfg.thresholds.compactness);
    r.real("atom_radius", cfg.atom_radius);
    r.real("atom_threshold", cfg.atom_threshold);
  }
  cfg.solver.seed = cfg.seed;

  if (!errors.empty()) throw ConfigError(ErrorKind::ParseError, std::move(errors));
  auto violations = validate(cfg);
  if (!violations.empty()) throw ConfigError(ErrorKind::ValidationError, std::move(violations));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> v;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) v.push_back(msg);
  };

  need(c.dim == 1 || c.dim == 2, "domain.dim must be 1 or 2");
  if (v.empty()) {
    for (int a = 0; a < c.dim; ++a) {
      need(c.lo[a] < c.hi[a], "domain.lo must be below domain.hi on every axis");
      need(c.cells[a] >= 2, "domain.cells needs at least 2 cells per axis");
    }
  }
  std::optional<Grid> grid;
  if (v.empty()) grid = c.grid();

  std::optional<ExponentField> p;
  std::optional<ExponentField> q;
  if (grid) {
    try {
      p = sample_exponent(c.p, *grid);
    } catch (const Error& e) {
      v.push_back(std::string("exponents.p: ") + e.what());
    }
    try {
      q = sample_exponent(c.q, *grid);
    } catch (const Error& e) {
      v.push_back(std::string("exponents.q: ") + e.what());
    }
  }
  need(c.critical_tol > 0.0, "exponents.critical_tol must be positive");

  const auto& s = c.solver;
  need(s.tol > 0.0, "solver.tol must be positive");
  need(s.patience >= 1, "solver.patience must be >= 1");
  need(s.max_iters >= 1, "solver.max_iters must be >= 1");
  need(s.restarts >= 1, "solver.restarts must be >= 1");
  need(s.eta0 > 0.0, "solver.eta0 must be positive");
  need(s.threads >= 1, "solver.threads must be >= 1");
  need(!c.output_dir.empty(), "experiment.output_dir must not be empty");

  const double q_lo = q ? bounds(*q).first : 0.0;
  auto feasible_eps = [&](double eps, const std::string& what) {
    need(eps >= 0.0, what + " must be >= 0");
    if (q) need(q_lo - eps >= 1.0 + 1e-6, what + " leaves q - eps below 1");
  };
  auto subcritical = [&] {
    if (!p || !q || c.critical_tol <= 0.0) return;
    try {
      (void)critical_set(*p, *q, c.dim, c.critical_tol);
    } catch (const SupercriticalExponentError& e) {
      v.push_back(std::string("exponents: ") + e.what());
    }
  };
  auto radii_ok = [&] {
    need(!c.radii.empty(), "localized.radii is required");
    need(strictly_decreasing(c.radii), "localized.radii not strictly decreasing");
    if (grid)
      for (double r : c.radii)
        need(r >= 2.0 * grid->max_spacing(), "localized.radii entry " + format_number(r) + " is below two grid spacings");
  };

  switch (c.mode) {
    case Mode::NormCheck:
      need(c.u.has_value(), "mode norm-check needs [function] u");
      break;
    case Mode::InequalityFuzz:
      need(c.hoelder_trials >= 0, "fuzz.hoelder_trials must be >= 0");
      need(c.elementary_samples >= 1, "fuzz.elementary_samples must be >= 1");
      for (const auto& e : c.elementary_cases)
        need(e.p_lo > 1.0 && e.p_hi >= e.p_lo && e.theta > 0.0 && e.theta <= 1.0,
             "fuzz.elementary_cases needs 1 < p_lo <= p_hi and 0 < theta <= 1");
      break;
    case Mode::Solve:
      feasible_eps(c.eps, "experiment.eps");
      subcritical();
      break;
    case Mode::Sweep:
      need(!c.eps_schedule.empty(), "mode sweep needs experiment.eps_schedule");
      need(strictly_decreasing(c.eps_schedule), "experiment.eps_schedule: schedule not decreasing");
      for (double e : c.eps_schedule) feasible_eps(e, "experiment.eps_schedule entry " + format_number(e));
      subcritical();
      break;
    case Mode::Localized:
      feasible_eps(c.eps, "experiment.eps");
      radii_ok();
      if (grid) need(grid->contains(c.center) || grid->distance_to_boundary(c.center) == 0.0,
                     "localized.center must lie in the closed domain");
      subcritical();
      break;
    case Mode::BubbleDemo: {
      need(!c.bubble_eps.empty(), "mode bubble-demo needs bubble.eps");
      need(strictly_decreasing(c.bubble_eps), "bubble.eps not strictly decreasing");
      for (double e : c.bubble_eps) need(e > 0.0, "bubble.eps entries must be positive");
      need(c.target_mass > 0.0 && c.target_mass <= 1.0, "bubble.target_mass must lie in (0, 1]");
      double total = 0.0;
      for (const auto& a : c.atoms) {
        need(a.mass > 0.0, "bubble.atoms masses must be positive");
        total += a.mass;
      }
      need(c.atoms.empty() || total < 1.0, "bubble.atoms masses must sum to less than 1");
      need(c.atom_threshold > 0.0 && c.atom_threshold <= 1.0, "dichotomy.atom_threshold must lie in (0, 1]");
      need(c.atom_radius >= 0.0, "dichotomy.atom_radius must be >= 0");
      if (c.profile == ProfileChoice::Extremal) subcritical();
      break;
    }
    case Mode::SufficientCondition:
      radii_ok();
      need(c.samples >= 1, "localized.samples must be >= 1");
      need(c.margin >= 0.0 && c.margin < 1.0, "localized.margin must lie in [0, 1)");
      need(c.inclusion_slack >= 0.0, "localized.inclusion_slack must be >= 0");
      subcritical();
      if (p && q && v.empty() && critical_set(*p, *q, c.dim, c.critical_tol).empty())
        v.push_back("mode sufficient-condition needs a non-empty critical set");
      break;
  }
  if (c.mode == Mode::Sweep) {
    need(c.dichotomy_radius >= 0.0, "dichotomy.radius must be >= 0");
    if (grid && c.dichotomy_radius > 0.0)
      need(c.dichotomy_radius >= 2.0 * grid->max_spacing(), "dichotomy.radius must be at least two grid spacings");
  }
  return v;
}

std::string config_hash(const ExperimentConfig& config) {
  ExperimentConfig keyed = config;
  keyed.output_dir.clear();
  keyed.solver.threads = 1;
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : keyed.to_text()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vexlab
