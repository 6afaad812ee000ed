#include "kpplab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "kpplab/errors.hpp"
#include "kpplab/traveling_wave.hpp"

namespace kpplab {
namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out;
}

struct Problems {
  std::vector<std::string> items;
  void add(std::string s) { items.push_back(std::move(s)); }
};

std::optional<double> parse_number(const std::string& key, const std::string& text, Problems& p) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    p.add(key + ": '" + s + "' is not a finite number");
    return std::nullopt;
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text, Problems& p) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    if (auto v = parse_number(key, item, p)) out.push_back(*v);
  }
  return out;
}

std::optional<bool> parse_bool(const std::string& key, const std::string& text, Problems& p) {
  const std::string s = trim(text);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  p.add(key + ": '" + s + "' is not a boolean");
  return std::nullopt;
}

template <class E>
std::optional<E> parse_enum(const std::string& key, const std::string& text,
                            std::initializer_list<std::pair<const char*, E>> options, Problems& p) {
  const std::string s = trim(text);
  std::string names;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  p.add(key + ": '" + s + "' is not one of " + names);
  return std::nullopt;
}

enum class InitialKind { Heaviside, Tail };

struct Draft {
  RunConfig cfg;
  InitialKind initial = InitialKind::Heaviside;
  double x_front = 0.0;
  TailInitialData tail;
};

using Setter = std::function<void(Draft&, const std::string& key, const std::string& value, Problems&)>;

template <class F>
Setter number(F assign) {
  return [assign](Draft& d, const std::string& k, const std::string& v, Problems& p) {
    if (auto x = parse_number(k, v, p)) assign(d, *x);
  };
}

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"scenario",
       {
           {"name",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              const std::string s = trim(v);
              if (s.empty() || s.find_first_of("/\\") != std::string::npos || s == "." ||
                  s == "..") {
                p.add(k + ": '" + s + "' is not a valid directory name");
              } else {
                d.cfg.name = s;
              }
            }},
           {"mode",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              if (auto m = parse_enum<DomainMode>(k, v,
                                                  {{"shifting", DomainMode::ShiftingEnvironment},
                                                   {"growing", DomainMode::GrowingDomain},
                                                   {"whole-line", DomainMode::WholeLine}},
                                                  p)) {
                d.cfg.scenario.mode = *m;
              }
            }},
           {"a", number([](Draft& d, double x) { d.cfg.scenario.env.a = x; })},
           {"beta", number([](Draft& d, double x) { d.cfg.scenario.env.beta = x; })},
           {"eta", number([](Draft& d, double x) { d.cfg.scenario.env.eta = x; })},
           {"R", number([](Draft& d, double x) { d.cfg.scenario.R = x; })},
           {"T", number([](Draft& d, double x) { d.cfg.scenario.horizon = x; })},
           {"initial",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              if (auto m = parse_enum<InitialKind>(
                      k, v, {{"heaviside", InitialKind::Heaviside}, {"tail", InitialKind::Tail}}, p)) {
                d.initial = *m;
              }
            }},
           {"x_front", number([](Draft& d, double x) { d.x_front = x; })},
           {"tail_q", number([](Draft& d, double x) { d.tail.q = x; })},
           {"tail_lambda", number([](Draft& d, double x) { d.tail.lambda = x; })},
           {"tail_x0", number([](Draft& d, double x) { d.tail.x0 = x; })},
           {"tail_front", number([](Draft& d, double x) { d.tail.front_value = x; })},
       }},
      {"growing",
       {
           {"lambda", number([](Draft& d, double x) { d.cfg.scenario.growing.lambda = x; })},
           {"q", number([](Draft& d, double x) { d.cfg.scenario.growing.q = x; })},
           {"boundary_speed",
            number([](Draft& d, double x) { d.cfg.scenario.growing.boundary_speed = x; })},
           {"g_front", number([](Draft& d, double x) { d.cfg.scenario.growing.g_front = x; })},
       }},
      {"solver",
       {
           {"dx", number([](Draft& d, double x) { d.cfg.scenario.solver.dx = x; })},
           {"dt", number([](Draft& d, double x) { d.cfg.scenario.solver.dt = x; })},
           {"scheme",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              if (auto m = parse_enum<TimeScheme>(k, v,
                                                  {{"strang-compact", TimeScheme::StrangCompact},
                                                   {"imex", TimeScheme::Imex},
                                                   {"cn-newton", TimeScheme::CrankNicolsonNewton}},
                                                  p)) {
                d.cfg.scenario.solver.scheme = *m;
              }
            }},
           {"window_kappa", number([](Draft& d, double x) { d.cfg.scenario.solver.window_kappa = x; })},
           {"left_margin", number([](Draft& d, double x) { d.cfg.scenario.solver.left_margin = x; })},
           {"tail_mode",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              if (auto m = parse_enum<TailMode>(
                      k, v, {{"linear", TailMode::Linear}, {"log-patch", TailMode::LogPatch}}, p)) {
                d.cfg.scenario.solver.tail_mode = *m;
              }
            }},
           {"u_switch", number([](Draft& d, double x) { d.cfg.scenario.solver.u_switch = x; })},
           {"startup_steps",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              if (auto x = parse_number(k, v, p)) {
                if (*x != std::floor(*x) || *x < 0 || *x > 1e6) {
                  p.add(k + ": must be a non-negative integer");
                } else {
                  d.cfg.scenario.solver.startup_steps = static_cast<int>(*x);
                }
              }
            }},
           {"burn_in", number([](Draft& d, double x) { d.cfg.scenario.solver.burn_in = x; })},
       }},
      {"analysis",
       {
           {"levels",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              d.cfg.scenario.observers.levels = parse_list(k, v, p);
            }},
           {"fit_mode",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              if (auto m = parse_enum<FitMode>(
                      k, v, {{"fixed", FitMode::SpeedFixed}, {"free", FitMode::SpeedFree}}, p)) {
                d.cfg.analysis.fit_mode = *m;
              }
            }},
           {"fit_lo", number([](Draft& d, double x) { d.cfg.analysis.fit_lo = x; })},
           {"fit_hi", number([](Draft& d, double x) { d.cfg.analysis.fit_hi = x; })},
           {"log_log",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              if (auto b = parse_bool(k, v, p)) d.cfg.analysis.log_log = *b;
            }},
           {"amplitude_lo", number([](Draft& d, double x) { d.cfg.analysis.amplitude_lo = x; })},
           {"amplitude_hi", number([](Draft& d, double x) { d.cfg.analysis.amplitude_hi = x; })},
           {"theta_tolerance",
            number([](Draft& d, double x) { d.cfg.analysis.theta_tolerance = x; })},
           {"profile",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              if (auto b = parse_bool(k, v, p)) d.cfg.analysis.profile = *b;
            }},
       }},
      {"output",
       {
           {"dir", [](Draft& d, const std::string&, const std::string& v,
                      Problems&) { d.cfg.output.dir = trim(v); }},
           {"group", [](Draft& d, const std::string&, const std::string& v,
                        Problems&) { d.cfg.output.group = trim(v); }},
           {"cadence", number([](Draft& d, double x) { d.cfg.scenario.observers.trace_cadence = x; })},
           {"snapshot_times",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              d.cfg.scenario.observers.snapshot_times = parse_list(k, v, p);
            }},
           {"snapshots",
            [](Draft& d, const std::string& k, const std::string& v, Problems& p) {
              if (auto b = parse_bool(k, v, p)) d.cfg.output.snapshots = *b;
            }},
       }},
      {"sweep",
       {
           {"a", nullptr},
           {"beta", nullptr},
           {"eta", nullptr},
           {"dx", nullptr},
           {"T", nullptr},
       }},
  };
  return table;
}

void check_analysis(const RunConfig& c, Problems& p) {
  const AnalysisConfig& a = c.analysis;
  const double T = c.scenario.horizon;
  const double lo = a.fit_lo.value_or(0.25 * T);
  const double hi = a.fit_hi.value_or(T);
  if (!(lo > 0.0 && hi > lo)) p.add("analysis: fit window must satisfy 0 < fit_lo < fit_hi");
  if (hi > T * (1.0 + 1e-12)) p.add("analysis.fit_hi exceeds scenario.T");
  if (a.amplitude_lo.has_value() != a.amplitude_hi.has_value()) {
    p.add("analysis: amplitude_lo and amplitude_hi must be given together");
  }
  if (a.amplitude_lo && !(*a.amplitude_lo > 0.0 && *a.amplitude_hi > *a.amplitude_lo)) {
    p.add("analysis: amplitude window must satisfy 0 < amplitude_lo < amplitude_hi");
  }
  if (a.amplitude_lo && c.scenario.mode != DomainMode::ShiftingEnvironment) {
    p.add("analysis: the amplitude fit needs the shifting-environment mode");
  }
  if (a.theta_tolerance && !(*a.theta_tolerance > 0.0)) {
    p.add("analysis.theta_tolerance must be positive");
  }
  if (c.output.dir.empty()) p.add("output.dir must not be empty");
  if (c.output.group.is_absolute() ||
      std::find(c.output.group.begin(), c.output.group.end(), "..") != c.output.group.end()) {
    p.add("output.group must be a relative path without '..'");
  }
  for (double t : c.scenario.observers.snapshot_times) {
    if (!(t >= 0.0 && t <= T)) {
      p.add("output.snapshot_times must lie in [0, T]");
      break;
    }
  }
}

// Prediction used by report and analyze.
struct Target {
  std::string label;
  double c = 0.0;
  LogCoefficient theta;
  double wave_lambda = 0.0;
  double wave_R = 0.0;
  bool has_wave = false;
};

Target target_for(const Scenario& sc) {
  Target t;
  if (sc.mode == DomainMode::GrowingDomain) {
    const GrowingDomainSpec& g = sc.growing;
    const bool critical = g.lambda >= std::sqrt(sc.R) * (1.0 - 1e-12);
    t.label = "growing-domain";
    t.c = critical ? 2.0 * std::sqrt(sc.R) : wave_speed(g.lambda, sc.R);
    t.theta = tail_log_coefficient(g.lambda, sc.R, g.q);
    t.wave_lambda = g.lambda;
    t.wave_R = sc.R;
    t.has_wave = true;
    return t;
  }
  if (sc.mode == DomainMode::WholeLine) {
    t.label = "whole-line";
    const double lmin = std::sqrt(sc.R);
    if (const auto* d = std::get_if<TailInitialData>(&sc.initial); d && d->lambda < lmin) {
      t.c = wave_speed(d->lambda, sc.R);
      t.theta = tail_log_coefficient(d->lambda, sc.R, d->pure_exponential ? 0.0 : d->q);
      t.wave_lambda = d->lambda;
    } else {
      t.c = 2.0 * lmin;
      t.theta = LogCoefficient{-1.5 / lmin, 0.0, false};
      t.wave_lambda = lmin;
    }
    t.wave_R = sc.R;
    t.has_wave = true;
    return t;
  }
  const FrontPrediction p = predict_front(sc.env);
  t.label = std::string(to_string(p.regime.label));
  t.c = p.c_star;
  t.theta = p.theta;
  if (sc.env.a == 0.0 || p.regime.label != RegimeLabel::Subcritical) {
    t.wave_lambda = p.lambda_eff;
    t.wave_R = p.plateau;
    t.has_wave = true;
  }
  return t;
}

FitOptions fit_options(const AnalysisConfig& a, const Target& target, double T) {
  FitOptions o;
  o.mode = a.fit_mode;
  o.c = target.c;
  o.t_lo = a.fit_lo.value_or(0.25 * T);
  o.t_hi = a.fit_hi.value_or(T);
  o.log_log = a.log_log;
  return o;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string format_report(const std::string& name, const Target& target,
                          const RunSummary& s) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "name=" << name << '\n' << "regime=" << target.label << '\n' << "c_star=" << target.c << '\n';
  if (target.theta.has_log_log) out << "log_log_star=" << target.theta.log_log_t << '\n';
  if (s.fit) {
    out << format_fit_report(*s.fit, target.theta.log_t);
    if (s.fit->log_log_hat != 0.0) out << "log_log_hat=" << s.fit->log_log_hat << '\n';
    out << "fit_mode=" << (s.fit->mode == FitMode::SpeedFixed ? "fixed" : "free") << '\n'
        << "samples=" << s.fit->samples << '\n';
  } else {
    out << "theta_star=" << target.theta.log_t << '\n';
  }
  if (s.amplitude) {
    out << "amp_power=" << s.amplitude->power_exponent << '\n'
        << "amp_rate=" << s.amplitude->exponential_rate << '\n';
  }
  if (s.profile_distance) out << "profile_distance=" << *s.profile_distance << '\n';
  if (!s.error.empty()) {
    out << "status=FAIL\n" << "error=" << s.error << '\n';
  } else if (s.passed) {
    out << "status=" << (*s.passed ? "PASS" : "FAIL") << '\n';
  } else {
    out << "status=OK\n";
  }
  return out.str();
}

void analyze(const Scenario& sc, const AnalysisConfig& a, const Target& target,
             const FrontTrace& trace, const Field* final_field, RunSummary& s) {
  s.fit = fit_delay(trace, fit_options(a, target, sc.horizon));
  if (a.amplitude_lo) s.amplitude = amplitude_fit(trace, *a.amplitude_lo, *a.amplitude_hi);
  if (a.profile && final_field) {
    if (!target.has_wave) throw DataError("no traveling wave is selected in this regime");
    const WaveProfile wave = compute_profile(target.wave_lambda, target.wave_R);
    s.profile_distance = profile_distance(*final_field, wave, 0.5 * sc.plateau());
  }
  if (a.theta_tolerance) {
    const double th = target.theta.log_t;
    const double err = th != 0.0 ? std::abs(s.fit->theta_hat - th) / std::abs(th)
                                 : std::abs(s.fit->theta_hat);
    s.passed = err <= *a.theta_tolerance;
  }
}

}  // namespace

const std::map<std::string, std::vector<std::string>>& config_keys() {
  static const auto keys = [] {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [section, entries] : setters()) {
      for (const auto& [key, fn] : entries) out[section].push_back(key);
    }
    return out;
  }();
  return keys;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  Problems p;
  Draft d;
  for (const auto& [section, body] : tree) {
    const auto sec = setters().find(section);
    if (!body.data().empty() && body.empty()) {
      p.add("'" + section + "' appears outside a section");
      continue;
    }
    if (sec == setters().end()) {
      p.add("unknown section [" + section + "]");
      continue;
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) {
        p.add("unknown key '" + key + "' in [" + section + "]");
        continue;
      }
      if (section == "sweep") {
        auto values = parse_list(full, value.data(), p);
        if (values.empty()) p.add(full + ": empty list");
        d.cfg.grid[key] = std::move(values);
        continue;
      }
      it->second(d, full, value.data(), p);
    }
  }
  if (d.initial == InitialKind::Tail) {
    d.cfg.scenario.initial = d.tail;
  } else {
    d.cfg.scenario.initial = HeavisideFront{d.x_front};
  }
  for (auto& s : d.cfg.scenario.problems()) p.add(std::move(s));
  check_analysis(d.cfg, p);
  if (!p.items.empty()) {
    std::string msg = source + ": " + std::to_string(p.items.size()) + " problem(s)";
    for (const auto& s : p.items) msg += "\n  " + s;
    throw ValidationError(msg);
  }
  return d.cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

std::string format_config(const RunConfig& c) {
  const Scenario& sc = c.scenario;
  std::ostringstream out;
  out << "[scenario]\n"
      << "name = " << c.name << '\n'
      << "mode = " << to_string(sc.mode) << '\n'
      << "a = " << num(sc.env.a) << '\n'
      << "beta = " << num(sc.env.beta) << '\n'
      << "eta = " << num(sc.env.eta) << '\n'
      << "R = " << num(sc.R) << '\n'
      << "T = " << num(sc.horizon) << '\n';
  if (const auto* tail = std::get_if<TailInitialData>(&sc.initial)) {
    out << "initial = tail\n"
        << "tail_q = " << num(tail->q) << '\n'
        << "tail_lambda = " << num(tail->lambda) << '\n'
        << "tail_x0 = " << num(tail->x0) << '\n';
    if (tail->front_value) out << "tail_front = " << num(*tail->front_value) << '\n';
  } else if (const auto* h = std::get_if<HeavisideFront>(&sc.initial)) {
    out << "initial = heaviside\n"
        << "x_front = " << num(h->x_front) << '\n';
  }
  if (sc.mode == DomainMode::GrowingDomain) {
    out << "\n[growing]\n"
        << "lambda = " << num(sc.growing.lambda) << '\n'
        << "q = " << num(sc.growing.q) << '\n'
        << "boundary_speed = " << num(sc.growing.boundary_speed) << '\n';
    if (sc.growing.g_front) out << "g_front = " << num(*sc.growing.g_front) << '\n';
  }
  const SolverConfig& s = sc.solver;
  out << "\n[solver]\n"
      << "dx = " << num(s.dx) << '\n'
      << "dt = " << num(s.dt) << '\n'
      << "scheme = " << to_string(s.scheme) << '\n'
      << "window_kappa = " << num(s.window_kappa) << '\n'
      << "left_margin = " << num(s.left_margin) << '\n'
      << "tail_mode = " << to_string(s.tail_mode) << '\n'
      << "u_switch = " << num(s.u_switch) << '\n'
      << "startup_steps = " << s.startup_steps << '\n'
      << "burn_in = " << num(s.burn_in) << '\n';
  const AnalysisConfig& a = c.analysis;
  out << "\n[analysis]\n"
      << "levels = " << list(sc.trace_levels()) << '\n'
      << "fit_mode = " << (a.fit_mode == FitMode::SpeedFixed ? "fixed" : "free") << '\n'
      << "fit_lo = " << num(a.fit_lo.value_or(0.25 * sc.horizon)) << '\n'
      << "fit_hi = " << num(a.fit_hi.value_or(sc.horizon)) << '\n'
      << "log_log = " << (a.log_log ? "true" : "false") << '\n';
  if (a.amplitude_lo) {
    out << "amplitude_lo = " << num(*a.amplitude_lo) << '\n'
        << "amplitude_hi = " << num(*a.amplitude_hi) << '\n';
  }
  if (a.theta_tolerance) out << "theta_tolerance = " << num(*a.theta_tolerance) << '\n';
  out << "profile = " << (a.profile ? "true" : "false") << '\n';
  out << "\n[output]\n"
      << "dir = " << c.output.dir.string() << '\n'
      << "cadence = " << num(sc.observers.trace_cadence) << '\n';
  if (!c.output.group.empty()) out << "group = " << c.output.group.string() << '\n';
  if (!sc.observers.snapshot_times.empty()) {
    out << "snapshot_times = " << list(sc.observers.snapshot_times) << '\n';
  }
  out << "snapshots = " << (c.output.snapshots ? "true" : "false") << '\n';
  if (!c.grid.empty()) {
    out << "\n[sweep]\n";
    for (const auto& [key, values] : c.grid) out << key << " = " << list(values) << '\n';
  }
  return out.str();
}

fs::path output_root(const RunConfig& config) {
  const char* env = std::getenv("KPPLAB_OUT");
  return (env && *env ? fs::path(env) : config.output.dir) / config.output.group;
}

void write_trace_csv(const FrontTrace& trace, std::ostream& out) {
  out << "# kpplab-csv v1\n"
      << "t,xi_b,u_at_X,x_of_X\n"
      << std::setprecision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << trace.times[i] << ',' << trace.xi[i] << ',' << trace.u_at_shift[i] << ','
        << trace.shift[i] << '\n';
  }
}

FrontTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "# kpplab-csv v1") {
    throw DataError("trace file lacks the '# kpplab-csv v1' header");
  }
  if (!std::getline(in, line) || trim(line) != "t,xi_b,u_at_X,x_of_X") {
    throw DataError("trace file has an unexpected column header");
  }
  FrontTrace tr;
  std::size_t row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      const std::string s = trim(cell);
      char* end = nullptr;
      const double x = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) {
        throw DataError("trace file row " + std::to_string(row) + ": bad value '" + s + "'");
      }
      v.push_back(x);
    }
    if (v.size() != 4) throw DataError("trace file row " + std::to_string(row) + ": expected 4 columns");
    tr.push(v[0], v[1], v[2], v[3]);
  }
  tr.validate();
  return tr;
}

void write_snapshot_csv(const Field& field, std::ostream& out) {
  out << "# kpplab-csv v1\n"
      << "x,u\n"
      << std::setprecision(17);
  for (std::size_t i = 0; i < field.size(); ++i) out << field.x(i) << ',' << field.u[i] << '\n';
}

std::string snapshot_name(double t) {
  std::ostringstream out;
  out << std::setprecision(10) << t;
  return "snap_t" + out.str() + ".csv";
}

RunSummary run_command(const RunConfig& config) {
  RunResult result;
  return run_command(config, result);
}

RunSummary run_command(const RunConfig& config, RunResult& result) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary s;
  s.name = config.name;
  s.dir = output_root(config) / config.name;
  fs::create_directories(s.dir);
  fs::remove(s.dir / "FAILED");
  write_file(s.dir / "manifest.txt", "; kpplab manifest, written " + utc_now() + "\n" +
                                         format_config(config));
  const Scenario& sc = config.scenario;
  Target target;
  try {
    target = target_for(sc);
    s.has_prediction = sc.mode == DomainMode::ShiftingEnvironment;
    if (s.has_prediction) s.prediction = predict_front(sc.env);
  } catch (const Error& e) {
    target.label = "unsupported";
    target.theta.log_t = kNaN;
    s.error = e.what();
  }

  bool ran = false;
  try {
    run(sc, result);
    ran = true;
  } catch (const std::exception& e) {
    s.error = e.what();
  }

  auto dump_outputs = [&] {
    if (!result.traces.empty()) {
      std::ostringstream tr;
      write_trace_csv(result.trace(), tr);
      write_file(s.dir / "trace.csv", tr.str());
      for (std::size_t k = 1; k < result.traces.size(); ++k) {
        std::ostringstream extra;
        write_trace_csv(result.traces[k], extra);
        write_file(s.dir / ("trace_level" + std::to_string(k) + ".csv"), extra.str());
      }
    }
    if (config.output.snapshots) {
      fs::create_directories(s.dir / "snaps");
      std::vector<const Field*> fields;
      for (const Field& f : result.snapshots) fields.push_back(&f);
      if (ran) fields.push_back(&result.final_field);
      for (const Field* f : fields) {
        std::ostringstream snap;
        write_snapshot_csv(*f, snap);
        write_file(s.dir / "snaps" / snapshot_name(f->t), snap.str());
      }
    }
  };

  if (ran && s.error.empty()) {
    try {
      analyze(sc, config.analysis, target, result.trace(), &result.final_field, s);
      s.ok = true;
    } catch (const std::exception& e) {
      s.error = e.what();
    }
  }
  dump_outputs();
  write_file(s.dir / "report.txt", format_report(config.name, target, s));
  if (!s.ok) write_file(s.dir / "FAILED", s.error + "\n");
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

std::vector<RunConfig> expand_grid(const RunConfig& config) {
  if (config.grid.empty()) throw ValidationError("sweep: the [sweep] grid is empty");
  static const std::vector<std::string> order = {"a", "beta", "eta", "dx", "T"};
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  for (const auto& key : order) {
    const auto it = config.grid.find(key);
    if (it == config.grid.end()) continue;
    if (it->second.empty()) throw ValidationError("sweep: empty list for " + key);
    axes.emplace_back(key, it->second);
  }
  std::vector<RunConfig> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    RunConfig c = config;
    c.grid.clear();
    std::string tag;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const auto& [key, values] = axes[k];
      const double v = values[idx[k]];
      tag += (tag.empty() ? "" : "_") + key + shortest(v);
      Scenario& sc = c.scenario;
      if (key == "a") sc.env.a = v;
      if (key == "beta") sc.env.beta = v;
      if (key == "eta") sc.env.eta = v;
      if (key == "dx") sc.solver.dx = v;
      if (key == "T") sc.horizon = v;
    }
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "p%03zu_", out.size());
    c.name = config.name + "/" + prefix + tag;
    const auto problems = c.scenario.problems();
    if (!problems.empty()) throw ValidationError("sweep point " + tag + ": " + problems.front());
    out.push_back(std::move(c));
    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++idx[k] < axes[k].second.size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

std::vector<RunSummary> sweep_command(const RunConfig& config, unsigned jobs) {
  const std::vector<RunConfig> points = expand_grid(config);
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(points.size()));
  std::vector<RunSummary> results(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = run_command(points[i]);
      } catch (const std::exception& e) {
        results[i].name = points[i].name;
        results[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream agg;
  agg << "# kpplab-csv v1\n"
      << "a,beta,eta,c_star,theta_star,c_hat,theta_hat,rel_err\n"
      << std::setprecision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Scenario& sc = points[i].scenario;
    const RunSummary& r = results[i];
    double c_star = kNaN;
    double theta_star = kNaN;
    try {
      const Target t = target_for(sc);
      c_star = t.c;
      theta_star = t.theta.log_t;
    } catch (const Error&) {
    }
    const double c_hat = r.fit ? r.fit->c_hat : kNaN;
    const double th = r.fit ? r.fit->theta_hat : kNaN;
    const double rel = theta_star != 0.0 ? std::abs(th - theta_star) / std::abs(theta_star)
                                         : std::abs(th);
    agg << sc.env.a << ',' << sc.env.beta << ',' << sc.env.eta << ',' << c_star << ','
        << theta_star << ',' << c_hat << ',' << th << ',' << rel << '\n';
  }
  const fs::path dir = output_root(config) / config.name;
  fs::create_directories(dir);
  write_file(dir / "aggregate.csv", agg.str());
  return results;
}

Theorem parse_theorem(const std::string& label) {
  if (label == "1.4") return Theorem::GrowingDomain;
  if (label == "1.5") return Theorem::Pulling;
  if (label == "1.6") return Theorem::Critical;
  if (label == "1.7") return Theorem::NoPulling;
  throw ValidationError("--theorem must be one of 1.4, 1.5, 1.6, 1.7 (got '" + label + "')");
}

std::string analyze_trace(const FrontTrace& trace, const AnalyzeRequest& req) {
  Scenario sc;
  if (req.theorem == Theorem::GrowingDomain) {
    sc.mode = DomainMode::GrowingDomain;
    sc.R = req.R;
    sc.growing.lambda = req.lambda;
    sc.growing.q = req.q;
  } else {
    sc.env = req.env;
    const Regime regime = classify_regime(req.env);
    const RegimeLabel want = req.theorem == Theorem::Pulling    ? RegimeLabel::SupercriticalPulling
                             : req.theorem == Theorem::Critical ? RegimeLabel::CriticalPulling
                                                                : RegimeLabel::NoPulling;
    if (regime.label != want) {
      throw ValidationError("the environment is classified as " +
                            std::string(to_string(regime.label)) +
                            ", which the requested theorem does not cover");
    }
  }
  if (trace.times.empty()) throw DataError("trace is empty");
  sc.horizon = trace.times.back();
  const Target target = target_for(sc);
  RunSummary s;
  AnalysisConfig a = req.analysis;
  a.profile = false;
  if (a.amplitude_lo && req.theorem == Theorem::GrowingDomain) a.amplitude_lo.reset();
  analyze(sc, a, target, trace, nullptr, s);
  return format_report("analyze", target, s);
}

}  // namespace kpplab
