#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "kpplab/errors.hpp"
#include "kpplab/runner.hpp"
#include "kpplab/traveling_wave.hpp"
#include "kpplab/verify.hpp"

namespace fs = std::filesystem;
using namespace kpplab;

namespace {

enum Exit { kOk = 0, kValidation = 1, kNumerical = 2, kAcceptance = 3 };

void print_summary(const RunSummary& s) {
  std::cout << s.name << ": " << (s.ok ? "ok" : "FAILED");
  if (s.fit) std::cout << "  theta_hat=" << s.fit->theta_hat << "  c_hat=" << s.fit->c_hat;
  if (s.passed) std::cout << "  " << (*s.passed ? "PASS" : "FAIL");
  if (!s.error.empty()) std::cout << "  (" << s.error << ")";
  std::cout << "  -> " << s.dir.string() << '\n';
}

int cmd_run(const std::string& path) {
  const RunConfig cfg = load_config(path);
  const RunSummary s = run_command(cfg);
  print_summary(s);
  if (!s.ok) return kNumerical;
  if (s.passed && !*s.passed) return kAcceptance;
  return kOk;
}

int cmd_sweep(const std::string& path, unsigned jobs) {
  const RunConfig cfg = load_config(path);
  const auto summaries = sweep_command(cfg, jobs);
  int code = kOk;
  for (const RunSummary& s : summaries) {
    print_summary(s);
    if (!s.ok) code = kNumerical;
    else if (s.passed && !*s.passed && code == kOk) code = kAcceptance;
  }
  std::cout << "aggregate: " << (output_root(cfg) / cfg.name / "aggregate.csv").string() << '\n';
  return code;
}

struct AnalyzeArgs {
  std::string trace;
  std::string theorem;
  std::optional<double> a, beta, eta, lambda, q, R, fit_lo, fit_hi;
  std::string fit_mode;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& args) {
  AnalyzeRequest req;
  req.theorem = parse_theorem(args.theorem);
  const fs::path manifest = fs::path(args.trace).parent_path() / "manifest.txt";
  if (fs::exists(manifest)) {
    const RunConfig cfg = load_config(manifest);
    req.env = cfg.scenario.env;
    req.lambda = cfg.scenario.growing.lambda;
    req.q = cfg.scenario.growing.q;
    req.R = cfg.scenario.R;
    req.analysis = cfg.analysis;
  }
  if (args.a) req.env.a = *args.a;
  if (args.beta) req.env.beta = *args.beta;
  if (args.eta) req.env.eta = *args.eta;
  if (args.lambda) req.lambda = *args.lambda;
  if (args.q) req.q = *args.q;
  if (args.R) req.R = *args.R;
  if (args.fit_lo) req.analysis.fit_lo = *args.fit_lo;
  if (args.fit_hi) req.analysis.fit_hi = *args.fit_hi;
  if (args.fit_mode == "free") req.analysis.fit_mode = FitMode::SpeedFree;
  if (args.fit_mode == "fixed") req.analysis.fit_mode = FitMode::SpeedFixed;

  std::ifstream in(args.trace);
  if (!in) throw ValidationError("cannot open " + args.trace);
  const std::string report = analyze_trace(read_trace_csv(in), req);
  if (args.out.empty()) {
    std::cout << report;
  } else {
    std::ofstream(args.out) << report;
  }
  return report.find("status=FAIL") != std::string::npos ? kAcceptance : kOk;
}

int cmd_verify(const std::string& suite) {
  SuiteOptions opt;
  const char* env = std::getenv("KPPLAB_OUT");
  opt.out_root = env && *env ? fs::path(env) : fs::path("out");
  opt.on_result = [](const Criterion& c) { std::cout << format_criterion(c) << std::endl; };
  const auto results = run_suite(suite, opt);
  int failed = 0;
  for (const Criterion& c : results) failed += !c.passed && !c.soft;
  std::cout << suite << ": " << results.size() - static_cast<std::size_t>(failed) << '/'
            << results.size() << " passed\n";
  return failed ? kAcceptance : kOk;
}

int cmd_wave(double lambda, double R, const std::string& out) {
  const WaveProfile w = compute_profile(lambda, R);
  std::ofstream f(out);
  if (!f) throw ValidationError("cannot write " + out);
  w.write_csv(f);
  std::cout << "wave lambda=" << lambda << " R=" << R << " c=" << w.speed() << " residual "
            << ode_residual(w) << " -> " << out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Front propagation experiments for KPP equations in shifting environments"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);

  unsigned jobs = std::thread::hardware_concurrency();
  auto* sweep = app.add_subcommand("sweep", "Run every point of the [sweep] grid");
  sweep->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--jobs,-j", jobs, "Concurrent runs");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Fit a trace against a theorem's prediction");
  analyze->add_option("trace", aa.trace, "trace.csv")->required()->check(CLI::ExistingFile);
  analyze->add_option("--theorem", aa.theorem, "1.4, 1.5, 1.6 or 1.7")->required();
  analyze->add_option("--a", aa.a);
  analyze->add_option("--beta", aa.beta);
  analyze->add_option("--eta", aa.eta);
  analyze->add_option("--lambda", aa.lambda, "Growing domain");
  analyze->add_option("--q", aa.q, "Growing domain");
  analyze->add_option("--R", aa.R, "Growing domain");
  analyze->add_option("--fit-lo", aa.fit_lo);
  analyze->add_option("--fit-hi", aa.fit_hi);
  analyze->add_option("--fit-mode", aa.fit_mode)->check(CLI::IsMember({"fixed", "free"}));
  analyze->add_option("--out", aa.out, "Write the report here instead of stdout");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run an acceptance suite");
  verify->add_option("suite", suite)->required()->check(CLI::IsMember(suite_names()));

  double lambda = 0.0;
  double R = 1.0;
  std::string out;
  auto* wave = app.add_subcommand("wave", "Compute a traveling wave profile");
  wave->add_option("--lambda", lambda)->required();
  wave->add_option("--R", R);
  wave->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(config);
    if (*sweep) return cmd_sweep(config, jobs);
    if (*analyze) return cmd_analyze(aa);
    if (*verify) return cmd_verify(suite);
    if (*wave) return cmd_wave(lambda, R, out);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const ConfigError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const DomainError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const RegimeError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
