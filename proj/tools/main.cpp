#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bibeta/bayes.hpp"
#include "bibeta/density.hpp"
#include "bibeta/diagnostics.hpp"
#include "bibeta/elicitation.hpp"
#include "bibeta/error.hpp"
#include "bibeta/estimators.hpp"
#include "bibeta/experiments.hpp"
#include "bibeta/io.hpp"
#include "bibeta/parallel.hpp"
#include "bibeta/sampling.hpp"

namespace {

using nlohmann::json;
using namespace bibeta;

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string output;
};

/// Exit-code 1 failure: bad input files or flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const Globals& g, std::optional<std::uint64_t> fallback = std::nullopt) {
  const std::uint64_t seed = g.seed ? *g.seed : fallback.value_or(kDefaultSeed);
  std::cerr << "seed: " << seed << '\n';
  return seed;
}

std::size_t resolve_threads(const Globals& g) { return g.threads > 0 ? g.threads : default_thread_count(); }

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw UsageError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_file(const std::string& path, const auto& writer) {
  if (path.empty()) return;
  Output out(path);
  writer(out.stream());
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

/// Accepts inline JSON or a path to a JSON file.
json json_argument(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      fail(ErrorKind::ParseError, e.what());
    }
  }
  return read_json_file(text);
}

PairedSample read_input(const std::string& path) {
  if (path == "-") return io::read_csv(std::cin);
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return io::read_csv(in);
}

AlphaParams alpha_argument(const std::vector<double>& v) {
  if (v.size() != 4) throw UsageError("--alpha needs four comma-separated values");
  return AlphaParams(v[0], v[1], v[2], v[3]);
}

void print_json(Output& out, const json& j) { out.stream() << j.dump(2) << '\n'; }

struct FitOptions {
  std::string input;
  std::string method = "mm1";
  std::size_t bootstrap = 0;
  double level = 0.95;
  std::string prior;
  std::size_t chains = 4;
  std::size_t warmup = 2000;
  std::size_t iters = 2000;
  double target_accept = 0.9;
  std::string draws_csv;
  std::string resamples_csv;
  bool ppc = false;
};

void run_fit(const Globals& g, const FitOptions& o) {
  const PairedSample data = read_input(o.input);
  const Method method = parse_method(o.method);
  json result;
  if (is_moment_method(method)) {
    result["estimate"] = io::to_json(estimate(method, empirical_moments(data)));
    if (o.bootstrap > 0) {
      const auto ci = bootstrap_ci(data, method, o.bootstrap, o.level, resolve_seed(g), resolve_threads(g));
      result["bootstrap"] = io::to_json(ci);
      write_file(o.resamples_csv, [&](std::ostream& s) { io::write_resamples_csv(s, ci); });
    }
  } else {
    const PriorSpec prior = o.prior.empty() ? PriorSpec{} : io::prior_from_json(json_argument(o.prior));
    HmcConfig hmc;
    hmc.chains = o.chains;
    hmc.warmup = o.warmup;
    hmc.iters = o.iters;
    hmc.target_accept = o.target_accept;
    hmc.seed = resolve_seed(g);
    hmc.threads = resolve_threads(g);
    const auto draws = hmc_fit(data, prior, hmc);
    result["estimate"] = io::to_json(method == Method::BE1 ? be1(draws) : be2(draws));
    result["prior"] = io::to_json(prior);
    result["diagnostics"] = io::diagnostics_json(draws);
    if (o.ppc) result["ppc"] = io::to_json(ppc(draws, data));
    write_file(o.draws_csv, [&](std::ostream& s) { io::write_posterior_csv(s, draws); });
  }
  result["n"] = data.size();
  Output out(g.output);
  print_json(out, result);
}

void run_sample(const Globals& g, const std::vector<double>& alpha, std::size_t n) {
  const auto a = alpha_argument(alpha);
  const auto s = sample(a, n, resolve_seed(g));
  Output out(g.output);
  io::write_csv(out.stream(), s);
}

void run_density(const Globals& g, const std::vector<double>& alpha, std::size_t k) {
  const auto a = alpha_argument(alpha);
  if (k < 2) throw UsageError("--grid must be at least 2");
  std::ostringstream body;
  body << "x,y,density\n";
  for (std::size_t i = 0; i < k; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j) {
      const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(k);
      body << io::format_double(x) << ',' << io::format_double(y) << ',';
      if (is_density_defined(a, x, y)) {
        body << io::format_double(density(a, x, y));
      } else {
        body << "undefined";
      }
      body << '\n';
    }
  }
  Output out(g.output);
  out.stream() << body.str();
}

void run_elicit(const Globals& g, const MomentSummary& m, const std::string& preference) {
  const auto r = elicit(m, parse_preference(preference));
  Output out(g.output);
  print_json(out, io::to_json(r));
}

void run_diagnose(const Globals& g, const std::string& input, double c, std::size_t bootstrap) {
  const PairedSample data = read_input(input);
  json result;
  result["n"] = data.size();
  result["gn"] = io::to_json(gn_test(data));
  std::optional<std::size_t> B;
  std::uint64_t seed = kDefaultSeed;
  if (bootstrap > 0) {
    B = bootstrap;
    seed = resolve_seed(g);
  }
  result["m"] = io::to_json(m_test(data, c, B, seed, resolve_threads(g)));
  Output out(g.output);
  print_json(out, result);
}

void run_experiment_command(const Globals& g, const std::string& config, const std::string& metrics_csv,
                            const std::string& histogram_csv) {
  const json j = read_json_file(config);
  const auto seed = resolve_seed(g, j.contains("seed") ? std::optional(j.at("seed").get<std::uint64_t>()) : std::nullopt);
  const std::size_t threads = resolve_threads(g);
  Output out(g.output);
  if (j.contains("statistic")) {
    ExperimentSpec spec = io::experiment_from_json(j);
    const auto statistic = parse_statistic(j.at("statistic").get<std::string>());
    const auto summary = sampling_distribution(statistic, spec.generator, spec.n, spec.reps, seed,
                                               j.value("bins", std::size_t{30}), threads);
    write_file(histogram_csv, [&](std::ostream& s) { io::write_histogram_csv(s, summary.histogram); });
    print_json(out, io::to_json(summary));
    return;
  }
  ExperimentSpec spec = io::experiment_from_json(j);
  spec.seed = seed;
  spec.threads = threads;
  const auto table = run_experiment(spec);
  write_file(metrics_csv, [&](std::ostream& s) { io::write_metrics_csv(s, table); });
  print_json(out, io::to_json(table));
}

void run_sbc_command(const Globals& g, const std::string& config, const std::string& histogram_csv,
                     const std::string& summary_json) {
  const json j = read_json_file(config);
  SbcConfig c;
  PriorSpec prior = PriorSpec::gamma_iid(1.0, 1.0, 0.5);
  try {
    if (j.contains("prior")) prior = io::prior_from_json(j.at("prior"));
    c.n = j.value("n", c.n);
    c.L = j.value("L", c.L);
    c.N = j.value("N", c.N);
    if (j.contains("hmc")) c.hmc = io::hmc_from_json(j.at("hmc"));
    c.seed = resolve_seed(g, j.contains("seed") ? std::optional(j.at("seed").get<std::uint64_t>()) : std::nullopt);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("sbc config: ") + e.what());
  }
  c.threads = resolve_threads(g);
  const auto report = sbc(prior, c);
  write_file(histogram_csv, [&](std::ostream& s) { io::write_sbc_histogram_csv(s, report); });
  write_file(summary_json, [&](std::ostream& s) { s << io::to_json(report).dump(2) << '\n'; });
  Output out(g.output);
  io::write_sbc_ranks_csv(out.stream(), report);
}

bool is_usage_kind(ErrorKind kind) { return kind == ErrorKind::ParseError || kind == ErrorKind::InvalidArgument; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Four-parameter bivariate beta: estimation, sampling, diagnostics and experiments", "bibeta"};
  app.require_subcommand(1, 1);
  Globals g;
  app.add_option("--seed", g.seed, "Root seed (default " + std::to_string(kDefaultSeed) + ")");
  app.add_option("--threads", g.threads, "Worker threads (default BIBETA_THREADS or logical cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("-o,--output", g.output, "Output path (default standard output)");

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Estimate alpha from a CSV sample");
  fit_cmd->add_option("input", fit.input, "CSV file with columns x,y ('-' for standard input)")->required();
  fit_cmd->add_option("-m,--method", fit.method, "mm1|mm2|mm3|mm4|be1|be2");
  fit_cmd->add_option("-B,--bootstrap", fit.bootstrap, "Bootstrap resamples for moment methods");
  fit_cmd->add_option("--level", fit.level, "Interval level")->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--prior", fit.prior, "Prior as inline JSON or a JSON file");
  fit_cmd->add_option("--chains", fit.chains, "HMC chains");
  fit_cmd->add_option("--warmup", fit.warmup, "HMC warmup iterations per chain");
  fit_cmd->add_option("--iters", fit.iters, "HMC sampling iterations per chain");
  fit_cmd->add_option("--target-accept", fit.target_accept, "HMC target acceptance");
  fit_cmd->add_option("--draws-csv", fit.draws_csv, "Write posterior draws to this CSV");
  fit_cmd->add_option("--resamples-csv", fit.resamples_csv, "Write bootstrap resample estimates to this CSV");
  fit_cmd->add_flag("--ppc", fit.ppc, "Add a posterior predictive moment check");

  std::vector<double> alpha;
  std::size_t n = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Draw a sample as CSV");
  sample_cmd->add_option("--alpha", alpha, "a1,a2,a3,a4")->required()->delimiter(',');
  sample_cmd->add_option("-n,--n", n, "Sample size")->required();

  std::size_t grid = 50;
  auto* density_cmd = app.add_subcommand("density", "Density on a k x k grid of cell centres as CSV");
  density_cmd->add_option("--alpha", alpha, "a1,a2,a3,a4")->required()->delimiter(',');
  density_cmd->add_option("--grid", grid, "Cells per side");

  MomentSummary moments{};
  std::string preference = "means-first";
  auto* elicit_cmd = app.add_subcommand("elicit", "Find alpha matching elicited moments");
  elicit_cmd->add_option("--m1", moments.m1)->required();
  elicit_cmd->add_option("--m2", moments.m2)->required();
  elicit_cmd->add_option("--v1", moments.v1)->required();
  elicit_cmd->add_option("--v2", moments.v2)->required();
  elicit_cmd->add_option("--rho", moments.rho)->required();
  elicit_cmd->add_option("--preference", preference, "means-first|balanced");

  std::string input;
  double c = -0.05;
  std::size_t m_bootstrap = 0;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "G_n and M model checks on a CSV sample");
  diagnose_cmd->add_option("input", input, "CSV file with columns x,y ('-' for standard input)")->required();
  diagnose_cmd->add_option("--c", c, "M-test threshold");
  diagnose_cmd->add_option("-B,--bootstrap", m_bootstrap, "Bootstrap resamples for the M statistic");

  std::string config;
  std::string metrics_csv;
  std::string histogram_csv;
  std::string summary_json;
  auto* experiment_cmd = app.add_subcommand("experiment", "Run a simulation study from a JSON config");
  experiment_cmd->add_option("config", config, "Experiment JSON")->required();
  experiment_cmd->add_option("--metrics-csv", metrics_csv, "Write the metrics table as CSV");
  experiment_cmd->add_option("--histogram-csv", histogram_csv, "Write the statistic histogram as CSV");

  auto* sbc_cmd = app.add_subcommand("sbc", "Simulation-based calibration; writes ranks as CSV");
  sbc_cmd->add_option("config", config, "SBC JSON")->required();
  sbc_cmd->add_option("--histogram-csv", histogram_csv, "Write rank counts as CSV");
  sbc_cmd->add_option("--summary-json", summary_json, "Write uniformity p-values as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit_cmd) run_fit(g, fit);
    if (*sample_cmd) run_sample(g, alpha, n);
    if (*density_cmd) run_density(g, alpha, grid);
    if (*elicit_cmd) run_elicit(g, moments, preference);
    if (*diagnose_cmd) run_diagnose(g, input, c, m_bootstrap);
    if (*experiment_cmd) run_experiment_command(g, config, metrics_csv, histogram_csv);
    if (*sbc_cmd) run_sbc_command(g, config, histogram_csv, summary_json);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    if (is_usage_kind(e.kind())) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    std::cout << json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
