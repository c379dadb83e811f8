#include "bibeta/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "bibeta/error.hpp"

namespace bibeta::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, out);
  return result.ec == std::errc() && result.ptr == end && !text.empty();
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

json intervals_json(const Intervals& intervals) {
  json arr = json::array();
  for (const auto& iv : intervals) arr.push_back({{"lower", number(iv.lower)}, {"upper", number(iv.upper)}});
  return arr;
}

json vec4_json(const Vec4& v) { return json::array({number(v[0]), number(v[1]), number(v[2]), number(v[3])}); }

Vec4 vec4_from(const json& j) {
  if (!j.is_array() || j.size() != 4) fail(ErrorKind::ParseError, "expected an array of four numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

PairedSample read_csv(std::istream& in) {
  PairedSample out;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    const std::string row = "row " + std::to_string(line_no);
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos) {
      fail(ErrorKind::ParseError, row + ": expected two comma-separated values");
    }
    double x = 0.0;
    double y = 0.0;
    const bool x_ok = parse_number(view.substr(0, comma), x);
    const bool y_ok = parse_number(view.substr(comma + 1), y);
    if (!x_ok || !y_ok) {
      if (first_content && !x_ok && !y_ok) {
        first_content = false;
        continue;
      }
      fail(ErrorKind::ParseError, row + ": '" + std::string(view) + "' is not a pair of numbers");
    }
    first_content = false;
    if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
      fail(ErrorKind::ParseError, row + ": values must lie strictly inside (0,1)");
    }
    out.push_back(x, y);
  }
  return out;
}

PairedSample read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open '" + path.string() + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const PairedSample& sample) {
  out << "x,y\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << format_double(sample.x()[i]) << ',' << format_double(sample.y()[i]) << '\n';
  }
}

json to_json(const AlphaParams& alpha) {
  return {{"alpha1", alpha[0]}, {"alpha2", alpha[1]}, {"alpha3", alpha[2]}, {"alpha4", alpha[3]}};
}

json to_json(const MomentSummary& m) {
  return {{"m1", number(m.m1)}, {"m2", number(m.m2)}, {"v1", number(m.v1)}, {"v2", number(m.v2)},
          {"rho", number(m.rho)}};
}

json to_json(const EstimateReport& r) {
  json j = {{"method", to_string(r.method)},
            {"alpha_hat", vec4_json(r.alpha_hat)},
            {"clamped", r.clamped},
            {"converged", r.converged},
            {"objective", number(r.objective)}};
  if (r.interval) {
    j["interval"] = intervals_json(*r.interval);
    j["interval_level"] = r.interval_level;
  }
  return j;
}

json to_json(const BootstrapCI& ci) {
  return {{"method", to_string(ci.method)}, {"B", ci.B},           {"level", ci.level},
          {"failed", ci.failed},            {"intervals", intervals_json(ci.intervals)}};
}

json to_json(const ElicitationResult& r) {
  return {{"alpha", to_json(r.alpha)},
          {"path", to_string(r.path)},
          {"requested", to_json(r.requested)},
          {"achieved", to_json(r.achieved)},
          {"discrepancy",
           {{"m1", r.discrepancy[0]},
            {"m2", r.discrepancy[1]},
            {"v1", r.discrepancy[2]},
            {"v2", r.discrepancy[3]},
            {"rho", r.discrepancy[4]}}},
          {"notes", r.notes}};
}

json to_json(const GnReport& r) {
  return {{"g_n", number(r.g_n)}, {"sigma_hat", number(r.sigma_hat)}, {"z", number(r.z)}, {"p_value", number(r.p_value)}};
}

json to_json(const MReport& r) {
  json j = {{"m_stat", number(r.m_stat)},
            {"beta_hat", vec4_json(r.beta_hat)},
            {"bar_alpha", number(r.bar_alpha)},
            {"threshold", r.threshold},
            {"reject", r.reject}};
  if (r.bootstrap) {
    j["bootstrap"] = {{"B", r.bootstrap->B},
                      {"failed", r.bootstrap->failed},
                      {"q01", r.bootstrap->q01},
                      {"q05", r.bootstrap->q05},
                      {"q10", r.bootstrap->q10}};
  }
  return j;
}

json to_json(const PpcReport& r) {
  json arr = json::array();
  for (const auto& m : r.moments) {
    arr.push_back({{"moment", m.name},
                   {"q025", number(m.lower)},
                   {"q50", number(m.median)},
                   {"q975", number(m.upper)},
                   {"observed", number(m.observed)},
                   {"inside", m.inside}});
  }
  return arr;
}

json to_json(const SBCReport& r) {
  return {{"L", r.L},
          {"N", r.N},
          {"n", r.n},
          {"completed", r.ranks.size()},
          {"dropped", r.dropped},
          {"divergent_experiments", r.divergent_experiments},
          {"p_values", vec4_json(r.p_values)}};
}

json to_json(const MetricsTable& t) {
  json cells = json::array();
  for (const auto& c : t.cells) {
    cells.push_back({{"method", to_string(c.method)},
                     {"target", c.target},
                     {"truth", number(c.truth)},
                     {"bias", number(c.bias)},
                     {"mse", number(c.mse)},
                     {"mape", number(c.mape)},
                     {"coverage", number(c.coverage)},
                     {"reps", c.reps},
                     {"failed", c.failed}});
  }
  return {{"n", t.n}, {"reps", t.reps}, {"cells", cells}};
}

json to_json(const DistributionSummary& s) {
  json quantiles = json::array();
  for (const auto& [p, q] : s.quantiles) quantiles.push_back({{"p", p}, {"value", number(q)}});
  return {{"statistic", to_string(s.statistic)},
          {"reps", s.reps},
          {"failed", s.failed},
          {"quantiles", quantiles},
          {"fraction_outside_0_0.2", number(s.fraction_outside)},
          {"ks_distance_normal", number(s.ks_normal)}};
}

json to_json(const PriorSpec& p) {
  if (p.kind == PriorSpec::Kind::GammaIID) {
    return {{"kind", "gamma"}, {"shape", vec4_json(p.shape)}, {"rate", vec4_json(p.rate)}, {"lower", p.lower}};
  }
  return {{"kind", "uniform_exponential"}, {"cutoff", p.cutoff}, {"mass", p.mass}, {"rate", p.tail_rate()}};
}

json diagnostics_json(const PosteriorDraws& d) {
  return {{"rhat", vec4_json(d.rhat)},
          {"ess", vec4_json(d.ess)},
          {"divergences", d.divergence_count},
          {"accept_rate", number(d.accept_rate)},
          {"chains", d.chains},
          {"warmup", d.warmup},
          {"iters", d.iters},
          {"step_sizes", d.step_sizes}};
}

AlphaParams alpha_from_json(const json& j) {
  try {
    if (j.is_array()) return AlphaParams(vec4_from(j));
    return AlphaParams(j.at("alpha1").get<double>(), j.at("alpha2").get<double>(), j.at("alpha3").get<double>(),
                       j.at("alpha4").get<double>());
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("alpha: ") + e.what());
  }
}

MomentSummary moments_from_json(const json& j) {
  try {
    MomentSummary m;
    m.m1 = number_from(j.at("m1"));
    m.m2 = number_from(j.at("m2"));
    m.v1 = number_from(j.at("v1"));
    m.v2 = number_from(j.at("v2"));
    m.rho = number_from(j.at("rho"));
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("moments: ") + e.what());
  }
}

PriorSpec prior_from_json(const json& j) {
  try {
    const std::string kind = j.value("kind", "gamma");
    if (kind == "gamma") {
      auto coord = [&](const char* key) {
        if (!j.contains(key)) return Vec4{1.0, 1.0, 1.0, 1.0};
        const json& v = j.at(key);
        if (v.is_number()) {
          const double d = v.get<double>();
          return Vec4{d, d, d, d};
        }
        return vec4_from(v);
      };
      return PriorSpec::gamma(coord("shape"), coord("rate"), j.value("lower", 0.0));
    }
    if (kind == "uniform_exponential") return PriorSpec::uniform_exponential(j.at("cutoff").get<double>(), j.at("mass").get<double>());
    fail(ErrorKind::ParseError, "unknown prior kind '" + kind + "'");
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("prior: ") + e.what());
  }
}

HmcConfig hmc_from_json(const json& j, HmcConfig c) {
  try {
    c.chains = j.value("chains", c.chains);
    c.warmup = j.value("warmup", c.warmup);
    c.iters = j.value("iters", c.iters);
    c.target_accept = j.value("target_accept", c.target_accept);
    c.max_depth = j.value("max_depth", c.max_depth);
    return c;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("hmc: ") + e.what());
  }
}

ExperimentSpec experiment_from_json(const json& j) {
  try {
    ExperimentSpec spec;
    const json& g = j.at("generator");
    const std::string type = g.value("type", "bivariate_beta");
    if (type == "bivariate_beta") {
      spec.generator = alpha_from_json(g.at("alpha"));
    } else if (type == "logit_normal") {
      LogitNormalParams p;
      p.mu = {g.at("mu").at(0).get<double>(), g.at("mu").at(1).get<double>()};
      for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) p.sigma[r][c] = g.at("sigma").at(r).at(c).get<double>();
      }
      spec.generator = p;
    } else {
      fail(ErrorKind::ParseError, "unknown generator type '" + type + "'");
    }
    spec.n = j.value("n", spec.n);
    spec.reps = j.value("reps", spec.reps);
    if (j.contains("methods")) {
      spec.methods.clear();
      for (const auto& m : j.at("methods")) spec.methods.push_back(parse_method(m.get<std::string>()));
    }
    spec.bootstrap = j.value("bootstrap", spec.bootstrap);
    spec.level = j.value("level", spec.level);
    if (j.contains("prior")) spec.prior = prior_from_json(j.at("prior"));
    if (j.contains("hmc")) spec.hmc = hmc_from_json(j.at("hmc"));
    spec.seed = j.value("seed", spec.seed);
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("experiment config: ") + e.what());
  }
}

void write_posterior_csv(std::ostream& out, const PosteriorDraws& d) {
  out << "chain,iter,alpha1,alpha2,alpha3,alpha4\n";
  for (std::size_t c = 0; c < d.chains; ++c) {
    for (std::size_t i = 0; i < d.iters; ++i) {
      const Vec4& a = d.draws[c * d.iters + i];
      out << c << ',' << i;
      for (double v : a) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

void write_resamples_csv(std::ostream& out, const BootstrapCI& ci) {
  out << "alpha1,alpha2,alpha3,alpha4\n";
  for (const auto& row : ci.resample_estimates) {
    out << format_double(row[0]) << ',' << format_double(row[1]) << ',' << format_double(row[2]) << ','
        << format_double(row[3]) << '\n';
  }
}

void write_sbc_ranks_csv(std::ostream& out, const SBCReport& r) {
  out << "experiment,rank1,rank2,rank3,rank4\n";
  for (std::size_t e = 0; e < r.ranks.size(); ++e) {
    out << e;
    for (int v : r.ranks[e]) out << ',' << v;
    out << '\n';
  }
}

void write_sbc_histogram_csv(std::ostream& out, const SBCReport& r) {
  std::vector<std::array<std::size_t, 4>> counts(r.L + 1);
  for (const auto& row : r.ranks) {
    for (std::size_t k = 0; k < 4; ++k) ++counts[static_cast<std::size_t>(row[k])][k];
  }
  out << "rank,count1,count2,count3,count4\n";
  for (std::size_t b = 0; b <= r.L; ++b) {
    out << b << ',' << counts[b][0] << ',' << counts[b][1] << ',' << counts[b][2] << ',' << counts[b][3] << '\n';
  }
}

void write_metrics_csv(std::ostream& out, const MetricsTable& t) {
  out << "method,target,truth,bias,mse,mape,coverage,reps,failed\n";
  for (const auto& c : t.cells) {
    out << to_string(c.method) << ',' << c.target << ',' << format_double(c.truth) << ',' << format_double(c.bias)
        << ',' << format_double(c.mse) << ',' << format_double(c.mape) << ','
        << (std::isnan(c.coverage) ? std::string() : format_double(c.coverage)) << ',' << c.reps << ','
        << c.failed << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const stats::Histogram& h) {
  out << "lower,upper,count\n";
  const std::size_t bins = h.counts.size();
  const double width = bins ? (h.upper - h.lower) / static_cast<double>(bins) : 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    out << format_double(h.lower + width * static_cast<double>(b)) << ','
        << format_double(h.lower + width * static_cast<double>(b + 1)) << ',' << h.counts[b] << '\n';
  }
}

}  // namespace bibeta::io
