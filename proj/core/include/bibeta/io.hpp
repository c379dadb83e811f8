#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "bibeta/bayes.hpp"
#include "bibeta/diagnostics.hpp"
#include "bibeta/elicitation.hpp"
#include "bibeta/estimators.hpp"
#include "bibeta/experiments.hpp"
#include "bibeta/types.hpp"

namespace bibeta::io {

using nlohmann::json;

/// Shortest round-trip text for a double ("%.17g").
std::string format_double(double v);

/// Two numeric columns; an optional "x,y" header and blank lines are
/// skipped. Throws ParseError naming the 1-based line of the first bad row.
PairedSample read_csv(std::istream& in);
PairedSample read_csv_file(const std::filesystem::path& path);
void write_csv(std::ostream& out, const PairedSample& sample);

json to_json(const AlphaParams& alpha);
json to_json(const MomentSummary& moments);
json to_json(const EstimateReport& report);
json to_json(const BootstrapCI& ci);
json to_json(const ElicitationResult& result);
json to_json(const GnReport& report);
json to_json(const MReport& report);
json to_json(const PpcReport& report);
json to_json(const SBCReport& report);
json to_json(const MetricsTable& table);
json to_json(const DistributionSummary& summary);
json to_json(const PriorSpec& prior);
/// rhat, ess, divergences, accept_rate and run sizes of a posterior fit.
json diagnostics_json(const PosteriorDraws& draws);

AlphaParams alpha_from_json(const json& j);
MomentSummary moments_from_json(const json& j);
PriorSpec prior_from_json(const json& j);
HmcConfig hmc_from_json(const json& j, HmcConfig defaults = {});
/// Generator, n, reps, methods, bootstrap, level, prior, hmc, seed.
ExperimentSpec experiment_from_json(const json& j);

/// "chain,iter,alpha1,alpha2,alpha3,alpha4"
void write_posterior_csv(std::ostream& out, const PosteriorDraws& draws);
/// "alpha1,alpha2,alpha3,alpha4", one row per successful resample.
void write_resamples_csv(std::ostream& out, const BootstrapCI& ci);
/// "experiment,rank1,rank2,rank3,rank4"
void write_sbc_ranks_csv(std::ostream& out, const SBCReport& report);
/// "rank,count1,count2,count3,count4" over 0..L.
void write_sbc_histogram_csv(std::ostream& out, const SBCReport& report);
/// "method,target,truth,bias,mse,mape,coverage,reps,failed"
void write_metrics_csv(std::ostream& out, const MetricsTable& table);
/// "lower,upper,count"
void write_histogram_csv(std::ostream& out, const stats::Histogram& histogram);

}  // namespace bibeta::io
