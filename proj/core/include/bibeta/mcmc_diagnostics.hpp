#pragma once

#include <vector>

namespace bibeta::mcmc {

/// Draws of one scalar quantity, one inner vector per chain (equal lengths).
using ChainDraws = std::vector<std::vector<double>>;

/// Rank-normalized split R-hat: each chain is halved and the draws are
/// replaced by normal scores of their pooled ranks before the usual
/// between/within variance comparison.
double split_rhat(const ChainDraws& chains);

/// Bulk effective sample size: Geyer's initial monotone sequence estimator
/// on rank-normalized split chains, capped at the total draw count.
double bulk_ess(const ChainDraws& chains);

}  // namespace bibeta::mcmc
