#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "bibeta/types.hpp"

namespace bibeta {

enum class ElicitationPath { ExactFourMoment, ThreeMomentMM2, MM3Fallback, MM4Fallback };
enum class Preference { MeansFirst, Balanced };

std::string_view to_string(ElicitationPath path) noexcept;
std::string_view to_string(Preference preference) noexcept;
/// Accepts "means-first"/"meansfirst" and "balanced" in any case.
Preference parse_preference(std::string_view name);

struct ElicitationResult {
  AlphaParams alpha{1.0, 1.0, 1.0, 1.0};
  ElicitationPath path = ElicitationPath::ExactFourMoment;
  MomentSummary requested;
  MomentSummary achieved;
  /// |requested - achieved| for (m1, m2, v1, v2, rho).
  std::array<double, 5> discrepancy{};
  std::vector<std::string> notes;
};

/// Prior parameter from expert summaries. Tries, in order: the exact
/// four-moment solution, the averaged three-moment solution, then MM3
/// (MeansFirst) or MM4 (Balanced). Fallback coordinates that come out as 0
/// are replaced by 1e-10 and listed in `notes`.
ElicitationResult elicit(const MomentSummary& requested, Preference preference = Preference::MeansFirst);

/// Variance of the beta marginal with mean `mean` whose `probability`
/// quantile equals `quantile`, found by bisection on the concentration.
double variance_from_quantile(double mean, double quantile, double probability);

}  // namespace bibeta
