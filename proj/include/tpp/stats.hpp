// Nonparametric two-sample machinery for the choice datasets: rank-sum
// test with midranks (exact enumeration or tie-corrected normal
// approximation), the 2x2 exact independence test, and treatment-level
// summaries.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpp/simulate.hpp"

namespace tpp::stats {

enum class PMethod { exact, normal_approx };
std::string_view to_string(PMethod method);

// Exact enumeration is the default at or below this combined sample size.
inline constexpr std::size_t exact_default_cutoff = 12;
// Hard cap for requested exact enumeration.
inline constexpr std::size_t exact_size_limit = 22;

struct RankSumResult {
  double u_statistic = 0;  // rank-sum of x minus its minimum n(n+1)/2
  double p_value = 1;      // two-sided: 2 * min(tail p), capped at 1
  PMethod method = PMethod::exact;
};

// Midrank-based two-sample rank-sum test.  Method defaults by combined
// sample size; `forced` overrides.  Exact p-values enumerate the
// permutation distribution (ties handled through midranks); the
// approximation uses the tie-corrected variance and a 0.5 continuity
// correction.
RankSumResult wilcoxon_rank_sum(std::span<const double> x,
                                std::span<const double> y,
                                std::optional<PMethod> forced = std::nullopt);

struct FisherResult {
  double p_value = 1;
};

// Two-sided exact test on the 2x2 table [[a, b], [c, d]]: sums the
// hypergeometric probabilities of all tables no more likely than the
// observed one (relative tie tolerance 1e-7).  Degenerate margins give
// p = 1; an all-zero table is rejected.
FisherResult fisher_exact_2x2(std::int64_t a, std::int64_t b, std::int64_t c,
                              std::int64_t d);

double normal_cdf(double z);

// ---------------------------------------------------------------------------
// Dataset summaries and canonical treatment comparisons
// ---------------------------------------------------------------------------

struct SummaryRow {
  TreatmentId treatment = TreatmentId::P;
  std::string measure;  // e.g. "mean_punishment"
  double average = 0;   // across agents
  double sd = 0;        // sample standard deviation; 0 when n < 2
  std::size_t n = 0;    // number of agents
};

std::vector<SummaryRow> summarize(const sim::ChoiceDataset& dataset);

struct ComparisonResult {
  std::string test;     // "wilcoxon_rank_sum" | "fisher_exact"
  std::string measure;  // "punishment" | "investment" | "safe" | incidence
  TreatmentId group_a = TreatmentId::P;
  TreatmentId group_b = TreatmentId::P;
  std::string level;  // "individual_mean", "individual_median", or "t=<k>"
  double statistic = 0;
  double p_value = 1;
  std::string method;
  std::optional<std::array<std::int64_t, 4>> table;  // for the 2x2 test
};

// Runs the standard battery for every canonical treatment pair present in
// the dataset: expenditure comparisons at the individual level and per
// transfer level, plus per-level incidence tables.
std::vector<ComparisonResult> compare_treatments(
    const sim::ChoiceDataset& dataset);

}  // namespace tpp::stats
