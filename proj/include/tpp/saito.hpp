// Inequity-averse evaluation of the third party's options, blending
// ex-ante (expected-allocation) and ex-post (realized-allocation) fairness
// with weight delta, in the spirit of Saito's expected inequality-averse
// preferences over Fehr-Schmidt utilities.  Closed-form piecewise
// partworths per option plus a brute-force oracle that rebuilds them from
// the game's allocations.
#pragma once

#include <span>
#include <vector>

#include "tpp/game.hpp"
#include "tpp/nccm.hpp"

namespace tpp::saito {

struct FsParams {
  double alpha = 0.8;  // weight on disadvantageous inequity
  double beta = 0.4;   // weight on advantageous inequity
  double delta = 0.5;  // ex-ante fairness weight

  // Requires alpha > beta > 0, alpha + beta > 1, delta in [0, 1].
  void validate() const;
};

struct Allocation {
  double a = 0, b = 0, c = 0;
};

struct WeightedOutcome {
  Rational probability;
  Allocation alloc;
};

// Fehr-Schmidt utility from the third party's seat, with unnormalized
// inequity sums over the two co-players.
double fs_utility(const Allocation& alloc, const FsParams& params);

// delta-weighted blend of the ex-ante allocation's utility and the
// expected ex-post utility.  Outcome probabilities must be positive and
// sum to exactly 1.
double saito_value(const Allocation& ex_ante,
                   std::span<const WeightedOutcome> outcomes,
                   const FsParams& params);

// ---------------------------------------------------------------------------
// Closed-form option partworths
//
// Transfers are menu levels; deduction p and investment z are real-valued
// here so branch edges can be probed continuously.
// ---------------------------------------------------------------------------

// Keeping all tokens: degenerate allocation, delta-independent.
double partworth_safe(int t, const FsParams& params);

// Investing z at the doubling return.  Two branches split at z = 50 - t;
// the first coincides with partworth_safe.
double partworth_invest_zero(int t, double z, const FsParams& params);

// Investing z at the 1.5x return.  Four branches split at z = 50 - t,
// 2(50 - t), 4(50 - t); the first is delta-independent.
double partworth_invest_neg(int t, double z, const FsParams& params);

// Deducting p, in the piecewise closed form this module audits.  Its
// second and third branches disagree with a direct Fehr-Schmidt
// evaluation of the same allocation (see partworth_punish_derived); both
// are kept and the residuals are reported rather than patched away.
double partworth_punish_printed(int t, double p, const FsParams& params);

// Deducting p, derived directly from the allocation (agrees with the
// oracle everywhere).
double partworth_punish_derived(int t, double p, const FsParams& params);

int invest_zero_branch(int t, double z);  // 1..2
int invest_neg_branch(int t, double z);   // 1..4
int punish_branch(int t, double p);       // 1..3

// Ground truth: assembles the ex-ante allocation and outcome distribution
// for spending on one option (punish -> (p, 0), invest -> (0, z),
// safe -> (0, 0)) under the treatment's lottery terms, then evaluates
// saito_value.  Throws on actions invalid for the option/treatment.
double partworth_oracle(nccm::OptionKind option, TreatmentId id, int t,
                        double p, double z, const FsParams& params);

// Printed-minus-derived gap on each punish branch: 0, p, 2p(alpha+2beta).
double punish_residual_form(int branch, double p, const FsParams& params);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct RankingRow {
  int t = 0;
  double p = 0, z = 0;
  double w_punish_printed = 0;
  double w_punish_oracle = 0;
  double w_safe = 0;
  double w_invest = 0;
  int invest_branch = 0;
};

struct PunishResidualRow {
  int t = 0;
  double p = 0;
  int branch = 0;
  double printed = 0;
  double oracle = 0;
  double residual = 0;  // printed - oracle
};

struct RankingReport {
  double alpha = 0, beta = 0, delta = 0;
  std::vector<RankingRow> zero_return;
  std::vector<RankingRow> neg_return;
  // Safe never ranks below invest: equality on the zero-return first
  // branch (or delta = 1), strict everywhere under the 1.5x return.
  bool zero_return_ok = false;
  bool neg_return_ok = false;
  // Grid points where the printed punish partworth departs from the
  // oracle (its second and third branches).
  std::vector<PunishResidualRow> punish_residuals;
};

RankingReport ranking_report(const FsParams& params, std::span<const int> ts,
                             std::span<const double> ps,
                             std::span<const double> zs);

void write_ranking_csv(std::ostream& out, const RankingReport& report,
                       bool neg_return);
void write_residual_csv(std::ostream& out, const RankingReport& report);

}  // namespace tpp::saito
