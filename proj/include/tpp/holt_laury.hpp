// Ten-pair lottery menu for risk attitude elicitation: menu constants,
// switch-point classification, and CRRA coefficient intervals.
#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string_view>

namespace tpp::holt_laury {

// One menu row: the safer option pays left_high with probability q/10 and
// left_low otherwise; the riskier option pays right_high / right_low with
// the same probabilities.  Amounts in KRW.
struct LotteryPair {
  int question = 1;  // 1..10
  long left_high = 3750;
  long left_low = 3550;
  long right_high = 8000;
  long right_low = 100;
  double p_high() const { return question / 10.0; }
};

LotteryPair lottery_pair(int question);

// E(left) - E(right) in KRW; exact integer arithmetic.
long lottery_ev_gap(int question);

enum class Choice : char { left = 'L', right = 'R' };

using ChoiceVector = std::array<Choice, 10>;

// Parses a string like "LLLLRRRRRR"; rejects other lengths or characters.
std::optional<ChoiceVector> parse_choices(std::string_view text);

// The sequence a risk-neutral expected-value maximizer submits.
ChoiceVector expected_value_choices();

enum class RiskClass { neutral, averse, loving, inconsistent };
std::string_view to_string(RiskClass cls);

struct RiskProfile {
  RiskClass cls = RiskClass::inconsistent;
  // First question at which the subject picks the riskier option; absent
  // for inconsistent sequences.
  std::optional<int> switch_point;
};

// A sequence is inconsistent when it ever reverts from the riskier option
// back to the safer one, or when the final choice is still the safer one.
RiskProfile classify_risk(const ChoiceVector& choices);

// CRRA utility (w^(1-r) - 1)/(1-r), with the logarithmic branch at r = 1.
// The -1 shift keeps the family continuous in r and never affects
// comparisons between lotteries.
double crra_utility(double wealth, double r);

// Expected-utility gap EU(left) - EU(right) at the given menu row.  Wealth
// is rescaled internally; a positive rescale never moves the sign or the
// roots in r.
double indifference_gap(int question, double r);

// The r solving indifference_gap(question, r) = 0, by bisection on
// [-10, 10] to 1e-6.  Throws if the gap does not change sign there.
double indifference_root(int question);

struct CrraInterval {
  double lo = 0;  // -infinity at switch point 1
  double hi = 0;  // +infinity at switch point 10
};

// CRRA coefficient interval consistent with switching to the riskier
// option first at `switch_point` (1..10).
CrraInterval crra_interval(int switch_point);

// Audit CSV of the menu: question, p_high, payoffs, ev_gap.
void write_menu_csv(std::ostream& out);

}  // namespace tpp::holt_laury
