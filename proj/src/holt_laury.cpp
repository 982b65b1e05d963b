#include "tpp/holt_laury.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tpp::holt_laury {

namespace {

void require_question(int question) {
  if (question < 1 || question > 10) {
    throw std::out_of_range("question must be in 1..10, got " +
                            std::to_string(question));
  }
}

// Wealth rescale used inside expected-utility comparisons; keeps
// w^(1-r) well conditioned over r in [-10, 10].
constexpr double wealth_scale = 1.0 / 1000.0;

}  // namespace

LotteryPair lottery_pair(int question) {
  require_question(question);
  LotteryPair pair;
  pair.question = question;
  return pair;
}

long lottery_ev_gap(int question) {
  require_question(question);
  const LotteryPair pair = lottery_pair(question);
  const long q = question;
  const long numerator = q * pair.left_high + (10 - q) * pair.left_low -
                         q * pair.right_high - (10 - q) * pair.right_low;
  // All menu amounts are multiples of 10 apart, so the gap is whole KRW.
  return numerator / 10;
}

std::optional<ChoiceVector> parse_choices(std::string_view text) {
  if (text.size() != 10) return std::nullopt;
  ChoiceVector out;
  for (std::size_t i = 0; i < 10; ++i) {
    switch (text[i]) {
      case 'L':
      case 'l': out[i] = Choice::left; break;
      case 'R':
      case 'r': out[i] = Choice::right; break;
      default: return std::nullopt;
    }
  }
  return out;
}

ChoiceVector expected_value_choices() {
  ChoiceVector out;
  for (int q = 1; q <= 10; ++q) {
    out[q - 1] = lottery_ev_gap(q) > 0 ? Choice::left : Choice::right;
  }
  return out;
}

std::string_view to_string(RiskClass cls) {
  switch (cls) {
    case RiskClass::neutral: return "Neutral";
    case RiskClass::averse: return "Averse";
    case RiskClass::loving: return "Loving";
    case RiskClass::inconsistent: return "Inconsistent";
  }
  throw std::invalid_argument("unknown risk class");
}

RiskProfile classify_risk(const ChoiceVector& choices) {
  int first_right = 0;  // 1-based question index; 0 = never
  for (int q = 1; q <= 10; ++q) {
    if (choices[q - 1] == Choice::right) {
      first_right = q;
      break;
    }
  }
  if (first_right == 0) return {RiskClass::inconsistent, std::nullopt};
  for (int q = first_right + 1; q <= 10; ++q) {
    if (choices[q - 1] == Choice::left) {
      return {RiskClass::inconsistent, std::nullopt};
    }
  }
  RiskClass cls = RiskClass::neutral;
  if (first_right > 5) cls = RiskClass::averse;
  if (first_right < 5) cls = RiskClass::loving;
  return {cls, first_right};
}

double crra_utility(double wealth, double r) {
  if (wealth <= 0) throw std::domain_error("wealth must be positive");
  if (std::abs(1.0 - r) < 1e-9) return std::log(wealth);
  return (std::pow(wealth, 1.0 - r) - 1.0) / (1.0 - r);
}

double indifference_gap(int question, double r) {
  require_question(question);
  const LotteryPair pair = lottery_pair(question);
  const double p = pair.p_high();
  const double u_lh = crra_utility(pair.left_high * wealth_scale, r);
  const double u_ll = crra_utility(pair.left_low * wealth_scale, r);
  const double u_rh = crra_utility(pair.right_high * wealth_scale, r);
  const double u_rl = crra_utility(pair.right_low * wealth_scale, r);
  return p * u_lh + (1.0 - p) * u_ll - p * u_rh - (1.0 - p) * u_rl;
}

double indifference_root(int question) {
  require_question(question);
  double lo = -10.0, hi = 10.0;
  double f_lo = indifference_gap(question, lo);
  double f_hi = indifference_gap(question, hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw std::runtime_error("no indifference point in [-10, 10] at question " +
                             std::to_string(question));
  }
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = indifference_gap(question, mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CrraInterval crra_interval(int switch_point) {
  require_question(switch_point);
  CrraInterval interval;
  interval.lo = switch_point == 1
                    ? -std::numeric_limits<double>::infinity()
                    : indifference_root(switch_point - 1);
  // At the final question the riskier option dominates for every r, so no
  // finite upper bound exists.
  interval.hi = switch_point == 10
                    ? std::numeric_limits<double>::infinity()
                    : indifference_root(switch_point);
  return interval;
}

void write_menu_csv(std::ostream& out) {
  out << "question,p_high,left_high,left_low,right_high,right_low,ev_gap\n";
  for (int q = 1; q <= 10; ++q) {
    const LotteryPair pair = lottery_pair(q);
    out << q << ',' << q << "/10," << pair.left_high << ',' << pair.left_low
        << ',' << pair.right_high << ',' << pair.right_low << ','
        << lottery_ev_gap(q) << '\n';
  }
}

}  // namespace tpp::holt_laury
