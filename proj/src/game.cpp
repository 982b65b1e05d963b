#include "tpp/game.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace tpp {

namespace {

const std::array<Treatment, 5> treatment_table{{
    {TreatmentId::P, true, false, std::nullopt, {1, 2}},
    {TreatmentId::PI0, true, true, Rational{2}, {1, 2}},
    {TreatmentId::I0, false, true, Rational{2}, {1, 2}},
    {TreatmentId::PIneg, true, true, Rational{3, 2}, {1, 2}},
    {TreatmentId::Ineg, false, true, Rational{3, 2}, {1, 2}},
}};

void require_valid(const Treatment& tr, int transfer,
                   const ThirdPartyAction& act) {
  if (!is_transfer_level(transfer)) {
    std::ostringstream msg;
    msg << "transfer must be one of {0,10,20,30,40,50}, got " << transfer;
    throw std::invalid_argument(msg.str());
  }
  ActionCheck check = validate_action(tr, act);
  if (!check.valid) throw std::invalid_argument(check.detail);
}

}  // namespace

const Treatment& treatment(TreatmentId id) {
  return treatment_table[static_cast<std::size_t>(id)];
}

std::string_view to_string(TreatmentId id) {
  switch (id) {
    case TreatmentId::P: return "P";
    case TreatmentId::PI0: return "PI0";
    case TreatmentId::I0: return "I0";
    case TreatmentId::PIneg: return "PIneg";
    case TreatmentId::Ineg: return "Ineg";
  }
  throw std::invalid_argument("unknown treatment id");
}

std::optional<TreatmentId> parse_treatment(std::string_view text) {
  if (text == "P") return TreatmentId::P;
  if (text == "PI0" || text == "P&I0") return TreatmentId::PI0;
  if (text == "I0") return TreatmentId::I0;
  if (text == "PIneg" || text == "P&Ineg") return TreatmentId::PIneg;
  if (text == "Ineg") return TreatmentId::Ineg;
  return std::nullopt;
}

bool is_transfer_level(int t) {
  return std::find(transfer_levels.begin(), transfer_levels.end(), t) !=
         transfer_levels.end();
}

ActionCheck validate_action(const Treatment& tr, const ThirdPartyAction& act) {
  auto fail = [](ActionViolation v, std::string detail) {
    return ActionCheck{false, v, std::move(detail)};
  };
  if (act.deduction < 0 || act.investment < 0) {
    std::ostringstream msg;
    msg << "token amounts must be non-negative, got deduction="
        << act.deduction << " investment=" << act.investment;
    return fail(ActionViolation::negative_amount, msg.str());
  }
  if (act.deduction > 0 && !tr.punishment_available) {
    std::ostringstream msg;
    msg << "deduction is not available in treatment " << to_string(tr.id);
    return fail(ActionViolation::punishment_unavailable, msg.str());
  }
  if (act.investment > 0 && !tr.investment_available) {
    std::ostringstream msg;
    msg << "investment is not available in treatment " << to_string(tr.id);
    return fail(ActionViolation::investment_unavailable, msg.str());
  }
  if (act.deduction + act.investment > token_budget) {
    std::ostringstream msg;
    msg << "token budget exceeded: " << act.deduction << " + "
        << act.investment << " > " << token_budget;
    return fail(ActionViolation::budget_exceeded, msg.str());
  }
  return {};
}

PayoffVector realized_payoffs(const Treatment& tr, int transfer,
                              const ThirdPartyAction& act,
                              LotteryOutcome outcome) {
  require_valid(tr, transfer, act);
  const bool invested = act.investment > 0;
  if (invested && outcome == LotteryOutcome::not_applicable) {
    throw std::invalid_argument(
        "a win/lose outcome is required when tokens are invested");
  }
  if (!invested && outcome != LotteryOutcome::not_applicable) {
    throw std::invalid_argument(
        "outcome must be not_applicable when no tokens are invested");
  }
  Rational gain{0};
  if (outcome == LotteryOutcome::win) {
    gain = *tr.return_multiplier * act.investment;
  }
  return {Rational{endowment_a - transfer - deduction_leverage * act.deduction},
          Rational{transfer},
          Rational{endowment_c - act.deduction - act.investment} + gain};
}

PayoffVector ex_ante_expected_payoffs(const Treatment& tr, int transfer,
                                      const ThirdPartyAction& act) {
  require_valid(tr, transfer, act);
  Rational expected_gain{0};
  if (act.investment > 0) {
    expected_gain = tr.win_probability * *tr.return_multiplier * act.investment;
  }
  return {Rational{endowment_a - transfer - deduction_leverage * act.deduction},
          Rational{transfer},
          Rational{endowment_c - act.deduction - act.investment} +
              expected_gain};
}

long final_cash_krw(long task1_krw, long task2_tokens, bool include_showup) {
  if (task2_tokens < 0) {
    throw std::domain_error("final token balance must be non-negative");
  }
  long total = task1_krw + task2_tokens * krw_per_token;
  if (include_showup) total += showup_fee_krw;
  return total;
}

}  // namespace tpp
