// Stage game for the three-player transfer experiment: treatment variants,
// third-party action validation, and exact payoff arithmetic.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace tpp {

using Rational = boost::rational<std::int64_t>;

// ---------------------------------------------------------------------------
// Treatments
// ---------------------------------------------------------------------------

enum class TreatmentId { P, PI0, I0, PIneg, Ineg };

inline constexpr std::array<TreatmentId, 5> all_treatments{
    TreatmentId::P, TreatmentId::PI0, TreatmentId::I0, TreatmentId::PIneg,
    TreatmentId::Ineg};

struct Treatment {
  TreatmentId id;
  bool punishment_available = false;
  bool investment_available = false;
  // Gross return per invested token on a win; set iff investment_available.
  std::optional<Rational> return_multiplier;
  // Identical in every variant, kept on the record so payoff code never
  // hardcodes it.
  Rational win_probability{1, 2};
};

const Treatment& treatment(TreatmentId id);
std::string_view to_string(TreatmentId id);
// Accepts canonical names ("PI0") and the ampersand spelling ("P&I0").
std::optional<TreatmentId> parse_treatment(std::string_view text);

// ---------------------------------------------------------------------------
// Endowments and the third party's action space
// ---------------------------------------------------------------------------

inline constexpr int endowment_a = 100;
inline constexpr int endowment_b = 0;
inline constexpr int endowment_c = 50;
// Discretionary tokens the third party may spend on deduction/investment.
inline constexpr int token_budget = 50;
// Tokens removed from player A per deduction point spent.
inline constexpr int deduction_leverage = 3;

inline constexpr std::array<int, 6> transfer_levels{0, 10, 20, 30, 40, 50};
bool is_transfer_level(int t);

struct ThirdPartyAction {
  int deduction = 0;
  int investment = 0;
};

enum class ActionViolation {
  none,
  negative_amount,
  budget_exceeded,
  punishment_unavailable,
  investment_unavailable,
};

struct ActionCheck {
  bool valid = true;
  ActionViolation violation = ActionViolation::none;
  std::string detail;
};

ActionCheck validate_action(const Treatment& tr, const ThirdPartyAction& act);

// ---------------------------------------------------------------------------
// Payoffs
// ---------------------------------------------------------------------------

enum class LotteryOutcome { win, lose, not_applicable };

struct PayoffVector {
  Rational a, b, c;
  bool operator==(const PayoffVector&) const = default;
};

// Payoffs after the investment lottery resolves.  `outcome` must be
// win/lose exactly when tokens were invested and not_applicable otherwise.
// Throws std::invalid_argument on an invalid action, transfer, or outcome.
PayoffVector realized_payoffs(const Treatment& tr, int transfer,
                              const ThirdPartyAction& act,
                              LotteryOutcome outcome);

// Expected payoffs before the lottery resolves, exact in the win
// probability and return multiplier.
PayoffVector ex_ante_expected_payoffs(const Treatment& tr, int transfer,
                                      const ThirdPartyAction& act);

// ---------------------------------------------------------------------------
// Cash conversion
// ---------------------------------------------------------------------------

inline constexpr long krw_per_token = 80;
inline constexpr long showup_fee_krw = 3000;

// Total cash from the lottery-task earnings (already in KRW) plus the game
// token balance, optionally adding the participation fee.
long final_cash_krw(long task1_krw, long task2_tokens, bool include_showup);

}  // namespace tpp
