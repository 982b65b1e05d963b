// Range-normalized concave partworth choice model over the third party's
// three options (deduct, invest, keep), with logit choice probabilities,
// the separation condition behind the invest-share prediction, and
// verification reports for the two comparative-statics claims.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tpp/game.hpp"

namespace tpp::nccm {

enum class OptionKind { punish, invest, safe };
std::string_view to_string(OptionKind kind);

// Options the third party can spend tokens on in a treatment; the safe
// option (keeping tokens) is always present, in fixed order
// punish < invest < safe.
std::vector<OptionKind> available_options(TreatmentId id);

// Attribute levels per option: a material attribute (the third party's own
// final tokens) and a psychological attribute (norm-enforcement appeal).
struct Partworths {
  double material_punish = 0;
  double material_invest = 25;
  double material_safe = 50;
  double psych_punish = 50;
  double psych_invest = 25;
  double psych_safe = 0;

  double material(OptionKind kind) const;
  double psychological(OptionKind kind) const;

  // Enforces the strict orderings the model assumes: material
  // safe > invest > punish, psychological punish > invest > safe.
  void validate() const;
};

struct NccmParams {
  double concavity_material = 0.35;
  double concavity_psych = 0.35;
  double logit_scale = 0.05;

  // Concavities must lie in (0,1), at least 1e-9 from either end; the
  // logit scale must be positive.
  void validate() const;
};

struct OptionValue {
  OptionKind option;
  double value;
};

double value_of(std::span<const OptionValue> values, OptionKind kind);

// Deterministic utility of each available option: per attribute,
// range^(1-c) * (level - min)^c over the available set.  A flat attribute
// (zero range) contributes nothing.  The available set itself shapes the
// utilities; that is the point of the model.
std::vector<OptionValue> deterministic_utilities(TreatmentId id,
                                                 const Partworths& w,
                                                 const NccmParams& params);

// Per-context algebraic reductions of the same utilities (valid for
// strictly ordered partworths); cross-check for the generic evaluation.
std::vector<OptionValue> closed_form_utilities(TreatmentId id,
                                               const Partworths& w,
                                               const NccmParams& params);

// Logit choice probabilities over deterministic utilities, computed with
// the max-shift so large scales cannot overflow.
std::vector<OptionValue> choice_probabilities(std::span<const OptionValue> utilities,
                                              double logit_scale);

double choice_probability(TreatmentId id, OptionKind kind, const Partworths& w,
                          const NccmParams& params);

// Separation condition for the invest-share prediction, stated on the
// exponential scale.  With M_x^{set} the deterministic utility of option x
// in a context offering `set`:
//   lhs = exp(b * (M_invest^{pis} + M_safe^{is}))
//   rhs = exp(b * (M_invest^{is} + M_punish^{pis}))
//       + exp(b * (M_invest^{is} + M_safe^{pis}))
// where pis = {punish, invest, safe} and is = {invest, safe}.  The
// invest-share prediction is asserted only where lhs > rhs.
struct SeparationResult {
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
};

SeparationResult separation_check(const Partworths& w, const NccmParams& params);

// Root of lhs(c) - rhs(c) over a shared concavity c for both attributes,
// by bisection to `tol`.  Returns nullopt when the gap does not change
// sign on (0,1).
std::optional<double> separation_crossing(const Partworths& w,
                                          double logit_scale, double tol);

// ---------------------------------------------------------------------------
// Transfer-indexed partworth schedule
// ---------------------------------------------------------------------------

// Material partworths stay fixed across transfers; psychological
// partworths sit at `psych_base` plus an option gap that shrinks linearly
// in the transfer and vanishes at the equal split (t = 50).
struct ScheduleConfig {
  double material_punish = 0;
  double material_invest = 25;
  double material_safe = 50;
  double psych_gap_punish = 50;  // punish-over-safe gap at t = 0
  double psych_gap_invest = 25;  // invest-over-safe gap at t = 0
  double psych_base = 0;
  // Whether the degenerate t = 50 point (all gaps zero) is addressable.
  bool include_fair_transfer = false;
};

class PartworthSchedule {
 public:
  explicit PartworthSchedule(ScheduleConfig cfg);

  const ScheduleConfig& config() const { return cfg_; }
  static double shrink(int t) { return 1.0 - t / 50.0; }
  bool covers(int t) const;
  // True for the linearly extended t = 50 point, which violates the strict
  // psychological ordering and is only evaluable through the flat-attribute
  // convention.
  static bool extrapolated(int t) { return t == 50; }
  Partworths at(int t) const;

 private:
  ScheduleConfig cfg_;
};

// ---------------------------------------------------------------------------
// Claim verification
// ---------------------------------------------------------------------------

struct TableRow {
  int t = 0;
  Partworths w;
};

// Claim: adding the invest option strictly lowers the probability of
// deducting, at every transfer level.
struct PunishmentDropRow {
  int t = 0;
  double pr_punish_with_invest = 0;  // three-option context
  double pr_punish_without = 0;      // two-option context
  bool pass = false;
};

struct PunishmentDropReport {
  std::vector<PunishmentDropRow> rows;
  // Punish and safe utilities must coincide across the two contexts; the
  // proof rests on it.
  bool contexts_match = false;
  bool all_pass = false;
};

PunishmentDropReport verify_punishment_drop(std::span<const TableRow> tables,
                                            const NccmParams& params);
PunishmentDropReport verify_punishment_drop(const PartworthSchedule& schedule,
                                            const NccmParams& params,
                                            std::span<const int> ts);

// Claim: where the separation condition holds, the invest share is higher
// with the punish option present than in the two-option invest/safe
// context.  Rows where the condition fails are recorded, not asserted.
struct InvestShareRow {
  int t = 0;
  SeparationResult separation;
  double pr_invest_with_punish = 0;  // three-option context
  double pr_invest_without = 0;      // two-option context
  bool pass = false;                 // meaningful when separation.holds
};

struct InvestShareReport {
  std::vector<InvestShareRow> rows;
  bool all_asserted_pass = false;
};

InvestShareReport verify_invest_share(std::span<const TableRow> tables,
                                      const NccmParams& params);
InvestShareReport verify_invest_share(const PartworthSchedule& schedule,
                                      const NccmParams& params,
                                      std::span<const int> ts);

}  // namespace tpp::nccm
