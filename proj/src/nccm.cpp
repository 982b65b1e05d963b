#include "tpp/nccm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tpp::nccm {

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace

std::string_view to_string(OptionKind kind) {
  switch (kind) {
    case OptionKind::punish: return "punish";
    case OptionKind::invest: return "invest";
    case OptionKind::safe: return "safe";
  }
  throw std::invalid_argument("unknown option kind");
}

std::vector<OptionKind> available_options(TreatmentId id) {
  const Treatment& tr = treatment(id);
  std::vector<OptionKind> out;
  if (tr.punishment_available) out.push_back(OptionKind::punish);
  if (tr.investment_available) out.push_back(OptionKind::invest);
  out.push_back(OptionKind::safe);
  return out;
}

double Partworths::material(OptionKind kind) const {
  switch (kind) {
    case OptionKind::punish: return material_punish;
    case OptionKind::invest: return material_invest;
    case OptionKind::safe: return material_safe;
  }
  throw std::invalid_argument("unknown option kind");
}

double Partworths::psychological(OptionKind kind) const {
  switch (kind) {
    case OptionKind::punish: return psych_punish;
    case OptionKind::invest: return psych_invest;
    case OptionKind::safe: return psych_safe;
  }
  throw std::invalid_argument("unknown option kind");
}

void Partworths::validate() const {
  for (double v : {material_punish, material_invest, material_safe,
                   psych_punish, psych_invest, psych_safe}) {
    check_finite(v, "partworth");
  }
  if (!(material_safe > material_invest && material_invest > material_punish)) {
    throw std::invalid_argument(
        "material partworths must satisfy safe > invest > punish");
  }
  if (!(psych_punish > psych_invest && psych_invest > psych_safe)) {
    throw std::invalid_argument(
        "psychological partworths must satisfy punish > invest > safe");
  }
}

void NccmParams::validate() const {
  constexpr double margin = 1e-9;
  for (double c : {concavity_material, concavity_psych}) {
    check_finite(c, "concavity");
    if (c < margin || c > 1.0 - margin) {
      throw std::invalid_argument(
          "concavity must lie strictly inside (0,1), at least 1e-9 from "
          "either end");
    }
  }
  check_finite(logit_scale, "logit scale");
  if (logit_scale <= 0) {
    throw std::invalid_argument("logit scale must be positive");
  }
}

double value_of(std::span<const OptionValue> values, OptionKind kind) {
  for (const OptionValue& v : values) {
    if (v.option == kind) return v.value;
  }
  throw std::invalid_argument("option not present in value list");
}

std::vector<OptionValue> deterministic_utilities(TreatmentId id,
                                                 const Partworths& w,
                                                 const NccmParams& params) {
  params.validate();
  const std::vector<OptionKind> options = available_options(id);
  std::vector<OptionValue> out;
  out.reserve(options.size());
  for (OptionKind o : options) out.push_back({o, 0.0});

  auto add_attribute = [&](auto level, double concavity) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (OptionKind o : options) {
      const double v = level(o);
      check_finite(v, "partworth");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double range = hi - lo;
    if (range <= 0.0) return;  // flat attribute: no contribution
    for (OptionValue& ov : out) {
      ov.value += std::pow(range, 1.0 - concavity) *
                  std::pow(level(ov.option) - lo, concavity);
    }
  };

  add_attribute([&](OptionKind o) { return w.material(o); },
                params.concavity_material);
  add_attribute([&](OptionKind o) { return w.psychological(o); },
                params.concavity_psych);
  return out;
}

std::vector<OptionValue> closed_form_utilities(TreatmentId id,
                                               const Partworths& w,
                                               const NccmParams& params) {
  params.validate();
  w.validate();
  const double cm = params.concavity_material;
  const double cp = params.concavity_psych;
  const Treatment& tr = treatment(id);
  const double mat_range_ps = w.material_safe - w.material_punish;
  const double psych_range_ps = w.psych_punish - w.psych_safe;

  if (tr.punishment_available && tr.investment_available) {
    const double m_invest =
        std::pow(mat_range_ps, 1.0 - cm) *
            std::pow(w.material_invest - w.material_punish, cm) +
        std::pow(psych_range_ps, 1.0 - cp) *
            std::pow(w.psych_invest - w.psych_safe, cp);
    return {{OptionKind::punish, psych_range_ps},
            {OptionKind::invest, m_invest},
            {OptionKind::safe, mat_range_ps}};
  }
  if (tr.punishment_available) {
    return {{OptionKind::punish, psych_range_ps},
            {OptionKind::safe, mat_range_ps}};
  }
  // invest/safe context: invest holds the psychological top, safe the
  // material top, and each sits at the other attribute's minimum.
  return {{OptionKind::invest, w.psych_invest - w.psych_safe},
          {OptionKind::safe, w.material_safe - w.material_invest}};
}

std::vector<OptionValue> choice_probabilities(
    std::span<const OptionValue> utilities, double logit_scale) {
  if (utilities.empty()) {
    throw std::invalid_argument("cannot compute probabilities of no options");
  }
  check_finite(logit_scale, "logit scale");
  if (logit_scale <= 0) {
    throw std::invalid_argument("logit scale must be positive");
  }
  double max_value = -std::numeric_limits<double>::infinity();
  for (const OptionValue& u : utilities) {
    check_finite(u.value, "utility");
    max_value = std::max(max_value, u.value);
  }
  std::vector<OptionValue> out(utilities.begin(), utilities.end());
  double total = 0;
  for (OptionValue& ov : out) {
    ov.value = std::exp(logit_scale * (ov.value - max_value));
    total += ov.value;
  }
  for (OptionValue& ov : out) ov.value /= total;
  return out;
}

double choice_probability(TreatmentId id, OptionKind kind, const Partworths& w,
                          const NccmParams& params) {
  const auto utilities = deterministic_utilities(id, w, params);
  return value_of(choice_probabilities(utilities, params.logit_scale), kind);
}

SeparationResult separation_check(const Partworths& w,
                                  const NccmParams& params) {
  const auto three = deterministic_utilities(TreatmentId::PI0, w, params);
  const auto two = deterministic_utilities(TreatmentId::I0, w, params);
  const double b = params.logit_scale;
  const double invest3 = value_of(three, OptionKind::invest);
  const double punish3 = value_of(three, OptionKind::punish);
  const double safe3 = value_of(three, OptionKind::safe);
  const double invest2 = value_of(two, OptionKind::invest);
  const double safe2 = value_of(two, OptionKind::safe);

  SeparationResult result;
  result.lhs = std::exp(b * (invest3 + safe2));
  result.rhs = std::exp(b * (invest2 + punish3)) + std::exp(b * (invest2 + safe3));
  result.holds = result.lhs > result.rhs;
  return result;
}

std::optional<double> separation_crossing(const Partworths& w,
                                          double logit_scale, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  auto gap = [&](double c) {
    NccmParams params{c, c, logit_scale};
    const SeparationResult r = separation_check(w, params);
    return r.lhs - r.rhs;
  };
  double lo = 1e-8, hi = 1.0 - 1e-8;
  double g_lo = gap(lo);
  double g_hi = gap(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo > 0.0) == (g_hi > 0.0)) return std::nullopt;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = gap(mid);
    if (g_mid == 0.0) return mid;
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

PartworthSchedule::PartworthSchedule(ScheduleConfig cfg) : cfg_(cfg) {
  for (double v : {cfg.material_punish, cfg.material_invest, cfg.material_safe,
                   cfg.psych_gap_punish, cfg.psych_gap_invest, cfg.psych_base}) {
    check_finite(v, "schedule value");
  }
  if (!(cfg.material_safe > cfg.material_invest &&
        cfg.material_invest > cfg.material_punish)) {
    throw std::invalid_argument(
        "material partworths must satisfy safe > invest > punish");
  }
  if (!(cfg.psych_gap_punish > cfg.psych_gap_invest &&
        cfg.psych_gap_invest > 0)) {
    throw std::invalid_argument(
        "psychological gaps must satisfy punish > invest > 0");
  }
}

bool PartworthSchedule::covers(int t) const {
  if (!is_transfer_level(t)) return false;
  return t < 50 || cfg_.include_fair_transfer;
}

Partworths PartworthSchedule::at(int t) const {
  if (!covers(t)) {
    std::ostringstream msg;
    msg << "schedule does not cover transfer " << t;
    if (t == 50) msg << " (fair-transfer extension disabled)";
    throw std::out_of_range(msg.str());
  }
  const double s = shrink(t);
  Partworths w;
  w.material_punish = cfg_.material_punish;
  w.material_invest = cfg_.material_invest;
  w.material_safe = cfg_.material_safe;
  w.psych_punish = cfg_.psych_base + cfg_.psych_gap_punish * s;
  w.psych_invest = cfg_.psych_base + cfg_.psych_gap_invest * s;
  w.psych_safe = cfg_.psych_base;
  return w;
}

// ---------------------------------------------------------------------------
// Claim verification
// ---------------------------------------------------------------------------

namespace {

std::vector<TableRow> schedule_rows(const PartworthSchedule& schedule,
                                    std::span<const int> ts) {
  std::vector<TableRow> rows;
  rows.reserve(ts.size());
  for (int t : ts) rows.push_back({t, schedule.at(t)});
  return rows;
}

}  // namespace

PunishmentDropReport verify_punishment_drop(std::span<const TableRow> tables,
                                            const NccmParams& params) {
  PunishmentDropReport report;
  report.contexts_match = true;
  report.all_pass = true;
  for (const TableRow& row : tables) {
    const auto three = deterministic_utilities(TreatmentId::PI0, row.w, params);
    const auto two = deterministic_utilities(TreatmentId::P, row.w, params);
    // The invest option sits strictly inside both attribute ranges, so its
    // presence must leave the punish/safe utilities untouched.
    if (std::abs(value_of(three, OptionKind::punish) -
                 value_of(two, OptionKind::punish)) > 1e-12 ||
        std::abs(value_of(three, OptionKind::safe) -
                 value_of(two, OptionKind::safe)) > 1e-12) {
      report.contexts_match = false;
    }
    PunishmentDropRow out;
    out.t = row.t;
    out.pr_punish_with_invest =
        value_of(choice_probabilities(three, params.logit_scale),
                 OptionKind::punish);
    out.pr_punish_without = value_of(
        choice_probabilities(two, params.logit_scale), OptionKind::punish);
    out.pass = out.pr_punish_with_invest < out.pr_punish_without;
    report.all_pass = report.all_pass && out.pass;
    report.rows.push_back(out);
  }
  return report;
}

PunishmentDropReport verify_punishment_drop(const PartworthSchedule& schedule,
                                            const NccmParams& params,
                                            std::span<const int> ts) {
  return verify_punishment_drop(schedule_rows(schedule, ts), params);
}

InvestShareReport verify_invest_share(std::span<const TableRow> tables,
                                      const NccmParams& params) {
  InvestShareReport report;
  report.all_asserted_pass = true;
  for (const TableRow& row : tables) {
    InvestShareRow out;
    out.t = row.t;
    out.separation = separation_check(row.w, params);
    out.pr_invest_with_punish =
        choice_probability(TreatmentId::PI0, OptionKind::invest, row.w, params);
    out.pr_invest_without =
        choice_probability(TreatmentId::I0, OptionKind::invest, row.w, params);
    out.pass = out.pr_invest_with_punish > out.pr_invest_without;
    if (out.separation.holds && !out.pass) report.all_asserted_pass = false;
    report.rows.push_back(out);
  }
  return report;
}

InvestShareReport verify_invest_share(const PartworthSchedule& schedule,
                                      const NccmParams& params,
                                      std::span<const int> ts) {
  return verify_invest_share(schedule_rows(schedule, ts), params);
}

}  // namespace tpp::nccm
