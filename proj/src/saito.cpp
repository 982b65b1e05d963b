#include "tpp/saito.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tpp::saito {

namespace {

void require_grid_point(int t, double spend, const char* what) {
  if (!is_transfer_level(t)) {
    std::ostringstream msg;
    msg << "transfer must be one of {0,10,20,30,40,50}, got " << t;
    throw std::invalid_argument(msg.str());
  }
  if (!std::isfinite(spend) || spend < 0 || spend > token_budget) {
    std::ostringstream msg;
    msg << what << " must lie in [0, " << token_budget << "], got " << spend;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

void FsParams::validate() const {
  for (double v : {alpha, beta, delta}) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("inequity parameters must be finite");
    }
  }
  if (!(beta > 0) || !(alpha > beta)) {
    throw std::invalid_argument("parameters must satisfy alpha > beta > 0");
  }
  if (!(alpha + beta > 1)) {
    throw std::invalid_argument("parameters must satisfy alpha + beta > 1");
  }
  if (delta < 0 || delta > 1) {
    throw std::invalid_argument("the ex-ante weight must lie in [0, 1]");
  }
}

double fs_utility(const Allocation& alloc, const FsParams& params) {
  params.validate();
  const double own = alloc.c;
  double envy = 0, guilt = 0;
  for (double other : {alloc.a, alloc.b}) {
    envy += std::max(other - own, 0.0);
    guilt += std::max(own - other, 0.0);
  }
  return own - params.alpha * envy - params.beta * guilt;
}

double saito_value(const Allocation& ex_ante,
                   std::span<const WeightedOutcome> outcomes,
                   const FsParams& params) {
  params.validate();
  if (outcomes.empty()) {
    throw std::invalid_argument("outcome distribution must not be empty");
  }
  Rational total{0};
  for (const WeightedOutcome& outcome : outcomes) {
    if (outcome.probability <= Rational{0}) {
      throw std::invalid_argument("outcome probabilities must be positive");
    }
    total += outcome.probability;
  }
  if (total != Rational{1}) {
    throw std::invalid_argument("outcome probabilities must sum to exactly 1");
  }
  double expected_ex_post = 0;
  for (const WeightedOutcome& outcome : outcomes) {
    expected_ex_post += boost::rational_cast<double>(outcome.probability) *
                        fs_utility(outcome.alloc, params);
  }
  return params.delta * fs_utility(ex_ante, params) +
         (1.0 - params.delta) * expected_ex_post;
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

double partworth_safe(int t, const FsParams& params) {
  params.validate();
  require_grid_point(t, 0, "spend");
  return 50.0 - (50.0 - t) * (params.alpha + params.beta);
}

int invest_zero_branch(int t, double z) {
  require_grid_point(t, z, "investment");
  return z <= 50.0 - t ? 1 : 2;
}

double partworth_invest_zero(int t, double z, const FsParams& params) {
  params.validate();
  const double ab = params.alpha + params.beta;
  if (invest_zero_branch(t, z) == 1) return 50.0 - (50.0 - t) * ab;
  return 50.0 -
         ab * (params.delta * (50.0 - t) + (1.0 - params.delta) * z);
}

int invest_neg_branch(int t, double z) {
  require_grid_point(t, z, "investment");
  const double e = 50.0 - t;
  if (z <= e) return 1;
  if (z <= 2 * e) return 2;
  if (z <= 4 * e) return 3;
  return 4;
}

double partworth_invest_neg(int t, double z, const FsParams& params) {
  params.validate();
  const double a = params.alpha, b = params.beta, d = params.delta;
  const double e = 50.0 - t;
  // Ex-ante utility while the expected own payoff still trails B's share
  // threshold (z <= 4(50-t)).
  const double ex_ante_low = 50.0 - e * (a + b) - (z / 4.0) * (1.0 + a - b);
  switch (invest_neg_branch(t, z)) {
    case 1:
      // Expected ex-post equals the ex-ante value, so delta drops out.
      return ex_ante_low;
    case 2:
      return d * ex_ante_low +
             (1.0 - d) * (50.0 - e * (a + b) / 2.0 -
                          (z / 4.0) * (1.0 + 3.0 * a + b));
    case 3:
      return d * ex_ante_low +
             (1.0 - d) * (50.0 - (z / 4.0) * (1.0 + 4.0 * a + 2.0 * b));
    default:
      return d * (50.0 - (z / 4.0) * (1.0 + 2.0 * a)) +
             (1.0 - d) * (50.0 - (z / 4.0) * (1.0 + 4.0 * a + 2.0 * b));
  }
}

int punish_branch(int t, double p) {
  require_grid_point(t, p, "deduction");
  const double e = 50.0 - t;
  if (p < e / 2.0) return 1;
  if (p < e) return 2;
  return 3;
}

double partworth_punish_printed(int t, double p, const FsParams& params) {
  params.validate();
  const double a = params.alpha, b = params.beta;
  const double e = 50.0 - t;
  switch (punish_branch(t, p)) {
    case 1: return 50.0 - e * (a + b) - p * (1.0 - 2.0 * a - b);
    case 2: return 50.0 - p * b;
    default: return 50.0 + e * (a + b) - p * (1.0 - a - 2.0 * b);
  }
}

double partworth_punish_derived(int t, double p, const FsParams& params) {
  params.validate();
  const double a = params.alpha, b = params.beta;
  const double e = 50.0 - t;
  switch (punish_branch(t, p)) {
    case 1: return 50.0 - e * (a + b) - p * (1.0 - 2.0 * a - b);
    case 2: return 50.0 - p * (1.0 + b);
    default: return 50.0 + e * (a + b) - p * (1.0 + a + 2.0 * b);
  }
}

double punish_residual_form(int branch, double p, const FsParams& params) {
  switch (branch) {
    case 1: return 0.0;
    case 2: return p;
    case 3: return 2.0 * p * (params.alpha + 2.0 * params.beta);
    default: throw std::invalid_argument("punish branch must be 1..3");
  }
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

double partworth_oracle(nccm::OptionKind option, TreatmentId id, int t,
                        double p, double z, const FsParams& params) {
  params.validate();
  require_grid_point(t, p, "deduction");
  require_grid_point(t, z, "investment");
  if (p + z > token_budget) {
    throw std::invalid_argument("token budget exceeded");
  }
  const Treatment& tr = treatment(id);

  switch (option) {
    case nccm::OptionKind::safe: {
      if (p != 0 || z != 0) {
        throw std::invalid_argument(
            "the safe option spends no tokens; pass p = z = 0");
      }
      const Allocation alloc{100.0 - t, double(t), 50.0};
      const WeightedOutcome sure{Rational{1}, alloc};
      return saito_value(alloc, std::span(&sure, 1), params);
    }
    case nccm::OptionKind::punish: {
      if (!tr.punishment_available) {
        throw std::invalid_argument("deduction is not available in treatment " +
                                    std::string(to_string(id)));
      }
      if (z != 0) {
        throw std::invalid_argument(
            "the punish partworth spends on deduction only; pass z = 0");
      }
      const Allocation alloc{100.0 - t - deduction_leverage * p, double(t),
                             50.0 - p};
      const WeightedOutcome sure{Rational{1}, alloc};
      return saito_value(alloc, std::span(&sure, 1), params);
    }
    case nccm::OptionKind::invest: {
      if (!tr.investment_available) {
        throw std::invalid_argument(
            "investment is not available in treatment " +
            std::string(to_string(id)));
      }
      if (p != 0) {
        throw std::invalid_argument(
            "the invest partworth spends on investment only; pass p = 0");
      }
      const double multiplier =
          boost::rational_cast<double>(*tr.return_multiplier);
      const double p_win = boost::rational_cast<double>(tr.win_probability);
      const Allocation ex_ante{100.0 - t, double(t),
                               50.0 - z + p_win * multiplier * z};
      if (z == 0) {
        const WeightedOutcome sure{Rational{1}, ex_ante};
        return saito_value(ex_ante, std::span(&sure, 1), params);
      }
      const WeightedOutcome outcomes[2] = {
          {tr.win_probability,
           Allocation{100.0 - t, double(t), 50.0 - z + multiplier * z}},
          {Rational{1} - tr.win_probability,
           Allocation{100.0 - t, double(t), 50.0 - z}},
      };
      return saito_value(ex_ante, outcomes, params);
    }
  }
  throw std::invalid_argument("unknown option kind");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

RankingReport ranking_report(const FsParams& params, std::span<const int> ts,
                             std::span<const double> ps,
                             std::span<const double> zs) {
  params.validate();
  RankingReport report;
  report.alpha = params.alpha;
  report.beta = params.beta;
  report.delta = params.delta;
  report.zero_return_ok = true;
  report.neg_return_ok = true;

  for (int t : ts) {
    for (double p : ps) {
      for (double z : zs) {
        RankingRow row;
        row.t = t;
        row.p = p;
        row.z = z;
        row.w_punish_printed = partworth_punish_printed(t, p, params);
        row.w_punish_oracle =
            partworth_oracle(nccm::OptionKind::punish, TreatmentId::PI0, t, p,
                             0.0, params);
        row.w_safe = partworth_safe(t, params);

        row.w_invest = partworth_invest_zero(t, z, params);
        row.invest_branch = invest_zero_branch(t, z);
        const double zero_gap = row.w_safe - row.w_invest;
        if (z <= 50.0 - t || params.delta == 1.0) {
          if (std::abs(zero_gap) > 1e-9) report.zero_return_ok = false;
        } else if (!(zero_gap > 0)) {
          report.zero_return_ok = false;
        }
        report.zero_return.push_back(row);

        row.w_invest = partworth_invest_neg(t, z, params);
        row.invest_branch = invest_neg_branch(t, z);
        const double neg_gap = row.w_safe - row.w_invest;
        if (z == 0) {
          if (std::abs(neg_gap) > 1e-9) report.neg_return_ok = false;
        } else if (!(neg_gap > 0)) {
          report.neg_return_ok = false;
        }
        report.neg_return.push_back(row);
      }
      const double printed = partworth_punish_printed(t, p, params);
      const double oracle = partworth_oracle(
          nccm::OptionKind::punish, TreatmentId::PI0, t, p, 0.0, params);
      if (std::abs(printed - oracle) > 1e-9) {
        report.punish_residuals.push_back(
            {t, p, punish_branch(t, p), printed, oracle, printed - oracle});
      }
    }
  }
  return report;
}

void write_ranking_csv(std::ostream& out, const RankingReport& report,
                       bool neg_return) {
  const auto& rows = neg_return ? report.neg_return : report.zero_return;
  out << "t,p,z,alpha,beta,delta,w_tp_printed,w_tp_oracle,w_s,w_i,branch\n";
  out << std::setprecision(12);
  for (const RankingRow& row : rows) {
    out << row.t << ',' << row.p << ',' << row.z << ',' << report.alpha << ','
        << report.beta << ',' << report.delta << ',' << row.w_punish_printed
        << ',' << row.w_punish_oracle << ',' << row.w_safe << ','
        << row.w_invest << ',' << row.invest_branch << '\n';
  }
}

void write_residual_csv(std::ostream& out, const RankingReport& report) {
  out << "t,p,alpha,beta,delta,branch,w_tp_printed,w_tp_oracle,residual\n";
  out << std::setprecision(12);
  for (const PunishResidualRow& row : report.punish_residuals) {
    out << row.t << ',' << row.p << ',' << report.alpha << ',' << report.beta
        << ',' << report.delta << ',' << row.branch << ',' << row.printed
        << ',' << row.oracle << ',' << row.residual << '\n';
  }
}

}  // namespace tpp::saito
