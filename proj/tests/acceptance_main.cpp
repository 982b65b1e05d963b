// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Tolerances are pinned here, not read from configuration.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "tpp/game.hpp"
#include "tpp/holt_laury.hpp"
#include "tpp/nccm.hpp"
#include "tpp/saito.hpp"
#include "tpp/simulate.hpp"
#include "tpp/stats.hpp"

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!pass) ++g_failures;
}

void note(const std::string& text) {
  std::printf("         %s\n", text.c_str());
}

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string fmt_sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1-2: separation table and crossing
// ---------------------------------------------------------------------------

void criterion_1() {
  const tpp::nccm::Partworths w;
  const std::array<std::pair<double, double>, 5> expected{{
      {0.5, 119.77}, {0.4, 154.36}, {0.3, 202.61}, {0.2, 271.17},
      {0.1, 370.62},
  }};
  bool pass = true;
  std::string worst;
  double worst_err = 0;
  for (const auto& [c, lhs_expected] : expected) {
    tpp::nccm::NccmParams params;
    params.concavity_material = c;
    params.concavity_psych = c;
    params.logit_scale = 0.05;
    const auto sep = tpp::nccm::separation_check(w, params);
    const double lhs_err = std::abs(sep.lhs - lhs_expected);
    const double rhs_err = std::abs(sep.rhs - 85.04);
    if (lhs_err > 0.02 || rhs_err > 0.02 || !sep.holds) pass = false;
    if (lhs_err > worst_err) {
      worst_err = lhs_err;
      worst = "c=" + fmt(c, 1) + " LHS=" + fmt(sep.lhs, 2);
    }
    if (rhs_err > worst_err) worst_err = rhs_err;
  }
  report(1, pass,
         "separation table, five concavities, tolerance 0.02 (worst gap " +
             fmt(worst_err, 4) + " at " + worst + ")");
}

void criterion_2() {
  const tpp::nccm::Partworths w;
  const auto c_star = tpp::nccm::separation_crossing(w, 0.05, 1e-10);
  const bool pass = c_star && std::abs(*c_star - 0.6469) <= 0.0005;
  report(2, pass,
         c_star ? "crossing concavity " + fmt(*c_star, 6) +
                      " within 0.0005 of 0.6469"
                : "crossing concavity not found");
}

// ---------------------------------------------------------------------------
// 3-4: probability sweeps
// ---------------------------------------------------------------------------

tpp::sim::PopulationSpec sweep_spec() {
  tpp::sim::PopulationSpec spec;
  spec.n_agents = 1000;
  spec.master_seed = 20240101;
  spec.concavity = {0.05, 0.95};
  spec.logit_scale = {0.01, 0.10};
  spec.psych_gap_punish = {40, 60};
  spec.psych_gap_invest = {15, 35};
  return spec;
}

void criterion_3() {
  const auto start = std::chrono::steady_clock::now();
  const auto agents = tpp::sim::sample_population(sweep_spec());
  const std::array<int, 5> ts{0, 10, 20, 30, 40};
  std::size_t cells = 0, passed = 0;
  bool contexts_ok = true;
  for (const auto& agent : agents) {
    const tpp::nccm::PartworthSchedule schedule(agent.schedule);
    const auto drop =
        tpp::nccm::verify_punishment_drop(schedule, agent.params, ts);
    contexts_ok = contexts_ok && drop.contexts_match;
    for (const auto& row : drop.rows) {
      ++cells;
      if (row.pass) ++passed;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const bool pass =
      contexts_ok && cells == agents.size() * ts.size() && passed == cells &&
      seconds < 10.0;
  report(3, pass,
         "deduction probability drops when investing is possible: " +
             std::to_string(passed) + "/" + std::to_string(cells) +
             " draw-transfer cells over 1000 draws in " + fmt(seconds, 2) +
             "s");
}

void criterion_4() {
  const auto agents = tpp::sim::sample_population(sweep_spec());
  const std::array<int, 5> ts{0, 10, 20, 30, 40};
  std::size_t asserted = 0, asserted_pass = 0, recorded = 0;
  for (const auto& agent : agents) {
    const tpp::nccm::PartworthSchedule schedule(agent.schedule);
    const auto share =
        tpp::nccm::verify_invest_share(schedule, agent.params, ts);
    for (const auto& row : share.rows) {
      if (row.separation.holds) {
        ++asserted;
        if (row.pass) ++asserted_pass;
      } else {
        ++recorded;
      }
    }
  }

  // Necessity of the separation condition: at a shared concavity of 0.7
  // the canonical configuration fails it and the share ordering flips.
  tpp::nccm::NccmParams steep;
  steep.concavity_material = 0.7;
  steep.concavity_psych = 0.7;
  steep.logit_scale = 0.05;
  const tpp::nccm::Partworths w;
  const auto sep = tpp::nccm::separation_check(w, steep);
  const double with_punish = tpp::nccm::choice_probability(
      tpp::TreatmentId::PI0, tpp::nccm::OptionKind::invest, w, steep);
  const double without = tpp::nccm::choice_probability(
      tpp::TreatmentId::I0, tpp::nccm::OptionKind::invest, w, steep);
  const bool reversal = !sep.holds && with_punish < without;

  const bool pass = asserted > 0 && asserted_pass == asserted && reversal;
  report(4, pass,
         "invest share rises with the deduction option present: " +
             std::to_string(asserted_pass) + "/" + std::to_string(asserted) +
             " cells where the exponential condition holds (" +
             std::to_string(recorded) + " recorded unasserted); c=0.7 " +
             "reversal " + fmt(with_punish, 4) + " < " + fmt(without, 4));
}

// ---------------------------------------------------------------------------
// 5-6: lottery menu
// ---------------------------------------------------------------------------

void criterion_5() {
  namespace hl = tpp::holt_laury;
  const std::array<long, 10> expected{2680, 1910, 1140, 370, -400,
                                      -1170, -1940, -2710, -3480, -4250};
  bool pass = true;
  for (int q = 1; q <= 10; ++q) {
    if (hl::lottery_ev_gap(q) != expected[std::size_t(q - 1)]) pass = false;
  }
  const auto profile = hl::classify_risk(hl::expected_value_choices());
  pass = pass && profile.cls == hl::RiskClass::neutral &&
         profile.switch_point && *profile.switch_point == 5;
  report(5, pass,
         "ten expected-value gaps exact; value maximizer switches at 5");
}

void criterion_6() {
  namespace hl = tpp::holt_laury;
  const hl::CrraInterval mid = hl::crra_interval(5);
  bool pass = std::abs(mid.lo - (-0.15)) <= 0.01 &&
              std::abs(mid.hi - 0.15) <= 0.01;
  for (int q = 1; q <= 9; ++q) {
    const hl::CrraInterval a = hl::crra_interval(q);
    const hl::CrraInterval b = hl::crra_interval(q + 1);
    if (a.hi != b.lo) pass = false;  // shared bound, bit for bit
  }
  pass = pass && std::isinf(hl::crra_interval(1).lo) &&
         std::isinf(hl::crra_interval(10).hi);
  report(6, pass,
         "switch-at-5 relative risk aversion in [" + fmt(mid.lo, 4) + ", " +
             fmt(mid.hi, 4) + "], bounds within 0.01 of (-0.15, 0.15); " +
             "adjacent intervals share bounds exactly");
}

// ---------------------------------------------------------------------------
// 7: payoff fixtures
// ---------------------------------------------------------------------------

void criterion_7() {
  using tpp::LotteryOutcome;
  const tpp::Treatment& tr = tpp::treatment(tpp::TreatmentId::PI0);
  struct Fixture {
    int p, z;
    LotteryOutcome outcome;
    long a, b, c;
  };
  const std::array<Fixture, 6> fixtures{{
      {0, 0, LotteryOutcome::not_applicable, 90, 10, 50},
      {0, 14, LotteryOutcome::win, 90, 10, 64},
      {0, 14, LotteryOutcome::lose, 90, 10, 36},
      {18, 0, LotteryOutcome::not_applicable, 36, 10, 32},
      {18, 14, LotteryOutcome::win, 36, 10, 46},
      {18, 14, LotteryOutcome::lose, 36, 10, 18},
  }};
  bool pass = true;
  for (const auto& f : fixtures) {
    const auto v = tpp::realized_payoffs(tr, 10, {f.p, f.z}, f.outcome);
    if (v.a != tpp::Rational(f.a) || v.b != tpp::Rational(f.b) ||
        v.c != tpp::Rational(f.c)) {
      pass = false;
    }
  }
  report(7, pass,
         "all four control questions at t=10 reproduce exactly, both lottery "
         "branches where one applies");
}

// ---------------------------------------------------------------------------
// 8-9: piecewise partworths against the brute-force evaluator
// ---------------------------------------------------------------------------

const std::array<std::pair<double, double>, 6> kAlphaBeta{{
    {0.8, 0.4}, {0.7, 0.35}, {0.9, 0.2}, {1.2, 0.9}, {1.5, 0.3}, {2.0, 1.1},
}};
const std::array<double, 5> kDeltas{0.0, 0.25, 0.5, 0.75, 1.0};

void criterion_8() {
  namespace st = tpp::saito;
  using tpp::nccm::OptionKind;
  double max_gap = 0, max_edge_gap = 0, max_residual_err = 0;
  std::size_t grid_points = 0, residual_rows = 0;
  bool residual_nonempty_every_report = true;

  for (const auto& [alpha, beta] : kAlphaBeta) {
    for (double delta : kDeltas) {
      const st::FsParams params{alpha, beta, delta};
      for (int t : tpp::transfer_levels) {
        // Closed forms versus the assembled-allocation evaluator.
        for (int s = 1; s <= 50; ++s) {
          const double z = s, p = s;
          max_gap = std::max(
              max_gap,
              std::abs(st::partworth_invest_zero(t, z, params) -
                       st::partworth_oracle(OptionKind::invest,
                                            tpp::TreatmentId::PI0, t, 0, z,
                                            params)));
          max_gap = std::max(
              max_gap,
              std::abs(st::partworth_invest_neg(t, z, params) -
                       st::partworth_oracle(OptionKind::invest,
                                            tpp::TreatmentId::PIneg, t, 0, z,
                                            params)));
          max_gap = std::max(
              max_gap,
              std::abs(st::partworth_punish_derived(t, p, params) -
                       st::partworth_oracle(OptionKind::punish,
                                            tpp::TreatmentId::P, t, p, 0,
                                            params)));
          if (st::punish_branch(t, p) == 1) {
            max_gap = std::max(
                max_gap,
                std::abs(st::partworth_punish_printed(t, p, params) -
                         st::partworth_oracle(OptionKind::punish,
                                              tpp::TreatmentId::P, t, p, 0,
                                              params)));
          }
          grid_points += 3;
        }
        max_gap = std::max(
            max_gap,
            std::abs(st::partworth_safe(t, params) -
                     st::partworth_oracle(OptionKind::safe,
                                          tpp::TreatmentId::PI0, t, 0, 0,
                                          params)));
        ++grid_points;

        // Continuity of the oracle-faithful forms at interior edges.
        const double eps = 1e-9;
        std::vector<double> invest_zero_edges{50.0 - t};
        std::vector<double> invest_neg_edges{50.0 - t, 2.0 * (50 - t),
                                             4.0 * (50 - t)};
        std::vector<double> punish_edges{(50.0 - t) / 2, 50.0 - t};
        for (double edge : invest_zero_edges) {
          if (edge <= 0 || edge >= 50) continue;
          max_edge_gap = std::max(
              max_edge_gap,
              std::abs(st::partworth_invest_zero(t, edge - eps, params) -
                       st::partworth_invest_zero(t, edge + eps, params)));
        }
        for (double edge : invest_neg_edges) {
          if (edge <= 0 || edge >= 50) continue;
          max_edge_gap = std::max(
              max_edge_gap,
              std::abs(st::partworth_invest_neg(t, edge - eps, params) -
                       st::partworth_invest_neg(t, edge + eps, params)));
        }
        for (double edge : punish_edges) {
          if (edge <= 0 || edge >= 50) continue;
          max_edge_gap = std::max(
              max_edge_gap,
              std::abs(st::partworth_punish_derived(t, edge - eps, params) -
                       st::partworth_punish_derived(t, edge + eps, params)));
        }
      }

      // Divergence report for the printed deduction form.
      std::vector<double> spends(50);
      std::iota(spends.begin(), spends.end(), 1.0);
      const auto rep = st::ranking_report(params, tpp::transfer_levels,
                                          spends, spends);
      if (rep.punish_residuals.empty()) residual_nonempty_every_report = false;
      for (const auto& row : rep.punish_residuals) {
        residual_rows++;
        max_residual_err = std::max(
            max_residual_err,
            std::abs(row.residual -
                     st::punish_residual_form(row.branch, row.p, params)));
        max_residual_err = std::max(
            max_residual_err,
            std::abs(row.residual - (row.printed - row.oracle)));
      }
    }
  }

  const bool pass = grid_points >= 10000 && max_gap <= 1e-9 &&
                    max_edge_gap <= 1e-7 && residual_nonempty_every_report &&
                    residual_rows > 0 && max_residual_err <= 1e-9;
  report(8, pass,
         "closed forms match the direct evaluator to 1e-9 over " +
             std::to_string(grid_points) + " grid points (max gap " +
             fmt_sci(max_gap) + "); edges continuous (max " +
             fmt_sci(max_edge_gap) + "); " + std::to_string(residual_rows) +
             " printed-deduction divergences all equal to the analytic "
             "residual forms");
}

void criterion_9() {
  namespace st = tpp::saito;
  bool pass = true;
  std::size_t checked = 0;
  double min_strict_gap = 1e300;
  for (const auto& [alpha, beta] : kAlphaBeta) {
    for (double delta : kDeltas) {
      const st::FsParams params{alpha, beta, delta};
      for (int t : tpp::transfer_levels) {
        const double w_safe = st::partworth_safe(t, params);
        for (int z = 1; z <= 50; ++z) {
          ++checked;
          const double gap_zero =
              w_safe - st::partworth_invest_zero(t, z, params);
          const bool equal_zone = (z <= 50 - t) || delta == 1.0;
          if (equal_zone) {
            if (std::abs(gap_zero) > 1e-9) pass = false;
          } else {
            if (!(gap_zero > 1e-9)) pass = false;
          }
          if (delta < 1.0) {
            const double gap_neg =
                w_safe - st::partworth_invest_neg(t, z, params);
            const double floor = (z / 4.0) * (1 + alpha - beta);
            if (!(gap_neg > 0) || gap_neg < floor - 1e-9) pass = false;
            min_strict_gap = std::min(min_strict_gap, gap_neg - floor);
          }
        }
      }
    }
  }
  report(9, pass,
         "keeping tokens never ranks below investing: equality exactly on "
         "the sheltered zero-return region, strict dominance with the "
         "documented floor under the 1.5x return (" +
             std::to_string(checked) + " cells, min slack above floor " +
             fmt_sci(min_strict_gap) + ")");
}

// ---------------------------------------------------------------------------
// 10: rank-sum and Fisher oracles
// ---------------------------------------------------------------------------

void criterion_10() {
  namespace ts = tpp::stats;
  bool reference_pass = true;
  {
    const std::vector<double> x{1, 2}, y{3, 4};
    const auto r = ts::wilcoxon_rank_sum(x, y);
    if (std::abs(r.p_value - 1.0 / 3) > 1e-12) reference_pass = false;
  }
  if (std::abs(ts::fisher_exact_2x2(3, 0, 0, 3).p_value - 0.1) > 1e-12) {
    reference_pass = false;
  }
  if (std::abs(ts::fisher_exact_2x2(2, 1, 1, 2).p_value - 1.0) > 1e-12) {
    reference_pass = false;
  }

  // Exhaustive approximate-versus-exact comparison over every split of
  // distinct values into groups of n and m, n+m <= 12.
  double worst = 0, worst_restricted = 0;
  std::string worst_case;
  for (std::size_t n = 1; n + 1 <= 12; ++n) {
    for (std::size_t m = 1; n + m <= 12; ++m) {
      const std::size_t total = n + m;
      std::vector<double> values(total);
      std::iota(values.begin(), values.end(), 1.0);
      std::vector<bool> take(total, false);
      std::fill(take.begin(), take.begin() + n, true);
      std::sort(take.begin(), take.end());
      do {
        std::vector<double> x, y;
        for (std::size_t k = 0; k < total; ++k) {
          (take[k] ? x : y).push_back(values[k]);
        }
        const double exact =
            ts::wilcoxon_rank_sum(x, y, ts::PMethod::exact).p_value;
        const double approx =
            ts::wilcoxon_rank_sum(x, y, ts::PMethod::normal_approx).p_value;
        const double diff = std::abs(exact - approx);
        if (diff > worst) {
          worst = diff;
          std::ostringstream os;
          os << "n=" << n << " m=" << m << " exact=" << fmt(exact, 4)
             << " approx=" << fmt(approx, 4);
          worst_case = os.str();
        }
        if (std::min(n, m) >= 5 && diff > worst_restricted) {
          worst_restricted = diff;
        }
      } while (std::next_permutation(take.begin(), take.end()));
    }
  }

  const bool sweep_pass = worst < 0.02;
  const bool pass = reference_pass && sweep_pass;
  report(10, pass,
         "reference p-values " +
             std::string(reference_pass ? "exact" : "WRONG") +
             "; exhaustive approximation agreement within 0.02 for n+m<=12: " +
             std::string(sweep_pass ? "holds" : "does not hold") +
             " (worst |exact-approx| " + fmt(worst, 4) + " at " + worst_case +
             ")");
  if (!sweep_pass) {
    note("the 0.02 bound cannot hold for tiny groups: with one observation "
         "against three, the most extreme split has exact p 0.5 while the "
         "continuity-corrected normal value is 0.371");
    note("restricted to min(n,m) >= 5 the sweep passes with worst gap " +
         fmt(worst_restricted, 5) + "; the bound is attainable there and "
         "the unit suite asserts it on that region");
  }
}

// ---------------------------------------------------------------------------
// 11: end-to-end determinism and directional readout
// ---------------------------------------------------------------------------

void criterion_11() {
  namespace sim = tpp::sim;
  sim::PopulationSpec spec;
  spec.n_agents = 60;
  spec.master_seed = 424242;
  spec.concavity = {0.20, 0.45};
  spec.logit_scale = {0.04, 0.08};
  spec.psych_gap_punish = {45, 55};
  spec.psych_gap_invest = {20, 30};
  const auto agents = sim::sample_population(spec);
  const std::array<tpp::TreatmentId, 3> treatments{
      tpp::TreatmentId::P, tpp::TreatmentId::PI0, tpp::TreatmentId::I0};

  const auto once = sim::simulate_dataset(
      agents, treatments, sim::AllocationRule::expected_share, 424242, 1);
  const auto again = sim::simulate_dataset(
      agents, treatments, sim::AllocationRule::expected_share, 424242, 1);
  const auto wide = sim::simulate_dataset(
      agents, treatments, sim::AllocationRule::expected_share, 424242, 5);
  std::ostringstream csv_once, csv_again, csv_wide;
  sim::write_dataset_csv(csv_once, once);
  sim::write_dataset_csv(csv_again, again);
  sim::write_dataset_csv(csv_wide, wide);
  const bool deterministic = csv_once.str() == csv_again.str() &&
                             csv_once.str() == csv_wide.str();

  double punish_p = 0, punish_pi0 = 0, invest_pi0 = 0, invest_i0 = 0;
  for (const auto& row : tpp::stats::summarize(once)) {
    if (row.measure == "mean_punishment") {
      if (row.treatment == tpp::TreatmentId::P) punish_p = row.average;
      if (row.treatment == tpp::TreatmentId::PI0) punish_pi0 = row.average;
    }
    if (row.measure == "mean_investment") {
      if (row.treatment == tpp::TreatmentId::PI0) invest_pi0 = row.average;
      if (row.treatment == tpp::TreatmentId::I0) invest_i0 = row.average;
    }
  }
  const bool directional = punish_pi0 < punish_p && invest_pi0 >= invest_i0;

  const bool pass = deterministic && directional;
  report(11, pass,
         "byte-identical CSV across reruns and worker counts; mean deduction " +
             fmt(punish_pi0, 3) + " < " + fmt(punish_p, 3) +
             " with investing available, mean investment " +
             fmt(invest_pi0, 3) + " >= " + fmt(invest_i0, 3) +
             " with deduction available");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures == 0) {
    std::printf("all 11 criteria pass\n");
  } else {
    std::printf("%d criterion(s) failed\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
