#include "tpp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tpp::stats {

namespace {

void check_sample(std::span<const double> v, const char* name) {
  if (v.empty()) {
    throw std::invalid_argument(std::string(name) + " sample must not be empty");
  }
  for (double value : v) {
    if (!std::isfinite(value)) {
      throw std::invalid_argument(std::string(name) +
                                  " sample must be finite");
    }
  }
}

// Midranks of the combined sample, doubled so they stay integral under
// ties; also the tie-group term sum(g^3 - g).
struct RankedData {
  std::vector<long long> twice_ranks;  // aligned with x followed by y
  double tie_term = 0;
};

RankedData midranks(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size() + y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto value_at = [&](std::size_t i) {
    return i < x.size() ? x[i] : y[i - x.size()];
  };
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return value_at(i) < value_at(j);
  });
  RankedData out;
  out.twice_ranks.resize(n);
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t end = pos;
    while (end + 1 < n && value_at(order[end + 1]) == value_at(order[pos])) {
      ++end;
    }
    const std::size_t g = end - pos + 1;
    // Positions pos+1 .. end+1 share midrank (pos+1 + end+1)/2.
    const long long twice_rank = static_cast<long long>(pos + 1 + end + 1);
    for (std::size_t k = pos; k <= end; ++k) {
      out.twice_ranks[order[k]] = twice_rank;
    }
    out.tie_term += double(g) * g * g - double(g);
    pos = end + 1;
  }
  return out;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  double result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result *= double(n - k + i) / double(i);
  }
  return result;
}

// Exact permutation distribution of the doubled rank-sum of the first
// group: count[s] = number of n-subsets of the combined doubled ranks
// with sum s.
RankSumResult exact_rank_sum(const RankedData& ranked, std::size_t n,
                             std::size_t m, long long twice_w) {
  const std::size_t total_n = n + m;
  long long max_sum = 0;
  for (long long r : ranked.twice_ranks) max_sum += r;
  // dp[k][s]: subsets of size k with doubled-rank sum s.  Counts fit a
  // double exactly (at most C(22,11) subsets).
  std::vector<std::vector<double>> dp(
      n + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  dp[0][0] = 1;
  for (long long rank : ranked.twice_ranks) {
    for (std::size_t k = std::min<std::size_t>(n, total_n); k >= 1; --k) {
      auto& row = dp[k];
      const auto& prev = dp[k - 1];
      for (long long s = max_sum; s >= rank; --s) {
        if (prev[static_cast<std::size_t>(s - rank)] != 0) {
          row[static_cast<std::size_t>(s)] +=
              prev[static_cast<std::size_t>(s - rank)];
        }
      }
    }
  }
  double le = 0, ge = 0, total = 0;
  for (long long s = 0; s <= max_sum; ++s) {
    const double count = dp[n][static_cast<std::size_t>(s)];
    total += count;
    if (s <= twice_w) le += count;
    if (s >= twice_w) ge += count;
  }
  RankSumResult result;
  result.method = PMethod::exact;
  result.p_value = std::min(1.0, 2.0 * std::min(le, ge) / total);
  // Guard: the subset count must match the closed form.
  const double expected_total = binomial(total_n, n);
  if (std::abs(total - expected_total) > 1e-6 * expected_total) {
    throw std::logic_error("rank-sum enumeration lost subsets");
  }
  return result;
}

}  // namespace

std::string_view to_string(PMethod method) {
  switch (method) {
    case PMethod::exact: return "exact";
    case PMethod::normal_approx: return "normal_approx";
  }
  throw std::invalid_argument("unknown p-value method");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

RankSumResult wilcoxon_rank_sum(std::span<const double> x,
                                std::span<const double> y,
                                std::optional<PMethod> forced) {
  check_sample(x, "first");
  check_sample(y, "second");
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const std::size_t total_n = n + m;

  PMethod method = total_n <= exact_default_cutoff ? PMethod::exact
                                                   : PMethod::normal_approx;
  if (forced) method = *forced;
  if (method == PMethod::exact && total_n > exact_size_limit) {
    std::ostringstream msg;
    msg << "exact enumeration supports combined samples up to "
        << exact_size_limit << ", got " << total_n;
    throw std::invalid_argument(msg.str());
  }

  const RankedData ranked = midranks(x, y);
  long long twice_w = 0;
  for (std::size_t i = 0; i < n; ++i) twice_w += ranked.twice_ranks[i];
  const double w = 0.5 * twice_w;
  const double u = w - double(n) * (n + 1) / 2.0;

  RankSumResult result;
  result.u_statistic = u;

  if (method == PMethod::exact) {
    result = exact_rank_sum(ranked, n, m, twice_w);
    result.u_statistic = u;
    return result;
  }

  result.method = PMethod::normal_approx;
  const double mean = double(n) * m / 2.0;
  const double nn = double(total_n);
  double variance = double(n) * m / 12.0 *
                    ((nn + 1.0) - ranked.tie_term / (nn * (nn - 1.0)));
  if (variance <= 0) {
    // Every observation tied: no evidence against the null.
    result.p_value = 1.0;
    return result;
  }
  const double sd = std::sqrt(variance);
  const double p_left = normal_cdf((u + 0.5 - mean) / sd);
  const double p_right = 1.0 - normal_cdf((u - 0.5 - mean) / sd);
  result.p_value = std::min(1.0, 2.0 * std::min(p_left, p_right));
  return result;
}

FisherResult fisher_exact_2x2(std::int64_t a, std::int64_t b, std::int64_t c,
                              std::int64_t d) {
  if (a < 0 || b < 0 || c < 0 || d < 0) {
    throw std::invalid_argument("table cells must be non-negative");
  }
  const std::int64_t row1 = a + b, row2 = c + d;
  const std::int64_t col1 = a + c, col2 = b + d;
  const std::int64_t n = row1 + row2;
  if (n == 0) {
    throw std::invalid_argument("table must contain at least one observation");
  }
  if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0) {
    return {1.0};  // a single admissible table
  }

  auto log_choose = [](std::int64_t nn, std::int64_t kk) {
    return std::lgamma(double(nn + 1)) - std::lgamma(double(kk + 1)) -
           std::lgamma(double(nn - kk + 1));
  };
  const double log_denom = log_choose(n, col1);
  auto log_prob = [&](std::int64_t k) {
    return log_choose(row1, k) + log_choose(row2, col1 - k) - log_denom;
  };

  const std::int64_t k_lo = std::max<std::int64_t>(0, col1 - row2);
  const std::int64_t k_hi = std::min(row1, col1);
  const double log_observed = log_prob(a);
  // Sum P(k) over tables no more likely than the observed one, with a
  // relative tolerance for ties in the probability ordering.
  const double cutoff = log_observed + std::log1p(1e-7);
  double p = 0;
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    const double lp = log_prob(k);
    if (lp <= cutoff) p += std::exp(lp);
  }
  return {std::min(1.0, p)};
}

// ---------------------------------------------------------------------------
// Summaries and comparisons
// ---------------------------------------------------------------------------

namespace {

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1));
}

}  // namespace

std::vector<SummaryRow> summarize(const sim::ChoiceDataset& dataset) {
  const std::vector<sim::AgentMeasures> measures = derive_measures(dataset);
  struct Accessor {
    const char* name;
    double (*get)(const sim::AgentMeasures&);
  };
  static const Accessor accessors[] = {
      {"mean_punishment", [](const sim::AgentMeasures& m) { return m.mean_punishment; }},
      {"median_punishment", [](const sim::AgentMeasures& m) { return m.median_punishment; }},
      {"mean_investment", [](const sim::AgentMeasures& m) { return m.mean_investment; }},
      {"median_investment", [](const sim::AgentMeasures& m) { return m.median_investment; }},
      {"mean_safe", [](const sim::AgentMeasures& m) { return m.mean_safe; }},
      {"median_safe", [](const sim::AgentMeasures& m) { return m.median_safe; }},
  };
  std::vector<SummaryRow> out;
  for (TreatmentId id : all_treatments) {
    std::vector<const sim::AgentMeasures*> group;
    for (const auto& m : measures) {
      if (m.treatment == id) group.push_back(&m);
    }
    if (group.empty()) continue;
    for (const Accessor& accessor : accessors) {
      std::vector<double> values;
      values.reserve(group.size());
      for (const auto* m : group) values.push_back(accessor.get(*m));
      SummaryRow row;
      row.treatment = id;
      row.measure = accessor.name;
      row.average = std::accumulate(values.begin(), values.end(), 0.0) /
                    values.size();
      row.sd = sample_sd(values);
      row.n = values.size();
      out.push_back(row);
    }
  }
  return out;
}

namespace {

struct PairSpec {
  TreatmentId reference;  // the fuller context
  TreatmentId baseline;
  const char* measure;  // expenditure column compared
};

// Canonical comparisons: deduction across punish-capable pairs, investment
// across invest-capable pairs, plus the safe residual for the zero-return
// punish pair.
constexpr PairSpec pair_specs[] = {
    {TreatmentId::PI0, TreatmentId::P, "punishment"},
    {TreatmentId::PI0, TreatmentId::P, "safe"},
    {TreatmentId::PIneg, TreatmentId::P, "punishment"},
    {TreatmentId::PI0, TreatmentId::I0, "investment"},
    {TreatmentId::PIneg, TreatmentId::Ineg, "investment"},
};

int row_expenditure(const sim::DatasetRow& row, std::string_view measure) {
  if (measure == "punishment") return row.deduction;
  if (measure == "investment") return row.investment;
  return row.safe;
}

}  // namespace

std::vector<ComparisonResult> compare_treatments(
    const sim::ChoiceDataset& dataset) {
  const std::vector<sim::AgentMeasures> measures = derive_measures(dataset);
  std::vector<ComparisonResult> out;

  auto agents_of = [&](TreatmentId id) {
    std::vector<const sim::AgentMeasures*> group;
    for (const auto& m : measures) {
      if (m.treatment == id) group.push_back(&m);
    }
    return group;
  };

  for (const PairSpec& spec : pair_specs) {
    const auto group_a = agents_of(spec.reference);
    const auto group_b = agents_of(spec.baseline);
    if (group_a.empty() || group_b.empty()) continue;

    auto individual = [&](const char* level,
                          double (*get)(const sim::AgentMeasures&)) {
      std::vector<double> xs, ys;
      for (const auto* m : group_a) xs.push_back(get(*m));
      for (const auto* m : group_b) ys.push_back(get(*m));
      const RankSumResult r = wilcoxon_rank_sum(xs, ys);
      ComparisonResult res;
      res.test = "wilcoxon_rank_sum";
      res.measure = spec.measure;
      res.group_a = spec.reference;
      res.group_b = spec.baseline;
      res.level = level;
      res.statistic = r.u_statistic;
      res.p_value = r.p_value;
      res.method = std::string(to_string(r.method));
      out.push_back(res);
    };
    if (std::string_view(spec.measure) == "punishment") {
      individual("individual_mean",
                 [](const sim::AgentMeasures& m) { return m.mean_punishment; });
      individual("individual_median", [](const sim::AgentMeasures& m) {
        return m.median_punishment;
      });
    } else if (std::string_view(spec.measure) == "investment") {
      individual("individual_mean",
                 [](const sim::AgentMeasures& m) { return m.mean_investment; });
      individual("individual_median", [](const sim::AgentMeasures& m) {
        return m.median_investment;
      });
    } else {
      individual("individual_mean",
                 [](const sim::AgentMeasures& m) { return m.mean_safe; });
      individual("individual_median",
                 [](const sim::AgentMeasures& m) { return m.median_safe; });
    }

    // Per transfer level: expenditure ranks and incidence tables.
    for (int t : transfer_levels) {
      std::vector<double> xs, ys;
      std::int64_t yes_a = 0, yes_b = 0;
      for (const sim::DatasetRow& row : dataset.rows) {
        if (row.transfer != t) continue;
        if (row.treatment == spec.reference) {
          xs.push_back(row_expenditure(row, spec.measure));
          if (row_expenditure(row, spec.measure) > 0) ++yes_a;
        } else if (row.treatment == spec.baseline) {
          ys.push_back(row_expenditure(row, spec.measure));
          if (row_expenditure(row, spec.measure) > 0) ++yes_b;
        }
      }
      if (xs.empty() || ys.empty()) continue;
      std::ostringstream level;
      level << "t=" << t;
      const RankSumResult r = wilcoxon_rank_sum(xs, ys);
      ComparisonResult res;
      res.test = "wilcoxon_rank_sum";
      res.measure = spec.measure;
      res.group_a = spec.reference;
      res.group_b = spec.baseline;
      res.level = level.str();
      res.statistic = r.u_statistic;
      res.p_value = r.p_value;
      res.method = std::string(to_string(r.method));
      out.push_back(res);

      if (std::string_view(spec.measure) != "safe") {
        const std::int64_t no_a = std::int64_t(xs.size()) - yes_a;
        const std::int64_t no_b = std::int64_t(ys.size()) - yes_b;
        const FisherResult f = fisher_exact_2x2(yes_a, no_a, yes_b, no_b);
        ComparisonResult inc;
        inc.test = "fisher_exact";
        inc.measure = std::string(spec.measure) + "_incidence";
        inc.group_a = spec.reference;
        inc.group_b = spec.baseline;
        inc.level = level.str();
        inc.statistic = double(yes_a);
        inc.p_value = f.p_value;
        inc.method = "exact";
        inc.table = {{yes_a, no_a, yes_b, no_b}};
        out.push_back(inc);
      }
    }
  }
  return out;
}

}  // namespace tpp::stats
