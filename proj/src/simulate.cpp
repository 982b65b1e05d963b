#include "tpp/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace tpp::sim {

namespace {

constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

void check_range(const ParamRange& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw std::invalid_argument(std::string(name) +
                                " range must be finite with lo <= hi");
  }
}

int rule_priority(nccm::OptionKind kind) {
  switch (kind) {
    case nccm::OptionKind::safe: return 0;
    case nccm::OptionKind::invest: return 1;
    case nccm::OptionKind::punish: return 2;
  }
  throw std::invalid_argument("unknown option kind");
}

void check_probs(std::span<const nccm::OptionValue> probs) {
  if (probs.empty()) {
    throw std::invalid_argument("probability vector must not be empty");
  }
  double total = 0;
  for (const auto& pv : probs) {
    if (!std::isfinite(pv.value) || pv.value < 0 || pv.value > 1) {
      throw std::invalid_argument("probabilities must lie in [0, 1]");
    }
    total += pv.value;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw std::invalid_argument("probabilities must sum to 1");
  }
}

int& split_field(TokenSplit& split, nccm::OptionKind kind) {
  switch (kind) {
    case nccm::OptionKind::punish: return split.punish;
    case nccm::OptionKind::invest: return split.invest;
    case nccm::OptionKind::safe: return split.safe;
  }
  throw std::invalid_argument("unknown option kind");
}

}  // namespace

void PopulationSpec::validate() const {
  if (n_agents == 0) {
    throw std::invalid_argument("population must contain at least one agent");
  }
  check_range(concavity, "concavity");
  check_range(logit_scale, "logit_scale");
  check_range(psych_gap_punish, "psych_gap_punish");
  check_range(psych_gap_invest, "psych_gap_invest");
  constexpr double margin = 1e-9;
  if (concavity.lo < margin || concavity.hi > 1.0 - margin) {
    throw std::invalid_argument(
        "concavity range must stay inside (0,1) by at least 1e-9");
  }
  if (logit_scale.lo <= 0) {
    throw std::invalid_argument("logit scale range must be positive");
  }
  if (psych_gap_invest.lo <= 0) {
    throw std::invalid_argument("psych_gap_invest range must be positive");
  }
  // Strict gap ordering must survive every draw combination.
  if (psych_gap_punish.lo <= psych_gap_invest.hi) {
    throw std::invalid_argument(
        "psych_gap_punish range must lie strictly above psych_gap_invest");
  }
  if (!(material_safe > material_invest && material_invest > material_punish)) {
    throw std::invalid_argument(
        "material partworths must satisfy safe > invest > punish");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += golden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t agent_stream_seed(std::uint64_t master_seed,
                                std::uint64_t index) {
  return splitmix64(master_seed + (index + 1) * golden);
}

std::uint64_t row_seed(std::uint64_t stream_seed, TreatmentId id, int t) {
  const std::uint64_t key =
      static_cast<std::uint64_t>(id) * 8 + static_cast<std::uint64_t>(t / 10) +
      1;
  return splitmix64(stream_seed ^ (key * golden));
}

double uniform_unit(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, const ParamRange& range) {
  const double u = uniform_unit(rng);  // always consume one word
  return range.lo + u * (range.hi - range.lo);
}

std::vector<AgentProfile> sample_population(const PopulationSpec& spec) {
  spec.validate();
  std::vector<AgentProfile> agents;
  agents.reserve(spec.n_agents);
  for (std::size_t i = 0; i < spec.n_agents; ++i) {
    AgentProfile agent;
    agent.id = i;
    agent.stream_seed = agent_stream_seed(spec.master_seed, i);
    std::mt19937_64 rng(agent.stream_seed);
    // Fixed draw order: concavity, logit scale, punish gap, invest gap.
    const double c = uniform_in(rng, spec.concavity);
    const double b = uniform_in(rng, spec.logit_scale);
    const double gap_punish = uniform_in(rng, spec.psych_gap_punish);
    const double gap_invest = uniform_in(rng, spec.psych_gap_invest);
    agent.params = nccm::NccmParams{c, c, b};
    agent.params.validate();
    agent.schedule = nccm::ScheduleConfig{
        spec.material_punish, spec.material_invest, spec.material_safe,
        gap_punish,           gap_invest,           0.0,
        true};
    agent.risk = spec.risk_annotation;
    agents.push_back(agent);
  }
  return agents;
}

std::string_view to_string(AllocationRule rule) {
  switch (rule) {
    case AllocationRule::expected_share: return "expected_share";
    case AllocationRule::multinomial_tokens: return "multinomial_tokens";
    case AllocationRule::argmax_all_in: return "argmax_all_in";
  }
  throw std::invalid_argument("unknown allocation rule");
}

std::optional<AllocationRule> parse_rule(std::string_view text) {
  if (text == "expected_share" || text == "expected-share") {
    return AllocationRule::expected_share;
  }
  if (text == "multinomial_tokens" || text == "multinomial-tokens" ||
      text == "multinomial") {
    return AllocationRule::multinomial_tokens;
  }
  if (text == "argmax_all_in" || text == "argmax-all-in" || text == "argmax") {
    return AllocationRule::argmax_all_in;
  }
  return std::nullopt;
}

TokenSplit allocate_expected_share(std::span<const nccm::OptionValue> probs) {
  check_probs(probs);
  struct Part {
    nccm::OptionKind option;
    int base;
    double frac;
  };
  std::vector<Part> parts;
  int assigned = 0;
  for (const auto& pv : probs) {
    const double target = token_budget * pv.value;
    const int base = static_cast<int>(std::floor(target));
    parts.push_back({pv.option, base, target - base});
    assigned += base;
  }
  int leftover = token_budget - assigned;
  std::stable_sort(parts.begin(), parts.end(), [](const Part& x, const Part& y) {
    if (x.frac != y.frac) return x.frac > y.frac;
    return rule_priority(x.option) < rule_priority(y.option);
  });
  TokenSplit split;
  for (Part& part : parts) {
    if (leftover > 0) {
      ++part.base;
      --leftover;
    }
    split_field(split, part.option) += part.base;
  }
  return split;
}

TokenSplit allocate_multinomial(std::span<const nccm::OptionValue> probs,
                                std::mt19937_64& rng) {
  check_probs(probs);
  TokenSplit split;
  for (int token = 0; token < token_budget; ++token) {
    const double u = uniform_unit(rng);
    double cum = 0;
    nccm::OptionKind chosen = probs.back().option;
    for (const auto& pv : probs) {
      cum += pv.value;
      if (u < cum) {
        chosen = pv.option;
        break;
      }
    }
    ++split_field(split, chosen);
  }
  return split;
}

TokenSplit allocate_argmax(std::span<const nccm::OptionValue> probs) {
  check_probs(probs);
  double best = -1;
  for (const auto& pv : probs) best = std::max(best, pv.value);
  // Scan in tie priority order; take the first option attaining the max.
  const std::array<nccm::OptionKind, 3> priority{
      nccm::OptionKind::safe, nccm::OptionKind::invest,
      nccm::OptionKind::punish};
  TokenSplit split;
  for (nccm::OptionKind kind : priority) {
    for (const auto& pv : probs) {
      if (pv.option == kind && pv.value == best) {
        split_field(split, kind) = token_budget;
        return split;
      }
    }
  }
  throw std::logic_error("argmax allocation found no maximal option");
}

ChoiceDataset simulate_dataset(std::span<const AgentProfile> agents,
                               std::span<const TreatmentId> treatments,
                               AllocationRule rule, std::uint64_t master_seed,
                               unsigned workers) {
  std::vector<TreatmentId> ts(treatments.begin(), treatments.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  if (ts.empty()) {
    throw std::invalid_argument("at least one treatment is required");
  }

  const std::size_t per_agent = ts.size() * transfer_levels.size();
  ChoiceDataset dataset;
  dataset.master_seed = master_seed;
  dataset.rule = rule;
  dataset.rows.resize(agents.size() * per_agent);

  auto fill_agent = [&](std::size_t ai) {
    const AgentProfile& agent = agents[ai];
    const nccm::PartworthSchedule schedule(agent.schedule);
    std::size_t slot = ai * per_agent;
    for (TreatmentId id : ts) {
      for (int t : transfer_levels) {
        const auto utilities =
            nccm::deterministic_utilities(id, schedule.at(t), agent.params);
        const auto probs =
            nccm::choice_probabilities(utilities, agent.params.logit_scale);
        TokenSplit split;
        switch (rule) {
          case AllocationRule::expected_share:
            split = allocate_expected_share(probs);
            break;
          case AllocationRule::multinomial_tokens: {
            std::mt19937_64 rng(row_seed(agent.stream_seed, id, t));
            split = allocate_multinomial(probs, rng);
            break;
          }
          case AllocationRule::argmax_all_in:
            split = allocate_argmax(probs);
            break;
        }
        DatasetRow& row = dataset.rows[slot++];
        row.agent_id = agent.id;
        row.treatment = id;
        row.transfer = t;
        row.deduction = split.punish;
        row.investment = split.invest;
        row.safe = split.safe;
        row.punisher = split.punish > 0;
        row.investor = split.invest > 0;
        row.risk_class = agent.risk;
        row.seed = agent.stream_seed;
      }
    }
  };

  const unsigned n_workers = std::max(1u, workers);
  if (n_workers == 1 || agents.size() < 2) {
    for (std::size_t ai = 0; ai < agents.size(); ++ai) fill_agent(ai);
  } else {
    const std::size_t n = agents.size();
    const unsigned used = static_cast<unsigned>(
        std::min<std::size_t>(n_workers, n));
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(used);
    for (unsigned w = 0; w < used; ++w) {
      const std::size_t begin = n * w / used;
      const std::size_t end = n * (w + 1) / used;
      threads.emplace_back([&, w, begin, end] {
        try {
          for (std::size_t ai = begin; ai < end; ++ai) fill_agent(ai);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& thread : threads) thread.join();
    for (const std::exception_ptr& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  return dataset;
}

void validate_dataset(const ChoiceDataset& dataset) {
  std::map<std::pair<std::uint64_t, TreatmentId>, std::vector<int>> blocks;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    const DatasetRow& row = dataset.rows[i];
    const auto fail = [&](const std::string& what) {
      std::ostringstream msg;
      msg << "dataset row " << i << " (agent " << row.agent_id << ", "
          << to_string(row.treatment) << ", t=" << row.transfer
          << "): " << what;
      throw std::runtime_error(msg.str());
    };
    if (!is_transfer_level(row.transfer)) fail("invalid transfer level");
    if (row.deduction < 0 || row.investment < 0 || row.safe < 0) {
      fail("negative token count");
    }
    if (row.deduction + row.investment + row.safe != token_budget) {
      fail("token counts must sum to the 50-token budget");
    }
    const Treatment& tr = treatment(row.treatment);
    if (row.deduction > 0 && !tr.punishment_available) {
      fail("deduction spent where punishment is unavailable");
    }
    if (row.investment > 0 && !tr.investment_available) {
      fail("investment spent where investment is unavailable");
    }
    if (row.punisher != (row.deduction > 0)) fail("punisher flag mismatch");
    if (row.investor != (row.investment > 0)) fail("investor flag mismatch");
    blocks[{row.agent_id, row.treatment}].push_back(row.transfer);
  }
  for (auto& [key, transfers] : blocks) {
    std::sort(transfers.begin(), transfers.end());
    const std::vector<int> expected(transfer_levels.begin(),
                                    transfer_levels.end());
    if (transfers != expected) {
      std::ostringstream msg;
      msg << "agent " << key.first << ", treatment " << to_string(key.second)
          << ": expected one row per transfer level";
      throw std::runtime_error(msg.str());
    }
  }
}

std::vector<AgentMeasures> derive_measures(const ChoiceDataset& dataset) {
  validate_dataset(dataset);
  std::map<std::pair<std::uint64_t, TreatmentId>, std::array<DatasetRow, 6>>
      blocks;
  for (const DatasetRow& row : dataset.rows) {
    blocks[{row.agent_id, row.treatment}][row.transfer / 10] = row;
  }
  auto mean_of = [](const std::array<double, 6>& v) {
    double total = 0;
    for (double x : v) total += x;
    return total / 6.0;
  };
  auto median_of = [](std::array<double, 6> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[2] + v[3]);
  };
  std::vector<AgentMeasures> out;
  out.reserve(blocks.size());
  for (const auto& [key, rows] : blocks) {
    AgentMeasures m;
    m.agent_id = key.first;
    m.treatment = key.second;
    std::array<double, 6> ded, inv, safe;
    for (int k = 0; k < 6; ++k) {
      ded[k] = rows[k].deduction;
      inv[k] = rows[k].investment;
      safe[k] = rows[k].safe;
      m.punished_at[k] = rows[k].punisher;
      m.invested_at[k] = rows[k].investor;
    }
    m.mean_punishment = mean_of(ded);
    m.median_punishment = median_of(ded);
    m.mean_investment = mean_of(inv);
    m.median_investment = median_of(inv);
    m.mean_safe = mean_of(safe);
    m.median_safe = median_of(safe);
    out.push_back(m);
  }
  return out;
}

namespace {

std::string_view risk_label(const std::optional<RiskClass>& risk) {
  return risk ? holt_laury::to_string(*risk) : std::string_view("NA");
}

}  // namespace

void write_dataset_csv(std::ostream& out, const ChoiceDataset& dataset) {
  out << "agent_id,treatment,transfer,deduction,investment,safe,punisher,"
         "investor,risk_class,seed\n";
  for (const DatasetRow& row : dataset.rows) {
    out << row.agent_id << ',' << to_string(row.treatment) << ','
        << row.transfer << ',' << row.deduction << ',' << row.investment << ','
        << row.safe << ',' << (row.punisher ? 1 : 0) << ','
        << (row.investor ? 1 : 0) << ',' << risk_label(row.risk_class) << ','
        << row.seed << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

[[noreturn]] void csv_fail(std::size_t line_no, const std::string& field,
                           const std::string& what) {
  std::ostringstream msg;
  msg << "dataset CSV line " << line_no << ": field '" << field
      << "': " << what;
  throw std::runtime_error(msg.str());
}

template <typename Int>
Int parse_int_field(const std::string& text, std::size_t line_no,
                    const char* field) {
  Int value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    csv_fail(line_no, field, "expected an integer, got '" + text + "'");
  }
  return value;
}

}  // namespace

ChoiceDataset read_dataset_csv(std::istream& in) {
  static const std::string expected_header =
      "agent_id,treatment,transfer,deduction,investment,safe,punisher,"
      "investor,risk_class,seed";
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("dataset CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw std::runtime_error("dataset CSV header must be '" + expected_header +
                             "'");
  }
  ChoiceDataset dataset;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 10) {
      std::ostringstream msg;
      msg << "dataset CSV line " << line_no << ": expected 10 fields, got "
          << fields.size();
      throw std::runtime_error(msg.str());
    }
    DatasetRow row;
    row.agent_id = parse_int_field<std::uint64_t>(fields[0], line_no,
                                                  "agent_id");
    const auto id = parse_treatment(fields[1]);
    if (!id) csv_fail(line_no, "treatment", "unknown treatment '" + fields[1] + "'");
    row.treatment = *id;
    row.transfer = parse_int_field<int>(fields[2], line_no, "transfer");
    row.deduction = parse_int_field<int>(fields[3], line_no, "deduction");
    row.investment = parse_int_field<int>(fields[4], line_no, "investment");
    row.safe = parse_int_field<int>(fields[5], line_no, "safe");
    for (std::size_t k : {std::size_t{6}, std::size_t{7}}) {
      if (fields[k] != "0" && fields[k] != "1") {
        csv_fail(line_no, k == 6 ? "punisher" : "investor",
                 "expected 0 or 1, got '" + fields[k] + "'");
      }
    }
    row.punisher = fields[6] == "1";
    row.investor = fields[7] == "1";
    if (fields[8] == "NA") {
      row.risk_class = std::nullopt;
    } else if (fields[8] == "Neutral") {
      row.risk_class = RiskClass::neutral;
    } else if (fields[8] == "Averse") {
      row.risk_class = RiskClass::averse;
    } else if (fields[8] == "Loving") {
      row.risk_class = RiskClass::loving;
    } else if (fields[8] == "Inconsistent") {
      row.risk_class = RiskClass::inconsistent;
    } else {
      csv_fail(line_no, "risk_class",
               "expected NA or a risk class, got '" + fields[8] + "'");
    }
    row.seed = parse_int_field<std::uint64_t>(fields[9], line_no, "seed");
    dataset.rows.push_back(row);
  }
  validate_dataset(dataset);
  return dataset;
}

std::string manifest_json(const PopulationSpec& spec,
                          std::span<const TreatmentId> treatments,
                          AllocationRule rule, unsigned workers,
                          const std::optional<std::string>& timestamp) {
  nlohmann::json doc;
  doc["format"] = "context-tpp-dataset-1";
  doc["code_version"] = "0.1.0";
  doc["rule"] = std::string(to_string(rule));
  doc["workers"] = workers;
  nlohmann::json pop;
  pop["n_agents"] = spec.n_agents;
  pop["master_seed"] = spec.master_seed;
  pop["concavity"] = {spec.concavity.lo, spec.concavity.hi};
  pop["logit_scale"] = {spec.logit_scale.lo, spec.logit_scale.hi};
  pop["psych_gap_punish"] = {spec.psych_gap_punish.lo, spec.psych_gap_punish.hi};
  pop["psych_gap_invest"] = {spec.psych_gap_invest.lo, spec.psych_gap_invest.hi};
  pop["material"] = {spec.material_punish, spec.material_invest,
                     spec.material_safe};
  pop["risk_annotation"] = std::string(risk_label(spec.risk_annotation));
  doc["population"] = pop;
  nlohmann::json ts = nlohmann::json::array();
  for (TreatmentId id : treatments) ts.push_back(std::string(to_string(id)));
  doc["treatments"] = ts;
  doc["rng"] = {
      {"generator", "std::mt19937_64"},
      {"agent_stream", "splitmix64(master_seed + (index+1)*0x9E3779B97F4A7C15)"},
      {"row_stream",
       "splitmix64(agent_stream ^ ((treatment*8 + transfer/10 + 1)*"
       "0x9E3779B97F4A7C15))"},
      {"uniform", "(word >> 11) * 2^-53"},
  };
  if (timestamp) doc["timestamp"] = *timestamp;
  return doc.dump(2) + "\n";
}

}  // namespace tpp::sim
