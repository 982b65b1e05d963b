// Seeded synthetic populations of model agents and strategy-method choice
// datasets.  Every random quantity derives from a documented split of one
// master seed, so output is byte-identical for a given spec regardless of
// how the work is partitioned across workers.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tpp/game.hpp"
#include "tpp/holt_laury.hpp"
#include "tpp/nccm.hpp"

namespace tpp::sim {

using holt_laury::RiskClass;

// Closed interval; a point mass when lo == hi.
struct ParamRange {
  double lo = 0;
  double hi = 0;
  bool is_point() const { return lo == hi; }
};

struct PopulationSpec {
  std::size_t n_agents = 100;
  std::uint64_t master_seed = 0;
  // Shared concavity for both attributes.
  ParamRange concavity{0.35, 0.35};
  ParamRange logit_scale{0.05, 0.05};
  ParamRange psych_gap_punish{50, 50};
  ParamRange psych_gap_invest{25, 25};
  double material_punish = 0;
  double material_invest = 25;
  double material_safe = 50;
  // Optional label copied onto every agent's rows.
  std::optional<RiskClass> risk_annotation;

  // Bounds must keep every possible draw inside the model's parameter
  // domain (including strict gap ordering across the two ranges).
  void validate() const;
};

struct AgentProfile {
  std::uint64_t id = 0;
  nccm::NccmParams params;
  nccm::ScheduleConfig schedule;
  std::optional<RiskClass> risk;
  std::uint64_t stream_seed = 0;
};

// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);
// Seed of agent i's private stream: splitmix64(master + (i+1) * golden).
// Distinct indices give distinct seeds.
std::uint64_t agent_stream_seed(std::uint64_t master_seed, std::uint64_t index);
// Seed of the token-draw stream for one dataset row; depends only on the
// agent, treatment, and transfer, never on the run composition.
std::uint64_t row_seed(std::uint64_t stream_seed, TreatmentId id, int t);

// Uniform double in [0, 1) from the top 53 bits of one generator word.
double uniform_unit(std::mt19937_64& rng);
double uniform_in(std::mt19937_64& rng, const ParamRange& range);

// Draws each agent's parameters from its own stream, in a fixed order.
std::vector<AgentProfile> sample_population(const PopulationSpec& spec);

enum class AllocationRule { expected_share, multinomial_tokens, argmax_all_in };
std::string_view to_string(AllocationRule rule);
std::optional<AllocationRule> parse_rule(std::string_view text);

struct TokenSplit {
  int punish = 0;
  int invest = 0;
  int safe = 0;
};

// Largest-remainder rounding of 50 * probability per option; leftover
// tokens go to the largest fractional parts, ties resolved safe, then
// invest, then punish.
TokenSplit allocate_expected_share(std::span<const nccm::OptionValue> probs);
// 50 independent categorical draws.
TokenSplit allocate_multinomial(std::span<const nccm::OptionValue> probs,
                                std::mt19937_64& rng);
// All 50 tokens on the modal option; ties resolved safe, then invest,
// then punish.
TokenSplit allocate_argmax(std::span<const nccm::OptionValue> probs);

struct DatasetRow {
  std::uint64_t agent_id = 0;
  TreatmentId treatment = TreatmentId::P;
  int transfer = 0;
  int deduction = 0;
  int investment = 0;
  int safe = 0;
  bool punisher = false;
  bool investor = false;
  std::optional<RiskClass> risk_class;
  std::uint64_t seed = 0;  // the agent's stream seed

  bool operator==(const DatasetRow&) const = default;
};

struct ChoiceDataset {
  std::vector<DatasetRow> rows;
  std::uint64_t master_seed = 0;
  AllocationRule rule = AllocationRule::multinomial_tokens;
};

// One row per agent x treatment x transfer level, ordered by (agent,
// treatment in enum order, transfer).  `workers` only partitions the work;
// it never changes the rows.
ChoiceDataset simulate_dataset(std::span<const AgentProfile> agents,
                               std::span<const TreatmentId> treatments,
                               AllocationRule rule, std::uint64_t master_seed,
                               unsigned workers = 1);

// Row-level invariants: budget identity, flag consistency, availability,
// and the six-level block structure per agent and treatment.
void validate_dataset(const ChoiceDataset& dataset);

struct AgentMeasures {
  std::uint64_t agent_id = 0;
  TreatmentId treatment = TreatmentId::P;
  double mean_punishment = 0;
  double median_punishment = 0;
  double mean_investment = 0;
  double median_investment = 0;
  double mean_safe = 0;
  double median_safe = 0;
  std::array<bool, 6> punished_at{};  // indexed by transfer / 10
  std::array<bool, 6> invested_at{};
};

std::vector<AgentMeasures> derive_measures(const ChoiceDataset& dataset);

void write_dataset_csv(std::ostream& out, const ChoiceDataset& dataset);
// Parses and validates; throws std::runtime_error naming the line and
// field on malformed input.
ChoiceDataset read_dataset_csv(std::istream& in);

// JSON run manifest describing the population, rule, and seed scheme.
std::string manifest_json(const PopulationSpec& spec,
                          std::span<const TreatmentId> treatments,
                          AllocationRule rule, unsigned workers,
                          const std::optional<std::string>& timestamp);

}  // namespace tpp::sim
