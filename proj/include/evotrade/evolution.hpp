#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "evotrade/genome.hpp"
#include "evotrade/market_data.hpp"
#include "evotrade/training.hpp"

namespace evotrade {

enum class MutationKind {
  clone,
  add_edge,
  add_recurrent_edge,
  enable_edge,
  disable_edge,
  split_edge,
  add_node,
  enable_node,
  disable_node,
  split_node,
  merge_node,
};

inline constexpr std::size_t kMutationKinds = 11;
inline constexpr std::array<MutationKind, kMutationKinds> kAllMutations = {
    MutationKind::clone,       MutationKind::add_edge,    MutationKind::add_recurrent_edge, MutationKind::enable_edge,
    MutationKind::disable_edge, MutationKind::split_edge, MutationKind::add_node,           MutationKind::enable_node,
    MutationKind::disable_node, MutationKind::split_node, MutationKind::merge_node};

std::string_view to_string(MutationKind kind);

struct EvoConfig {
  int n_islands = 10;
  int capacity = 10;
  long total_evaluations = 2000;
  double mutation_rate = 0.7;
  double crossover_rate = 0.3;
  double inter_island_fraction = 1.0 / 3.0;  // share of crossovers that pull a parent from another island
  std::array<double, kMutationKinds> mutation_weights = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  int time_skip_max = kMaxTimeSkip;
  long repopulation_period = 400;
  double new_weight_range = 0.5;  // fresh genes draw U(-range, range)
  std::vector<CellKind> hidden_cells = {CellKind::simple, CellKind::lstm, CellKind::gru, CellKind::mgu};

  void check() const;
};

struct Island {
  int id = 0;
  std::vector<Genome> members;  // ascending fitness
  double best_fitness_seen = std::numeric_limits<double>::infinity();
  long evaluations_since_improvement = 0;

  const Genome* best() const { return members.empty() ? nullptr : &members.front(); }
  double best_fitness() const;
};

/// Evolution state. Owned by the coordinator; workers never touch it.
struct Population {
  Population(EvoConfig config, std::uint64_t seed);

  EvoConfig config;
  std::vector<Island> islands;
  GeneId innovation_counter = 0;  // next id to hand out for nodes and edges
  GeneId next_genome_id = 0;
  std::mt19937_64 rng;
  long evaluations_total = 0;
  std::optional<Genome> global_best;

  GeneId next_innovation() { return innovation_counter++; }
  int island_holding_global_best() const;
};

/// 7 inputs wired directly to the single output. Node and edge ids are fixed so every seed
/// aligns under crossover; weights are drawn from the population rng.
Genome seed_genome(Population& population);

/// Always produces a valid child. Kinds that cannot apply to this parent degrade to a clone.
Genome mutate(const Genome& parent, MutationKind kind, Population& population);

/// Union of both parents' genes aligned by id; shared genes take the fitter parent's values.
Genome crossover(const Genome& a, const Genome& b, Population& population);

/// Steady-state insertion into genome.island. Returns false when the island is full and the
/// genome is not strictly better than its worst member.
bool insert(Population& population, Genome genome);

/// Trains and scores a genome in place, setting its fitness.
using GenomeEvaluator = std::function<void(Genome&)>;
using InsertObserver = std::function<void(const Genome&, bool accepted)>;

/// Clears the island whose best member is worst (lowest id on ties, skipping the island that
/// holds the global best) and refills it with single-mutation copies of the global best,
/// each passed through `evaluate` to set its fitness. Returns the island id, or -1.
int repopulate_worst_island(Population& population, const GenomeEvaluator& evaluate,
                            const InsertObserver& observer = {});

/// Builds one offspring from a random island: mutation or intra/inter-island crossover.
Genome generate_offspring(Population& population);

struct EvolutionLogEntry {
  long evaluation_index = 0;
  int island = 0;
  std::string op;
  std::vector<GeneId> parent_ids;
  double fitness = 0.0;  // NaN when the evaluation failed
  double global_best_fitness = 0.0;
};

struct EvolutionResult {
  Genome best;
  double seed_fitness = 0.0;
  std::uint64_t seed = 0;
  std::vector<EvolutionLogEntry> log;
};

/// The evolution loop with a caller-supplied evaluator. Every island starts from one trained
/// seed genome, which does not count against the budget. A failed evaluation is retried once,
/// then logged with a NaN fitness and skipped.
EvolutionResult evolve_with(const EvoConfig& config, int workers, std::uint64_t seed, const GenomeEvaluator& work);

/// Island-model steady-state search. With one worker the run is a pure function of the
/// seed; with more, insertion order depends on scheduling and is recorded in the log.
EvolutionResult evolve(const StockDataset& dataset, const EvoConfig& config, const TrainConfig& train_config,
                       int workers, std::uint64_t seed);

/// One header line, then `evaluation_index,island_id,operator,parent_ids,fitness,global_best_fitness`
/// records with parent ids separated by ';'.
std::string format_evolution_log(const std::vector<EvolutionLogEntry>& log);

}  // namespace evotrade
