#include "evotrade/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "evotrade/network.hpp"
#include "evotrade/numeric_io.hpp"

namespace evotrade {

namespace {

constexpr GeneId kSeedOutputId = kGenomeInputs;
constexpr GeneId kFirstFreeId = kGenomeInputs + kGenomeOutputs + kGenomeInputs;

double fresh_weight(Population& pop) {
  const double r = pop.config.new_weight_range;
  return std::uniform_real_distribution<double>(-r, r)(pop.rng);
}

template <typename T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

NodeGene fresh_hidden_node(Population& pop, double depth, std::optional<CellKind> cell = std::nullopt) {
  NodeGene node;
  node.id = pop.next_innovation();
  node.kind = NodeKind::hidden;
  node.cell = cell ? *cell : pick(pop.config.hidden_cells, pop.rng);
  node.depth = depth;
  node.params.resize(cell_parameter_count(NodeKind::hidden, node.cell));
  for (auto& p : node.params) p = fresh_weight(pop);
  return node;
}

void add_edge_gene(Genome& g, Population& pop, GeneId source, GeneId target) {
  g.edges.push_back({pop.next_innovation(), source, target, fresh_weight(pop), true});
}

int fresh_time_skip(Population& pop) {
  return std::uniform_int_distribution<int>(1, pop.config.time_skip_max)(pop.rng);
}

/// Nodes currently on an input-to-output path, as pointers into g.
std::vector<const NodeGene*> active_nodes(const Genome& g) {
  const auto active = compute_active(g);
  std::vector<const NodeGene*> out;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (active.node[i]) out.push_back(&g.nodes[i]);
  return out;
}

bool connected(const Genome& g) { return !check_invariants(g).has_value(); }

// Each try_* edits `child` in place and reports whether the mutation applied.

bool try_add_edge(Genome& child, Population& pop) {
  std::set<std::pair<GeneId, GeneId>> existing;
  for (const auto& e : child.edges) existing.emplace(e.source, e.target);
  std::vector<std::pair<GeneId, GeneId>> candidates;
  for (const auto& a : child.nodes) {
    if (!a.enabled) continue;
    for (const auto& b : child.nodes) {
      if (!b.enabled || !(a.depth < b.depth)) continue;
      if (!existing.count({a.id, b.id})) candidates.emplace_back(a.id, b.id);
    }
  }
  if (candidates.empty()) return false;
  const auto [s, t] = pick(candidates, pop.rng);
  add_edge_gene(child, pop, s, t);
  return true;
}

bool try_add_recurrent_edge(Genome& child, Population& pop) {
  std::vector<GeneId> sources, targets;
  for (const auto& n : child.nodes) {
    if (!n.enabled) continue;
    sources.push_back(n.id);
    if (n.kind != NodeKind::input) targets.push_back(n.id);
  }
  std::set<std::tuple<GeneId, GeneId, int>> existing;
  for (const auto& e : child.recurrent_edges) existing.emplace(e.source, e.target, e.time_skip);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const GeneId s = pick(sources, pop.rng);
    const GeneId t = pick(targets, pop.rng);
    const int skip = fresh_time_skip(pop);
    if (existing.count({s, t, skip})) continue;
    child.recurrent_edges.push_back({pop.next_innovation(), s, t, fresh_weight(pop), true, skip});
    return true;
  }
  return false;
}

bool try_enable_edge(Genome& child, Population& pop) {
  std::vector<bool*> disabled;
  for (auto& e : child.edges)
    if (!e.enabled) disabled.push_back(&e.enabled);
  for (auto& e : child.recurrent_edges)
    if (!e.enabled) disabled.push_back(&e.enabled);
  if (disabled.empty()) return false;
  *pick(disabled, pop.rng) = true;
  return true;
}

/// Tries candidates in random order, keeping the first toggle that leaves the genome connected.
bool disable_first_safe(Genome& child, std::vector<bool*> flags, Population& pop) {
  std::shuffle(flags.begin(), flags.end(), pop.rng);
  for (bool* flag : flags) {
    *flag = false;
    if (connected(child)) return true;
    *flag = true;
  }
  return false;
}

bool try_disable_edge(Genome& child, Population& pop) {
  std::vector<bool*> enabled;
  for (auto& e : child.edges)
    if (e.enabled) enabled.push_back(&e.enabled);
  for (auto& e : child.recurrent_edges)
    if (e.enabled) enabled.push_back(&e.enabled);
  return disable_first_safe(child, std::move(enabled), pop);
}

bool try_split_edge(Genome& child, Population& pop) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < child.edges.size(); ++i)
    if (child.edges[i].enabled) candidates.push_back(i);
  std::shuffle(candidates.begin(), candidates.end(), pop.rng);
  for (auto i : candidates) {
    const GeneId s = child.edges[i].source;
    const GeneId t = child.edges[i].target;
    const double ds = child.find_node(s)->depth;
    const double dt = child.find_node(t)->depth;
    const double mid = 0.5 * (ds + dt);
    if (!(ds < mid && mid < dt)) continue;
    child.edges[i].enabled = false;
    auto node = fresh_hidden_node(pop, mid);
    const GeneId id = node.id;
    child.nodes.push_back(std::move(node));
    add_edge_gene(child, pop, s, id);
    add_edge_gene(child, pop, id, t);
    return true;
  }
  return false;
}

/// Up to `limit` distinct random picks, at least one.
template <typename T>
std::vector<T> sample_some(std::vector<T> items, std::size_t limit, std::mt19937_64& rng) {
  std::shuffle(items.begin(), items.end(), rng);
  const auto count = std::uniform_int_distribution<std::size_t>(1, std::min(limit, items.size()))(rng);
  items.resize(count);
  return items;
}

bool try_add_node(Genome& child, Population& pop) {
  double depth = 0.0;
  while (depth <= 0.0 || depth >= 1.0) depth = std::uniform_real_distribution<double>(0.0, 1.0)(pop.rng);
  std::vector<GeneId> below, above;
  for (const auto* n : active_nodes(child)) {
    if (n->depth < depth) below.push_back(n->id);
    if (n->depth > depth) above.push_back(n->id);
  }
  if (below.empty() || above.empty()) return false;
  auto node = fresh_hidden_node(pop, depth);
  const GeneId id = node.id;
  child.nodes.push_back(std::move(node));
  for (GeneId s : sample_some(below, 3, pop.rng)) add_edge_gene(child, pop, s, id);
  for (GeneId t : sample_some(above, 3, pop.rng)) add_edge_gene(child, pop, id, t);
  if (std::bernoulli_distribution(0.5)(pop.rng)) {
    child.recurrent_edges.push_back({pop.next_innovation(), id, id, fresh_weight(pop), true, fresh_time_skip(pop)});
  }
  return true;
}

bool try_enable_node(Genome& child, Population& pop) {
  std::vector<bool*> disabled;
  for (auto& n : child.nodes)
    if (n.kind == NodeKind::hidden && !n.enabled) disabled.push_back(&n.enabled);
  if (disabled.empty()) return false;
  *pick(disabled, pop.rng) = true;
  return true;
}

bool try_disable_node(Genome& child, Population& pop) {
  std::vector<bool*> enabled;
  for (auto& n : child.nodes)
    if (n.kind == NodeKind::hidden && n.enabled) enabled.push_back(&n.enabled);
  return disable_first_safe(child, std::move(enabled), pop);
}

bool try_split_node(Genome& child, Population& pop) {
  std::vector<GeneId> candidates;
  for (const auto& n : child.nodes) {
    if (n.kind != NodeKind::hidden || !n.enabled) continue;
    bool has_in = false, has_out = false;
    for (const auto& e : child.edges) {
      if (!e.enabled) continue;
      has_in = has_in || e.target == n.id;
      has_out = has_out || e.source == n.id;
    }
    if (has_in && has_out) candidates.push_back(n.id);
  }
  if (candidates.empty()) return false;
  const GeneId victim = pick(candidates, pop.rng);
  const NodeGene original = *child.find_node(victim);

  std::vector<GeneId> ins, outs;
  for (const auto& e : child.edges) {
    if (!e.enabled) continue;
    if (e.target == victim) ins.push_back(e.source);
    if (e.source == victim) outs.push_back(e.target);
  }
  std::vector<RecurrentEdgeGene> recurrent;
  for (const auto& e : child.recurrent_edges)
    if (e.enabled && (e.source == victim || e.target == victim)) recurrent.push_back(e);
  std::shuffle(ins.begin(), ins.end(), pop.rng);
  std::shuffle(outs.begin(), outs.end(), pop.rng);

  auto first = fresh_hidden_node(pop, original.depth, original.cell);
  auto second = fresh_hidden_node(pop, original.depth, original.cell);
  const GeneId a = first.id;
  const GeneId b = second.id;
  child.nodes.push_back(std::move(first));
  child.nodes.push_back(std::move(second));
  child.find_node(victim)->enabled = false;

  // Halves of the connections go to each replacement; a single connection is shared.
  auto distribute = [&](const std::vector<GeneId>& ends, bool incoming) {
    const std::size_t half = std::max<std::size_t>(1, ends.size() / 2);
    for (std::size_t i = 0; i < ends.size(); ++i) {
      const bool to_first = i < half;
      const bool to_second = i >= half || ends.size() == 1;
      for (GeneId node : {a, b}) {
        if ((node == a && !to_first) || (node == b && !to_second)) continue;
        if (incoming) add_edge_gene(child, pop, ends[i], node);
        else add_edge_gene(child, pop, node, ends[i]);
      }
    }
  };
  distribute(ins, true);
  distribute(outs, false);
  for (const auto& e : recurrent) {
    const GeneId replacement = std::bernoulli_distribution(0.5)(pop.rng) ? a : b;
    const GeneId s = e.source == victim ? replacement : e.source;
    const GeneId t = e.target == victim ? replacement : e.target;
    child.recurrent_edges.push_back({pop.next_innovation(), s, t, fresh_weight(pop), true, e.time_skip});
  }
  return true;
}

bool try_merge_node(Genome& child, Population& pop) {
  std::vector<GeneId> hidden;
  for (const auto& n : child.nodes)
    if (n.kind == NodeKind::hidden && n.enabled) hidden.push_back(n.id);
  if (hidden.size() < 2) return false;
  std::shuffle(hidden.begin(), hidden.end(), pop.rng);
  const GeneId a = hidden[0];
  const GeneId b = hidden[1];
  const double depth = 0.5 * (child.find_node(a)->depth + child.find_node(b)->depth);

  std::set<GeneId> ins, outs;
  for (const auto& e : child.edges) {
    if (!e.enabled) continue;
    if ((e.target == a || e.target == b) && child.find_node(e.source)->depth < depth) ins.insert(e.source);
    if ((e.source == a || e.source == b) && child.find_node(e.target)->depth > depth) outs.insert(e.target);
  }
  std::vector<RecurrentEdgeGene> recurrent;
  for (const auto& e : child.recurrent_edges)
    if (e.enabled && (e.source == a || e.source == b || e.target == a || e.target == b)) recurrent.push_back(e);

  auto node = fresh_hidden_node(pop, depth);
  const GeneId merged = node.id;
  child.nodes.push_back(std::move(node));
  child.find_node(a)->enabled = false;
  child.find_node(b)->enabled = false;

  if (ins.empty()) {
    std::vector<GeneId> below;
    for (const auto* n : active_nodes(child))
      if (n->depth < depth) below.push_back(n->id);
    if (below.empty()) return false;
    ins.insert(pick(below, pop.rng));
  }
  if (outs.empty()) {
    for (const auto& n : child.nodes)
      if (n.kind == NodeKind::output) outs.insert(n.id);
  }
  for (GeneId s : ins) add_edge_gene(child, pop, s, merged);
  for (GeneId t : outs) add_edge_gene(child, pop, merged, t);
  std::set<std::tuple<GeneId, GeneId, int>> seen;
  for (const auto& e : recurrent) {
    const GeneId s = (e.source == a || e.source == b) ? merged : e.source;
    const GeneId t = (e.target == a || e.target == b) ? merged : e.target;
    if (!seen.emplace(s, t, e.time_skip).second) continue;
    child.recurrent_edges.push_back({pop.next_innovation(), s, t, fresh_weight(pop), true, e.time_skip});
  }
  return true;
}

Genome offspring_shell(const Genome& parent, Population& pop) {
  Genome child = parent;
  child.genome_id = pop.next_genome_id++;
  child.fitness.reset();
  child.parents = {parent.genome_id};
  return child;
}

}  // namespace

std::string_view to_string(MutationKind kind) {
  switch (kind) {
    case MutationKind::clone: return "clone";
    case MutationKind::add_edge: return "add_edge";
    case MutationKind::add_recurrent_edge: return "add_recurrent_edge";
    case MutationKind::enable_edge: return "enable_edge";
    case MutationKind::disable_edge: return "disable_edge";
    case MutationKind::split_edge: return "split_edge";
    case MutationKind::add_node: return "add_node";
    case MutationKind::enable_node: return "enable_node";
    case MutationKind::disable_node: return "disable_node";
    case MutationKind::split_node: return "split_node";
    case MutationKind::merge_node: return "merge_node";
  }
  return "?";
}

void EvoConfig::check() const {
  if (n_islands < 1) throw std::invalid_argument("n_islands must be >= 1");
  if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  if (total_evaluations < 0) throw std::invalid_argument("evaluation budget must be >= 0");
  if (mutation_rate < 0 || crossover_rate < 0 || std::abs(mutation_rate + crossover_rate - 1.0) > 1e-12)
    throw std::invalid_argument("mutation_rate and crossover_rate must be non-negative and sum to 1");
  if (inter_island_fraction < 0 || inter_island_fraction > 1)
    throw std::invalid_argument("inter_island_fraction must lie in [0, 1]");
  double total = 0;
  for (double w : mutation_weights) {
    if (w < 0) throw std::invalid_argument("mutation weights must be non-negative");
    total += w;
  }
  if (!(total > 0)) throw std::invalid_argument("at least one mutation weight must be positive");
  if (time_skip_max < 1 || time_skip_max > kMaxTimeSkip)
    throw std::invalid_argument(fmt::format("time_skip_max must lie in [1, {}]", kMaxTimeSkip));
  if (repopulation_period < 0) throw std::invalid_argument("repopulation_period must be >= 0");
  if (!(new_weight_range > 0)) throw std::invalid_argument("new_weight_range must be > 0");
  if (hidden_cells.empty()) throw std::invalid_argument("hidden_cells must not be empty");
}

double Island::best_fitness() const {
  return members.empty() ? std::numeric_limits<double>::infinity() : *members.front().fitness;
}

Population::Population(EvoConfig cfg, std::uint64_t seed) : config(std::move(cfg)), rng(seed) {
  config.check();
  innovation_counter = kFirstFreeId;
  for (int i = 0; i < config.n_islands; ++i) islands.push_back(Island{i, {}, std::numeric_limits<double>::infinity(), 0});
}

int Population::island_holding_global_best() const {
  if (!global_best) return -1;
  for (const auto& island : islands)
    for (const auto& m : island.members)
      if (m.genome_id == global_best->genome_id) return island.id;
  return -1;
}

Genome seed_genome(Population& pop) {
  Genome g;
  g.genome_id = pop.next_genome_id++;
  for (GeneId i = 0; i < kGenomeInputs; ++i) g.nodes.push_back({i, NodeKind::input, CellKind::simple, 0.0, true, {}});
  g.nodes.push_back({kSeedOutputId, NodeKind::output, CellKind::simple, 1.0, true, {0.0}});
  for (GeneId i = 0; i < kGenomeInputs; ++i)
    g.edges.push_back({kSeedOutputId + 1 + i, i, kSeedOutputId, fresh_weight(pop), true});
  g.origin = "seed";
  return g;
}

Genome mutate(const Genome& parent, MutationKind kind, Population& pop) {
  Genome child = offspring_shell(parent, pop);
  bool applied = false;
  switch (kind) {
    case MutationKind::clone: break;
    case MutationKind::add_edge: applied = try_add_edge(child, pop); break;
    case MutationKind::add_recurrent_edge: applied = try_add_recurrent_edge(child, pop); break;
    case MutationKind::enable_edge: applied = try_enable_edge(child, pop); break;
    case MutationKind::disable_edge: applied = try_disable_edge(child, pop); break;
    case MutationKind::split_edge: applied = try_split_edge(child, pop); break;
    case MutationKind::add_node: applied = try_add_node(child, pop); break;
    case MutationKind::enable_node: applied = try_enable_node(child, pop); break;
    case MutationKind::disable_node: applied = try_disable_node(child, pop); break;
    case MutationKind::split_node: applied = try_split_node(child, pop); break;
    case MutationKind::merge_node: applied = try_merge_node(child, pop); break;
  }
  if (applied && connected(child)) {
    child.origin = std::string(to_string(kind));
    return child;
  }
  const GeneId id = child.genome_id;
  child = parent;
  child.genome_id = id;
  child.fitness.reset();
  child.parents = {parent.genome_id};
  child.origin = "clone";
  return child;
}

Genome crossover(const Genome& a, const Genome& b, Population& pop) {
  if (!a.fitness || !b.fitness) throw std::invalid_argument("crossover parents need a fitness");
  const bool a_first = *a.fitness <= *b.fitness;
  const Genome& better = a_first ? a : b;
  const Genome& other = a_first ? b : a;

  std::set<GeneId> better_genes;
  for (const auto& e : better.edges) better_genes.insert(e.innovation);
  for (const auto& e : better.recurrent_edges) better_genes.insert(e.innovation);
  std::size_t aligned = 0;
  for (const auto& e : other.edges) aligned += better_genes.count(e.innovation);
  for (const auto& e : other.recurrent_edges) aligned += better_genes.count(e.innovation);
  if (aligned == 0) throw std::invalid_argument("crossover parents share no aligned genes");

  Genome child = better;
  child.genome_id = pop.next_genome_id++;
  child.fitness.reset();
  child.parents = {a.genome_id, b.genome_id};
  child.origin = "crossover";
  std::set<GeneId> node_ids;
  for (const auto& n : child.nodes) node_ids.insert(n.id);
  for (const auto& n : other.nodes)
    if (!node_ids.count(n.id)) child.nodes.push_back(n);
  for (const auto& e : other.edges)
    if (!better_genes.count(e.innovation)) child.edges.push_back(e);
  for (const auto& e : other.recurrent_edges)
    if (!better_genes.count(e.innovation)) child.recurrent_edges.push_back(e);
  validate(child);
  return child;
}

bool insert(Population& pop, Genome genome) {
  if (!genome.fitness) throw std::invalid_argument("cannot insert a genome without fitness");
  if (genome.island < 0 || genome.island >= static_cast<int>(pop.islands.size()))
    throw std::out_of_range(fmt::format("unknown island id {}", genome.island));
  auto& island = pop.islands[static_cast<std::size_t>(genome.island)];
  const double fitness = *genome.fitness;
  const auto capacity = static_cast<std::size_t>(pop.config.capacity);

  if (fitness < island.best_fitness_seen) {
    island.best_fitness_seen = fitness;
    island.evaluations_since_improvement = 0;
  } else {
    ++island.evaluations_since_improvement;
  }
  if (island.members.size() >= capacity && !(fitness < *island.members.back().fitness)) return false;

  if (!pop.global_best || fitness < *pop.global_best->fitness) pop.global_best = genome;
  auto pos = std::upper_bound(island.members.begin(), island.members.end(), fitness,
                              [](double f, const Genome& m) { return f < *m.fitness; });
  island.members.insert(pos, std::move(genome));
  if (island.members.size() > capacity) island.members.pop_back();
  return true;
}

int repopulate_worst_island(Population& pop, const GenomeEvaluator& evaluate, const InsertObserver& observer) {
  if (!pop.global_best || pop.islands.size() < 2) return -1;
  const int exempt = pop.island_holding_global_best();
  int worst = -1;
  for (const auto& island : pop.islands) {
    if (island.id == exempt) continue;
    if (worst < 0 || island.best_fitness() > pop.islands[static_cast<std::size_t>(worst)].best_fitness())
      worst = island.id;
  }
  if (worst < 0) return -1;
  auto& island = pop.islands[static_cast<std::size_t>(worst)];
  island.members.clear();
  island.best_fitness_seen = std::numeric_limits<double>::infinity();
  island.evaluations_since_improvement = 0;

  const Genome source = *pop.global_best;
  std::discrete_distribution<std::size_t> choose(pop.config.mutation_weights.begin(),
                                                 pop.config.mutation_weights.end());
  for (int k = 0; k < pop.config.capacity; ++k) {
    Genome child = mutate(source, kAllMutations[choose(pop.rng)], pop);
    child.island = worst;
    evaluate(child);
    if (observer) {
      const Genome kept = child;
      observer(kept, insert(pop, std::move(child)));
    } else {
      insert(pop, std::move(child));
    }
  }
  island.evaluations_since_improvement = 0;
  return worst;
}

Genome generate_offspring(Population& pop) {
  std::vector<int> candidates;
  for (const auto& island : pop.islands)
    if (!island.members.empty()) candidates.push_back(island.id);
  if (candidates.empty()) throw std::logic_error("no populated island to breed from");
  const int id = pick(candidates, pop.rng);
  const auto& members = pop.islands[static_cast<std::size_t>(id)].members;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool want_crossover = unit(pop.rng) >= pop.config.mutation_rate;
  Genome child;
  bool made = false;
  if (want_crossover) {
    const bool inter = unit(pop.rng) < pop.config.inter_island_fraction;
    if (inter) {
      std::vector<int> others;
      for (int c : candidates)
        if (c != id) others.push_back(c);
      if (!others.empty()) {
        const auto& donor = *pop.islands[static_cast<std::size_t>(pick(others, pop.rng))].best();
        child = crossover(pick(members, pop.rng), donor, pop);
        child.origin = "inter_crossover";
        made = true;
      }
    } else if (members.size() >= 2) {
      std::uniform_int_distribution<std::size_t> idx(0, members.size() - 1);
      const auto i = idx(pop.rng);
      auto j = idx(pop.rng);
      while (j == i) j = idx(pop.rng);
      child = crossover(members[i], members[j], pop);
      child.origin = "intra_crossover";
      made = true;
    }
  }
  if (!made) {
    std::discrete_distribution<std::size_t> choose(pop.config.mutation_weights.begin(),
                                                   pop.config.mutation_weights.end());
    const auto kind = kAllMutations[choose(pop.rng)];
    child = mutate(pick(members, pop.rng), kind, pop);
  }
  child.island = id;
  return child;
}

namespace {

struct Task {
  long ticket = 0;
  Genome genome;
  int attempts = 0;
};

struct Outcome {
  Task task;
  bool ok = false;
  std::string error;
};

/// Runs tasks either inline (one worker) or on a thread pool.
class WorkerPool {
 public:
  WorkerPool(int workers, std::function<void(Genome&)> work) : work_(std::move(work)) {
    if (workers > 1)
      for (int i = 0; i < workers; ++i) threads_.emplace_back([this] { loop(); });
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    ready_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void submit(Task task) {
    {
      std::lock_guard lock(mutex_);
      tasks_.push_back(std::move(task));
    }
    ready_.notify_one();
  }

  Outcome next() {
    if (threads_.empty()) {
      Task task = std::move(tasks_.front());
      tasks_.pop_front();
      return run(std::move(task));
    }
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return !outcomes_.empty(); });
    Outcome out = std::move(outcomes_.front());
    outcomes_.pop_front();
    return out;
  }

 private:
  Outcome run(Task task) {
    Outcome out;
    try {
      work_(task.genome);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.task = std::move(task);
    return out;
  }

  void loop() {
    while (true) {
      Task task;
      {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] { return stop_ || !tasks_.empty(); });
        if (stop_ && tasks_.empty()) return;
        task = std::move(tasks_.front());
        tasks_.pop_front();
      }
      Outcome out = run(std::move(task));
      {
        std::lock_guard lock(mutex_);
        outcomes_.push_back(std::move(out));
      }
      done_.notify_one();
    }
  }

  std::function<void(Genome&)> work_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable ready_;
  std::condition_variable done_;
  std::deque<Task> tasks_;
  std::deque<Outcome> outcomes_;
  bool stop_ = false;
};

double best_or_nan(const Population& pop) {
  return pop.global_best ? *pop.global_best->fitness : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

EvolutionResult evolve_with(const EvoConfig& config, int workers, std::uint64_t seed,
                            const GenomeEvaluator& work) {
  config.check();
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");

  Population pop(config, seed);
  EvolutionResult result;
  result.seed = seed;
  auto log = [&](long index, const Genome& g, double fitness) {
    result.log.push_back({index, g.island, g.origin, g.parents, fitness, best_or_nan(pop)});
  };

  Genome seed_net = seed_genome(pop);
  work(seed_net);
  result.seed_fitness = *seed_net.fitness;
  for (auto& island : pop.islands) {
    Genome copy = seed_net;
    copy.island = island.id;
    insert(pop, std::move(copy));
  }
  seed_net.island = 0;
  log(0, seed_net, result.seed_fitness);

  WorkerPool pool(workers, work);
  long issued = 0;
  long in_flight = 0;
  auto issue = [&] {
    pool.submit({++issued, generate_offspring(pop), 0});
    ++in_flight;
  };
  while (in_flight < workers && issued < config.total_evaluations) issue();

  while (in_flight > 0) {
    Outcome out = pool.next();
    if (!out.ok && out.task.attempts == 0) {
      ++out.task.attempts;
      pool.submit(std::move(out.task));
      continue;
    }
    --in_flight;
    ++pop.evaluations_total;
    Genome& g = out.task.genome;
    if (out.ok) {
      EvolutionLogEntry entry{pop.evaluations_total, g.island, g.origin, g.parents, *g.fitness, 0.0};
      insert(pop, std::move(g));
      entry.global_best_fitness = best_or_nan(pop);
      result.log.push_back(std::move(entry));
    } else {
      g.origin += "_failed";
      log(pop.evaluations_total, g, std::numeric_limits<double>::quiet_NaN());
    }
    if (config.repopulation_period > 0 && pop.evaluations_total % config.repopulation_period == 0) {
      repopulate_worst_island(pop, work, [&](const Genome& child, bool) {
        log(pop.evaluations_total, child, *child.fitness);
        result.log.back().op = "repopulate_" + result.log.back().op;
      });
    }
    if (issued < config.total_evaluations) issue();
  }
  result.best = *pop.global_best;
  return result;
}

EvolutionResult evolve(const StockDataset& dataset, const EvoConfig& config, const TrainConfig& train_config,
                       int workers, std::uint64_t seed) {
  train_config.check();
  const auto train = dataset.split(Split::train);
  const auto valid = dataset.split(Split::valid);
  if (train.size() < 2) throw std::invalid_argument("train split needs at least 2 rows");
  if (valid.size() == 0) throw std::invalid_argument("validation split is empty");
  return evolve_with(config, workers, seed, [&train, &valid, &train_config](Genome& genome) {
    // Train a copy so a failed attempt leaves the task's genome intact for reissue.
    Genome trained = bptt_train(genome, train, train_config).genome;
    evaluate_validation(trained, valid);
    genome = std::move(trained);
  });
}

std::string format_evolution_log(const std::vector<EvolutionLogEntry>& log) {
  std::string out = "evaluation_index,island_id,operator,parent_ids,fitness,global_best_fitness\n";
  for (const auto& e : log) {
    std::string parents;
    for (std::size_t i = 0; i < e.parent_ids.size(); ++i) {
      if (i > 0) parents += ';';
      parents += std::to_string(e.parent_ids[i]);
    }
    out += fmt::format("{},{},{},{},{},{}\n", e.evaluation_index, e.island, e.op, parents,
                       std::isnan(e.fitness) ? "nan" : format_double(e.fitness),
                       std::isnan(e.global_best_fitness) ? "nan" : format_double(e.global_best_fitness));
  }
  return out;
}

}  // namespace evotrade
