#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causat/discovery.hpp"
#include "causat/graph.hpp"

namespace causat {

/// Ground-truth model class of generated instances.
enum class Restriction { none, acyclic, no_latents, both };
std::string_view to_string(Restriction r);
Assumptions assumptions_of(Restriction r);

struct InstanceSpec {
  int nodes = 8;
  double edge_prob = 0.2;
  int experiments = 10;
  std::uint64_t seed = 0;
  Restriction restriction = Restriction::none;
};

struct Instance {
  MixedGraph truth;
  std::vector<Experiment> experiments;
};

/// Draws the graph, then (for acyclic classes) a node order whose backward
/// directed edges are dropped, then the experiments. Latent-free classes drop
/// bidirected edges.
Instance make_instance(const InstanceSpec& spec);

/// Seed of instance `index` under a master seed (splitmix64).
std::uint64_t instance_seed(std::uint64_t master, std::uint64_t index);

enum class Category { directed_present, directed_absent, bidirected_present, bidirected_absent, ancestral_present,
                      ancestral_absent };
inline constexpr std::size_t kCategoryCount = 6;
std::string_view to_string(Category c);

/// Identified items per category, measured against the ground truth.
struct Counts {
  std::array<std::uint32_t, kCategoryCount> identified{};
  std::array<std::uint32_t, kCategoryCount> total{};
  /// Determinate statuses that disagree with the ground truth.
  std::uint32_t false_statuses = 0;

  /// Proportion for one category; nullopt when the truth has no such item.
  std::optional<double> proportion(Category c) const;
  /// Determinate items over all items that were evaluated.
  double determinate_fraction() const;
  Counts& operator+=(const Counts& o);
};

Counts evaluate(const MixedGraph& truth, const EdgeSolution& s, bool ancestral);

struct RunMetrics {
  double seconds = 0.0;
  bool timed_out = false;
  Counts counts;
  DiscoveryStats stats;
  EdgeSolution solution;
};

/// Throws std::invalid_argument when the assumptions exclude the truth.
RunMetrics run_instance(const Instance& instance, const DiscoveryConfig& config);

struct HarnessOptions {
  int instances = 20;
  std::uint64_t seed = 1;
  double edge_prob = 0.2;
  int experiments = 10;
  std::optional<std::chrono::steady_clock::duration> timeout;
  std::string backend = "embedded";
};

struct ScalingRow {
  int nodes = 0;
  std::optional<int> max_c;
  int completed = 0;
  int timeouts = 0;
  /// Timed-out runs count as slower than every completed one.
  double median_seconds = 0.0;
  std::vector<double> seconds;
};

/// Per node count, median wall time over the instance stream. The stream
/// depends only on the seed, so capped and uncapped runs see the same
/// instances.
std::vector<ScalingRow> run_scaling(const std::vector<int>& sizes, std::optional<int> max_c,
                                    const HarnessOptions& options);

struct IdentifiabilityRow {
  int max_c = 0;
  /// Mean over instances of the per-instance proportion (instances without
  /// items of a category are left out of that category's mean).
  std::array<std::optional<double>, kCategoryCount> mean{};
  Counts pooled;
  int timeouts = 0;
};

/// For max_c = 0..nodes-2, runs discovery with ancestral tracking on the same
/// instance stream and measures identified proportions.
std::vector<IdentifiabilityRow> run_identifiability(int nodes, const HarnessOptions& options);

struct AssumptionRow {
  Restriction truth = Restriction::none;
  Restriction assumed = Restriction::none;
  double mean_determinate = 0.0;
  Counts pooled;
  int timeouts = 0;
  /// Instances where this assumption set determined fewer items than some
  /// weaker valid assumption set.
  int shrinks = 0;
};

/// For each ground-truth class, runs every assumption set the truth
/// satisfies on the same instances.
std::vector<AssumptionRow> run_assumption_comparison(int nodes, const HarnessOptions& options,
                                                     const std::vector<Restriction>& classes = {
                                                         Restriction::none, Restriction::acyclic,
                                                         Restriction::no_latents, Restriction::both});

/// Tab-separated tables with a header row.
std::string scaling_tsv(const std::vector<ScalingRow>& rows);
std::string identifiability_tsv(const std::vector<IdentifiabilityRow>& rows);
std::string assumptions_tsv(const std::vector<AssumptionRow>& rows);

double median(std::vector<double> values);

}  // namespace causat
