#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "causat/graph.hpp"

namespace causat {

enum class Status : std::uint8_t { unknown, present, absent };

std::string_view to_string(Status s);

/// Model-space restrictions.
struct Assumptions {
  bool no_latents = false;
  bool acyclic = false;

  bool admits(const MixedGraph& g) const;
  bool operator==(const Assumptions&) const = default;
};

/// Status of every candidate directed edge, bidirected edge and ancestral
/// relation. A determinate status never changes once set.
class EdgeSolution {
 public:
  EdgeSolution() = default;
  explicit EdgeSolution(int node_count);

  int node_count() const { return n_; }

  Status directed(int from, int to) const { return directed_[index(from, to)]; }
  Status bidirected(int a, int b) const { return bidirected_[index(std::min(a, b), std::max(a, b))]; }
  Status ancestral(int from, int to) const { return ancestral_[index(from, to)]; }

  /// Setting a directed edge present also marks the ancestral relation present.
  void set_directed(int from, int to, Status s);
  void set_bidirected(int a, int b, Status s);
  void set_ancestral(int from, int to, Status s);

  /// Number of determinate directed + bidirected statuses.
  int determined_edges() const;
  int determined_ancestral() const;

  bool operator==(const EdgeSolution&) const = default;

 private:
  std::size_t index(int a, int b) const { return static_cast<std::size_t>(a) * n_ + b; }
  static void update(Status& slot, Status s);

  int n_ = 0;
  std::vector<Status> directed_;
  std::vector<Status> bidirected_;
  std::vector<Status> ancestral_;
};

/// Statuses that every graph in the set agrees on.
class SolutionAccumulator {
 public:
  explicit SolutionAccumulator(int node_count);
  void add(const MixedGraph& g);
  std::size_t count() const { return count_; }
  EdgeSolution result() const;

 private:
  int n_;
  std::size_t count_ = 0;
  std::vector<std::uint32_t> directed_, bidirected_, ancestral_;  // times present
};

}  // namespace causat
