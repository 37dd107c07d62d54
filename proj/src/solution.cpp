#include "causat/solution.hpp"

#include <stdexcept>

namespace causat {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::present:
      return "present";
    case Status::absent:
      return "absent";
    case Status::unknown:
      break;
  }
  return "unknown";
}

bool Assumptions::admits(const MixedGraph& g) const {
  if (no_latents && g.bidirected_count() > 0) return false;
  if (acyclic && !is_acyclic(g)) return false;
  return true;
}

EdgeSolution::EdgeSolution(int node_count)
    : n_(node_count),
      directed_(static_cast<std::size_t>(node_count) * node_count, Status::unknown),
      bidirected_(directed_),
      ancestral_(directed_) {}

void EdgeSolution::update(Status& slot, Status s) {
  if (s == Status::unknown || slot == s) return;
  if (slot != Status::unknown) throw std::logic_error("determinate status cannot change");
  slot = s;
}

void EdgeSolution::set_directed(int from, int to, Status s) {
  update(directed_[index(from, to)], s);
  if (s == Status::present) update(ancestral_[index(from, to)], Status::present);
}

void EdgeSolution::set_bidirected(int a, int b, Status s) {
  update(bidirected_[index(std::min(a, b), std::max(a, b))], s);
}

void EdgeSolution::set_ancestral(int from, int to, Status s) { update(ancestral_[index(from, to)], s); }

int EdgeSolution::determined_edges() const {
  int count = 0;
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      if (a == b) continue;
      if (directed(a, b) != Status::unknown) ++count;
      if (a < b && bidirected(a, b) != Status::unknown) ++count;
    }
  }
  return count;
}

int EdgeSolution::determined_ancestral() const {
  int count = 0;
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      if (a != b && ancestral(a, b) != Status::unknown) ++count;
    }
  }
  return count;
}

SolutionAccumulator::SolutionAccumulator(int node_count)
    : n_(node_count),
      directed_(static_cast<std::size_t>(node_count) * node_count, 0),
      bidirected_(directed_),
      ancestral_(directed_) {}

void SolutionAccumulator::add(const MixedGraph& g) {
  ++count_;
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      if (a == b) continue;
      const std::size_t i = static_cast<std::size_t>(a) * n_ + b;
      if (g.has_directed(a, b)) ++directed_[i];
      if (a < b && g.has_bidirected(a, b)) ++bidirected_[i];
      if (has_directed_path(g, a, b)) ++ancestral_[i];
    }
  }
}

EdgeSolution SolutionAccumulator::result() const {
  EdgeSolution s(n_);
  if (count_ == 0) return s;
  auto status = [&](std::uint32_t present) {
    if (present == count_) return Status::present;
    if (present == 0) return Status::absent;
    return Status::unknown;
  };
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      if (a == b) continue;
      const std::size_t i = static_cast<std::size_t>(a) * n_ + b;
      s.set_ancestral(a, b, status(ancestral_[i]));
      s.set_directed(a, b, status(directed_[i]));
      if (a < b) s.set_bidirected(a, b, status(bidirected_[i]));
    }
  }
  return s;
}

}  // namespace causat
