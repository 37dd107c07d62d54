#include "causat/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace causat {

std::string_view to_string(Restriction r) {
  switch (r) {
    case Restriction::acyclic:
      return "acyclic";
    case Restriction::no_latents:
      return "no-latents";
    case Restriction::both:
      return "acyclic+no-latents";
    case Restriction::none:
      break;
  }
  return "none";
}

Assumptions assumptions_of(Restriction r) {
  Assumptions a;
  a.acyclic = r == Restriction::acyclic || r == Restriction::both;
  a.no_latents = r == Restriction::no_latents || r == Restriction::both;
  return a;
}

std::uint64_t instance_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Instance make_instance(const InstanceSpec& spec) {
  Rng rng(spec.seed);
  Instance inst;
  inst.truth = random_graph(spec.nodes, spec.edge_prob, rng);
  const Assumptions a = assumptions_of(spec.restriction);
  if (a.acyclic) {
    // Fisher-Yates with plain modulo draws keeps the order portable.
    std::vector<int> order(spec.nodes);
    std::iota(order.begin(), order.end(), 0);
    for (int i = spec.nodes - 1; i > 0; --i) std::swap(order[i], order[rng() % static_cast<std::uint64_t>(i + 1)]);
    std::vector<int> rank(spec.nodes);
    for (int i = 0; i < spec.nodes; ++i) rank[order[i]] = i;
    for (int x = 0; x < spec.nodes; ++x) {
      for (int y = 0; y < spec.nodes; ++y) {
        if (inst.truth.has_directed(x, y) && rank[x] > rank[y]) inst.truth.remove_directed(x, y);
      }
    }
  }
  if (a.no_latents) {
    for (int x = 0; x < spec.nodes; ++x) {
      for (int y = x + 1; y < spec.nodes; ++y) {
        if (inst.truth.has_bidirected(x, y)) inst.truth.remove_bidirected(x, y);
      }
    }
  }
  inst.experiments = random_experiments(spec.nodes, spec.experiments, rng);
  return inst;
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::directed_present:
      return "dir-present";
    case Category::directed_absent:
      return "dir-absent";
    case Category::bidirected_present:
      return "bidir-present";
    case Category::bidirected_absent:
      return "bidir-absent";
    case Category::ancestral_present:
      return "anc-present";
    case Category::ancestral_absent:
      break;
  }
  return "anc-absent";
}

std::optional<double> Counts::proportion(Category c) const {
  const auto i = static_cast<std::size_t>(c);
  if (total[i] == 0) return std::nullopt;
  return static_cast<double>(identified[i]) / total[i];
}

double Counts::determinate_fraction() const {
  const auto sum_of = [](const auto& a) { return std::accumulate(a.begin(), a.end(), 0.0); };
  const double all = sum_of(total);
  return all == 0 ? 0.0 : sum_of(identified) / all;
}

Counts& Counts::operator+=(const Counts& o) {
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    identified[i] += o.identified[i];
    total[i] += o.total[i];
  }
  false_statuses += o.false_statuses;
  return *this;
}

Counts evaluate(const MixedGraph& truth, const EdgeSolution& s, bool ancestral) {
  Counts c;
  auto tally = [&](bool present, Status st, Category if_present, Category if_absent) {
    const auto i = static_cast<std::size_t>(present ? if_present : if_absent);
    ++c.total[i];
    if (st == Status::unknown) return;
    if ((st == Status::present) == present) {
      ++c.identified[i];
    } else {
      ++c.false_statuses;
    }
  };
  const int n = truth.size();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      tally(truth.has_directed(a, b), s.directed(a, b), Category::directed_present, Category::directed_absent);
      if (a < b) {
        tally(truth.has_bidirected(a, b), s.bidirected(a, b), Category::bidirected_present,
              Category::bidirected_absent);
      }
      if (ancestral) {
        tally(has_directed_path(truth, a, b), s.ancestral(a, b), Category::ancestral_present,
              Category::ancestral_absent);
      }
    }
  }
  return c;
}

RunMetrics run_instance(const Instance& instance, const DiscoveryConfig& config) {
  if (!config.assumptions.admits(instance.truth)) {
    throw std::invalid_argument("assumptions exclude the ground-truth graph");
  }
  RunMetrics m;
  const auto start = std::chrono::steady_clock::now();
  try {
    DiscoveryResult r = discover(OracleSource::from_graph(instance.truth, instance.experiments), config);
    m.stats = r.stats;
    m.solution = std::move(r.solution);
    m.counts = evaluate(instance.truth, m.solution, config.track_ancestral);
  } catch (const Interrupted&) {
    m.timed_out = true;
  }
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

namespace {

Instance nth_instance(int nodes, const HarnessOptions& options, int index, Restriction r,
                      std::uint64_t stream = 0) {
  InstanceSpec spec;
  spec.nodes = nodes;
  spec.edge_prob = options.edge_prob;
  spec.experiments = options.experiments;
  spec.seed = instance_seed(options.seed ^ (stream * 0x100000001b3ull) ^ (static_cast<std::uint64_t>(nodes) << 48),
                            static_cast<std::uint64_t>(index));
  spec.restriction = r;
  return make_instance(spec);
}

DiscoveryConfig base_config(const HarnessOptions& options) {
  DiscoveryConfig cfg;
  cfg.timeout = options.timeout;
  cfg.backend = options.backend;
  return cfg;
}

// Every item determinate in `weak` is determinate in `strong`.
bool covers(const EdgeSolution& strong, const EdgeSolution& weak) {
  const int n = weak.node_count();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      if (weak.directed(a, b) != Status::unknown && strong.directed(a, b) == Status::unknown) return false;
      if (weak.ancestral(a, b) != Status::unknown && strong.ancestral(a, b) == Status::unknown) return false;
      if (a < b && weak.bidirected(a, b) != Status::unknown && strong.bidirected(a, b) == Status::unknown) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<ScalingRow> run_scaling(const std::vector<int>& sizes, std::optional<int> max_c,
                                    const HarnessOptions& options) {
  std::vector<ScalingRow> rows;
  for (int n : sizes) {
    ScalingRow row;
    row.nodes = n;
    row.max_c = max_c;
    DiscoveryConfig cfg = base_config(options);
    if (max_c) cfg.max_c = std::min(*max_c, std::max(n - 2, 0));
    std::vector<double> ranked;
    for (int i = 0; i < options.instances; ++i) {
      const RunMetrics m = run_instance(nth_instance(n, options, i, Restriction::none), cfg);
      row.seconds.push_back(m.seconds);
      if (m.timed_out) {
        ++row.timeouts;
        ranked.push_back(std::numeric_limits<double>::infinity());
      } else {
        ++row.completed;
        ranked.push_back(m.seconds);
      }
    }
    row.median_seconds = median(ranked);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<IdentifiabilityRow> run_identifiability(int nodes, const HarnessOptions& options) {
  const int top = std::max(nodes - 2, 0);
  std::vector<IdentifiabilityRow> rows(top + 1);
  std::vector<std::array<double, kCategoryCount>> sums(top + 1);
  std::vector<std::array<int, kCategoryCount>> counts(top + 1);
  for (int c = 0; c <= top; ++c) rows[c].max_c = c;
  for (int i = 0; i < options.instances; ++i) {
    const Instance inst = nth_instance(nodes, options, i, Restriction::none);
    for (int c = 0; c <= top; ++c) {
      DiscoveryConfig cfg = base_config(options);
      cfg.max_c = c;
      cfg.track_ancestral = true;
      const RunMetrics m = run_instance(inst, cfg);
      if (m.timed_out) {
        ++rows[c].timeouts;
        continue;
      }
      rows[c].pooled += m.counts;
      for (std::size_t k = 0; k < kCategoryCount; ++k) {
        if (auto p = m.counts.proportion(static_cast<Category>(k))) {
          sums[c][k] += *p;
          ++counts[c][k];
        }
      }
    }
  }
  for (int c = 0; c <= top; ++c) {
    for (std::size_t k = 0; k < kCategoryCount; ++k) {
      if (counts[c][k] > 0) rows[c].mean[k] = sums[c][k] / counts[c][k];
    }
  }
  return rows;
}

std::vector<AssumptionRow> run_assumption_comparison(int nodes, const HarnessOptions& options,
                                                     const std::vector<Restriction>& classes) {
  std::vector<AssumptionRow> rows;
  for (Restriction truth_class : classes) {
    std::vector<Restriction> sets{Restriction::none};
    if (truth_class == Restriction::acyclic || truth_class == Restriction::both) sets.push_back(Restriction::acyclic);
    if (truth_class == Restriction::no_latents || truth_class == Restriction::both) {
      sets.push_back(Restriction::no_latents);
    }
    if (truth_class == Restriction::both) sets.push_back(Restriction::both);
    const std::size_t first = rows.size();
    for (Restriction s : sets) {
      AssumptionRow row;
      row.truth = truth_class;
      row.assumed = s;
      rows.push_back(row);
    }
    std::vector<double> determinate_sum(sets.size(), 0.0);
    std::vector<int> done(sets.size(), 0);
    const auto stream = static_cast<std::uint64_t>(truth_class) + 1;
    for (int i = 0; i < options.instances; ++i) {
      const Instance inst = nth_instance(nodes, options, i, truth_class, stream);
      std::vector<std::optional<EdgeSolution>> solutions(sets.size());
      for (std::size_t k = 0; k < sets.size(); ++k) {
        DiscoveryConfig cfg = base_config(options);
        cfg.assumptions = assumptions_of(sets[k]);
        cfg.track_ancestral = true;
        const RunMetrics m = run_instance(inst, cfg);
        AssumptionRow& row = rows[first + k];
        if (m.timed_out) {
          ++row.timeouts;
          continue;
        }
        row.pooled += m.counts;
        determinate_sum[k] += m.counts.determinate_fraction();
        ++done[k];
        solutions[k] = m.solution;
      }
      for (std::size_t k = 0; k < sets.size(); ++k) {
        if (!solutions[k]) continue;
        const Assumptions strong = assumptions_of(sets[k]);
        for (std::size_t w = 0; w < sets.size(); ++w) {
          const Assumptions weak = assumptions_of(sets[w]);
          const bool weaker = w != k && (!weak.acyclic || strong.acyclic) && (!weak.no_latents || strong.no_latents);
          if (weaker && solutions[w] && !covers(*solutions[k], *solutions[w])) {
            ++rows[first + k].shrinks;
            break;
          }
        }
      }
    }
    for (std::size_t k = 0; k < sets.size(); ++k) {
      if (done[k] > 0) rows[first + k].mean_determinate = determinate_sum[k] / done[k];
    }
  }
  return rows;
}

namespace {

std::string fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return "inf";
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

}  // namespace

std::string scaling_tsv(const std::vector<ScalingRow>& rows) {
  std::string out = "nodes\tmax_c\tinstances\tcompleted\ttimeouts\tmedian_seconds\n";
  for (const auto& r : rows) {
    out += std::to_string(r.nodes) + "\t" + (r.max_c ? std::to_string(*r.max_c) : std::string("all")) + "\t" +
           std::to_string(r.seconds.size()) + "\t" + std::to_string(r.completed) + "\t" +
           std::to_string(r.timeouts) + "\t" + fixed(r.median_seconds) + "\n";
  }
  return out;
}

std::string identifiability_tsv(const std::vector<IdentifiabilityRow>& rows) {
  std::string out = "max_c";
  for (std::size_t k = 0; k < kCategoryCount; ++k) out += "\t" + std::string(to_string(static_cast<Category>(k)));
  for (std::size_t k = 0; k < kCategoryCount; ++k) {
    out += "\tpooled_" + std::string(to_string(static_cast<Category>(k)));
  }
  out += "\ttimeouts\tfalse_statuses\n";
  for (const auto& r : rows) {
    out += std::to_string(r.max_c);
    for (const auto& m : r.mean) out += "\t" + (m ? fixed(*m) : std::string("nan"));
    for (std::size_t k = 0; k < kCategoryCount; ++k) {
      const auto p = r.pooled.proportion(static_cast<Category>(k));
      out += "\t" + (p ? fixed(*p) : std::string("nan"));
    }
    out += "\t" + std::to_string(r.timeouts) + "\t" + std::to_string(r.pooled.false_statuses) + "\n";
  }
  return out;
}

std::string assumptions_tsv(const std::vector<AssumptionRow>& rows) {
  std::string out = "truth\tassumed\tmean_determinate";
  for (std::size_t k = 0; k < kCategoryCount; ++k) out += "\t" + std::string(to_string(static_cast<Category>(k)));
  out += "\ttimeouts\tshrinks\tfalse_statuses\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.truth)) + "\t" + std::string(to_string(r.assumed)) + "\t" +
           fixed(r.mean_determinate);
    for (std::size_t k = 0; k < kCategoryCount; ++k) {
      const auto p = r.pooled.proportion(static_cast<Category>(k));
      out += "\t" + (p ? fixed(*p) : std::string("nan"));
    }
    out += "\t" + std::to_string(r.timeouts) + "\t" + std::to_string(r.shrinks) + "\t" +
           std::to_string(r.pooled.false_statuses) + "\n";
  }
  return out;
}

}  // namespace causat
