#pragma once

/// @file allocator.hpp
/// The 0-1 placement program: every variable goes to main memory or to one
/// scratchpad, scratchpad capacities hold, cache-friendly variables stay in
/// main memory, and total dynamic access energy is minimal.
///
/// Two solvers share one deterministic tie-breaking rule:
///  - solve_exact: depth-first branch and bound;
///  - solve_exhaustive: plain enumeration, used as the test oracle.
///
/// Tie-breaking. Among plans of equal objective the chosen one is the
/// lexicographically smallest placement vector in declaration order, where
/// the targets of a single variable are ranked by (that variable's cost at
/// the target, target index) and target 0 is main memory. So when a
/// variable's costs tie, main memory wins, then the lowest scratchpad; when
/// variables compete for capacity, the earlier-declared one gets the cheaper
/// target.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spmalloc/error.hpp"
#include "spmalloc/memspec.hpp"
#include "spmalloc/rational.hpp"
#include "spmalloc/workload.hpp"

namespace spmalloc {

/// Placement target: 0 is main memory, i >= 1 is scratchpad i.
class Target {
public:
  constexpr Target() = default;
  static constexpr Target main_memory() { return Target(0); }
  static constexpr Target scratchpad(std::size_t one_based) { return Target(one_based); }
  static constexpr Target from_index(std::size_t index) { return Target(index); }

  constexpr bool is_main_memory() const { return index_ == 0; }
  /// One-based scratchpad number; only meaningful when !is_main_memory().
  constexpr std::size_t scratchpad_number() const { return index_; }
  constexpr std::size_t index() const { return index_; }

  constexpr auto operator<=>(const Target&) const = default;

private:
  constexpr explicit Target(std::size_t index) : index_(index) {}
  std::size_t index_ = 0;
};

struct AllocationVariable {
  std::string name;
  std::uint64_t footprint_bytes = 0;
  int cache_friendly = 0;  // C(ψ)
  Rational h_cost_pj = 0;  // main memory
  std::vector<Rational> f_costs_pj;  // one per scratchpad

  const Rational& cost(Target t) const {
    return t.is_main_memory() ? h_cost_pj : f_costs_pj.at(t.scratchpad_number() - 1);
  }
};

struct AllocationModel {
  std::vector<AllocationVariable> variables;
  std::vector<std::uint64_t> spm_capacities_bytes;

  std::size_t scratchpad_count() const { return spm_capacities_bytes.size(); }
};

enum class ProofStatus { Optimal, Infeasible };

struct Placement {
  std::string variable;
  Target target;

  bool operator==(const Placement&) const = default;
};

struct AllocationPlan {
  std::vector<Placement> placements;  // model declaration order
  Rational objective_pj = 0;
  ProofStatus status = ProofStatus::Optimal;
  std::uint64_t nodes_explored = 0;
};

inline void validate(const AllocationModel& model) {
  std::set<std::string> names;
  for (const auto& v : model.variables) {
    if (!names.insert(v.name).second) throw ConfigError("duplicate variable '" + v.name + "'");
    if (v.footprint_bytes == 0) throw ConfigError("variable '" + v.name + "': footprint must be > 0");
    if (v.cache_friendly != 0 && v.cache_friendly != 1) {
      throw ConfigError("variable '" + v.name + "': C must be 0 or 1");
    }
    if (v.f_costs_pj.size() != model.scratchpad_count()) {
      throw ConfigError("variable '" + v.name + "': expected one scratchpad cost per scratchpad");
    }
    if (v.h_cost_pj < 0) throw ConfigError("variable '" + v.name + "': negative cost");
    for (const auto& f : v.f_costs_pj) {
      if (f < 0) throw ConfigError("variable '" + v.name + "': negative cost");
    }
  }
}

/// h(ψ) = E_MM_r·N_r + E_MM_w·N_w and f_i(ψ) = E_SPM_r(i)·N_r + E_SPM_w(i)·N_w.
inline AllocationModel build_model(const std::vector<VariableProfile>& variables,
                                   const std::vector<int>& cache_friendly, const MemoryPool& pool) {
  if (cache_friendly.size() != variables.size()) {
    throw ConfigError("build_model: one cache-friendliness flag per variable required");
  }
  AllocationModel model;
  for (const auto& spm : pool.scratchpads) model.spm_capacities_bytes.push_back(spm.capacity_bytes);
  const auto& mm = pool.main_memory;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    const auto& v = variables[i];
    AllocationVariable av;
    av.name = v.name;
    av.footprint_bytes = v.footprint_bytes();
    av.cache_friendly = cache_friendly[i];
    const Rational reads(v.reads);
    const Rational writes(v.writes);
    av.h_cost_pj = mm.read_energy_pj * reads + mm.write_energy_pj * writes;
    for (const auto& spm : pool.scratchpads) {
      av.f_costs_pj.push_back(spm.read_energy_pj * reads + spm.write_energy_pj * writes);
    }
    model.variables.push_back(std::move(av));
  }
  validate(model);
  return model;
}

/// Objective of an arbitrary placement vector.
inline Rational plan_objective(const AllocationModel& model, const std::vector<Placement>& placements) {
  Rational total = 0;
  for (std::size_t v = 0; v < placements.size(); ++v) total += model.variables[v].cost(placements[v].target);
  return total;
}

/// Lists every broken plan invariant (empty when the plan is valid): one
/// target per declared variable, scratchpad capacities, C(ψ)=1 forcing main
/// memory, and the stated objective.
inline std::vector<std::string> plan_violations(const AllocationModel& model, const AllocationPlan& plan) {
  std::vector<std::string> out;
  if (plan.placements.size() != model.variables.size()) {
    out.push_back("placement count " + std::to_string(plan.placements.size()) + " != variable count " +
                  std::to_string(model.variables.size()));
    return out;
  }
  std::vector<std::uint64_t> used(model.scratchpad_count(), 0);
  for (std::size_t v = 0; v < plan.placements.size(); ++v) {
    const auto& var = model.variables[v];
    const auto& p = plan.placements[v];
    if (p.variable != var.name) out.push_back("placement " + std::to_string(v) + " names '" + p.variable + "'");
    if (p.target.index() > model.scratchpad_count()) {
      out.push_back("'" + var.name + "' placed in nonexistent scratchpad");
      continue;
    }
    if (var.cache_friendly == 1 && !p.target.is_main_memory()) {
      out.push_back("cache-friendly '" + var.name + "' not in main memory");
    }
    if (!p.target.is_main_memory()) used[p.target.scratchpad_number() - 1] += var.footprint_bytes;
  }
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (used[i] > model.spm_capacities_bytes[i]) {
      out.push_back("scratchpad " + std::to_string(i + 1) + " over capacity: " + std::to_string(used[i]) + " > " +
                    std::to_string(model.spm_capacities_bytes[i]));
    }
  }
  if (out.empty() && plan_objective(model, plan.placements) != plan.objective_pj) {
    out.push_back("objective mismatch");
  }
  return out;
}

namespace detail {

/// The model with every cost scaled by one common positive factor so that all
/// costs are integers; comparisons then need no rational arithmetic.
template <class Int>
struct IntegerCosts {
  std::vector<std::vector<Int>> cost;  // [variable][target]
};

inline IntegerCosts<BigInt> integer_costs(const AllocationModel& model) {
  BigInt lcm = 1;
  for (const auto& v : model.variables) {
    lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(v.h_cost_pj));
    for (const auto& f : v.f_costs_pj) lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(f));
  }
  IntegerCosts<BigInt> out;
  for (const auto& v : model.variables) {
    std::vector<BigInt> row;
    for (std::size_t t = 0; t <= model.scratchpad_count(); ++t) {
      const Rational scaled = v.cost(Target::from_index(t)) * Rational(lcm);
      row.push_back(boost::multiprecision::numerator(scaled));
    }
    out.cost.push_back(std::move(row));
  }
  return out;
}

/// Narrows to int64 when the largest possible objective leaves headroom.
inline bool fits_int64(const IntegerCosts<BigInt>& costs) {
  BigInt worst = 0;
  for (const auto& row : costs.cost) worst += *std::max_element(row.begin(), row.end());
  return worst < BigInt(std::numeric_limits<std::int64_t>::max() / 4);
}

inline IntegerCosts<std::int64_t> narrow(const IntegerCosts<BigInt>& costs) {
  IntegerCosts<std::int64_t> out;
  for (const auto& row : costs.cost) {
    std::vector<std::int64_t> r;
    for (const auto& c : row) r.push_back(c.convert_to<std::int64_t>());
    out.cost.push_back(std::move(r));
  }
  return out;
}

inline bool target_allowed(const AllocationModel& model, std::size_t v, std::size_t t) {
  if (t == 0) return true;
  const auto& var = model.variables[v];
  return var.cache_friendly == 0 && var.footprint_bytes <= model.spm_capacities_bytes[t - 1];
}

template <class Int>
class BranchAndBound {
public:
  BranchAndBound(const AllocationModel& model, const IntegerCosts<Int>& costs)
      : model_(model), costs_(costs), remaining_(model.spm_capacities_bytes) {
    const std::size_t n = model.variables.size();
    order_.resize(n);
    suffix_bound_.assign(n + 1, Int(0));
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t t = 0; t <= model.scratchpad_count(); ++t) {
        if (target_allowed(model, v, t)) order_[v].push_back(t);
      }
      const auto& row = costs.cost[v];
      std::stable_sort(order_[v].begin(), order_[v].end(),
                       [&row](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    }
    // Admissible bound: each open variable at its cheapest allowed target,
    // ignoring capacity already consumed.
    for (std::size_t v = n; v-- > 0;) suffix_bound_[v] = suffix_bound_[v + 1] + costs.cost[v][order_[v].front()];
    current_.assign(n, 0);
  }

  std::vector<std::size_t> run() {
    search(0, Int(0));
    return best_;
  }

  std::uint64_t nodes() const { return nodes_; }

private:
  void search(std::size_t v, const Int& so_far) {
    ++nodes_;
    if (v == current_.size()) {
      if (!have_best_ || so_far < best_cost_) {
        best_cost_ = so_far;
        best_ = current_;
        have_best_ = true;
      }
      return;
    }
    const auto footprint = model_.variables[v].footprint_bytes;
    for (std::size_t t : order_[v]) {
      const Int next = so_far + costs_.cost[v][t];
      // Targets are cost-sorted, so once one is pruned every later one is too.
      // Equal bounds are pruned as well: any plan found later is lex-larger.
      if (have_best_ && !(next + suffix_bound_[v + 1] < best_cost_)) break;
      if (t != 0) {
        if (remaining_[t - 1] < footprint) continue;
        remaining_[t - 1] -= footprint;
      }
      current_[v] = t;
      search(v + 1, next);
      if (t != 0) remaining_[t - 1] += footprint;
    }
  }

  const AllocationModel& model_;
  const IntegerCosts<Int>& costs_;
  std::vector<std::vector<std::size_t>> order_;
  std::vector<Int> suffix_bound_;
  std::vector<std::uint64_t> remaining_;
  std::vector<std::size_t> current_;
  std::vector<std::size_t> best_;
  Int best_cost_{};
  bool have_best_ = false;
  std::uint64_t nodes_ = 0;
};

template <class Int>
class Enumerator {
public:
  Enumerator(const AllocationModel& model, const IntegerCosts<Int>& costs)
      : model_(model), costs_(costs), used_(model.scratchpad_count(), 0), current_(model.variables.size(), 0) {}

  std::vector<std::size_t> run() {
    visit(0, Int(0));
    return best_;
  }

  std::uint64_t nodes() const { return nodes_; }

private:
  void visit(std::size_t v, const Int& so_far) {
    ++nodes_;
    if (v == current_.size()) {
      if (feasible() && (!have_best_ || so_far < best_cost_ || (so_far == best_cost_ && lex_less()))) {
        best_cost_ = so_far;
        best_ = current_;
        have_best_ = true;
      }
      return;
    }
    // Infeasible partial assignments are skipped; no cost-based pruning.
    const auto& var = model_.variables[v];
    const auto footprint = var.footprint_bytes;
    for (std::size_t t = 0; t <= model_.scratchpad_count(); ++t) {
      if (t != 0 && (var.cache_friendly == 1 || footprint > model_.spm_capacities_bytes[t - 1] - used_[t - 1])) {
        continue;
      }
      current_[v] = t;
      if (t != 0) used_[t - 1] += footprint;
      visit(v + 1, so_far + costs_.cost[v][t]);
      if (t != 0) used_[t - 1] -= footprint;
    }
  }

  bool feasible() const {
    for (std::size_t i = 0; i < used_.size(); ++i) {
      if (used_[i] > model_.spm_capacities_bytes[i]) return false;
    }
    for (std::size_t v = 0; v < current_.size(); ++v) {
      if (model_.variables[v].cache_friendly == 1 && current_[v] != 0) return false;
    }
    return true;
  }

  bool lex_less() const {
    for (std::size_t v = 0; v < current_.size(); ++v) {
      if (current_[v] == best_[v]) continue;
      const auto& row = costs_.cost[v];
      if (row[current_[v]] != row[best_[v]]) return row[current_[v]] < row[best_[v]];
      return current_[v] < best_[v];
    }
    return false;
  }

  const AllocationModel& model_;
  const IntegerCosts<Int>& costs_;
  std::vector<std::uint64_t> used_;
  std::vector<std::size_t> current_;
  std::vector<std::size_t> best_;
  Int best_cost_{};
  bool have_best_ = false;
  std::uint64_t nodes_ = 0;
};

template <template <class> class Search>
AllocationPlan run_solver(const AllocationModel& model) {
  validate(model);
  const auto big = integer_costs(model);
  std::vector<std::size_t> choice;
  std::uint64_t nodes = 0;
  if (fits_int64(big)) {
    const auto small = narrow(big);
    Search<std::int64_t> search(model, small);
    choice = search.run();
    nodes = search.nodes();
  } else {
    Search<BigInt> search(model, big);
    choice = search.run();
    nodes = search.nodes();
  }
  AllocationPlan plan;
  plan.nodes_explored = nodes;
  if (choice.size() != model.variables.size()) {
    // The all-main-memory plan is always feasible.
    throw SolverDefect("solver found no feasible plan");
  }
  for (std::size_t v = 0; v < choice.size(); ++v) {
    plan.placements.push_back({model.variables[v].name, Target::from_index(choice[v])});
  }
  plan.objective_pj = plan_objective(model, plan.placements);
  plan.status = ProofStatus::Optimal;
  if (auto violations = plan_violations(model, plan); !violations.empty()) {
    throw SolverDefect("solver returned an invalid plan: " + violations.front());
  }
  return plan;
}

}  // namespace detail

/// Globally optimal plan by branch and bound.
inline AllocationPlan solve_exact(const AllocationModel& model) {
  return detail::run_solver<detail::BranchAndBound>(model);
}

inline constexpr std::size_t kExhaustiveVariableLimit = 14;

/// Enumerates every feasible placement (at most (n+1)^|Ψ|). Test oracle for
/// solve_exact.
inline AllocationPlan solve_exhaustive(const AllocationModel& model) {
  if (model.variables.size() > kExhaustiveVariableLimit) {
    throw ConfigError("solve_exhaustive: instance too large (" + std::to_string(model.variables.size()) +
                      " variables, limit " + std::to_string(kExhaustiveVariableLimit) + ")");
  }
  return detail::run_solver<detail::Enumerator>(model);
}

// ---------------------------------------------------------------------------
// Plan document

inline std::string target_name(Target t, const MemoryPool& pool) {
  if (t.is_main_memory()) return "main_memory";
  return pool.scratchpads.at(t.scratchpad_number() - 1).name;
}

inline json plan_to_json(const AllocationPlan& plan, const AllocationModel& model, const MemoryPool& pool) {
  json doc;
  doc["status"] = plan.status == ProofStatus::Optimal ? "optimal" : "infeasible";
  doc["objective_pj"] = to_fixed(plan.objective_pj, 3);
  doc["objective_exact_pj"] = to_exact_string(plan.objective_pj);
  doc["nodes_explored"] = plan.nodes_explored;
  doc["placements"] = json::array();
  for (std::size_t v = 0; v < plan.placements.size(); ++v) {
    const auto& p = plan.placements[v];
    json entry;
    entry["variable"] = p.variable;
    entry["target"] = target_name(p.target, pool);
    entry["scratchpad_index"] = p.target.is_main_memory() ? 0 : p.target.scratchpad_number();
    entry["footprint_bytes"] = model.variables[v].footprint_bytes;
    entry["cache_friendly"] = model.variables[v].cache_friendly;
    entry["cost_pj"] = to_fixed(model.variables[v].cost(p.target), 3);
    doc["placements"].push_back(std::move(entry));
  }
  return doc;
}

/// Reads placements back; targets are matched by name against the pool.
inline AllocationPlan plan_from_json(const json& doc, const MemoryPool& pool) {
  AllocationPlan plan;
  if (!doc.is_object() || !doc.contains("placements")) throw ConfigError("plan document: missing 'placements'");
  for (const auto& entry : doc.at("placements")) {
    Placement p;
    p.variable = entry.at("variable").get<std::string>();
    const auto target = entry.at("target").get<std::string>();
    if (target == "main_memory") {
      p.target = Target::main_memory();
    } else {
      bool found = false;
      for (std::size_t i = 0; i < pool.scratchpads.size(); ++i) {
        if (pool.scratchpads[i].name == target) {
          p.target = Target::scratchpad(i + 1);
          found = true;
        }
      }
      if (!found) throw ConfigError("plan document: unknown target '" + target + "' for '" + p.variable + "'");
    }
    plan.placements.push_back(std::move(p));
  }
  if (doc.contains("objective_exact_pj")) plan.objective_pj = parse_rational(doc.at("objective_exact_pj").get<std::string>());
  if (doc.contains("nodes_explored")) plan.nodes_explored = doc.at("nodes_explored").get<std::uint64_t>();
  return plan;
}

}  // namespace spmalloc
