#pragma once

/// @file pipeline.hpp
/// End-to-end evaluation of one (workload, pool, bindings) configuration:
/// count → classify → allocate → lay out → trace → simulate → energy, plus
/// configuration × size sweeps normalized against a baseline pool.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spmalloc/allocator.hpp"
#include "spmalloc/energy.hpp"
#include "spmalloc/memspec.hpp"
#include "spmalloc/simtrace.hpp"
#include "spmalloc/workload.hpp"

namespace spmalloc {

/// Line size used for cache-friendliness: the first-level cache's, or 64
/// bytes for a cacheless pool.
inline std::uint64_t classification_line(const MemoryPool& pool) {
  return pool.caches.empty() ? 64 : pool.caches.front().cache_geometry->line_size_bytes;
}

struct PipelineOptions {
  /// Use this plan instead of solving.
  std::optional<AllocationPlan> plan;
  CacheEnergyMode energy_mode = CacheEnergyMode::PerAccess;
};

struct PipelineResult {
  Bindings bindings;
  std::vector<VariableProfile> variables;
  std::vector<AccessCounts> static_counts;
  std::vector<int> cache_friendly;
  AllocationModel model;
  AllocationPlan plan;
  MemoryLayout layout;
  SimStats stats;
  EnergyReport energy;
  std::vector<Discrepancy> discrepancies;
};

inline std::vector<int> cache_friendly_flags(const std::vector<VariableProfile>& variables, const Workload& workload,
                                             std::uint64_t line_size_bytes) {
  const auto occurrences = access_occurrences(workload);
  std::vector<int> flags;
  for (const auto& v : variables) flags.push_back(variable_cf(v, occurrences, line_size_bytes));
  return flags;
}

inline PipelineResult run_pipeline(const Workload& workload, const MemoryPool& pool, const Bindings& bindings,
                                   const PipelineOptions& options = {}) {
  PipelineResult r;
  r.bindings = resolve_bindings(workload, bindings);
  r.variables = profile_variables(workload, r.bindings);
  r.static_counts = count_accesses(workload, r.bindings);
  r.cache_friendly = cache_friendly_flags(r.variables, workload, classification_line(pool));
  r.model = build_model(r.variables, r.cache_friendly, pool);
  if (options.plan) {
    r.plan = *options.plan;
    r.plan.objective_pj = plan_objective(r.model, r.plan.placements);
    if (auto violations = plan_violations(r.model, r.plan); !violations.empty()) {
      throw ConfigError("inconsistent plan: " + violations.front());
    }
  } else {
    r.plan = solve_exact(r.model);
  }
  r.layout = make_layout(r.variables, r.plan, pool);

  std::vector<std::string> names;
  for (const auto& v : r.variables) names.push_back(v.name);
  HierarchySimulator sim(pool, names);
  for_each_access(workload, r.variables, r.bindings, r.layout, smallest_line(pool),
                  [&sim](const TraceRecord& record) { sim.access(record); });
  r.stats = sim.stats();
  if (auto broken = bookkeeping_violations(r.stats); !broken.empty()) {
    throw SimulationError("hierarchy bookkeeping violated: " + broken.front());
  }
  if (latency_from_counters(r.stats, pool) != r.stats.t_exec_ns) {
    throw SimulationError("latency re-summation does not match the simulated time");
  }
  r.energy = energy_from_stats(r.stats, pool, options.energy_mode);
  r.discrepancies = cross_check(r.static_counts, r.stats);
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  std::string config;
  std::int64_t size = 0;
  EnergyReport energy;
};

struct SweepResult {
  std::string benchmark;
  std::string parameter;
  std::string baseline;
  std::vector<SweepRow> rows;  // ordered by (configuration order, size order)

  const SweepRow& row(const std::string& config, std::int64_t size) const {
    for (const auto& r : rows) {
      if (r.config == config && r.size == size) return r;
    }
    throw ConfigError("no sweep row for '" + config + "' at size " + std::to_string(size));
  }
};

/// value / baseline; nullopt when the baseline is zero and the value is not.
inline std::optional<Rational> normalized(const Rational& value, const Rational& baseline) {
  if (baseline == 0) return value == 0 ? std::optional<Rational>(1) : std::nullopt;
  return value / baseline;
}

/// Runs every (pool, size) cell; cells are independent and run on up to
/// `threads` workers, results are assembled in deterministic order.
inline SweepResult run_sweep(const Workload& workload, const std::vector<MemoryPool>& pools,
                             const std::string& parameter, const std::vector<std::int64_t>& sizes,
                             const Bindings& base_bindings, const std::string& baseline, unsigned threads = 0) {
  if (std::none_of(pools.begin(), pools.end(), [&](const MemoryPool& p) { return p.name == baseline; })) {
    throw ConfigError("baseline configuration '" + baseline + "' is not part of the sweep");
  }
  if (!workload.parameters.count(parameter)) throw ConfigError("sweep parameter '" + parameter + "' is not declared");
  SweepResult result;
  result.benchmark = workload.name;
  result.parameter = parameter;
  result.baseline = baseline;
  const std::size_t cells = pools.size() * sizes.size();
  result.rows.resize(cells);
  std::vector<std::exception_ptr> errors(cells);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t cell = next++; cell < cells; cell = next++) {
      const auto& pool = pools[cell / sizes.size()];
      const std::int64_t size = sizes[cell % sizes.size()];
      try {
        Bindings bindings = base_bindings;
        bindings[parameter] = size;
        auto r = run_pipeline(workload, pool, bindings);
        result.rows[cell] = {pool.name, size, r.energy};
      } catch (...) {
        errors[cell] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(cells, 1)));
  std::vector<std::thread> pool_threads;
  for (unsigned t = 1; t < threads; ++t) pool_threads.emplace_back(worker);
  worker();
  for (auto& t : pool_threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

namespace detail {

inline std::string render_normalized(const std::optional<Rational>& value) {
  return value ? to_fixed(*value, 6) : "inf";
}

}  // namespace detail

inline std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "benchmark,config,parameter,size,t_mem_ns,e_static_pj,e_dyn_pj,e_tot_pj,"
         "norm_t_mem,norm_e_static,norm_e_dyn,norm_e_tot\n";
  for (const auto& row : sweep.rows) {
    const auto& base = sweep.row(sweep.baseline, row.size).energy;
    const auto& e = row.energy;
    out << sweep.benchmark << ',' << row.config << ',' << sweep.parameter << ',' << row.size << ','
        << to_fixed(e.t_exec_ns, 3) << ',' << to_fixed(e.e_static_pj, 3) << ',' << to_fixed(e.e_dyn_pj, 3) << ','
        << to_fixed(e.e_total_pj, 3) << ',' << detail::render_normalized(normalized(e.t_exec_ns, base.t_exec_ns))
        << ',' << detail::render_normalized(normalized(e.e_static_pj, base.e_static_pj)) << ','
        << detail::render_normalized(normalized(e.e_dyn_pj, base.e_dyn_pj)) << ','
        << detail::render_normalized(normalized(e.e_total_pj, base.e_total_pj)) << '\n';
  }
  return out.str();
}

/// Splits one CSV line (no quoting; the sweep CSV never needs it).
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

/// Plot-ready long format: one row per (benchmark, config, size, metric).
inline std::string sweep_long_csv(const std::string& wide_csv) {
  std::istringstream in(wide_csv);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("sweep CSV is empty");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("sweep CSV lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t bench = column("benchmark");
  const std::size_t config = column("config");
  const std::size_t size = column("size");
  const std::vector<std::pair<std::string, std::string>> metrics = {{"t_mem_ns", "norm_t_mem"},
                                                                    {"e_static_pj", "norm_e_static"},
                                                                    {"e_dyn_pj", "norm_e_dyn"},
                                                                    {"e_tot_pj", "norm_e_tot"}};
  std::ostringstream out;
  out << "benchmark,config,size,metric,value,normalized\n";
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ConfigError("sweep CSV line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields");
    }
    for (const auto& [raw, norm] : metrics) {
      out << fields[bench] << ',' << fields[config] << ',' << fields[size] << ',' << raw << ',' << fields[column(raw)]
          << ',' << fields[column(norm)] << '\n';
    }
  }
  return out.str();
}

}  // namespace spmalloc
