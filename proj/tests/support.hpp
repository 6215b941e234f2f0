#pragma once

#include <random>
#include <string>

#include "spmalloc/spmalloc.hpp"

namespace spmalloc::test {

inline std::string source_path(const std::string& relative) { return std::string(SPMALLOC_SOURCE_DIR) + "/" + relative; }

inline const MemoryModuleSpec& table_module(const std::vector<MemoryModuleSpec>& table, const std::string& name) {
  for (const auto& m : table) {
    if (m.name == name) return m;
  }
  throw ConfigError("no module " + name);
}

inline std::vector<MemoryModuleSpec> technology_table() {
  return load_module_list_file(source_path("configs/technology_table.json"));
}

/// Cache level spec with the given geometry; energies and latencies are
/// simple integers so hand oracles stay readable.
inline MemoryModuleSpec make_cache(const std::string& name, std::uint64_t capacity, std::uint32_t line,
                                   std::uint32_t ways) {
  MemoryModuleSpec c;
  c.name = name;
  c.kind = ModuleKind::Cache;
  c.technology = {Technology::Kind::SRAM, {}};
  c.capacity_bytes = capacity;
  c.read_latency_ns = 1;
  c.write_latency_ns = 2;
  c.miss_latency_ns = Rational(1, 10);
  c.read_energy_pj = 10;
  c.write_energy_pj = 12;
  c.leakage_mw = 5;
  c.cache_geometry = CacheGeometry{line, ways, WritePolicy::WriteBack};
  return c;
}

inline MemoryModuleSpec make_main_memory(std::uint64_t capacity = std::uint64_t{1} << 30) {
  MemoryModuleSpec m;
  m.name = "dram";
  m.kind = ModuleKind::MainMemory;
  m.technology = {Technology::Kind::DRAM, {}};
  m.capacity_bytes = capacity;
  m.read_latency_ns = 50;
  m.write_latency_ns = 60;
  m.read_energy_pj = 1000;
  m.write_energy_pj = 1100;
  m.leakage_mw = 0;
  return m;
}

inline MemoryModuleSpec make_spm(const std::string& name, std::uint64_t capacity) {
  MemoryModuleSpec s;
  s.name = name;
  s.kind = ModuleKind::Scratchpad;
  s.technology = {Technology::Kind::STTRAM, {}};
  s.capacity_bytes = capacity;
  s.read_latency_ns = 3;
  s.write_latency_ns = 6;
  s.read_energy_pj = 200;
  s.write_energy_pj = 210;
  s.leakage_mw = 1;
  return s;
}

/// Random allocation model: up to `max_vars` variables and `max_spms`
/// scratchpads. Half of the instances draw costs from a tiny integer range so
/// that ties are frequent; the rest use fractional costs.
inline AllocationModel random_model(std::mt19937_64& rng, std::size_t max_vars = 12, std::size_t max_spms = 3) {
  auto pick = [&rng](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };
  AllocationModel model;
  const std::size_t spms = pick(0, max_spms);
  const std::size_t vars = pick(0, max_vars);
  const bool tiny_costs = pick(0, 1) == 0;
  for (std::size_t s = 0; s < spms; ++s) model.spm_capacities_bytes.push_back(pick(0, 4096));
  for (std::size_t v = 0; v < vars; ++v) {
    AllocationVariable var;
    var.name = "v" + std::to_string(v);
    var.footprint_bytes = pick(1, 2048);
    var.cache_friendly = pick(0, 2) == 0 ? 1 : 0;
    auto cost = [&]() -> Rational {
      if (tiny_costs) return Rational(static_cast<long long>(pick(0, 4)));
      return Rational(static_cast<long long>(pick(0, 1'000'000)), static_cast<long long>(pick(1, 1000)));
    };
    var.h_cost_pj = cost();
    for (std::size_t s = 0; s < spms; ++s) var.f_costs_pj.push_back(cost());
    model.variables.push_back(std::move(var));
  }
  return model;
}

}  // namespace spmalloc::test
