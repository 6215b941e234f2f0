#pragma once

/// @file energy.hpp
/// Energy accounting (static leakage, scratchpad, cache and main-memory
/// dynamic energy, totals) and physical address ranges for scratchpads.
///
/// Units: mW × ns = pJ, so leakage[mW] · t[ns] is already picojoules.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "spmalloc/error.hpp"
#include "spmalloc/memspec.hpp"
#include "spmalloc/rational.hpp"

namespace spmalloc {

/// Half-open byte range [start, end_exclusive).
struct AddressRange {
  std::uint64_t start = 0;
  std::uint64_t end_exclusive = 0;

  std::uint64_t size() const { return end_exclusive - start; }
  bool contains(std::uint64_t address) const { return address >= start && address < end_exclusive; }
  bool operator==(const AddressRange&) const = default;
};

/// Scratchpad ranges laid out contiguously right after main memory, in list
/// order: SPM_1 = [M, M+|SPM_1|), SPM_i starts where SPM_{i-1} ends.
inline std::vector<AddressRange> assign_spm_ranges(std::uint64_t main_memory_bytes,
                                                   const std::vector<std::uint64_t>& spm_sizes,
                                                   unsigned address_bits = 48) {
  if (main_memory_bytes == 0) throw ConfigError("assign_spm_ranges: main memory size must be > 0");
  // Highest byte count addressable; address_bits >= 64 is the full space.
  const std::uint64_t limit =
      address_bits >= 64 ? UINT64_MAX : (std::uint64_t{1} << address_bits);
  std::vector<AddressRange> out;
  std::uint64_t cursor = main_memory_bytes;
  if (cursor > limit) throw ConfigError("assign_spm_ranges: main memory exceeds the physical address space");
  for (std::size_t i = 0; i < spm_sizes.size(); ++i) {
    if (spm_sizes[i] == 0) throw ConfigError("assign_spm_ranges: scratchpad size must be > 0");
    if (spm_sizes[i] > limit - cursor) {
      throw ConfigError("assign_spm_ranges: scratchpad " + std::to_string(i + 1) + " overflows the " +
                        std::to_string(address_bits) + "-bit physical address space");
    }
    const std::uint64_t end = cursor + spm_sizes[i];
    out.push_back({cursor, end});
    cursor = end;
  }
  return out;
}

inline std::vector<AddressRange> assign_spm_ranges(const MemoryPool& pool) {
  std::vector<std::uint64_t> sizes;
  for (const auto& s : pool.scratchpads) sizes.push_back(s.capacity_bytes);
  return assign_spm_ranges(pool.main_memory.capacity_bytes, sizes, pool.address_bits);
}

/// Leakage of every module in the pool integrated over t_exec.
inline Rational static_energy(const Rational& t_exec_ns, const MemoryPool& pool) {
  if (t_exec_ns < 0) throw ConfigError("static_energy: negative execution time");
  Rational leakage = 0;
  for (const auto* module : pool.modules()) leakage += module->leakage_mw;
  return leakage * t_exec_ns;
}

inline Rational spm_dynamic_energy(std::uint64_t reads, std::uint64_t writes, const MemoryModuleSpec& spec) {
  if (spec.kind != ModuleKind::Scratchpad) {
    throw ConfigError("spm_dynamic_energy: '" + spec.name + "' is not a scratchpad");
  }
  return Rational(reads) * spec.read_energy_pj + Rational(writes) * spec.write_energy_pj;
}

/// Counts observed at one cache level.
struct LevelCounts {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t misses = 0;
};

enum class CacheEnergyMode {
  /// (reads + misses)·E_read + writes·E_write per level.
  PerAccess,
  /// dynamic_power_mw · t_exec per level (measured power supplied).
  PowerTimesTime,
};

struct CacheEnergy {
  Rational cache_pj = 0;
  Rational mm_pj = 0;
  Rational t_exec_ns = 0;
};

/// Cache dynamic energy plus the main-memory term E_MM_r·reads + E_MM_w·writes.
/// A miss is charged the level's read energy on top of the request itself;
/// the refill shows up as a read at the next level.
inline CacheEnergy cache_dynamic_energy(const std::vector<LevelCounts>& per_level, std::uint64_t mm_reads,
                                        std::uint64_t mm_writes, const Rational& t_exec_ns, const MemoryPool& pool,
                                        CacheEnergyMode mode = CacheEnergyMode::PerAccess) {
  if (per_level.size() != pool.caches.size()) {
    throw ConfigError("cache_dynamic_energy: counts given for " + std::to_string(per_level.size()) +
                      " levels but the pool has " + std::to_string(pool.caches.size()) + " caches");
  }
  CacheEnergy out;
  out.t_exec_ns = t_exec_ns;
  for (std::size_t l = 0; l < per_level.size(); ++l) {
    const auto& spec = pool.caches[l];
    const auto& c = per_level[l];
    if (mode == CacheEnergyMode::PerAccess) {
      out.cache_pj += Rational(c.reads + c.misses) * spec.read_energy_pj + Rational(c.writes) * spec.write_energy_pj;
    } else {
      if (!spec.dynamic_power_mw) {
        throw ConfigError("cache_dynamic_energy: '" + spec.name + "' has no dynamic_power_mw for power mode");
      }
      out.cache_pj += *spec.dynamic_power_mw * t_exec_ns;
    }
  }
  out.mm_pj = Rational(mm_reads) * pool.main_memory.read_energy_pj +
              Rational(mm_writes) * pool.main_memory.write_energy_pj;
  return out;
}

struct EnergyReport {
  Rational e_static_pj = 0;
  Rational e_spm_pj = 0;
  Rational e_cache_dyn_pj = 0;
  Rational e_mm_pj = 0;
  Rational e_dyn_pj = 0;
  Rational e_total_pj = 0;
  Rational t_exec_ns = 0;
};

struct TimedEnergy {
  Rational pj = 0;
  Rational t_exec_ns = 0;
};

/// E_DYN = E_MM + E_DYNcache + E_SPM; E_TOT = E_STATIC + E_DYN.
inline EnergyReport total_energy(const TimedEnergy& static_part, const CacheEnergy& cache_part,
                                 const Rational& spm_pj) {
  if (static_part.t_exec_ns != cache_part.t_exec_ns) {
    throw ConfigError("total_energy: inconsistent t_exec between static (" + to_exact_string(static_part.t_exec_ns) +
                      " ns) and cache (" + to_exact_string(cache_part.t_exec_ns) + " ns) components");
  }
  EnergyReport r;
  r.t_exec_ns = static_part.t_exec_ns;
  r.e_static_pj = static_part.pj;
  r.e_spm_pj = spm_pj;
  r.e_cache_dyn_pj = cache_part.cache_pj;
  r.e_mm_pj = cache_part.mm_pj;
  r.e_dyn_pj = r.e_mm_pj + r.e_cache_dyn_pj + r.e_spm_pj;
  r.e_total_pj = r.e_static_pj + r.e_dyn_pj;
  if (r.e_static_pj < 0 || r.e_spm_pj < 0 || r.e_cache_dyn_pj < 0 || r.e_mm_pj < 0) {
    throw ConfigError("total_energy: negative component");
  }
  return r;
}

inline json to_json(const EnergyReport& r) {
  json doc;
  doc["t_mem_ns"] = to_fixed(r.t_exec_ns, 3);
  doc["e_static_pj"] = to_fixed(r.e_static_pj, 3);
  doc["e_spm_pj"] = to_fixed(r.e_spm_pj, 3);
  doc["e_cache_dyn_pj"] = to_fixed(r.e_cache_dyn_pj, 3);
  doc["e_mm_pj"] = to_fixed(r.e_mm_pj, 3);
  doc["e_dyn_pj"] = to_fixed(r.e_dyn_pj, 3);
  doc["e_total_pj"] = to_fixed(r.e_total_pj, 3);
  return doc;
}

}  // namespace spmalloc
