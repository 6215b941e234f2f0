#pragma once

/// @file memspec.hpp
/// Memory-module descriptions (caches, scratchpads, main memory), pool
/// validation, the JSON pool document, and area-equivalent module pairing.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spmalloc/error.hpp"
#include "spmalloc/rational.hpp"

namespace spmalloc {

using json = nlohmann::ordered_json;

enum class ModuleKind { Cache, Scratchpad, MainMemory };

/// Caches are write-back, write-allocate.
enum class WritePolicy { WriteBack };

struct Technology {
  enum class Kind { SRAM, STTRAM, DRAM, Other };
  Kind kind = Kind::SRAM;
  std::string other_name;  // only for Kind::Other

  bool operator==(const Technology&) const = default;
};

struct CacheGeometry {
  std::uint32_t line_size_bytes = 64;
  std::uint32_t associativity = 8;
  WritePolicy write_policy = WritePolicy::WriteBack;

  bool operator==(const CacheGeometry&) const = default;
};

/// One row of a technology table: a cache, a scratchpad or the main memory.
/// Units are fixed: bytes, mm², ns, pJ per access, mW.
struct MemoryModuleSpec {
  std::string name;
  ModuleKind kind = ModuleKind::MainMemory;
  Technology technology;
  std::uint64_t capacity_bytes = 0;
  Rational area_mm2 = 0;
  Rational read_latency_ns = 0;
  Rational write_latency_ns = 0;
  std::optional<Rational> miss_latency_ns;  // caches only
  /// For caches this is the single "hit/miss" access energy.
  Rational read_energy_pj = 0;
  Rational write_energy_pj = 0;
  Rational leakage_mw = 0;
  std::optional<CacheGeometry> cache_geometry;  // required iff kind == Cache
  /// Measured dynamic power; enables the power-times-time cache energy mode.
  std::optional<Rational> dynamic_power_mw;

  bool operator==(const MemoryModuleSpec&) const = default;
};

struct MemoryPool {
  std::string name;
  MemoryModuleSpec main_memory;
  std::vector<MemoryModuleSpec> caches;       // L1 first
  std::vector<MemoryModuleSpec> scratchpads;  // SPM_1 first
  unsigned address_bits = 48;

  bool operator==(const MemoryPool&) const = default;

  /// Every module, in the order main memory, caches, scratchpads.
  std::vector<const MemoryModuleSpec*> modules() const {
    std::vector<const MemoryModuleSpec*> out{&main_memory};
    for (const auto& c : caches) out.push_back(&c);
    for (const auto& s : scratchpads) out.push_back(&s);
    return out;
  }
};

inline std::string_view to_string(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::Cache: return "cache";
    case ModuleKind::Scratchpad: return "scratchpad";
    case ModuleKind::MainMemory: return "main_memory";
  }
  return "?";
}

inline std::string to_string(const Technology& tech) {
  switch (tech.kind) {
    case Technology::Kind::SRAM: return "SRAM";
    case Technology::Kind::STTRAM: return "STTRAM";
    case Technology::Kind::DRAM: return "DRAM";
    case Technology::Kind::Other: return tech.other_name;
  }
  return "?";
}

inline std::string_view to_string(WritePolicy) { return "write_back"; }

inline Technology parse_technology(std::string_view text) {
  if (text == "SRAM") return {Technology::Kind::SRAM, {}};
  if (text == "STTRAM" || text == "STT-RAM") return {Technology::Kind::STTRAM, {}};
  if (text == "DRAM") return {Technology::Kind::DRAM, {}};
  if (text.empty()) throw ConfigError("technology name must not be empty");
  return {Technology::Kind::Other, std::string(text)};
}

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

/// Checks the per-module invariants; the message names the module and rule.
inline void validate(const MemoryModuleSpec& spec) {
  auto fail = [&](const std::string& rule) {
    throw ConfigError("module '" + spec.name + "': " + rule);
  };
  if (spec.name.empty()) throw ConfigError("module with empty name");
  if (spec.capacity_bytes == 0) fail("capacity_bytes must be > 0");
  using Field = std::pair<const Rational*, const char*>;
  for (const auto& [value, field] :
       {Field{&spec.area_mm2, "area_mm2"}, Field{&spec.read_latency_ns, "read_latency_ns"},
        Field{&spec.write_latency_ns, "write_latency_ns"}, Field{&spec.read_energy_pj, "read_energy_pj"},
        Field{&spec.write_energy_pj, "write_energy_pj"}, Field{&spec.leakage_mw, "leakage_mw"}}) {
    if (*value < 0) fail(std::string(field) + " must be >= 0");
  }
  if (spec.dynamic_power_mw && *spec.dynamic_power_mw < 0) fail("dynamic_power_mw must be >= 0");

  if (spec.kind == ModuleKind::Cache) {
    if (!spec.cache_geometry) fail("a cache requires cache_geometry");
    if (!spec.miss_latency_ns) fail("a cache requires miss_latency_ns");
    if (*spec.miss_latency_ns < 0) fail("miss_latency_ns must be >= 0");
    const auto& g = *spec.cache_geometry;
    if (!is_power_of_two(g.line_size_bytes)) fail("line_size_bytes must be a power of two");
    if (g.associativity < 1) fail("associativity must be >= 1");
    const std::uint64_t set_bytes = std::uint64_t{g.line_size_bytes} * g.associativity;
    if (spec.capacity_bytes % set_bytes != 0) {
      fail("capacity_bytes must be divisible by line_size_bytes * associativity");
    }
  } else {
    if (spec.cache_geometry) fail("cache_geometry is only valid for caches");
    if (spec.miss_latency_ns) fail("miss_latency_ns is only valid for caches");
  }
}

inline void validate(const MemoryPool& pool) {
  if (pool.main_memory.kind != ModuleKind::MainMemory) {
    throw ConfigError("main_memory must have kind main_memory");
  }
  if (pool.address_bits == 0 || pool.address_bits > 63) {
    throw ConfigError("address_bits must lie in [1, 63]");
  }
  std::set<std::string> names;
  for (const auto* module : pool.modules()) {
    validate(*module);
    if (!names.insert(module->name).second) {
      throw ConfigError("duplicate module name '" + module->name + "'");
    }
  }
  for (const auto& c : pool.caches) {
    if (c.kind != ModuleKind::Cache) throw ConfigError("module '" + c.name + "' listed in caches is not a cache");
  }
  for (const auto& s : pool.scratchpads) {
    if (s.kind != ModuleKind::Scratchpad) {
      throw ConfigError("module '" + s.name + "' listed in scratchpads is not a scratchpad");
    }
  }
}

namespace detail {

inline Rational rational_field(const json& value, const std::string& where) {
  if (value.is_number_unsigned()) return Rational(value.get<std::uint64_t>());
  if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
  if (value.is_number_float()) return rational_from_double(value.get<double>());
  if (value.is_string()) return parse_rational(value.get<std::string>());
  throw ConfigError(where + ": expected a number");
}

inline std::uint64_t unsigned_field(const json& value, const std::string& where) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(value.get<std::int64_t>());
  }
  throw ConfigError(where + ": expected a non-negative integer");
}

inline json rational_to_json(const Rational& value) {
  if (boost::multiprecision::denominator(value) == 1 &&
      boost::multiprecision::abs(value) < Rational(std::int64_t{1} << 53)) {
    return json(value.convert_to<std::int64_t>());
  }
  const double approx = to_double(value);
  if (rational_from_double(approx) == value) return json(approx);
  return json(to_exact_string(value));
}

inline bool is_not_applicable(const json& value) {
  return value.is_null() || (value.is_string() && value.get<std::string>() == "N.A.");
}

}  // namespace detail

/// Parses one module object. `expected` is the kind implied by the section
/// it appears in; an explicit `kind` key must agree with it.
inline MemoryModuleSpec module_from_json(const json& doc, ModuleKind expected,
                                         const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected an object");
  static const std::set<std::string> known = {
      "name", "kind", "technology", "capacity_bytes", "area_mm2", "read_latency_ns",
      "write_latency_ns", "miss_latency_ns", "read_energy_pj", "write_energy_pj",
      "leakage_mw", "cache_geometry", "dynamic_power_mw"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
  }
  auto required = [&](const char* key) -> const json& {
    if (!doc.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
    return doc.at(key);
  };
  auto field_path = [&](const char* key) { return where + "." + key; };

  MemoryModuleSpec spec;
  if (!required("name").is_string()) throw ConfigError(field_path("name") + ": expected a string");
  spec.name = doc.at("name").get<std::string>();
  spec.kind = expected;
  if (doc.contains("kind")) {
    const auto& k = doc.at("kind");
    if (!k.is_string() || k.get<std::string>() != to_string(expected)) {
      throw ConfigError(field_path("kind") + ": expected '" + std::string(to_string(expected)) + "'");
    }
  }
  if (doc.contains("technology")) {
    if (!doc.at("technology").is_string()) {
      throw ConfigError(field_path("technology") + ": expected a string");
    }
    spec.technology = parse_technology(doc.at("technology").get<std::string>());
  } else {
    spec.technology = expected == ModuleKind::MainMemory ? Technology{Technology::Kind::DRAM, {}}
                                                         : Technology{Technology::Kind::SRAM, {}};
  }
  spec.capacity_bytes = detail::unsigned_field(required("capacity_bytes"), field_path("capacity_bytes"));
  if (doc.contains("area_mm2")) spec.area_mm2 = detail::rational_field(doc.at("area_mm2"), field_path("area_mm2"));
  spec.read_latency_ns = detail::rational_field(required("read_latency_ns"), field_path("read_latency_ns"));
  spec.write_latency_ns = detail::rational_field(required("write_latency_ns"), field_path("write_latency_ns"));
  if (doc.contains("miss_latency_ns") && !detail::is_not_applicable(doc.at("miss_latency_ns"))) {
    spec.miss_latency_ns = detail::rational_field(doc.at("miss_latency_ns"), field_path("miss_latency_ns"));
  }
  spec.read_energy_pj = detail::rational_field(required("read_energy_pj"), field_path("read_energy_pj"));
  spec.write_energy_pj = detail::rational_field(required("write_energy_pj"), field_path("write_energy_pj"));
  spec.leakage_mw = detail::rational_field(required("leakage_mw"), field_path("leakage_mw"));
  if (doc.contains("dynamic_power_mw")) {
    spec.dynamic_power_mw = detail::rational_field(doc.at("dynamic_power_mw"), field_path("dynamic_power_mw"));
  }
  if (doc.contains("cache_geometry")) {
    const auto& g = doc.at("cache_geometry");
    const std::string gpath = field_path("cache_geometry");
    if (!g.is_object()) throw ConfigError(gpath + ": expected an object");
    CacheGeometry geometry;
    for (const auto& [key, _] : g.items()) {
      if (key != "line_size_bytes" && key != "associativity" && key != "write_policy") {
        throw ConfigError(gpath + ": unknown field '" + key + "'");
      }
    }
    if (!g.contains("line_size_bytes")) throw ConfigError(gpath + ": missing field 'line_size_bytes'");
    if (!g.contains("associativity")) throw ConfigError(gpath + ": missing field 'associativity'");
    geometry.line_size_bytes =
        static_cast<std::uint32_t>(detail::unsigned_field(g.at("line_size_bytes"), gpath + ".line_size_bytes"));
    geometry.associativity =
        static_cast<std::uint32_t>(detail::unsigned_field(g.at("associativity"), gpath + ".associativity"));
    if (g.contains("write_policy")) {
      const auto& p = g.at("write_policy");
      if (p != "write_back") throw ConfigError(gpath + ".write_policy: only 'write_back' is supported");
      geometry.write_policy = WritePolicy::WriteBack;
    }
    spec.cache_geometry = geometry;
  }
  validate(spec);
  return spec;
}

inline json to_json(const MemoryModuleSpec& spec) {
  json doc;
  doc["name"] = spec.name;
  doc["kind"] = std::string(to_string(spec.kind));
  doc["technology"] = to_string(spec.technology);
  doc["capacity_bytes"] = spec.capacity_bytes;
  doc["area_mm2"] = detail::rational_to_json(spec.area_mm2);
  doc["read_latency_ns"] = detail::rational_to_json(spec.read_latency_ns);
  doc["write_latency_ns"] = detail::rational_to_json(spec.write_latency_ns);
  if (spec.miss_latency_ns) doc["miss_latency_ns"] = detail::rational_to_json(*spec.miss_latency_ns);
  doc["read_energy_pj"] = detail::rational_to_json(spec.read_energy_pj);
  doc["write_energy_pj"] = detail::rational_to_json(spec.write_energy_pj);
  doc["leakage_mw"] = detail::rational_to_json(spec.leakage_mw);
  if (spec.dynamic_power_mw) doc["dynamic_power_mw"] = detail::rational_to_json(*spec.dynamic_power_mw);
  if (spec.cache_geometry) {
    doc["cache_geometry"] = {{"line_size_bytes", spec.cache_geometry->line_size_bytes},
                             {"associativity", spec.cache_geometry->associativity},
                             {"write_policy", std::string(to_string(spec.cache_geometry->write_policy))}};
  }
  return doc;
}

/// Builds and validates a pool from a parsed config document with keys
/// `main_memory`, `caches[]`, `scratchpads[]` (plus optional `name`,
/// `address_bits`).
inline MemoryPool load_pool(const json& doc) {
  if (!doc.is_object()) throw ConfigError("pool document: expected an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "name" && key != "main_memory" && key != "caches" && key != "scratchpads" &&
        key != "address_bits" && key != "comment") {
      throw ConfigError("pool document: unknown field '" + key + "'");
    }
  }
  MemoryPool pool;
  if (doc.contains("name")) pool.name = doc.at("name").get<std::string>();
  if (!doc.contains("main_memory")) throw ConfigError("pool document: missing field 'main_memory'");
  pool.main_memory = module_from_json(doc.at("main_memory"), ModuleKind::MainMemory, "main_memory");
  if (doc.contains("address_bits")) {
    pool.address_bits = static_cast<unsigned>(detail::unsigned_field(doc.at("address_bits"), "address_bits"));
  }
  auto read_list = [&](const char* key, ModuleKind kind, std::vector<MemoryModuleSpec>& out) {
    if (!doc.contains(key)) return;
    const auto& list = doc.at(key);
    if (!list.is_array()) throw ConfigError(std::string(key) + ": expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.push_back(module_from_json(list[i], kind, std::string(key) + "[" + std::to_string(i) + "]"));
    }
  };
  read_list("caches", ModuleKind::Cache, pool.caches);
  read_list("scratchpads", ModuleKind::Scratchpad, pool.scratchpads);
  validate(pool);
  return pool;
}

inline MemoryPool load_pool_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("pool document: ") + e.what());
  }
  return load_pool(doc);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline MemoryPool load_pool_file(const std::string& path) {
  try {
    MemoryPool pool = load_pool_text(read_text_file(path));
    if (pool.name.empty()) {
      auto slash = path.find_last_of('/');
      std::string stem = path.substr(slash == std::string::npos ? 0 : slash + 1);
      if (auto dot = stem.rfind('.'); dot != std::string::npos) stem.resize(dot);
      pool.name = stem;
    }
    return pool;
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// A flat catalogue of modules (e.g. a technology table), each carrying an
/// explicit `kind`: `{"modules": [...]}`.
inline std::vector<MemoryModuleSpec> load_module_list(const json& doc) {
  if (!doc.is_object() || !doc.contains("modules") || !doc.at("modules").is_array()) {
    throw ConfigError("module list: expected an object with a 'modules' array");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "modules" && key != "comment") throw ConfigError("module list: unknown field '" + key + "'");
  }
  std::vector<MemoryModuleSpec> out;
  std::set<std::string> names;
  const auto& list = doc.at("modules");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "modules[" + std::to_string(i) + "]";
    if (!list[i].is_object() || !list[i].contains("kind") || !list[i].at("kind").is_string()) {
      throw ConfigError(where + ": missing field 'kind'");
    }
    const auto kind_text = list[i].at("kind").get<std::string>();
    ModuleKind kind;
    if (kind_text == to_string(ModuleKind::Cache)) {
      kind = ModuleKind::Cache;
    } else if (kind_text == to_string(ModuleKind::Scratchpad)) {
      kind = ModuleKind::Scratchpad;
    } else if (kind_text == to_string(ModuleKind::MainMemory)) {
      kind = ModuleKind::MainMemory;
    } else {
      throw ConfigError(where + ".kind: unknown kind '" + kind_text + "'");
    }
    out.push_back(module_from_json(list[i], kind, where));
    if (!names.insert(out.back().name).second) throw ConfigError("duplicate module name '" + out.back().name + "'");
  }
  return out;
}

inline std::vector<MemoryModuleSpec> load_module_list_file(const std::string& path) {
  try {
    return load_module_list(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline json to_json(const MemoryPool& pool) {
  json doc;
  if (!pool.name.empty()) doc["name"] = pool.name;
  doc["address_bits"] = pool.address_bits;
  doc["main_memory"] = to_json(pool.main_memory);
  doc["caches"] = json::array();
  for (const auto& c : pool.caches) doc["caches"].push_back(to_json(c));
  doc["scratchpads"] = json::array();
  for (const auto& s : pool.scratchpads) doc["scratchpads"].push_back(to_json(s));
  return doc;
}

/// Relative area gap |a - ref| / ref. A zero reference area only matches
/// zero-area candidates.
inline std::optional<Rational> relative_area_gap(const MemoryModuleSpec& reference,
                                                 const MemoryModuleSpec& candidate) {
  const Rational diff = boost::multiprecision::abs(candidate.area_mm2 - reference.area_mm2);
  if (reference.area_mm2 == 0) {
    return diff == 0 ? std::optional<Rational>(0) : std::nullopt;
  }
  return diff / reference.area_mm2;
}

/// Picks the candidate whose die area is closest (relatively) to the
/// reference's. Ties prefer the larger capacity, then the smaller name.
inline MemoryModuleSpec area_equivalent(const MemoryModuleSpec& reference,
                                        const std::vector<MemoryModuleSpec>& candidates,
                                        const Rational& tolerance) {
  if (candidates.empty()) throw ConfigError("area_equivalent: no candidates");
  if (tolerance <= 0 || tolerance > 1) throw ConfigError("area_equivalent: tolerance must lie in (0, 1]");

  const MemoryModuleSpec* best = nullptr;
  std::optional<Rational> best_gap;
  for (const auto& candidate : candidates) {
    auto gap = relative_area_gap(reference, candidate);
    if (!gap) continue;
    bool better = !best;
    if (best) {
      if (*gap != *best_gap) {
        better = *gap < *best_gap;
      } else if (candidate.capacity_bytes != best->capacity_bytes) {
        better = candidate.capacity_bytes > best->capacity_bytes;
      } else {
        better = candidate.name < best->name;
      }
    }
    if (better) {
      best = &candidate;
      best_gap = gap;
    }
  }
  if (!best || *best_gap > tolerance) {
    throw ConfigError("area_equivalent: no candidate within " + to_fixed(tolerance * 100, 1) +
                      "% of the area of '" + reference.name + "'" +
                      (best ? " (closest: '" + best->name + "', " + to_fixed(*best_gap * 100, 1) + "%)" : ""));
  }
  return *best;
}

}  // namespace spmalloc
