#pragma once

/// @file simtrace.hpp
/// Trace generation from loop nests under a placement plan, and a
/// trace-driven memory hierarchy: set-associative LRU write-back caches in
/// front of main memory, with scratchpad address ranges routed around them.
///
/// Timing is in-order with one outstanding access. A demand access costs the
/// miss latency of every cache level it misses plus the servicing latency
/// (read or write latency of the level that hits; main-memory read latency
/// when all levels miss). Refills travel as reads; dirty evictions travel as
/// latency-free write-backs charged as writes at the next level.

#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spmalloc/allocator.hpp"
#include "spmalloc/energy.hpp"
#include "spmalloc/error.hpp"
#include "spmalloc/memspec.hpp"
#include "spmalloc/workload.hpp"

namespace spmalloc {

struct TraceRecord {
  std::uint64_t address = 0;
  std::uint32_t size_bytes = 0;
  AccessMode mode = AccessMode::Read;
  std::uint32_t variable = 0;  // index into the trace's variable table
  /// Second and later pieces of an access split at a line boundary.
  bool continuation = false;

  bool operator==(const TraceRecord&) const = default;
};

struct Trace {
  std::vector<std::string> variables;
  std::vector<TraceRecord> records;
};

// ---------------------------------------------------------------------------
// Layout

/// Base address of every variable. Main-memory variables are laid out from
/// address 0, each aligned to `alignment`; scratchpad variables are packed
/// from the start of their scratchpad's range.
struct MemoryLayout {
  std::vector<std::uint64_t> base;
  std::vector<Target> target;
  std::vector<AddressRange> spm_ranges;
};

inline std::uint64_t layout_alignment(const MemoryPool& pool) {
  std::uint64_t alignment = 64;
  for (const auto& c : pool.caches) alignment = std::max<std::uint64_t>(alignment, c.cache_geometry->line_size_bytes);
  return alignment;
}

inline MemoryLayout make_layout(const std::vector<VariableProfile>& variables, const AllocationPlan& plan,
                                const MemoryPool& pool) {
  if (plan.placements.size() != variables.size()) {
    throw ConfigError("plan has " + std::to_string(plan.placements.size()) + " placements but the workload has " +
                      std::to_string(variables.size()) + " variables");
  }
  MemoryLayout layout;
  layout.spm_ranges = assign_spm_ranges(pool);
  const std::uint64_t alignment = layout_alignment(pool);
  std::uint64_t mm_cursor = 0;
  std::vector<std::uint64_t> spm_cursor;
  for (const auto& r : layout.spm_ranges) spm_cursor.push_back(r.start);

  for (std::size_t v = 0; v < variables.size(); ++v) {
    const auto& p = plan.placements[v];
    if (p.variable != variables[v].name) {
      throw ConfigError("plan placement " + std::to_string(v) + " is for '" + p.variable + "', expected '" +
                        variables[v].name + "'");
    }
    const std::uint64_t bytes = variables[v].footprint_bytes();
    if (p.target.is_main_memory()) {
      mm_cursor = (mm_cursor + alignment - 1) / alignment * alignment;
      layout.base.push_back(mm_cursor);
      mm_cursor += bytes;
      if (mm_cursor > pool.main_memory.capacity_bytes) {
        throw ConfigError("variables do not fit in main memory ('" + variables[v].name + "')");
      }
    } else {
      const std::size_t s = p.target.scratchpad_number() - 1;
      if (s >= layout.spm_ranges.size()) {
        throw ConfigError("'" + variables[v].name + "' placed in nonexistent scratchpad");
      }
      layout.base.push_back(spm_cursor[s]);
      spm_cursor[s] += bytes;
      if (spm_cursor[s] > layout.spm_ranges[s].end_exclusive) {
        throw ConfigError("scratchpad '" + pool.scratchpads[s].name + "' over capacity at '" + variables[v].name + "'");
      }
    }
    layout.target.push_back(p.target);
  }
  return layout;
}

// ---------------------------------------------------------------------------
// Trace generation

namespace detail {

struct CompiledAffine {
  std::vector<std::pair<std::size_t, std::int64_t>> terms;  // (iterator slot, coefficient)
  std::int64_t constant = 0;

  std::int64_t eval(const std::vector<std::int64_t>& slots) const {
    std::int64_t value = constant;
    for (const auto& [slot, c] : terms) value += c * slots[slot];
    return value;
  }
};

struct CompiledAccess;

struct CompiledIndex {
  CompiledAffine affine;
  std::unique_ptr<CompiledAccess> indirect;  // value = scale·contents[inner] + affine
  std::int64_t scale = 1;
};

struct CompiledAccess {
  std::uint32_t variable = 0;
  AccessMode mode = AccessMode::Read;
  std::vector<CompiledIndex> indices;
  std::string text;
};

struct CompiledStatement;

struct CompiledLoop {
  std::size_t slot = 0;
  CompiledAffine lower;
  CompiledAffine upper;
  std::vector<CompiledStatement> body;
};

struct CompiledStatement {
  std::variant<CompiledLoop, CompiledAccess> node;
};

class NestCompiler {
public:
  NestCompiler(const Workload& workload, const Bindings& resolved) : workload_(workload), resolved_(resolved) {}

  std::vector<CompiledStatement> compile(const std::vector<Statement>& body) {
    std::vector<CompiledStatement> out;
    for (const auto& stmt : body) {
      if (const auto* site = std::get_if<AccessSite>(&stmt.node)) {
        out.push_back({access(site->expr, site->mode)});
      } else {
        const auto& loop = std::get<Loop>(stmt.node);
        CompiledLoop c;
        c.lower = affine(loop.lower);
        c.upper = affine(loop.upper);
        c.slot = scope_.size();
        scope_.push_back(loop.iterator);
        c.body = compile(loop.body);
        scope_.pop_back();
        out.push_back({std::move(c)});
      }
    }
    return out;
  }

  std::size_t max_depth() const { return max_depth_; }

private:
  CompiledAffine affine(const AffineExpr& expr) {
    max_depth_ = std::max(max_depth_, scope_.size());
    CompiledAffine out;
    out.constant = expr.constant;
    for (const auto& [symbol, c] : expr.coefficients) {
      bool found = false;
      for (std::size_t s = scope_.size(); s-- > 0;) {
        if (scope_[s] == symbol) {
          out.terms.emplace_back(s, c);
          found = true;
          break;
        }
      }
      if (found) continue;
      auto it = resolved_.find(symbol);
      if (it == resolved_.end()) throw ConfigError("unbound symbol '" + symbol + "'");
      out.constant += c * it->second;
    }
    return out;
  }

  CompiledAccess access(const AccessExpr& expr, AccessMode mode) {
    CompiledAccess out;
    auto index = workload_.variable_index(expr.base);
    if (!index) throw ConfigError("unknown variable '" + expr.base + "'");
    out.variable = static_cast<std::uint32_t>(*index);
    out.mode = mode;
    out.text = to_string(expr);
    for (const auto& idx : expr.indices) {
      CompiledIndex ci;
      if (const auto* a = std::get_if<AffineExpr>(&idx)) {
        ci.affine = affine(*a);
      } else {
        const auto& ind = std::get<IndirectIndex>(idx);
        ci.affine = affine(ind.offset);
        ci.scale = ind.scale;
        ci.indirect = std::make_unique<CompiledAccess>(access(*ind.inner, AccessMode::Read));
      }
      out.indices.push_back(std::move(ci));
    }
    return out;
  }

  const Workload& workload_;
  const Bindings& resolved_;
  std::vector<std::string> scope_;
  std::size_t max_depth_ = 0;
};

template <class Sink>
class TraceEmitter {
public:
  TraceEmitter(const std::vector<VariableProfile>& variables, const MemoryLayout& layout,
               const std::vector<std::vector<std::int64_t>>& contents, std::uint32_t split_line, Sink& sink)
      : variables_(variables), layout_(layout), contents_(contents), split_line_(split_line), sink_(sink) {}

  void run(const std::vector<CompiledStatement>& body, std::size_t depth) {
    slots_.assign(depth + 1, 0);
    exec(body);
  }

private:
  void exec(const std::vector<CompiledStatement>& body) {
    for (const auto& stmt : body) {
      if (const auto* acc = std::get_if<CompiledAccess>(&stmt.node)) {
        emit(*acc);
        continue;
      }
      const auto& loop = std::get<CompiledLoop>(stmt.node);
      const std::int64_t lo = loop.lower.eval(slots_);
      const std::int64_t hi = loop.upper.eval(slots_);
      if (hi < lo) throw SimulationError("negative trip count");
      for (std::int64_t it = lo; it < hi; ++it) {
        slots_[loop.slot] = it;
        exec(loop.body);
      }
    }
  }

  /// Emits the access (after any index-array reads it depends on) and
  /// returns its row-major element offset.
  std::uint64_t emit(const CompiledAccess& acc) {
    const auto& var = variables_[acc.variable];
    std::uint64_t linear = 0;
    for (std::size_t d = 0; d < acc.indices.size(); ++d) {
      const auto& ci = acc.indices[d];
      std::int64_t value = ci.affine.eval(slots_);
      if (ci.indirect) {
        const std::uint64_t inner = emit(*ci.indirect);
        const auto& table = contents_[ci.indirect->variable];
        if (table.empty()) {
          throw SimulationError("index array '" + variables_[ci.indirect->variable].name + "' is not initialized");
        }
        value += ci.scale * table[inner];
      }
      if (value < 0 || static_cast<std::uint64_t>(value) >= var.dims[d]) {
        throw SimulationError("out-of-bounds index " + std::to_string(value) + " in dimension " + std::to_string(d) +
                              " of '" + acc.text + "'");
      }
      linear = linear * var.dims[d] + static_cast<std::uint64_t>(value);
    }
    std::uint64_t address = layout_.base[acc.variable] + linear * var.element_size_bytes;
    std::uint64_t remaining = var.element_size_bytes;
    bool first = true;
    while (remaining > 0) {
      std::uint64_t chunk = remaining;
      if (split_line_ != 0) chunk = std::min<std::uint64_t>(remaining, split_line_ - address % split_line_);
      sink_(TraceRecord{address, static_cast<std::uint32_t>(chunk), acc.mode, acc.variable, !first});
      address += chunk;
      remaining -= chunk;
      first = false;
    }
    return linear;
  }

  const std::vector<VariableProfile>& variables_;
  const MemoryLayout& layout_;
  const std::vector<std::vector<std::int64_t>>& contents_;
  std::uint32_t split_line_;
  Sink& sink_;
  std::vector<std::int64_t> slots_;
};

}  // namespace detail

/// Smallest line size of the pool's caches (0 when there are none).
inline std::uint32_t smallest_line(const MemoryPool& pool) {
  std::uint32_t line = 0;
  for (const auto& c : pool.caches) {
    const auto l = c.cache_geometry->line_size_bytes;
    line = line == 0 ? l : std::min(line, l);
  }
  return line;
}

/// Streams every access of every nest, in program order, to `sink`.
/// Accesses that would straddle a `split_line` boundary are split.
template <class Sink>
void for_each_access(const Workload& workload, const std::vector<VariableProfile>& variables,
                     const Bindings& resolved, const MemoryLayout& layout, std::uint32_t split_line, Sink&& sink) {
  std::vector<std::vector<std::int64_t>> contents(workload.variables.size());
  for (std::size_t v = 0; v < workload.variables.size(); ++v) {
    if (workload.variables[v].init) contents[v] = materialize(*workload.variables[v].init, variables[v].element_count);
  }
  for (const auto& nest : workload.nests) {
    detail::NestCompiler compiler(workload, resolved);
    auto compiled = compiler.compile(nest.body);
    detail::TraceEmitter<std::remove_reference_t<Sink>> emitter(variables, layout, contents, split_line, sink);
    emitter.run(compiled, compiler.max_depth());
  }
}

inline Trace generate_trace(const Workload& workload, const std::vector<VariableProfile>& variables,
                            const Bindings& resolved, const MemoryLayout& layout, std::uint32_t split_line = 0) {
  Trace trace;
  for (const auto& v : variables) trace.variables.push_back(v.name);
  for_each_access(workload, variables, resolved, layout, split_line,
                  [&trace](const TraceRecord& r) { trace.records.push_back(r); });
  return trace;
}

// ---------------------------------------------------------------------------
// Simulation

enum class RequestType : std::uint8_t { Read = 0, Write = 1, Writeback = 2 };

struct CacheStats {
  std::string name;
  /// [request type][0 = hit, 1 = miss]
  std::uint64_t requests[3][2] = {{0, 0}, {0, 0}, {0, 0}};
  std::uint64_t fills = 0;       // refill reads sent to the next level
  std::uint64_t writebacks = 0;  // dirty evictions sent to the next level

  std::uint64_t reads() const { return requests[0][0] + requests[0][1]; }
  std::uint64_t writes() const { return requests[1][0] + requests[1][1] + requests[2][0] + requests[2][1]; }
  std::uint64_t hits() const { return requests[0][0] + requests[1][0] + requests[2][0]; }
  std::uint64_t misses() const { return requests[0][1] + requests[1][1] + requests[2][1]; }
};

struct ModuleStats {
  std::string name;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t demand_writes = 0;  // writes that are not write-backs
};

struct VariableStats {
  std::string name;
  std::uint64_t spm_reads = 0;
  std::uint64_t spm_writes = 0;
  std::uint64_t mm_reads = 0;
  std::uint64_t mm_writes = 0;
};

struct SimStats {
  std::vector<CacheStats> caches;
  std::vector<ModuleStats> scratchpads;
  ModuleStats main_memory;
  std::vector<VariableStats> variables;
  std::uint64_t records = 0;
  Rational t_exec_ns = 0;
};

/// Stateful hierarchy model fed one record at a time.
class HierarchySimulator {
public:
  HierarchySimulator(const MemoryPool& pool, std::vector<std::string> variable_names)
      : pool_(pool), spm_ranges_(assign_spm_ranges(pool)) {
    // Every latency becomes an integer number of ticks of 1/tick_den_ ns.
    BigInt den = 1;
    auto visit = [&den](const Rational& r) { den = boost::multiprecision::lcm(den, boost::multiprecision::denominator(r)); };
    for (const auto* m : pool.modules()) {
      visit(m->read_latency_ns);
      visit(m->write_latency_ns);
      if (m->miss_latency_ns) visit(*m->miss_latency_ns);
    }
    if (den > BigInt(1'000'000'000)) throw ConfigError("latencies need an impractically fine time base");
    tick_den_ = den.convert_to<std::uint64_t>();
    auto ticks = [this](const Rational& r) {
      return boost::multiprecision::numerator(r * Rational(tick_den_)).convert_to<std::uint64_t>();
    };
    for (const auto& c : pool.caches) {
      Level level;
      level.line = c.cache_geometry->line_size_bytes;
      level.ways = c.cache_geometry->associativity;
      level.sets = c.capacity_bytes / (std::uint64_t{level.line} * level.ways);
      level.lines.resize(level.sets * level.ways);
      level.read_ticks = ticks(c.read_latency_ns);
      level.write_ticks = ticks(c.write_latency_ns);
      level.miss_ticks = ticks(*c.miss_latency_ns);
      levels_.push_back(std::move(level));
      CacheStats s;
      s.name = c.name;
      stats_.caches.push_back(s);
    }
    mm_read_ticks_ = ticks(pool.main_memory.read_latency_ns);
    mm_write_ticks_ = ticks(pool.main_memory.write_latency_ns);
    stats_.main_memory.name = pool.main_memory.name;
    for (const auto& s : pool.scratchpads) {
      spm_read_ticks_.push_back(ticks(s.read_latency_ns));
      spm_write_ticks_.push_back(ticks(s.write_latency_ns));
      stats_.scratchpads.push_back({s.name, 0, 0, 0});
    }
    for (auto& name : variable_names) stats_.variables.push_back({std::move(name), 0, 0, 0, 0});
  }

  void access(const TraceRecord& record) {
    ++stats_.records;
    if (record.variable >= stats_.variables.size()) throw SimulationError("trace record names an unknown variable");
    auto& var = stats_.variables[record.variable];
    const bool is_read = record.mode == AccessMode::Read;
    const std::uint64_t last_byte = record.address + (record.size_bytes == 0 ? 0 : record.size_bytes - 1);

    for (std::size_t s = 0; s < spm_ranges_.size(); ++s) {
      if (!spm_ranges_[s].contains(record.address)) continue;
      if (!spm_ranges_[s].contains(last_byte)) throw SimulationError("access crosses a scratchpad boundary");
      auto& m = stats_.scratchpads[s];
      if (is_read) {
        ++m.reads;
        ticks_ += spm_read_ticks_[s];
        if (!record.continuation) ++var.spm_reads;
      } else {
        ++m.writes;
        ++m.demand_writes;
        ticks_ += spm_write_ticks_[s];
        if (!record.continuation) ++var.spm_writes;
      }
      return;
    }
    if (last_byte >= pool_.main_memory.capacity_bytes) {
      std::ostringstream msg;
      msg << "address 0x" << std::hex << record.address << " maps to no memory module";
      throw SimulationError(msg.str());
    }
    if (!record.continuation) ++(is_read ? var.mm_reads : var.mm_writes);
    if (levels_.empty()) {
      request_main_memory(is_read ? RequestType::Read : RequestType::Write);
      return;
    }
    const auto& top = levels_.front();
    const std::uint64_t first_line = record.address / top.line;
    const std::uint64_t end_line = last_byte / top.line;
    if (first_line != end_line) throw SimulationError("trace record straddles a cache line");
    request(0, record.address, is_read ? RequestType::Read : RequestType::Write);
  }

  /// Statistics so far; t_exec is exact.
  SimStats stats() const {
    SimStats out = stats_;
    out.t_exec_ns = Rational(BigInt(ticks_)) / Rational(BigInt(tick_den_));
    return out;
  }

private:
  struct Line {
    std::uint64_t tag = 0;
    std::uint64_t stamp = 0;
    bool valid = false;
    bool dirty = false;
  };

  struct Level {
    std::uint32_t line = 64;
    std::uint32_t ways = 1;
    std::uint64_t sets = 1;
    std::vector<Line> lines;
    std::uint64_t read_ticks = 0;
    std::uint64_t write_ticks = 0;
    std::uint64_t miss_ticks = 0;
  };

  void request_main_memory(RequestType type) {
    auto& mm = stats_.main_memory;
    switch (type) {
      case RequestType::Read:
        ++mm.reads;
        ticks_ += mm_read_ticks_;
        break;
      case RequestType::Write:
        ++mm.writes;
        ++mm.demand_writes;
        ticks_ += mm_write_ticks_;
        break;
      case RequestType::Writeback:
        ++mm.writes;
        break;
    }
  }

  void request(std::size_t index, std::uint64_t address, RequestType type) {
    if (index == levels_.size()) {
      request_main_memory(type);
      return;
    }
    auto& level = levels_[index];
    auto& stats = stats_.caches[index];
    const std::uint64_t block = address / level.line;
    const std::uint64_t set = block % level.sets;
    const std::uint64_t tag = block / level.sets;
    Line* ways = &level.lines[set * level.ways];
    const auto t = static_cast<std::size_t>(type);
    ++clock_;

    for (std::uint32_t w = 0; w < level.ways; ++w) {
      if (ways[w].valid && ways[w].tag == tag) {
        ++stats.requests[t][0];
        ways[w].stamp = clock_;
        if (type != RequestType::Read) ways[w].dirty = true;
        if (type == RequestType::Read) ticks_ += level.read_ticks;
        if (type == RequestType::Write) ticks_ += level.write_ticks;
        return;
      }
    }

    ++stats.requests[t][1];
    Line* victim = &ways[0];
    for (std::uint32_t w = 0; w < level.ways; ++w) {
      if (!ways[w].valid) {
        victim = &ways[w];
        break;
      }
      if (ways[w].stamp < victim->stamp) victim = &ways[w];
    }
    if (victim->valid && victim->dirty) {
      ++stats.writebacks;
      const std::uint64_t victim_block = victim->tag * level.sets + set;
      request(index + 1, victim_block * level.line, RequestType::Writeback);
    }
    if (type != RequestType::Writeback) {
      // A full-line write-back allocates without fetching.
      ticks_ += level.miss_ticks;
      ++stats.fills;
      request(index + 1, block * level.line, RequestType::Read);
    }
    victim->valid = true;
    victim->tag = tag;
    victim->stamp = clock_;
    victim->dirty = type != RequestType::Read;
  }

  const MemoryPool& pool_;
  std::vector<AddressRange> spm_ranges_;
  std::vector<Level> levels_;
  std::uint64_t tick_den_ = 1;
  std::uint64_t mm_read_ticks_ = 0;
  std::uint64_t mm_write_ticks_ = 0;
  std::vector<std::uint64_t> spm_read_ticks_;
  std::vector<std::uint64_t> spm_write_ticks_;
  std::uint64_t ticks_ = 0;
  std::uint64_t clock_ = 0;
  SimStats stats_;
};

inline SimStats simulate(const Trace& trace, const MemoryPool& pool) {
  HierarchySimulator sim(pool, trace.variables);
  for (const auto& r : trace.records) sim.access(r);
  return sim.stats();
}

/// Re-derives t_exec from the counters alone.
inline Rational latency_from_counters(const SimStats& stats, const MemoryPool& pool) {
  Rational t = 0;
  for (std::size_t l = 0; l < pool.caches.size(); ++l) {
    const auto& c = stats.caches.at(l);
    const auto& spec = pool.caches[l];
    t += Rational(c.requests[0][0]) * spec.read_latency_ns;
    t += Rational(c.requests[1][0]) * spec.write_latency_ns;
    t += Rational(c.requests[0][1] + c.requests[1][1]) * *spec.miss_latency_ns;
  }
  t += Rational(stats.main_memory.reads) * pool.main_memory.read_latency_ns;
  t += Rational(stats.main_memory.demand_writes) * pool.main_memory.write_latency_ns;
  for (std::size_t s = 0; s < pool.scratchpads.size(); ++s) {
    t += Rational(stats.scratchpads.at(s).reads) * pool.scratchpads[s].read_latency_ns;
    t += Rational(stats.scratchpads.at(s).writes) * pool.scratchpads[s].write_latency_ns;
  }
  return t;
}

/// Count-conservation identities between adjacent levels; empty when all
/// hold. Each level receives exactly the refills and write-backs issued by
/// the level above it.
inline std::vector<std::string> bookkeeping_violations(const SimStats& stats) {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < stats.caches.size(); ++l) {
    const auto& c = stats.caches[l];
    if (c.hits() + c.misses() != c.reads() + c.writes()) out.push_back(c.name + ": hits+misses != reads+writes");
    if (c.fills + c.requests[2][1] != c.misses()) out.push_back(c.name + ": fills do not match misses");
    const bool last = l + 1 == stats.caches.size();
    const std::uint64_t next_reads = last ? stats.main_memory.reads : stats.caches[l + 1].reads();
    const std::uint64_t next_writes = last ? stats.main_memory.writes : stats.caches[l + 1].writes();
    if (next_reads != c.fills) out.push_back(c.name + ": next level reads != fills");
    if (next_writes != c.writebacks) out.push_back(c.name + ": next level writes != write-backs");
  }
  return out;
}

/// Energy report for a finished simulation.
inline EnergyReport energy_from_stats(const SimStats& stats, const MemoryPool& pool,
                                      CacheEnergyMode mode = CacheEnergyMode::PerAccess) {
  std::vector<LevelCounts> levels;
  for (const auto& c : stats.caches) levels.push_back({c.reads(), c.writes(), c.misses()});
  const auto cache = cache_dynamic_energy(levels, stats.main_memory.reads, stats.main_memory.writes,
                                          stats.t_exec_ns, pool, mode);
  Rational spm = 0;
  for (std::size_t s = 0; s < pool.scratchpads.size(); ++s) {
    spm += spm_dynamic_energy(stats.scratchpads.at(s).reads, stats.scratchpads.at(s).writes, pool.scratchpads[s]);
  }
  return total_energy({static_energy(stats.t_exec_ns, pool), stats.t_exec_ns}, cache, spm);
}

// ---------------------------------------------------------------------------
// Static vs simulated counts

struct Discrepancy {
  std::string variable;
  AccessCounts static_counts;
  AccessCounts simulated;
  /// |simulated - static| / max(static, 1), reads and writes separately.
  Rational read_error = 0;
  Rational write_error = 0;

  bool is_zero() const { return read_error == 0 && write_error == 0; }
};

inline std::vector<Discrepancy> cross_check(const std::vector<AccessCounts>& static_counts, const SimStats& stats) {
  std::vector<Discrepancy> out;
  const std::size_t n = std::max(static_counts.size(), stats.variables.size());
  auto rel = [](std::uint64_t expected, std::uint64_t actual) -> Rational {
    const Rational diff = Rational(actual) - Rational(expected);
    return boost::multiprecision::abs(diff) / Rational(std::max<std::uint64_t>(expected, 1));
  };
  for (std::size_t v = 0; v < n; ++v) {
    Discrepancy d;
    if (v < stats.variables.size()) {
      const auto& s = stats.variables[v];
      d.variable = s.name;
      d.simulated = {s.spm_reads + s.mm_reads, s.spm_writes + s.mm_writes};
    }
    if (v < static_counts.size()) d.static_counts = static_counts[v];
    d.read_error = rel(d.static_counts.reads, d.simulated.reads);
    d.write_error = rel(d.static_counts.writes, d.simulated.writes);
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace text format: one record per line, `R|W <hex address> <size> <variable>`.

inline void dump_trace(std::ostream& out, const Trace& trace) {
  for (const auto& r : trace.records) {
    out << (r.mode == AccessMode::Read ? 'R' : 'W') << " 0x" << std::hex << r.address << std::dec << ' '
        << r.size_bytes << ' ' << trace.variables.at(r.variable) << '\n';
  }
}

inline Trace load_trace(std::istream& in) {
  Trace trace;
  std::unordered_map<std::string, std::uint32_t> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string mode;
    std::string address;
    std::uint64_t size = 0;
    std::string variable;
    if (!(fields >> mode >> address >> size >> variable) || (mode != "R" && mode != "W")) {
      throw ConfigError("trace line " + std::to_string(line_no) + ": expected 'R|W <hex address> <size> <variable>'");
    }
    TraceRecord r;
    r.mode = mode == "R" ? AccessMode::Read : AccessMode::Write;
    try {
      std::size_t used = 0;
      r.address = std::stoull(address, &used, 16);
      if (used != address.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("trace line " + std::to_string(line_no) + ": bad address '" + address + "'");
    }
    r.size_bytes = static_cast<std::uint32_t>(size);
    auto [it, inserted] = ids.emplace(variable, static_cast<std::uint32_t>(trace.variables.size()));
    if (inserted) trace.variables.push_back(variable);
    r.variable = it->second;
    trace.records.push_back(r);
  }
  return trace;
}

inline json to_json(const SimStats& stats) {
  json doc;
  doc["records"] = stats.records;
  doc["t_mem_ns"] = to_fixed(stats.t_exec_ns, 3);
  doc["caches"] = json::array();
  for (const auto& c : stats.caches) {
    doc["caches"].push_back({{"name", c.name},
                             {"reads", c.reads()},
                             {"writes", c.writes()},
                             {"hits", c.hits()},
                             {"misses", c.misses()},
                             {"fills", c.fills},
                             {"writebacks", c.writebacks}});
  }
  doc["scratchpads"] = json::array();
  for (const auto& s : stats.scratchpads) {
    doc["scratchpads"].push_back({{"name", s.name}, {"reads", s.reads}, {"writes", s.writes}});
  }
  doc["main_memory"] = {{"name", stats.main_memory.name},
                        {"reads", stats.main_memory.reads},
                        {"writes", stats.main_memory.writes}};
  doc["variables"] = json::array();
  for (const auto& v : stats.variables) {
    doc["variables"].push_back({{"name", v.name},
                                {"spm_reads", v.spm_reads},
                                {"spm_writes", v.spm_writes},
                                {"mm_reads", v.mm_reads},
                                {"mm_writes", v.mm_writes}});
  }
  return doc;
}

}  // namespace spmalloc
