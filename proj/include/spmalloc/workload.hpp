#pragma once

/// @file workload.hpp
/// Program variables, (possibly imperfect) affine loop nests, the workload
/// document, static access counting and cache-friendliness classification.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spmalloc/access_expr.hpp"
#include "spmalloc/error.hpp"
#include "spmalloc/memspec.hpp"

namespace spmalloc {

using Bindings = std::map<std::string, std::int64_t>;

enum class AccessMode { Read, Write };

enum class CacheFriendliness { Friendly, Unfriendly, Auto };

enum class AccessClass { Friendly, Unfriendly };

inline std::string_view to_string(AccessMode mode) { return mode == AccessMode::Read ? "R" : "W"; }

inline std::string_view to_string(AccessClass c) {
  return c == AccessClass::Friendly ? "friendly" : "unfriendly";
}

inline std::string_view to_string(CacheFriendliness c) {
  switch (c) {
    case CacheFriendliness::Friendly: return "friendly";
    case CacheFriendliness::Unfriendly: return "unfriendly";
    case CacheFriendliness::Auto: return "auto";
  }
  return "?";
}

/// A program variable with concrete shape and access counts.
struct VariableProfile {
  std::string name;
  std::uint64_t element_size_bytes = 8;
  std::uint64_t element_count = 1;
  std::vector<std::uint64_t> dims;  // row-major
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  CacheFriendliness cache_friendly = CacheFriendliness::Auto;

  std::uint64_t footprint_bytes() const { return element_size_bytes * element_count; }
};

/// Initial contents of an index array read through an indirect subscript.
struct IndexInit {
  enum class Kind { Values, Iota, Reverse, Permutation };
  Kind kind = Kind::Iota;
  std::vector<std::int64_t> values;  // Kind::Values; repeated cyclically
  std::uint64_t seed = 0;            // Kind::Permutation
};

/// Variable as declared in a workload document: dims may be parametric.
struct VariableDecl {
  std::string name;
  std::uint64_t element_size_bytes = 8;
  std::vector<AffineExpr> dims;
  std::optional<std::uint64_t> reads_override;
  std::optional<std::uint64_t> writes_override;
  CacheFriendliness cache_friendly = CacheFriendliness::Auto;
  std::optional<IndexInit> init;
};

struct AccessSite {
  AccessExpr expr;
  AccessMode mode = AccessMode::Read;
};

struct Statement;

/// `for iterator in [lower, upper)`.
struct Loop {
  std::string iterator;
  AffineExpr lower;
  AffineExpr upper;
  std::vector<Statement> body;
};

struct Statement {
  std::variant<Loop, AccessSite> node;
};

/// A loop nest is a statement tree; accesses may sit at any depth and run in
/// body order within an iteration.
struct LoopNest {
  std::string name;
  std::vector<Statement> body;
};

struct Workload {
  std::string name;
  /// Declared parameters with their default values (nullopt: must be bound).
  std::map<std::string, std::optional<std::int64_t>> parameters;
  std::vector<VariableDecl> variables;
  std::vector<LoopNest> nests;

  std::optional<std::size_t> variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (variables[i].name == name) return i;
    }
    return std::nullopt;
  }
};

struct AccessCounts {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;

  bool operator==(const AccessCounts&) const = default;
};

// ---------------------------------------------------------------------------
// Parameter binding

/// Defaults overridden by `bindings`; every declared parameter must end up
/// bound and every binding must name a declared parameter.
inline Bindings resolve_bindings(const Workload& workload, const Bindings& bindings) {
  Bindings out;
  for (const auto& [name, value] : bindings) {
    if (!workload.parameters.count(name)) {
      throw ConfigError("binding for undeclared parameter '" + name + "'");
    }
  }
  for (const auto& [name, fallback] : workload.parameters) {
    if (auto it = bindings.find(name); it != bindings.end()) {
      out[name] = it->second;
    } else if (fallback) {
      out[name] = *fallback;
    } else {
      throw ConfigError("unbound parameter '" + name + "'");
    }
  }
  return out;
}

/// Evaluates an affine expression; every symbol must be in `env`.
inline std::int64_t evaluate(const AffineExpr& expr, const Bindings& env) {
  std::int64_t value = expr.constant;
  for (const auto& [symbol, c] : expr.coefficients) {
    auto it = env.find(symbol);
    if (it == env.end()) throw ConfigError("unbound symbol '" + symbol + "'");
    std::int64_t term = 0;
    if (__builtin_mul_overflow(c, it->second, &term) || __builtin_add_overflow(value, term, &value)) {
      throw ConfigError("overflow evaluating '" + to_string(expr) + "'");
    }
  }
  return value;
}

/// Concrete profiles (dims evaluated, overrides applied, counts zero).
inline std::vector<VariableProfile> bind_variables(const Workload& workload, const Bindings& resolved) {
  std::vector<VariableProfile> out;
  for (const auto& decl : workload.variables) {
    VariableProfile v;
    v.name = decl.name;
    v.element_size_bytes = decl.element_size_bytes;
    v.cache_friendly = decl.cache_friendly;
    v.element_count = 1;
    for (const auto& d : decl.dims) {
      std::int64_t extent = evaluate(d, resolved);
      if (extent <= 0) {
        throw ConfigError("variable '" + decl.name + "': dimension " + to_string(d) + " evaluates to " +
                          std::to_string(extent));
      }
      v.dims.push_back(static_cast<std::uint64_t>(extent));
      v.element_count *= static_cast<std::uint64_t>(extent);
    }
    if (v.element_size_bytes == 0) throw ConfigError("variable '" + decl.name + "': element_size_bytes must be > 0");
    v.reads = decl.reads_override.value_or(0);
    v.writes = decl.writes_override.value_or(0);
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Static access counting

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw ConfigError("access count overflow");
  return r;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw ConfigError("access count overflow");
  return r;
}

inline void add_access(const Workload& workload, const AccessExpr& expr, AccessMode mode,
                       std::vector<AccessCounts>& counts) {
  auto index = workload.variable_index(expr.base);
  if (!index) throw ConfigError("access to undeclared variable '" + expr.base + "'");
  auto& c = counts[*index];
  (mode == AccessMode::Read ? c.reads : c.writes) += 1;
  // Evaluating an indirect subscript reads the index array first.
  for (const auto& idx : expr.indices) {
    if (const auto* ind = std::get_if<IndirectIndex>(&idx)) {
      add_access(workload, *ind->inner, AccessMode::Read, counts);
    }
  }
}

inline void collect_bound_symbols(const std::vector<Statement>& body, std::set<std::string>& out) {
  for (const auto& stmt : body) {
    if (const auto* loop = std::get_if<Loop>(&stmt.node)) {
      for (const auto& [s, _] : loop->lower.coefficients) out.insert(s);
      for (const auto& [s, _] : loop->upper.coefficients) out.insert(s);
      collect_bound_symbols(loop->body, out);
    }
  }
}

/// Counts for one execution of `body` under `env`. A loop whose iterator
/// appears in no nested bound has iteration-invariant body counts and is
/// multiplied out instead of enumerated.
inline std::vector<AccessCounts> count_body(const Workload& workload, const std::vector<Statement>& body,
                                            Bindings& env) {
  std::vector<AccessCounts> total(workload.variables.size());
  auto accumulate = [&](const std::vector<AccessCounts>& part, std::uint64_t times) {
    for (std::size_t v = 0; v < total.size(); ++v) {
      total[v].reads = checked_add(total[v].reads, checked_mul(part[v].reads, times));
      total[v].writes = checked_add(total[v].writes, checked_mul(part[v].writes, times));
    }
  };
  for (const auto& stmt : body) {
    if (const auto* site = std::get_if<AccessSite>(&stmt.node)) {
      std::vector<AccessCounts> one(workload.variables.size());
      add_access(workload, site->expr, site->mode, one);
      accumulate(one, 1);
      continue;
    }
    const auto& loop = std::get<Loop>(stmt.node);
    const std::int64_t lo = evaluate(loop.lower, env);
    const std::int64_t hi = evaluate(loop.upper, env);
    if (hi < lo) {
      throw ConfigError("loop '" + loop.iterator + "' has negative trip count [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + ")");
    }
    const auto trip = static_cast<std::uint64_t>(hi - lo);
    if (trip == 0) continue;
    std::set<std::string> dependent;
    collect_bound_symbols(loop.body, dependent);
    if (!dependent.count(loop.iterator)) {
      env[loop.iterator] = lo;
      accumulate(count_body(workload, loop.body, env), trip);
    } else {
      for (std::int64_t it = lo; it < hi; ++it) {
        env[loop.iterator] = it;
        accumulate(count_body(workload, loop.body, env), 1);
      }
    }
    env.erase(loop.iterator);
  }
  return total;
}

}  // namespace detail

/// Exact static read/write counts per variable (indexed like
/// `workload.variables`) for one nest.
inline std::vector<AccessCounts> count_accesses(const Workload& workload, const LoopNest& nest,
                                                const Bindings& resolved) {
  Bindings env = resolved;
  return detail::count_body(workload, nest.body, env);
}

/// Sums over every nest of the workload.
inline std::vector<AccessCounts> count_accesses(const Workload& workload, const Bindings& resolved) {
  std::vector<AccessCounts> total(workload.variables.size());
  for (const auto& nest : workload.nests) {
    auto part = count_accesses(workload, nest, resolved);
    for (std::size_t v = 0; v < total.size(); ++v) {
      total[v].reads = detail::checked_add(total[v].reads, part[v].reads);
      total[v].writes = detail::checked_add(total[v].writes, part[v].writes);
    }
  }
  return total;
}

/// Bound profiles whose reads/writes come from static counting unless the
/// document overrides them.
inline std::vector<VariableProfile> profile_variables(const Workload& workload, const Bindings& resolved) {
  auto profiles = bind_variables(workload, resolved);
  auto counts = count_accesses(workload, resolved);
  for (std::size_t v = 0; v < profiles.size(); ++v) {
    const auto& decl = workload.variables[v];
    profiles[v].reads = decl.reads_override.value_or(counts[v].reads);
    profiles[v].writes = decl.writes_override.value_or(counts[v].writes);
  }
  return profiles;
}

// ---------------------------------------------------------------------------
// Cache-friendliness

struct ClassifiedAccess {
  AccessClass result = AccessClass::Friendly;
  /// Byte distance between consecutive innermost iterations; absent for
  /// indirect accesses.
  std::optional<std::int64_t> stride_bytes;
};

/// Classifies one access. Two consecutive accesses (consecutive values of the
/// innermost enclosing iterator) share a cache line on a line-aligned
/// row-major array iff |stride| < line size; an indirect subscript is always
/// unfriendly. No enclosing iterator means stride 0.
inline ClassifiedAccess classify_access(const AccessExpr& expr, const VariableProfile& var,
                                        std::optional<std::string_view> innermost_iterator,
                                        std::uint64_t line_size_bytes) {
  if (expr.base != var.name) {
    throw ConfigError("access '" + to_string(expr) + "' does not reference '" + var.name + "'");
  }
  if (expr.indices.size() != var.dims.size()) {
    throw ConfigError("access '" + to_string(expr) + "' has " + std::to_string(expr.indices.size()) +
                      " subscripts but '" + var.name + "' has " + std::to_string(var.dims.size()) +
                      " dimensions");
  }
  if (line_size_bytes == 0) throw ConfigError("line size must be > 0");
  if (expr.has_indirect()) return {AccessClass::Unfriendly, std::nullopt};

  std::int64_t stride_elements = 0;
  if (innermost_iterator) {
    const std::string iter(*innermost_iterator);
    std::int64_t weight = 1;
    for (std::size_t d = expr.indices.size(); d-- > 0;) {
      stride_elements += std::get<AffineExpr>(expr.indices[d]).coefficient(iter) * weight;
      weight *= static_cast<std::int64_t>(var.dims[d]);
    }
  }
  const std::int64_t stride = stride_elements * static_cast<std::int64_t>(var.element_size_bytes);
  const std::int64_t magnitude = stride < 0 ? -stride : stride;
  return {magnitude < static_cast<std::int64_t>(line_size_bytes) ? AccessClass::Friendly : AccessClass::Unfriendly,
          stride};
}

/// One access occurrence inside a nest, including the implicit reads of
/// index arrays in indirect subscripts.
struct AccessOccurrence {
  const AccessExpr* expr = nullptr;
  AccessMode mode = AccessMode::Read;
  std::optional<std::string> innermost_iterator;
  std::string nest;
};

namespace detail {

inline void collect_occurrences(const AccessExpr& expr, AccessMode mode, const std::optional<std::string>& inner,
                                const std::string& nest, std::vector<AccessOccurrence>& out) {
  out.push_back({&expr, mode, inner, nest});
  for (const auto& idx : expr.indices) {
    if (const auto* ind = std::get_if<IndirectIndex>(&idx)) {
      collect_occurrences(*ind->inner, AccessMode::Read, inner, nest, out);
    }
  }
}

inline void collect_occurrences(const std::vector<Statement>& body, const std::optional<std::string>& inner,
                                const std::string& nest, std::vector<AccessOccurrence>& out) {
  for (const auto& stmt : body) {
    if (const auto* site = std::get_if<AccessSite>(&stmt.node)) {
      collect_occurrences(site->expr, site->mode, inner, nest, out);
    } else {
      const auto& loop = std::get<Loop>(stmt.node);
      collect_occurrences(loop.body, loop.iterator, nest, out);
    }
  }
}

}  // namespace detail

/// Every access occurrence of the workload in program text order.
inline std::vector<AccessOccurrence> access_occurrences(const Workload& workload) {
  std::vector<AccessOccurrence> out;
  for (const auto& nest : workload.nests) detail::collect_occurrences(nest.body, std::nullopt, nest.name, out);
  return out;
}

/// C(ψ): 1 iff every access to the variable is friendly. A manual override
/// takes precedence over the access expressions.
inline int variable_cf(const VariableProfile& var, const std::vector<AccessOccurrence>& occurrences,
                       std::uint64_t line_size_bytes) {
  if (var.cache_friendly == CacheFriendliness::Friendly) return 1;
  if (var.cache_friendly == CacheFriendliness::Unfriendly) return 0;
  bool any = false;
  for (const auto& occ : occurrences) {
    if (occ.expr->base != var.name) continue;
    any = true;
    auto c = classify_access(*occ.expr, var, occ.innermost_iterator, line_size_bytes);
    if (c.result == AccessClass::Unfriendly) return 0;
  }
  if (!any) {
    throw ConfigError("variable '" + var.name + "' has no accesses to classify; set cache_friendly explicitly");
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Index-array contents

/// Materializes the initial contents of an index array of `count` elements.
inline std::vector<std::int64_t> materialize(const IndexInit& init, std::uint64_t count) {
  std::vector<std::int64_t> out(count);
  switch (init.kind) {
    case IndexInit::Kind::Values:
      if (init.values.empty()) throw ConfigError("index array init has no values");
      for (std::uint64_t k = 0; k < count; ++k) out[k] = init.values[k % init.values.size()];
      break;
    case IndexInit::Kind::Iota:
      for (std::uint64_t k = 0; k < count; ++k) out[k] = static_cast<std::int64_t>(k);
      break;
    case IndexInit::Kind::Reverse:
      for (std::uint64_t k = 0; k < count; ++k) out[k] = static_cast<std::int64_t>(count - 1 - k);
      break;
    case IndexInit::Kind::Permutation: {
      for (std::uint64_t k = 0; k < count; ++k) out[k] = static_cast<std::int64_t>(k);
      // Fisher-Yates over splitmix64 so the sequence is identical everywhere.
      std::uint64_t state = init.seed;
      auto next = [&state] {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
      };
      for (std::uint64_t k = count; k > 1; --k) {
        std::uint64_t j = next() % k;
        std::swap(out[k - 1], out[j]);
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Workload document

namespace detail {

inline std::string affine_text(const json& value, const std::string& where) {
  if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
  if (value.is_string()) return value.get<std::string>();
  throw ConfigError(where + ": expected an integer or an affine expression string");
}

inline AffineExpr affine_field(const json& value, const std::string& where) {
  try {
    return parse_affine(affine_text(value, where));
  } catch (const ConfigError& e) {
    if (dynamic_cast<const ParseError*>(&e)) throw ConfigError(where + ": " + e.what());
    throw;
  }
}

inline AccessMode parse_mode(const json& value, const std::string& where) {
  if (value.is_string()) {
    auto s = value.get<std::string>();
    if (s == "Read" || s == "R" || s == "read") return AccessMode::Read;
    if (s == "Write" || s == "W" || s == "write") return AccessMode::Write;
  }
  throw ConfigError(where + ": mode must be Read or Write");
}

struct NestContext {
  const Workload& workload;
  std::set<std::string> arrays;
};

inline void check_symbols(const AffineExpr& expr, const std::vector<std::string>& scope, const Workload& workload,
                          const std::string& where) {
  for (const auto& [symbol, _] : expr.coefficients) {
    bool ok = workload.parameters.count(symbol) > 0;
    for (const auto& s : scope) ok = ok || s == symbol;
    if (!ok) throw ConfigError(where + ": '" + symbol + "' is neither an enclosing iterator nor a parameter");
  }
}

inline void check_access(const AccessExpr& expr, const std::vector<std::string>& scope, const Workload& workload,
                         const std::string& where) {
  auto index = workload.variable_index(expr.base);
  if (!index) throw ConfigError(where + ": unknown variable '" + expr.base + "'");
  if (expr.indices.size() != workload.variables[*index].dims.size()) {
    throw ConfigError(where + ": '" + to_string(expr) + "' has " + std::to_string(expr.indices.size()) +
                      " subscripts but '" + expr.base + "' has " +
                      std::to_string(workload.variables[*index].dims.size()) + " dimensions");
  }
  for (const auto& idx : expr.indices) {
    if (const auto* affine = std::get_if<AffineExpr>(&idx)) {
      check_symbols(*affine, scope, workload, where);
    } else {
      const auto& ind = std::get<IndirectIndex>(idx);
      check_symbols(ind.offset, scope, workload, where);
      check_access(*ind.inner, scope, workload, where);
      if (!workload.variables[*workload.variable_index(ind.inner->base)].init) {
        throw ConfigError(where + ": index array '" + ind.inner->base + "' needs an 'init' to be read indirectly");
      }
    }
  }
}

inline AccessSite parse_site(const NestContext& ctx, const std::string& text, AccessMode mode,
                             const std::vector<std::string>& scope, const std::string& where) {
  AccessSite site;
  site.mode = mode;
  try {
    site.expr = parse_access(text, ctx.arrays);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": '" + text + "': " + e.what());
  }
  check_access(site.expr, scope, ctx.workload, where);
  return site;
}

inline void check_iterator_name(const NestContext& ctx, const std::string& name, const std::vector<std::string>& scope,
                                const std::string& where) {
  if (name.empty()) throw ConfigError(where + ": empty iterator name");
  for (const auto& s : scope) {
    if (s == name) throw ConfigError(where + ": iterator '" + name + "' shadows an enclosing iterator");
  }
  if (ctx.workload.parameters.count(name) || ctx.arrays.count(name)) {
    throw ConfigError(where + ": iterator '" + name + "' clashes with a parameter or variable");
  }
}

inline std::vector<Statement> parse_body(const NestContext& ctx, const json& body, std::vector<std::string>& scope,
                                         const std::string& where) {
  if (!body.is_array()) throw ConfigError(where + ": expected an array of statements");
  std::vector<Statement> out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto& stmt = body[i];
    const std::string path = where + "[" + std::to_string(i) + "]";
    if (!stmt.is_object()) throw ConfigError(path + ": expected an object");
    if (stmt.contains("for")) {
      Loop loop;
      loop.iterator = stmt.at("for").get<std::string>();
      check_iterator_name(ctx, loop.iterator, scope, path);
      if (!stmt.contains("from") || !stmt.contains("to")) throw ConfigError(path + ": loop needs 'from' and 'to'");
      loop.lower = affine_field(stmt.at("from"), path + ".from");
      loop.upper = affine_field(stmt.at("to"), path + ".to");
      check_symbols(loop.lower, scope, ctx.workload, path + ".from");
      check_symbols(loop.upper, scope, ctx.workload, path + ".to");
      scope.push_back(loop.iterator);
      loop.body = parse_body(ctx, stmt.contains("body") ? stmt.at("body") : json::array(), scope, path + ".body");
      scope.pop_back();
      out.push_back({std::move(loop)});
    } else if (stmt.contains("read") || stmt.contains("write")) {
      const bool is_read = stmt.contains("read");
      const auto& text = stmt.at(is_read ? "read" : "write");
      if (!text.is_string()) throw ConfigError(path + ": access must be a string");
      out.push_back({parse_site(ctx, text.get<std::string>(), is_read ? AccessMode::Read : AccessMode::Write, scope,
                                path)});
    } else if (stmt.contains("expr")) {
      out.push_back({parse_site(ctx, stmt.at("expr").get<std::string>(),
                                parse_mode(stmt.contains("mode") ? stmt.at("mode") : json(), path + ".mode"), scope,
                                path)});
    } else {
      throw ConfigError(path + ": expected a 'for' loop or a 'read'/'write' access");
    }
  }
  return out;
}

/// Flat form: `iterators[]` (outermost first) with every access innermost.
inline std::vector<Statement> parse_flat_nest(const NestContext& ctx, const json& doc, const std::string& where) {
  const auto& iterators = doc.at("iterators");
  if (!iterators.is_array()) throw ConfigError(where + ".iterators: expected an array");
  std::vector<std::string> scope;
  std::vector<Loop> chain;
  for (std::size_t i = 0; i < iterators.size(); ++i) {
    const auto& it = iterators[i];
    const std::string path = where + ".iterators[" + std::to_string(i) + "]";
    Loop loop;
    loop.iterator = it.at("name").get<std::string>();
    check_iterator_name(ctx, loop.iterator, scope, path);
    loop.lower = affine_field(it.at("lower_bound"), path + ".lower_bound");
    loop.upper = affine_field(it.at("upper_bound"), path + ".upper_bound");
    check_symbols(loop.lower, scope, ctx.workload, path + ".lower_bound");
    check_symbols(loop.upper, scope, ctx.workload, path + ".upper_bound");
    scope.push_back(loop.iterator);
    chain.push_back(std::move(loop));
  }
  std::vector<Statement> accesses;
  if (doc.contains("accesses")) {
    const auto& list = doc.at("accesses");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = where + ".accesses[" + std::to_string(i) + "]";
      accesses.push_back({parse_site(ctx, list[i].at("expr").get<std::string>(),
                                     parse_mode(list[i].contains("mode") ? list[i].at("mode") : json(), path + ".mode"),
                                     scope, path)});
    }
  }
  std::vector<Statement> body = std::move(accesses);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    it->body = std::move(body);
    body.clear();
    body.push_back({std::move(*it)});
  }
  return body;
}

inline IndexInit parse_init(const json& value, const std::string& where) {
  IndexInit init;
  if (value.is_array()) {
    init.kind = IndexInit::Kind::Values;
    for (const auto& v : value) {
      if (!v.is_number_integer()) throw ConfigError(where + ": values must be integers");
      init.values.push_back(v.get<std::int64_t>());
    }
    return init;
  }
  if (value.is_string()) {
    auto s = value.get<std::string>();
    if (s == "iota") return {IndexInit::Kind::Iota, {}, 0};
    if (s == "reverse") return {IndexInit::Kind::Reverse, {}, 0};
  }
  if (value.is_object() && value.contains("permutation_seed")) {
    init.kind = IndexInit::Kind::Permutation;
    init.seed = value.at("permutation_seed").get<std::uint64_t>();
    return init;
  }
  throw ConfigError(where + ": expected a value list, \"iota\", \"reverse\" or {\"permutation_seed\": n}");
}

}  // namespace detail

/// Parses a workload document (`name`, `parameters`, `variables[]`,
/// `loop_nests[]`).
inline Workload load_workload(const json& doc) {
  if (!doc.is_object()) throw ConfigError("workload document: expected an object");
  Workload w;
  w.name = doc.value("name", std::string("workload"));
  if (doc.contains("parameters")) {
    for (const auto& [name, value] : doc.at("parameters").items()) {
      if (value.is_null()) {
        w.parameters[name] = std::nullopt;
      } else if (value.is_number_integer()) {
        w.parameters[name] = value.get<std::int64_t>();
      } else {
        throw ConfigError("parameters." + name + ": expected an integer or null");
      }
    }
  }
  std::set<std::string> arrays;
  if (doc.contains("variables")) {
    const auto& vars = doc.at("variables");
    if (!vars.is_array()) throw ConfigError("variables: expected an array");
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const auto& v = vars[i];
      const std::string path = "variables[" + std::to_string(i) + "]";
      if (!v.is_object() || !v.contains("name")) throw ConfigError(path + ": missing field 'name'");
      VariableDecl decl;
      decl.name = v.at("name").get<std::string>();
      if (!arrays.insert(decl.name).second) throw ConfigError(path + ": duplicate variable '" + decl.name + "'");
      if (w.parameters.count(decl.name)) throw ConfigError(path + ": variable name clashes with a parameter");
      if (!v.contains("element_size_bytes")) throw ConfigError(path + ": missing field 'element_size_bytes'");
      decl.element_size_bytes = detail::unsigned_field(v.at("element_size_bytes"), path + ".element_size_bytes");
      if (!v.contains("dims") || !v.at("dims").is_array() || v.at("dims").empty()) {
        throw ConfigError(path + ": 'dims' must be a non-empty array");
      }
      for (std::size_t d = 0; d < v.at("dims").size(); ++d) {
        const std::string dpath = path + ".dims[" + std::to_string(d) + "]";
        AffineExpr dim = detail::affine_field(v.at("dims")[d], dpath);
        detail::check_symbols(dim, {}, w, dpath);
        decl.dims.push_back(std::move(dim));
      }
      if (v.contains("reads")) decl.reads_override = detail::unsigned_field(v.at("reads"), path + ".reads");
      if (v.contains("writes")) decl.writes_override = detail::unsigned_field(v.at("writes"), path + ".writes");
      if (v.contains("cache_friendly")) {
        const auto& cf = v.at("cache_friendly");
        if (cf == "friendly" || cf == true) {
          decl.cache_friendly = CacheFriendliness::Friendly;
        } else if (cf == "unfriendly" || cf == false) {
          decl.cache_friendly = CacheFriendliness::Unfriendly;
        } else if (cf == "auto") {
          decl.cache_friendly = CacheFriendliness::Auto;
        } else {
          throw ConfigError(path + ".cache_friendly: expected friendly, unfriendly or auto");
        }
      }
      if (v.contains("init")) decl.init = detail::parse_init(v.at("init"), path + ".init");
      w.variables.push_back(std::move(decl));
    }
  }
  detail::NestContext ctx{w, arrays};
  if (doc.contains("loop_nests")) {
    const auto& nests = doc.at("loop_nests");
    if (!nests.is_array()) throw ConfigError("loop_nests: expected an array");
    for (std::size_t i = 0; i < nests.size(); ++i) {
      const auto& n = nests[i];
      const std::string path = "loop_nests[" + std::to_string(i) + "]";
      if (!n.is_object()) throw ConfigError(path + ": expected an object");
      LoopNest nest;
      nest.name = n.value("name", "nest" + std::to_string(i));
      if (n.contains("iterators")) {
        nest.body = detail::parse_flat_nest(ctx, n, path);
      } else {
        std::vector<std::string> scope;
        nest.body = detail::parse_body(ctx, n.contains("body") ? n.at("body") : json::array(), scope, path + ".body");
      }
      w.nests.push_back(std::move(nest));
    }
  }
  return w;
}

inline Workload load_workload_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("workload document: ") + e.what());
  }
  try {
    return load_workload(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("workload document: ") + e.what());
  }
}

inline Workload load_workload_file(const std::string& path) {
  try {
    return load_workload_text(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace spmalloc
