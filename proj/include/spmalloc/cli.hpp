#pragma once

/// @file cli.hpp
/// Subcommands of the `spmalloc` tool. Each command takes a parsed RunConfig
/// and writes its documents either into `out_dir` or to the given stream.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spmalloc/pipeline.hpp"

namespace spmalloc::cli {

enum class Format { Csv, Doc };

struct RunConfig {
  std::vector<std::string> pool_paths;
  std::string workload_path;
  Bindings bindings;
  std::string baseline = "cache_256kB";
  std::string out_dir;  // empty: write to the output stream
  Format format = Format::Doc;

  // subcommand-specific
  std::optional<std::uint64_t> line_size_bytes;  // classify without a pool
  std::string plan_path;                         // simulate
  std::string trace_path;                        // simulate: dump the trace here
  bool power_mode = false;                       // simulate: power x time cache energy
  std::string parameter = "N";                   // sweep
  std::vector<std::int64_t> sizes;               // sweep
  bool long_format = false;                      // sweep
  unsigned threads = 0;                          // sweep
  std::string input_path;                        // report
};

/// Parses "NAME=INT".
inline std::pair<std::string, std::int64_t> parse_binding(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("binding '" + text + "' is not NAME=INT");
  const std::string name = text.substr(0, eq);
  const std::string value = text.substr(eq + 1);
  std::int64_t parsed = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, parsed);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError("binding '" + text + "': '" + value + "' is not an integer");
  }
  return {name, parsed};
}

inline Bindings parse_bindings(const std::vector<std::string>& texts) {
  Bindings out;
  for (const auto& t : texts) {
    auto [name, value] = parse_binding(t);
    if (!out.emplace(name, value).second) throw ConfigError("parameter '" + name + "' bound twice");
  }
  return out;
}

namespace detail {

inline void write_output(const RunConfig& run, const std::string& file_name, const std::string& content,
                         std::ostream& out) {
  if (run.out_dir.empty()) {
    out << content;
    return;
  }
  std::filesystem::create_directories(run.out_dir);
  const auto path = std::filesystem::path(run.out_dir) / file_name;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path.string() + "'");
  file << content;
}

inline std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

inline const std::string& single_pool(const RunConfig& run) {
  if (run.pool_paths.size() != 1) throw ConfigError("exactly one --pool is required");
  return run.pool_paths.front();
}

}  // namespace detail

/// Per-variable C(ψ) with the classification and stride of every access.
inline int cmd_classify(const RunConfig& run, std::ostream& out) {
  const auto workload = load_workload_file(run.workload_path);
  std::uint64_t line = run.line_size_bytes.value_or(64);
  if (!run.pool_paths.empty()) line = classification_line(load_pool_file(detail::single_pool(run)));
  const auto resolved = resolve_bindings(workload, run.bindings);
  const auto variables = bind_variables(workload, resolved);
  const auto occurrences = access_occurrences(workload);

  json doc;
  doc["workload"] = workload.name;
  doc["line_size_bytes"] = line;
  doc["variables"] = json::array();
  std::ostringstream csv;
  csv << "variable,nest,access,mode,innermost,stride_bytes,class,variable_cf\n";
  for (const auto& var : variables) {
    json entry;
    entry["name"] = var.name;
    const int cf = variable_cf(var, occurrences, line);
    entry["cache_friendly"] = cf;
    entry["override"] = std::string(to_string(var.cache_friendly));
    entry["accesses"] = json::array();
    for (const auto& occ : occurrences) {
      if (occ.expr->base != var.name) continue;
      const auto c = classify_access(*occ.expr, var, occ.innermost_iterator, line);
      json a;
      a["nest"] = occ.nest;
      a["access"] = to_string(*occ.expr);
      a["mode"] = std::string(to_string(occ.mode));
      a["innermost"] = occ.innermost_iterator ? json(*occ.innermost_iterator) : json(nullptr);
      a["stride_bytes"] = c.stride_bytes ? json(*c.stride_bytes) : json(nullptr);
      a["class"] = std::string(to_string(c.result));
      entry["accesses"].push_back(a);
      csv << var.name << ',' << occ.nest << ',' << to_string(*occ.expr) << ',' << to_string(occ.mode) << ','
          << occ.innermost_iterator.value_or("") << ','
          << (c.stride_bytes ? std::to_string(*c.stride_bytes) : std::string()) << ',' << to_string(c.result)
          << ',' << cf << '\n';
    }
    doc["variables"].push_back(entry);
  }
  if (run.format == Format::Csv) {
    detail::write_output(run, "classification.csv", csv.str(), out);
  } else {
    detail::write_output(run, "classification.json", detail::dump(doc), out);
  }
  return 0;
}

/// count → model → exact solve; emits the plan document.
inline int cmd_allocate(const RunConfig& run, std::ostream& out) {
  const auto pool = load_pool_file(detail::single_pool(run));
  const auto workload = load_workload_file(run.workload_path);
  const auto resolved = resolve_bindings(workload, run.bindings);
  const auto variables = profile_variables(workload, resolved);
  const auto flags = cache_friendly_flags(variables, workload, classification_line(pool));
  const auto model = build_model(variables, flags, pool);
  const auto plan = solve_exact(model);
  json doc = plan_to_json(plan, model, pool);
  doc["workload"] = workload.name;
  doc["pool"] = pool.name;
  json b = json::object();
  for (const auto& [k, v] : resolved) b[k] = v;
  doc["bindings"] = b;
  detail::write_output(run, "plan.json", detail::dump(doc), out);
  return 0;
}

inline json discrepancies_to_json(const std::vector<Discrepancy>& list) {
  json arr = json::array();
  for (const auto& d : list) {
    json e;
    e["variable"] = d.variable;
    e["static_reads"] = d.static_counts.reads;
    e["static_writes"] = d.static_counts.writes;
    e["simulated_reads"] = d.simulated.reads;
    e["simulated_writes"] = d.simulated.writes;
    e["read_error"] = to_fixed(d.read_error, 6);
    e["write_error"] = to_fixed(d.write_error, 6);
    arr.push_back(e);
  }
  return arr;
}

/// Trace → simulate → energy. Without --plan the exact solver supplies one.
inline int cmd_simulate(const RunConfig& run, std::ostream& out) {
  const auto pool = load_pool_file(detail::single_pool(run));
  const auto workload = load_workload_file(run.workload_path);
  PipelineOptions options;
  if (!run.plan_path.empty()) {
    json plan_doc;
    try {
      plan_doc = json::parse(read_text_file(run.plan_path));
    } catch (const json::parse_error& e) {
      throw ConfigError(run.plan_path + ": " + e.what());
    }
    options.plan = plan_from_json(plan_doc, pool);
  }
  if (run.power_mode) options.energy_mode = CacheEnergyMode::PowerTimesTime;
  const auto r = run_pipeline(workload, pool, run.bindings, options);

  if (!run.trace_path.empty()) {
    const auto trace = generate_trace(workload, r.variables, r.bindings, r.layout, smallest_line(pool));
    std::ofstream file(run.trace_path, std::ios::binary);
    if (!file) throw ConfigError("cannot write '" + run.trace_path + "'");
    dump_trace(file, trace);
  }

  json stats = to_json(r.stats);
  json energy = to_json(r.energy);
  energy["cross_check"] = discrepancies_to_json(r.discrepancies);
  if (run.out_dir.empty()) {
    json doc;
    doc["workload"] = workload.name;
    doc["pool"] = pool.name;
    doc["stats"] = stats;
    doc["energy"] = energy;
    out << detail::dump(doc);
  } else {
    detail::write_output(run, "stats.json", detail::dump(stats), out);
    detail::write_output(run, "energy.json", detail::dump(energy), out);
  }
  return 0;
}

/// Configuration × size matrix, normalized against the baseline pool.
inline int cmd_sweep(const RunConfig& run, std::ostream& out) {
  if (run.pool_paths.empty()) throw ConfigError("sweep needs at least one --pool");
  if (run.sizes.empty()) throw ConfigError("sweep needs --sizes");
  std::vector<MemoryPool> pools;
  for (const auto& p : run.pool_paths) {
    pools.push_back(load_pool_file(p));
    for (std::size_t i = 0; i + 1 < pools.size(); ++i) {
      if (pools[i].name == pools.back().name) throw ConfigError("duplicate configuration name '" + pools[i].name + "'");
    }
  }
  const auto workload = load_workload_file(run.workload_path);
  const auto sweep = run_sweep(workload, pools, run.parameter, run.sizes, run.bindings, run.baseline, run.threads);
  const auto csv = sweep_csv(sweep);
  if (run.format == Format::Doc) {
    json doc;
    doc["benchmark"] = sweep.benchmark;
    doc["parameter"] = sweep.parameter;
    doc["baseline"] = sweep.baseline;
    doc["rows"] = json::array();
    for (const auto& row : sweep.rows) {
      json e;
      e["config"] = row.config;
      e["size"] = row.size;
      e["energy"] = to_json(row.energy);
      doc["rows"].push_back(e);
    }
    detail::write_output(run, "sweep.json", detail::dump(doc), out);
  } else {
    detail::write_output(run, "sweep.csv", csv, out);
  }
  if (run.long_format) detail::write_output(run, "sweep_long.csv", sweep_long_csv(csv), out);
  return 0;
}

/// Reshapes a sweep CSV into the long format, or a JSON document.
inline int cmd_report(const RunConfig& run, std::ostream& out) {
  if (run.input_path.empty()) throw ConfigError("report needs --in <sweep.csv>");
  const auto long_csv = sweep_long_csv(read_text_file(run.input_path));
  if (run.format == Format::Csv) {
    detail::write_output(run, "report.csv", long_csv, out);
    return 0;
  }
  json doc = json::array();
  std::istringstream in(long_csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = split_csv_line(line);
    json e;
    e["benchmark"] = f[0];
    e["config"] = f[1];
    e["size"] = std::stoll(f[2]);
    e["metric"] = f[3];
    e["value"] = f[4];
    e["normalized"] = f[5];
    doc.push_back(e);
  }
  detail::write_output(run, "report.json", detail::dump(doc), out);
  return 0;
}

/// Runs `body`, mapping library errors to exit codes (2 config, 3 solver,
/// 4 simulation) with a one-line message on `err`.
template <class Body>
int guarded(Body&& body, std::ostream& err) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(ErrorKind::Config);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(ErrorKind::Config);
  }
}

}  // namespace spmalloc::cli
