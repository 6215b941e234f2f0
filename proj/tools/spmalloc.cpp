// spmalloc: classify, allocate, simulate, sweep and report from the command line.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spmalloc/cli.hpp"

namespace {

void add_common(CLI::App* cmd, spmalloc::cli::RunConfig& run, std::vector<std::string>& binds, std::string& format) {
  cmd->add_option("--workload", run.workload_path, "workload document")->required();
  cmd->add_option("--bind", binds, "parameter binding NAME=INT (repeatable)");
  cmd->add_option("--out", run.out_dir, "output directory (default: stdout)");
  cmd->add_option("--format", format, "csv or doc")->check(CLI::IsMember({"csv", "doc"}));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace spmalloc::cli;
  CLI::App app{"Scratchpad allocation, trace simulation and energy reports"};
  app.require_subcommand(1);

  RunConfig run;
  std::vector<std::string> binds;
  std::string format;  // default: csv for sweep/report, doc otherwise
  std::string sizes;
  std::uint64_t line = 0;

  auto* classify = app.add_subcommand("classify", "per-variable cache friendliness with strides");
  add_common(classify, run, binds, format);
  classify->add_option("--pool", run.pool_paths, "pool document (line size comes from its first cache)");
  classify->add_option("--line", line, "line size in bytes when no pool is given");

  auto* allocate = app.add_subcommand("allocate", "solve the placement problem and write plan.json");
  add_common(allocate, run, binds, format);
  allocate->add_option("--pool", run.pool_paths, "pool document")->required();

  auto* simulate = app.add_subcommand("simulate", "simulate a plan and write stats.json + energy.json");
  add_common(simulate, run, binds, format);
  simulate->add_option("--pool", run.pool_paths, "pool document")->required();
  simulate->add_option("--plan", run.plan_path, "plan document (default: solve)");
  simulate->add_option("--dump-trace", run.trace_path, "write the access trace to this file");
  simulate->add_flag("--power-mode", run.power_mode, "cache energy as dynamic power x time");

  auto* sweep = app.add_subcommand("sweep", "configuration x size matrix normalized to a baseline");
  add_common(sweep, run, binds, format);
  sweep->add_option("--pool", run.pool_paths, "pool document (repeatable)")->required();
  sweep->add_option("--baseline", run.baseline, "baseline configuration name");
  sweep->add_option("--param", run.parameter, "swept parameter");
  sweep->add_option("--sizes", sizes, "comma-separated sizes")->required();
  sweep->add_flag("--long", run.long_format, "also write the plot-ready long table");
  sweep->add_option("--threads", run.threads, "worker threads (default: hardware)");

  auto* report = app.add_subcommand("report", "long-format table from a sweep CSV");
  report->add_option("--in", run.input_path, "sweep CSV")->required();
  report->add_option("--out", run.out_dir, "output directory (default: stdout)");
  report->add_option("--format", format, "csv or doc")->check(CLI::IsMember({"csv", "doc"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help prints and succeeds; anything else is a usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  return guarded(
      [&] {
        if (format.empty()) format = sweep->parsed() || report->parsed() ? "csv" : "doc";
        run.format = format == "csv" ? Format::Csv : Format::Doc;
        run.bindings = parse_bindings(binds);
        if (line != 0) run.line_size_bytes = line;
        if (!sizes.empty()) {
          for (const auto& field : spmalloc::split_csv_line(sizes)) {
            run.sizes.push_back(parse_binding("size=" + field).second);
          }
        }
        if (classify->parsed()) return cmd_classify(run, std::cout);
        if (allocate->parsed()) return cmd_allocate(run, std::cout);
        if (simulate->parsed()) return cmd_simulate(run, std::cout);
        if (sweep->parsed()) return cmd_sweep(run, std::cout);
        return cmd_report(run, std::cout);
      },
      std::cerr);
}
