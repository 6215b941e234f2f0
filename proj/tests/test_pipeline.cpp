#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace spmalloc;

namespace {

MemoryPool config_pool(const std::string& name) { return load_pool_file(test::source_path("configs/" + name + ".json")); }

Workload bundled(const std::string& name) { return load_workload_file(test::source_path("workloads/" + name + ".json")); }

std::vector<std::vector<std::string>> csv_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) rows.push_back(split_csv_line(line));
  return rows;
}

}  // namespace

TEST(Normalized, Rules) {
  EXPECT_EQ(normalized(3, 4), Rational(3, 4));
  EXPECT_EQ(normalized(0, 0), Rational(1));
  EXPECT_FALSE(normalized(1, 0).has_value());
}

TEST(RunPipeline, AffineWorkloadHasNoDiscrepancies) {
  const auto r = run_pipeline(bundled("atax"), config_pool("spm_1024kB"), {{"N", 12}});
  for (const auto& d : r.discrepancies) EXPECT_TRUE(d.is_zero()) << d.variable;
  EXPECT_TRUE(plan_violations(r.model, r.plan).empty());
  EXPECT_GT(r.energy.e_total_pj, 0);
  EXPECT_EQ(r.energy.t_exec_ns, r.stats.t_exec_ns);
}

TEST(RunPipeline, ZeroIterationsGiveZeroEnergy) {
  const auto w = load_workload_text(R"({"parameters": {"N": null}, "variables": [{"name": "A", "element_size_bytes": 8, "dims": [4]}],
    "loop_nests": [{"body": [{"for": "i", "from": 0, "to": "N", "body": [{"read": "A[i]"}]}]}]})");
  const auto r = run_pipeline(w, config_pool("cache_256kB"), {{"N", 0}});
  EXPECT_EQ(r.stats.records, 0u);
  EXPECT_EQ(r.energy.e_total_pj, 0);
  EXPECT_EQ(r.energy.t_exec_ns, 0);
}

TEST(RunPipeline, SuppliedPlanIsChecked) {
  const auto w = bundled("bicg");
  const auto pool = config_pool("spm_1024kB");
  const auto solved = run_pipeline(w, pool, {{"N", 8}});
  PipelineOptions opts;
  opts.plan = solved.plan;
  opts.plan->objective_pj = 0;  // recomputed, not trusted
  const auto replayed = run_pipeline(w, pool, {{"N", 8}}, opts);
  EXPECT_EQ(replayed.energy.e_total_pj, solved.energy.e_total_pj);
  EXPECT_EQ(replayed.plan.objective_pj, solved.plan.objective_pj);

  // Forcing a friendly variable into the scratchpad breaks the plan.
  auto bad = solved.plan;
  for (std::size_t v = 0; v < bad.placements.size(); ++v) {
    if (solved.cache_friendly[v] == 1) bad.placements[v].target = Target::scratchpad(1);
  }
  opts.plan = bad;
  EXPECT_THROW(run_pipeline(w, pool, {{"N", 8}}, opts), ConfigError);
}

TEST(RunSweep, BaselineNormalizesToOne) {
  const auto sweep = run_sweep(bundled("bicg"), {config_pool("cache_256kB"), config_pool("spm_1024kB")}, "N", {8, 16},
                               {}, "cache_256kB", 2);
  ASSERT_EQ(sweep.rows.size(), 4u);
  EXPECT_EQ(sweep.rows[0].config, "cache_256kB");
  EXPECT_EQ(sweep.rows[1].size, 16);
  EXPECT_EQ(sweep.rows[2].config, "spm_1024kB");
  const auto rows = csv_rows(sweep_csv(sweep));
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][1] != "cache_256kB") continue;
    for (std::size_t c = 8; c < 12; ++c) EXPECT_EQ(rows[i][c], "1.000000");
  }
}

// Property: normalized x baseline reproduces the raw value up to rendering.
TEST(RunSweep, NormalizedTimesBaselineIsRaw) {
  const auto sweep = run_sweep(bundled("atax"), {config_pool("cache_256kB"), config_pool("spm_1024kB"),
                                                 config_pool("spm_multi")},
                               "N", {4, 16}, {}, "cache_256kB");
  const auto rows = csv_rows(sweep_csv(sweep));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto size = std::stoll(rows[i][3]);
    std::size_t base = 0;
    for (std::size_t j = 1; j < rows.size(); ++j) {
      if (rows[j][1] == "cache_256kB" && std::stoll(rows[j][3]) == size) base = j;
    }
    for (std::size_t c = 4; c < 8; ++c) {
      const double raw = std::stod(rows[i][c]);
      const double product = std::stod(rows[i][c + 4]) * std::stod(rows[base][c]);
      EXPECT_NEAR(product, raw, 1e-6 * std::max(1.0, raw) + 1e-3) << rows[i][1] << " " << c;
    }
  }
}

TEST(RunSweep, LeakierTwinHasHigherStaticEnergy) {
  auto base = config_pool("cache_256kB");
  auto leaky = base;
  leaky.name = "leaky";
  for (auto& c : leaky.caches) c.leakage_mw *= 2;
  const auto sweep = run_sweep(bundled("bicg"), {base, leaky}, "N", {4, 8, 16}, {}, "cache_256kB");
  for (std::int64_t n : {4, 8, 16}) {
    const auto& b = sweep.row("cache_256kB", n).energy;
    const auto& l = sweep.row("leaky", n).energy;
    EXPECT_EQ(l.e_dyn_pj, b.e_dyn_pj);
    EXPECT_GT(*normalized(l.e_static_pj, b.e_static_pj), 1);
  }
}

TEST(RunSweep, Errors) {
  const auto w = bundled("bicg");
  EXPECT_THROW(run_sweep(w, {config_pool("spm_1024kB")}, "N", {4}, {}, "cache_256kB"), ConfigError);
  EXPECT_THROW(run_sweep(w, {config_pool("cache_256kB")}, "M", {4}, {}, "cache_256kB"), ConfigError);
}

TEST(RunSweep, ThreadCountDoesNotChangeOutput) {
  const auto w = bundled("2mm");
  const std::vector<MemoryPool> pools = {config_pool("cache_256kB"), config_pool("spm_1024kB")};
  const auto one = sweep_csv(run_sweep(w, pools, "N", {4, 8, 12}, {}, "cache_256kB", 1));
  const auto many = sweep_csv(run_sweep(w, pools, "N", {4, 8, 12}, {}, "cache_256kB", 4));
  EXPECT_EQ(one, many);
}

TEST(SweepLongCsv, OneRowPerMetric) {
  const auto wide = sweep_csv(run_sweep(bundled("bicg"), {config_pool("cache_256kB")}, "N", {4, 8}, {}, "cache_256kB"));
  const auto rows = csv_rows(sweep_long_csv(wide));
  ASSERT_EQ(rows.size(), 1u + 2u * 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"benchmark", "config", "size", "metric", "value", "normalized"}));
  EXPECT_EQ(rows[1][3], "t_mem_ns");
  EXPECT_EQ(rows[4][3], "e_tot_pj");
  EXPECT_EQ(rows[4][5], "1.000000");
  EXPECT_THROW(sweep_long_csv(""), ConfigError);
  EXPECT_THROW(sweep_long_csv("benchmark,config\nx,y\n"), ConfigError);
}
