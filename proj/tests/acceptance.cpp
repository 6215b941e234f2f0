// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Plain executable so the output reads the same under ctest.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace spmalloc;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
public:
  void expect(bool condition, const std::string& what) {
    if (!condition && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
  }
  void note(const std::string& text) {
    if (out_.pass) out_.detail = text;
  }
  Outcome result() const { return out_; }

private:
  Outcome out_;
};

int failures = 0;

void criterion(int number, const std::string& title, const std::function<void(Check&)>& body) {
  Check check;
  const auto start = Clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const auto r = check.result();
  if (!r.pass) ++failures;
  std::ostringstream line;
  line.precision(2);
  line << std::fixed << (r.pass ? "PASS" : "FAIL") << " criterion " << number << ": " << title << " [" << seconds
       << " s]";
  if (!r.detail.empty()) line << " -- " << r.detail;
  std::cout << line.str() << std::endl;
}

MemoryPool config_pool(const std::string& name) {
  return load_pool_file(test::source_path("configs/" + name + ".json"));
}

Workload bundled(const std::string& name) {
  return load_workload_file(test::source_path("workloads/" + name + ".json"));
}

Trace reads_of(const std::vector<std::uint64_t>& addresses, std::uint32_t size = 8) {
  Trace t;
  t.variables = {"x"};
  for (auto a : addresses) t.records.push_back({a, size, AccessMode::Read, 0, false});
  return t;
}

// Shared between criteria 1 and 2.
std::vector<std::pair<AllocationModel, AllocationPlan>> solved_models;

}  // namespace

int main() {
  criterion(1, "solve_exact matches solve_exhaustive on 500 random models", [](Check& c) {
    std::mt19937_64 rng(20260101);
    const auto start = Clock::now();
    std::size_t max_vars = 0;
    for (int i = 0; i < 500; ++i) {
      auto model = test::random_model(rng, 12, 3);
      max_vars = std::max(max_vars, model.variables.size());
      const auto exact = solve_exact(model);
      const auto oracle = solve_exhaustive(model);
      c.expect(exact.objective_pj == oracle.objective_pj, "objective differs on model " + std::to_string(i));
      c.expect(exact.placements == oracle.placements, "placements differ on model " + std::to_string(i));
      solved_models.emplace_back(std::move(model), exact);
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    c.expect(seconds < 30, "took " + std::to_string(seconds) + " s");
    c.note("500 models, up to " + std::to_string(max_vars) + " variables");
  });

  criterion(2, "every plan satisfies placement, capacity and forcing invariants", [](Check& c) {
    c.expect(solved_models.size() == 500, "criterion 1 did not produce 500 plans");
    std::size_t violations = 0;
    for (const auto& [model, plan] : solved_models) violations += plan_violations(model, plan).size();
    c.expect(violations == 0, std::to_string(violations) + " violations");
    c.note("0 violations over " + std::to_string(solved_models.size()) + " plans");
  });

  criterion(3, "A[i][j], A[i][B[j]], A[i][j*8] classify friendly, unfriendly, unfriendly", [](Check& c) {
    VariableProfile A;
    A.name = "A";
    A.element_size_bytes = 8;
    A.dims = {16, 128};
    A.element_count = 16 * 128;
    const std::set<std::string> arrays = {"A", "B"};
    const std::vector<std::pair<const char*, AccessClass>> cases = {
        {"A[i][j]", AccessClass::Friendly}, {"A[i][B[j]]", AccessClass::Unfriendly}, {"A[i][j*8]", AccessClass::Unfriendly}};
    std::string seen;
    for (const auto& [text, expected] : cases) {
      const auto r = classify_access(parse_access(text, arrays), A, "j", 64);
      c.expect(r.result == expected, std::string(text) + " misclassified");
      seen += std::string(seen.empty() ? "" : ", ") + std::string(to_string(r.result));
    }
    c.note(seen);
  });

  criterion(4, "table read energies and leakage unit conversion", [](Check& c) {
    const auto table = test::technology_table();
    const std::vector<std::pair<const char*, Rational>> rows = {
        {"sttram_1024kB", Rational(195251, 1000)}, {"sttram_2048kB", Rational(228512, 1000)},
        {"sttram_4096kB", Rational(276137, 1000)}, {"sttram_8192kB", Rational(388324, 1000)},
        {"sttram_16384kB", Rational(516687, 1000)}};
    for (const auto& [name, read] : rows) {
      c.expect(spm_dynamic_energy(1, 0, test::table_module(table, name)) == read, std::string(name) + " read energy");
    }
    MemoryPool pool;
    pool.main_memory = test::make_main_memory();
    pool.scratchpads.push_back(test::table_module(table, "sttram_1024kB"));
    const Rational e = static_energy(1'000'000, pool);
    const Rational expected = Rational(84809) * 1000;  // 8.4809e7 pJ
    const Rational rel = boost::multiprecision::abs(e - expected) / expected;
    c.expect(rel <= Rational(1, 1'000'000'000'000LL), "static energy " + to_exact_string(e));
    c.note("84.809 mW x 1 ms = " + to_fixed(e, 3) + " pJ");
  });

  criterion(5, "area_equivalent(SRAM 2048 kB, STT-RAM rows, 0.05) is the 8192 kB module", [](Check& c) {
    const auto table = test::technology_table();
    std::vector<MemoryModuleSpec> stt;
    for (const auto& m : table) {
      if (m.technology.kind == Technology::Kind::STTRAM) stt.push_back(m);
    }
    const auto& sram = test::table_module(table, "sram_2048kB");
    const auto pick = area_equivalent(sram, stt, Rational(5, 100));
    c.expect(pick.name == "sttram_8192kB", "picked " + pick.name);
    c.note("picked " + pick.name + ", gap " + to_fixed(*relative_area_gap(sram, pick) * 100, 2) + "%");
  });

  criterion(6, "simulator oracles: cold streaming, LRU adversary, scratchpad bypass", [](Check& c) {
    MemoryPool pool;
    pool.main_memory = test::make_main_memory();
    pool.caches.push_back(test::make_cache("l1", 64 * 1024, 64, 8));
    std::vector<std::uint64_t> stream;
    for (std::uint64_t i = 0; i < 1024; ++i) stream.push_back(8 * i);
    const auto s = simulate(reads_of(stream), pool);
    c.expect(s.caches[0].misses() == 128 && s.caches[0].hits() == 896, "streaming counts");

    MemoryPool one_set;
    one_set.main_memory = test::make_main_memory();
    one_set.caches.push_back(test::make_cache("l1", 4 * 64, 64, 4));
    std::vector<std::uint64_t> cyclic;
    for (int pass = 0; pass < 20; ++pass) {
      for (std::uint64_t l = 0; l < 5; ++l) cyclic.push_back(64 * l);
    }
    const auto a = simulate(reads_of(cyclic), one_set);
    c.expect(a.caches[0].hits() == 0, "adversary produced " + std::to_string(a.caches[0].hits()) + " hits");

    const auto multi = config_pool("spm_multi");
    const auto ranges = assign_spm_ranges(multi);
    std::mt19937_64 rng(6);
    std::vector<std::uint64_t> spm;
    for (int i = 0; i < 5000; ++i) {
      const auto& r = ranges[rng() % ranges.size()];
      spm.push_back(r.start + 8 * (rng() % (r.size() / 8)));
    }
    const auto p = simulate(reads_of(spm), multi);
    std::uint64_t cache_activity = 0, spm_total = 0;
    for (const auto& cs : p.caches) cache_activity += cs.reads() + cs.writes() + cs.hits() + cs.misses();
    for (const auto& m : p.scratchpads) spm_total += m.reads + m.writes;
    c.expect(cache_activity == 0 && p.main_memory.reads + p.main_memory.writes == 0, "scratchpad trace touched caches");
    c.expect(spm_total == spm.size(), "scratchpad accesses lost");
    c.note("128 misses / 896 hits; adversary 0/" + std::to_string(cyclic.size()) + " hits; " +
           std::to_string(spm.size()) + " SPM accesses, 0 cache events");
  });

  criterion(7, "static counts equal simulated totals for affine workloads at N in {4,16,32}", [](Check& c) {
    std::size_t runs = 0;
    for (const char* name : {"2mm", "bicg", "atax"}) {
      const auto w = bundled(name);
      for (const char* pool_name : {"cache_256kB", "spm_1024kB"}) {
        const auto pool = config_pool(pool_name);
        for (std::int64_t n : {4, 16, 32}) {
          const auto r = run_pipeline(w, pool, {{"N", n}});
          for (const auto& d : r.discrepancies) {
            c.expect(d.is_zero(), std::string(name) + "/" + pool_name + " N=" + std::to_string(n) + " variable " +
                                      d.variable);
          }
          ++runs;
        }
      }
    }
    c.note(std::to_string(runs) + " runs, all discrepancies zero");
  });

  criterion(8, "2mm sweep: SPM static energy below baseline, total energy non-increasing at the largest sizes",
            [](Check& c) {
              const std::vector<std::int64_t> sizes = {32, 64, 128, 256};
              const auto sweep = run_sweep(bundled("2mm"), {config_pool("cache_256kB"), config_pool("spm_1024kB")}, "N",
                                           sizes, {}, "cache_256kB");
              std::ostringstream trend;
              std::vector<Rational> tot;
              for (auto n : sizes) {
                const auto& base = sweep.row("cache_256kB", n).energy;
                const auto& spm = sweep.row("spm_1024kB", n).energy;
                const auto st = normalized(spm.e_static_pj, base.e_static_pj);
                const auto et = normalized(spm.e_total_pj, base.e_total_pj);
                c.expect(st && *st < 1, "normalized static >= 1 at N=" + std::to_string(n));
                c.expect(et.has_value(), "baseline total is zero at N=" + std::to_string(n));
                tot.push_back(et.value_or(0));
                trend << (trend.str().empty() ? "" : ", ") << "N=" << n << " static " << to_fixed(st.value_or(0), 3)
                      << " total " << to_fixed(tot.back(), 3);
              }
              for (std::size_t i = sizes.size() - 2; i < sizes.size(); ++i) {
                c.expect(tot[i] <= tot[i - 1], "normalized total rises between N=" + std::to_string(sizes[i - 1]) +
                                                   " and N=" + std::to_string(sizes[i]));
              }
              c.note(trend.str());
            });

  criterion(9, "scratchpad ranges are contiguous, disjoint and start at main memory end", [](Check& c) {
    const auto pool = config_pool("spm_multi");
    const auto ranges = assign_spm_ranges(pool);
    const std::uint64_t M = pool.main_memory.capacity_bytes;
    c.expect(ranges.size() == pool.scratchpads.size(), "range count");
    c.expect(!ranges.empty() && ranges.front().start == M, "first range does not start at |main memory|");
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      const auto& r = ranges[i];
      c.expect(r.size() == pool.scratchpads[i].capacity_bytes, "range size differs from capacity");
      c.expect(r.contains(r.start) && r.contains(r.end_exclusive - 1) && !r.contains(r.end_exclusive),
               "range is not half-open");
      c.expect(!r.contains(r.start - 1), "range extends below its start");
      if (i > 0) c.expect(ranges[i - 1].end_exclusive == r.start, "gap before range " + std::to_string(i));
      for (std::size_t j = 0; j < ranges.size(); ++j) {
        if (i == j) continue;
        const auto& o = ranges[j];
        c.expect(r.end_exclusive <= o.start || o.end_exclusive <= r.start,
                 "ranges " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
      total += r.size();
    }
    c.expect(ranges.back().end_exclusive - ranges.front().start == total, "union size differs from total capacity");
    std::ostringstream d;
    for (const auto& r : ranges) d << "[" << r.start << ", " << r.end_exclusive << ") ";
    c.note(d.str());
  });

  // Informational: the strictly area-equivalent 2048 kB / 8192 kB pair,
  // each SPM row normalized against its own cache partner.
  try {
    const std::vector<std::int64_t> sizes = {32, 64, 128, 256};
    const auto sweep = run_sweep(bundled("2mm"), {config_pool("cache_2048kB"), config_pool("spm_8192kB")}, "N", sizes,
                                 {}, "cache_2048kB");
    std::cout << "info: 2mm spm_8192kB vs cache_2048kB normalized E_TOT:";
    for (auto n : sizes) {
      const auto et = normalized(sweep.row("spm_8192kB", n).energy.e_total_pj, sweep.row("cache_2048kB", n).energy.e_total_pj);
      std::cout << " N=" << n << " " << (et ? to_fixed(*et, 4) : std::string("inf"));
    }
    std::cout << std::endl;
  } catch (const std::exception& e) {
    std::cout << "info: 2048/8192 sweep failed: " << e.what() << std::endl;
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
