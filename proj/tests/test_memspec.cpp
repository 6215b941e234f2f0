#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "support.hpp"

using namespace spmalloc;
using spmalloc::test::source_path;
using spmalloc::test::table_module;

namespace {

// Rows of the technology comparison table, typed in independently of the
// JSON file: kB, mm², read ns, miss ns (caches), write ns, read pJ, write pJ, leak mW.
struct Row {
  std::uint64_t kb;
  const char* area;
  const char* read_ns;
  const char* miss_ns;
  const char* write_ns;
  const char* read_pj;
  const char* write_pj;
  const char* leak_mw;
};

const Row kSram[] = {{256, "0.229", "2.258", "0.083", "1.588", "72", "25", "336.330"},
                     {512, "0.380", "2.669", "0.107", "1.996", "112", "21", "600.112"},
                     {1024, "0.741", "3.452", "0.144", "2.773", "214", "36", "1180.407"},
                     {2048, "1.343", "9.989", "0.149", "7.941", "378", "24", "2141.436"},
                     {4096, "2.619", "11.52", "0.222", "9.037", "383", "290", "4288.790"}};
const Row kSttram[] = {{1024, "0.183", "2.221", nullptr, "5.686", "195.251", "205.024", "84.809"},
                       {2048, "0.348", "2.364", nullptr, "5.744", "228.512", "242.614", "146.194"},
                       {4096, "0.696", "2.499", nullptr, "5.812", "276.137", "290.231", "292.389"},
                       {8192, "1.311", "3.055", nullptr, "6.038", "388.324", "383.871", "568.592"},
                       {16384, "2.488", "5.036", nullptr, "7.739", "516.687", "465.678", "640.935"}};

void expect_row(const MemoryModuleSpec& m, const Row& row) {
  SCOPED_TRACE(m.name);
  EXPECT_EQ(m.capacity_bytes, row.kb * 1024);
  EXPECT_EQ(m.area_mm2, parse_rational(row.area));
  EXPECT_EQ(m.read_latency_ns, parse_rational(row.read_ns));
  EXPECT_EQ(m.write_latency_ns, parse_rational(row.write_ns));
  if (row.miss_ns) {
    ASSERT_TRUE(m.miss_latency_ns);
    EXPECT_EQ(*m.miss_latency_ns, parse_rational(row.miss_ns));
  } else {
    EXPECT_FALSE(m.miss_latency_ns);
  }
  EXPECT_EQ(m.read_energy_pj, parse_rational(row.read_pj));
  EXPECT_EQ(m.write_energy_pj, parse_rational(row.write_pj));
  EXPECT_EQ(m.leakage_mw, parse_rational(row.leak_mw));
}

json minimal_pool() {
  return json::parse(R"({
    "main_memory": {"name": "mm", "capacity_bytes": 1073741824, "read_latency_ns": 60,
                    "write_latency_ns": 60, "read_energy_pj": 10000, "write_energy_pj": 10000, "leakage_mw": 0}
  })");
}

}  // namespace

TEST(TechnologyTable, MatchesPublishedRows) {
  const auto table = test::technology_table();
  ASSERT_EQ(table.size(), 10u);
  for (const auto& row : kSram) {
    const auto& m = table_module(table, "sram_" + std::to_string(row.kb) + "kB");
    EXPECT_EQ(m.kind, ModuleKind::Cache);
    EXPECT_EQ(m.technology.kind, Technology::Kind::SRAM);
    expect_row(m, row);
  }
  for (const auto& row : kSttram) {
    const auto& m = table_module(table, "sttram_" + std::to_string(row.kb) + "kB");
    EXPECT_EQ(m.kind, ModuleKind::Scratchpad);
    EXPECT_EQ(m.technology.kind, Technology::Kind::STTRAM);
    expect_row(m, row);
  }
}

TEST(LoadPool, FirstSramRowAsCache) {
  auto doc = minimal_pool();
  doc["caches"] = json::parse(R"([{"name": "l2", "capacity_bytes": 262144, "area_mm2": 0.229,
      "read_latency_ns": 2.258, "miss_latency_ns": 0.083, "write_latency_ns": 1.588,
      "read_energy_pj": 72, "write_energy_pj": 25, "leakage_mw": 336.330,
      "cache_geometry": {"line_size_bytes": 64, "associativity": 8}}])");
  const auto pool = load_pool(doc);
  ASSERT_EQ(pool.caches.size(), 1u);
  expect_row(pool.caches[0], kSram[0]);
  EXPECT_EQ(pool.caches[0].technology.kind, Technology::Kind::SRAM);
  EXPECT_EQ(pool.main_memory.technology.kind, Technology::Kind::DRAM);
}

TEST(LoadPool, DegenerateMainMemoryOnly) {
  const auto pool = load_pool(minimal_pool());
  EXPECT_TRUE(pool.caches.empty());
  EXPECT_TRUE(pool.scratchpads.empty());
  EXPECT_EQ(pool.main_memory.capacity_bytes, 1u << 30);
}

TEST(LoadPool, RejectsIndivisibleCacheCapacity) {
  auto doc = minimal_pool();
  doc["caches"] = json::parse(R"([{"name": "c", "capacity_bytes": 1000, "read_latency_ns": 1,
      "miss_latency_ns": 0.1, "write_latency_ns": 1, "read_energy_pj": 1, "write_energy_pj": 1,
      "leakage_mw": 1, "cache_geometry": {"line_size_bytes": 64, "associativity": 4}}])");
  try {
    load_pool(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("divisible"), std::string::npos) << e.what();
  }
}

TEST(LoadPool, RejectsInvalidDocuments) {
  auto bad = [](const std::function<void(json&)>& edit) {
    auto doc = minimal_pool();
    edit(doc);
    EXPECT_THROW(load_pool(doc), ConfigError) << doc.dump();
  };
  bad([](json& d) { d["extra"] = 1; });
  bad([](json& d) { d.erase("main_memory"); });
  bad([](json& d) { d["main_memory"]["leakage_mw"] = -1; });
  bad([](json& d) { d["main_memory"]["capacity_bytes"] = 0; });
  bad([](json& d) { d["main_memory"]["bogus"] = 0; });
  bad([](json& d) { d["main_memory"]["read_latency_ns"] = "fast"; });
  bad([](json& d) { d["address_bits"] = 0; });
  bad([](json& d) { d["scratchpads"] = json::array({d["main_memory"]}); });  // name clash
  bad([](json& d) {
    d["scratchpads"] = json::parse(R"([{"name": "s", "capacity_bytes": 1024, "read_latency_ns": 1,
        "write_latency_ns": 1, "read_energy_pj": 1, "write_energy_pj": 1, "leakage_mw": 1,
        "miss_latency_ns": 3}])");
  });
  bad([](json& d) {
    d["caches"] = json::parse(R"([{"name": "c", "capacity_bytes": 4096, "read_latency_ns": 1,
        "miss_latency_ns": 0.1, "write_latency_ns": 1, "read_energy_pj": 1, "write_energy_pj": 1,
        "leakage_mw": 1, "cache_geometry": {"line_size_bytes": 48, "associativity": 1}}])");
  });
  bad([](json& d) {
    d["caches"] = json::parse(R"([{"name": "c", "capacity_bytes": 4096, "read_latency_ns": 1,
        "miss_latency_ns": 0.1, "write_latency_ns": 1, "read_energy_pj": 1, "write_energy_pj": 1,
        "leakage_mw": 1, "cache_geometry": {"line_size_bytes": 64, "associativity": 1,
        "write_policy": "write_through"}}])");
  });
}

TEST(LoadPool, NotApplicableMissLatencyIsAbsent) {
  auto doc = minimal_pool();
  doc["scratchpads"] = json::parse(R"([{"name": "s", "capacity_bytes": 1024, "read_latency_ns": 1,
      "write_latency_ns": 1, "read_energy_pj": 1, "write_energy_pj": 1, "leakage_mw": 1,
      "miss_latency_ns": "N.A."}])");
  EXPECT_FALSE(load_pool(doc).scratchpads[0].miss_latency_ns);
}

TEST(LoadPool, FileNameBecomesDefaultName) {
  EXPECT_EQ(load_pool_file(source_path("configs/cache_256kB.json")).name, "cache_256kB");
  EXPECT_THROW(load_pool_file(source_path("configs/does_not_exist.json")), ConfigError);
}

TEST(PoolJson, RoundTripsEveryBundledPool) {
  for (const char* name : {"cache_256kB", "spm_1024kB", "cache_2048kB", "spm_8192kB", "spm_multi"}) {
    const auto pool = load_pool_file(source_path(std::string("configs/") + name + ".json"));
    const auto again = load_pool(json::parse(to_json(pool).dump()));
    EXPECT_EQ(again, pool) << name;
  }
}

TEST(PoolJson, NonDecimalValuesSurviveRoundTrip) {
  auto pool = load_pool(minimal_pool());
  pool.main_memory.read_latency_ns = Rational(1, 3);
  const auto again = load_pool(json::parse(to_json(pool).dump()));
  EXPECT_EQ(again.main_memory.read_latency_ns, Rational(1, 3));
}

TEST(ModuleList, RequiresKind) {
  EXPECT_THROW(load_module_list(json::parse(R"({"modules": [{"name": "x"}]})")), ConfigError);
  EXPECT_THROW(load_module_list(json::parse(R"({"rows": []})")), ConfigError);
}

TEST(AreaEquivalent, Sram2048PairsWithSttram8192) {
  const auto table = test::technology_table();
  std::vector<MemoryModuleSpec> stt;
  for (const auto& m : table) {
    if (m.kind == ModuleKind::Scratchpad) stt.push_back(m);
  }
  const auto& ref = table_module(table, "sram_2048kB");
  const auto chosen = area_equivalent(ref, stt, Rational(5, 100));
  EXPECT_EQ(chosen.name, "sttram_8192kB");
  // |1.311 - 1.343| / 1.343 = 32/1343
  EXPECT_EQ(*relative_area_gap(ref, chosen), Rational(32, 1343));
}

TEST(AreaEquivalent, Sram256HasNoMatchWithinFivePercent) {
  const auto table = test::technology_table();
  std::vector<MemoryModuleSpec> stt;
  for (const auto& m : table) {
    if (m.kind == ModuleKind::Scratchpad) stt.push_back(m);
  }
  const auto& ref = table_module(table, "sram_256kB");
  EXPECT_EQ(*relative_area_gap(ref, table_module(table, "sttram_1024kB")), Rational(46, 229));
  EXPECT_THROW(area_equivalent(ref, stt, Rational(5, 100)), ConfigError);
  EXPECT_EQ(area_equivalent(ref, stt, Rational(1, 4)).name, "sttram_1024kB");
}

TEST(AreaEquivalent, IdentityAndArguments) {
  const auto table = test::technology_table();
  for (const auto& m : table) EXPECT_EQ(area_equivalent(m, {m}, Rational(1, 100)), m);
  EXPECT_THROW(area_equivalent(table[0], {}, Rational(1, 10)), ConfigError);
  EXPECT_THROW(area_equivalent(table[0], table, Rational(0)), ConfigError);
  EXPECT_THROW(area_equivalent(table[0], table, Rational(2)), ConfigError);
}

TEST(AreaEquivalent, TiesPreferLargerCapacity) {
  auto a = test::make_spm("a", 1024);
  auto b = test::make_spm("b", 2048);
  auto ref = test::make_spm("ref", 512);
  ref.area_mm2 = 1;
  a.area_mm2 = Rational(11, 10);
  b.area_mm2 = Rational(9, 10);
  EXPECT_EQ(area_equivalent(ref, {a, b}, Rational(1, 5)).name, "b");
  EXPECT_EQ(area_equivalent(ref, {b, a}, Rational(1, 5)).name, "b");
}

TEST(AreaEquivalent, InvariantUnderCandidatePermutation) {
  const auto table = test::technology_table();
  std::mt19937_64 rng(42);
  for (const auto& ref : table) {
    auto candidates = table;
    const auto expected = area_equivalent(ref, candidates, Rational(1));
    for (int round = 0; round < 20; ++round) {
      std::shuffle(candidates.begin(), candidates.end(), rng);
      EXPECT_EQ(area_equivalent(ref, candidates, Rational(1)).name, expected.name);
    }
  }
}
