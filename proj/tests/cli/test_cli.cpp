#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "fixtures.hpp"
#include "quakealarm/decluster.hpp"
#include "quakealarm/sigtests.hpp"

namespace qa = quakealarm;
namespace fs = std::filesystem;
using qa::testing::day;
using qa::testing::make_event;
using qa::testing::offset_point;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qa::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("quakealarm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) const {
    const auto path = (dir_ / name).string();
    std::ofstream(path, std::ios::binary) << text;
    return path;
  }
  std::string write_catalog(const std::string& name, const qa::Catalog& c) const {
    return write(name, qa::to_csv(c));
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

std::string ndk_lines(std::size_t n) {
  std::ifstream in(std::string(QUAKEALARM_TEST_DATA_DIR) + "/sample.ndk");
  std::string line, text;
  for (std::size_t i = 0; i < n && std::getline(in, line); ++i) text += line + "\n";
  return text;
}

qa::Catalog three_event_fixture() {
  const auto t = day(2004, 3, 1);
  const auto b = offset_point(0, 0, 20.0, 90.0);
  return qa::Catalog({make_event(0, 0, t, 6.0, "A"), make_event(b.lat(), b.lon(), t + std::chrono::days{3}, 5.7, "B"),
                      make_event(30, 30, day(2004, 3, 10), 5.9, "C")},
                     {qa::GlobalSphere{}, qa::testing::year_2004()});
}

TEST_F(CliTest, IngestTwoRecordNdk) {
  const auto in = write("two.ndk", ndk_lines(10));
  const auto r = run({"ingest", in});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto c = qa::parse_csv_text(r.out);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].source_id, "C200401012059A");
  EXPECT_NE(r.err.find("ingested 2 events"), std::string::npos);
}

TEST_F(CliTest, IngestCorruptNdkIsParseFailure) {
  const auto in = write("bad.ndk", ndk_lines(7));
  const auto r = run({"ingest", in, "--format", "ndk"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("format error"), std::string::npos);
  EXPECT_TRUE(r.out.empty());

  const auto csv = write("bad.csv", "time,lat,lon,depth_km,mb,ms,id\n2004-01-01T00:00:00Z,95,0,10,5,,x\n");
  const auto r2 = run({"ingest", csv});
  EXPECT_EQ(r2.code, 2);
  EXPECT_NE(r2.err.find("line 2"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"ingest", path("missing.csv")}).code, 1);
  const auto in = write_catalog("c.csv", three_event_fixture());
  EXPECT_EQ(run({"test", in, "--reps", "0"}).code, 1);
  EXPECT_EQ(run({"eval", in, "--predictor", "iii"}).code, 1);
  EXPECT_EQ(run({"eval", in, "--format", "xml"}).code, 1);
  EXPECT_EQ(run({"eval", in, "--from", "2004-06-01", "--to", "2004-01-01"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, EvalThreeEventFixture) {
  const auto in = write_catalog("c.csv", three_event_fixture());
  const auto alarms = path("alarms.csv");
  const auto r = run({"eval", in, "--from", "2004-01-01", "--to", "2005-01-01", "--mag-threshold", "5.5",
                      "--predictor", "i", "--alarms", alarms, "--deterministic"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["Q"], 3);
  EXPECT_EQ(j["A"], 3);
  EXPECT_EQ(j["S"], 1);
  EXPECT_EQ(j["P"], 1);
  EXPECT_EQ(j["F"], 2);
  EXPECT_EQ(j["M"], 2);
  const double v = 3 * qa::cap_area_km2(50) * 21.0 / (qa::sphere_area_km2() * 366.0);
  EXPECT_NEAR(j["v_upper"].get<double>(), v, 1e-15);
  EXPECT_EQ(j["run_config"]["subcommand"], "eval");
  EXPECT_EQ(j["run_config"]["seed"], qa::cli::kDefaultSeed);
  EXPECT_FALSE(j.contains("generated_at"));

  std::ifstream alarm_in(alarms);
  EXPECT_EQ(qa::parse_alarm_csv(alarm_in).size(), 3u);

  const auto ii = nlohmann::json::parse(run({"eval", in, "--predictor", "ii", "--deterministic"}).out);
  EXPECT_EQ(ii["P"], 0);
}

TEST_F(CliTest, MagnitudeSelector) {
  const qa::Catalog c({make_event(0, 0, day(2004, 3, 1), 5.0, "a", 6.0), make_event(0, 0, day(2004, 3, 2), 6.0, "b", 5.0),
                       make_event(0, 0, day(2004, 3, 3), std::nullopt, "c", 6.5)},
                      {qa::GlobalSphere{}, qa::testing::year_2004()});
  const auto in = write_catalog("c.csv", c);
  const auto mb = nlohmann::json::parse(run({"eval", in, "--deterministic"}).out);
  const auto ms = nlohmann::json::parse(run({"eval", in, "--magnitude", "ms", "--deterministic"}).out);
  EXPECT_EQ(mb["Q"], 1);
  EXPECT_EQ(ms["Q"], 2);
  EXPECT_EQ(ms["run_config"]["magnitude"], "ms");
}

TEST_F(CliTest, EvalEmptyWindowWarns) {
  const auto in = write_catalog("c.csv", three_event_fixture());
  const auto r = run({"eval", in, "--mag-threshold", "9.5", "--deterministic"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["Q"], 0);
  EXPECT_EQ(j["s"], 0.0);
}

TEST_F(CliTest, DeterministicOutputIsByteIdentical) {
  const auto in = write_catalog("c.csv", three_event_fixture());
  const std::vector<std::string> args{"test", in, "--reps", "300", "--seed", "7", "--deterministic", "--mag-threshold", "5.5"};
  const auto a = run(args);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const auto b = run(threaded);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto stamped = run({"test", in, "--reps", "300", "--seed", "7"});
  EXPECT_TRUE(nlohmann::json::parse(stamped.out).contains("generated_at"));
  const auto j = nlohmann::json::parse(a.out);
  for (const char* key : {"observed", "n_reps", "sims_geq", "p_estimate", "p_is_upper_bound", "max_sim", "seed", "config"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["run_config"]["seed"], 7);
}

TEST_F(CliTest, TestAgreesWithExactEnumeration) {
  const auto c = qa::Catalog({make_event(0, 0, day(2004, 1, 1), 6.0), make_event(0, 0.1, day(2004, 1, 5), 5.8),
                              make_event(0, 0.2, day(2004, 2, 9), 5.6), make_event(10, 10, day(2004, 4, 9), 6.2),
                              make_event(10, 10.1, day(2004, 4, 19), 5.7)},
                             {qa::GlobalSphere{}, qa::testing::year_2004()});
  const auto in = write_catalog("five.csv", c);
  const auto r = run({"test", in, "--reps", "10000", "--seed", "3", "--deterministic", "--from", "2004-01-01",
                      "--to", "2005-01-01"});
  ASSERT_EQ(r.code, 0) << r.err;
  const double p = qa::exact_permutation_pvalue(c, {5.5, 21.0, 50.0}, qa::PredictorMode::I).value();
  EXPECT_NEAR(nlohmann::json::parse(r.out)["p_estimate"].get<double>(), p, 3 * std::sqrt(p * (1 - p) / 10000.0));
}

TEST_F(CliTest, DeclusterChainFixtureAndIdempotence) {
  const auto t0 = day(2004, 6, 1);
  const auto b = offset_point(0, 0, 15.0, 90.0);
  const auto cpt = offset_point(0, 0, 30.0, 90.0);
  const qa::Catalog chain({make_event(0, 0, t0, 6.0, "A"), make_event(b.lat(), b.lon(), t0 + std::chrono::days{2}, 5.5, "B"),
                           make_event(cpt.lat(), cpt.lon(), t0 + std::chrono::days{4}, 5.0, "C")},
                          {qa::GlobalSphere{}, qa::testing::year_2004()});
  const auto in = write_catalog("chain.csv", chain);
  const auto windows = write("w.csv", "mag_min,time_days,distance_km\n-inf,10,20\n");
  const auto out1 = path("out1.csv");
  const auto stats = path("stats.json");
  auto r = run({"decluster", in, "--windows", windows, "--out", out1, "--stats", stats, "--deterministic"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(stats));
  EXPECT_EQ(j["n_deleted"], 2);
  EXPECT_DOUBLE_EQ(j["fraction_deleted"].get<double>(), 2.0 / 3.0);

  r = run({"decluster", out1, "--windows", windows, "--deterministic"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.err)["n_deleted"], 0);
  EXPECT_EQ(r.out, slurp(out1));

  const auto zero = write("zero.csv", "mag_min,time_days,distance_km\n-inf,0,0\n");
  EXPECT_EQ(run({"decluster", in, "--windows", zero}).code, 1);
  const auto junk = write("junk.csv", "nonsense\n");
  EXPECT_EQ(run({"decluster", in, "--windows", junk}).code, 1);
}

TEST_F(CliTest, DeclusterSparseCatalogMinimalWindows) {
  const qa::Catalog sparse({make_event(0, 0, day(2004, 1, 1), 6.0), make_event(40, 40, day(2004, 5, 1), 5.0),
                            make_event(-40, 100, day(2004, 9, 1), 5.5)},
                           {qa::GlobalSphere{}, qa::testing::year_2004()});
  const auto in = write_catalog("sparse.csv", sparse);
  const auto windows = write("w.csv", "mag_min,time_days,distance_km\n-inf,0.001,0.001\n");
  const auto r = run({"decluster", in, "--windows", windows, "--deterministic"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.err)["n_deleted"], 0);
}

qa::Catalog five_year_catalog() {
  qa::Rng rng(2000);
  auto c = qa::testing::clustered_catalog(rng, qa::testing::years_2000_2004(), {.n_main = 250});
  // Pin the ends so the derived span covers 2000-01-01 through 2004-12-31.
  std::vector<qa::Event> events = c.events();
  events.push_back(make_event(-60, -170, day(2000, 1, 1, 1), 5.0, "first"));
  events.push_back(make_event(60, 170, day(2004, 12, 31, 23), 5.0, "last"));
  return qa::Catalog::with_derived_span(std::move(events));
}

TEST_F(CliTest, Table1EqualsEvalPlusTestPerRow) {
  const auto in = write_catalog("five.csv", five_year_catalog());
  const auto t1 = run({"table1", in, "--reps", "200", "--seed", "11"});
  ASSERT_EQ(t1.code, 0) << t1.err;
  std::istringstream rows(t1.out);
  std::string line;
  std::getline(rows, line);
  EXPECT_EQ(line, "years,mag_threshold,events,succ,succ_wo,max_sim,p_est,v,seed");

  struct Spec {
    const char* from;
    const char* mag;
  };
  const Spec specs[] = {{"2004-01-01", "5.5"}, {"2004-01-01", "5.8"}, {"2000-01-01", "5.5"}, {"2000-01-01", "5.8"}};
  for (const auto& s : specs) {
    ASSERT_TRUE(std::getline(rows, line));
    const std::vector<std::string> common{in, "--from", s.from, "--to", "2005-01-01", "--mag-threshold", s.mag,
                                          "--deterministic"};
    auto args = [&](std::vector<std::string> head, std::vector<std::string> tail) {
      head.insert(head.end(), common.begin(), common.end());
      head.insert(head.end(), tail.begin(), tail.end());
      return head;
    };
    const auto ei = nlohmann::json::parse(run(args({"eval"}, {"--predictor", "i"})).out);
    const auto eii = nlohmann::json::parse(run(args({"eval"}, {"--predictor", "ii"})).out);
    const auto te = nlohmann::json::parse(
        run(args({"test"}, {"--predictor", "ii", "--reps", "200", "--seed", "11"})).out);
    char expected[256];
    std::snprintf(expected, sizeof expected, "%s,%s,%d,%d,%d,%g,%s,%.6g,11",
                  std::string(s.from) == "2004-01-01" ? "2004" : "2000-2004", s.mag, ei["Q"].get<int>(),
                  ei["P"].get<int>(), eii["P"].get<int>(), te["max_sim"].get<double>(),
                  te["p_display"].get<std::string>().c_str(), ei["v_upper"].get<double>());
    EXPECT_EQ(line, expected);
  }

  const auto js = run({"table1", in, "--reps", "200", "--seed", "11", "--json", "--deterministic"});
  ASSERT_EQ(js.code, 0);
  const auto j = nlohmann::json::parse(js.out);
  EXPECT_EQ(j["rows"].size(), 4u);
  EXPECT_EQ(j["run_config"]["seed"], 11);
}

TEST_F(CliTest, Table1RejectsShortCatalog) {
  const auto in = write_catalog("c.csv", three_event_fixture());
  const auto r = run({"table1", in, "--reps", "10"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("must cover"), std::string::npos);
}

TEST_F(CliTest, SimulateModels) {
  qa::Rng rng(4);
  const auto in = write_catalog("c.csv", qa::testing::clustered_catalog(rng, qa::testing::year_2004(), {.n_main = 40}));
  for (const char* model : {"permute", "uniform", "poisson", "hetpoisson", "gamma"}) {
    const auto a = run({"simulate", in, "--model", model, "--seed", "5"});
    ASSERT_EQ(a.code, 0) << model << ": " << a.err;
    const auto b = run({"simulate", in, "--model", model, "--seed", "5"});
    EXPECT_EQ(a.out, b.out) << model;
    const auto sim = qa::parse_csv_text(a.out);
    EXPECT_GT(sim.size(), 0u) << model;
  }
  EXPECT_EQ(run({"simulate", in, "--model", "nope"}).code, 1);
}

}  // namespace
