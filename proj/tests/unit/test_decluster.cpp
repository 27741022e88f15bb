#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "quakealarm/decluster.hpp"
#include "quakealarm/errors.hpp"

namespace qa = quakealarm;
using qa::testing::day;
using qa::testing::make_event;
using qa::testing::offset_point;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// A(6.0) at the origin; B(5.5) 15 km east two days later; C(5.0) 30 km east
// of A (15 km from B) four days after A.
qa::Catalog chain_fixture() {
  const auto t0 = day(2004, 6, 1);
  const auto b = offset_point(0, 0, 15.0, 90.0);
  const auto c = offset_point(0, 0, 30.0, 90.0);
  return qa::Catalog({make_event(0, 0, t0, 6.0, "A"), make_event(b.lat(), b.lon(), t0 + std::chrono::days{2}, 5.5, "B"),
                      make_event(c.lat(), c.lon(), t0 + std::chrono::days{4}, 5.0, "C")},
                     {qa::GlobalSphere{}, qa::testing::year_2004()});
}

TEST(Decluster, ChainFixtureAllEvents) {
  const auto c = chain_fixture();
  const auto w = qa::WindowTable::uniform(10.0, 20.0);
  const auto r = qa::decluster(c, w);
  EXPECT_EQ(r.mode, qa::HoleMode::AllEvents);
  EXPECT_EQ(r.deleted_indices, (std::vector<std::size_t>{1, 2}));
  ASSERT_EQ(r.retained.size(), 1u);
  EXPECT_EQ(r.retained[0].source_id, "A");
  EXPECT_EQ(r.retained.span(), c.span());
  const auto stats = qa::decluster_stats(c, r.retained);
  EXPECT_EQ(stats.n_deleted, 2u);
  EXPECT_DOUBLE_EQ(stats.fraction_deleted, 2.0 / 3.0);
}

TEST(Decluster, ChainFixtureRetainedOnly) {
  const auto r = qa::decluster(chain_fixture(), qa::WindowTable::uniform(10.0, 20.0), qa::HoleMode::RetainedOnly);
  EXPECT_EQ(r.deleted_indices, (std::vector<std::size_t>{1}));
  ASSERT_EQ(r.retained.size(), 2u);
  EXPECT_EQ(r.retained[1].source_id, "C");
}

TEST(Decluster, EqualMagnitudesAndBoundaries) {
  const auto t0 = day(2004, 6, 1);
  const auto near = offset_point(0, 0, 5.0, 0.0);
  const qa::Catalog same({make_event(0, 0, t0, 6.0), make_event(near.lat(), near.lon(), t0 + std::chrono::days{1}, 6.0)},
                         {qa::GlobalSphere{}, qa::testing::year_2004()});
  EXPECT_TRUE(qa::decluster(same, qa::WindowTable::uniform(10.0, 20.0)).deleted_indices.empty());

  // Exactly at the end of the time window is inside; simultaneous is not.
  const qa::Catalog edge({make_event(0, 0, t0, 6.0), make_event(0, 0, t0, 5.0),
                          make_event(0, 0, t0 + std::chrono::days{10}, 5.0),
                          make_event(0, 0, t0 + std::chrono::days{10} + std::chrono::seconds{1}, 5.0)},
                         {qa::GlobalSphere{}, qa::testing::year_2004()});
  EXPECT_EQ(qa::decluster(edge, qa::WindowTable::uniform(10.0, 20.0)).deleted_indices,
            (std::vector<std::size_t>{2}));
}

TEST(Decluster, AbsentMagnitudesAreKeptAndInert) {
  const auto t0 = day(2004, 6, 1);
  const qa::Catalog c({make_event(0, 0, t0, std::nullopt, "x", 7.0), make_event(0, 0, t0 + std::chrono::days{1}, 5.0, "y"),
                       make_event(0, 0, t0 + std::chrono::days{2}, 6.0, "z"),
                       make_event(0, 0, t0 + std::chrono::days{3}, std::nullopt, "w", 4.0)},
                      {qa::GlobalSphere{}, qa::testing::year_2004()});
  EXPECT_TRUE(qa::decluster(c, qa::WindowTable::uniform(10.0, 20.0)).deleted_indices.empty());
}

// Independent statement of the all-events rule.
bool deleted_by_rule(const qa::Catalog& c, std::size_t k, const qa::WindowTable& w) {
  const auto mk = c.magnitude(k);
  if (!mk) return false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto mi = c.magnitude(i);
    if (!mi || !(*mi > *mk)) continue;
    const auto& row = w.lookup(*mi);
    if (!(c[i].time < c[k].time && c[k].time - c[i].time <= qa::days_to_duration(row.time_days))) continue;
    if (qa::testing::vector_distance_km(c[i].epicenter, c[k].epicenter) <= row.distance_km) return true;
  }
  return false;
}

TEST(Decluster, PropertiesOnRandomCatalogs) {
  const qa::WindowTable w({{kNegInf, 5.0, 20.0}, {5.5, 15.0, 40.0}, {6.5, 40.0, 90.0}});
  qa::Rng rng(12345);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = qa::testing::clustered_catalog(rng, qa::testing::year_2004(),
                                                  {.n_main = 30, .m_min = 5.0, .hotspots = 3});
    const auto r = qa::decluster(c, w);
    std::vector<std::size_t> expected;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (deleted_by_rule(c, k, w)) expected.push_back(k);
    }
    ASSERT_EQ(r.deleted_indices, expected);
    EXPECT_EQ(r.retained.size() + r.deleted_indices.size(), c.size());
    EXPECT_NO_THROW(qa::decluster_stats(c, r.retained));

    // The largest event always survives; rerunning removes nothing more.
    std::size_t biggest = 0;
    for (std::size_t k = 1; k < c.size(); ++k) {
      if (*c.magnitude(k) > *c.magnitude(biggest)) biggest = k;
    }
    EXPECT_FALSE(std::binary_search(r.deleted_indices.begin(), r.deleted_indices.end(), biggest));
    EXPECT_TRUE(qa::decluster(r.retained, w).deleted_indices.empty());

    // Larger windows delete a superset; retained-only deletes a subset.
    const auto wide = qa::decluster(c, w.scaled(2.0));
    EXPECT_TRUE(std::includes(wide.deleted_indices.begin(), wide.deleted_indices.end(), r.deleted_indices.begin(),
                              r.deleted_indices.end()));
    const auto ro = qa::decluster(c, w, qa::HoleMode::RetainedOnly);
    EXPECT_TRUE(std::includes(r.deleted_indices.begin(), r.deleted_indices.end(), ro.deleted_indices.begin(),
                              ro.deleted_indices.end()));
  }
}

TEST(WindowTable, LookupAndValidation) {
  const qa::WindowTable w({{kNegInf, 5.0, 20.0}, {5.5, 15.0, 40.0}, {6.5, 40.0, 90.0}});
  EXPECT_DOUBLE_EQ(w.lookup(3.0).time_days, 5.0);
  EXPECT_DOUBLE_EQ(w.lookup(5.5).time_days, 15.0);
  EXPECT_DOUBLE_EQ(w.lookup(6.49).distance_km, 40.0);
  EXPECT_DOUBLE_EQ(w.lookup(9.0).distance_km, 90.0);
  EXPECT_DOUBLE_EQ(w.max_time_days(), 40.0);
  EXPECT_DOUBLE_EQ(w.scaled(0.5).lookup(9.0).distance_km, 45.0);

  EXPECT_THROW(qa::WindowTable(std::vector<qa::WindowRow>{}), qa::ArgumentError);
  EXPECT_THROW(qa::WindowTable({{5.0, 1.0, 1.0}}), qa::ArgumentError);
  EXPECT_THROW(qa::WindowTable({{kNegInf, 1.0, 1.0}, {6.0, 1.0, 1.0}, {6.0, 2.0, 2.0}}), qa::ArgumentError);
  EXPECT_THROW(qa::WindowTable({{kNegInf, 0.0, 1.0}}), qa::ArgumentError);
  EXPECT_THROW(qa::WindowTable({{kNegInf, 1.0, -1.0}}), qa::ArgumentError);
  EXPECT_THROW(w.scaled(0.0), qa::ArgumentError);
}

TEST(WindowTable, CsvParsing) {
  std::istringstream good("mag_min,time_days,distance_km\n-inf,5,20\n5.5,15,40\n");
  const auto w = qa::parse_window_table(good);
  ASSERT_EQ(w.rows().size(), 2u);
  EXPECT_TRUE(std::isinf(w.rows()[0].mag_min));
  EXPECT_DOUBLE_EQ(w.rows()[1].distance_km, 40.0);

  std::istringstream bad_header("m,t,d\n-inf,5,20\n");
  EXPECT_THROW(qa::parse_window_table(bad_header), qa::ParseError);
  std::istringstream bad_row("mag_min,time_days,distance_km\n-inf,5,20\n5.5,abc,40\n");
  try {
    qa::parse_window_table(bad_row);
    FAIL() << "expected ParseError";
  } catch (const qa::ParseError& e) {
    EXPECT_EQ(e.location(), 3u);
  }
  std::istringstream unsorted("mag_min,time_days,distance_km\n-inf,5,20\n6,15,40\n5,10,30\n");
  EXPECT_THROW(qa::parse_window_table(unsorted), qa::ParseError);
}

TEST(DeclusterStats, RejectsNonSubset) {
  const auto c = chain_fixture();
  const qa::Catalog other({make_event(5, 5, day(2004, 2, 1), 5.0)}, {qa::GlobalSphere{}, qa::testing::year_2004()});
  EXPECT_THROW(qa::decluster_stats(c, other), qa::ArgumentError);
  const auto empty = qa::decluster_stats(qa::Catalog{}, qa::Catalog{});
  EXPECT_EQ(empty.n_deleted, 0u);
  EXPECT_EQ(empty.fraction_deleted, 0.0);
}

}  // namespace
