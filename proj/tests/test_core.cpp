// Copyright 2026 The musichist Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "musichist/clock.hpp"
#include "musichist/core.hpp"

using namespace musichist;

namespace {

Catalog one_track() { return Catalog({{"a", "pop", 2000, std::nullopt}}); }

}  // namespace

TEST(Catalog, RejectsInvalidTracks) {
  EXPECT_THROW(Catalog({{"", "pop", 2000, std::nullopt}}), ValidationError);
  EXPECT_THROW(Catalog({{"a", "", 2000, std::nullopt}}), ValidationError);
  EXPECT_THROW(Catalog({{"a", "pop", 999, std::nullopt}}), ValidationError);
  EXPECT_THROW(Catalog({{"a", "pop", 3001, std::nullopt}}), ValidationError);
  EXPECT_NO_THROW(Catalog({{"a", "pop", 1000, std::nullopt}, {"b", "pop", 3000, std::nullopt}}));
  try {
    Catalog({{"a", "pop", 2000, std::nullopt}, {"a", "rock", 2001, std::nullopt}});
    FAIL() << "duplicate id accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
  }
}

TEST(Catalog, GenreOrderIsFrequencyThenLabel) {
  Catalog c({{"1", "rock", 2000, {}},
             {"2", "pop", 2000, {}},
             {"3", "pop", 2000, {}},
             {"4", "pop", 2000, {}},
             {"5", "jazz", 1990, {}},
             {"6", "blues", 2010, {}}});
  EXPECT_EQ(c.genres(), (std::vector<std::string>{"pop", "blues", "jazz", "rock"}));
  EXPECT_EQ(c.year_range(), std::pair(1990, 2010));
  EXPECT_EQ(c.genre_rank("jazz"), 2u);
  EXPECT_EQ(c.genre_rank("metal"), 4u);
}

TEST(ValidateDataset, WellFormed) {
  auto r = validate_dataset(one_track(), {{"u1", "a", 0}});
  EXPECT_EQ(r.error_count(), 0u);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.accepted.size(), 1u);
}

TEST(ValidateDataset, DanglingTrackIsError) {
  auto r = validate_dataset(one_track(), {{"u1", "z", 0}});
  EXPECT_EQ(r.error_count(), 1u);
  EXPECT_EQ(r.count(FindingKind::DanglingTrack), 1u);
  EXPECT_FALSE(r.ok());
}

TEST(ValidateDataset, DuplicateIsWarningAndKeptOnce) {
  auto r = validate_dataset(one_track(), {{"u1", "a", 0}, {"u1", "a", 0}});
  EXPECT_EQ(r.error_count(), 0u);
  EXPECT_EQ(r.warning_count(), 1u);
  EXPECT_EQ(r.count(FindingKind::DuplicateRecord), 1u);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.accepted.size(), 1u);
}

TEST(ValidateDataset, NegativeTimestampIsError) {
  auto r = validate_dataset(one_track(), {{"u1", "a", -5}});
  EXPECT_EQ(r.count(FindingKind::NegativeTimestamp), 1u);
  EXPECT_FALSE(r.ok());
}

TEST(BuildHistories, SortsPerUser) {
  auto h = build_histories({{"u1", "a", 5}, {"u1", "b", 1}});
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h["u1"].events, (std::vector<AccessEvent>{{"u1", "b", 1}, {"u1", "a", 5}}));
  EXPECT_TRUE(build_histories({}).empty());
  auto two = build_histories({{"u1", "a", 1}, {"u2", "a", 1}});
  EXPECT_EQ(two.size(), 2u);
  EXPECT_EQ(two["u1"].events.size(), 1u);
  EXPECT_EQ(two["u2"].events.size(), 1u);
}

TEST(BuildHistories, StableForEqualTimestamps) {
  auto h = build_histories({{"u1", "b", 3}, {"u1", "a", 3}, {"u1", "c", 1}});
  EXPECT_EQ(h["u1"].events[1].track_id, "b");
  EXPECT_EQ(h["u1"].events[2].track_id, "a");
}

TEST(BuildHistories, PermutationInvariantAndConserving) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 200; ++round) {
    std::vector<AccessEvent> evs;
    std::uniform_int_distribution<int> u(0, 3), t(0, 5);
    std::uniform_int_distribution<Timestamp> ts(0, 40);
    std::set<std::tuple<std::string, std::string, Timestamp>> seen;
    for (int i = 0; i < 30; ++i) {
      AccessEvent e{"u" + std::to_string(u(rng)), "t" + std::to_string(t(rng)), ts(rng)};
      if (seen.emplace(e.user_id, e.track_id, e.timestamp).second) evs.push_back(e);
    }
    auto shuffled = evs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto h1 = build_histories(evs);
    auto h2 = build_histories(shuffled);
    std::vector<AccessEvent> flat1, flat2;
    for (const auto& [id, h] : h1) {
      EXPECT_TRUE(std::is_sorted(h.events.begin(), h.events.end(),
                                 [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; }));
      for (const auto& e : h.events) EXPECT_EQ(e.user_id, id);
      flat1.insert(flat1.end(), h.events.begin(), h.events.end());
    }
    for (const auto& [id, h] : h2) flat2.insert(flat2.end(), h.events.begin(), h.events.end());
    // Same multiset of events, and the same per-user (timestamp) sequence.
    auto key_sorted = [](std::vector<AccessEvent> v) {
      std::sort(v.begin(), v.end());
      return v;
    };
    EXPECT_EQ(key_sorted(flat1), key_sorted(evs));
    EXPECT_EQ(key_sorted(flat2), key_sorted(evs));
    for (const auto& [id, h] : h1) {
      ASSERT_EQ(h.events.size(), h2[id].events.size());
      for (std::size_t i = 0; i < h.events.size(); ++i)
        EXPECT_EQ(h.events[i].timestamp, h2[id].events[i].timestamp);
    }
  }
}

TEST(LocalClock, HoursAndDays) {
  LocalClock utc;
  EXPECT_EQ(utc.hour_of_day(9 * 3600 + 12 * 60), 9);
  EXPECT_EQ(utc.day_index(86399), 0);
  EXPECT_EQ(utc.day_index(86400), 1);
  EXPECT_EQ(LocalClock::date_string(0), "1970-01-01");
  EXPECT_EQ(LocalClock::date_string(19723), "2024-01-01");

  LocalClock plus2{120};
  EXPECT_EQ(plus2.hour_of_day(23 * 3600), 1);
  EXPECT_EQ(plus2.day_index(23 * 3600), 1);
  LocalClock minus5{-300};
  EXPECT_EQ(minus5.hour_of_day(0), 19);
  EXPECT_EQ(minus5.day_index(0), -1);
  EXPECT_EQ(LocalClock::date_string(-1), "1969-12-31");
}
