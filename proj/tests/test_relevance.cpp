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

#include <random>

#include <gtest/gtest.h>

#include "musichist/relevance.hpp"
#include "oracle.hpp"

using namespace musichist;

namespace {

void expect_matches_oracle(const oracle::RandomDataset& d, Timestamp t0, Rational lambda) {
  auto hist = build_histories(oracle::to_events(d.events));
  auto m = build_matrix(d.catalog, hist, {t0, lambda});
  auto ref = oracle::relevance(d.events, d.tracks, t0, lambda);
  std::size_t nonzero = 0;
  for (const auto& [key, r] : ref) {
    const auto& [a, b] = key;
    ASSERT_EQ(m.direct(a, b), r.direct) << a << "," << b;
    ASSERT_EQ(m.indirect(a, b), r.indirect) << a << "," << b;
    ASSERT_EQ(m.combined(a, b), r.combined) << a << "," << b;
    ASSERT_EQ(m.combined(b, a), r.combined);
    nonzero += r.combined > 0;
  }
  EXPECT_EQ(m.nonzero_count(), nonzero);
}

}  // namespace

TEST(Indicator, Examples) {
  UserHistory h{"u", {{"u", "a", 100}, {"u", "b", 3000}}};
  EXPECT_EQ(pair_indicator(h, "a", "b", 3600), 1);
  UserHistory far{"u", {{"u", "a", 0}, {"u", "b", 10000}}};
  EXPECT_EQ(pair_indicator(far, "a", "b", 3600), 0);
  UserHistory repeat{"u", {{"u", "a", 0}, {"u", "a", 9000}, {"u", "b", 10000}}};
  EXPECT_EQ(pair_indicator(repeat, "a", "b", 3600), 1);
  UserHistory edge{"u", {{"u", "a", 0}, {"u", "b", 3600}}};
  EXPECT_EQ(pair_indicator(edge, "a", "b", 3600), 1);  // <= t0
  EXPECT_EQ(pair_indicator(edge, "a", "b", 3599), 0);
  EXPECT_THROW(pair_indicator(h, "a", "a", 3600), std::invalid_argument);
}

TEST(Relevance, FixtureF1Goldens) {
  // Goldens derived from the brute-force oracle, then frozen.
  auto ref = oracle::relevance(oracle::f1_events(), {"a", "b", "c"}, 3600, {1, 4});
  ASSERT_EQ(ref.at({"a", "b"}).direct, 2);
  ASSERT_EQ(ref.at({"a", "b"}).indirect, 2);
  ASSERT_EQ(ref.at({"a", "b"}).combined, oracle::Q(5, 2));
  ASSERT_EQ(ref.at({"a", "c"}).direct, 1);
  ASSERT_EQ(ref.at({"a", "c"}).indirect, 3);
  ASSERT_EQ(ref.at({"a", "c"}).combined, oracle::Q(7, 4));
  ASSERT_EQ(ref.at({"b", "c"}).direct, 1);
  ASSERT_EQ(ref.at({"b", "c"}).indirect, 3);
  ASSERT_EQ(ref.at({"b", "c"}).combined, oracle::Q(7, 4));

  auto snap = oracle::f1_snapshot();
  EXPECT_EQ(direct_relevance(snap.histories, "a", "b", 3600), 2);
  EXPECT_EQ(direct_relevance(snap.histories, "a", "c", 3600), 1);
  EXPECT_EQ(direct_relevance(snap.histories, "b", "c", 3600), 1);
  EXPECT_EQ(indirect_relevance(snap.histories, "a", "b", 3600), 2);
  EXPECT_EQ(indirect_relevance(snap.histories, "a", "c", 3600), 3);
  EXPECT_EQ(combined_relevance(2, 2, {1, 4}), Rational(5, 2));
  EXPECT_EQ(combined_relevance(1, 3, {1, 4}), Rational(7, 4));
  EXPECT_EQ(combined_relevance(1, 3, 0), Rational(1));

  auto m = build_matrix(snap);
  EXPECT_EQ(m.combined("a", "b"), Rational(5, 2));
  EXPECT_EQ(m.combined("a", "c"), Rational(7, 4));
  EXPECT_EQ(m.combined("b", "c"), Rational(7, 4));
  EXPECT_EQ(m.combined("c", "a"), Rational(7, 4));
  EXPECT_EQ(m.n_users(), 3);
  EXPECT_EQ(matrix_to_csv(m),
            "track_a,track_b,direct,indirect,combined\n"
            "a,b,2,2,2.500000\n"
            "a,c,1,3,1.750000\n"
            "b,c,1,3,1.750000\n");
}

TEST(Relevance, SmallCases) {
  EXPECT_EQ(build_matrix(Catalog{}, {}).nonzero_count(), 0u);
  Catalog two({{"x", "pop", 2000, {}}, {"y", "pop", 2000, {}}});
  HistoryMap one{{"u", UserHistory{"u", {{"u", "x", 0}, {"u", "y", 10}}}}};
  auto m = build_matrix(two, one);
  EXPECT_EQ(m.indirect("x", "y"), 0);  // no third track
  EXPECT_EQ(m.direct("x", "y"), 1);

  Catalog three({{"x", "pop", 2000, {}}, {"y", "pop", 2000, {}}, {"z", "pop", 2000, {}}});
  HistoryMap close{{"u", UserHistory{"u", {{"u", "x", 0}, {"u", "y", 10}, {"u", "z", 20}}}}};
  auto mc = build_matrix(three, close);
  EXPECT_EQ(mc.direct("x", "y"), 1);
  EXPECT_EQ(mc.direct("x", "z"), 1);
  EXPECT_EQ(mc.direct("y", "z"), 1);
  EXPECT_EQ(mc.direct("x", "x"), 0);
  EXPECT_EQ(mc.combined("x", "nope"), Rational(0));
}

TEST(Relevance, OracleEquivalenceOnRandomData) {
  std::mt19937_64 rng(2024);
  for (int r = 0; r < 150; ++r) {
    auto d = oracle::random_dataset(rng);
    expect_matches_oracle(d, 3600, {1, 4});
    if (r % 10 == 0) expect_matches_oracle(d, 500, {3, 7});
    if (::testing::Test::HasFatalFailure()) return;
  }
}

TEST(Relevance, BoundsAndPermutationInvariance) {
  std::mt19937_64 rng(77);
  for (int r = 0; r < 100; ++r) {
    auto d = oracle::random_dataset(rng);
    auto evs = oracle::to_events(d.events);
    auto m = build_matrix(d.catalog, build_histories(evs));
    std::shuffle(evs.begin(), evs.end(), rng);
    auto m2 = build_matrix(d.catalog, build_histories(evs));
    EXPECT_EQ(matrix_to_csv(m), matrix_to_csv(m2));
    const auto n = m.n_users();
    const auto M = static_cast<std::int64_t>(d.tracks.size());
    m.for_each_nonzero([&](const RelevanceMatrix::Entry& e) {
      EXPECT_LT(e.a, e.b);
      EXPECT_LE(e.direct, n);
      EXPECT_LE(e.indirect, n * 2 * (M - 2));
      // combined is an integer plus a multiple of lambda.
      EXPECT_EQ(e.combined, Rational(e.direct) + Rational(1, 4) * e.indirect);
    });
  }
}

TEST(Relevance, MonotoneInDataAndWindow) {
  std::mt19937_64 rng(99);
  for (int r = 0; r < 100; ++r) {
    auto d = oracle::random_dataset(rng);
    auto evs = oracle::to_events(d.events);
    auto base = build_histories(evs);
    auto more = base;
    // One extra user with a random history.
    UserHistory extra{"new_user", {}};
    std::uniform_int_distribution<std::size_t> pt(0, d.tracks.size() - 1);
    for (Timestamp t = 0; t < 6000; t += 500) extra.events.push_back({"new_user", d.tracks[pt(rng)], t});
    more.emplace("new_user", extra);
    auto m0 = build_matrix(d.catalog, base);
    auto m1 = build_matrix(d.catalog, more);
    auto wide = build_matrix(d.catalog, base, {7200, {1, 4}});
    for (std::size_t i = 0; i < d.tracks.size(); ++i)
      for (std::size_t j = i + 1; j < d.tracks.size(); ++j) {
        const auto& a = d.tracks[i];
        const auto& b = d.tracks[j];
        EXPECT_GE(m1.direct(a, b), m0.direct(a, b));
        EXPECT_GE(m1.indirect(a, b), m0.indirect(a, b));
        EXPECT_GE(wide.direct(a, b), m0.direct(a, b));
        EXPECT_GE(wide.indirect(a, b), m0.indirect(a, b));
      }
  }
}

TEST(Relevance, LambdaZeroIsDirect) {
  auto snap = oracle::f1_snapshot();
  auto m = build_matrix(snap, {3600, 0});
  EXPECT_EQ(m.combined("a", "b"), Rational(2));
  EXPECT_EQ(m.combined("a", "c"), Rational(1));
}

TEST(Relevance, SharedNeighborMode) {
  // Product form: only paths a-x-b inside one user's history count.
  auto snap = oracle::f1_snapshot();
  auto m = build_matrix(snap, {3600, {1, 4}, IndirectMode::SharedNeighbor});
  // u2 links a-c? |0-3000| <= 3600 yes; b-c yes; a-b yes. So each pair has one shared neighbour via u2.
  EXPECT_EQ(m.indirect("a", "b"), 1);
  EXPECT_EQ(m.indirect("a", "c"), 1);
  EXPECT_EQ(m.indirect("b", "c"), 1);
  EXPECT_EQ(m.direct("a", "b"), 2);
}

TEST(Relevance, CsvRoundTripAndValidation) {
  std::mt19937_64 rng(8);
  for (int r = 0; r < 50; ++r) {
    auto d = oracle::random_dataset(rng);
    auto hist = build_histories(oracle::to_events(d.events));
    auto m = build_matrix(d.catalog, hist);
    auto text = matrix_to_csv(m);
    auto back = parse_matrix_csv(text, d.catalog, {1, 4}, m.n_users());
    EXPECT_EQ(matrix_to_csv(back), text);
    for (const auto& a : d.tracks)
      for (const auto& b : d.tracks) ASSERT_EQ(back.combined(a, b), m.combined(a, b));
  }
  auto cat = oracle::f1_catalog();
  const std::string h = "track_a,track_b,direct,indirect,combined\n";
  EXPECT_THROW(parse_matrix_csv(h + "a,zz,1,0,1\n", cat, {1, 4}, 3), ParseError);
  EXPECT_THROW(parse_matrix_csv(h + "a,a,1,0,1\n", cat, {1, 4}, 3), ParseError);
  EXPECT_THROW(parse_matrix_csv(h + "a,b,1,0,1\nb,a,1,0,1\n", cat, {1, 4}, 3), ParseError);
  EXPECT_THROW(parse_matrix_csv(h + "a,b,1,4,1\n", cat, {1, 4}, 3), ParseError);
  EXPECT_THROW(parse_matrix_csv("x\n", cat, {1, 4}, 3), ParseError);
}

TEST(Relevance, ScaledMultipliesEveryEntry) {
  auto m = build_matrix(oracle::f1_snapshot());
  auto s = m.scaled(3);
  EXPECT_EQ(s.combined("a", "b"), Rational(15, 2));
  EXPECT_EQ(s.indirect("b", "c"), 9);
  EXPECT_THROW(m.scaled(0), std::invalid_argument);
}
