#include <doctest.h>

#include <algorithm>

#include "barnsim/rng.hpp"
#include "barnsim/scoring.hpp"

using namespace barnsim;

TEST_SUITE_BEGIN("scoring");

TEST_CASE("optimal_time formula") {
  CHECK(optimal_time(10.0, 2.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(optimal_time(5.0, 2.0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(optimal_time(8.0, 2.0) == 2.0 * optimal_time(4.0, 2.0));
  CHECK_THROWS_AS(optimal_time(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_time(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("score_trial formula with both clip bounds") {
  // Nominal interior point.
  CHECK(score_trial(Outcome::kSuccess, 25.0, 5.0) ==
        doctest::Approx(0.2).epsilon(1e-12));
  // Collision and timeout both score zero.
  CHECK(score_trial(Outcome::kCollision, 25.0, 5.0) == 0.0);
  CHECK(score_trial(Outcome::kTimeout, 25.0, 5.0) == 0.0);
  // Fast run: AT below 4*OT clips to the 0.25 upper bound.
  CHECK(score_trial(Outcome::kSuccess, 10.0, 5.0) ==
        doctest::Approx(0.25).epsilon(1e-12));
  // Slow run: AT above 8*OT clips to the 0.125 lower bound.
  CHECK(score_trial(Outcome::kSuccess, 100.0, 5.0) ==
        doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("score range, monotonicity and scale invariance") {
  Xoshiro256ss rng(10);
  for (int i = 0; i < 2000; ++i) {
    const double ot = rng.uniform(0.1, 30.0);
    const double at = rng.uniform(0.01, 300.0);
    const double s = score_trial(Outcome::kSuccess, at, ot);
    CHECK(s >= 0.125 - 1e-15);
    CHECK(s <= 0.25 + 1e-15);
    // Scale invariance.
    const double c = rng.uniform(0.01, 50.0);
    CHECK(score_trial(Outcome::kSuccess, c * at, c * ot) ==
          doctest::Approx(s).epsilon(1e-12));
    // Monotone non-increasing in AT; strict inside the clip band.
    const double s2 = score_trial(Outcome::kSuccess, at * 1.1, ot);
    CHECK(s2 <= s + 1e-15);
    if (at > 4.0 * ot && at * 1.1 < 8.0 * ot) CHECK(s2 < s);
  }
}

TEST_CASE("configurable clip bounds") {
  ScoreParams params;
  params.clip_low = 2.0;
  params.clip_high = 16.0;
  CHECK(score_trial(Outcome::kSuccess, 1.0, 5.0, params) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(score_trial(Outcome::kSuccess, 1000.0, 5.0, params) ==
        doctest::Approx(1.0 / 16.0).epsilon(1e-12));
}

namespace {

TrialRecord make_record(int env, std::uint64_t seed, Outcome outcome,
                        double at, double ot) {
  TrialRecord r;
  r.env_id = env;
  r.seed = seed;
  r.outcome = outcome;
  r.actual_time = at;
  r.optimal_time = ot;
  r.score = score_trial(outcome, at, ot);
  return r;
}

}  // namespace

TEST_CASE("aggregate: hand-computed 3x2 fixture") {
  // Hand computation:
  //   env 0: 0.25 (fast success) + 0.2 (AT = 5*OT)     -> mean 0.225
  //   env 1: 0.125 (slow success) + 0 (collision)      -> mean 0.0625
  //   env 2: 0 (timeout) + 0.25                        -> mean 0.125
  // overall = (0.25 + 0.2 + 0.125 + 0 + 0 + 0.25) / 6 = 0.1375
  std::vector<TrialRecord> records = {
      make_record(0, 1, Outcome::kSuccess, 4.0, 2.0),
      make_record(0, 2, Outcome::kSuccess, 10.0, 2.0),
      make_record(1, 3, Outcome::kSuccess, 100.0, 2.0),
      make_record(1, 4, Outcome::kCollision, 3.0, 2.0),
      make_record(2, 5, Outcome::kTimeout, 100.0, 2.0),
      make_record(2, 6, Outcome::kSuccess, 6.0, 2.0),
  };
  const SuiteReport report = aggregate(records, 3, 2);
  CHECK(report.complete);
  CHECK(report.overall_score == doctest::Approx(0.1375).epsilon(1e-12));
  REQUIRE(report.per_env_mean.size() == 3);
  CHECK(report.per_env_mean[0] == doctest::Approx(0.225).epsilon(1e-12));
  CHECK(report.per_env_mean[1] == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(report.per_env_mean[2] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(report.success_rate == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("aggregate corner cases") {
  // All successes at exactly 4*OT: overall 0.25.
  std::vector<TrialRecord> fast;
  for (int e = 0; e < 3; ++e) {
    for (int t = 0; t < 2; ++t) {
      fast.push_back(make_record(e, t, Outcome::kSuccess, 8.0, 2.0));
    }
  }
  CHECK(aggregate(fast, 3, 2).overall_score ==
        doctest::Approx(0.25).epsilon(1e-12));

  // All failures: overall 0.
  std::vector<TrialRecord> failures;
  for (int e = 0; e < 2; ++e) {
    failures.push_back(make_record(e, 0, Outcome::kCollision, 1.0, 2.0));
  }
  CHECK(aggregate(failures, 2, 1).overall_score == 0.0);

  // Missing trials flag the report as incomplete.
  CHECK_FALSE(aggregate(failures, 2, 2).complete);
}

TEST_CASE("aggregate is permutation invariant") {
  Xoshiro256ss rng(6);
  std::vector<TrialRecord> records;
  for (int e = 0; e < 5; ++e) {
    for (int t = 0; t < 4; ++t) {
      const Outcome o = rng.uniform01() < 0.8 ? Outcome::kSuccess
                                              : Outcome::kCollision;
      records.push_back(
          make_record(e, t, o, rng.uniform(1.0, 60.0), rng.uniform(1.0, 5.0)));
    }
  }
  const SuiteReport a = aggregate(records, 5, 4);
  for (int shuffle = 0; shuffle < 5; ++shuffle) {
    for (std::size_t i = records.size(); i > 1; --i) {
      std::swap(records[i - 1], records[rng.uniform_below(i)]);
    }
    const SuiteReport b = aggregate(records, 5, 4);
    CHECK(b.overall_score == a.overall_score);
    CHECK(b.success_rate == a.success_rate);
    CHECK(b.per_env_mean == a.per_env_mean);
    CHECK(report_to_csv(b) == report_to_csv(a));
  }
}

TEST_CASE("csv round trip and formatting") {
  std::vector<TrialRecord> records = {
      make_record(0, 11, Outcome::kSuccess, 7.25, 1.9),
      make_record(1, 12, Outcome::kTimeout, 100.0, 2.1),
  };
  const SuiteReport report = aggregate(records, 2, 1);
  const std::string csv = report_to_csv(report);
  CHECK(csv.rfind("env_id,seed,outcome,AT,OT,score\n", 0) == 0);
  CHECK(csv.find("0,11,success,7.250000,1.900000,") != std::string::npos);
  const auto back = records_from_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].env_id == 0);
  CHECK(back[0].outcome == Outcome::kSuccess);
  CHECK(back[0].actual_time == doctest::Approx(7.25).epsilon(1e-9));
  CHECK(back[1].outcome == Outcome::kTimeout);
  CHECK_THROWS(records_from_csv("not a header\n1,2,3\n"));
}

TEST_CASE("summary json carries the aggregate numbers") {
  std::vector<TrialRecord> records = {
      make_record(0, 1, Outcome::kSuccess, 8.0, 2.0),
      make_record(0, 2, Outcome::kCollision, 8.0, 2.0),
  };
  const SuiteReport report = aggregate(records, 1, 2);
  const std::string json = report_to_summary_json(report, {7});
  CHECK(json.find("\"overall_score\": 0.125") != std::string::npos);
  CHECK(json.find("\"success_rate\": 0.5") != std::string::npos);
  CHECK(json.find("\"skipped_envs\": [\n    7\n  ]") != std::string::npos);
}

TEST_SUITE_END();
