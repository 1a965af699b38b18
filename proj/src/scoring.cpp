#include "barnsim/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace barnsim {

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return "success";
    case Outcome::kCollision: return "collision";
    case Outcome::kTimeout: return "timeout";
  }
  return "?";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "success") return Outcome::kSuccess;
  if (s == "collision") return Outcome::kCollision;
  if (s == "timeout") return Outcome::kTimeout;
  throw std::invalid_argument("unknown outcome: " + s);
}

Scalar optimal_time(Scalar path_length, Scalar max_speed) {
  if (path_length <= 0.0)
    throw std::invalid_argument("optimal_time: path_length <= 0");
  if (max_speed <= 0.0)
    throw std::invalid_argument("optimal_time: max_speed <= 0");
  return path_length / max_speed;
}

Scalar score_trial(Outcome outcome, Scalar actual_time, Scalar optimal_time,
                   const ScoreParams& params) {
  if (outcome != Outcome::kSuccess) return 0.0;
  const Scalar clipped =
      std::clamp(actual_time, params.clip_low * optimal_time,
                 params.clip_high * optimal_time);
  return optimal_time / clipped;
}

SuiteReport aggregate(const std::vector<TrialRecord>& records, int env_count,
                      int trials_per_env) {
  SuiteReport report;
  report.records = records;
  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) {
                     if (a.env_id != b.env_id) return a.env_id < b.env_id;
                     return a.seed < b.seed;
                   });
  report.expected_trials = env_count * trials_per_env;
  report.complete =
      static_cast<int>(report.records.size()) == report.expected_trials;

  Scalar total = 0.0;
  int successes = 0;
  std::vector<Scalar> at_success;
  int current_env = std::numeric_limits<int>::min();
  Scalar env_sum = 0.0;
  int env_n = 0;
  auto flush_env = [&]() {
    if (env_n > 0) {
      report.env_ids.push_back(current_env);
      report.per_env_mean.push_back(env_sum / env_n);
    }
  };
  for (const TrialRecord& r : report.records) {
    if (r.env_id != current_env) {
      flush_env();
      current_env = r.env_id;
      env_sum = 0.0;
      env_n = 0;
    }
    env_sum += r.score;
    ++env_n;
    total += r.score;
    if (r.outcome == Outcome::kSuccess) {
      ++successes;
      at_success.push_back(r.actual_time);
    }
  }
  flush_env();

  const std::size_t n = report.records.size();
  report.overall_score = n > 0 ? total / static_cast<Scalar>(n) : 0.0;
  report.success_rate =
      n > 0 ? static_cast<Scalar>(successes) / static_cast<Scalar>(n) : 0.0;
  if (!at_success.empty()) {
    std::sort(at_success.begin(), at_success.end());
    auto pct = [&](Scalar q) {
      const std::size_t idx = static_cast<std::size_t>(
          std::min<Scalar>(q * (at_success.size() - 1),
                           at_success.size() - 1.0));
      return at_success[idx];
    };
    report.at_p50 = pct(0.5);
    report.at_p90 = pct(0.9);
    report.at_max = at_success.back();
  }
  return report;
}

namespace {

std::string fixed6(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double round6(Scalar v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

std::string report_to_csv(const SuiteReport& report) {
  std::ostringstream out;
  out << "env_id,seed,outcome,AT,OT,score\n";
  for (const TrialRecord& r : report.records) {
    out << r.env_id << "," << r.seed << "," << to_string(r.outcome) << ","
        << fixed6(r.actual_time) << "," << fixed6(r.optimal_time) << ","
        << fixed6(r.score) << "\n";
  }
  return out.str();
}

std::vector<TrialRecord> records_from_csv(const std::string& csv) {
  std::vector<TrialRecord> records;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("env_id,", 0) != 0)
    throw std::runtime_error("records_from_csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    TrialRecord r;
    std::getline(row, field, ',');
    r.env_id = std::stoi(field);
    std::getline(row, field, ',');
    r.seed = std::stoull(field);
    std::getline(row, field, ',');
    r.outcome = outcome_from_string(field);
    std::getline(row, field, ',');
    r.actual_time = std::stod(field);
    std::getline(row, field, ',');
    r.optimal_time = std::stod(field);
    if (!std::getline(row, field, ','))
      throw std::runtime_error("records_from_csv: short row");
    r.score = std::stod(field);
    records.push_back(r);
  }
  return records;
}

std::string report_to_summary_json(const SuiteReport& report,
                                   const std::vector<int>& skipped_envs) {
  nlohmann::ordered_json j;
  j["trials"] = report.records.size();
  j["expected_trials"] = report.expected_trials;
  j["complete"] = report.complete;
  j["skipped_envs"] = skipped_envs;
  j["overall_score"] = round6(report.overall_score);
  j["success_rate"] = round6(report.success_rate);
  j["at_p50"] = round6(report.at_p50);
  j["at_p90"] = round6(report.at_p90);
  j["at_max"] = round6(report.at_max);
  nlohmann::ordered_json envs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.env_ids.size(); ++i) {
    nlohmann::ordered_json e;
    e["env_id"] = report.env_ids[i];
    e["mean_score"] = round6(report.per_env_mean[i]);
    envs.push_back(e);
  }
  j["environments"] = envs;
  return j.dump(2) + "\n";
}

}  // namespace barnsim
