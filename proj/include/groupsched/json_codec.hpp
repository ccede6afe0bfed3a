/*
 * Copyright (C) 2026 The groupsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
*/

#ifndef GROUPSCHED__JSON_CODEC_HPP
#define GROUPSCHED__JSON_CODEC_HPP

// JSON wire and storage representations. Slots travel as
// {"date": "YYYY-MM-DD", "time": "HH:MM"}; timestamps as UTC ISO-8601.

#include <groupsched/adaptive_engine.hpp>
#include <groupsched/poll_state.hpp>
#include <groupsched/recommendation.hpp>

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace groupsched {

using nlohmann::json;

class DecodeError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

inline json slot_to_json(const SlotGrid& grid, SlotId slot)
{
  return {{"date", grid.date_label(slot)}, {"time", grid.time_label(slot)}};
}

inline SlotId slot_from_json(const SlotGrid& grid, const json& j)
{
  if (!j.is_object() || !j.contains("date") || !j.contains("time")
    || !j["date"].is_string() || !j["time"].is_string())
    throw DecodeError("slot must be {\"date\", \"time\"}");
  const auto slot = grid.find(j["date"].get<std::string>(), j["time"].get<std::string>());
  if (!slot)
    throw DecodeError("slot " + j["date"].get<std::string>() + " "
      + j["time"].get<std::string>() + " is not in the grid");
  return *slot;
}

inline json slots_to_json(const SlotGrid& grid, const SlotSet& slots)
{
  json out = json::array();
  for (auto s : slots)
    out.push_back(slot_to_json(grid, s));
  return out;
}

inline json grid_to_json(const SlotGrid& grid)
{
  json times = json::array();
  for (int t : grid.times())
    times.push_back(format_time_of_day(t));
  return {{"dates", grid.dates()}, {"times", times},
    {"granularity_minutes", grid.granularity_minutes()}};
}

/// Accepts either explicit "times" or a "start"/"end" range.
inline SlotGrid grid_from_json(const json& j)
{
  try
  {
    const auto dates = j.at("dates").get<std::vector<std::string>>();
    const int gran = j.value("granularity_minutes", 30);
    if (j.contains("times"))
    {
      std::vector<int> times;
      for (const auto& t : j["times"])
      {
        const auto m = parse_time_of_day(t.get<std::string>());
        if (!m)
          throw DecodeError("invalid time '" + t.get<std::string>() + "'");
        times.push_back(*m);
      }
      return SlotGrid(dates, std::move(times), gran);
    }
    const auto start = parse_time_of_day(j.value("start", std::string("09:00")));
    const auto end = parse_time_of_day(j.value("end", std::string("17:00")));
    if (!start || !end)
      throw DecodeError("invalid start/end time");
    return SlotGrid::from_range(dates, *start, *end, gran);
  }
  catch (const json::exception& e)
  {
    throw DecodeError(std::string("invalid grid: ") + e.what());
  }
}

inline json config_to_json(const EngineConfig& c)
{
  return {
    {"poll_min", c.poll_min},
    {"poll_max", c.poll_max},
    {"good_threshold", c.good_threshold},
    {"early_respondent_count", c.early_respondent_count},
    {"temperature", c.temperature},
    {"maybe_counts_as_available", c.maybe_counts_as_available},
    {"omission_rule",
      c.omission_rule == OmissionRule::HalfOfVoters ? "half_of_voters" : "good_times"},
    {"maybe_weight_high", c.maybe_weight_high},
    {"maybe_weight_low", c.maybe_weight_low},
  };
}

/// Missing fields keep the values of `base`.
inline EngineConfig config_from_json(const json& j, EngineConfig base = {})
{
  if (j.is_null())
    return base;
  try
  {
    base.poll_min = j.value("poll_min", base.poll_min);
    base.poll_max = j.value("poll_max", base.poll_max);
    base.good_threshold = j.value("good_threshold", base.good_threshold);
    base.early_respondent_count =
      j.value("early_respondent_count", base.early_respondent_count);
    base.temperature = j.value("temperature", base.temperature);
    base.maybe_counts_as_available =
      j.value("maybe_counts_as_available", base.maybe_counts_as_available);
    if (j.contains("omission_rule"))
    {
      const auto rule = j["omission_rule"].get<std::string>();
      if (rule == "half_of_voters")
        base.omission_rule = OmissionRule::HalfOfVoters;
      else if (rule == "good_times")
        base.omission_rule = OmissionRule::GoodTimes;
      else
        throw DecodeError("unknown omission_rule '" + rule + "'");
    }
    base.maybe_weight_high = j.value("maybe_weight_high", base.maybe_weight_high);
    base.maybe_weight_low = j.value("maybe_weight_low", base.maybe_weight_low);
  }
  catch (const json::exception& e)
  {
    throw DecodeError(std::string("invalid config: ") + e.what());
  }
  try
  {
    base.validate();
  }
  catch (const std::invalid_argument& e)
  {
    throw DecodeError(e.what());
  }
  return base;
}

inline json marks_to_json(const SlotGrid& grid, const Response& r)
{
  json marks = json::array();
  for (const auto& [slot, level] : r.marks)
  {
    auto m = slot_to_json(grid, slot);
    m["level"] = to_string(level);
    marks.push_back(std::move(m));
  }
  return marks;
}

inline std::map<SlotId, Preference> marks_from_json(const SlotGrid& grid, const json& j)
{
  if (!j.is_array())
    throw DecodeError("marks must be an array");
  std::map<SlotId, Preference> marks;
  for (const auto& m : j)
  {
    const auto slot = slot_from_json(grid, m);
    const auto level = parse_preference(m.value("level", std::string("sure")));
    if (!level)
      throw DecodeError("unknown preference level");
    marks[slot] = *level;
  }
  return marks;
}

inline json response_to_json(const SlotGrid& grid, const Response& r)
{
  json j = {
    {"attendee", r.attendee},
    {"marks", marks_to_json(grid, r)},
    {"submitted_at", format_timestamp(r.submitted_at)},
  };
  j["note"] = r.note ? json(*r.note) : json(nullptr);
  return j;
}

inline json decision_to_json(const ScoreDecision& d)
{
  return {
    {"score", d.score},
    {"reason", d.reason},
    {"source", to_string(d.source)},
    {"latency_ms", d.latency.count()},
    {"raw_reply", d.raw_reply},
    {"respondent_count", d.respondent_count},
    {"decided_at", format_timestamp(d.decided_at)},
  };
}

inline Timestamp timestamp_from_json(const json& j)
{
  const auto ts = parse_timestamp(j.get<std::string>());
  if (!ts)
    throw DecodeError("invalid timestamp '" + j.get<std::string>() + "'");
  return *ts;
}

inline ScoreDecision decision_from_json(const json& j)
{
  ScoreDecision d;
  d.score = j.at("score").get<int>();
  if (!valid_score(d.score))
    throw DecodeError("decision score outside 1..4");
  d.reason = j.at("reason").get<std::string>();
  const auto source = j.at("source").get<std::string>();
  if (source != "llm" && source != "fallback")
    throw DecodeError("unknown decision source");
  d.source = source == "llm" ? DecisionSource::Llm : DecisionSource::Fallback;
  d.latency = std::chrono::milliseconds(j.value("latency_ms", 0));
  d.raw_reply = j.value("raw_reply", std::string());
  d.respondent_count = j.value("respondent_count", std::size_t{0});
  d.decided_at = timestamp_from_json(j.at("decided_at"));
  return d;
}

inline json poll_to_json(const PollState& p)
{
  json responses = json::array();
  for (const auto& [who, r] : p.responses)
    responses.push_back(response_to_json(p.grid, r));
  json priorities = json::object();
  for (const auto& [who, level] : p.priorities)
    priorities[who] = to_string(level);
  json log = json::array();
  for (const auto& d : p.decision_log)
    log.push_back(decision_to_json(d));
  return {
    {"id", p.id},
    {"grid", grid_to_json(p.grid)},
    {"roster", p.roster},
    {"responses", responses},
    {"priorities", priorities},
    {"config", config_to_json(p.config)},
    {"finalized", p.finalized ? slot_to_json(p.grid, *p.finalized) : json(nullptr)},
    {"created_at", format_timestamp(p.created_at)},
    {"decision_log", log},
  };
}

/// Rebuilds a PollState, rejecting anything that violates its invariants.
inline PollState poll_from_json(const json& j)
{
  try
  {
    PollState p;
    p.id = j.at("id").get<std::string>();
    p.grid = grid_from_json(j.at("grid"));
    p.roster = j.at("roster").get<std::vector<std::string>>();
    for (const auto& rj : j.at("responses"))
    {
      Response r;
      r.attendee = rj.at("attendee").get<std::string>();
      r.marks = marks_from_json(p.grid, rj.at("marks"));
      if (rj.contains("note") && !rj["note"].is_null())
        r.note = rj["note"].get<std::string>();
      r.submitted_at = timestamp_from_json(rj.at("submitted_at"));
      if (!p.responses.emplace(r.attendee, r).second)
        throw DecodeError("duplicate response for " + r.attendee);
    }
    for (const auto& [who, level] : j.at("priorities").items())
    {
      const auto pr = parse_priority(level.get<std::string>());
      if (!pr)
        throw DecodeError("unknown priority for " + who);
      p.priorities[who] = *pr;
    }
    p.config = config_from_json(j.at("config"));
    if (!j.at("finalized").is_null())
      p.finalized = slot_from_json(p.grid, j["finalized"]);
    p.created_at = timestamp_from_json(j.at("created_at"));
    for (const auto& dj : j.at("decision_log"))
      p.decision_log.push_back(decision_from_json(dj));
    return p;
  }
  catch (const json::exception& e)
  {
    throw DecodeError(std::string("invalid poll document: ") + e.what());
  }
  catch (const GridError& e)
  {
    throw DecodeError(std::string("invalid poll document: ") + e.what());
  }
}

inline json plan_to_json(const SlotGrid& grid, const ViewPlan& v)
{
  return {
    {"format", to_string(v.format)},
    {"score", v.score},
    {"reason", v.reason},
    {"can_expand", v.can_expand},
    {"can_collapse", v.can_collapse},
    {"included", slots_to_json(grid, v.included)},
    {"omitted_rows", v.omitted.rows},
    {"omitted_columns", v.omitted.columns},
  };
}

inline json recommendation_to_json(const SlotGrid& grid, const Recommendation& r)
{
  json ranked = json::array();
  for (const auto& s : r.ranked)
  {
    auto j = slot_to_json(grid, s.slot);
    j["score"] = s.score;
    j["must_score"] = s.must_score;
    j["sure"] = s.sure;
    j["maybe"] = s.maybe;
    ranked.push_back(std::move(j));
  }
  return {
    {"algorithm", {
      {"label", r.algorithm.label},
      {"maybe_weight", r.algorithm.maybe_weight},
      {"priority_mode", to_string(r.algorithm.mode)},
    }},
    {"ranked", ranked},
    {"generated_at", format_timestamp(r.generated_at)},
    {"relaxed_away", r.relaxed_away},
  };
}

} // namespace groupsched

#endif // GROUPSCHED__JSON_CODEC_HPP
