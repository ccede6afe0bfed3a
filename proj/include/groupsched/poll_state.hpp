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

#ifndef GROUPSCHED__POLL_STATE_HPP
#define GROUPSCHED__POLL_STATE_HPP

#include <groupsched/slot_grid.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace groupsched {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

inline Timestamp now_utc()
{
  return std::chrono::time_point_cast<std::chrono::milliseconds>(
    std::chrono::system_clock::now());
}

/// "2024-05-06T09:30:00.000Z"
inline std::string format_timestamp(Timestamp ts)
{
  using namespace std::chrono;
  const auto secs = floor<seconds>(ts);
  const auto ms = (ts - secs).count();
  const std::time_t t = system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

inline std::optional<Timestamp> parse_timestamp(std::string_view text)
{
  const std::string s(text);
  std::tm tm{};
  int ms = 0;
  char tail = 0;
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%c",
    &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
    &tm.tm_sec, &ms, &tail);
  if (n != 8 || tail != 'Z')
  {
    tail = 0;
    ms = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &tm.tm_year,
          &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec,
          &tail) != 7 || tail != 'Z')
      return std::nullopt;
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t t = timegm(&tm);
  return std::chrono::time_point_cast<std::chrono::milliseconds>(
    std::chrono::system_clock::from_time_t(t)) + std::chrono::milliseconds(ms);
}

enum class Preference : std::uint8_t
{
  Unavailable,
  MaybeAvailable,
  AvailableSure,
};

enum class Priority : std::uint8_t
{
  NotComing,
  OptionalToAttend,
  MustBePresent,
};

inline std::string_view to_string(Preference p)
{
  switch (p)
  {
    case Preference::AvailableSure: return "sure";
    case Preference::MaybeAvailable: return "maybe";
    case Preference::Unavailable: return "unavailable";
  }
  return "unavailable";
}

inline std::optional<Preference> parse_preference(std::string_view s)
{
  if (s == "sure") return Preference::AvailableSure;
  if (s == "maybe") return Preference::MaybeAvailable;
  if (s == "unavailable") return Preference::Unavailable;
  return std::nullopt;
}

inline std::string_view to_string(Priority p)
{
  switch (p)
  {
    case Priority::MustBePresent: return "must";
    case Priority::OptionalToAttend: return "optional";
    case Priority::NotComing: return "not_coming";
  }
  return "optional";
}

inline std::optional<Priority> parse_priority(std::string_view s)
{
  if (s == "must") return Priority::MustBePresent;
  if (s == "optional") return Priority::OptionalToAttend;
  if (s == "not_coming") return Priority::NotComing;
  return std::nullopt;
}

/// One attendee's availability. Slots missing from `marks` are Unavailable.
struct Response
{
  std::string attendee;
  std::map<SlotId, Preference> marks;
  std::optional<std::string> note;
  Timestamp submitted_at{};

  Preference at(SlotId slot) const
  {
    const auto it = marks.find(slot);
    return it == marks.end() ? Preference::Unavailable : it->second;
  }

  /// Number of slots marked sure or maybe.
  std::size_t available_marks() const
  {
    std::size_t n = 0;
    for (const auto& [slot, level] : marks)
      if (level != Preference::Unavailable)
        ++n;
    return n;
  }

  bool operator==(const Response&) const = default;
};

/// Which slots a score-3 calendar may hide.
enum class OmissionRule : std::uint8_t
{
  /// Hide slots below half of the voters, provided the best slot has more
  /// than half of them.
  HalfOfVoters,
  /// Hide slots that are neither "good" (above good_threshold) nor promising.
  GoodTimes,
};

struct EngineConfig
{
  int poll_min = 2;
  int poll_max = 12;
  double good_threshold = 0.65;
  int early_respondent_count = 2;
  double temperature = 0.1;
  bool maybe_counts_as_available = true;
  OmissionRule omission_rule = OmissionRule::HalfOfVoters;
  double maybe_weight_high = 0.75;
  double maybe_weight_low = 0.25;

  void validate() const
  {
    if (!(0 < poll_min && poll_min < poll_max))
      throw std::invalid_argument("config requires 0 < poll_min < poll_max");
    if (!(0.0 < good_threshold && good_threshold < 1.0))
      throw std::invalid_argument("config requires 0 < good_threshold < 1");
    if (early_respondent_count < 0)
      throw std::invalid_argument("early_respondent_count must be >= 0");
    if (!(0.0 <= temperature && temperature <= 2.0))
      throw std::invalid_argument("temperature must be within [0, 2]");
    if (!(0.0 < maybe_weight_low && maybe_weight_low < 1.0)
      || !(0.0 < maybe_weight_high && maybe_weight_high < 1.0))
      throw std::invalid_argument("maybe weights must be within (0, 1)");
  }

  bool operator==(const EngineConfig&) const = default;
};

enum class DecisionSource : std::uint8_t { Llm, Fallback };

inline std::string_view to_string(DecisionSource s)
{
  return s == DecisionSource::Llm ? "llm" : "fallback";
}

/// One scoring of the voting state: how many options the next attendee sees.
struct ScoreDecision
{
  int score = 4;
  std::string reason;
  DecisionSource source = DecisionSource::Fallback;
  std::chrono::milliseconds latency{0};
  std::string raw_reply;
  std::size_t respondent_count = 0;
  Timestamp decided_at{};

  bool operator==(const ScoreDecision&) const = default;
};

/// Everything known about one scheduling event.
struct PollState
{
  std::string id;
  SlotGrid grid;
  std::vector<std::string> roster;
  std::map<std::string, Response> responses;
  std::map<std::string, Priority> priorities;
  EngineConfig config;
  std::optional<SlotId> finalized;
  Timestamp created_at{};
  std::vector<ScoreDecision> decision_log;

  Priority priority_of(const std::string& attendee) const
  {
    const auto it = priorities.find(attendee);
    return it == priorities.end() ? Priority::OptionalToAttend : it->second;
  }

  bool counts(const std::string& attendee) const
  {
    return priority_of(attendee) != Priority::NotComing;
  }

  /// Submitted responses whose attendee is not marked NotComing.
  std::vector<const Response*> active_responses() const
  {
    std::vector<const Response*> out;
    for (const auto& [who, r] : responses)
      if (counts(who))
        out.push_back(&r);
    return out;
  }

  std::size_t respondent_count() const { return active_responses().size(); }

  /// Roster size excluding NotComing attendees, never below the respondent
  /// count.
  std::size_t group_size() const
  {
    std::size_t n = 0;
    for (const auto& who : roster)
      if (counts(who))
        ++n;
    return std::max(n, respondent_count());
  }

  bool operator==(const PollState&) const = default;
};

} // namespace groupsched

#endif // GROUPSCHED__POLL_STATE_HPP
