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

#ifndef GROUPSCHED__PROMPT_HPP
#define GROUPSCHED__PROMPT_HPP

#include <groupsched/availability.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace groupsched {

/// The pieces of the scoring prompt, kept apart so tests can inspect them.
struct PromptContext
{
  std::string preamble;
  std::size_t group_size = 0;
  std::size_t respondent_count = 0;
  std::vector<std::string> response_lines;
  std::string promising_line;
  std::optional<std::string> possible_line;
  std::string format_directive;

  std::string render() const
  {
    std::ostringstream out;
    out << preamble << '\n';
    out << "The group has " << group_size << " participants.\n";
    char rate[32];
    const double pct = group_size == 0 ? 0.0
      : 100.0 * static_cast<double>(respondent_count)
        / static_cast<double>(group_size);
    std::snprintf(rate, sizeof(rate), "%.1f%%", pct);
    out << respondent_count << " participants (" << rate
        << ") have indicated their availability so far.\n";
    out << "Responses so far:\n";
    for (const auto& line : response_lines)
      out << line << '\n';
    out << promising_line << '\n';
    if (possible_line)
      out << *possible_line << '\n';
    out << format_directive;
    return out.str();
  }
};

namespace detail {

inline std::string weekday_name(const std::string& iso_date)
{
  static constexpr const char* names[] = {
    "Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
  const auto ymd = parse_date(iso_date);
  if (!ymd)
    return "";
  const std::chrono::weekday wd{std::chrono::sys_days{*ymd}};
  return names[wd.c_encoding()];
}

/// "Mon 2024-05-06 09:00-10:30, Tue 2024-05-07 13:00-14:00"
inline std::string describe_slots(const SlotGrid& grid, const SlotSet& slots)
{
  std::ostringstream out;
  bool first = true;
  std::size_t i = 0;
  while (i < slots.size())
  {
    std::size_t j = i;
    while (j + 1 < slots.size()
      && grid.date_of(slots[j + 1]) == grid.date_of(slots[i])
      && grid.times()[grid.time_of(slots[j + 1])]
        == grid.times()[grid.time_of(slots[j])] + grid.granularity_minutes())
      ++j;
    const auto& date = grid.date_label(slots[i]);
    if (!first)
      out << ", ";
    first = false;
    out << weekday_name(date) << ' ' << date << ' ' << grid.time_label(slots[i])
        << '-'
        << format_time_of_day(grid.times()[grid.time_of(slots[j])]
             + grid.granularity_minutes());
    i = j + 1;
  }
  return out.str();
}

} // namespace detail

/// Anonymized, ordered respondents ("Participant 1" answered first).
inline std::vector<const Response*> respondents_in_order(const PollState& poll)
{
  auto active = poll.active_responses();
  std::stable_sort(active.begin(), active.end(),
    [](const Response* a, const Response* b) {
      if (a->submitted_at != b->submitted_at)
        return a->submitted_at < b->submitted_at;
      return a->attendee < b->attendee;
    });
  return active;
}

inline PromptContext build_prompt(const PollState& poll)
{
  const auto& config = poll.config;
  const bool maybe = config.maybe_counts_as_available;
  PromptContext ctx;
  ctx.preamble =
    "You are assisting a group that is scheduling a meeting. Each participant "
    "marks the candidate times they are available for sure or maybe available. "
    "Decide how many candidate times should be shown to the next participant.";
  ctx.group_size = poll.group_size();

  const auto ordered = respondents_in_order(poll);
  ctx.respondent_count = ordered.size();
  for (std::size_t i = 0; i < ordered.size(); ++i)
  {
    SlotSet sure, maybe_slots;
    for (const auto& [slot, level] : ordered[i]->marks)
    {
      if (level == Preference::AvailableSure)
        sure.push_back(slot);
      else if (level == Preference::MaybeAvailable)
        maybe_slots.push_back(slot);
    }
    std::ostringstream line;
    line << "Participant " << (i + 1) << " is available for sure at: "
         << (sure.empty() ? "none" : detail::describe_slots(poll.grid, sure))
         << "; maybe available at: "
         << (maybe_slots.empty() ? "none"
                                 : detail::describe_slots(poll.grid, maybe_slots))
         << '.';
    ctx.response_lines.push_back(line.str());
  }

  const Tally t = tally(poll);
  if (t.respondents == 0)
  {
    ctx.promising_line = "No promising times have been identified yet.";
  }
  else
  {
    const auto promising = promising_times(t, maybe);
    const auto best = t.available(promising.front(), maybe);
    std::ostringstream line;
    line << "Promising times: there are " << promising.size()
         << " times where " << best << " participants can attend";
    if (promising.size() < static_cast<std::size_t>(config.poll_max))
      line << " (" << detail::describe_slots(poll.grid, promising) << ')';
    line << '.';
    ctx.promising_line = line.str();

    // Redundant when the promising times already work for every respondent.
    if (best != t.respondents)
    {
      const auto possible = possible_times(t, maybe);
      std::ostringstream p;
      p << "Possible times: there are " << possible.size() << " times where at least "
        << (best == 0 ? 0 : best - 1) << " participants can attend.";
      ctx.possible_line = p.str();
    }
  }

  ctx.format_directive =
    "Rate from 1 to 4 how many options to show to the next participant: "
    "1 = only the promising times as a poll, 2 = promising and possible times "
    "as a poll, 3 = a calendar with clearly unpromising rows and columns hidden, "
    "4 = the full calendar with all options.\n"
    "Answer in exactly this format:\n"
    "Score: <1-4>\n"
    "Reason: <one or two sentences>";
  return ctx;
}

enum class ReplyDefect : std::uint8_t
{
  NoScore,
  OutOfRange,
  Ambiguous,
};

inline std::string_view to_string(ReplyDefect d)
{
  switch (d)
  {
    case ReplyDefect::NoScore: return "no-score";
    case ReplyDefect::OutOfRange: return "out-of-range";
    case ReplyDefect::Ambiguous: return "ambiguous";
  }
  return "no-score";
}

struct ParsedReply
{
  int score = 0;
  std::string reason;
};

using ParseResult = std::variant<ParsedReply, ReplyDefect>;

namespace detail {

inline std::string trim(std::string s, std::string_view junk = " \t\r\n")
{
  const auto b = s.find_first_not_of(junk);
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(junk);
  return s.substr(b, e - b + 1);
}

inline ParseResult classify_scores(const std::vector<std::string>& values,
  std::string reason)
{
  if (values.empty())
    return ReplyDefect::NoScore;
  for (const auto& v : values)
    if (std::stod(v) != std::stod(values.front()))
      return ReplyDefect::Ambiguous;
  const double x = std::stod(values.front());
  if (x != std::floor(x) || x < 1.0 || x > 4.0)
    return ReplyDefect::OutOfRange;
  reason = trim(std::move(reason), " \t\r\n.:-*\"");
  if (reason.empty())
    reason = "No reason given.";
  return ParsedReply{static_cast<int>(x), std::move(reason)};
}

} // namespace detail

/// Extracts the "Score: n" declaration and the reason that follows it.
/// A JSON object with "score" and "reason" members is accepted too.
inline ParseResult parse_reply(std::string_view raw)
{
  const std::string text(raw);

  const auto json = nlohmann::json::parse(text, nullptr, false);
  if (json.is_object() && json.contains("score"))
  {
    const auto& s = json["score"];
    std::vector<std::string> values;
    if (s.is_number())
      values.push_back(s.dump());
    else if (s.is_string())
    {
      const std::string str = s.get<std::string>();
      if (std::regex_match(str, std::regex(R"(\s*[+-]?\d+(\.\d+)?\s*)")))
        values.push_back(str);
    }
    std::string reason;
    if (json.contains("reason") && json["reason"].is_string())
      reason = json["reason"].get<std::string>();
    return detail::classify_scores(values, std::move(reason));
  }

  static const std::regex score_re(
    R"((^|[^A-Za-z])score[*_]*\s*(?::|=|\bis\b|\bof\b)\s*[*_"]*\s*([+-]?\d+(?:\.\d+)?))",
    std::regex::icase);
  static const std::regex reason_re(
    R"((^|[^A-Za-z])reason[*_]*\s*[:=]\s*)", std::regex::icase);

  std::vector<std::string> values;
  std::size_t score_end = std::string::npos;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), score_re);
       it != std::sregex_iterator(); ++it)
  {
    values.push_back((*it)[2].str());
    if (score_end == std::string::npos)
      score_end = static_cast<std::size_t>(it->position(0) + it->length(0));
  }

  std::string reason;
  std::smatch m;
  if (std::regex_search(text, m, reason_re))
  {
    reason = text.substr(static_cast<std::size_t>(m.position(0) + m.length(0)));
    // Drop a score declaration that trails the reason.
    std::smatch s;
    if (std::regex_search(reason, s, score_re))
      reason = reason.substr(0, static_cast<std::size_t>(s.position(0)));
  }
  else if (score_end != std::string::npos)
  {
    reason = text.substr(score_end);
  }
  return detail::classify_scores(values, std::move(reason));
}

} // namespace groupsched

#endif // GROUPSCHED__PROMPT_HPP
