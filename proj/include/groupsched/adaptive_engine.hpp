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

#ifndef GROUPSCHED__ADAPTIVE_ENGINE_HPP
#define GROUPSCHED__ADAPTIVE_ENGINE_HPP

#include <groupsched/availability.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace groupsched {

/// How the next attendee is asked for availability. Scores 4..1 map onto the
/// enumerators in declaration order.
enum class ViewFormat : std::uint8_t
{
  FullCalendar,
  PrunedCalendar,
  PollOfPossible,
  PollOfPromising,
};

inline std::string_view to_string(ViewFormat f)
{
  switch (f)
  {
    case ViewFormat::FullCalendar: return "full_calendar";
    case ViewFormat::PrunedCalendar: return "pruned_calendar";
    case ViewFormat::PollOfPossible: return "poll_of_possible";
    case ViewFormat::PollOfPromising: return "poll_of_promising";
  }
  return "full_calendar";
}

inline std::optional<ViewFormat> parse_view_format(std::string_view s)
{
  for (auto f : {ViewFormat::FullCalendar, ViewFormat::PrunedCalendar,
         ViewFormat::PollOfPossible, ViewFormat::PollOfPromising})
    if (to_string(f) == s)
      return f;
  return std::nullopt;
}

inline bool valid_score(int score) { return score >= 1 && score <= 4; }

inline ViewFormat format_for_score(int score)
{
  switch (score)
  {
    case 4: return ViewFormat::FullCalendar;
    case 3: return ViewFormat::PrunedCalendar;
    case 2: return ViewFormat::PollOfPossible;
    case 1: return ViewFormat::PollOfPromising;
  }
  throw std::out_of_range("score must be within 1..4");
}

inline int score_for_format(ViewFormat f)
{
  return 4 - static_cast<int>(f);
}

struct Omission
{
  std::vector<std::size_t> rows;     // date indices
  std::vector<std::size_t> columns;  // time indices

  bool empty() const { return rows.empty() && columns.empty(); }
  bool operator==(const Omission&) const = default;
};

struct ViewPlan
{
  ViewFormat format = ViewFormat::FullCalendar;
  SlotSet included;
  Omission omitted;
  int score = 4;
  std::string reason;
  /// A "see more options" toggle applies.
  bool can_expand = false;
  /// An early respondent may switch to the slots that suit everyone so far.
  bool can_collapse = false;

  bool operator==(const ViewPlan&) const = default;
};

/// The counts the rule policy looks at.
struct VotingSummary
{
  std::size_t group_size = 0;
  std::size_t respondents = 0;
  std::size_t promising = 0;
  std::size_t possible = 0;
  std::size_t grid_slots = 0;

  double response_rate() const
  {
    return group_size == 0 ? 0.0
                           : static_cast<double>(respondents)
                               / static_cast<double>(group_size);
  }
};

inline VotingSummary summarize(const PollState& poll, const EngineConfig& config)
{
  VotingSummary s;
  const Tally t = tally(poll);
  s.respondents = t.respondents;
  s.group_size = poll.group_size();
  s.grid_slots = poll.grid.size();
  if (t.respondents > 0)
  {
    s.promising = promising_times(t, config.maybe_counts_as_available).size();
    s.possible = possible_times(t, config.maybe_counts_as_available).size();
  }
  return s;
}

struct RuleDecision
{
  int score = 4;
  std::string reason;
};

/// Deterministic policy for how many options the next attendee sees.
///
/// Early respondents get the full calendar (a poll when the grid is already
/// small). Afterwards a poll is shown when the possible or promising set fits
/// strictly between poll_min and poll_max; a near-complete group whose
/// possible set is at most poll_min sees only the promising slots; anything
/// else falls through to the pruned calendar.
inline RuleDecision rule_score(const VotingSummary& s, const EngineConfig& config)
{
  const auto lo = static_cast<std::size_t>(config.poll_min);
  const auto hi = static_cast<std::size_t>(config.poll_max);
  std::ostringstream why;

  if (s.respondents < static_cast<std::size_t>(config.early_respondent_count))
  {
    if (s.grid_slots < hi)
    {
      why << "Only " << s.respondents << " of " << s.group_size
          << " attendees have responded and the grid has just " << s.grid_slots
          << " options, so every option is shown as a poll.";
      return {2, why.str()};
    }
    why << "Only " << s.respondents << " of " << s.group_size
        << " attendees have responded; early respondents see the full calendar"
           " so no availability information is lost.";
    return {4, why.str()};
  }
  if (s.possible <= lo && s.response_rate() >= 0.5)
  {
    why << s.respondents << " of " << s.group_size << " attendees responded and "
        << s.promising << " promising / " << s.possible
        << " possible times remain; only the promising times are shown.";
    return {1, why.str()};
  }
  if (lo < s.possible && s.possible < hi)
  {
    why << s.possible << " possible times (" << s.promising
        << " promising) fit in a poll; promising and possible times are shown.";
    return {2, why.str()};
  }
  if (lo < s.promising && s.promising < hi)
  {
    why << s.promising << " promising times fit in a poll but " << s.possible
        << " possible times do not; only the promising times are shown.";
    return {1, why.str()};
  }
  why << "With " << s.promising << " promising and " << s.possible
      << " possible times, a broader range of options is shown as a calendar"
         " with unpromising edge rows and columns hidden.";
  return {3, why.str()};
}

inline RuleDecision rule_score(const PollState& poll, const EngineConfig& config)
{
  return rule_score(summarize(poll, config), config);
}

/// Rows (dates) and columns (times) of the calendar that may be hidden.
///
/// A slot is unpromising when fewer than half of the voters can make it and
/// the promising slots are above half (HalfOfVoters), or when it is neither
/// good nor promising (GoodTimes). Only fully-unpromising lines that touch
/// the calendar edge, directly or through lines already hidden, are omitted.
inline Omission omit_rows_cols(const PollState& poll, const EngineConfig& config)
{
  const Tally t = tally(poll);
  if (t.respondents == 0)
    return {};
  const bool maybe = config.maybe_counts_as_available;
  const auto& grid = poll.grid;
  const auto best = detail::max_available(t, maybe);
  const double voters = static_cast<double>(t.respondents);

  std::vector<bool> unpromising(grid.size(), false);
  if (config.omission_rule == OmissionRule::HalfOfVoters)
  {
    if (!(static_cast<double>(best) > voters / 2.0))
      return {};
    for (SlotId s = 0; s < grid.size(); ++s)
      unpromising[s] = static_cast<double>(t.available(s, maybe)) < voters / 2.0;
  }
  else
  {
    for (SlotId s = 0; s < grid.size(); ++s)
    {
      const auto n = t.available(s, maybe);
      const bool good = static_cast<double>(n) / voters > config.good_threshold;
      unpromising[s] = !good && n != best;
    }
  }

  auto row_hidden = [&](std::size_t d) {
    for (std::size_t j = 0; j < grid.time_count(); ++j)
      if (!unpromising[grid.slot(d, j)])
        return false;
    return true;
  };
  auto col_hidden = [&](std::size_t j) {
    for (std::size_t d = 0; d < grid.date_count(); ++d)
      if (!unpromising[grid.slot(d, j)])
        return false;
    return true;
  };

  // Peel from both ends; stops at the first line holding a keepable slot.
  auto peel = [](std::size_t count, auto&& hidden) {
    std::vector<std::size_t> out;
    std::size_t front = 0;
    while (front < count && hidden(front))
      out.push_back(front++);
    if (front == count)
      return out;
    std::size_t back = count;
    while (back > front + 1 && hidden(back - 1))
      out.push_back(--back);
    std::sort(out.begin(), out.end());
    return out;
  };

  Omission o;
  o.rows = peel(grid.date_count(), row_hidden);
  o.columns = peel(grid.time_count(), col_hidden);
  // Promising slots exist, so neither axis can be emptied; guard regardless.
  if (o.rows.size() == grid.date_count() || o.columns.size() == grid.time_count())
    return {};
  return o;
}

namespace detail {

inline SlotSet remaining_slots(const SlotGrid& grid, const Omission& o)
{
  std::vector<bool> row_gone(grid.date_count(), false);
  std::vector<bool> col_gone(grid.time_count(), false);
  for (auto r : o.rows) row_gone[r] = true;
  for (auto c : o.columns) col_gone[c] = true;
  SlotSet out;
  for (SlotId s = 0; s < grid.size(); ++s)
    if (!row_gone[grid.date_of(s)] && !col_gone[grid.time_of(s)])
      out.push_back(s);
  return out;
}

inline std::string default_reason(int score)
{
  switch (score)
  {
    case 4: return "All options are shown.";
    case 3: return "Calendar with unpromising edge rows and columns hidden.";
    case 2: return "Poll of promising and possible times.";
    default: return "Poll of promising times.";
  }
}

} // namespace detail

/// Renders a score into concrete slots. An empty poll escalates to the next
/// score up. Before any response every slot is equally possible and none is
/// promising yet.
inline ViewPlan plan_view(const PollState& poll, int score,
  const EngineConfig& config, std::string reason = {})
{
  if (!valid_score(score))
    throw std::out_of_range("score must be within 1..4");

  const Tally t = tally(poll);
  const bool maybe = config.maybe_counts_as_available;
  ViewPlan plan;
  for (int s = score; s <= 4; ++s)
  {
    plan = ViewPlan{};
    plan.score = s;
    plan.format = format_for_score(s);
    switch (s)
    {
      case 1:
        if (t.respondents > 0)
          plan.included = promising_times(t, maybe);
        break;
      case 2:
        plan.included = t.respondents > 0 ? possible_times(t, maybe)
                                          : poll.grid.all_slots();
        break;
      case 3:
        plan.omitted = omit_rows_cols(poll, config);
        plan.included = detail::remaining_slots(poll.grid, plan.omitted);
        break;
      default:
        plan.included = poll.grid.all_slots();
        break;
    }
    if (!plan.included.empty())
      break;
  }
  plan.reason = (plan.score == score && !reason.empty())
    ? std::move(reason) : detail::default_reason(plan.score);
  plan.can_expand = plan.score < 4;
  plan.can_collapse = plan.format == ViewFormat::FullCalendar
    && t.respondents >= 1
    && t.respondents < static_cast<std::size_t>(config.early_respondent_count);
  return plan;
}

/// The "see more options" rendering: always the full calendar.
inline ViewPlan expanded_view(const PollState& poll)
{
  return plan_view(poll, 4, poll.config, "Expanded to every option.");
}

/// The "view fewer options" rendering offered to early respondents: only the
/// times that suit everyone who answered so far.
inline ViewPlan collapsed_view(const PollState& poll)
{
  return plan_view(poll, 1, poll.config,
    "Showing only the times that work for the respondents so far.");
}

} // namespace groupsched

#endif // GROUPSCHED__ADAPTIVE_ENGINE_HPP
