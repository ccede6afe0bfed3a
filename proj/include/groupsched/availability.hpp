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

#ifndef GROUPSCHED__AVAILABILITY_HPP
#define GROUPSCHED__AVAILABILITY_HPP

#include <groupsched/poll_state.hpp>

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace groupsched {

/// Per-slot vote counts over the attendees that still count.
struct Tally
{
  std::vector<std::uint32_t> sure;
  std::vector<std::uint32_t> maybe;
  std::size_t respondents = 0;

  std::size_t slot_count() const { return sure.size(); }

  std::uint32_t available(SlotId slot, bool maybe_counts) const
  {
    return sure[slot] + (maybe_counts ? maybe[slot] : 0u);
  }

  bool operator==(const Tally&) const = default;
};

inline Tally tally(const SlotGrid& grid, std::span<const Response* const> responses)
{
  Tally t;
  t.sure.assign(grid.size(), 0);
  t.maybe.assign(grid.size(), 0);
  t.respondents = responses.size();
  for (const Response* r : responses)
  {
    for (const auto& [slot, level] : r->marks)
    {
      if (slot >= grid.size())
        throw GridError("response marks a slot outside the grid");
      if (level == Preference::AvailableSure)
        ++t.sure[slot];
      else if (level == Preference::MaybeAvailable)
        ++t.maybe[slot];
    }
  }
  return t;
}

/// Counts every response except those of NotComing attendees.
inline Tally tally(const PollState& poll)
{
  const auto active = poll.active_responses();
  return tally(poll.grid, active);
}

namespace detail {

inline void require_respondents(const Tally& t)
{
  if (t.respondents == 0)
    throw std::domain_error("slot sets are undefined before the first response");
}

inline std::uint32_t max_available(const Tally& t, bool maybe_counts)
{
  std::uint32_t best = 0;
  for (SlotId s = 0; s < t.slot_count(); ++s)
    best = std::max(best, t.available(s, maybe_counts));
  return best;
}

template<typename Pred>
SlotSet select_slots(const Tally& t, Pred&& keep)
{
  SlotSet out;
  for (SlotId s = 0; s < t.slot_count(); ++s)
    if (keep(s))
      out.push_back(s);
  return out;
}

} // namespace detail

/// Slots where the largest number of respondents can attend.
inline SlotSet promising_times(const Tally& t, bool maybe_counts_as_available = true)
{
  detail::require_respondents(t);
  const auto best = detail::max_available(t, maybe_counts_as_available);
  return detail::select_slots(t, [&](SlotId s) {
    return t.available(s, maybe_counts_as_available) == best;
  });
}

/// Promising slots plus those exactly one attendee short of the maximum.
inline SlotSet possible_times(const Tally& t, bool maybe_counts_as_available = true)
{
  detail::require_respondents(t);
  const auto best = detail::max_available(t, maybe_counts_as_available);
  const auto floor = best == 0 ? 0u : best - 1;
  return detail::select_slots(t, [&](SlotId s) {
    return t.available(s, maybe_counts_as_available) >= floor;
  });
}

/// Slots where strictly more than `threshold` of the respondents are available.
inline SlotSet good_times(const Tally& t, double threshold = 0.65,
  bool maybe_counts_as_available = true)
{
  detail::require_respondents(t);
  if (!(0.0 < threshold && threshold < 1.0))
    throw std::invalid_argument("good-time threshold must lie in (0, 1)");
  const double n = static_cast<double>(t.respondents);
  return detail::select_slots(t, [&](SlotId s) {
    return static_cast<double>(t.available(s, maybe_counts_as_available)) / n
      > threshold;
  });
}

/// Slots every counted respondent marked sure or maybe.
inline SlotSet common_times(const Tally& t)
{
  if (t.respondents == 0)
    return {};
  return detail::select_slots(t, [&](SlotId s) {
    return t.available(s, true) == t.respondents;
  });
}

enum class ExclusionStrategy : std::uint8_t
{
  LowestPriority,
  LowestAvailability,
};

/// Counted respondents ordered from first-to-exclude to last. Ties go to the
/// earliest submission, then attendee name.
inline std::vector<std::string> exclusion_order(const PollState& poll,
  ExclusionStrategy strategy)
{
  auto active = poll.active_responses();
  auto rank = [&](const Response* r) -> std::size_t {
    if (strategy == ExclusionStrategy::LowestPriority)
      return static_cast<std::size_t>(poll.priority_of(r->attendee));
    return r->available_marks();
  };
  std::stable_sort(active.begin(), active.end(),
    [&](const Response* a, const Response* b) {
      const auto ra = rank(a), rb = rank(b);
      if (ra != rb)
        return ra < rb;
      if (a->submitted_at != b->submitted_at)
        return a->submitted_at < b->submitted_at;
      return a->attendee < b->attendee;
    });
  std::vector<std::string> order;
  order.reserve(active.size());
  for (const Response* r : active)
    order.push_back(r->attendee);
  return order;
}

/// Tally after dropping the `k` lowest-ranked respondents under `strategy`.
inline Tally exclude_and_recount(const PollState& poll, ExclusionStrategy strategy,
  std::size_t k)
{
  const auto order = exclusion_order(poll, strategy);
  if (k > 0 && k >= order.size())
    throw std::invalid_argument("cannot exclude every respondent");
  std::vector<const Response*> kept;
  for (std::size_t i = k; i < order.size(); ++i)
    kept.push_back(&poll.responses.at(order[i]));
  return tally(poll.grid, kept);
}

} // namespace groupsched

#endif // GROUPSCHED__AVAILABILITY_HPP
