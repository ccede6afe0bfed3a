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

#ifndef GROUPSCHED__RECOMMENDATION_HPP
#define GROUPSCHED__RECOMMENDATION_HPP

#include <groupsched/availability.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace groupsched {

enum class PriorityMode : std::uint8_t
{
  /// Must-attend availability first, overall attendance breaks ties.
  ImportantFirst,
  OverallAttendance,
};

inline std::string_view to_string(PriorityMode m)
{
  return m == PriorityMode::ImportantFirst ? "important_first" : "overall_attendance";
}

struct AlgorithmSpec
{
  double maybe_weight = 0.75;
  PriorityMode mode = PriorityMode::ImportantFirst;
  std::string label;

  bool operator==(const AlgorithmSpec&) const = default;
};

/// The 2x2 product of {high, low} maybe-weight and both priority modes.
inline std::array<AlgorithmSpec, 4> canonical_algorithms(
  const EngineConfig& config = {})
{
  const double hi = config.maybe_weight_high;
  const double lo = config.maybe_weight_low;
  return {{
    {hi, PriorityMode::ImportantFirst, "high-maybe/important-first"},
    {hi, PriorityMode::OverallAttendance, "high-maybe/overall-attendance"},
    {lo, PriorityMode::ImportantFirst, "low-maybe/important-first"},
    {lo, PriorityMode::OverallAttendance, "low-maybe/overall-attendance"},
  }};
}

struct RankedSlot
{
  SlotId slot = 0;
  /// Weighted attendance over every counted attendee.
  double score = 0.0;
  /// Weighted attendance over MustBePresent attendees only.
  double must_score = 0.0;
  std::vector<std::string> sure;
  std::vector<std::string> maybe;

  bool operator==(const RankedSlot&) const = default;
};

struct Recommendation
{
  AlgorithmSpec algorithm;
  std::vector<RankedSlot> ranked;
  Timestamp generated_at{};
  /// Attendees dropped by a relaxation pass, in exclusion order.
  std::vector<std::string> relaxed_away;

  bool operator==(const Recommendation&) const = default;
};

namespace detail {

inline double weight_of(Preference p, double maybe_weight)
{
  switch (p)
  {
    case Preference::AvailableSure: return 1.0;
    case Preference::MaybeAvailable: return maybe_weight;
    case Preference::Unavailable: return 0.0;
  }
  return 0.0;
}

inline RankedSlot rate_slot(SlotId slot, const PollState& poll,
  const std::vector<const Response*>& counted, double maybe_weight)
{
  RankedSlot r;
  r.slot = slot;
  std::uint32_t sure = 0, maybe = 0, must_sure = 0, must_maybe = 0;
  for (const Response* resp : counted)
  {
    const auto level = resp->at(slot);
    const bool must = poll.priority_of(resp->attendee) == Priority::MustBePresent;
    if (level == Preference::AvailableSure)
    {
      ++sure;
      must_sure += must;
      r.sure.push_back(resp->attendee);
    }
    else if (level == Preference::MaybeAvailable)
    {
      ++maybe;
      must_maybe += must;
      r.maybe.push_back(resp->attendee);
    }
  }
  // Computed from counts so equal vote patterns give bit-identical scores.
  r.score = sure + maybe_weight * maybe;
  r.must_score = must_sure + maybe_weight * must_maybe;
  return r;
}

inline bool ranks_before(const RankedSlot& a, const RankedSlot& b, PriorityMode mode)
{
  if (mode == PriorityMode::ImportantFirst && a.must_score != b.must_score)
    return a.must_score > b.must_score;
  if (a.score != b.score)
    return a.score > b.score;
  return a.slot < b.slot;
}

inline Recommendation rank_with(const PollState& poll,
  const std::vector<const Response*>& counted, const AlgorithmSpec& spec,
  std::size_t top_k, Timestamp now)
{
  Recommendation rec;
  rec.algorithm = spec;
  rec.generated_at = now;
  rec.ranked.reserve(poll.grid.size());
  for (SlotId s = 0; s < poll.grid.size(); ++s)
    rec.ranked.push_back(rate_slot(s, poll, counted, spec.maybe_weight));
  std::sort(rec.ranked.begin(), rec.ranked.end(),
    [&](const RankedSlot& a, const RankedSlot& b) {
      return ranks_before(a, b, spec.mode);
    });
  if (rec.ranked.size() > top_k)
    rec.ranked.resize(top_k);
  return rec;
}

} // namespace detail

/// Weighted attendance at `slot` under `spec`'s maybe-weight. NotComing
/// attendees contribute nothing.
inline double score_slot(SlotId slot, const PollState& poll, const AlgorithmSpec& spec)
{
  if (!poll.grid.contains(slot))
    throw GridError("slot outside the grid");
  return detail::rate_slot(slot, poll, poll.active_responses(), spec.maybe_weight)
    .score;
}

inline Recommendation recommend_one(const PollState& poll, const AlgorithmSpec& spec,
  std::size_t top_k, Timestamp now = now_utc())
{
  return detail::rank_with(poll, poll.active_responses(), spec, top_k, now);
}

/// One ranked list per canonical algorithm, all from the same snapshot.
inline std::vector<Recommendation> recommend(const PollState& poll,
  std::size_t top_k, Timestamp now = now_utc())
{
  if (poll.respondent_count() == 0)
    throw std::domain_error("recommendations need at least one response");
  std::vector<Recommendation> out;
  for (const auto& spec : canonical_algorithms(poll.config))
    out.push_back(recommend_one(poll, spec, top_k, now));
  return out;
}

/// Some slot suits every counted respondent (sure or maybe).
inline bool has_common_slot(const PollState& poll)
{
  return !common_times(tally(poll)).empty();
}

/// Drops respondents one at a time (lowest priority for important-first,
/// lowest availability otherwise) until a slot suits everyone left, then
/// ranks over the remaining attendees. Stops at a single respondent.
inline Recommendation relaxation_pass(const PollState& poll, const AlgorithmSpec& spec,
  std::size_t top_k, Timestamp now = now_utc())
{
  const auto strategy = spec.mode == PriorityMode::ImportantFirst
    ? ExclusionStrategy::LowestPriority
    : ExclusionStrategy::LowestAvailability;
  const auto order = exclusion_order(poll, strategy);
  if (order.empty())
    throw std::domain_error("recommendations need at least one response");

  std::size_t k = 0;
  while (k + 1 < order.size()
    && common_times(exclude_and_recount(poll, strategy, k)).empty())
    ++k;

  // Same attendee order as an unrelaxed ranking.
  std::vector<const Response*> kept;
  for (const Response* r : poll.active_responses())
    if (std::find(order.begin(), order.begin() + static_cast<long>(k), r->attendee)
      == order.begin() + static_cast<long>(k))
      kept.push_back(r);
  auto rec = detail::rank_with(poll, kept, spec, top_k, now);
  rec.relaxed_away.assign(order.begin(), order.begin() + static_cast<long>(k));
  return rec;
}

/// Applies a priority change to `poll` and re-ranks.
inline std::vector<Recommendation> refresh_on_priority_change(PollState& poll,
  const std::string& attendee, Priority level, std::size_t top_k,
  Timestamp now = now_utc())
{
  const bool known = poll.responses.count(attendee) > 0
    || std::find(poll.roster.begin(), poll.roster.end(), attendee) != poll.roster.end();
  if (!known)
    throw std::out_of_range("unknown attendee '" + attendee + "'");
  poll.priorities[attendee] = level;
  return recommend(poll, top_k, now);
}

} // namespace groupsched

#endif // GROUPSCHED__RECOMMENDATION_HPP
