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

#ifndef GROUPSCHED__SIMULATION_HPP
#define GROUPSCHED__SIMULATION_HPP

#include <groupsched/poll_state.hpp>

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace groupsched {

enum class DayPreference : std::uint8_t { Morning, Evening };
enum class Importance : std::uint8_t { More, Less };

/// A synthetic attendee: a calendar with 5 or 10 busy events and a leaning
/// toward mornings or evenings.
struct SimulatedAttendee
{
  int busyness = 5;
  DayPreference preference = DayPreference::Morning;
  Importance importance = Importance::Less;
  std::uint64_t seed = 0;
};

/// Distribution the attendees are drawn from.
struct Profile
{
  /// 0 draws 5 or 10 uniformly.
  int busyness = 0;
  /// nullopt draws uniformly.
  std::optional<DayPreference> preference;
  double important_fraction = 0.2;
};

/// "mixed", "busy", "light", "morning" or "evening".
inline Profile parse_profile(std::string_view name)
{
  Profile p;
  if (name == "mixed")
    return p;
  if (name == "busy")
    p.busyness = 10;
  else if (name == "light")
    p.busyness = 5;
  else if (name == "morning")
    p.preference = DayPreference::Morning;
  else if (name == "evening")
    p.preference = DayPreference::Evening;
  else
    throw std::invalid_argument("unknown profile '" + std::string(name) + "'");
  return p;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline SimulatedAttendee draw_attendee(const Profile& profile, std::uint64_t seed,
  std::size_t index)
{
  SimulatedAttendee a;
  a.seed = mix_seed(seed, index);
  std::mt19937_64 rng(a.seed);
  a.busyness = profile.busyness ? profile.busyness
                                : (std::bernoulli_distribution(0.5)(rng) ? 10 : 5);
  a.preference = profile.preference ? *profile.preference
    : (std::bernoulli_distribution(0.5)(rng) ? DayPreference::Evening
                                             : DayPreference::Morning);
  a.importance = std::bernoulli_distribution(profile.important_fraction)(rng)
    ? Importance::More : Importance::Less;
  return a;
}

/// Marks as a pure function of the attendee's seed. Busy events (1 to 2
/// hours) are unavailable; the preferred half of the day is sure, the rest
/// maybe.
inline std::map<SlotId, Preference> simulate_marks(const SimulatedAttendee& a,
  const SlotGrid& grid)
{
  std::mt19937_64 rng(a.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<bool> busy(grid.size(), false);
  const int blocks_per_hour = std::max(1, 60 / grid.granularity_minutes());
  std::uniform_int_distribution<std::size_t> pick_date(0, grid.date_count() - 1);
  std::uniform_int_distribution<std::size_t> pick_time(0, grid.time_count() - 1);
  std::uniform_int_distribution<int> pick_len(blocks_per_hour, 2 * blocks_per_hour);
  for (int e = 0; e < a.busyness; ++e)
  {
    const auto d = pick_date(rng);
    const auto t0 = pick_time(rng);
    const auto len = static_cast<std::size_t>(pick_len(rng));
    for (std::size_t t = t0; t < std::min(grid.time_count(), t0 + len); ++t)
      busy[grid.slot(d, t)] = true;
  }
  const int midday = (grid.times().front() + grid.times().back()
    + grid.granularity_minutes()) / 2;
  std::map<SlotId, Preference> marks;
  for (SlotId s = 0; s < grid.size(); ++s)
  {
    if (busy[s])
      continue;
    const bool morning = grid.times()[grid.time_of(s)] < midday;
    const bool preferred = (a.preference == DayPreference::Morning) == morning;
    marks[s] = preferred ? Preference::AvailableSure : Preference::MaybeAvailable;
  }
  return marks;
}

} // namespace groupsched

#endif // GROUPSCHED__SIMULATION_HPP
