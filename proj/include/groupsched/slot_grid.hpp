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

#ifndef GROUPSCHED__SLOT_GRID_HPP
#define GROUPSCHED__SLOT_GRID_HPP

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace groupsched {

/// Flat slot address: date index * time count + time index. Ascending order
/// is "earlier date, then earlier time".
using SlotId = std::size_t;

/// Sorted, duplicate-free list of slot ids.
using SlotSet = std::vector<SlotId>;

class GridError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Parses "YYYY-MM-DD" into a calendar date; nullopt if malformed or invalid.
inline std::optional<std::chrono::year_month_day> parse_date(std::string_view text)
{
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3)
    return std::nullopt;
  const std::chrono::year_month_day ymd{
    std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok())
    return std::nullopt;
  return ymd;
}

/// Parses "HH:MM" into minutes after midnight.
inline std::optional<int> parse_time_of_day(std::string_view text)
{
  if (text.size() != 5 || text[2] != ':')
    return std::nullopt;
  auto digit = [&](std::size_t i) { return text[i] >= '0' && text[i] <= '9'; };
  if (!digit(0) || !digit(1) || !digit(3) || !digit(4))
    return std::nullopt;
  const int h = (text[0] - '0') * 10 + (text[1] - '0');
  const int m = (text[3] - '0') * 10 + (text[4] - '0');
  if (h > 24 || m > 59 || (h == 24 && m != 0))
    return std::nullopt;
  return h * 60 + m;
}

inline std::string format_time_of_day(int minutes)
{
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

/// The candidate meeting slots: an ordered date axis crossed with an ordered
/// time-of-day axis of uniform granularity.
class SlotGrid
{
public:
  SlotGrid() = default;

  /// Throws GridError unless both axes are non-empty, strictly sorted and the
  /// time axis is evenly spaced by `granularity_minutes`.
  SlotGrid(std::vector<std::string> dates, std::vector<int> times,
    int granularity_minutes = 30)
  : _dates(std::move(dates)),
    _times(std::move(times)),
    _granularity(granularity_minutes)
  {
    validate();
  }

  /// Blocks from `start` (inclusive) to `end` (exclusive), both minutes after
  /// midnight, e.g. 9:00-21:00 at 30 minutes gives 24 blocks.
  static SlotGrid from_range(std::vector<std::string> dates, int start, int end,
    int granularity_minutes = 30)
  {
    if (granularity_minutes <= 0)
      throw GridError("granularity must be positive");
    if (end <= start)
      throw GridError("time range is empty");
    std::vector<int> times;
    for (int t = start; t + granularity_minutes <= end; t += granularity_minutes)
      times.push_back(t);
    return SlotGrid(std::move(dates), std::move(times), granularity_minutes);
  }

  const std::vector<std::string>& dates() const { return _dates; }
  const std::vector<int>& times() const { return _times; }
  int granularity_minutes() const { return _granularity; }

  std::size_t date_count() const { return _dates.size(); }
  std::size_t time_count() const { return _times.size(); }
  std::size_t size() const { return _dates.size() * _times.size(); }

  SlotId slot(std::size_t date_index, std::size_t time_index) const
  {
    if (date_index >= _dates.size() || time_index >= _times.size())
      throw GridError("slot address out of bounds");
    return date_index * _times.size() + time_index;
  }

  std::size_t date_of(SlotId id) const { return id / _times.size(); }
  std::size_t time_of(SlotId id) const { return id % _times.size(); }
  bool contains(SlotId id) const { return id < size(); }

  /// Looks up a slot by its labels ("2024-05-06", "09:30").
  std::optional<SlotId> find(std::string_view date, std::string_view time) const
  {
    const auto d = std::find(_dates.begin(), _dates.end(), date);
    const auto minutes = parse_time_of_day(time);
    if (d == _dates.end() || !minutes)
      return std::nullopt;
    const auto t = std::find(_times.begin(), _times.end(), *minutes);
    if (t == _times.end())
      return std::nullopt;
    return slot(static_cast<std::size_t>(d - _dates.begin()),
      static_cast<std::size_t>(t - _times.begin()));
  }

  const std::string& date_label(SlotId id) const { return _dates[date_of(id)]; }
  std::string time_label(SlotId id) const
  {
    return format_time_of_day(_times[time_of(id)]);
  }

  SlotSet all_slots() const
  {
    SlotSet all(size());
    for (SlotId i = 0; i < all.size(); ++i)
      all[i] = i;
    return all;
  }

  bool operator==(const SlotGrid&) const = default;

private:
  void validate() const
  {
    if (_dates.empty())
      throw GridError("grid has no dates");
    if (_times.empty())
      throw GridError("grid has no times");
    if (_granularity <= 0)
      throw GridError("granularity must be positive");
    for (const auto& d : _dates)
      if (!parse_date(d))
        throw GridError("invalid date '" + d + "'");
    for (std::size_t i = 1; i < _dates.size(); ++i)
      if (!(_dates[i - 1] < _dates[i]))
        throw GridError("dates must be strictly increasing");
    for (std::size_t i = 0; i < _times.size(); ++i)
    {
      if (_times[i] < 0 || _times[i] + _granularity > 24 * 60)
        throw GridError("time block outside the day");
      if (i > 0 && _times[i] - _times[i - 1] != _granularity)
      {
        if (_times[i] <= _times[i - 1])
          throw GridError("times must be strictly increasing");
        if ((_times[i] - _times[i - 1]) % _granularity != 0)
          throw GridError("times must align to the granularity");
      }
    }
  }

  std::vector<std::string> _dates;
  std::vector<int> _times;
  int _granularity = 30;
};

} // namespace groupsched

#endif // GROUPSCHED__SLOT_GRID_HPP
