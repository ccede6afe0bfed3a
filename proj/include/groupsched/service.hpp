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

#ifndef GROUPSCHED__SERVICE_HPP
#define GROUPSCHED__SERVICE_HPP

#include <groupsched/adaptive_engine.hpp>
#include <groupsched/llm_gateway.hpp>
#include <groupsched/recommendation.hpp>
#include <groupsched/store.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace groupsched {

class ServiceError : public std::runtime_error
{
public:
  enum class Kind { Invalid, NotFound, Conflict };

  ServiceError(Kind kind, const std::string& what)
  : std::runtime_error(what),
    _kind(kind)
  {
  }

  Kind kind() const { return _kind; }

private:
  Kind _kind;
};

/// What an attendee is shown, plus context for rendering it.
struct ServedView
{
  ViewPlan plan;
  DecisionSource source = DecisionSource::Fallback;
  std::size_t decision_index = 0;
  std::optional<Response> own_marks;
  Tally popularity;
};

struct SubmitResult
{
  std::size_t respondent_count = 0;
  std::size_t promising_count = 0;
  std::size_t possible_count = 0;
  ServedView next_view;
};

struct RecommendationBatch
{
  std::vector<Recommendation> recommendations;
  /// Filled only when no slot suits every counted respondent.
  std::vector<Recommendation> relaxed;
};

/// Poll lifecycle over a PollStore. Writes to one poll are serialized and
/// persisted before they become visible; different polls proceed in parallel.
class SchedulingService
{
public:
  SchedulingService(PollStore store, LlmGateway& gateway)
  : _store(std::move(store)),
    _gateway(gateway)
  {
  }

  std::string create_poll(SlotGrid grid, std::vector<std::string> roster,
    EngineConfig config = {})
  {
    if (roster.empty())
      throw ServiceError(ServiceError::Kind::Invalid, "roster is empty");
    for (auto& name : roster)
    {
      name = normalize_name(name);
      if (name.empty())
        throw ServiceError(ServiceError::Kind::Invalid, "roster has an empty name");
    }
    for (std::size_t i = 0; i < roster.size(); ++i)
      for (std::size_t j = i + 1; j < roster.size(); ++j)
        if (name_key(roster[i]) == name_key(roster[j]))
          throw ServiceError(ServiceError::Kind::Invalid,
            "duplicate roster entry '" + roster[j] + "'");
    try
    {
      config.validate();
    }
    catch (const std::invalid_argument& e)
    {
      throw ServiceError(ServiceError::Kind::Invalid, e.what());
    }

    PollState poll;
    poll.grid = std::move(grid);
    poll.roster = std::move(roster);
    poll.config = config;
    poll.created_at = now_utc();
    poll.decision_log.push_back(_gateway.score(poll));

    std::lock_guard lock(_registry_mutex);
    do
      poll.id = random_id();
    while (_entries.count(poll.id) || _store.load(poll.id));
    _store.save(poll);
    auto entry = std::make_shared<Entry>();
    entry->state = std::move(poll);
    const auto id = entry->state.id;
    _entries.emplace(id, std::move(entry));
    return id;
  }

  PollState get_poll(const std::string& id)
  {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    return e->state;
  }

  SubmitResult submit_response(const std::string& id, Response response)
  {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    PollState next = e->state;
    if (next.finalized)
      throw ServiceError(ServiceError::Kind::Conflict, "poll is finalized");

    response.attendee = normalize_name(response.attendee);
    if (response.attendee.empty())
      throw ServiceError(ServiceError::Kind::Invalid, "attendee name is empty");
    for (const auto& [slot, level] : response.marks)
      if (!next.grid.contains(slot))
        throw ServiceError(ServiceError::Kind::Invalid, "mark outside the grid");
    check_collision(next, response.attendee);

    if (std::find(next.roster.begin(), next.roster.end(), response.attendee)
      == next.roster.end())
      next.roster.push_back(response.attendee);
    response.submitted_at = now_utc();
    next.responses[response.attendee] = std::move(response);
    next.decision_log.push_back(_gateway.score(next));
    commit(*e, std::move(next));

    SubmitResult result;
    const auto t = tally(e->state);
    result.respondent_count = t.respondents;
    if (t.respondents > 0)
    {
      const bool maybe = e->state.config.maybe_counts_as_available;
      result.promising_count = promising_times(t, maybe).size();
      result.possible_count = possible_times(t, maybe).size();
    }
    result.next_view = serve(e->state, std::nullopt, false, false);
    return result;
  }

  ServedView get_view(const std::string& id, const std::optional<std::string>& attendee,
    bool expand, bool collapse = false)
  {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    return serve(e->state, attendee, expand, collapse);
  }

  RecommendationBatch get_recommendations(const std::string& id, std::size_t top_k)
  {
    const PollState snapshot = get_poll(id);
    return recommendations_for(snapshot, top_k);
  }

  RecommendationBatch set_priority(const std::string& id, const std::string& attendee,
    Priority level, std::size_t top_k = 10)
  {
    auto e = entry(id);
    std::unique_lock lock(e->mutex);
    PollState next = e->state;
    const auto name = normalize_name(attendee);
    if (!next.responses.count(name)
      && std::find(next.roster.begin(), next.roster.end(), name) == next.roster.end())
      throw ServiceError(ServiceError::Kind::NotFound,
        "unknown attendee '" + attendee + "'");
    if (next.priority_of(name) != level || !next.priorities.count(name))
    {
      next.priorities[name] = level;
      next.decision_log.push_back(_gateway.score(next));
      commit(*e, std::move(next));
    }
    const PollState snapshot = e->state;
    lock.unlock();
    if (snapshot.respondent_count() == 0)
      return {};
    return recommendations_for(snapshot, top_k);
  }

  void finalize(const std::string& id, SlotId slot)
  {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    if (e->state.finalized)
      throw ServiceError(ServiceError::Kind::Conflict, "poll is already finalized");
    if (!e->state.grid.contains(slot))
      throw ServiceError(ServiceError::Kind::Invalid, "slot outside the grid");
    PollState next = e->state;
    next.finalized = slot;
    commit(*e, std::move(next));
  }

  const PollStore& store() const { return _store; }

  static std::string normalize_name(const std::string& name)
  {
    const auto b = name.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
      return {};
    const auto last = name.find_last_not_of(" \t\r\n");
    return name.substr(b, last - b + 1);
  }

private:
  struct Entry
  {
    std::mutex mutex;
    PollState state;
  };

  static std::string name_key(const std::string& name)
  {
    std::string k = normalize_name(name);
    for (auto& c : k)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return k;
  }

  /// A name that equals an existing attendee only up to case is a different
  /// person picking a clashing name.
  static void check_collision(const PollState& poll, const std::string& name)
  {
    const auto key = name_key(name);
    auto clashes = [&](const std::string& other) {
      return other != name && name_key(other) == key;
    };
    for (const auto& other : poll.roster)
      if (clashes(other))
        throw ServiceError(ServiceError::Kind::Conflict,
          "name '" + name + "' collides with '" + other + "'");
    for (const auto& [other, r] : poll.responses)
      if (clashes(other))
        throw ServiceError(ServiceError::Kind::Conflict,
          "name '" + name + "' collides with '" + other + "'");
  }

  static std::string random_id()
  {
    static constexpr char alphabet[] = "abcdefghijkmnpqrstuvwxyz23456789";
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_int_distribution<std::size_t> pick(0, sizeof(alphabet) - 2);
    std::string id(12, 'a');
    for (auto& c : id)
      c = alphabet[pick(rng)];
    return id;
  }

  std::shared_ptr<Entry> entry(const std::string& id)
  {
    std::lock_guard lock(_registry_mutex);
    if (auto it = _entries.find(id); it != _entries.end())
      return it->second;
    std::optional<PollState> loaded;
    try
    {
      loaded = _store.load(id);
    }
    catch (const DecodeError& e)
    {
      throw ServiceError(ServiceError::Kind::Conflict,
        "stored poll is corrupt: " + std::string(e.what()));
    }
    if (!loaded)
      throw ServiceError(ServiceError::Kind::NotFound, "unknown poll '" + id + "'");
    auto e = std::make_shared<Entry>();
    e->state = std::move(*loaded);
    _entries.emplace(id, e);
    return e;
  }

  /// Persist first; memory only changes once the document is on disk.
  void commit(Entry& e, PollState next)
  {
    _store.save(next);
    e.state = std::move(next);
  }

  static ServedView serve(const PollState& poll, const std::optional<std::string>& attendee,
    bool expand, bool collapse)
  {
    ServedView v;
    const auto& decision = poll.decision_log.back();
    v.decision_index = poll.decision_log.size() - 1;
    v.source = decision.source;
    v.plan = plan_view(poll, decision.score, poll.config, decision.reason);
    if (expand)
      v.plan = expanded_view(poll);
    else if (collapse && v.plan.can_collapse)
      v.plan = collapsed_view(poll);
    if (attendee)
    {
      const auto it = poll.responses.find(normalize_name(*attendee));
      if (it != poll.responses.end())
        v.own_marks = it->second;
    }
    v.popularity = tally(poll);
    return v;
  }

  static RecommendationBatch recommendations_for(const PollState& poll,
    std::size_t top_k)
  {
    if (poll.respondent_count() == 0)
      throw ServiceError(ServiceError::Kind::Conflict, "poll has no responses yet");
    RecommendationBatch batch;
    const auto now = now_utc();
    batch.recommendations = recommend(poll, top_k, now);
    if (!has_common_slot(poll))
      for (const auto& spec : canonical_algorithms(poll.config))
        batch.relaxed.push_back(relaxation_pass(poll, spec, top_k, now));
    return batch;
  }

  PollStore _store;
  LlmGateway& _gateway;
  std::mutex _registry_mutex;
  std::map<std::string, std::shared_ptr<Entry>> _entries;
};

} // namespace groupsched

#endif // GROUPSCHED__SERVICE_HPP
