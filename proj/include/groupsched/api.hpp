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

#ifndef GROUPSCHED__API_HPP
#define GROUPSCHED__API_HPP

// HTTP+JSON surface of SchedulingService.
//
//   POST /polls                              create
//   GET  /polls/{id}                         full poll document
//   POST /polls/{id}/responses               submit / resubmit availability
//   GET  /polls/{id}/view?attendee=&expand=&collapse=
//   GET  /polls/{id}/recommendations?k=
//   PUT  /polls/{id}/priorities/{attendee}   {"priority": "must|optional|not_coming"}
//   POST /polls/{id}/finalize                {"date", "time"}
//
// The router is transport-independent so the CLI can drive it in-process.

#include <groupsched/json_codec.hpp>
#include <groupsched/service.hpp>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <map>
#include <string>
#include <vector>

namespace groupsched {

struct ApiRequest
{
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse
{
  int status = 200;
  json body;
};

inline json served_view_to_json(const SlotGrid& grid, const ServedView& v)
{
  json popularity = json::array();
  for (SlotId s = 0; s < grid.size(); ++s)
  {
    auto j = slot_to_json(grid, s);
    j["sure"] = v.popularity.sure[s];
    j["maybe"] = v.popularity.maybe[s];
    popularity.push_back(std::move(j));
  }
  return {
    {"plan", plan_to_json(grid, v.plan)},
    {"source", to_string(v.source)},
    {"decision_index", v.decision_index},
    {"own_marks", v.own_marks ? marks_to_json(grid, *v.own_marks) : json(nullptr)},
    {"respondent_count", v.popularity.respondents},
    {"popularity", popularity},
  };
}

class ApiRouter
{
public:
  explicit ApiRouter(SchedulingService& service)
  : _service(service)
  {
  }

  ApiResponse handle(const ApiRequest& req)
  {
    try
    {
      return dispatch(req);
    }
    catch (const ServiceError& e)
    {
      switch (e.kind())
      {
        case ServiceError::Kind::NotFound: return error(404, e.what());
        case ServiceError::Kind::Conflict: return error(409, e.what());
        case ServiceError::Kind::Invalid: return error(400, e.what());
      }
      return error(400, e.what());
    }
    catch (const DecodeError& e)
    {
      return error(400, e.what());
    }
    catch (const GridError& e)
    {
      return error(400, e.what());
    }
    catch (const json::exception& e)
    {
      return error(400, std::string("malformed JSON: ") + e.what());
    }
    catch (const std::exception& e)
    {
      log().error("{} {} failed: {}", req.method, req.path, e.what());
      return error(500, e.what());
    }
  }

private:
  static ApiResponse error(int status, const std::string& message)
  {
    return {status, {{"error", message}}};
  }

  static std::vector<std::string> segments(const std::string& path)
  {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size())
    {
      while (i < path.size() && path[i] == '/')
        ++i;
      const auto j = path.find('/', i);
      if (i < path.size())
        out.push_back(path.substr(i, j == std::string::npos ? j : j - i));
      i = j == std::string::npos ? path.size() : j;
    }
    return out;
  }

  static bool flag(const ApiRequest& req, const std::string& name)
  {
    const auto it = req.query.find(name);
    return it != req.query.end() && (it->second == "true" || it->second == "1");
  }

  static std::size_t top_k(const ApiRequest& req)
  {
    const auto it = req.query.find("k");
    if (it == req.query.end())
      return 10;
    try
    {
      const long k = std::stol(it->second);
      if (k <= 0)
        throw ServiceError(ServiceError::Kind::Invalid, "k must be positive");
      return static_cast<std::size_t>(k);
    }
    catch (const std::logic_error&)
    {
      throw ServiceError(ServiceError::Kind::Invalid, "k must be an integer");
    }
  }

  static json recommendations_json(const SlotGrid& grid,
    const RecommendationBatch& batch, const PollState& poll)
  {
    json recs = json::array();
    for (const auto& r : batch.recommendations)
      recs.push_back(recommendation_to_json(grid, r));
    json out = {{"recommendations", recs}};
    if (!batch.relaxed.empty())
    {
      json relaxed = json::array();
      for (const auto& r : batch.relaxed)
        relaxed.push_back(recommendation_to_json(grid, r));
      out["relaxed"] = relaxed;
    }
    json notes = json::array();
    for (const auto& [who, r] : poll.responses)
      if (r.note && !r.note->empty())
        notes.push_back({{"attendee", who}, {"note", *r.note}});
    out["notes"] = notes;
    json priorities = json::object();
    for (const auto& who : poll.roster)
      priorities[who] = to_string(poll.priority_of(who));
    out["priorities"] = priorities;
    return out;
  }

  ApiResponse dispatch(const ApiRequest& req)
  {
    const auto seg = segments(req.path);
    if (seg.empty() || seg[0] != "polls")
      return error(404, "no such endpoint");

    if (seg.size() == 1)
    {
      if (req.method != "POST")
        return error(405, "method not allowed");
      const auto body = json::parse(req.body);
      auto grid = grid_from_json(body.at("grid"));
      auto roster = body.at("roster").get<std::vector<std::string>>();
      auto config = config_from_json(body.value("config", json(nullptr)));
      const auto id = _service.create_poll(std::move(grid), std::move(roster), config);
      return {201, {{"id", id}, {"poll", poll_to_json(_service.get_poll(id))}}};
    }

    const std::string& id = seg[1];
    if (seg.size() == 2)
    {
      if (req.method != "GET")
        return error(405, "method not allowed");
      return {200, poll_to_json(_service.get_poll(id))};
    }

    const std::string& what = seg[2];
    if (what == "responses" && seg.size() == 3 && req.method == "POST")
    {
      const auto poll = _service.get_poll(id);
      const auto body = json::parse(req.body);
      Response r;
      r.attendee = body.at("attendee").get<std::string>();
      r.marks = marks_from_json(poll.grid, body.value("marks", json::array()));
      if (body.contains("note") && body["note"].is_string())
        r.note = body["note"].get<std::string>();
      const auto result = _service.submit_response(id, std::move(r));
      return {200, {
        {"respondent_count", result.respondent_count},
        {"promising_count", result.promising_count},
        {"possible_count", result.possible_count},
        {"view", served_view_to_json(poll.grid, result.next_view)},
      }};
    }
    if (what == "view" && seg.size() == 3 && req.method == "GET")
    {
      std::optional<std::string> attendee;
      if (auto it = req.query.find("attendee"); it != req.query.end())
        attendee = it->second;
      const auto view = _service.get_view(id, attendee, flag(req, "expand"),
        flag(req, "collapse"));
      return {200, served_view_to_json(_service.get_poll(id).grid, view)};
    }
    if (what == "recommendations" && seg.size() == 3 && req.method == "GET")
    {
      const auto batch = _service.get_recommendations(id, top_k(req));
      const auto poll = _service.get_poll(id);
      return {200, recommendations_json(poll.grid, batch, poll)};
    }
    if (what == "priorities" && seg.size() == 4 && req.method == "PUT")
    {
      const auto body = json::parse(req.body);
      const auto level = parse_priority(body.at("priority").get<std::string>());
      if (!level)
        return error(400, "priority must be must, optional or not_coming");
      const auto batch = _service.set_priority(id, seg[3], *level, top_k(req));
      const auto poll = _service.get_poll(id);
      if (batch.recommendations.empty())
        return {200, {{"recommendations", json::array()}, {"notes", json::array()}}};
      return {200, recommendations_json(poll.grid, batch, poll)};
    }
    if (what == "finalize" && seg.size() == 3 && req.method == "POST")
    {
      const auto poll = _service.get_poll(id);
      const auto body = json::parse(req.body);
      _service.finalize(id, slot_from_json(poll.grid, body));
      return {200, {{"finalized", slot_to_json(poll.grid, slot_from_json(poll.grid, body))}}};
    }
    return error(404, "no such endpoint");
  }

  SchedulingService& _service;
};

/// Routes every request on `server` through `router`.
inline void mount(httplib::Server& server, ApiRouter& router)
{
  auto handler = [&router](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params)
      api.query[k] = v;
    const auto out = router.handle(api);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server.Get(R"(/.*)", handler);
  server.Post(R"(/.*)", handler);
  server.Put(R"(/.*)", handler);
}

} // namespace groupsched

#endif // GROUPSCHED__API_HPP
