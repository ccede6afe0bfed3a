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

#ifndef GROUPSCHED__CLI_HPP
#define GROUPSCHED__CLI_HPP

// schedcli: operator tool. Talks to a running schedd (--server) or drives the
// same API in-process over a local store (--store).

#include <groupsched/api.hpp>
#include <groupsched/simulation.hpp>

#include <CLI11.hpp>
#include <httplib.h>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace groupsched::cli {

class Backend
{
public:
  virtual ~Backend() = default;
  virtual ApiResponse call(const std::string& method, const std::string& path,
    const std::map<std::string, std::string>& query = {},
    const json& body = nullptr) = 0;
};

class LocalBackend : public Backend
{
public:
  explicit LocalBackend(const std::string& store_path)
  : _gateway(gateway_from_env()),
    _service(PollStore(store_path), _gateway),
    _router(_service)
  {
  }

  ApiResponse call(const std::string& method, const std::string& path,
    const std::map<std::string, std::string>& query, const json& body) override
  {
    return _router.handle({method, path, query, body.is_null() ? "" : body.dump()});
  }

private:
  LlmGateway _gateway;
  SchedulingService _service;
  ApiRouter _router;
};

class HttpBackend : public Backend
{
public:
  explicit HttpBackend(const std::string& server)
  : _client(server)
  {
    _client.set_read_timeout(60, 0);
  }

  ApiResponse call(const std::string& method, const std::string& path,
    const std::map<std::string, std::string>& query, const json& body) override
  {
    httplib::Params params(query.begin(), query.end());
    const std::string target = httplib::append_query_params(
      httplib::detail::encode_url(path), params);
    const std::string payload = body.is_null() ? "" : body.dump();
    httplib::Result res = method == "GET" ? _client.Get(target)
      : method == "PUT" ? _client.Put(target, payload, "application/json")
                        : _client.Post(target, payload, "application/json");
    if (!res)
      throw std::runtime_error("request " + method + " " + path
        + " failed: " + httplib::to_string(res.error()));
    auto parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded())
      throw std::runtime_error("server returned non-JSON body for " + path);
    return {res->status, std::move(parsed)};
  }

private:
  httplib::Client _client;
};

inline json expect_ok(const ApiResponse& r, const std::string& what)
{
  if (r.status >= 300)
    throw std::runtime_error(what + ": HTTP " + std::to_string(r.status) + ": "
      + r.body.value("error", r.body.dump()));
  return r.body;
}

inline std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

struct Options
{
  std::string server;
  std::string store;
  bool as_json = false;
  std::uint64_t seed = 1;
  std::string profile = "mixed";
};

struct SimulationStep
{
  std::string attendee;
  std::string format;
  int score = 0;
  std::string source;
  std::size_t options = 0;
  std::size_t promising_after = 0;
};

struct SimulationSummary
{
  std::string poll;
  std::vector<SimulationStep> steps;
  std::size_t respondents = 0;
  std::size_t final_promising = 0;
  std::size_t common_slots = 0;
};

/// Submits `n` synthetic attendees in order, recording the view each saw.
inline SimulationSummary simulate(Backend& backend, const std::string& poll_id,
  std::size_t n, const Profile& profile, std::uint64_t seed)
{
  const auto poll = poll_from_json(
    expect_ok(backend.call("GET", "/polls/" + poll_id), "fetch poll"));

  std::vector<std::string> names;
  for (const auto& who : poll.roster)
    if (names.size() < n && !poll.responses.count(who))
      names.push_back(who);
  for (std::size_t i = 1; names.size() < n; ++i)
  {
    const std::string name = "sim" + std::to_string(i);
    if (!poll.responses.count(name)
      && std::find(names.begin(), names.end(), name) == names.end())
      names.push_back(name);
  }

  SimulationSummary summary;
  summary.poll = poll_id;
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto& name = names[i];
    const auto view = expect_ok(backend.call("GET", "/polls/" + poll_id + "/view",
      {{"attendee", name}}), "fetch view");
    SimulationStep step;
    step.attendee = name;
    step.format = view["plan"]["format"].get<std::string>();
    step.score = view["plan"]["score"].get<int>();
    step.source = view["source"].get<std::string>();
    step.options = view["plan"]["included"].size();

    const auto attendee = draw_attendee(profile, seed, i);
    Response r;
    r.marks = simulate_marks(attendee, poll.grid);
    const json body = {{"attendee", name}, {"marks", marks_to_json(poll.grid, r)}};
    const auto ack = expect_ok(
      backend.call("POST", "/polls/" + poll_id + "/responses", {}, body), "submit");
    step.promising_after = ack["promising_count"].get<std::size_t>();
    summary.respondents = ack["respondent_count"].get<std::size_t>();
    if (attendee.importance == Importance::More)
      expect_ok(backend.call("PUT", "/polls/" + poll_id + "/priorities/" + name, {},
        {{"priority", "must"}}), "set priority");
    summary.steps.push_back(std::move(step));
  }

  const auto final_poll = poll_from_json(
    expect_ok(backend.call("GET", "/polls/" + poll_id), "fetch poll"));
  const auto t = tally(final_poll);
  if (t.respondents > 0)
    summary.final_promising =
      promising_times(t, final_poll.config.maybe_counts_as_available).size();
  summary.common_slots = common_times(t).size();
  return summary;
}

inline json summary_to_json(const SimulationSummary& s)
{
  json steps = json::array();
  json formats = json::array();
  for (const auto& st : s.steps)
  {
    steps.push_back({{"attendee", st.attendee}, {"format", st.format},
      {"score", st.score}, {"source", st.source}, {"options", st.options},
      {"promising_after", st.promising_after}});
    formats.push_back(st.format);
  }
  return {{"poll", s.poll}, {"steps", steps}, {"formats", formats},
    {"respondents", s.respondents}, {"final_promising", s.final_promising},
    {"common_slots", s.common_slots}};
}

inline void print_summary(std::ostream& out, const SimulationSummary& s)
{
  std::string formats;
  for (const auto& st : s.steps)
  {
    out << "attendee " << st.attendee << " saw " << st.format << " score=" << st.score
        << " source=" << st.source << " options=" << st.options
        << " promising_after=" << st.promising_after << '\n';
    formats += (formats.empty() ? "" : ",") + st.format;
  }
  out << "summary respondents=" << s.respondents
      << " final_promising=" << s.final_promising
      << " common_slots=" << s.common_slots << " formats=" << formats << '\n';
}

/// Scores a stored poll document without a server.
inline int score_offline(const std::string& state_file, const std::string& fixture,
  bool as_json, std::ostream& out)
{
  std::ifstream in(state_file);
  if (!in)
    throw std::runtime_error("cannot open " + state_file);
  const auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded())
    throw DecodeError(state_file + " is not valid JSON");
  const auto poll = poll_from_json(doc);

  LlmGateway gateway = fixture.empty()
    ? gateway_from_env()
    : LlmGateway(std::make_shared<FixtureEndpoint>(FixtureEndpoint::load(fixture)));
  const auto prompt = build_prompt(poll).render();
  const auto decision = gateway.score(poll);
  if (as_json)
  {
    out << json{{"prompt", prompt}, {"prompt_sha256", sha256_hex(prompt)},
      {"score", decision.score}, {"reason", decision.reason},
      {"source", to_string(decision.source)}}.dump(2) << '\n';
    return 0;
  }
  out << "prompt:\n" << prompt << "\n";
  out << "score: " << decision.score << '\n';
  out << "reason: " << decision.reason << '\n';
  out << "source: " << to_string(decision.source) << '\n';
  return 0;
}

inline std::unique_ptr<Backend> make_backend(const Options& o)
{
  if (!o.server.empty())
    return std::make_unique<HttpBackend>(o.server);
  return std::make_unique<LocalBackend>(o.store);
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Adaptive group-scheduling operator tool"};
  app.require_subcommand(1);
  // Global flags may follow the subcommand.
  app.fallthrough();
  Options o;
  o.store = env("SCHED_STORAGE_PATH").value_or("polls");
  if (auto s = env("SCHED_SERVER"))
    o.server = *s;
  app.add_option("--server", o.server, "schedd base URL, e.g. http://127.0.0.1:8080");
  app.add_option("--store", o.store, "poll directory for in-process mode");
  app.add_flag("--json", o.as_json, "machine-readable output");

  auto* poll_cmd = app.add_subcommand("poll", "create or inspect polls");
  poll_cmd->require_subcommand(1);
  auto* create = poll_cmd->add_subcommand("create", "create a poll");
  std::string dates, roster, start = "09:00", end = "17:00", config_json;
  int granularity = 30;
  create->add_option("--dates", dates, "comma-separated YYYY-MM-DD")->required();
  create->add_option("--start", start, "first block start, HH:MM");
  create->add_option("--end", end, "last block end, HH:MM");
  create->add_option("--granularity", granularity, "minutes per block");
  create->add_option("--roster", roster, "comma-separated attendee names")->required();
  create->add_option("--config", config_json, "engine config overrides as JSON");

  auto* show = poll_cmd->add_subcommand("show", "summarize a poll");
  std::string poll_id;
  show->add_option("id", poll_id)->required();

  auto* sim = app.add_subcommand("simulate", "submit synthetic attendees");
  std::size_t n = 10;
  sim->add_option("id", poll_id)->required();
  sim->add_option("-n,--attendees", n, "number of attendees");
  sim->add_option("--seed", o.seed);
  sim->add_option("--profile", o.profile, "mixed|busy|light|morning|evening");

  auto* score = app.add_subcommand("score", "score a poll document offline");
  std::string state_file, fixture;
  score->add_option("state", state_file)->required();
  score->add_option("--fixture", fixture, "replay file for the completion endpoint");

  auto* rec = app.add_subcommand("recommend", "ranked meeting times");
  std::size_t k = 5;
  rec->add_option("id", poll_id)->required();
  rec->add_option("-k", k, "entries per list");

  auto* view = app.add_subcommand("view", "the plan the next attendee sees");
  std::string attendee;
  bool expand = false;
  view->add_option("id", poll_id)->required();
  view->add_option("--attendee", attendee);
  view->add_flag("--expand", expand);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    return app.exit(e, out, err);
  }

  try
  {
    if (score->parsed())
      return score_offline(state_file, fixture, o.as_json, out);

    auto backend = make_backend(o);
    if (create->parsed())
    {
      json body = {
        {"grid", {{"dates", split_list(dates)}, {"start", start}, {"end", end},
                   {"granularity_minutes", granularity}}},
        {"roster", split_list(roster)},
      };
      if (!config_json.empty())
        body["config"] = json::parse(config_json);
      const auto r = expect_ok(backend->call("POST", "/polls", {}, body), "create poll");
      if (o.as_json)
        out << r.dump(2) << '\n';
      else
        out << "poll " << r["id"].get<std::string>() << '\n';
      return 0;
    }
    if (show->parsed())
    {
      const auto doc = expect_ok(backend->call("GET", "/polls/" + poll_id), "fetch poll");
      if (o.as_json)
      {
        out << doc.dump(2) << '\n';
        return 0;
      }
      const auto poll = poll_from_json(doc);
      const auto t = tally(poll);
      out << "poll " << poll.id << '\n';
      out << "grid " << poll.grid.date_count() << "x" << poll.grid.time_count()
          << " slots=" << poll.grid.size() << '\n';
      out << "respondents " << t.respondents << "/" << poll.group_size() << '\n';
      if (t.respondents > 0)
      {
        const bool maybe = poll.config.maybe_counts_as_available;
        out << "promising " << promising_times(t, maybe).size() << '\n';
        out << "possible " << possible_times(t, maybe).size() << '\n';
      }
      const auto& d = poll.decision_log.back();
      out << "decision score=" << d.score << " source=" << to_string(d.source) << '\n';
      if (poll.finalized)
        out << "finalized " << poll.grid.date_label(*poll.finalized) << ' '
            << poll.grid.time_label(*poll.finalized) << '\n';
      return 0;
    }
    if (sim->parsed())
    {
      const auto summary = simulate(*backend, poll_id, n, parse_profile(o.profile), o.seed);
      if (o.as_json)
        out << summary_to_json(summary).dump(2) << '\n';
      else
        print_summary(out, summary);
      return 0;
    }
    if (rec->parsed())
    {
      const auto doc = expect_ok(backend->call("GET",
        "/polls/" + poll_id + "/recommendations", {{"k", std::to_string(k)}}),
        "recommendations");
      if (o.as_json)
      {
        out << doc.dump(2) << '\n';
        return 0;
      }
      auto print_lists = [&](const json& lists, const std::string& tag) {
        for (const auto& r : lists)
        {
          out << tag << r["algorithm"]["label"].get<std::string>();
          if (!r["relaxed_away"].empty())
            out << " relaxed_away=" << r["relaxed_away"].dump();
          out << '\n';
          int rank = 1;
          for (const auto& s : r["ranked"])
            out << "  " << rank++ << ". " << s["date"].get<std::string>() << ' '
                << s["time"].get<std::string>() << " score=" << s["score"].get<double>()
                << " must=" << s["must_score"].get<double>() << '\n';
        }
      };
      print_lists(doc["recommendations"], "");
      if (doc.contains("relaxed"))
        print_lists(doc["relaxed"], "relaxed ");
      return 0;
    }
    if (view->parsed())
    {
      std::map<std::string, std::string> q;
      if (!attendee.empty())
        q["attendee"] = attendee;
      if (expand)
        q["expand"] = "true";
      const auto doc = expect_ok(backend->call("GET", "/polls/" + poll_id + "/view", q),
        "view");
      if (o.as_json)
      {
        out << doc.dump(2) << '\n';
        return 0;
      }
      out << "format " << doc["plan"]["format"].get<std::string>() << " score="
          << doc["plan"]["score"].get<int>() << " source="
          << doc["source"].get<std::string>() << " options="
          << doc["plan"]["included"].size() << '\n';
      out << "reason " << doc["plan"]["reason"].get<std::string>() << '\n';
      return 0;
    }
  }
  catch (const std::exception& e)
  {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

} // namespace groupsched::cli

#endif // GROUPSCHED__CLI_HPP
