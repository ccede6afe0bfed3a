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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// line fails. Tolerances are fixed below.

#include <groupsched/api.hpp>
#include <groupsched/recommendation.hpp>
#include <groupsched/service.hpp>

#include "stub_server.hpp"
#include "test_support.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

namespace {

using namespace groupsched;
using namespace std::chrono_literals;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr auto table_budget = 1s;
constexpr auto oracle_budget = 60s;
constexpr int random_polls = 1000;
constexpr int mutation_pairs = 1000;
constexpr auto gateway_timeout = 1000ms;
constexpr auto request_slack = 1s;
constexpr std::uint64_t suite_seed = 20240506;

struct Outcome
{
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o)
{
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
  failures += !o.pass;
}

void run(const std::string& name, const std::function<Outcome()>& body)
{
  try
  {
    report(name, body());
  }
  catch (const std::exception& e)
  {
    report(name, {false, std::string("exception: ") + e.what()});
  }
}

double seconds(Clock::duration d)
{
  return std::chrono::duration<double>(d).count();
}

bool subset(const SlotSet& a, const SlotSet& b)
{
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

test::RandomPollOptions acceptance_polls()
{
  test::RandomPollOptions o;
  o.max_attendees = 10;
  o.max_dates = 4;
  o.max_times = 24;  // at most 96 slots
  return o;
}

// ---------------------------------------------------------------------------

Outcome documented_states()
{
  const auto start = Clock::now();
  LlmGateway disabled;
  struct Row
  {
    PollState poll;
    std::size_t group, promising, possible;
    double rate;
    int want;
  };
  const std::vector<Row> rows = {
    {test::state_full_match(), 10, 1, 1, 1.0, 1},
    {test::state_half_few(), 10, 3, 5, 0.5, 2},
    {test::state_half_many(), 6, 34, 95, 0.5, 3},
    {test::state_first_response(), 10, 48, 48, 0.1, 4},
  };
  std::ostringstream got;
  bool ok = true;
  for (const auto& r : rows)
  {
    const auto s = summarize(r.poll, r.poll.config);
    const bool inputs = s.group_size == r.group && s.promising == r.promising
      && s.possible == r.possible && s.response_rate() == r.rate;
    const auto d = disabled.score(r.poll);
    ok = ok && inputs && d.score == r.want && d.source == DecisionSource::Fallback;
    got << (got.tellp() ? "," : "") << d.score << (inputs ? "" : "(bad inputs)");
  }
  const auto took = Clock::now() - start;
  ok = ok && took < table_budget;
  return {ok, "scores " + got.str() + " (want 1,2,3,4) in " + std::to_string(seconds(took))
    + " s (limit 1 s)"};
}

Outcome oracle_equivalence()
{
  const auto start = Clock::now();
  std::mt19937_64 rng(suite_seed);
  std::size_t mismatches = 0, checked = 0;
  for (int i = 0; i < random_polls; ++i)
  {
    const auto p = test::random_poll(rng, acceptance_polls());
    const auto t = tally(p);
    if (t.respondents == 0)
      continue;
    ++checked;
    for (bool maybe : {true, false})
    {
      mismatches += promising_times(t, maybe) != test::oracle_promising(p, maybe);
      mismatches += possible_times(t, maybe) != test::oracle_possible(p, maybe);
      mismatches += good_times(t, 0.65, maybe) != test::oracle_good(p, 65, maybe);
    }
    for (const auto& spec : canonical_algorithms(p.config))
    {
      const auto r = recommend_one(p, spec, p.grid.size());
      std::vector<SlotId> ranked;
      for (const auto& x : r.ranked)
        ranked.push_back(x.slot);
      mismatches += ranked != test::oracle_ranking(p, spec.maybe_weight,
        spec.mode == PriorityMode::ImportantFirst);
    }
  }
  const auto took = Clock::now() - start;
  return {mismatches == 0 && took < oracle_budget,
    std::to_string(mismatches) + " mismatches over " + std::to_string(checked)
      + " polls with responses (of " + std::to_string(random_polls) + "), "
      + std::to_string(seconds(took)) + " s (limit 60 s)"};
}

Outcome pruning_safety()
{
  std::mt19937_64 rng(suite_seed + 1);
  std::size_t violations = 0, pruned = 0;
  for (int i = 0; i < random_polls; ++i)
  {
    const auto p = test::random_poll(rng, acceptance_polls());
    const auto o = omit_rows_cols(p, p.config);
    if (o.empty())
      continue;
    ++pruned;
    std::vector<bool> row_gone(p.grid.date_count()), col_gone(p.grid.time_count());
    for (auto r : o.rows) row_gone[r] = true;
    for (auto c : o.columns) col_gone[c] = true;
    for (auto s : test::oracle_promising(p, p.config.maybe_counts_as_available))
      violations += row_gone[p.grid.date_of(s)] || col_gone[p.grid.time_of(s)];
    auto boundary_contiguous = [](const std::vector<bool>& gone) {
      std::size_t bad = 0;
      for (std::size_t i = 0; i < gone.size(); ++i)
      {
        if (!gone[i])
          continue;
        const bool front = std::all_of(gone.begin(), gone.begin() + static_cast<long>(i),
          [](bool b) { return b; });
        const bool back = std::all_of(gone.begin() + static_cast<long>(i) + 1, gone.end(),
          [](bool b) { return b; });
        bad += !(front || back);
      }
      return bad;
    };
    violations += boundary_contiguous(row_gone) + boundary_contiguous(col_gone);
  }
  return {violations == 0 && pruned > 0,
    std::to_string(violations) + " violations; " + std::to_string(pruned) + " of "
      + std::to_string(random_polls) + " polls had omissions"};
}

Outcome view_nesting()
{
  std::mt19937_64 rng(suite_seed + 2);
  std::size_t violations = 0;
  for (int i = 0; i < random_polls; ++i)
  {
    const auto p = test::random_poll(rng, acceptance_polls());
    const auto s1 = plan_view(p, 1, p.config).included;
    const auto s2 = plan_view(p, 2, p.config).included;
    const auto s3 = plan_view(p, 3, p.config).included;
    const auto s4 = plan_view(p, 4, p.config).included;
    violations += !subset(s1, s2) + !subset(s2, s4) + !subset(s3, s4);
  }
  return {violations == 0, std::to_string(violations) + " violations of "
    "slots(1) <= slots(2) <= slots(4) and slots(3) <= slots(4) over "
    + std::to_string(random_polls) + " polls"};
}

struct TempDir
{
  TempDir()
  {
    path = fs::temp_directory_path()
      / ("groupsched-accept-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path path;
  static inline int counter = 0;
};

Outcome fallback_totality()
{
  struct Case
  {
    std::string name;
    std::function<std::shared_ptr<CompletionEndpoint>()> endpoint;
  };
  test::StubServer error(test::StubServer::Mode::Error);
  test::StubServer hang(test::StubServer::Mode::Hang);
  test::StubServer envelope(test::StubServer::Mode::BadEnvelope);
  test::StubServer prose(test::StubServer::Mode::Valid, "I would show them a calendar.");
  const std::vector<Case> cases = {
    {"http-500", [&] { return std::make_shared<HttpChatEndpoint>(error.base_url(), ""); }},
    {"hang", [&] { return std::make_shared<HttpChatEndpoint>(hang.base_url(), ""); }},
    {"bad-envelope", [&] { return std::make_shared<HttpChatEndpoint>(envelope.base_url(), ""); }},
    {"unparsable-reply", [&] { return std::make_shared<HttpChatEndpoint>(prose.base_url(), ""); }},
    {"fixture-malformed", [] {
       return std::make_shared<FixtureEndpoint>(std::map<std::string, std::string>{
         {"*", "Score: 9\nReason: off the scale"}});
     }},
  };

  std::size_t views = 0, good = 0;
  Clock::duration worst{};
  std::mt19937_64 rng(suite_seed + 3);
  for (const auto& c : cases)
  {
    TempDir dir;
    GatewayOptions options;
    options.timeout = gateway_timeout;
    LlmGateway gateway(c.endpoint(), options);
    SchedulingService service(PollStore(dir.path), gateway);
    ApiRouter router(service);
    auto timed = [&](const ApiRequest& req) {
      const auto t0 = Clock::now();
      auto res = router.handle(req);
      worst = std::max(worst, Clock::now() - t0);
      return res;
    };
    const json body = {
      {"grid", {{"dates", test::weekdays(4)}, {"start", "09:00"}, {"end", "21:00"}}},
      {"roster", {"a", "b", "c", "d", "e", "f"}},
    };
    const auto created = timed({"POST", "/polls", {}, body.dump()});
    if (created.status != 201)
      return {false, c.name + ": create returned " + std::to_string(created.status)};
    const auto id = created.body["id"].get<std::string>();
    const auto grid = service.get_poll(id).grid;
    for (int i = 0; i < 4; ++i)
    {
      std::map<SlotId, Preference> marks;
      for (SlotId s = 0; s < grid.size(); ++s)
        if (rng() % 3 == 0)
          marks[s] = rng() % 4 ? Preference::AvailableSure : Preference::MaybeAvailable;
      Response r;
      r.marks = marks;
      const json submit = {{"attendee", std::string(1, static_cast<char>('a' + i))},
        {"marks", marks_to_json(grid, r)}};
      timed({"POST", "/polls/" + id + "/responses", {}, submit.dump()});
      for (const char* who : {"a", "e"})
      {
        const auto v = timed({"GET", "/polls/" + id + "/view", {{"attendee", who}}, ""});
        ++views;
        const bool valid = v.status == 200 && v.body["source"] == "fallback"
          && parse_view_format(v.body["plan"]["format"].get<std::string>())
          && !v.body["plan"]["included"].empty()
          && valid_score(v.body["plan"]["score"].get<int>());
        good += valid;
      }
    }
  }
  const bool within = worst < gateway_timeout + request_slack;
  return {good == views && within,
    std::to_string(good) + "/" + std::to_string(views)
      + " views valid with source=fallback across 5 failure modes; slowest request "
      + std::to_string(seconds(worst)) + " s (limit "
      + std::to_string(seconds(gateway_timeout + request_slack)) + " s)"};
}

Outcome recommendation_invariants()
{
  std::mt19937_64 rng(suite_seed + 4);
  std::size_t pairs = 0, monotone_bad = 0, exclusion_bad = 0;
  auto rank_of = [](const Recommendation& r, SlotId s) {
    for (std::size_t i = 0; i < r.ranked.size(); ++i)
      if (r.ranked[i].slot == s)
        return i;
    return r.ranked.size();
  };
  while (pairs < static_cast<std::size_t>(mutation_pairs))
  {
    auto p = test::random_poll(rng, acceptance_polls());
    if (p.respondent_count() < 2)
      continue;
    ++pairs;

    // Upgrade one mark one level.
    auto it = p.responses.begin();
    std::advance(it, static_cast<long>(rng() % p.responses.size()));
    const auto who = it->first;
    const SlotId s = rng() % p.grid.size();
    auto up = p;
    const auto level = p.responses[who].at(s);
    up.responses[who].marks[s] = level == Preference::Unavailable
      ? Preference::MaybeAvailable : Preference::AvailableSure;
    for (const auto& spec : canonical_algorithms(p.config))
    {
      const auto before = recommend_one(p, spec, p.grid.size());
      const auto after = recommend_one(up, spec, p.grid.size());
      monotone_bad += rank_of(after, s) > rank_of(before, s);
    }

    // NotComing versus deleting the response.
    auto excluded = p;
    excluded.priorities[who] = Priority::NotComing;
    auto deleted = p;
    deleted.responses.erase(who);
    deleted.priorities.erase(who);
    if (deleted.respondent_count() == 0)
      continue;
    const auto now = now_utc();
    exclusion_bad += recommend(excluded, p.grid.size(), now)
      != recommend(deleted, p.grid.size(), now);
  }
  return {monotone_bad == 0 && exclusion_bad == 0,
    std::to_string(monotone_bad) + " monotonicity and " + std::to_string(exclusion_bad)
      + " exclusion violations over " + std::to_string(pairs) + " mutation pairs"};
}

// ---------------------------------------------------------------------------
// Processes.

struct Daemon
{
  pid_t pid = -1;
  std::string address;

  static Daemon start(const fs::path& store)
  {
    int fds[2];
    if (::pipe(fds) != 0)
      throw std::runtime_error("pipe failed");
    const pid_t pid = ::fork();
    if (pid == 0)
    {
      ::dup2(fds[1], STDOUT_FILENO);
      ::close(fds[0]);
      ::close(fds[1]);
      ::unsetenv("SCHED_LLM_FIXTURE");
      ::unsetenv("SCHED_LLM_BASE_URL");
      ::execl(SCHEDD_PATH, SCHEDD_PATH, "--store", store.c_str(), "--listen",
        "127.0.0.1:0", static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(fds[1]);
    std::string line;
    char c;
    while (::read(fds[0], &c, 1) == 1 && c != '\n')
      line.push_back(c);
    ::close(fds[0]);
    const std::string prefix = "listening on ";
    if (line.rfind(prefix, 0) != 0)
    {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
      throw std::runtime_error("schedd did not start: '" + line + "'");
    }
    return {pid, "http://" + line.substr(prefix.size())};
  }

  void kill_hard()
  {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    pid = -1;
  }
};

std::pair<int, std::string> capture(const std::string& cmd)
{
  FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe)
    throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  while (auto n = std::fread(buf, 1, sizeof(buf), pipe))
    out.append(buf, n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

json fetch_poll(const std::string& address, const std::string& id)
{
  httplib::Client client(address);
  auto res = client.Get("/polls/" + id);
  if (!res || res->status != 200)
    throw std::runtime_error("GET /polls/" + id + " failed");
  return json::parse(res->body);
}

Outcome service_round_trip()
{
  TempDir dir;
  const auto store = dir.path / "polls";
  auto daemon = Daemon::start(store);
  struct Guard
  {
    Daemon& d;
    ~Guard() { if (d.pid > 0) d.kill_hard(); }
  } guard{daemon};

  const std::string cli = std::string(SCHEDCLI_PATH) + " --server " + daemon.address;
  auto [code, out] = capture(cli + " --json poll create"
    " --dates 2024-05-06,2024-05-07,2024-05-08,2024-05-09 --start 09:00 --end 21:00"
    " --roster p1,p2,p3,p4,p5,p6,p7,p8,p9,p10");
  if (code != 0)
    return {false, "poll create failed: " + out};
  const auto created = json::parse(out);
  const auto id = created["id"].get<std::string>();
  const auto slots = poll_from_json(created["poll"]).grid.size();

  std::tie(code, out) = capture(cli + " --json simulate " + id + " -n 10 --seed 1");
  if (code != 0)
    return {false, "simulate failed: " + out};
  const auto summary = json::parse(out);
  const auto& steps = summary["steps"];

  // Restrictiveness rises as the score falls. A step may loosen only when
  // the response before it enlarged the promising set.
  std::vector<std::string> formats;
  std::size_t unexplained = 0;
  std::string where;
  for (std::size_t i = 0; i < steps.size(); ++i)
  {
    formats.push_back(steps[i]["format"].get<std::string>() + "("
      + std::to_string(steps[i]["options"].get<int>()) + ")");
    if (i == 0)
      continue;
    const int prev = steps[i - 1]["score"].get<int>();
    const int cur = steps[i]["score"].get<int>();
    if (cur <= prev)
      continue;
    const std::size_t promising_before = i >= 2
      ? steps[i - 2]["promising_after"].get<std::size_t>() : 0;
    const std::size_t promising_now = steps[i - 1]["promising_after"].get<std::size_t>();
    if (!(promising_now > promising_before))
    {
      ++unexplained;
      where += " step " + std::to_string(i + 1) + " (" + std::to_string(prev) + "->"
        + std::to_string(cur) + ", promising " + std::to_string(promising_before) + "->"
        + std::to_string(promising_now) + ")";
    }
  }

  const auto before = fetch_poll(daemon.address, id);
  daemon.kill_hard();
  auto restarted = Daemon::start(store);
  daemon = restarted;
  const auto after = fetch_poll(daemon.address, id);
  const bool identical = before == after && poll_from_json(before) == poll_from_json(after);

  std::string seq;
  for (const auto& f : formats)
    seq += (seq.empty() ? "" : ",") + f;
  const bool ok = slots == 96 && steps.size() == 10 && unexplained == 0 && identical;
  return {ok, std::to_string(slots) + " slots; formats " + seq + "; "
    + std::to_string(unexplained) + " unexplained loosenings"
    + (where.empty() ? "" : " at" + where) + "; state after SIGKILL+restart "
    + (identical ? "identical" : "DIFFERS")};
}

} // namespace

int main()
{
  ::signal(SIGPIPE, SIG_IGN);
  groupsched::log().set_level(spdlog::level::err);
  run("documented-states", documented_states);
  run("oracle-equivalence", oracle_equivalence);
  run("pruning-safety", pruning_safety);
  run("view-nesting", view_nesting);
  run("fallback-totality", fallback_totality);
  run("recommendation-invariants", recommendation_invariants);
  run("service-round-trip", service_round_trip);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures)
    + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
