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

#include <groupsched/cli.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace groupsched {
namespace {

namespace fs = std::filesystem;

struct TempDir
{
  TempDir()
  {
    std::random_device rd;
    path = fs::temp_directory_path() / ("groupsched-cli-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path path;
};

struct Run
{
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "schedcli");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string create_poll(const fs::path& store, const std::string& roster,
  const std::string& dates = "2024-05-06,2024-05-07,2024-05-08,2024-05-09")
{
  const auto r = run_cli({"--store", store.string(), "poll", "create", "--dates", dates,
    "--start", "09:00", "--end", "21:00", "--roster", roster});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("poll ", 0), 0u);
  return r.out.substr(5, r.out.size() - 6);
}

const char* ten = "p1,p2,p3,p4,p5,p6,p7,p8,p9,p10";

TEST(Cli, FirstSimulatedAttendeeSeesFullCalendar)
{
  TempDir dir;
  const auto id = create_poll(dir.path, ten);
  const auto r = run_cli({"--store", dir.path.string(), "simulate", id, "-n", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("attendee p1 saw full_calendar score=4 source=fallback options=96", 0), 0u)
    << r.out;
  EXPECT_NE(r.out.find("summary respondents=1"), std::string::npos);
}

TEST(Cli, SimulationIsSeedDeterministic)
{
  auto once = [](std::uint64_t seed) {
    TempDir dir;
    const auto id = create_poll(dir.path, ten);
    const auto r = run_cli({"--store", dir.path.string(), "--json", "simulate", id,
      "-n", "10", "--seed", std::to_string(seed)});
    EXPECT_EQ(r.code, 0) << r.err;
    auto doc = json::parse(r.out);
    doc.erase("poll");
    return doc;
  };
  const auto a = once(42), b = once(42), c = once(43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a["steps"].size(), 10u);
  EXPECT_EQ(a["formats"][0], "full_calendar");
}

TEST(Cli, MarksArePureFunctionsOfTheSeed)
{
  const auto g = SlotGrid::from_range(test::weekdays(4), 9 * 60, 21 * 60, 30);
  const auto profile = parse_profile("mixed");
  for (std::uint64_t seed = 0; seed < 20; ++seed)
  {
    const auto a = draw_attendee(profile, seed, 3);
    const auto b = draw_attendee(profile, seed, 3);
    EXPECT_EQ(simulate_marks(a, g), simulate_marks(b, g));
    EXPECT_TRUE(a.busyness == 5 || a.busyness == 10);
  }
  EXPECT_EQ(parse_profile("busy").busyness, 10);
  EXPECT_THROW(parse_profile("sleepy"), std::invalid_argument);
}

// Feasibility per seed: the simulated run reports a common slot exactly when
// a brute-force scan of the generated marks finds one.
TEST(Cli, SixAttendeeFeasibilityOverTwoHundredSeeds)
{
  TempDir dir;
  cli::LocalBackend backend(dir.path.string());
  const auto profile = parse_profile("mixed");
  const auto grid = SlotGrid::from_range(test::weekdays(4), 9 * 60, 21 * 60, 30);
  int feasible_runs = 0, oracle_feasible = 0, nonempty_promising = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed)
  {
    const auto created = cli::expect_ok(backend.call("POST", "/polls", {},
      {{"grid", grid_to_json(grid)}, {"roster", {"a", "b", "c", "d", "e", "f"}}}), "create");
    const auto summary = cli::simulate(backend, created["id"].get<std::string>(), 6,
      profile, seed);
    nonempty_promising += summary.final_promising >= 1;
    feasible_runs += summary.common_slots > 0;

    std::vector<std::map<SlotId, Preference>> marks;
    for (std::size_t i = 0; i < 6; ++i)
      marks.push_back(simulate_marks(draw_attendee(profile, seed, i), grid));
    bool any = false;
    for (SlotId s = 0; s < grid.size() && !any; ++s)
    {
      bool all = true;
      for (const auto& m : marks)
        all = all && m.count(s) && m.at(s) != Preference::Unavailable;
      any = all;
    }
    oracle_feasible += any;
    ASSERT_EQ(summary.common_slots > 0, any) << "seed " << seed;
  }
  EXPECT_EQ(nonempty_promising, 200);
  EXPECT_EQ(feasible_runs, oracle_feasible);
  std::cout << "feasible runs: " << feasible_runs << "/200\n";
}

TEST(Cli, ScoreOffline)
{
  TempDir dir;
  const auto row3 = dir.path / "row3.json";
  std::ofstream(row3) << poll_to_json(test::state_half_many()).dump();
  auto r = run_cli({"score", row3.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\nscore: 3\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("source: fallback"), std::string::npos);
  EXPECT_NE(r.out.find("Participant 3"), std::string::npos);

  const auto empty = dir.path / "empty.json";
  std::ofstream(empty) << poll_to_json(test::empty_poll(test::make_grid(4, 12), 10)).dump();
  r = run_cli({"--json", "score", empty.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["score"], 4);

  const auto junk = dir.path / "junk.json";
  std::ofstream(junk) << "not a poll";
  r = run_cli({"score", junk.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

// A fixture that replays the rule policy's own answer scores every poll the
// same as a disabled endpoint.
TEST(Cli, FixtureReplayMatchesFallback)
{
  TempDir dir;
  std::mt19937_64 rng(71);
  json replies = json::object();
  std::vector<PollState> polls;
  for (int i = 0; i < 30; ++i)
  {
    auto p = test::random_poll(rng);
    p.id = "p" + std::to_string(i);
    const auto rule = rule_score(p, p.config);
    replies[sha256_hex(build_prompt(p).render())] =
      "Score: " + std::to_string(rule.score) + "\nReason: " + rule.reason;
    polls.push_back(p);
  }
  const auto fixture = dir.path / "fixture.json";
  std::ofstream(fixture) << json{{"replies", replies}}.dump();
  for (const auto& p : polls)
  {
    const auto file = dir.path / (p.id + ".json");
    std::ofstream(file) << poll_to_json(p).dump();
    const auto live = run_cli({"--json", "score", file.string()});
    const auto replay = run_cli({"--json", "score", file.string(), "--fixture",
      fixture.string()});
    ASSERT_EQ(live.code, 0) << live.err;
    ASSERT_EQ(replay.code, 0) << replay.err;
    const auto a = json::parse(live.out), b = json::parse(replay.out);
    EXPECT_EQ(a["source"], "fallback");
    EXPECT_EQ(b["source"], "llm");
    EXPECT_EQ(a["score"], b["score"]);
    EXPECT_EQ(a["prompt_sha256"], b["prompt_sha256"]);
  }
}

TEST(Cli, ShowViewRecommend)
{
  TempDir dir;
  const auto id = create_poll(dir.path, "a,b,c");
  ASSERT_EQ(run_cli({"--store", dir.path.string(), "simulate", id, "-n", "3",
    "--seed", "5"}).code, 0);

  auto r = run_cli({"--store", dir.path.string(), "poll", "show", id});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("grid 4x24 slots=96"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("respondents 3/3"), std::string::npos);

  r = run_cli({"--store", dir.path.string(), "view", id, "--attendee", "a"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("format ", 0), 0u);

  r = run_cli({"--store", dir.path.string(), "recommend", id, "-k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("high-maybe/important-first"), std::string::npos);
  EXPECT_NE(r.out.find("low-maybe/overall-attendance"), std::string::npos);
  EXPECT_NE(r.out.find("  2. "), std::string::npos);
  EXPECT_EQ(r.out.find("  3. "), std::string::npos);
}

TEST(Cli, Errors)
{
  TempDir dir;
  EXPECT_NE(run_cli({}).code, 0);
  auto r = run_cli({"--store", dir.path.string(), "poll", "show", "missing"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("404"), std::string::npos);
  r = run_cli({"--store", dir.path.string(), "poll", "create", "--dates", "",
    "--roster", "a"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("400"), std::string::npos);
}

TEST(Cli, BinaryRunsStandalone)
{
  TempDir dir;
  const auto file = dir.path / "row1.json";
  std::ofstream(file) << poll_to_json(test::state_full_match()).dump();
  const std::string cmd = std::string(SCHEDCLI_PATH) + " --json score " + file.string()
    + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string out;
  char buf[4096];
  while (auto n = std::fread(buf, 1, sizeof(buf), pipe))
    out.append(buf, n);
  EXPECT_EQ(::pclose(pipe), 0);
  EXPECT_EQ(json::parse(out)["score"], 1);
}

} // namespace
} // namespace groupsched
