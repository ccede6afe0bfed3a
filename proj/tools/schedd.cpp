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

// schedd: the scheduling HTTP service.
//
// Environment: SCHED_STORAGE_PATH, SCHED_LISTEN (host:port, port 0 picks a
// free one), SCHED_LLM_BASE_URL, SCHED_LLM_API_KEY, SCHED_LLM_MODEL,
// SCHED_LLM_TIMEOUT_MS, SCHED_LLM_FIXTURE.

#include <groupsched/api.hpp>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>
#include <string>

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int)
{
  if (g_server)
    g_server->stop();
}

} // namespace

int main(int argc, char** argv)
{
  using namespace groupsched;

  CLI::App app{"Adaptive group-scheduling service"};
  std::string store = env("SCHED_STORAGE_PATH").value_or("polls");
  std::string listen = env("SCHED_LISTEN").value_or("127.0.0.1:8080");
  app.add_option("--store", store, "poll directory");
  app.add_option("--listen", listen, "host:port");
  CLI11_PARSE(app, argc, argv);

  const auto colon = listen.rfind(':');
  if (colon == std::string::npos)
  {
    std::cerr << "--listen must be host:port\n";
    return 2;
  }
  const std::string host = listen.substr(0, colon);
  const int port = std::stoi(listen.substr(colon + 1));

  LlmGateway gateway = gateway_from_env();
  SchedulingService service(PollStore(store), gateway);
  ApiRouter router(service);

  httplib::Server server;
  mount(server, router);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  const int bound = port == 0 ? server.bind_to_any_port(host) : port;
  if (port != 0 && !server.bind_to_port(host, port))
  {
    std::cerr << "cannot bind " << listen << '\n';
    return 1;
  }
  if (bound < 0)
  {
    std::cerr << "cannot bind " << listen << '\n';
    return 1;
  }
  log().info("scoring endpoint {}", gateway.enabled() ? "enabled" : "disabled");
  std::cout << "listening on " << host << ':' << bound << std::endl;
  server.listen_after_bind();
  return 0;
}
