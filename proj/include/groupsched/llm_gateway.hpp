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

#ifndef GROUPSCHED__LLM_GATEWAY_HPP
#define GROUPSCHED__LLM_GATEWAY_HPP

#include <groupsched/adaptive_engine.hpp>
#include <groupsched/prompt.hpp>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace groupsched {

/// Library diagnostics go to stderr so stdout stays machine-readable.
inline spdlog::logger& log()
{
  static const auto logger = [] {
    auto existing = spdlog::get("groupsched");
    return existing ? existing : spdlog::stderr_color_mt("groupsched");
  }();
  return *logger;
}

inline std::string sha256_hex(std::string_view data)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i)
  {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

struct CompletionRequest
{
  std::string model;
  double temperature = 0.1;
  std::string prompt;
};

/// Either the assistant's text or a transport-level error description.
struct CompletionResult
{
  std::optional<std::string> text;
  std::string error;
};

class CompletionEndpoint
{
public:
  virtual ~CompletionEndpoint() = default;
  virtual CompletionResult complete(const CompletionRequest& request,
    std::chrono::milliseconds timeout) = 0;
};

/// Any chat-completions compatible HTTP(S) service.
class HttpChatEndpoint : public CompletionEndpoint
{
public:
  /// `base_url` such as "https://api.openai.com/v1"; requests go to
  /// base_url + "/chat/completions".
  HttpChatEndpoint(std::string base_url, std::string api_key)
  : _api_key(std::move(api_key))
  {
    const auto scheme = base_url.find("://");
    const auto slash = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    _origin = base_url.substr(0, slash);
    _path = slash == std::string::npos ? "" : base_url.substr(slash);
    while (!_path.empty() && _path.back() == '/')
      _path.pop_back();
    _path += "/chat/completions";
  }

  CompletionResult complete(const CompletionRequest& request,
    std::chrono::milliseconds timeout) override
  {
    httplib::Client client(_origin);
    const auto sec = timeout.count() / 1000;
    const auto usec = (timeout.count() % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    if (!_api_key.empty())
      client.set_bearer_token_auth(_api_key);

    const nlohmann::json body = {
      {"model", request.model},
      {"temperature", request.temperature},
      {"messages", nlohmann::json::array({
        {{"role", "user"}, {"content", request.prompt}}})},
    };
    auto res = client.Post(_path, body.dump(), "application/json");
    if (!res)
      return {std::nullopt, "transport: " + httplib::to_string(res.error())};
    if (res->status != 200)
      return {std::nullopt, "http status " + std::to_string(res->status)};
    const auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded())
      return {std::nullopt, "reply is not JSON"};
    try
    {
      return {reply.at("choices").at(0).at("message").at("content")
                .get<std::string>(), {}};
    }
    catch (const nlohmann::json::exception& e)
    {
      return {std::nullopt, std::string("unexpected reply shape: ") + e.what()};
    }
  }

private:
  std::string _origin;
  std::string _path;
  std::string _api_key;
};

/// Replays recorded replies keyed by the SHA-256 of the prompt. A "*" entry
/// answers any prompt without its own recording.
///
/// File layout: {"replies": {"<sha256 hex>": "<raw reply>", "*": "..."}}
class FixtureEndpoint : public CompletionEndpoint
{
public:
  explicit FixtureEndpoint(std::map<std::string, std::string> replies)
  : _replies(std::move(replies))
  {
  }

  static FixtureEndpoint load(const std::string& path)
  {
    std::ifstream in(path);
    if (!in)
      throw std::runtime_error("cannot open fixture file " + path);
    const auto doc = nlohmann::json::parse(in);
    return FixtureEndpoint(
      doc.at("replies").get<std::map<std::string, std::string>>());
  }

  CompletionResult complete(const CompletionRequest& request,
    std::chrono::milliseconds) override
  {
    auto it = _replies.find(sha256_hex(request.prompt));
    if (it == _replies.end())
      it = _replies.find("*");
    if (it == _replies.end())
      return {std::nullopt, "fixture has no reply for this prompt"};
    return {it->second, {}};
  }

private:
  std::map<std::string, std::string> _replies;
};

struct GatewayOptions
{
  std::string model = "gpt-4-turbo-2024-04-09";
  /// Total budget for one scoring, retries included.
  std::chrono::milliseconds timeout{10000};
  int max_attempts = 2;
};

inline ScoreDecision fallback_decision(const PollState& poll, std::string why,
  std::string raw = {})
{
  const auto rule = rule_score(poll, poll.config);
  ScoreDecision d;
  d.score = rule.score;
  d.reason = rule.reason;
  if (!why.empty())
    d.reason += " [fallback: " + why + "]";
  d.source = DecisionSource::Fallback;
  d.raw_reply = std::move(raw);
  d.respondent_count = poll.respondent_count();
  d.decided_at = now_utc();
  return d;
}

/// Asks the endpoint for a 1-4 score; any failure yields the rule policy's
/// decision with source = Fallback. Never throws on endpoint misbehavior.
/// A null endpoint means scoring is disabled.
inline ScoreDecision score_with_llm(const PollState& poll,
  CompletionEndpoint* endpoint, const GatewayOptions& options = {})
{
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  };
  if (endpoint == nullptr)
    return fallback_decision(poll, {});

  const CompletionRequest request{
    options.model, poll.config.temperature, build_prompt(poll).render()};
  std::string last_error;
  std::string last_raw;
  for (int attempt = 0; attempt < std::max(1, options.max_attempts); ++attempt)
  {
    const auto remaining = options.timeout - elapsed();
    if (remaining <= std::chrono::milliseconds(0))
    {
      last_error = "timeout";
      break;
    }
    CompletionResult result;
    try
    {
      result = endpoint->complete(request, remaining);
    }
    catch (const std::exception& e)
    {
      result.error = e.what();
    }
    if (!result.text)
    {
      last_error = result.error;
      log().warn("poll {}: scoring attempt {} failed: {}", poll.id, attempt + 1,
        result.error);
      continue;
    }
    last_raw = *result.text;
    const auto parsed = parse_reply(last_raw);
    if (const auto* ok = std::get_if<ParsedReply>(&parsed))
    {
      ScoreDecision d;
      d.score = ok->score;
      d.reason = ok->reason;
      d.source = DecisionSource::Llm;
      d.raw_reply = last_raw;
      d.latency = elapsed();
      d.respondent_count = poll.respondent_count();
      d.decided_at = now_utc();
      return d;
    }
    last_error = std::string("unparsable reply (")
      + std::string(to_string(std::get<ReplyDefect>(parsed))) + ")";
    log().warn("poll {}: scoring attempt {} failed: {}", poll.id, attempt + 1,
      last_error);
  }
  auto d = fallback_decision(poll, last_error, std::move(last_raw));
  d.latency = elapsed();
  return d;
}

/// Scores voting states, caching by (poll id, prompt hash) so an unchanged
/// state is scored once even under concurrent requests.
class LlmGateway
{
public:
  explicit LlmGateway(std::shared_ptr<CompletionEndpoint> endpoint = nullptr,
    GatewayOptions options = {})
  : _endpoint(std::move(endpoint)),
    _options(std::move(options))
  {
  }

  bool enabled() const { return _endpoint != nullptr; }
  const GatewayOptions& options() const { return _options; }

  ScoreDecision score(const PollState& poll)
  {
    if (!_endpoint)
      return score_with_llm(poll, nullptr, _options);

    const std::string key = poll.id + ':' + sha256_hex(build_prompt(poll).render());
    std::promise<ScoreDecision> promise;
    std::shared_future<ScoreDecision> future;
    bool owner = false;
    {
      std::lock_guard lock(_mutex);
      auto it = _cache.find(key);
      if (it == _cache.end())
      {
        future = promise.get_future().share();
        _cache.emplace(key, future);
        owner = true;
      }
      else
        future = it->second;
    }
    if (owner)
    {
      auto decision = score_with_llm(poll, _endpoint.get(), _options);
      // Fallbacks are not cached so a recovered endpoint gets another chance.
      if (decision.source == DecisionSource::Fallback)
      {
        std::lock_guard lock(_mutex);
        _cache.erase(key);
      }
      promise.set_value(decision);
      return decision;
    }
    return future.get();
  }

  std::size_t cache_size() const
  {
    std::lock_guard lock(_mutex);
    return _cache.size();
  }

private:
  std::shared_ptr<CompletionEndpoint> _endpoint;
  GatewayOptions _options;
  mutable std::mutex _mutex;
  std::map<std::string, std::shared_future<ScoreDecision>> _cache;
};

inline std::optional<std::string> env(const char* name)
{
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0')
    return std::nullopt;
  return std::string(v);
}

/// SCHED_LLM_FIXTURE selects replay mode; otherwise SCHED_LLM_BASE_URL (with
/// SCHED_LLM_API_KEY) selects a live endpoint; neither disables scoring.
inline LlmGateway gateway_from_env()
{
  GatewayOptions options;
  if (auto model = env("SCHED_LLM_MODEL"))
    options.model = *model;
  if (auto t = env("SCHED_LLM_TIMEOUT_MS"))
    options.timeout = std::chrono::milliseconds(std::stol(*t));

  std::shared_ptr<CompletionEndpoint> endpoint;
  if (auto fixture = env("SCHED_LLM_FIXTURE"))
    endpoint = std::make_shared<FixtureEndpoint>(FixtureEndpoint::load(*fixture));
  else if (auto base = env("SCHED_LLM_BASE_URL"))
    endpoint = std::make_shared<HttpChatEndpoint>(*base,
      env("SCHED_LLM_API_KEY").value_or(""));
  return LlmGateway(std::move(endpoint), options);
}

} // namespace groupsched

#endif // GROUPSCHED__LLM_GATEWAY_HPP
