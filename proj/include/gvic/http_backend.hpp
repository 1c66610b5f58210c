#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gvic/agents.hpp"
#include "gvic/errors.hpp"

namespace gvic {

/// Chat-completion endpoint settings. The API key is read from the named
/// environment variable at call time, never stored in config files.
struct BackendConfig {
  std::string base_url = "http://localhost:8080/v1";
  std::string model = "debate-agent";
  std::string api_key_env = "GVIC_API_KEY";
  double temperature = 0.7;
  int max_tokens = 512;
  int max_retries = 3;          // attempts, not extra retries
  int backoff_initial_ms = 500;
  int deadline_ms = 60000;      // per HTTP call
};

namespace detail {
struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path_prefix;
};

inline ParsedUrl parse_http_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0)
    throw InvalidConfigError(
        "backend base_url must start with http:// (TLS termination belongs "
        "in a proxy): " + url);
  std::string rest = url.substr(scheme.size());
  ParsedUrl out;
  auto slash = rest.find('/');
  std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
  out.path_prefix = slash == std::string::npos ? "" : rest.substr(slash);
  if (!out.path_prefix.empty() && out.path_prefix.back() == '/')
    out.path_prefix.pop_back();
  auto colon = hostport.find(':');
  if (colon == std::string::npos) {
    out.host = hostport;
  } else {
    out.host = hostport.substr(0, colon);
    out.port = std::atoi(hostport.c_str() + colon + 1);
  }
  if (out.host.empty() || out.port <= 0)
    throw InvalidConfigError("cannot parse backend base_url: " + url);
  return out;
}
}  // namespace detail

/// Chat-completion client with bounded retries and exponential backoff.
/// Retryable: timeouts, connection errors, 408/429/5xx. Non-retryable:
/// auth rejections and malformed replies. Every call resolves to a response
/// or an AgentFailedError within the configured attempt budget.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendConfig config)
      : cfg_(std::move(config)), url_(detail::parse_http_url(cfg_.base_url)) {}

  std::string id() const override { return "http:" + cfg_.model; }

  AgentResponse generate(const GenerationRequest& req) override {
    using Kind = AgentFailedError::Kind;
    std::string last_error;
    Kind last_kind = Kind::Other;
    for (int attempt = 0; attempt < cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(
            cfg_.backoff_initial_ms * (1 << (attempt - 1))));
      }
      auto started = std::chrono::steady_clock::now();
      httplib::Client cli(url_.host, url_.port);
      cli.set_connection_timeout(std::chrono::milliseconds(cfg_.deadline_ms));
      cli.set_read_timeout(std::chrono::milliseconds(cfg_.deadline_ms));
      cli.set_write_timeout(std::chrono::milliseconds(cfg_.deadline_ms));

      nlohmann::json body{
          {"model", cfg_.model},
          {"messages",
           {{{"role", "system"}, {"content", req.system_prompt}},
            {{"role", "user"}, {"content", format_user_message(req)}}}},
          {"temperature", cfg_.temperature},
          {"max_tokens", cfg_.max_tokens}};

      httplib::Headers headers;
      if (const char* key = std::getenv(cfg_.api_key_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);

      auto res = cli.Post(url_.path_prefix + "/chat/completions", headers,
                          body.dump(), "application/json");
      auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - started)
                         .count();
      if (!res) {
        last_kind = Kind::Timeout;
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;  // retryable
      }
      if (res->status == 401 || res->status == 403) {
        throw AgentFailedError(Kind::Rejected,
                               "backend rejected the request (HTTP " +
                                   std::to_string(res->status) + ")");
      }
      if (res->status == 408 || res->status == 429 || res->status >= 500) {
        last_kind = Kind::Timeout;
        last_error = "HTTP " + std::to_string(res->status);
        continue;  // retryable
      }
      if (res->status != 200) {
        throw AgentFailedError(Kind::Rejected,
                               "unexpected HTTP status " +
                                   std::to_string(res->status));
      }
      std::string content;
      try {
        auto reply = nlohmann::json::parse(res->body);
        content = reply.at("choices").at(0).at("message").at("content")
                      .get<std::string>();
      } catch (const std::exception& e) {
        throw AgentFailedError(Kind::MalformedReply,
                               std::string("malformed backend reply: ") +
                                   e.what());
      }
      if (content.empty())
        throw AgentFailedError(Kind::MalformedReply,
                               "backend reply has empty content");
      AgentResponse out;
      out.text = std::move(content);
      out.agent_index = req.agent_index;
      out.round_index = req.round_index;
      out.latency_ms = elapsed;
      out.backend_id = id();
      return out;
    }
    throw AgentFailedError(last_kind, "backend failed after " +
                                          std::to_string(cfg_.max_retries) +
                                          " attempts: " + last_error);
  }

 private:
  BackendConfig cfg_;
  detail::ParsedUrl url_;
};

}  // namespace gvic
