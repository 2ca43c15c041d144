#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "decoysim/rewards.hpp"

namespace decoysim {

struct ChatTurn {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
  bool operator==(const ChatTurn&) const = default;
};

struct DesignRequest {
  std::string persona_prompt;
  // (name, text): environment summary plus the baseline reward config.
  std::vector<std::pair<std::string, std::string>> context_documents;
  std::string model_endpoint;
  std::string model_name;
  std::string auth_token_env_var;
  // Header templates; "{token}" is replaced with the auth token.
  std::map<std::string, std::string> header_templates = {
      {"Authorization", "Bearer {token}"}};
  // Feedback turns appended by refine_prompt, oldest first.
  std::vector<std::string> feedback;

  bool operator==(const DesignRequest&) const = default;
};

struct DesignResult {
  std::string raw_response;
  std::string extracted_config;
  std::optional<RewardStructure> validated;
  std::vector<std::string> diagnostics;
};

// Carries one JSON request to the model service and returns the raw body.
class Transport {
 public:
  virtual ~Transport() = default;
  // Throws Error{kTransport}.
  virtual std::string post(const std::string& url,
                           const std::map<std::string, std::string>& headers,
                           const std::string& body) = 0;
};

// Plain HTTP(S) POST via cpp-httplib.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(int timeout_seconds = 120) : timeout_(timeout_seconds) {}
  std::string post(const std::string& url,
                   const std::map<std::string, std::string>& headers,
                   const std::string& body) override;

 private:
  int timeout_;
};

// Replays a recorded response body and remembers what was sent.
class FixtureTransport : public Transport {
 public:
  explicit FixtureTransport(std::string response) : response_(std::move(response)) {}
  std::string post(const std::string& url,
                   const std::map<std::string, std::string>& headers,
                   const std::string& body) override;

  const std::string& last_url() const { return last_url_; }
  const std::string& last_body() const { return last_body_; }
  const std::map<std::string, std::string>& last_headers() const {
    return last_headers_;
  }

 private:
  std::string response_;
  std::string last_url_;
  std::string last_body_;
  std::map<std::string, std::string> last_headers_;
};

// Conversation sent to the model: a system turn framing the task, a user
// turn with the context documents and persona prompt, then one user turn per
// feedback entry.
std::vector<ChatTurn> conversation(const DesignRequest& req);

// Chat-completions JSON body for the request.
std::string request_body(const DesignRequest& req);

// Assistant text from a chat-completions response (choices[0].message.content).
// Throws Error{kExtraction} when the response carries no message text.
std::string response_text(const std::string& raw_response);

// First ```yaml / ```yml fenced block, else the first unlabeled fenced block.
std::optional<std::string> extract_config_block(const std::string& text);

// Throws Error{kTransport}; Error{kExtraction} with the raw response as a
// diagnostic; Error{kSchema} with the schema diagnostics followed by the raw
// response.
DesignResult design_rewards(const DesignRequest& req, Transport& transport);

// Appends expert feedback as a new user turn. Pure.
DesignRequest refine_prompt(const DesignRequest& base, const std::string& feedback);

// Shipped environment summary used as context.
std::string default_environment_context();

}  // namespace decoysim
