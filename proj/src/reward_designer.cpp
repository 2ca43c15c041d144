#include "decoysim/reward_designer.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <regex>
#include <sstream>

#include "decoysim/error.hpp"

namespace decoysim {
namespace {

constexpr const char* kModule = "reward_designer";
using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string HttpTransport::post(const std::string& url,
                                const std::map<std::string, std::string>& headers,
                                const std::string& body) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kTransport, kModule, "unsupported endpoint URL '" + url + "'");
  }
  const std::string path = m[2].matched ? m[2].str() : "/";
  httplib::Client client(m[1].str());
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  const auto res = client.Post(path, h, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::kTransport, kModule,
                "request to '" + url + "' failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::kTransport, kModule,
                "endpoint returned HTTP " + std::to_string(res->status),
                {res->body});
  }
  return res->body;
}

std::string FixtureTransport::post(const std::string& url,
                                   const std::map<std::string, std::string>& headers,
                                   const std::string& body) {
  last_url_ = url;
  last_headers_ = headers;
  last_body_ = body;
  return response_;
}

std::vector<ChatTurn> conversation(const DesignRequest& req) {
  std::vector<ChatTurn> turns;
  turns.push_back(
      {"system",
       "You design reward structures for agents in a cyber attack-defense "
       "simulation. Reply with the complete modified reward file in a single "
       "```yaml fenced block using the same schema as the baseline file "
       "(agent, persona, actions with name, immediate_reward, "
       "recurring_reward)."});
  std::ostringstream user;
  for (const auto& [name, text] : req.context_documents) {
    user << "=== " << name << " ===\n" << text;
    if (text.empty() || text.back() != '\n') user << '\n';
    user << '\n';
  }
  user << req.persona_prompt;
  turns.push_back({"user", user.str()});
  for (const auto& fb : req.feedback) {
    if (!trim(fb).empty()) turns.push_back({"user", fb});
  }
  return turns;
}

std::string request_body(const DesignRequest& req) {
  json messages = json::array();
  for (const auto& t : conversation(req)) {
    messages.push_back({{"role", t.role}, {"content", t.content}});
  }
  return json{{"model", req.model_name}, {"messages", messages}}.dump();
}

std::string response_text(const std::string& raw) {
  const json j = json::parse(raw, nullptr, false);
  // Not JSON: treat the body as the assistant text itself.
  if (j.is_discarded()) return raw;
  try {
    if (j.contains("choices")) {
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    }
    // Messages-style providers return a list of content blocks.
    if (j.contains("content") && j["content"].is_array()) {
      std::string text;
      for (const auto& block : j["content"]) {
        if (block.value("type", "") == "text") text += block.value("text", "");
      }
      return text;
    }
  } catch (const json::exception&) {
  }
  throw Error(ErrorCode::kExtraction, kModule,
              "response carries no assistant message", {raw});
}

std::optional<std::string> extract_config_block(const std::string& text) {
  static const std::regex kFence(R"(```([A-Za-z0-9_-]*)[^\n]*\n([\s\S]*?)```)");
  std::optional<std::string> unlabeled;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kFence);
       it != std::sregex_iterator(); ++it) {
    const std::string label = (*it)[1].str();
    if (label == "yaml" || label == "yml") return (*it)[2].str();
    if (label.empty() && !unlabeled) unlabeled = (*it)[2].str();
  }
  return unlabeled;
}

DesignResult design_rewards(const DesignRequest& req, Transport& transport) {
  if (trim(req.persona_prompt).empty()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "persona prompt is empty");
  }
  std::string token;
  if (!req.auth_token_env_var.empty()) {
    if (const char* v = std::getenv(req.auth_token_env_var.c_str())) token = v;
  }
  std::map<std::string, std::string> headers;
  for (const auto& [name, tmpl] : req.header_templates) {
    std::string value = tmpl;
    const auto pos = value.find("{token}");
    if (pos != std::string::npos) {
      if (token.empty()) continue;
      value.replace(pos, 7, token);
    }
    headers.emplace(name, value);
  }

  DesignResult result;
  result.raw_response = transport.post(req.model_endpoint, headers, request_body(req));
  const std::string text = response_text(result.raw_response);
  const auto block = extract_config_block(text);
  if (!block) {
    throw Error(ErrorCode::kExtraction, kModule,
                "model response contains no fenced config block",
                {result.raw_response});
  }
  result.extracted_config = *block;
  try {
    result.validated = RewardStructure::load(result.extracted_config);
  } catch (const Error& e) {
    std::vector<std::string> diags = e.diagnostics();
    if (diags.empty()) diags.push_back(e.what());
    diags.push_back(result.raw_response);
    throw Error(ErrorCode::kSchema, kModule, e.what(), std::move(diags));
  }
  return result;
}

DesignRequest refine_prompt(const DesignRequest& base, const std::string& feedback) {
  DesignRequest next = base;
  next.feedback.push_back(feedback);
  return next;
}

std::string default_environment_context() {
  return R"(Simulation environment summary (reconstructed):
- Network: one router, three subnets, five hosts per subnet (15 hosts). Each
  subnet has one server (mail or file) and four user workstations.
- Red (attacker) agent: a heuristic kill chain following Atomic Red Team and
  MITRE ATT&CK techniques. Actions: pingsweep, portscan, discovery,
  lateral-movement, privilege-escalation, impact. It starts on a random host
  and escalates gradually from low-visibility reconnaissance to impact.
- Blue (defender) agent: learns with PPO. Actions: nothing, decoy0 (deploy a
  decoy host into a subnet, up to two per subnet), remove_decoy. Decoys are
  indistinguishable from real hosts to the attacker; any attacker action on a
  decoy raises an alert, which is the defender's only observation.
- Reward: each step the defender receives its own action's immediate reward,
  minus the attacker action's immediate reward when a real host is hit (plus
  it when a decoy is hit), plus all recurring rewards accrued so far in the
  episode. Episodes last 100 steps.
)";
}

}  // namespace decoysim
