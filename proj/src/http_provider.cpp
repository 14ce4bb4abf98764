#include <cstdlib>

#include "httplib.h"
#include "wordcraft/gateway.hpp"

namespace wordcraft {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  auto path_at = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_at);
  e.prefix = path_at == std::string::npos ? "" : url.substr(path_at);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

[[noreturn]] void raise_http_failure(const httplib::Result& res, std::string_view what) {
  if (!res) {
    auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::kTimeoutError, std::string(what) + ": " + httplib::to_string(err));
    }
    throw Error(ErrorCode::kProviderError, std::string(what) + ": " + httplib::to_string(err));
  }
  auto body = json::parse(res->body, nullptr, false);
  std::string message = res->body;
  std::string code;
  if (!body.is_discarded() && body.contains("error") && body["error"].is_object()) {
    message = body["error"].value("message", message);
    code = body["error"].value("code", std::string());
    if (code.empty()) code = body["error"].value("type", std::string());
  }
  if (code.find("content_policy") != std::string::npos || code.find("moderation") != std::string::npos ||
      code == "safety_violation") {
    throw Error(ErrorCode::kContentPolicyRejection, message, json{{"provider_message", message}, {"status", res->status}});
  }
  throw Error(ErrorCode::kProviderError, std::string(what) + " failed with HTTP " + std::to_string(res->status),
              json{{"status", res->status}, {"provider_message", message}});
}

}  // namespace

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
  if (const char* v = std::getenv(config_.credential_env.c_str())) secret_ = v;
}

std::string HttpProvider::complete(const TextRequest& request) {
  auto ep = split_url(config_.base_url);
  httplib::Client cli(ep.origin);
  auto secs = request.params.timeout_ms / 1000;
  auto usecs = (request.params.timeout_ms % 1000) * 1000;
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  if (!secret_.empty()) cli.set_bearer_token_auth(secret_);

  json body{{"model", request.model}, {"temperature", request.params.temperature}, {"messages", request.messages}};
  auto res = cli.Post(ep.prefix + "/chat/completions", body.dump(), "application/json");
  if (!res || res->status != 200) raise_http_failure(res, "chat completion");
  auto reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
    throw Error(ErrorCode::kProviderError, "malformed chat completion response");
  }
  const auto& choice = reply["choices"][0];
  if (choice.value("finish_reason", std::string()) == "content_filter") {
    throw Error(ErrorCode::kContentPolicyRejection, "completion stopped by content filter");
  }
  return choice.at("message").value("content", std::string());
}

ImageResult HttpProvider::generate_image(const ImageCall& call) {
  auto ep = split_url(config_.base_url);
  httplib::Client cli(ep.origin);
  cli.set_read_timeout(call.timeout_ms / 1000, 0);
  if (!secret_.empty()) cli.set_bearer_token_auth(secret_);

  json body{{"model", call.model}, {"prompt", call.prompt}, {"size", call.size}, {"n", 1}};
  auto res = cli.Post(ep.prefix + "/images/generations", body.dump(), "application/json");
  if (!res || res->status != 200) raise_http_failure(res, "image generation");
  auto reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("data") || reply["data"].empty() ||
      !reply["data"][0].contains("b64_json")) {
    throw Error(ErrorCode::kProviderError, "malformed image generation response");
  }
  ImageResult out;
  out.bytes = base64_decode(reply["data"][0]["b64_json"].get<std::string>());
  std::tie(out.width, out.height) = png_dimensions(out.bytes);
  return out;
}

}  // namespace wordcraft
