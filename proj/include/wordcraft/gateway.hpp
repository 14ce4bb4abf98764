#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wordcraft/error.hpp"
#include "wordcraft/profile.hpp"

namespace wordcraft {

namespace template_ids {
inline constexpr std::string_view kKeywordGen = "keyword_gen";
inline constexpr std::string_view kKeywordReview = "keyword_review";
inline constexpr std::string_view kSemanticAssoc = "semantic_assoc";
inline constexpr std::string_view kAssocHints = "assoc_hints";
inline constexpr std::string_view kImageryRecommender = "imagery_recommender";
inline constexpr std::string_view kSceneRelation = "scene_relation";
inline constexpr std::string_view kImageCompose = "image_compose";
}  // namespace template_ids

/// All template ids the gateway knows, in listing order.
const std::vector<std::string>& known_template_ids();

enum class OutputContract { kJsonArrayOfObjects, kJsonArrayOfStrings, kPlainText, kImage };

struct Message {
  std::string role;
  std::string content;
  bool operator==(const Message&) const = default;
};

void to_json(json& j, const Message& m);

/// A prompt template file:
///
///   # template_id: keyword_gen
///   # version: 1
///   # output: json_array_of_objects
///   # variables: ipa, related
///   ---
///   <body with {placeholders}>
struct PromptTemplate {
  std::string template_id;
  int version = 1;
  OutputContract output_contract = OutputContract::kPlainText;
  std::vector<std::string> variables;
  std::string body;

  /// Throws kTemplateError when the header is malformed or the body's
  /// placeholders differ from the declared variable set.
  static PromptTemplate parse(std::string_view text);

  /// Text following `heading` up to the next "-- ... --" heading or end.
  std::string section(std::string_view heading) const;
};

/// Placeholder names ({identifier}) in order of first appearance.
std::vector<std::string> placeholders_in(std::string_view body);

class TemplateStore {
 public:
  TemplateStore() = default;
  /// Loads every known template from `dir/<template_id>.txt`.
  static TemplateStore load(const std::filesystem::path& dir);

  void add(PromptTemplate t);
  const PromptTemplate& get(std::string_view template_id) const;
  bool contains(std::string_view template_id) const;

  /// Substitutes variables into the body. Strings are inserted raw; arrays and
  /// objects as compact JSON; numbers via their JSON text. Extra variables are
  /// ignored. Returns a single system message.
  std::vector<Message> render(std::string_view template_id, const json& variables) const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

struct GenerationParams {
  double temperature = 1.0;
  int max_retries = 1;
  int timeout_ms = 60000;
};

/// Defaults: 1.0 for keyword_gen, 0.3 for keyword_review, 0.7 elsewhere.
GenerationParams default_params_for(std::string_view template_id);

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string credential_env = "OPENAI_API_KEY";  // name of the env var, never the secret
  std::string text_model_id = "gpt-4o";
  std::string image_model_id = "gpt-image-1";
  std::string profile = "zh-en";
  size_t max_image_prompt_bytes = 32000;
  std::string image_size = "1024x1024";

  /// WORDCRAFT_PROVIDER_URL / _KEY / _MODEL_TEXT / _MODEL_IMAGE override fields.
  void apply_environment();
};

/// Credential-free view of the config.
void to_json(json& j, const ProviderConfig& c);

struct TextRequest {
  std::string template_id;
  std::vector<Message> messages;
  GenerationParams params;
  std::string model;
};

struct ImageCall {
  std::string prompt;
  std::string model;
  std::string size;
  int timeout_ms = 120000;
};

struct ImageResult {
  std::string bytes;
  int width = 0;
  int height = 0;
};

/// Reads width/height from a PNG IHDR chunk; {0,0} when not a PNG.
std::pair<int, int> png_dimensions(std::string_view bytes);

/// Transport to a text/image generation backend. Implementations throw
/// kProviderError, kTimeoutError or kContentPolicyRejection.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const TextRequest& request) = 0;
  virtual ImageResult generate_image(const ImageCall& call) = 0;
  virtual std::string mode() const = 0;
};

struct MockResponse {
  enum class Kind { kText, kImage, kProviderError, kPolicyRefusal, kTimeout };
  Kind kind = Kind::kText;
  std::string content;  // text body, or error message
  std::string image;    // raw bytes; empty means the built-in 1x1 PNG

  static MockResponse text(std::string body) { return {Kind::kText, std::move(body), {}}; }
  static MockResponse png(std::string bytes = {}) { return {Kind::kImage, {}, std::move(bytes)}; }
  static MockResponse provider_error(std::string msg) { return {Kind::kProviderError, std::move(msg), {}}; }
  static MockResponse policy_refusal(std::string msg) { return {Kind::kPolicyRefusal, std::move(msg), {}}; }
  static MockResponse timeout() { return {Kind::kTimeout, {}, {}}; }

  /// {"kind": "text"|"image"|"provider_error"|"policy_refusal"|"timeout",
  ///  "content": ..., "png_base64": ...}
  static MockResponse from_json(const json& j);
};

struct RecordedCall {
  std::string kind;  // "text" or "image"
  std::string template_id;
  std::vector<Message> messages;
  std::string prompt;  // image calls
  double temperature = 0.0;
  std::string model;
};

/// Replays scripted responses in order and records every request.
class MockProvider : public Provider {
 public:
  explicit MockProvider(std::vector<MockResponse> script = {});

  static std::shared_ptr<MockProvider> from_file(const std::filesystem::path& path);

  void append(MockResponse r);
  std::string complete(const TextRequest& request) override;
  ImageResult generate_image(const ImageCall& call) override;
  std::string mode() const override { return "mock"; }

  std::vector<RecordedCall> recorded() const;
  size_t remaining() const;

 private:
  MockResponse next(std::string_view what);

  mutable std::mutex mu_;
  std::vector<MockResponse> script_;
  size_t cursor_ = 0;
  std::vector<RecordedCall> recorded_;
};

/// OpenAI-compatible HTTP backend (chat completions + image generations).
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig config);
  std::string complete(const TextRequest& request) override;
  ImageResult generate_image(const ImageCall& call) override;
  std::string mode() const override { return "live"; }

 private:
  ProviderConfig config_;
  std::string secret_;
};

const std::string& placeholder_png();

std::string base64_decode(std::string_view in);
std::string base64_encode(std::string_view in);

/// Locates the first well-formed top-level JSON array in `text` by bracket
/// matching; surrounding prose is ignored.
std::optional<json> extract_json_array(std::string_view text);

/// Checks a parsed provider array against the template's cardinality and
/// length rules, returning the normalized payload. Throws kFormatError.
json validate_output(std::string_view template_id, const json& parsed, const Profile& profile);

/// Extra caller-side check run after template validation; throw kFormatError
/// to reject (counts as a retryable validation failure).
using PayloadCheck = std::function<void(const json&)>;

/// Uniform access to the provider: render, call, extract, validate, retry.
class Gateway {
 public:
  Gateway(ProviderConfig config, TemplateStore templates, Profile profile, std::shared_ptr<Provider> provider);

  const TemplateStore& templates() const { return templates_; }
  const Profile& profile() const { return profile_; }
  const ProviderConfig& config() const { return config_; }
  std::string mode() const { return provider_->mode(); }

  GenerationParams params_for(std::string_view template_id) const;
  void set_params(std::string_view template_id, GenerationParams params);

  /// Validation failures re-issue the same prompt with the same parameters up
  /// to max_retries times, then throw kFormatError. Transport errors propagate.
  json call_text(std::string_view template_id, const json& variables,
                 std::optional<GenerationParams> params = std::nullopt, const PayloadCheck& extra = {}) const;

  /// Rejects prompts above the configured size limit before calling out.
  ImageResult call_image(const std::string& prompt) const;

 private:
  ProviderConfig config_;
  TemplateStore templates_;
  Profile profile_;
  std::shared_ptr<Provider> provider_;
  std::map<std::string, GenerationParams, std::less<>> params_;
};

}  // namespace wordcraft
