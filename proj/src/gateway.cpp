#include "wordcraft/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace wordcraft {

const std::vector<std::string>& known_template_ids() {
  static const std::vector<std::string> ids{
      std::string(template_ids::kKeywordGen),          std::string(template_ids::kKeywordReview),
      std::string(template_ids::kSemanticAssoc),       std::string(template_ids::kAssocHints),
      std::string(template_ids::kImageryRecommender),  std::string(template_ids::kSceneRelation),
      std::string(template_ids::kImageCompose)};
  return ids;
}

void to_json(json& j, const Message& m) { j = json{{"role", m.role}, {"content", m.content}}; }

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

namespace {

bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

OutputContract parse_contract(const std::string& s) {
  if (s == "json_array_of_objects") return OutputContract::kJsonArrayOfObjects;
  if (s == "json_array_of_strings") return OutputContract::kJsonArrayOfStrings;
  if (s == "plain_text") return OutputContract::kPlainText;
  if (s == "image") return OutputContract::kImage;
  throw Error(ErrorCode::kTemplateError, "unknown output contract '" + s + "'");
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<std::string> placeholders_in(std::string_view body) {
  std::vector<std::string> out;
  for (size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '{') continue;
    size_t j = i + 1;
    while (j < body.size() && is_ident_char(body[j])) ++j;
    if (j > i + 1 && j < body.size() && body[j] == '}' && body[i + 1] >= 'a' && body[i + 1] <= 'z') {
      std::string name(body.substr(i + 1, j - i - 1));
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
      i = j;
    }
  }
  return out;
}

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate t;
  auto sep = text.find("\n---\n");
  if (sep == std::string_view::npos) throw Error(ErrorCode::kTemplateError, "template header separator missing");
  std::istringstream header{std::string(text.substr(0, sep))};
  t.body = std::string(text.substr(sep + 5));
  std::string line;
  bool have_contract = false;
  while (std::getline(header, line)) {
    auto l = trim(line);
    if (l.empty()) continue;
    if (l[0] != '#') throw Error(ErrorCode::kTemplateError, "header lines must start with '#'");
    auto colon = l.find(':');
    if (colon == std::string::npos) continue;
    auto key = trim(std::string_view(l).substr(1, colon - 1));
    auto value = trim(std::string_view(l).substr(colon + 1));
    if (key == "template_id") {
      t.template_id = value;
    } else if (key == "version") {
      t.version = std::stoi(value);
    } else if (key == "output") {
      t.output_contract = parse_contract(value);
      have_contract = true;
    } else if (key == "variables") {
      t.variables = split_csv(value);
    }
  }
  if (t.template_id.empty() || !have_contract) {
    throw Error(ErrorCode::kTemplateError, "template header needs template_id and output");
  }
  std::set<std::string> declared(t.variables.begin(), t.variables.end());
  auto used = placeholders_in(t.body);
  std::set<std::string> found(used.begin(), used.end());
  if (declared != found) {
    throw Error(ErrorCode::kTemplateError, "placeholders of '" + t.template_id + "' do not match declared variables",
                json{{"declared", t.variables}, {"found", used}});
  }
  return t;
}

std::string PromptTemplate::section(std::string_view heading) const {
  auto at = body.find(heading);
  if (at == std::string::npos) return {};
  auto start = body.find('\n', at);
  if (start == std::string::npos) return {};
  ++start;
  auto end = body.find("\n-- ", start);
  return trim(std::string_view(body).substr(start, end == std::string::npos ? std::string::npos : end - start));
}

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
  TemplateStore store;
  for (const auto& id : known_template_ids()) {
    auto file = dir / (id + ".txt");
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::kConfigError, "missing prompt template " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    auto t = PromptTemplate::parse(buf.str());
    if (t.template_id != id) {
      throw Error(ErrorCode::kTemplateError, file.string() + " declares template_id '" + t.template_id + "'");
    }
    store.add(std::move(t));
  }
  return store;
}

void TemplateStore::add(PromptTemplate t) {
  auto id = t.template_id;
  templates_.insert_or_assign(std::move(id), std::move(t));
}

bool TemplateStore::contains(std::string_view template_id) const {
  return templates_.find(template_id) != templates_.end();
}

const PromptTemplate& TemplateStore::get(std::string_view template_id) const {
  auto it = templates_.find(template_id);
  if (it == templates_.end()) {
    throw Error(ErrorCode::kUnknownTemplate, "unknown template '" + std::string(template_id) + "'");
  }
  return it->second;
}

std::vector<Message> TemplateStore::render(std::string_view template_id, const json& variables) const {
  const auto& t = get(template_id);
  std::map<std::string, std::string> values;
  for (const auto& name : t.variables) {
    if (!variables.is_object() || !variables.contains(name)) {
      throw Error(ErrorCode::kMissingVariable, "template '" + t.template_id + "' needs variable '" + name + "'",
                  json{{"template_id", t.template_id}, {"variable", name}});
    }
    const auto& v = variables.at(name);
    values[name] = v.is_string() ? v.get<std::string>() : v.dump(-1, ' ', false);
  }
  std::string out;
  out.reserve(t.body.size() + 256);
  const auto& body = t.body;
  for (size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '{') {
      size_t j = i + 1;
      while (j < body.size() && is_ident_char(body[j])) ++j;
      if (j > i + 1 && j < body.size() && body[j] == '}') {
        auto it = values.find(body.substr(i + 1, j - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = j;
          continue;
        }
      }
    }
    out += body[i];
  }
  return {Message{"system", std::move(out)}};
}

// ---------------------------------------------------------------------------
// Params and config
// ---------------------------------------------------------------------------

GenerationParams default_params_for(std::string_view template_id) {
  GenerationParams p;
  if (template_id == template_ids::kKeywordGen) {
    p.temperature = 1.0;
  } else if (template_id == template_ids::kKeywordReview) {
    p.temperature = 0.3;
  } else {
    p.temperature = 0.7;
  }
  return p;
}

void ProviderConfig::apply_environment() {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("WORDCRAFT_PROVIDER_URL")) base_url = *v;
  if (auto v = env("WORDCRAFT_PROVIDER_KEY")) credential_env = *v;
  if (auto v = env("WORDCRAFT_MODEL_TEXT")) text_model_id = *v;
  if (auto v = env("WORDCRAFT_MODEL_IMAGE")) image_model_id = *v;
}

void to_json(json& j, const ProviderConfig& c) {
  j = json{{"base_url", c.base_url},          {"credential_env", c.credential_env},
           {"text_model_id", c.text_model_id}, {"image_model_id", c.image_model_id},
           {"profile", c.profile},             {"max_image_prompt_bytes", c.max_image_prompt_bytes},
           {"image_size", c.image_size}};
}

// ---------------------------------------------------------------------------
// Encoding helpers
// ---------------------------------------------------------------------------

const std::string& placeholder_png() {
  static const std::string png = [] {
    const unsigned char bytes[] = {
        0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52, 0x00, 0x00,
        0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00, 0x00, 0x1f, 0x15, 0xc4, 0x89, 0x00, 0x00, 0x00,
        0x0d, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0x7f, 0x26, 0xed, 0x3f, 0x00, 0x08, 0x30, 0x03, 0x31,
        0x1d, 0x0c, 0x99, 0x26, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
    return std::string(reinterpret_cast<const char*>(bytes), sizeof(bytes));
  }();
  return png;
}

std::pair<int, int> png_dimensions(std::string_view bytes) {
  if (bytes.size() < 24 || bytes.substr(0, 8) != std::string_view("\x89PNG\r\n\x1a\n", 8)) return {0, 0};
  auto be32 = [&](size_t at) {
    return static_cast<int>((static_cast<unsigned char>(bytes[at]) << 24) |
                            (static_cast<unsigned char>(bytes[at + 1]) << 16) |
                            (static_cast<unsigned char>(bytes[at + 2]) << 8) |
                            static_cast<unsigned char>(bytes[at + 3]));
  };
  return {be32(16), be32(20)};
}

namespace {
constexpr std::string_view kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::string_view in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    unsigned v = (static_cast<unsigned char>(in[i]) << 16) | (static_cast<unsigned char>(in[i + 1]) << 8) |
                 static_cast<unsigned char>(in[i + 2]);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  if (i < in.size()) {
    unsigned v = static_cast<unsigned char>(in[i]) << 16;
    if (i + 1 < in.size()) v |= static_cast<unsigned char>(in[i + 1]) << 8;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += i + 1 < in.size() ? kB64[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view in) {
  std::string out;
  unsigned acc = 0;
  int bits = 0;
  for (char c : in) {
    auto pos = kB64.find(c);
    if (pos == std::string_view::npos) continue;  // padding, whitespace
    acc = (acc << 6) | static_cast<unsigned>(pos);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((acc >> bits) & 0xFF);
    }
  }
  return out;
}

std::optional<json> extract_json_array(std::string_view text) {
  for (size_t start = text.find('['); start != std::string_view::npos; start = text.find('[', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '[') {
        ++depth;
      } else if (c == ']' && --depth == 0) {
        auto parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_array()) return parsed;
        break;
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Output validation
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void format_fail(std::string_view template_id, const std::string& reason) {
  throw Error(ErrorCode::kFormatError, std::string(template_id) + ": " + reason,
              json{{"template_id", template_id}, {"reason", reason}});
}

std::string field(const json& obj, const char* name) {
  if (!obj.contains(name) || !obj.at(name).is_string()) return {};
  return trim(obj.at(name).get<std::string>());
}

json validate_strings_in_band(std::string_view id, const json& parsed, const Profile& profile, LengthBand band) {
  json out = json::array();
  std::set<std::string> seen;
  for (const auto& item : parsed) {
    if (!item.is_string()) continue;
    auto s = trim(item.get<std::string>());
    if (s.empty() || !band.contains(profile.text_length(s))) continue;
    if (seen.insert(s).second) out.push_back(s);
  }
  if (out.empty()) format_fail(id, "no item satisfies the length band");
  return out;
}

}  // namespace

json validate_output(std::string_view id, const json& parsed, const Profile& profile) {
  if (!parsed.is_array()) format_fail(id, "output is not a JSON array");

  if (id == template_ids::kKeywordGen) {
    json out = json::array();
    std::set<std::string> seen;
    for (const auto& item : parsed) {
      if (!item.is_object()) continue;
      auto kw = field(item, "keyword");
      auto ex = field(item, "explanation");
      if (kw.empty() || ex.empty() || !seen.insert(kw).second) continue;
      out.push_back({{"keyword", kw}, {"explanation", ex}});
      if (out.size() == 20) break;
    }
    if (out.size() < 10) format_fail(id, "only " + std::to_string(out.size()) + " usable candidates (need 10)");
    return out;
  }

  if (id == template_ids::kKeywordReview) {
    if (parsed.size() != 4) format_fail(id, "expected exactly 4 items, got " + std::to_string(parsed.size()));
    json out = json::array();
    std::set<std::string> seen;
    for (const auto& item : parsed) {
      if (!item.is_object()) format_fail(id, "item is not an object");
      auto kw = field(item, "keyword");
      auto ex = field(item, "explanation");
      auto why = field(item, "reasoning");
      if (kw.empty() || ex.empty() || why.empty()) format_fail(id, "item missing keyword/explanation/reasoning");
      if (!seen.insert(kw).second) format_fail(id, "duplicate keyword '" + kw + "'");
      out.push_back({{"keyword", kw}, {"explanation", ex}, {"reasoning", why}});
    }
    return out;
  }

  if (id == template_ids::kSemanticAssoc) {
    json out = json::array();
    std::set<std::string> seen;
    for (const auto& item : parsed) {
      json node;
      if (item.is_string()) {
        node = {{"concept", trim(item.get<std::string>())}, {"cue", ""}, {"translation", ""}};
      } else if (item.is_object()) {
        node = {{"concept", field(item, "concept")}, {"cue", field(item, "cue")},
                {"translation", field(item, "translation")}};
      } else {
        continue;
      }
      auto concept_text = node["concept"].get<std::string>();
      if (concept_text.empty() || !profile.semantic_concept.contains(profile.text_length(concept_text))) continue;
      if (seen.insert(concept_text).second) out.push_back(std::move(node));
    }
    if (out.empty()) format_fail(id, "no concept satisfies the length band");
    return out;
  }

  if (id == template_ids::kAssocHints) {
    json out = json::array();
    for (const auto& item : parsed) {
      if (!item.is_string()) continue;
      auto s = trim(item.get<std::string>());
      if (!s.empty()) out.push_back(s);
    }
    if (out.size() < 3 || out.size() > 5) {
      format_fail(id, "expected 3-5 sentences, got " + std::to_string(out.size()));
    }
    return out;
  }

  if (id == template_ids::kImageryRecommender) return validate_strings_in_band(id, parsed, profile, profile.visual_element);
  if (id == template_ids::kSceneRelation) return validate_strings_in_band(id, parsed, profile, profile.relation_sentence);

  throw Error(ErrorCode::kUnknownTemplate, "no text validator for '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------
// Mock provider
// ---------------------------------------------------------------------------

MockResponse MockResponse::from_json(const json& j) {
  auto kind = j.value("kind", std::string("text"));
  if (kind == "text") {
    const auto& c = j.at("content");
    return text(c.is_string() ? c.get<std::string>() : c.dump(-1, ' ', false));
  }
  if (kind == "image") return png(j.contains("png_base64") ? base64_decode(j.at("png_base64").get<std::string>()) : "");
  if (kind == "provider_error") return provider_error(j.value("content", std::string("provider error")));
  if (kind == "policy_refusal") return policy_refusal(j.value("content", std::string("refused")));
  if (kind == "timeout") return timeout();
  throw Error(ErrorCode::kConfigError, "unknown mock response kind '" + kind + "'");
}

MockProvider::MockProvider(std::vector<MockResponse> script) : script_(std::move(script)) {}

std::shared_ptr<MockProvider> MockProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open mock script " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, "bad mock script: " + std::string(e.what()));
  }
  std::vector<MockResponse> script;
  for (const auto& item : j.is_object() ? j.at("responses") : j) script.push_back(MockResponse::from_json(item));
  return std::make_shared<MockProvider>(std::move(script));
}

void MockProvider::append(MockResponse r) {
  std::lock_guard lock(mu_);
  script_.push_back(std::move(r));
}

MockResponse MockProvider::next(std::string_view what) {
  if (cursor_ >= script_.size()) {
    throw Error(ErrorCode::kScriptExhausted,
                "mock script exhausted after " + std::to_string(script_.size()) + " responses (" + std::string(what) + ")",
                json{{"script_length", script_.size()}});
  }
  return script_[cursor_++];
}

std::string MockProvider::complete(const TextRequest& request) {
  std::lock_guard lock(mu_);
  recorded_.push_back(RecordedCall{"text", request.template_id, request.messages, {}, request.params.temperature,
                                   request.model});
  auto r = next(request.template_id);
  switch (r.kind) {
    case MockResponse::Kind::kText:
      return r.content;
    case MockResponse::Kind::kTimeout:
      throw Error(ErrorCode::kTimeoutError, "mock timeout");
    case MockResponse::Kind::kPolicyRefusal:
      throw Error(ErrorCode::kContentPolicyRejection, r.content, json{{"provider_message", r.content}});
    default:
      throw Error(ErrorCode::kProviderError, r.content.empty() ? "mock provider error" : r.content);
  }
}

ImageResult MockProvider::generate_image(const ImageCall& call) {
  std::lock_guard lock(mu_);
  recorded_.push_back(RecordedCall{"image", std::string(template_ids::kImageCompose), {}, call.prompt, 0.0, call.model});
  auto r = next("image");
  switch (r.kind) {
    case MockResponse::Kind::kImage: {
      ImageResult out;
      out.bytes = r.image.empty() ? placeholder_png() : r.image;
      std::tie(out.width, out.height) = png_dimensions(out.bytes);
      return out;
    }
    case MockResponse::Kind::kTimeout:
      throw Error(ErrorCode::kTimeoutError, "mock timeout");
    case MockResponse::Kind::kPolicyRefusal:
      throw Error(ErrorCode::kContentPolicyRejection, r.content, json{{"provider_message", r.content}});
    default:
      throw Error(ErrorCode::kProviderError, r.content.empty() ? "mock provider error" : r.content);
  }
}

std::vector<RecordedCall> MockProvider::recorded() const {
  std::lock_guard lock(mu_);
  return recorded_;
}

size_t MockProvider::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size() - cursor_;
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

Gateway::Gateway(ProviderConfig config, TemplateStore templates, Profile profile, std::shared_ptr<Provider> provider)
    : config_(std::move(config)),
      templates_(std::move(templates)),
      profile_(std::move(profile)),
      provider_(std::move(provider)) {
  if (!provider_) throw Error(ErrorCode::kConfigError, "gateway needs a provider");
  for (const auto& id : known_template_ids()) params_[id] = default_params_for(id);
}

GenerationParams Gateway::params_for(std::string_view template_id) const {
  auto it = params_.find(template_id);
  return it == params_.end() ? default_params_for(template_id) : it->second;
}

void Gateway::set_params(std::string_view template_id, GenerationParams params) {
  if (params.temperature < 0) throw Error(ErrorCode::kConfigError, "temperature must be >= 0");
  params_.insert_or_assign(std::string(template_id), params);
}

json Gateway::call_text(std::string_view template_id, const json& variables, std::optional<GenerationParams> params,
                        const PayloadCheck& extra) const {
  TextRequest req;
  req.template_id = std::string(template_id);
  req.messages = templates_.render(template_id, variables);
  req.params = params.value_or(params_for(template_id));
  req.model = config_.text_model_id;
  const auto contract = templates_.get(template_id).output_contract;

  std::string reason;
  const int attempts = 1 + std::max(0, req.params.max_retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto raw = provider_->complete(req);
    if (contract == OutputContract::kPlainText) return json(trim(raw));
    auto parsed = extract_json_array(raw);
    if (!parsed) {
      reason = "no JSON array in provider output";
      continue;
    }
    try {
      auto payload = validate_output(template_id, *parsed, profile_);
      if (extra) extra(payload);
      return payload;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kFormatError) throw;
      reason = e.what();
    }
  }
  throw Error(ErrorCode::kFormatError,
              std::string(template_id) + " output rejected after " + std::to_string(attempts) + " attempt(s): " + reason,
              json{{"template_id", template_id}, {"attempts", attempts}, {"reason", reason}});
}

ImageResult Gateway::call_image(const std::string& prompt) const {
  if (prompt.size() > config_.max_image_prompt_bytes) {
    throw Error(ErrorCode::kProviderError,
                "image prompt is " + std::to_string(prompt.size()) + " bytes; provider limit is " +
                    std::to_string(config_.max_image_prompt_bytes),
                json{{"size", prompt.size()}, {"limit", config_.max_image_prompt_bytes}});
  }
  ImageCall call{prompt, config_.image_model_id, config_.image_size, 120000};
  auto result = provider_->generate_image(call);
  if (result.bytes.empty()) throw Error(ErrorCode::kProviderError, "provider returned an empty image");
  if (result.width == 0) std::tie(result.width, result.height) = png_dimensions(result.bytes);
  return result;
}

}  // namespace wordcraft
