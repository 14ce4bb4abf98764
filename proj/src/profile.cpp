#include "wordcraft/profile.hpp"

#include <fstream>
#include <vector>

namespace wordcraft {

namespace {

// Decodes one code point starting at text[i]; advances i. Invalid lead bytes
// decode as themselves.
char32_t next_code_point(std::string_view text, size_t& i) {
  auto b0 = static_cast<unsigned char>(text[i]);
  int extra = 0;
  char32_t cp = b0;
  if (b0 >= 0xF0 && b0 < 0xF8) {
    extra = 3;
    cp = b0 & 0x07;
  } else if (b0 >= 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if (b0 >= 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  }
  ++i;
  for (int k = 0; k < extra && i < text.size(); ++k) {
    auto b = static_cast<unsigned char>(text[i]);
    if ((b & 0xC0) != 0x80) break;
    cp = (cp << 6) | (b & 0x3F);
    ++i;
  }
  return cp;
}

bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == 0x3000 || cp == 0xA0;
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) ||
           (cp >= 0x7B && cp <= 0x7E);
  }
  return (cp >= 0x2000 && cp <= 0x206F) ||  // general punctuation
         (cp >= 0x3001 && cp <= 0x303F) ||  // CJK symbols and punctuation
         (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
         (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65);
}

LengthBand band_from(const json& j, LengthBand fallback) {
  if (!j.is_object()) return fallback;
  return LengthBand{j.value("min", fallback.min), j.value("max", fallback.max)};
}

}  // namespace

int utf8_length(std::string_view text) {
  int n = 0;
  for (size_t i = 0; i < text.size();) {
    next_code_point(text, i);
    ++n;
  }
  return n;
}

int cjk_char_count(std::string_view text) {
  int n = 0;
  for (size_t i = 0; i < text.size();) {
    char32_t cp = next_code_point(text, i);
    if (!is_space(cp) && !is_punct(cp)) ++n;
  }
  return n;
}

int word_count(std::string_view text) {
  int n = 0;
  bool in_word = false;
  for (size_t i = 0; i < text.size();) {
    char32_t cp = next_code_point(text, i);
    if (is_space(cp)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::string trim(std::string_view text) {
  const char* ws = " \t\r\n";
  auto b = text.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = text.find_last_not_of(ws);
  return std::string(text.substr(b, e - b + 1));
}

int Profile::text_length(std::string_view text) const {
  return script == ScriptKind::kCjk ? cjk_char_count(text) : word_count(text);
}

Profile Profile::from_json(const json& j) {
  Profile p;
  p.id = j.at("id").get<std::string>();
  auto script = j.value("script", std::string("cjk"));
  if (script == "cjk") {
    p.script = ScriptKind::kCjk;
  } else if (script == "alphabetic") {
    p.script = ScriptKind::kAlphabetic;
  } else {
    throw Error(ErrorCode::kConfigError, "unknown profile script '" + script + "'");
  }
  // Alphabetic profiles count words rather than characters.
  if (p.script == ScriptKind::kAlphabetic) {
    p.semantic_concept = {1, 3};
    p.visual_element = {1, 4};
    p.relation_sentence = {5, 20};
    p.chain_text_max = 16;
  }
  const json limits = j.value("limits", json::object());
  p.semantic_concept = band_from(limits.value("semantic_concept", json()), p.semantic_concept);
  p.visual_element = band_from(limits.value("visual_element", json()), p.visual_element);
  p.relation_sentence = band_from(limits.value("relation_sentence", json()), p.relation_sentence);
  p.chain_text_max = limits.value("chain_text_max", p.chain_text_max);
  for (const auto& t : j.value("ipa_tokens", std::vector<std::string>{})) p.ipa_tokens.insert(t);
  for (const auto& t : j.value("vowel_tokens", std::vector<std::string>{})) p.vowel_tokens.insert(t);
  return p;
}

Profile Profile::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open profile " + file.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, "bad profile " + file.string() + ": " + e.what());
  }
}

Profile Profile::zh_en() {
  Profile p;
  p.id = "zh-en";
  p.script = ScriptKind::kCjk;
  p.vowel_tokens = {"i",  "iː", "ɪ",  "e",  "ɛ",  "æ",  "ɑ",  "ɑː", "ɒ",  "ɔ",  "ɔː", "ʊ",  "u",  "uː",
                    "ʌ",  "ə",  "ɜ",  "ɜː", "ɝ",  "ɚ",  "eɪ", "aɪ", "ɔɪ", "aʊ", "oʊ", "əʊ", "ɪə", "eə",
                    "ʊə", "a",  "o"};
  p.ipa_tokens = p.vowel_tokens;
  for (const char* c : {"p", "b", "t", "d", "k", "g", "ɡ", "f", "v", "θ", "ð", "s", "z", "ʃ", "ʒ", "h",
                        "tʃ", "dʒ", "m", "n", "ŋ", "l", "r", "ɹ", "j", "w", "ʔ", "ɾ", "x"}) {
    p.ipa_tokens.insert(c);
  }
  return p;
}

}  // namespace wordcraft
