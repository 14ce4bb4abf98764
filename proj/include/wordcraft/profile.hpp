#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "wordcraft/error.hpp"

namespace wordcraft {

/// How suggestion lengths are measured for a language pair.
enum class ScriptKind { kCjk, kAlphabetic };

struct LengthBand {
  int min = 0;
  int max = 0;
  bool contains(int n) const { return n >= min && n <= max; }
};

/// Language-pair profile: length rules for provider output plus the IPA
/// inventory used to validate lexicon entries.
struct Profile {
  std::string id;
  ScriptKind script = ScriptKind::kCjk;
  LengthBand semantic_concept{1, 5};
  LengthBand visual_element{2, 6};
  LengthBand relation_sentence{12, 26};
  int chain_text_max = 64;
  std::set<std::string> ipa_tokens;
  std::set<std::string> vowel_tokens;

  /// CJK: characters excluding whitespace and punctuation. Alphabetic: words.
  int text_length(std::string_view text) const;

  static Profile from_json(const json& j);
  static Profile load(const std::filesystem::path& file);
  /// Built-in zh-en defaults, used when no profile.json is present.
  static Profile zh_en();
};

/// Number of Unicode code points in a UTF-8 string (invalid bytes count as one).
int utf8_length(std::string_view text);

/// Counts CJK-style characters: every code point except whitespace and punctuation.
int cjk_char_count(std::string_view text);

int word_count(std::string_view text);

std::string trim(std::string_view text);

}  // namespace wordcraft
