#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wordcraft/error.hpp"
#include "wordcraft/profile.hpp"

namespace wordcraft {

struct Sense {
  std::string sense_id;
  std::string gloss_l1;
  std::string gloss_l2;
  std::vector<std::string> examples;
};

struct WordEntry {
  std::string word_id;
  std::string surface;
  std::vector<std::string> phonemes;  // pre-tokenized IPA
  std::vector<Sense> senses;
  int syllable_count = 1;
  std::optional<double> imageability;  // MRC scale, 100..700
  std::optional<std::string> audio_ref;

  const Sense* find_sense(std::string_view sense_id) const;
};

void to_json(json& j, const Sense& s);
void from_json(const json& j, Sense& s);
void to_json(json& j, const WordEntry& w);
void from_json(const json& j, WordEntry& w);

enum class ImageabilityClass { kHigh, kLow };
enum class LengthClass { kShort, kLong };

struct WordCategory {
  ImageabilityClass imageability_class;
  LengthClass length_class;
  bool operator==(const WordCategory&) const = default;
};

std::string to_string(const WordCategory& c);

constexpr double kDefaultImageabilityCutoff = 450.0;
constexpr int kDefaultSyllableCutoff = 2;

/// high iff imageability >= cutoff (missing imageability is low);
/// short iff syllable_count <= cutoff.
WordCategory classify_word(const WordEntry& entry, double imageability_cutoff = kDefaultImageabilityCutoff,
                           int syllable_cutoff = kDefaultSyllableCutoff);

/// Immutable after load; safe for concurrent reads.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<WordEntry> entries, const Profile* profile = nullptr);

  /// Newline-delimited JSON, one WordEntry per line. Blank lines are skipped.
  /// Throws Error{kParseError} with details {line, reason} or kDuplicateWordId.
  static Lexicon load(const std::filesystem::path& path, const Profile* profile = nullptr);
  static Lexicon parse(std::string_view text, const Profile* profile = nullptr);

  std::string to_jsonl() const;

  size_t size() const { return entries_.size(); }
  const std::vector<WordEntry>& entries() const { return entries_; }
  const WordEntry* find(std::string_view word_id) const;
  const WordEntry* find_surface(std::string_view surface) const;
  /// Entries whose surface starts with `query` (case-sensitive), then those
  /// containing it elsewhere; lexicon order within each group.
  std::vector<const WordEntry*> search(std::string_view query, size_t limit = 50) const;

 private:
  std::vector<WordEntry> entries_;
  std::unordered_map<std::string, size_t> by_id_;
  std::unordered_map<std::string, size_t> by_surface_;
};

/// Counts vowel-nucleus tokens and reports entries whose stored syllable_count
/// disagrees. Advisory only.
std::vector<std::string> syllable_warnings(const Lexicon& lexicon, const Profile& profile);

enum class Familiarity { kKnown, kRecognized, kUnknown };

/// participant -> (word_id -> response)
using ScreeningResponses = std::map<std::string, std::map<std::string, Familiarity>>;

/// Keeps candidates every participant rated unknown, in input order.
/// Throws kMissingResponse when a participant has no response for a candidate.
std::vector<std::string> screen_words(const std::vector<std::string>& candidates,
                                      const ScreeningResponses& responses);

}  // namespace wordcraft
