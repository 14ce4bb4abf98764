#include "wordcraft/lexicon.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace wordcraft {

void to_json(json& j, const Sense& s) {
  j = json{{"sense_id", s.sense_id}, {"gloss_l1", s.gloss_l1}, {"gloss_l2", s.gloss_l2}, {"examples", s.examples}};
}

void from_json(const json& j, Sense& s) {
  s.sense_id = j.at("sense_id").get<std::string>();
  s.gloss_l1 = j.at("gloss_l1").get<std::string>();
  s.gloss_l2 = j.value("gloss_l2", std::string());
  s.examples = j.value("examples", std::vector<std::string>{});
}

void to_json(json& j, const WordEntry& w) {
  j = json{{"word_id", w.word_id},
           {"surface", w.surface},
           {"phonemes", w.phonemes},
           {"syllable_count", w.syllable_count},
           {"imageability", w.imageability ? json(*w.imageability) : json(nullptr)},
           {"senses", w.senses},
           {"audio_ref", w.audio_ref ? json(*w.audio_ref) : json(nullptr)}};
}

void from_json(const json& j, WordEntry& w) {
  w.word_id = j.at("word_id").get<std::string>();
  w.surface = j.at("surface").get<std::string>();
  w.phonemes = j.at("phonemes").get<std::vector<std::string>>();
  w.syllable_count = j.at("syllable_count").get<int>();
  const auto& img = j.contains("imageability") ? j.at("imageability") : json();
  w.imageability = img.is_null() ? std::nullopt : std::optional<double>(img.get<double>());
  w.senses = j.at("senses").get<std::vector<Sense>>();
  const auto& audio = j.contains("audio_ref") ? j.at("audio_ref") : json();
  w.audio_ref = audio.is_null() ? std::nullopt : std::optional<std::string>(audio.get<std::string>());
}

const Sense* WordEntry::find_sense(std::string_view sense_id) const {
  for (const auto& s : senses) {
    if (s.sense_id == sense_id) return &s;
  }
  return nullptr;
}

std::string to_string(const WordCategory& c) {
  std::string s = c.imageability_class == ImageabilityClass::kHigh ? "high" : "low";
  s += c.length_class == LengthClass::kShort ? "/short" : "/long";
  return s;
}

WordCategory classify_word(const WordEntry& entry, double imageability_cutoff, int syllable_cutoff) {
  WordCategory c{};
  c.imageability_class = entry.imageability && *entry.imageability >= imageability_cutoff ? ImageabilityClass::kHigh
                                                                                         : ImageabilityClass::kLow;
  c.length_class = entry.syllable_count <= syllable_cutoff ? LengthClass::kShort : LengthClass::kLong;
  return c;
}

namespace {

// Returns a reason string when the entry breaks an invariant, empty otherwise.
std::string invariant_violation(const WordEntry& w, const Profile* profile) {
  if (w.word_id.empty()) return "word_id is empty";
  if (w.surface.empty()) return "surface is empty";
  if (w.phonemes.empty()) return "phonemes is empty";
  for (const auto& p : w.phonemes) {
    if (p.empty()) return "empty phoneme token";
    if (profile && !profile->ipa_tokens.empty() && !profile->ipa_tokens.count(p)) {
      return "phoneme '" + p + "' not in profile inventory";
    }
  }
  if (w.senses.empty()) return "senses is empty";
  std::set<std::string> ids;
  for (const auto& s : w.senses) {
    if (s.sense_id.empty()) return "sense_id is empty";
    if (!ids.insert(s.sense_id).second) return "duplicate sense_id '" + s.sense_id + "'";
    if (s.gloss_l1.empty()) return "gloss_l1 is empty for sense '" + s.sense_id + "'";
  }
  if (w.syllable_count < 1) return "syllable_count must be >= 1";
  if (w.imageability && (*w.imageability < 100.0 || *w.imageability > 700.0)) {
    return "imageability outside [100, 700]";
  }
  return {};
}

}  // namespace

Lexicon::Lexicon(std::vector<WordEntry> entries, const Profile* profile) : entries_(std::move(entries)) {
  for (size_t i = 0; i < entries_.size(); ++i) {
    const auto& w = entries_[i];
    if (auto why = invariant_violation(w, profile); !why.empty()) {
      throw Error(ErrorCode::kParseError, "entry " + w.word_id + ": " + why,
                  json{{"line", i + 1}, {"reason", why}});
    }
    if (!by_id_.emplace(w.word_id, i).second) {
      throw Error(ErrorCode::kDuplicateWordId, "duplicate word_id '" + w.word_id + "'",
                  json{{"word_id", w.word_id}, {"line", i + 1}});
    }
    by_surface_.emplace(w.surface, i);
  }
}

Lexicon Lexicon::parse(std::string_view text, const Profile* profile) {
  std::vector<WordEntry> entries;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    WordEntry w;
    try {
      w = json::parse(line).get<WordEntry>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + e.what(),
                  json{{"line", line_no}, {"reason", e.what()}});
    }
    if (auto why = invariant_violation(w, profile); !why.empty()) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + why,
                  json{{"line", line_no}, {"reason", why}});
    }
    if (!seen.insert(w.word_id).second) {
      throw Error(ErrorCode::kDuplicateWordId, "duplicate word_id '" + w.word_id + "'",
                  json{{"word_id", w.word_id}, {"line", line_no}});
    }
    entries.push_back(std::move(w));
  }
  return Lexicon(std::move(entries), profile);
}

Lexicon Lexicon::load(const std::filesystem::path& path, const Profile* profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open lexicon " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), profile);
}

std::string Lexicon::to_jsonl() const {
  std::string out;
  for (const auto& w : entries_) {
    out += json(w).dump(-1, ' ', false);
    out += '\n';
  }
  return out;
}

const WordEntry* Lexicon::find(std::string_view word_id) const {
  auto it = by_id_.find(std::string(word_id));
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

const WordEntry* Lexicon::find_surface(std::string_view surface) const {
  auto it = by_surface_.find(std::string(surface));
  return it == by_surface_.end() ? nullptr : &entries_[it->second];
}

std::vector<const WordEntry*> Lexicon::search(std::string_view query, size_t limit) const {
  std::vector<const WordEntry*> prefix, inner;
  for (const auto& w : entries_) {
    auto pos = w.surface.find(query);
    if (pos == 0) {
      prefix.push_back(&w);
    } else if (pos != std::string::npos) {
      inner.push_back(&w);
    }
  }
  prefix.insert(prefix.end(), inner.begin(), inner.end());
  if (prefix.size() > limit) prefix.resize(limit);
  return prefix;
}

std::vector<std::string> syllable_warnings(const Lexicon& lexicon, const Profile& profile) {
  std::vector<std::string> out;
  for (const auto& w : lexicon.entries()) {
    int nuclei = 0;
    for (const auto& p : w.phonemes) nuclei += profile.vowel_tokens.count(p) ? 1 : 0;
    if (nuclei != w.syllable_count) {
      out.push_back(w.word_id + ": syllable_count " + std::to_string(w.syllable_count) + " but " +
                    std::to_string(nuclei) + " vowel nuclei");
    }
  }
  return out;
}

std::vector<std::string> screen_words(const std::vector<std::string>& candidates,
                                      const ScreeningResponses& responses) {
  std::vector<std::string> kept;
  for (const auto& word : candidates) {
    bool all_unknown = true;
    for (const auto& [participant, answers] : responses) {
      auto it = answers.find(word);
      if (it == answers.end()) {
        throw Error(ErrorCode::kMissingResponse, "no response from " + participant + " for " + word,
                    json{{"word_id", word}, {"participant", participant}});
      }
      all_unknown = all_unknown && it->second == Familiarity::kUnknown;
    }
    if (all_unknown) kept.push_back(word);
  }
  return kept;
}

}  // namespace wordcraft
