#include "wordcraft/session.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "reducers.hpp"

namespace wordcraft {

// ---------------------------------------------------------------------------
// Model serialization and lookups
// ---------------------------------------------------------------------------

void to_json(json& j, const SemanticNode& n) {
  j = json{{"node_id", n.node_id},         {"anchor_id", n.anchor_id}, {"parent_id", n.parent_id},
           {"concept", n.concept_text},    {"cue", n.cue},             {"translation", n.translation},
           {"origin", n.origin},           {"depth", n.depth}};
}

void from_json(const json& j, SemanticNode& n) {
  j.at("node_id").get_to(n.node_id);
  j.at("anchor_id").get_to(n.anchor_id);
  j.at("parent_id").get_to(n.parent_id);
  j.at("concept").get_to(n.concept_text);
  j.at("cue").get_to(n.cue);
  j.at("translation").get_to(n.translation);
  j.at("origin").get_to(n.origin);
  j.at("depth").get_to(n.depth);
}

void to_json(json& j, const SessionState& s) {
  j = json::object();
  j["session_id"] = s.session_id;
  j["word"] = s.word;
  j["sense"] = s.sense;
  j["stage"] = s.stage;
  j["segments"] = s.segments;
  j["archived_segments"] = s.archived_segments;
  j["choices"] = s.choices;
  j["archived_choices"] = s.archived_choices;
  j["batches"] = s.batches;
  j["tree"] = s.tree;
  j["map"] = s.map;
  j["canvas"] = s.canvas;
  j["images"] = s.images;
  j["archive"] = s.archive;
  j["started_at"] = s.started_at;
  j["total_active_ms"] = s.total_active_ms;
  j["id_counter"] = s.id_counter;
  j["card_id"] = s.card_id;
}

void from_json(const json& j, SessionState& s) {
  j.at("session_id").get_to(s.session_id);
  j.at("word").get_to(s.word);
  j.at("sense").get_to(s.sense);
  j.at("stage").get_to(s.stage);
  j.at("segments").get_to(s.segments);
  j.at("archived_segments").get_to(s.archived_segments);
  j.at("choices").get_to(s.choices);
  j.at("archived_choices").get_to(s.archived_choices);
  j.at("batches").get_to(s.batches);
  j.at("tree").get_to(s.tree);
  j.at("map").get_to(s.map);
  j.at("canvas").get_to(s.canvas);
  j.at("images").get_to(s.images);
  s.archive = j.at("archive").get<std::vector<json>>();
  j.at("started_at").get_to(s.started_at);
  j.at("total_active_ms").get_to(s.total_active_ms);
  j.at("id_counter").get_to(s.id_counter);
  j.at("card_id").get_to(s.card_id);
}

namespace {
template <class Vec, class Pred>
auto find_in(Vec& v, Pred pred) -> decltype(&v[0]) {
  auto it = std::find_if(v.begin(), v.end(), pred);
  return it == v.end() ? nullptr : &*it;
}
}  // namespace

const ConceptNode* AssociationMap::find_node(std::string_view id) const {
  return find_in(nodes, [&](const auto& n) { return n.node_id == id; });
}
ConceptNode* AssociationMap::find_node(std::string_view id) {
  return find_in(nodes, [&](const auto& n) { return n.node_id == id; });
}
const AssociationLink* AssociationMap::find_link(std::string_view id) const {
  return find_in(links, [&](const auto& l) { return l.link_id == id; });
}
AssociationLink* AssociationMap::find_link(std::string_view id) {
  return find_in(links, [&](const auto& l) { return l.link_id == id; });
}
const AssociationLink* AssociationMap::find_link_between(std::string_view x, std::string_view y) const {
  auto lo = std::min(x, y);
  auto hi = std::max(x, y);
  return find_in(links, [&](const auto& l) { return l.a == lo && l.b == hi; });
}
const ConceptNode* AssociationMap::meaning_node() const {
  return find_in(nodes, [](const auto& n) { return n.kind == "meaning"; });
}

const CanvasElement* CanvasModel::find_element(std::string_view id) const {
  return find_in(elements, [&](const auto& e) { return e.element_id == id; });
}
CanvasElement* CanvasModel::find_element(std::string_view id) {
  return find_in(elements, [&](const auto& e) { return e.element_id == id; });
}

const Segment* SessionState::find_segment(std::string_view id) const {
  return find_in(segments, [&](const auto& s) { return s.segment_id == id; });
}
const KeywordChoice* SessionState::find_choice(std::string_view id) const {
  return find_in(choices, [&](const auto& c) { return c.keyword_id == id; });
}
const KeywordChoice* SessionState::choice_for_segment(std::string_view id) const {
  return find_in(choices, [&](const auto& c) { return c.segment_id == id; });
}
const Anchor* SessionState::find_anchor(std::string_view id) const {
  return find_in(tree.anchors, [&](const auto& a) { return a.anchor_id == id; });
}
const SemanticNode* SessionState::find_semantic_node(std::string_view id) const {
  return find_in(tree.nodes, [&](const auto& n) { return n.node_id == id; });
}

void to_json(json& j, const SessionEvent& e) {
  j = json{{"seq", e.seq}, {"kind", e.kind}, {"payload", e.payload}, {"at", e.at}};
}

void from_json(const json& j, SessionEvent& e) {
  j.at("seq").get_to(e.seq);
  j.at("kind").get_to(e.kind);
  e.payload = j.at("payload");
  j.at("at").get_to(e.at);
}

// ---------------------------------------------------------------------------
// Shared reducer helpers
// ---------------------------------------------------------------------------

namespace detail {

std::string str(const json& payload, const char* key) {
  if (!payload.contains(key) || !payload.at(key).is_string()) return {};
  return payload.at(key).get<std::string>();
}

void claim_id(SessionState& s, std::string_view id) {
  auto dash = id.rfind('-');
  if (dash == std::string_view::npos) return;
  int64_t n = 0;
  for (char c : id.substr(dash + 1)) {
    if (c < '0' || c > '9') return;
    n = n * 10 + (c - '0');
  }
  s.id_counter = std::max(s.id_counter, n);
}

ConceptNode& add_concept_node(SessionState& s, std::string node_id, std::string kind, std::string label,
                              std::string source_ref) {
  claim_id(s, node_id);
  ConceptNode node{std::move(node_id), std::move(kind), std::move(label), s.map.colors_assigned % kPaletteSize,
                   std::move(source_ref)};
  ++s.map.colors_assigned;
  s.map.nodes.push_back(std::move(node));
  return s.map.nodes.back();
}

AssociationLink& add_link(SessionState& s, std::string link_id, std::string x, std::string y, std::string chain_text) {
  claim_id(s, link_id);
  if (y < x) std::swap(x, y);
  s.map.links.push_back(AssociationLink{std::move(link_id), std::move(x), std::move(y), ChainNode{std::move(chain_text)}, {}});
  return s.map.links.back();
}

void archive_element(SessionState& s, std::string_view element_id, int64_t at) {
  auto& c = s.canvas;
  auto it = std::find_if(c.elements.begin(), c.elements.end(), [&](const auto& e) { return e.element_id == element_id; });
  if (it == c.elements.end()) return;
  json relations = json::array();
  std::erase_if(c.relations, [&](const CanvasRelation& r) {
    if (r.a != element_id && r.b != element_id) return false;
    relations.push_back(r);
    return true;
  });
  s.archive.push_back({{"kind", "element"}, {"at", at}, {"element", *it}, {"relations", relations}});
  c.elements.erase(it);
}

void archive_concept_node(SessionState& s, std::string_view node_id, int64_t at) {
  auto& m = s.map;
  auto it = std::find_if(m.nodes.begin(), m.nodes.end(), [&](const auto& n) { return n.node_id == node_id; });
  if (it == m.nodes.end()) return;
  json links = json::array();
  std::erase_if(m.links, [&](const AssociationLink& l) {
    if (l.a != node_id && l.b != node_id) return false;
    links.push_back(l);
    return true;
  });
  s.archive.push_back({{"kind", "concept_node"}, {"at", at}, {"node", *it}, {"links", links}});
  m.nodes.erase(it);

  std::vector<std::string> emptied;
  for (auto& e : s.canvas.elements) {
    std::erase(e.tags, std::string(node_id));
    if (e.tags.empty()) emptied.push_back(e.element_id);
  }
  for (const auto& id : emptied) archive_element(s, id, at);
}

namespace {

void apply_create(SessionState& s, const SessionEvent& e) {
  const auto& p = e.payload;
  s = SessionState{};
  s.session_id = p.at("session_id").get<std::string>();
  s.word = p.at("word").get<WordEntry>();
  s.sense = p.at("sense").get<Sense>();
  s.stage = Stage::kOverview;
  s.started_at = e.at;
  s.tree.anchors.push_back(Anchor{std::string(kMeaningAnchor), s.word.surface, false});
  add_concept_node(s, str(p, "meaning_node_id"), "meaning", s.sense.gloss_l1, s.sense.sense_id);
}

void apply_tick(SessionState& s, const SessionEvent& e) {
  auto delta = e.payload.at("delta_ms").get<int64_t>();
  if (delta < 0) throw Error(ErrorCode::kInvalidArgument, "delta_ms must be >= 0");
  s.total_active_ms += delta;
}

void apply_propagate(SessionState& s, const SessionEvent& e) {
  const auto& p = e.payload;
  auto id = str(p, "keyword_id");
  auto it = std::find_if(s.choices.begin(), s.choices.end(), [&](const auto& c) { return c.keyword_id == id; });
  if (it == s.choices.end()) {
    throw Error(ErrorCode::kUnknownKeyword, "no selected keyword '" + id + "'", json{{"keyword_id", id}});
  }
  auto keyword = trim(str(p, "keyword"));
  if (keyword.empty()) throw Error(ErrorCode::kInvalidArgument, "keyword must be non-empty");
  it->keyword = keyword;
  it->explanation = str(p, "explanation");
  it->origin = str(p, "origin");
  it->card_id = str(p, "card_id");
  it->chain = p.at("chain").get<std::vector<std::string>>();
  if (auto* node = s.map.find_node(it->node_id)) node->label = keyword;
  for (auto& a : s.tree.anchors) {
    if (a.anchor_id == id) a.label = keyword;
  }
}

struct KindInfo {
  Reducer fn;
  std::optional<Stage> stage;
};

const std::unordered_map<std::string, KindInfo>& reducer_table() {
  static const std::unordered_map<std::string, KindInfo> table{
      {"create_session", {apply_create, Stage::kOverview}},
      {"tick_active", {apply_tick, std::nullopt}},
      {"propagate_keyword_change", {apply_propagate, std::nullopt}},
      {"brush_segment", {apply_brush_segment, Stage::kKeywordSelection}},
      {"clear_segments", {apply_clear_segments, Stage::kKeywordSelection}},
      {"add_semantic_node", {apply_add_semantic_node, Stage::kKeywordSelection}},
      {"keyword_batch", {apply_keyword_batch, Stage::kKeywordSelection}},
      {"select_keyword", {apply_select_keyword, Stage::kKeywordSelection}},
      {"upsert_link", {apply_upsert_link, Stage::kAssociation}},
      {"delete_link", {apply_delete_link, Stage::kAssociation}},
      {"set_chain", {apply_set_chain, Stage::kAssociation}},
      {"add_note", {apply_add_note, Stage::kAssociation}},
      {"set_association", {apply_set_association, Stage::kAssociation}},
      {"add_element", {apply_add_element, Stage::kImagery}},
      {"update_element", {apply_update_element, Stage::kImagery}},
      {"delete_element", {apply_delete_element, Stage::kImagery}},
      {"add_relation", {apply_add_relation, Stage::kImagery}},
      {"delete_relation", {apply_delete_relation, Stage::kImagery}},
      {"attach_image", {apply_attach_image, Stage::kImagery}},
      {"record_word_card", {apply_record_word_card, Stage::kRecorded}},
  };
  return table;
}

}  // namespace
}  // namespace detail

void apply_event(SessionState& state, const SessionEvent& event) {
  const auto& table = detail::reducer_table();
  auto it = table.find(event.kind);
  if (it == table.end()) throw Error(ErrorCode::kInvalidArgument, "unknown event kind '" + event.kind + "'");
  if (state.stage == Stage::kRecorded) {
    throw Error(ErrorCode::kSessionClosed, "session " + state.session_id + " is recorded");
  }
  it->second.fn(state, event);
  if (it->second.stage) state.stage = *it->second.stage;
}

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

Session Session::create(const Lexicon& lexicon, std::string session_id, std::string_view word_id,
                        std::string_view sense_id, std::shared_ptr<Clock> clock) {
  const auto* word = lexicon.find(word_id);
  if (!word) throw Error(ErrorCode::kUnknownWord, "unknown word '" + std::string(word_id) + "'", json{{"word_id", word_id}});
  const auto* sense = word->find_sense(sense_id);
  if (!sense) {
    throw Error(ErrorCode::kUnknownSense, "word '" + std::string(word_id) + "' has no sense '" + std::string(sense_id) + "'",
                json{{"word_id", word_id}, {"sense_id", sense_id}});
  }
  Session s;
  s.clock_ = clock ? std::move(clock) : std::make_shared<SystemClock>();
  SessionEvent e{0, "create_session",
                 json{{"session_id", session_id}, {"word", *word}, {"sense", *sense}, {"meaning_node_id", "cn-1"}},
                 s.now()};
  apply_event(s.state_, e);
  s.events_.push_back(std::move(e));
  return s;
}

Session Session::replay(const std::vector<SessionEvent>& events, std::shared_ptr<Clock> clock) {
  Session s;
  s.clock_ = clock ? std::move(clock) : std::make_shared<SystemClock>();
  for (size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.seq != static_cast<int64_t>(i)) {
      throw Error(ErrorCode::kParseError, "event log out of sequence at " + std::to_string(i), json{{"seq", e.seq}});
    }
    if (i == 0 && e.kind != "create_session") throw Error(ErrorCode::kParseError, "event log must start with create_session");
    apply_event(s.state_, e);
    s.events_.push_back(e);
  }
  return s;
}

int64_t Session::now() const { return clock_ ? clock_->now_ms() : SystemClock().now_ms(); }

const SessionEvent& Session::commit(std::string kind, json payload) {
  if (closed()) throw Error(ErrorCode::kSessionClosed, "session " + id() + " is recorded", json{{"session_id", id()}});
  SessionEvent e{static_cast<int64_t>(events_.size()), std::move(kind), std::move(payload), now()};
  SessionState next = state_;
  apply_event(next, e);
  state_ = std::move(next);
  events_.push_back(std::move(e));
  return events_.back();
}

std::string Session::next_id(std::string_view prefix, int offset) const {
  return std::string(prefix) + "-" + std::to_string(state_.id_counter + 1 + offset);
}

void tick_active(Session& session, int64_t delta_ms) {
  if (delta_ms < 0) throw Error(ErrorCode::kInvalidArgument, "delta_ms must be >= 0", json{{"delta_ms", delta_ms}});
  session.commit("tick_active", json{{"delta_ms", delta_ms}});
}

KeywordChoice propagate_keyword_change(Session& session, std::string_view old_keyword_id,
                                       const KeywordReplacement& replacement) {
  const auto* old = session.state().find_choice(old_keyword_id);
  if (!old) {
    throw Error(ErrorCode::kUnknownKeyword, "no selected keyword '" + std::string(old_keyword_id) + "'",
                json{{"keyword_id", old_keyword_id}});
  }
  json payload{{"keyword_id", old_keyword_id},
               {"keyword", replacement.keyword},
               {"explanation", replacement.explanation},
               {"origin", replacement.origin},
               {"card_id", replacement.card_id},
               {"chain", replacement.chain},
               {"previous", *old}};
  session.commit("propagate_keyword_change", std::move(payload));
  return *session.state().find_choice(old_keyword_id);
}

json snapshot_json(const Session& session) {
  return json{{"state", session.state()}, {"event_count", session.events().size()}};
}

// ---------------------------------------------------------------------------
// SessionStore
// ---------------------------------------------------------------------------

namespace fs = std::filesystem;

SessionStore::SessionStore(std::optional<fs::path> data_dir, std::shared_ptr<Clock> clock)
    : data_dir_(std::move(data_dir)), clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()) {}

void SessionStore::load_all() {
  if (!data_dir_) return;
  auto root = *data_dir_ / "sessions";
  if (!fs::exists(root)) return;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::lock_guard lock(mu_);
  for (const auto& dir : dirs) {
    std::ifstream in(dir / "events.jsonl");
    std::vector<SessionEvent> events;
    std::string line;
    while (std::getline(in, line)) {
      if (!trim(line).empty()) events.push_back(json::parse(line).get<SessionEvent>());
    }
    if (events.empty()) continue;
    auto slot = std::make_shared<Slot>();
    slot->session = Session::replay(events, clock_);
    slot->persisted = events.size();
    const auto& id = slot->session.id();
    auto dash = id.rfind('-');
    if (dash != std::string::npos) next_seq_ = std::max(next_seq_, std::atoi(id.c_str() + dash + 1) + 1);
    slots_[id] = std::move(slot);
  }
}

std::string SessionStore::create(const Lexicon& lexicon, std::string_view word_id, std::string_view sense_id) {
  std::string id;
  {
    std::lock_guard lock(mu_);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s-%04d", next_seq_);
    id = buf;
  }
  auto slot = std::make_shared<Slot>();
  slot->session = Session::create(lexicon, id, word_id, sense_id, clock_);
  {
    std::lock_guard lock(mu_);
    ++next_seq_;
    slots_[id] = slot;
  }
  std::lock_guard lock(slot->mu);
  persist(*slot, 0);
  return id;
}

std::shared_ptr<SessionStore::Slot> SessionStore::find_slot(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = slots_.find(session_id);
  if (it == slots_.end()) {
    throw Error(ErrorCode::kUnknownSession, "unknown session '" + session_id + "'", json{{"session_id", session_id}});
  }
  return it->second;
}

Session SessionStore::snapshot(const std::string& session_id) const {
  auto slot = find_slot(session_id);
  std::lock_guard lock(slot->mu);
  return slot->session;
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : slots_) out.push_back(id);
  return out;
}

bool SessionStore::contains(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return slots_.count(session_id) > 0;
}

void SessionStore::persist(Slot& slot, size_t /*before*/) {
  const auto& events = slot.session.events();
  if (!data_dir_ || slot.persisted == events.size()) {
    slot.persisted = events.size();
    return;
  }
  try {
    auto dir = *data_dir_ / "sessions" / slot.session.id();
    fs::create_directories(dir);
    {
      std::ofstream out(dir / "events.jsonl", std::ios::app | std::ios::binary);
      for (size_t i = slot.persisted; i < events.size(); ++i) out << json(events[i]).dump() << '\n';
    }
    auto tmp = dir / "snapshot.json.tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << snapshot_json(slot.session).dump(2);
    }
    fs::rename(tmp, dir / "snapshot.json");
    slot.persisted = events.size();
  } catch (const std::exception& e) {
    std::cerr << "wordcraft: failed to persist session " << slot.session.id() << ": " << e.what() << '\n';
  }
}

}  // namespace wordcraft
