#include "wordcraft/keyword_selection.hpp"

#include <algorithm>
#include <set>

#include "reducers.hpp"

namespace wordcraft {

std::string segment_ipa(const SessionState& state, const Segment& segment) {
  std::string out;
  for (int i = segment.start; i < segment.end && i < static_cast<int>(state.word.phonemes.size()); ++i) {
    out += state.word.phonemes[i];
  }
  return out;
}

std::string chain_text(const std::vector<std::string>& chain) {
  std::string out;
  for (size_t i = 0; i < chain.size(); ++i) {
    if (i) out += " → ";
    out += chain[i];
  }
  return out;
}

namespace detail {

void apply_brush_segment(SessionState& s, const SessionEvent& e) {
  const auto& p = e.payload;
  const int start = p.at("start").get<int>();
  const int end = p.at("end").get<int>();
  const int n = static_cast<int>(s.word.phonemes.size());
  if (start < 0 || start >= end || end > n) {
    throw Error(ErrorCode::kRangeError,
                "segment [" + std::to_string(start) + "," + std::to_string(end) + ") outside [0," + std::to_string(n) + ")",
                json{{"start", start}, {"end", end}, {"phoneme_count", n}});
  }
  for (const auto& seg : s.segments) {
    if (start < seg.end && seg.start < end) {
      throw Error(ErrorCode::kOverlapError, "segment overlaps " + seg.segment_id,
                  json{{"start", start}, {"end", end}, {"conflicts_with", seg.segment_id}});
    }
  }
  std::set<int> used;
  for (const auto& seg : s.segments) used.insert(seg.color_index);
  const int created = static_cast<int>(s.segments.size() + s.archived_segments.size());
  int color = -1;
  for (int k = 0; k < kPaletteSize; ++k) {
    int candidate = (created + k) % kPaletteSize;
    if (!used.count(candidate)) {
      color = candidate;
      break;
    }
  }
  if (color < 0) throw Error(ErrorCode::kPaletteExhausted, "all palette colors are held by active segments");
  auto id = str(p, "segment_id");
  claim_id(s, id);
  s.segments.push_back(Segment{id, start, end, color, "active"});
}

void apply_clear_segments(SessionState& s, const SessionEvent& e) {
  for (auto& seg : s.segments) {
    auto it = std::find_if(s.choices.begin(), s.choices.end(), [&](const auto& c) { return c.segment_id == seg.segment_id; });
    if (it != s.choices.end()) {
      archive_concept_node(s, it->node_id, e.at);
      for (auto& a : s.tree.anchors) {
        if (a.anchor_id == it->keyword_id) a.archived = true;
      }
      s.archived_choices.push_back(std::move(*it));
      s.choices.erase(it);
    }
    seg.state = "archived";
    s.archived_segments.push_back(seg);
  }
  s.segments.clear();
}

void apply_add_semantic_node(SessionState& s, const SessionEvent& e) {
  const auto& p = e.payload;
  SemanticNode node;
  node.node_id = str(p, "node_id");
  node.anchor_id = str(p, "anchor_id");
  node.parent_id = str(p, "parent_id");
  node.concept_text = trim(str(p, "concept"));
  node.cue = str(p, "cue");
  node.translation = str(p, "translation");
  node.origin = str(p, "origin");
  const auto* anchor = s.find_anchor(node.anchor_id);
  if (!anchor || anchor->archived) {
    throw Error(ErrorCode::kUnknownAnchor, "unknown anchor '" + node.anchor_id + "'", json{{"anchor_id", node.anchor_id}});
  }
  if (node.concept_text.empty()) throw Error(ErrorCode::kInvalidArgument, "concept must be non-empty");
  if (node.origin != "user" && node.origin != "suggested") {
    throw Error(ErrorCode::kInvalidArgument, "origin must be user or suggested");
  }
  node.depth = 1;
  if (!node.parent_id.empty()) {
    const auto* parent = s.find_semantic_node(node.parent_id);
    if (!parent || parent->anchor_id != node.anchor_id) {
      throw Error(ErrorCode::kUnknownNode, "parent '" + node.parent_id + "' is not under anchor " + node.anchor_id,
                  json{{"node_id", node.parent_id}});
    }
    node.depth = parent->depth + 1;
  }
  if (node.depth > kMaxTreeDepth) {
    throw Error(ErrorCode::kDepthExceeded, "semantic tree is limited to depth " + std::to_string(kMaxTreeDepth),
                json{{"parent_id", node.parent_id}, {"max_depth", kMaxTreeDepth}});
  }
  for (const auto& other : s.tree.nodes) {
    if (other.anchor_id == node.anchor_id && other.concept_text == node.concept_text) {
      throw Error(ErrorCode::kDuplicateConcept, "concept '" + node.concept_text + "' already under " + node.anchor_id,
                  json{{"concept", node.concept_text}, {"existing_node_id", other.node_id}});
    }
  }
  claim_id(s, node.node_id);
  s.tree.nodes.push_back(std::move(node));
}

void apply_keyword_batch(SessionState& s, const SessionEvent& e) {
  auto batch = e.payload.get<KeywordBatch>();
  if (!s.find_segment(batch.segment_id)) {
    throw Error(ErrorCode::kUnknownSegment, "no active segment '" + batch.segment_id + "'");
  }
  if (batch.cards.size() != kCardsPerBatch) throw Error(ErrorCode::kFormatError, "a batch holds exactly 4 cards");
  claim_id(s, batch.batch_id);
  for (const auto& c : batch.cards) claim_id(s, c.card_id);
  s.batches.push_back(std::move(batch));
}

void apply_select_keyword(SessionState& s, const SessionEvent& e) {
  const auto& p = e.payload;
  KeywordChoice choice;
  choice.keyword_id = str(p, "keyword_id");
  choice.segment_id = str(p, "segment_id");
  choice.keyword = trim(str(p, "keyword"));
  choice.explanation = str(p, "explanation");
  choice.origin = str(p, "origin");
  choice.card_id = str(p, "card_id");
  choice.chain = p.at("chain").get<std::vector<std::string>>();
  choice.node_id = str(p, "node_id");
  if (!s.find_segment(choice.segment_id)) {
    throw Error(ErrorCode::kUnknownSegment, "no active segment '" + choice.segment_id + "'",
                json{{"segment_id", choice.segment_id}});
  }
  if (s.choice_for_segment(choice.segment_id)) {
    throw Error(ErrorCode::kInvalidArgument, "segment already has a keyword; replace it instead");
  }
  if (choice.keyword.empty()) throw Error(ErrorCode::kInvalidArgument, "keyword must be non-empty");
  const auto* meaning = s.map.meaning_node();
  if (!meaning) throw Error(ErrorCode::kUnknownNode, "session has no meaning node");
  const std::string meaning_id = meaning->node_id;

  claim_id(s, choice.keyword_id);
  add_concept_node(s, choice.node_id, "keyword", choice.keyword, choice.keyword_id);
  add_link(s, str(p, "link_id"), choice.node_id, meaning_id, chain_text(choice.chain));
  s.tree.anchors.push_back(Anchor{choice.keyword_id, choice.keyword, false});
  s.choices.push_back(std::move(choice));
}

}  // namespace detail

Segment brush_segment(Session& session, int start, int end) {
  auto id = session.next_id("seg");
  session.commit("brush_segment", json{{"segment_id", id}, {"start", start}, {"end", end}});
  return *session.state().find_segment(id);
}

void clear_segments(Session& session) {
  json cleared = json::array();
  for (const auto& seg : session.state().segments) cleared.push_back(seg.segment_id);
  session.commit("clear_segments", json{{"segment_ids", cleared}});
}

SemanticNode add_semantic_node(Session& session, const NewSemanticNode& node) {
  auto id = session.next_id("sn");
  session.commit("add_semantic_node", json{{"node_id", id},
                                           {"anchor_id", node.anchor_id},
                                           {"parent_id", node.parent_id},
                                           {"concept", node.concept_text},
                                           {"cue", node.cue},
                                           {"translation", node.translation},
                                           {"origin", node.origin}});
  return *session.state().find_semantic_node(id);
}

std::vector<SemanticNode> suggest_semantic_nodes(const Session& session, const Gateway& gateway,
                                                 std::string_view anchor_id, int count) {
  const auto& s = session.state();
  const auto* anchor = s.find_anchor(anchor_id);
  if (!anchor || anchor->archived) {
    throw Error(ErrorCode::kUnknownAnchor, "unknown anchor '" + std::string(anchor_id) + "'", json{{"anchor_id", anchor_id}});
  }
  if (count <= 0) throw Error(ErrorCode::kInvalidArgument, "count must be positive");
  std::set<std::string> existing;
  json existing_list = json::array();
  for (const auto& n : s.tree.nodes) {
    if (n.anchor_id == anchor_id) {
      existing.insert(n.concept_text);
      existing_list.push_back(n.concept_text);
    }
  }
  auto payload = gateway.call_text(template_ids::kSemanticAssoc, json{{"target", anchor->label}, {"existing", existing_list}});
  std::vector<SemanticNode> out;
  for (const auto& item : payload) {
    auto concept_text = item.at("concept").get<std::string>();
    if (existing.count(concept_text)) continue;
    SemanticNode n;
    n.anchor_id = std::string(anchor_id);
    n.concept_text = concept_text;
    n.cue = item.value("cue", std::string());
    n.translation = item.value("translation", std::string());
    n.origin = "suggested";
    n.depth = 1;
    out.push_back(std::move(n));
    if (static_cast<int>(out.size()) == count) break;
  }
  return out;
}

KeywordBatch suggest_keywords(Session& session, const Gateway& gateway, std::string_view segment_id,
                              const std::vector<std::string>& selected_node_ids) {
  const auto& s = session.state();
  const auto* seg = s.find_segment(segment_id);
  if (!seg) {
    throw Error(ErrorCode::kUnknownSegment, "no active segment '" + std::string(segment_id) + "'",
                json{{"segment_id", segment_id}});
  }
  json related = json::array();
  for (const auto& id : selected_node_ids) {
    const auto* node = s.find_semantic_node(id);
    if (!node) throw Error(ErrorCode::kUnknownNode, "unknown semantic node '" + id + "'", json{{"node_id", id}});
    related.push_back(node->concept_text);
  }
  const auto ipa = segment_ipa(s, *seg);

  auto candidates = gateway.call_text(template_ids::kKeywordGen, json{{"ipa", ipa}, {"related", related}});

  std::set<std::string> shown;
  json exclude = json::array();
  for (const auto& b : s.batches) {
    for (const auto& c : b.cards) {
      if (shown.insert(c.keyword).second) exclude.push_back(c.keyword);
    }
  }
  auto reviewed = gateway.call_text(
      template_ids::kKeywordReview,
      json{{"ipa", ipa}, {"related", related}, {"candidates", candidates}, {"exclude", exclude}}, std::nullopt,
      [&](const json& payload) {
        for (const auto& item : payload) {
          auto kw = item.at("keyword").get<std::string>();
          if (shown.count(kw)) {
            throw Error(ErrorCode::kFormatError, "reviewer returned previously shown keyword '" + kw + "'");
          }
        }
      });

  KeywordBatch batch;
  batch.batch_id = session.next_id("batch");
  batch.segment_id = std::string(segment_id);
  int offset = 1;
  for (const auto& item : reviewed) {
    KeywordCard card;
    card.card_id = session.next_id("card", offset++);
    card.keyword = item.at("keyword").get<std::string>();
    card.explanation = item.at("explanation").get<std::string>();
    card.reasoning = item.at("reasoning").get<std::string>();
    card.source_segment_id = batch.segment_id;
    card.source_node_ids = selected_node_ids;
    card.batch_id = batch.batch_id;
    batch.cards.push_back(std::move(card));
  }
  session.commit("keyword_batch", json(batch));
  return batch;
}

namespace {

const KeywordCard* find_card(const SessionState& s, std::string_view card_id) {
  for (const auto& b : s.batches) {
    for (const auto& c : b.cards) {
      if (c.card_id == card_id) return &c;
    }
  }
  return nullptr;
}

// Anchor label followed by the concepts on the tree path ending at the last
// requested node. Every requested node must lie on that path.
std::vector<std::string> resolve_chain(const SessionState& s, const std::vector<std::string>& ids) {
  if (ids.empty()) return {};
  for (const auto& id : ids) {
    if (!s.find_semantic_node(id)) throw Error(ErrorCode::kUnknownNode, "unknown semantic node '" + id + "'", json{{"node_id", id}});
  }
  std::vector<const SemanticNode*> path;
  for (const auto* n = s.find_semantic_node(ids.back()); n; n = n->parent_id.empty() ? nullptr : s.find_semantic_node(n->parent_id)) {
    path.push_back(n);
  }
  std::reverse(path.begin(), path.end());
  for (const auto& id : ids) {
    if (std::none_of(path.begin(), path.end(), [&](const auto* n) { return n->node_id == id; })) {
      throw Error(ErrorCode::kInvalidArgument, "chain nodes must lie on one root-to-node path", json{{"node_id", id}});
    }
  }
  const auto* anchor = s.find_anchor(path.front()->anchor_id);
  std::vector<std::string> chain;
  chain.push_back(anchor ? anchor->label : path.front()->anchor_id);
  for (const auto* n : path) chain.push_back(n->concept_text);
  return chain;
}

}  // namespace

KeywordChoice select_keyword(Session& session, std::string_view segment_id, const KeywordSource& source,
                             const std::vector<std::string>& chain_node_ids) {
  const auto& s = session.state();
  if (!s.find_segment(segment_id)) {
    throw Error(ErrorCode::kUnknownSegment, "no active segment '" + std::string(segment_id) + "'",
                json{{"segment_id", segment_id}});
  }
  KeywordReplacement r;
  if (!source.card_id.empty()) {
    const auto* card = find_card(s, source.card_id);
    if (!card) throw Error(ErrorCode::kUnknownCard, "unknown keyword card '" + source.card_id + "'", json{{"card_id", source.card_id}});
    r = {card->keyword, card->explanation, "card", card->card_id, {}};
  } else {
    r = {trim(source.keyword), source.explanation, "user", {}, {}};
    if (r.keyword.empty()) throw Error(ErrorCode::kInvalidArgument, "keyword must be non-empty");
  }
  r.chain = resolve_chain(s, chain_node_ids);

  if (const auto* existing = s.choice_for_segment(segment_id)) {
    return propagate_keyword_change(session, existing->keyword_id, r);
  }
  auto keyword_id = session.next_id("kw");
  json payload{{"keyword_id", keyword_id},
               {"segment_id", segment_id},
               {"keyword", r.keyword},
               {"explanation", r.explanation},
               {"origin", r.origin},
               {"card_id", r.card_id},
               {"chain", r.chain},
               {"node_id", session.next_id("cn", 1)},
               {"link_id", session.next_id("link", 2)}};
  session.commit("select_keyword", std::move(payload));
  return *session.state().find_choice(keyword_id);
}

}  // namespace wordcraft
