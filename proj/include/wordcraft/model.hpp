#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wordcraft/error.hpp"
#include "wordcraft/lexicon.hpp"

// Domain types shared by the session, keyword, map and canvas modules. All of
// them serialize to JSON with a fixed field order so snapshots are byte-stable.

namespace wordcraft {

inline constexpr int kPaletteSize = 8;
inline constexpr std::string_view kMeaningAnchor = "meaning";

enum class Stage { kOverview, kKeywordSelection, kAssociation, kImagery, kRecorded };

NLOHMANN_JSON_SERIALIZE_ENUM(Stage, {{Stage::kOverview, "overview"},
                                     {Stage::kKeywordSelection, "keyword_selection"},
                                     {Stage::kAssociation, "association"},
                                     {Stage::kImagery, "imagery"},
                                     {Stage::kRecorded, "recorded"}})

/// Half-open phoneme interval [start, end).
struct Segment {
  std::string segment_id;
  int start = 0;
  int end = 0;
  int color_index = 0;
  std::string state = "active";  // active | archived
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Segment, segment_id, start, end, color_index, state)

struct Anchor {
  std::string anchor_id;  // "meaning" or a keyword_id
  std::string label;
  bool archived = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Anchor, anchor_id, label, archived)

struct SemanticNode {
  std::string node_id;
  std::string anchor_id;
  std::string parent_id;  // empty: attached directly to the anchor
  std::string concept_text;
  std::string cue;
  std::string translation;
  std::string origin = "user";  // user | suggested
  int depth = 1;
};
void to_json(json& j, const SemanticNode& n);
void from_json(const json& j, SemanticNode& n);

struct SemanticTree {
  std::vector<Anchor> anchors;
  std::vector<SemanticNode> nodes;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SemanticTree, anchors, nodes)

struct KeywordCard {
  std::string card_id;
  std::string keyword;
  std::string explanation;
  std::string reasoning;
  std::string source_segment_id;
  std::vector<std::string> source_node_ids;
  std::string batch_id;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(KeywordCard, card_id, keyword, explanation, reasoning, source_segment_id,
                                   source_node_ids, batch_id)

struct KeywordBatch {
  std::string batch_id;
  std::string segment_id;
  std::vector<KeywordCard> cards;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(KeywordBatch, batch_id, segment_id, cards)

struct KeywordChoice {
  std::string keyword_id;
  std::string segment_id;
  std::string keyword;
  std::string explanation;
  std::string origin = "user";  // user | card
  std::string card_id;          // set when origin == card
  std::vector<std::string> chain;  // anchor label, then semantic concepts
  std::string node_id;             // keyword ConceptNode in the map
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(KeywordChoice, keyword_id, segment_id, keyword, explanation, origin, card_id, chain,
                                   node_id)

struct ConceptNode {
  std::string node_id;
  std::string kind;  // meaning | keyword
  std::string label;
  int color_index = 0;
  std::string source_ref;  // sense_id or keyword_id
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ConceptNode, node_id, kind, label, color_index, source_ref)

struct Note {
  std::string note_id;
  std::string text;
  int64_t created_at = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Note, note_id, text, created_at)

struct ChainNode {
  std::string text;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ChainNode, text)

/// Undirected; endpoints stored sorted (a < b).
struct AssociationLink {
  std::string link_id;
  std::string a;
  std::string b;
  ChainNode chain;
  std::vector<Note> notes;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AssociationLink, link_id, a, b, chain, notes)

struct AssociationMap {
  std::vector<ConceptNode> nodes;
  std::vector<AssociationLink> links;
  std::string association;  // learner's final association sentence
  int colors_assigned = 0;

  const ConceptNode* find_node(std::string_view node_id) const;
  ConceptNode* find_node(std::string_view node_id);
  const AssociationLink* find_link(std::string_view link_id) const;
  AssociationLink* find_link(std::string_view link_id);
  const AssociationLink* find_link_between(std::string_view x, std::string_view y) const;
  const ConceptNode* meaning_node() const;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AssociationMap, nodes, links, association, colors_assigned)

/// Normalized canvas rectangle; the unit square is the whole canvas.
struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;
  bool operator==(const BBox&) const = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BBox, x, y, w, h)

struct CanvasElement {
  std::string element_id;
  BBox bbox;
  std::vector<std::string> tags;  // concept node ids
  std::string description;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CanvasElement, element_id, bbox, tags, description)

struct CanvasRelation {
  std::string relation_id;
  std::string a;
  std::string b;
  std::string text;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CanvasRelation, relation_id, a, b, text)

struct CanvasModel {
  std::vector<CanvasElement> elements;
  std::vector<CanvasRelation> relations;

  const CanvasElement* find_element(std::string_view element_id) const;
  CanvasElement* find_element(std::string_view element_id);
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CanvasModel, elements, relations)

struct GeneratedImage {
  std::string image_ref;  // relative to the data dir
  std::string job_id;
  std::string style;
  int width = 0;
  int height = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GeneratedImage, image_ref, job_id, style, width, height)

struct SessionState {
  std::string session_id;
  WordEntry word;
  Sense sense;
  Stage stage = Stage::kOverview;
  std::vector<Segment> segments;
  std::vector<Segment> archived_segments;
  std::vector<KeywordChoice> choices;
  std::vector<KeywordChoice> archived_choices;
  std::vector<KeywordBatch> batches;
  SemanticTree tree;
  AssociationMap map;
  CanvasModel canvas;
  std::vector<GeneratedImage> images;
  std::vector<json> archive;  // removed map/canvas items, newest last
  int64_t started_at = 0;
  int64_t total_active_ms = 0;
  int64_t id_counter = 0;
  std::string card_id;

  const Segment* find_segment(std::string_view segment_id) const;
  const KeywordChoice* find_choice(std::string_view keyword_id) const;
  const KeywordChoice* choice_for_segment(std::string_view segment_id) const;
  const Anchor* find_anchor(std::string_view anchor_id) const;
  const SemanticNode* find_semantic_node(std::string_view node_id) const;
};
void to_json(json& j, const SessionState& s);
void from_json(const json& j, SessionState& s);

}  // namespace wordcraft
