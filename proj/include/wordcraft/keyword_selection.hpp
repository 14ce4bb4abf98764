#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wordcraft/gateway.hpp"
#include "wordcraft/session.hpp"

namespace wordcraft {

/// Semantic trees stop two levels below their anchor.
inline constexpr int kMaxTreeDepth = 2;
inline constexpr int kCardsPerBatch = 4;

/// Brushes phonemes [start, end) into a new active segment with the next free
/// palette slot. Throws kRangeError, kOverlapError, kPaletteExhausted.
Segment brush_segment(Session& session, int start, int end);

/// Archives every active segment together with its keyword choice; the
/// choice's concept node and links move to the session archive.
void clear_segments(Session& session);

struct NewSemanticNode {
  std::string anchor_id{kMeaningAnchor};
  std::string parent_id;  // empty: directly under the anchor
  std::string concept_text;
  std::string cue;
  std::string translation;
  std::string origin = "user";  // user | suggested (accepted suggestion)
};

/// Throws kUnknownAnchor, kUnknownNode, kDepthExceeded, kDuplicateConcept.
SemanticNode add_semantic_node(Session& session, const NewSemanticNode& node);

/// Provider-backed concept ideas for an anchor. Nothing is attached; callers
/// accept a candidate through add_semantic_node with origin "suggested".
/// Concepts already under the anchor are dropped; at most `count` returned.
std::vector<SemanticNode> suggest_semantic_nodes(const Session& session, const Gateway& gateway,
                                                 std::string_view anchor_id, int count);

/// Two-stage suggestion: an over-generating pass (keyword_gen, 10-20
/// candidates) then a reviewer pass (keyword_review, exactly 4). Keywords
/// shown earlier in the session are passed to the reviewer as exclusions and
/// rejected if echoed. Records the batch as an event.
KeywordBatch suggest_keywords(Session& session, const Gateway& gateway, std::string_view segment_id,
                              const std::vector<std::string>& selected_node_ids);

struct KeywordSource {
  std::string card_id;  // non-empty: take keyword and explanation from this card
  std::string keyword;
  std::string explanation;

  static KeywordSource from_card(std::string id) { return {std::move(id), {}, {}}; }
  static KeywordSource typed(std::string keyword, std::string explanation) {
    return {{}, std::move(keyword), std::move(explanation)};
  }
};

/// Stores the choice and seeds the map: a keyword concept node plus a link to
/// the meaning node whose chain text is the semantic chain joined by " → ".
/// `chain_node_ids` name a path in the tree (its last node is enough).
/// A segment that already has a choice is renamed via propagate_keyword_change.
/// Throws kUnknownSegment, kUnknownCard, kUnknownNode.
KeywordChoice select_keyword(Session& session, std::string_view segment_id, const KeywordSource& source,
                             const std::vector<std::string>& chain_node_ids = {});

/// Concatenated IPA tokens of a segment ("rɪnθ").
std::string segment_ipa(const SessionState& state, const Segment& segment);

/// Chain seed text: anchor label and concepts joined by " → ".
std::string chain_text(const std::vector<std::string>& chain);

}  // namespace wordcraft
