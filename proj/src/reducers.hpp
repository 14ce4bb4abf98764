#pragma once

// Per-module event handlers folded by apply_event(). Internal to the library.

#include "wordcraft/model.hpp"
#include "wordcraft/session.hpp"

namespace wordcraft::detail {

using Reducer = void (*)(SessionState&, const SessionEvent&);

// keyword selection
void apply_brush_segment(SessionState& s, const SessionEvent& e);
void apply_clear_segments(SessionState& s, const SessionEvent& e);
void apply_add_semantic_node(SessionState& s, const SessionEvent& e);
void apply_keyword_batch(SessionState& s, const SessionEvent& e);
void apply_select_keyword(SessionState& s, const SessionEvent& e);

// association map
void apply_upsert_link(SessionState& s, const SessionEvent& e);
void apply_delete_link(SessionState& s, const SessionEvent& e);
void apply_set_chain(SessionState& s, const SessionEvent& e);
void apply_add_note(SessionState& s, const SessionEvent& e);
void apply_set_association(SessionState& s, const SessionEvent& e);

// imagery canvas
void apply_add_element(SessionState& s, const SessionEvent& e);
void apply_update_element(SessionState& s, const SessionEvent& e);
void apply_delete_element(SessionState& s, const SessionEvent& e);
void apply_add_relation(SessionState& s, const SessionEvent& e);
void apply_delete_relation(SessionState& s, const SessionEvent& e);
void apply_attach_image(SessionState& s, const SessionEvent& e);
void apply_record_word_card(SessionState& s, const SessionEvent& e);

/// Advances the id counter past `id` ("<prefix>-<n>").
void claim_id(SessionState& s, std::string_view id);

/// Creates a keyword concept node with the next palette color.
ConceptNode& add_concept_node(SessionState& s, std::string node_id, std::string kind, std::string label,
                              std::string source_ref);

/// Adds an undirected link with sorted endpoints.
AssociationLink& add_link(SessionState& s, std::string link_id, std::string x, std::string y, std::string chain_text);

/// Moves a concept node, its links and now-empty canvas elements into the
/// archive, stripping the node from every canvas tag set.
void archive_concept_node(SessionState& s, std::string_view node_id, int64_t at);

/// Removes a canvas element and the relations touching it into the archive.
void archive_element(SessionState& s, std::string_view element_id, int64_t at);

std::string str(const json& payload, const char* key);

}  // namespace wordcraft::detail
