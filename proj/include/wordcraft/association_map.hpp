#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wordcraft/gateway.hpp"
#include "wordcraft/session.hpp"

namespace wordcraft {

/// Returns the link for the unordered pair, creating one with an empty chain
/// when absent (only creation records an event). Throws kUnknownNode, kSelfLink.
AssociationLink upsert_link(Session& session, std::string_view node_a, std::string_view node_b);

/// Removes a link; its chain and notes are kept in the session archive.
void delete_link(Session& session, std::string_view link_id);

/// Throws kUnknownLink, kTextTooLong (profile chain cap).
AssociationLink set_chain(Session& session, std::string_view link_id, std::string_view text, int max_length = 64,
                          const Profile* profile = nullptr);

/// Throws kUnknownLink, kEmptyNote.
AssociationLink add_note(Session& session, std::string_view link_id, std::string_view text);

/// The learner's final association sentence for the word card.
void set_association(Session& session, std::string_view text);

/// Variables sent to the assoc_hints template: both endpoint labels, the
/// chain text and every note on the link.
json hint_variables(const SessionState& state, const AssociationLink& link);

/// 3-5 indirect hint sentences for a link. Reads a snapshot; never mutates.
std::vector<std::string> suggest_hints(const Session& session, const Gateway& gateway, std::string_view link_id);

}  // namespace wordcraft
