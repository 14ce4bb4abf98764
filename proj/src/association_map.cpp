#include "wordcraft/association_map.hpp"

#include <algorithm>

#include "reducers.hpp"

namespace wordcraft {

namespace detail {

namespace {

AssociationLink& require_link(SessionState& s, const std::string& id) {
  auto* link = s.map.find_link(id);
  if (!link) throw Error(ErrorCode::kUnknownLink, "unknown link '" + id + "'", json{{"link_id", id}});
  return *link;
}

}  // namespace

void apply_upsert_link(SessionState& s, const SessionEvent& e) {
  const auto& p = e.payload;
  auto a = str(p, "a");
  auto b = str(p, "b");
  for (const auto& id : {a, b}) {
    if (!s.map.find_node(id)) throw Error(ErrorCode::kUnknownNode, "unknown concept node '" + id + "'", json{{"node_id", id}});
  }
  if (a == b) throw Error(ErrorCode::kSelfLink, "a link needs two distinct nodes", json{{"node_id", a}});
  if (s.map.find_link_between(a, b)) throw Error(ErrorCode::kInvalidArgument, "link already exists");
  add_link(s, str(p, "link_id"), a, b, "");
}

void apply_delete_link(SessionState& s, const SessionEvent& e) {
  auto id = str(e.payload, "link_id");
  auto& links = s.map.links;
  auto it = std::find_if(links.begin(), links.end(), [&](const auto& l) { return l.link_id == id; });
  if (it == links.end()) throw Error(ErrorCode::kUnknownLink, "unknown link '" + id + "'", json{{"link_id", id}});
  s.archive.push_back({{"kind", "link"}, {"at", e.at}, {"link", *it}});
  links.erase(it);
}

void apply_set_chain(SessionState& s, const SessionEvent& e) {
  require_link(s, str(e.payload, "link_id")).chain.text = str(e.payload, "text");
}

void apply_add_note(SessionState& s, const SessionEvent& e) {
  auto& link = require_link(s, str(e.payload, "link_id"));
  auto text = trim(str(e.payload, "text"));
  if (text.empty()) throw Error(ErrorCode::kEmptyNote, "note text must be non-empty");
  auto id = str(e.payload, "note_id");
  claim_id(s, id);
  link.notes.push_back(Note{id, text, e.at});
}

void apply_set_association(SessionState& s, const SessionEvent& e) { s.map.association = str(e.payload, "text"); }

}  // namespace detail

AssociationLink upsert_link(Session& session, std::string_view node_a, std::string_view node_b) {
  const auto& m = session.state().map;
  for (auto id : {node_a, node_b}) {
    if (!m.find_node(id)) {
      throw Error(ErrorCode::kUnknownNode, "unknown concept node '" + std::string(id) + "'", json{{"node_id", id}});
    }
  }
  if (node_a == node_b) throw Error(ErrorCode::kSelfLink, "a link needs two distinct nodes", json{{"node_id", node_a}});
  if (const auto* existing = m.find_link_between(node_a, node_b)) return *existing;
  auto id = session.next_id("link");
  session.commit("upsert_link", json{{"link_id", id}, {"a", node_a}, {"b", node_b}});
  return *session.state().map.find_link(id);
}

void delete_link(Session& session, std::string_view link_id) {
  if (!session.state().map.find_link(link_id)) {
    throw Error(ErrorCode::kUnknownLink, "unknown link '" + std::string(link_id) + "'", json{{"link_id", link_id}});
  }
  session.commit("delete_link", json{{"link_id", link_id}});
}

AssociationLink set_chain(Session& session, std::string_view link_id, std::string_view text, int max_length,
                          const Profile* profile) {
  if (!session.state().map.find_link(link_id)) {
    throw Error(ErrorCode::kUnknownLink, "unknown link '" + std::string(link_id) + "'", json{{"link_id", link_id}});
  }
  auto t = trim(text);
  int length = profile ? profile->text_length(t) : utf8_length(t);
  if (profile) max_length = profile->chain_text_max;
  if (length > max_length) {
    throw Error(ErrorCode::kTextTooLong, "chain text exceeds " + std::to_string(max_length),
                json{{"length", length}, {"max", max_length}});
  }
  session.commit("set_chain", json{{"link_id", link_id}, {"text", t}});
  return *session.state().map.find_link(link_id);
}

AssociationLink add_note(Session& session, std::string_view link_id, std::string_view text) {
  if (!session.state().map.find_link(link_id)) {
    throw Error(ErrorCode::kUnknownLink, "unknown link '" + std::string(link_id) + "'", json{{"link_id", link_id}});
  }
  if (trim(text).empty()) throw Error(ErrorCode::kEmptyNote, "note text must be non-empty");
  session.commit("add_note", json{{"link_id", link_id}, {"note_id", session.next_id("note")}, {"text", text}});
  return *session.state().map.find_link(link_id);
}

void set_association(Session& session, std::string_view text) {
  session.commit("set_association", json{{"text", trim(text)}});
}

json hint_variables(const SessionState& state, const AssociationLink& link) {
  const auto* a = state.map.find_node(link.a);
  const auto* b = state.map.find_node(link.b);
  json notes = json::array();
  for (const auto& n : link.notes) notes.push_back(n.text);
  return json{{"entity_a", a ? a->label : link.a},
              {"entity_b", b ? b->label : link.b},
              {"chain", link.chain.text},
              {"notes", notes}};
}

std::vector<std::string> suggest_hints(const Session& session, const Gateway& gateway, std::string_view link_id) {
  const auto* link = session.state().map.find_link(link_id);
  if (!link) throw Error(ErrorCode::kUnknownLink, "unknown link '" + std::string(link_id) + "'", json{{"link_id", link_id}});
  auto payload = gateway.call_text(template_ids::kAssocHints, hint_variables(session.state(), *link));
  return payload.get<std::vector<std::string>>();
}

}  // namespace wordcraft
