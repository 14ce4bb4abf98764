#include "wordcraft/imagery_canvas.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "reducers.hpp"
#include "wordcraft/keyword_selection.hpp"

namespace wordcraft {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

Coverage compute_coverage(const AssociationMap& map, const CanvasModel& canvas) {
  Coverage cov;
  auto has_tag = [](const CanvasElement& e, const std::string& id) {
    return std::find(e.tags.begin(), e.tags.end(), id) != e.tags.end();
  };
  for (const auto& node : map.nodes) {
    bool active = std::any_of(canvas.elements.begin(), canvas.elements.end(),
                              [&](const CanvasElement& e) { return has_tag(e, node.node_id); });
    cov.nodes.emplace_back(node.node_id, active);
    if (!active) cov.missing_nodes.push_back(node.node_id);
  }
  for (const auto& link : map.links) {
    bool active = std::any_of(canvas.elements.begin(), canvas.elements.end(), [&](const CanvasElement& e) {
      return has_tag(e, link.a) && has_tag(e, link.b);
    });
    for (size_t i = 0; !active && i < canvas.relations.size(); ++i) {
      const auto& r = canvas.relations[i];
      const auto* x = canvas.find_element(r.a);
      const auto* y = canvas.find_element(r.b);
      if (!x || !y) continue;
      active = (has_tag(*x, link.a) && has_tag(*y, link.b)) || (has_tag(*x, link.b) && has_tag(*y, link.a));
    }
    cov.links.emplace_back(link.link_id, active);
    if (!active) cov.missing_links.push_back(link.link_id);
  }
  cov.is_complete = cov.missing_nodes.empty() && cov.missing_links.empty();
  return cov;
}

Coverage compute_coverage(const Session& session) {
  return compute_coverage(session.state().map, session.state().canvas);
}

void to_json(json& j, const RecallPath& r) {
  json nodes = json::array();
  for (const auto& n : r.nodes) {
    nodes.push_back({{"node_id", n.node_id}, {"label", n.label}, {"color_index", n.color_index}, {"active", n.active}});
  }
  json links = json::array();
  for (const auto& l : r.links) {
    links.push_back({{"link_id", l.link_id}, {"a", l.a}, {"b", l.b}, {"active", l.active}});
  }
  j = json{{"nodes", nodes}, {"links", links}, {"is_complete", r.is_complete}};
}

RecallPath derive_recall_path(const Session& session) {
  const auto& map = session.state().map;
  auto cov = compute_coverage(session);
  RecallPath path;
  for (size_t i = 0; i < map.nodes.size(); ++i) {
    const auto& n = map.nodes[i];
    path.nodes.push_back({n.node_id, n.label, n.color_index, cov.nodes[i].second});
  }
  for (size_t i = 0; i < map.links.size(); ++i) {
    const auto& l = map.links[i];
    path.links.push_back({l.link_id, l.a, l.b, cov.links[i].second});
  }
  path.is_complete = cov.is_complete;
  return path;
}

// ---------------------------------------------------------------------------
// Canvas reducers
// ---------------------------------------------------------------------------

bool bbox_valid(const BBox& b) {
  constexpr double eps = 1e-9;
  for (double v : {b.x, b.y, b.w, b.h}) {
    if (!std::isfinite(v)) return false;
  }
  return b.w > 0 && b.h > 0 && b.x >= 0 && b.y >= 0 && b.x + b.w <= 1 + eps && b.y + b.h <= 1 + eps;
}

namespace {

BBox require_bbox(const json& j) {
  BBox b;
  try {
    b = j.get<BBox>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kBadBBox, "bbox needs numeric x, y, w, h");
  }
  if (!bbox_valid(b)) {
    throw Error(ErrorCode::kBadBBox, "bbox must have w>0, h>0 and lie within the unit canvas", json{{"bbox", j}});
  }
  return b;
}

std::vector<std::string> require_tags(const SessionState& s, const json& j) {
  std::vector<std::string> tags;
  for (const auto& t : j) {
    auto id = t.get<std::string>();
    if (!s.map.find_node(id)) {
      throw Error(ErrorCode::kUnknownConceptTag, "tag '" + id + "' is not a concept node", json{{"tag", id}});
    }
    if (std::find(tags.begin(), tags.end(), id) == tags.end()) tags.push_back(id);
  }
  if (tags.empty()) throw Error(ErrorCode::kInvalidArgument, "an element needs at least one concept tag");
  return tags;
}

CanvasElement& require_element(SessionState& s, const std::string& id) {
  auto* e = s.canvas.find_element(id);
  if (!e) throw Error(ErrorCode::kUnknownElement, "unknown element '" + id + "'", json{{"element_id", id}});
  return *e;
}

}  // namespace

namespace detail {

void apply_add_element(SessionState& s, const SessionEvent& e) {
  const auto& p = e.payload;
  CanvasElement el;
  el.element_id = str(p, "element_id");
  el.bbox = require_bbox(p.at("bbox"));
  el.tags = require_tags(s, p.at("tags"));
  el.description = str(p, "description");
  claim_id(s, el.element_id);
  s.canvas.elements.push_back(std::move(el));
}

void apply_update_element(SessionState& s, const SessionEvent& e) {
  const auto& p = e.payload;
  auto& el = require_element(s, str(p, "element_id"));
  CanvasElement next = el;
  if (p.contains("bbox")) next.bbox = require_bbox(p.at("bbox"));
  if (p.contains("tags")) next.tags = require_tags(s, p.at("tags"));
  if (p.contains("description")) next.description = str(p, "description");
  el = std::move(next);
}

void apply_delete_element(SessionState& s, const SessionEvent& e) {
  auto id = str(e.payload, "element_id");
  require_element(s, id);
  archive_element(s, id, e.at);
}

void apply_add_relation(SessionState& s, const SessionEvent& e) {
  const auto& p = e.payload;
  CanvasRelation r{str(p, "relation_id"), str(p, "a"), str(p, "b"), trim(str(p, "text"))};
  require_element(s, r.a);
  require_element(s, r.b);
  if (r.a == r.b) throw Error(ErrorCode::kInvalidArgument, "a relation needs two distinct elements");
  claim_id(s, r.relation_id);
  s.canvas.relations.push_back(std::move(r));
}

void apply_delete_relation(SessionState& s, const SessionEvent& e) {
  auto id = str(e.payload, "relation_id");
  auto& rel = s.canvas.relations;
  auto it = std::find_if(rel.begin(), rel.end(), [&](const auto& r) { return r.relation_id == id; });
  if (it == rel.end()) throw Error(ErrorCode::kUnknownRelation, "unknown relation '" + id + "'", json{{"relation_id", id}});
  s.archive.push_back({{"kind", "relation"}, {"at", e.at}, {"relation", *it}});
  rel.erase(it);
}

void apply_attach_image(SessionState& s, const SessionEvent& e) {
  s.images.push_back(e.payload.get<GeneratedImage>());
}

void apply_record_word_card(SessionState& s, const SessionEvent& e) {
  if (s.images.empty() && !e.payload.value("allow_no_image", false)) {
    throw Error(ErrorCode::kNoImage, "generate an image before recording, or pass the no-image override");
  }
  s.card_id = str(e.payload, "card_id");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Canvas operations
// ---------------------------------------------------------------------------

CanvasElement add_element(Session& session, const ElementDraft& draft) {
  auto id = session.next_id("el");
  session.commit("add_element",
                 json{{"element_id", id}, {"bbox", draft.bbox}, {"tags", draft.tags}, {"description", draft.description}});
  return *session.state().canvas.find_element(id);
}

CanvasElement update_element(Session& session, std::string_view element_id, const ElementPatch& patch) {
  if (!session.state().canvas.find_element(element_id)) {
    throw Error(ErrorCode::kUnknownElement, "unknown element '" + std::string(element_id) + "'",
                json{{"element_id", element_id}});
  }
  json payload{{"element_id", element_id}};
  if (patch.bbox) payload["bbox"] = *patch.bbox;
  if (patch.tags) payload["tags"] = *patch.tags;
  if (patch.description) payload["description"] = *patch.description;
  session.commit("update_element", std::move(payload));
  return *session.state().canvas.find_element(element_id);
}

void delete_element(Session& session, std::string_view element_id) {
  session.commit("delete_element", json{{"element_id", element_id}});
}

CanvasRelation add_relation(Session& session, std::string_view element_a, std::string_view element_b,
                            std::string_view text) {
  auto id = session.next_id("rel");
  session.commit("add_relation", json{{"relation_id", id}, {"a", element_a}, {"b", element_b}, {"text", text}});
  return session.state().canvas.relations.back();
}

void delete_relation(Session& session, std::string_view relation_id) {
  session.commit("delete_relation", json{{"relation_id", relation_id}});
}

std::vector<PieSlice> pie_slices(const AssociationMap& map, const CanvasElement& element) {
  std::vector<PieSlice> out;
  if (element.tags.empty()) return out;
  const double share = 1.0 / static_cast<double>(element.tags.size());
  for (const auto& tag : element.tags) {
    const auto* node = map.find_node(tag);
    out.push_back({tag, node ? node->color_index : 0, share});
  }
  return out;
}

std::vector<std::string> suggest_visual_elements(const Session& session, const Gateway& gateway,
                                                 const std::vector<std::string>& node_ids) {
  const auto& s = session.state();
  if (node_ids.empty()) throw Error(ErrorCode::kInvalidArgument, "select at least one concept node");
  json labels = json::array();
  for (const auto& id : node_ids) {
    const auto* node = s.map.find_node(id);
    if (!node) throw Error(ErrorCode::kUnknownNode, "unknown concept node '" + id + "'", json{{"node_id", id}});
    labels.push_back(node->label);
  }
  json existing = json::array();
  for (const auto& e : s.canvas.elements) {
    if (!e.description.empty()) existing.push_back(e.description);
  }
  auto payload = gateway.call_text(template_ids::kImageryRecommender, json{{"nodes", labels}, {"existing", existing}});
  std::vector<std::string> out;
  for (const auto& item : payload) {
    auto phrase = item.get<std::string>();
    bool echoed = std::any_of(s.canvas.elements.begin(), s.canvas.elements.end(), [&](const CanvasElement& e) {
      return e.description.find(phrase) != std::string::npos;
    });
    if (!echoed && std::find(out.begin(), out.end(), phrase) == out.end()) out.push_back(phrase);
  }
  return out;
}

json relation_variables(const SessionState& state, const CanvasElement& left, const CanvasElement& right) {
  auto side = [&](const CanvasElement& e) {
    std::string labels;
    for (const auto& t : e.tags) {
      const auto* node = state.map.find_node(t);
      if (!labels.empty()) labels += ", ";
      labels += node ? node->label : t;
    }
    return "[" + labels + "] " + e.description;
  };
  return json{{"left", side(left)}, {"right", side(right)}};
}

std::vector<std::string> suggest_relations(const Session& session, const Gateway& gateway, std::string_view element_a,
                                           std::string_view element_b) {
  const auto& s = session.state();
  const auto* a = s.canvas.find_element(element_a);
  const auto* b = s.canvas.find_element(element_b);
  for (auto [ptr, id] : {std::pair{a, element_a}, std::pair{b, element_b}}) {
    if (!ptr) throw Error(ErrorCode::kUnknownElement, "unknown element '" + std::string(id) + "'", json{{"element_id", id}});
  }
  auto payload = gateway.call_text(template_ids::kSceneRelation, relation_variables(s, *a, *b));
  return payload.get<std::vector<std::string>>();
}

// ---------------------------------------------------------------------------
// Image requests
// ---------------------------------------------------------------------------

StyleRegistry::StyleRegistry() {
  styles_ = {{"pixar_animation", "Pixar-style 3D animation"},
             {"watercolor", "soft watercolor painting"},
             {"flat_illustration", "flat vector illustration"},
             {"sketch", "pencil sketch"}};
}

void StyleRegistry::add(std::string id, std::string description) {
  styles_.insert_or_assign(std::move(id), std::move(description));
}

bool StyleRegistry::contains(std::string_view id) const { return styles_.find(id) != styles_.end(); }

const std::string& StyleRegistry::description(std::string_view id) const {
  auto it = styles_.find(id);
  if (it == styles_.end()) {
    throw Error(ErrorCode::kUnknownStyle, "unknown style '" + std::string(id) + "'", json{{"style", id}, {"known", ids()}});
  }
  return it->second;
}

std::vector<std::string> StyleRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : styles_) out.push_back(id);
  return out;
}

void to_json(json& j, const ImageRequest& r) {
  json layout = json::array();
  for (const auto& g : r.layout) {
    layout.push_back({{"region", g.index},
                      {"element_id", g.element_id},
                      {"bbox", g.bbox},
                      {"labels", g.labels},
                      {"description", g.description}});
  }
  json relations = json::array();
  for (const auto& rel : r.relations) relations.push_back({{"regions", {rel.from, rel.to}}, {"text", rel.text}});
  j = json{{"layout", layout},
           {"relations", relations},
           {"style", r.style},
           {"style_description", r.style_description},
           {"constraints", r.constraints},
           {"prompt", r.prompt}};
}

namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string region_lines(const ImageRequest& r) {
  std::vector<std::string> lines;
  for (const auto& g : r.layout) {
    lines.push_back("Box " + std::to_string(g.index) + ": " + (g.description.empty() ? "(no description)" : g.description));
  }
  return join(lines, "\n");
}

std::string relation_lines(const ImageRequest& r) {
  if (r.relations.empty()) return "(none)";
  std::vector<std::string> lines;
  for (const auto& rel : r.relations) {
    lines.push_back("Box " + std::to_string(rel.from) + " <-> Box " + std::to_string(rel.to) + ": " +
                    (rel.text.empty() ? "(conveyed by placement)" : rel.text));
  }
  return join(lines, "\n");
}

}  // namespace

std::string wireframe_spec(const ImageRequest& r) {
  std::vector<std::string> lines;
  for (const auto& g : r.layout) {
    lines.push_back("Box " + std::to_string(g.index) + " [x=" + fixed3(g.bbox.x) + ", y=" + fixed3(g.bbox.y) +
                    ", w=" + fixed3(g.bbox.w) + ", h=" + fixed3(g.bbox.h) + "]: " + join(g.labels, ", "));
  }
  return join(lines, "\n");
}

ImageRequest build_image_request(const Session& session, const TemplateStore& templates, const StyleRegistry& styles,
                                 std::string_view style) {
  const auto& s = session.state();
  auto cov = compute_coverage(session);
  if (!cov.is_complete) {
    json nodes = json::array();
    json links = json::array();
    std::vector<std::string> names;
    for (const auto& id : cov.missing_nodes) {
      const auto* n = s.map.find_node(id);
      nodes.push_back({{"node_id", id}, {"label", n->label}});
      names.push_back(n->label);
    }
    for (const auto& id : cov.missing_links) {
      const auto* l = s.map.find_link(id);
      auto la = s.map.find_node(l->a)->label;
      auto lb = s.map.find_node(l->b)->label;
      links.push_back({{"link_id", id}, {"a", l->a}, {"b", l->b}, {"labels", {la, lb}}});
      names.push_back(la + "–" + lb);
    }
    throw Error(ErrorCode::kRecallPathIncomplete, "recall path incomplete; missing: " + join(names, ", "),
                json{{"missing_nodes", nodes}, {"missing_links", links}});
  }

  ImageRequest req;
  req.style = std::string(style);
  req.style_description = styles.description(style);
  std::map<std::string, int> region_of;
  for (const auto& e : s.canvas.elements) {
    ImageRequest::Region g;
    g.index = static_cast<int>(req.layout.size()) + 1;
    g.element_id = e.element_id;
    g.bbox = e.bbox;
    for (const auto& t : e.tags) g.labels.push_back(s.map.find_node(t)->label);
    g.description = e.description;
    region_of[e.element_id] = g.index;
    req.layout.push_back(std::move(g));
  }
  for (const auto& r : s.canvas.relations) req.relations.push_back({region_of.at(r.a), region_of.at(r.b), r.text});

  const auto& tmpl = templates.get(template_ids::kImageCompose);
  req.constraints = tmpl.section("-- Mandatory Constraints --");
  auto messages = templates.render(template_ids::kImageCompose, json{{"wireframe_spec", wireframe_spec(req)},
                                                                    {"region_descriptions", region_lines(req)},
                                                                    {"relations", relation_lines(req)},
                                                                    {"style", req.style_description}});
  req.prompt = messages.front().content;
  return req;
}

void attach_image(Session& session, const GeneratedImage& image) { session.commit("attach_image", json(image)); }

// ---------------------------------------------------------------------------
// Image jobs
// ---------------------------------------------------------------------------

void to_json(json& j, const ImageJob& job) {
  j = json{{"job_id", job.job_id},       {"session_id", job.session_id}, {"state", job.state},
           {"style", job.style},         {"image_ref", job.image_ref},   {"width", job.width},
           {"height", job.height},       {"error", job.error}};
}

ImageJobs::ImageJobs(fs::path data_dir, std::shared_ptr<const Gateway> gateway, size_t workers)
    : data_dir_(std::move(data_dir)), gateway_(std::move(gateway)) {
  for (size_t i = 0; i < std::max<size_t>(1, workers); ++i) workers_.emplace_back([this] { run(); });
}

ImageJobs::~ImageJobs() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  work_.notify_all();
  for (auto& t : workers_) t.join();
}

ImageJob ImageJobs::submit(const std::string& session_id, const ImageRequest& request,
                           const std::string& idempotency_key, Attach attach) {
  std::lock_guard lock(mu_);
  for (const auto& [id, job] : jobs_) {
    if (job.session_id != session_id) continue;
    if (!idempotency_key.empty() && job.idempotency_key == idempotency_key) return job;
  }
  for (const auto& [id, job] : jobs_) {
    if (job.session_id == session_id && job.state == "pending") {
      throw Error(ErrorCode::kJobPending, "session already has a pending image job", json{{"job_id", job.job_id}});
    }
  }
  ImageJob job;
  job.job_id = "job-" + std::to_string(next_job_++);
  job.session_id = session_id;
  job.style = request.style;
  job.idempotency_key = idempotency_key;
  jobs_[job.job_id] = job;
  queue_.push_back(Task{job.job_id, request.prompt, std::move(attach)});
  work_.notify_one();
  return job;
}

std::optional<ImageJob> ImageJobs::get(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::optional<ImageJob> ImageJobs::wait(const std::string& job_id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  changed_.wait_for(lock, timeout, [&] {
    auto it = jobs_.find(job_id);
    return it == jobs_.end() || it->second.state != "pending";
  });
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void ImageJobs::run() {
  for (;;) {
    Task task;
    {
      std::unique_lock lock(mu_);
      work_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_ && queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    execute(task);
  }
}

void ImageJobs::execute(Task& task) {
  ImageJob job;
  {
    std::lock_guard lock(mu_);
    job = jobs_.at(task.job_id);
  }
  try {
    auto result = gateway_->call_image(task.prompt);
    auto dir = data_dir_ / "sessions" / job.session_id / "images";
    fs::create_directories(dir);
    int n = 1;
    while (fs::exists(dir / ("img-" + std::to_string(n) + ".png"))) ++n;
    auto name = "img-" + std::to_string(n) + ".png";
    {
      std::ofstream out(dir / name, std::ios::binary);
      out.write(result.bytes.data(), static_cast<std::streamsize>(result.bytes.size()));
      if (!out) throw Error(ErrorCode::kProviderError, "failed to store image bytes");
    }
    job.image_ref = "sessions/" + job.session_id + "/images/" + name;
    job.width = result.width;
    job.height = result.height;
    if (task.attach) task.attach(job);
    job.state = "done";
  } catch (const Error& e) {
    job.state = "failed";
    job.error = e.to_json();
  } catch (const std::exception& e) {
    job.state = "failed";
    job.error = Error(ErrorCode::kProviderError, e.what()).to_json();
  }
  {
    std::lock_guard lock(mu_);
    jobs_[job.job_id] = job;
  }
  changed_.notify_all();
}

// ---------------------------------------------------------------------------
// Word cards
// ---------------------------------------------------------------------------

WordCard build_word_card(const SessionState& s, int64_t created_at) {
  WordCard card;
  card.card_id = s.card_id;
  card.session_id = s.session_id;
  card.word_id = s.word.word_id;
  card.word = s.word.surface;
  card.sense = s.sense;
  for (const auto& c : s.choices) {
    CardKeyword k{c.keyword, c.explanation, c.origin, "", 0, 0};
    if (const auto* seg = s.find_segment(c.segment_id)) {
      k.segment_ipa = segment_ipa(s, *seg);
      k.start = seg->start;
      k.end = seg->end;
    }
    card.keywords.push_back(std::move(k));
  }
  card.association = s.map.association;
  for (const auto& l : s.map.links) {
    CardLink cl;
    cl.endpoints = {s.map.find_node(l.a)->label, s.map.find_node(l.b)->label};
    cl.chain = l.chain.text;
    for (const auto& n : l.notes) cl.notes.push_back(n.text);
    card.links.push_back(std::move(cl));
  }
  if (!s.images.empty()) {
    card.image_ref = s.images.back().image_ref;
    card.style = s.images.back().style;
  }
  card.total_active_ms = s.total_active_ms;
  card.created_at = created_at;
  card.event_log_ref = "sessions/" + s.session_id + "/events.jsonl";
  return card;
}

WordCard record_word_card(Session& session, bool allow_no_image) {
  if (session.closed()) {
    throw Error(ErrorCode::kSessionClosed, "session " + session.id() + " is already recorded",
                json{{"session_id", session.id()}});
  }
  const auto& e = session.commit("record_word_card",
                                 json{{"card_id", "card-" + session.id()}, {"allow_no_image", allow_no_image}});
  return build_word_card(session.state(), e.at);
}

}  // namespace wordcraft
