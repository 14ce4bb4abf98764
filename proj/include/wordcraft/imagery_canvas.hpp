#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wordcraft/gateway.hpp"
#include "wordcraft/session.hpp"

namespace wordcraft {

// ---------------------------------------------------------------------------
// Coverage and recall path
// ---------------------------------------------------------------------------

/// Activation of every map node and link against the canvas.
///
/// A node is active when some element carries its tag. A link (A, B) is
/// active when one element carries both tags, or a relation joins an element
/// tagged A to an element tagged B (relation text may be empty).
struct Coverage {
  std::vector<std::pair<std::string, bool>> nodes;  // map order
  std::vector<std::pair<std::string, bool>> links;  // map order
  bool is_complete = true;
  std::vector<std::string> missing_nodes;
  std::vector<std::string> missing_links;
};

Coverage compute_coverage(const AssociationMap& map, const CanvasModel& canvas);
Coverage compute_coverage(const Session& session);

struct RecallPath {
  struct Node {
    std::string node_id;
    std::string label;
    int color_index = 0;
    bool active = false;
  };
  struct Link {
    std::string link_id;
    std::string a;
    std::string b;
    bool active = false;
  };
  std::vector<Node> nodes;
  std::vector<Link> links;
  bool is_complete = true;
};
void to_json(json& j, const RecallPath& r);

/// Derived view of the map; recomputed on every call.
RecallPath derive_recall_path(const Session& session);

// ---------------------------------------------------------------------------
// Canvas editing
// ---------------------------------------------------------------------------

struct ElementDraft {
  BBox bbox;
  std::vector<std::string> tags;
  std::string description;
};

struct ElementPatch {
  std::optional<BBox> bbox;
  std::optional<std::vector<std::string>> tags;
  std::optional<std::string> description;
};

/// Throws kBadBBox, kUnknownConceptTag, kInvalidArgument (no tags).
CanvasElement add_element(Session& session, const ElementDraft& draft);
CanvasElement update_element(Session& session, std::string_view element_id, const ElementPatch& patch);
/// Also removes relations touching the element.
void delete_element(Session& session, std::string_view element_id);
CanvasRelation add_relation(Session& session, std::string_view element_a, std::string_view element_b,
                            std::string_view text = {});
void delete_relation(Session& session, std::string_view relation_id);

bool bbox_valid(const BBox& b);

struct PieSlice {
  std::string node_id;
  int color_index = 0;
  double fraction = 0;
};

/// Equal slices, one per tag, colored by the tagged node.
std::vector<PieSlice> pie_slices(const AssociationMap& map, const CanvasElement& element);

/// Drawable noun phrases for the given concept nodes; duplicates and phrases
/// already present in element descriptions are dropped.
std::vector<std::string> suggest_visual_elements(const Session& session, const Gateway& gateway,
                                                 const std::vector<std::string>& node_ids);

/// Variables for the scene_relation template for two elements.
json relation_variables(const SessionState& state, const CanvasElement& left, const CanvasElement& right);

/// One-sentence scene links between two elements.
std::vector<std::string> suggest_relations(const Session& session, const Gateway& gateway, std::string_view element_a,
                                           std::string_view element_b);

// ---------------------------------------------------------------------------
// Image requests
// ---------------------------------------------------------------------------

/// Registered style presets (id -> rendering phrase).
class StyleRegistry {
 public:
  StyleRegistry();  // pixar_animation, watercolor, flat_illustration, sketch
  void add(std::string id, std::string description);
  bool contains(std::string_view id) const;
  const std::string& description(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::string, std::less<>> styles_;
};

struct ImageRequest {
  struct Region {
    int index = 0;  // 1-based
    std::string element_id;
    BBox bbox;
    std::vector<std::string> labels;
    std::string description;
  };
  struct Relation {
    int from = 0;
    int to = 0;
    std::string text;
  };
  std::vector<Region> layout;
  std::vector<Relation> relations;
  std::string style;
  std::string style_description;
  std::string constraints;  // fixed block copied from the template
  std::string prompt;       // fully rendered image_compose text
};
void to_json(json& j, const ImageRequest& r);

/// Textual wireframe: one line per region with its box and labels.
std::string wireframe_spec(const ImageRequest& request);

/// Throws kRecallPathIncomplete (details list missing nodes and links) or
/// kUnknownStyle.
ImageRequest build_image_request(const Session& session, const TemplateStore& templates, const StyleRegistry& styles,
                                 std::string_view style);

/// Records a generated image on the session (latest is the default).
void attach_image(Session& session, const GeneratedImage& image);

// ---------------------------------------------------------------------------
// Image jobs
// ---------------------------------------------------------------------------

struct ImageJob {
  std::string job_id;
  std::string session_id;
  std::string state = "pending";  // pending | done | failed
  std::string style;
  std::string idempotency_key;
  std::string image_ref;
  int width = 0;
  int height = 0;
  json error;  // ApiError body when failed
};
void to_json(json& j, const ImageJob& job);

/// Background image generation with a fixed worker pool. At most one pending
/// job per session. Bytes land in `<data_dir>/sessions/<sid>/images/img-<n>.png`.
class ImageJobs {
 public:
  /// Invoked on the worker after the file is written; attaches the result to
  /// the session. Throwing marks the job failed.
  using Attach = std::function<void(const ImageJob&)>;

  ImageJobs(std::filesystem::path data_dir, std::shared_ptr<const Gateway> gateway, size_t workers = 2);
  ~ImageJobs();
  ImageJobs(const ImageJobs&) = delete;
  ImageJobs& operator=(const ImageJobs&) = delete;

  /// Same idempotency key for the session returns the existing job. Throws
  /// kJobPending when another job for the session is still pending.
  ImageJob submit(const std::string& session_id, const ImageRequest& request, const std::string& idempotency_key,
                  Attach attach);

  std::optional<ImageJob> get(const std::string& job_id) const;

  /// Blocks until the job leaves pending or the timeout passes.
  std::optional<ImageJob> wait(const std::string& job_id, std::chrono::milliseconds timeout) const;

 private:
  struct Task {
    std::string job_id;
    std::string prompt;
    Attach attach;
  };
  void run();
  void execute(Task& task);

  std::filesystem::path data_dir_;
  std::shared_ptr<const Gateway> gateway_;
  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::condition_variable work_;
  std::deque<Task> queue_;
  std::map<std::string, ImageJob> jobs_;
  int next_job_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

// ---------------------------------------------------------------------------
// Word cards
// ---------------------------------------------------------------------------

struct CardKeyword {
  std::string keyword;
  std::string explanation;
  std::string origin;
  std::string segment_ipa;
  int start = 0;
  int end = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CardKeyword, keyword, explanation, origin, segment_ipa, start, end)

struct CardLink {
  std::vector<std::string> endpoints;  // labels
  std::string chain;
  std::vector<std::string> notes;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CardLink, endpoints, chain, notes)

struct WordCard {
  std::string card_id;
  std::string session_id;
  std::string word_id;
  std::string word;
  Sense sense;
  std::vector<CardKeyword> keywords;
  std::string association;
  std::vector<CardLink> links;
  std::string image_ref;
  std::string style;
  int64_t total_active_ms = 0;
  int64_t created_at = 0;
  std::string event_log_ref;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(WordCard, card_id, session_id, word_id, word, sense, keywords, association, links,
                                   image_ref, style, total_active_ms, created_at, event_log_ref)

/// Card content from a recorded state (pure).
WordCard build_word_card(const SessionState& state, int64_t created_at);

/// Closes the session and returns its card. Throws kNoImage unless an image
/// exists or `allow_no_image`; kSessionClosed when already recorded.
WordCard record_word_card(Session& session, bool allow_no_image = false);

}  // namespace wordcraft
