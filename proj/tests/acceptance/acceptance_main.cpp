// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "support/fixtures.hpp"
#include "wordcraft/association_map.hpp"
#include "wordcraft/keyword_selection.hpp"

using namespace wordcraft;
using wctest::json;

namespace {

// Tolerances and sizes pinned here.
constexpr double kReplayLimitSeconds = 5.0;
constexpr double kPipelineLimitSeconds = 10.0;
constexpr double kCoverageLimitSeconds = 30.0;
constexpr int kPipelineCalls = 200;
constexpr int kGatingSessions = 500;
constexpr int kFuzzSequences = 1000;
constexpr int kFuzzStepsPerSequence = 40;
constexpr uint32_t kSeed = 20251016;

int g_failures = 0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << detail << ")" << std::endl;
  if (!ok) ++g_failures;
}

/// Runs a criterion; an escaping exception is a failure with its message.
void criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    report(name, ok, detail);
  } catch (const Error& e) {
    report(name, false, "unexpected error " + e.to_json().dump());
  } catch (const std::exception& e) {
    report(name, false, std::string("unexpected exception: ") + e.what());
  }
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f s", s);
  return buf;
}

// ---------------------------------------------------------------------------
// Independent coverage oracle over bitmasks: the two activation rules applied
// literally.
// ---------------------------------------------------------------------------

struct Truth {
  std::set<std::string> inactive_nodes;
  std::set<std::string> inactive_links;
};

Truth brute_force_truth(const AssociationMap& map, const CanvasModel& canvas) {
  std::map<std::string, int> bit;
  for (size_t i = 0; i < map.nodes.size(); ++i) bit[map.nodes[i].node_id] = static_cast<int>(i);
  std::map<std::string, unsigned> mask;
  for (const auto& e : canvas.elements) {
    unsigned m = 0;
    for (const auto& t : e.tags) m |= 1u << bit.at(t);
    mask[e.element_id] = m;
  }
  Truth t;
  for (const auto& n : map.nodes) {
    unsigned b = 1u << bit.at(n.node_id);
    bool on = false;
    for (const auto& [id, m] : mask) on = on || (m & b);
    if (!on) t.inactive_nodes.insert(n.node_id);
  }
  for (const auto& l : map.links) {
    unsigned a = 1u << bit.at(l.a);
    unsigned b = 1u << bit.at(l.b);
    bool on = false;
    for (const auto& [id, m] : mask) on = on || ((m & a) && (m & b));
    for (const auto& r : canvas.relations) {
      unsigned x = mask.at(r.a);
      unsigned y = mask.at(r.b);
      on = on || ((x & a) && (y & b)) || ((x & b) && (y & a));
    }
    if (!on) t.inactive_links.insert(l.link_id);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Criterion 1: labyrinth walkthrough replayed over HTTP
// ---------------------------------------------------------------------------

std::pair<bool, std::string> labyrinth_replay() {
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };

  wctest::TempDir d1("accept-c1");
  wctest::TempDir d2("accept-c2");
  auto t1 = Clock::now();
  auto run1 = wctest::run_labyrinth_walkthrough(d1.path);
  double s1 = seconds_since(t1);
  auto t2 = Clock::now();
  auto run2 = wctest::run_labyrinth_walkthrough(d2.path);
  double s2 = seconds_since(t2);

  const auto& card = run1.card;
  check(card["word"] == "labyrinth", "word");
  check(card["sense"]["sense_id"] == "maze", "sense");
  std::vector<std::string> keywords;
  for (const auto& k : card["keywords"]) keywords.push_back(k["keyword"]);
  check((keywords == std::vector<std::string>{"喇叭", "晕死"}), "keywords");
  check(card["association"] == "I felt faint in the labyrinth filled with the echoes of speakers", "association");
  bool chain_found = false;
  for (const auto& l : card["links"]) {
    if (l["chain"] == "dizziness") {
      chain_found = l["notes"] == json::array({"The speaker can guide the way in the labyrinth"});
    }
  }
  check(chain_found, "chain dizziness with its note");
  check(card["style"] == "pixar_animation", "style");
  check(!card["image_ref"].get<std::string>().empty() && wctest::fs::exists(d1.path / card["image_ref"].get<std::string>()),
        "image file");
  check(card["total_active_ms"] == 4500, "total time");
  check(wctest::fs::exists(d1.path / "cards" / (card["card_id"].get<std::string>() + ".png")), "card png");
  check(std::find(run1.hints.begin(), run1.hints.end(), "The speaker may produce echoes in the labyrinth.") !=
            run1.hints.end(),
        "hint sentence");
  std::vector<std::string> batch;
  for (const auto& c : run1.keyword_batch["cards"]) batch.push_back(c["keyword"]);
  check((batch == std::vector<std::string>{"晕死", "忍", "人声", "流星"}), "keyword cards");
  check(run1.first_chain_link["chain"]["text"] == "labyrinth → 错综复杂", "seeded chain node");
  check(run1.incomplete_status == 409 && run1.incomplete_error["code"] == "RECALL_PATH_INCOMPLETE", "gating status");
  bool names_link = false;
  for (const auto& l : run1.incomplete_error["details"]["missing_links"]) {
    names_link = names_link || l["labels"] == json::array({"喇叭", "晕死"}) || l["labels"] == json::array({"晕死", "喇叭"});
  }
  check(names_link, "gating names 喇叭–晕死: " + run1.incomplete_error.dump());
  check(run1.recall_path_final["is_complete"] == true, "recall path complete");
  check((run1.visual_suggestions == std::vector<std::string>{"虚弱的身影", "倒在地上", "眼冒金星"}), "visual suggestions");
  check(run1.relation_suggestions.size() == 1, "relation suggestions filtered");
  check(run1.job["state"] == "done" && run1.idempotent_job, "image job");
  check(run1.healthz["mode"] == "mock", "health mode");
  check(run1.calls.size() == 7 && run1.script_left == 0, "seven provider calls");
  check(run1.card_json == run2.card_json, "byte-identical card JSON");
  check(s1 < kReplayLimitSeconds && s2 < kReplayLimitSeconds, "runtime");

  std::string detail = "runs " + fmt_seconds(s1) + " / " + fmt_seconds(s2) + ", limit " + fmt_seconds(kReplayLimitSeconds);
  for (const auto& p : problems) detail += "; mismatch: " + p;
  return {problems.empty(), detail};
}

// ---------------------------------------------------------------------------
// Criterion 2: pipeline cardinality under fuzzed provider output
// ---------------------------------------------------------------------------

struct Stage1Draw {
  std::string text;
  bool valid = false;
};

Stage1Draw draw_stage1(std::mt19937& rng, int call) {
  std::uniform_int_distribution<int> count(0, 26);
  std::bernoulli_distribution coin(0.5);
  int distinct = count(rng);
  json arr = json::array();
  std::set<std::string> usable;
  for (int i = 0; i < distinct; ++i) {
    std::string kw = "c" + std::to_string(call) + "-" + std::to_string(i);
    arr.push_back({{"keyword", kw}, {"explanation", "e"}});
    usable.insert(kw);
    if (coin(rng) && coin(rng)) arr.push_back({{"keyword", kw}, {"explanation", "dup"}});  // duplicate
  }
  if (coin(rng)) arr.push_back({{"keyword", ""}, {"explanation", "blank keyword"}});
  if (coin(rng)) arr.push_back("not an object");
  std::string text = arr.dump();
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0:
      text = "Sure! " + text + " Those are my ideas.";
      break;
    case 1:
      text = "no array here, sorry";
      usable.clear();
      break;
    case 2:
      text = "[" + text.substr(0, text.size() / 2);  // truncated
      usable.clear();
      break;
    default:
      break;
  }
  return {text, usable.size() >= 10};
}

struct Stage2Draw {
  std::string text;
  bool valid = false;
};

Stage2Draw draw_stage2(std::mt19937& rng, int call, const std::set<std::string>& shown) {
  std::uniform_int_distribution<int> count(2, 6);
  std::bernoulli_distribution rare(0.15);
  int n = rng() % 3 == 0 ? count(rng) : 4;
  json arr = json::array();
  bool valid = n == 4;
  std::set<std::string> seen;
  for (int i = 0; i < n; ++i) {
    std::string kw = "k" + std::to_string(call) + "-" + std::to_string(i) + "-" + std::to_string(rng() % 1000);
    if (rare(rng) && !shown.empty()) {
      auto it = shown.begin();
      std::advance(it, rng() % shown.size());
      kw = *it;
      valid = false;
    }
    std::string reasoning = rare(rng) ? "" : "sounds alike";
    if (reasoning.empty()) valid = false;
    if (!seen.insert(kw).second) valid = false;
    arr.push_back({{"keyword", kw}, {"explanation", "x"}, {"reasoning", reasoning}});
  }
  return {arr.dump(), valid};
}

std::pair<bool, std::string> pipeline_cardinality() {
  std::mt19937 rng(kSeed);
  auto t0 = Clock::now();
  int batches = 0;
  int format_errors = 0;
  std::vector<std::string> problems;
  const auto& lex = wctest::fixture_lexicon();
  int call = 0;
  while (call < kPipelineCalls) {
    auto clock = std::make_shared<StepClock>();
    auto session = Session::create(lex, "s-fuzz", "labyrinth", "maze", clock);
    auto seg = brush_segment(session, 3, 8);
    std::set<std::string> shown;
    for (int j = 0; j < 5 && call < kPipelineCalls; ++j, ++call) {
      // Script for one call: stage-1 attempts, then stage-2 attempts, as the
      // oracle predicts they will be consumed.
      std::vector<MockResponse> script;
      auto a = draw_stage1(rng, call);
      script.push_back(MockResponse::text(a.text));
      bool stage1_ok = a.valid;
      if (!stage1_ok) {
        auto b = draw_stage1(rng, call);
        script.push_back(MockResponse::text(b.text));
        stage1_ok = b.valid;
      }
      bool expect_ok = false;
      std::set<std::string> expected_keywords;
      if (stage1_ok) {
        auto c = draw_stage2(rng, call, shown);
        script.push_back(MockResponse::text(c.text));
        json chosen = c.valid ? json::parse(c.text) : json();
        if (!c.valid) {
          auto d = draw_stage2(rng, call, shown);
          script.push_back(MockResponse::text(d.text));
          if (d.valid) chosen = json::parse(d.text);
        }
        expect_ok = !chosen.is_null();
        if (expect_ok) {
          for (const auto& item : chosen) expected_keywords.insert(item["keyword"].get<std::string>());
        }
      }
      auto mock = std::make_shared<MockProvider>(script);
      auto gw = wctest::make_gateway(mock);
      const size_t events_before = session.events().size();
      try {
        auto batch = suggest_keywords(session, *gw, seg.segment_id, {});
        ++batches;
        std::set<std::string> got;
        bool well_formed = batch.cards.size() == 4;
        for (const auto& card : batch.cards) {
          well_formed = well_formed && !card.keyword.empty() && !card.explanation.empty() && !card.reasoning.empty();
          well_formed = well_formed && !shown.count(card.keyword);
          got.insert(card.keyword);
        }
        if (!expect_ok) problems.push_back("call " + std::to_string(call) + " returned a batch the oracle rejects");
        if (!well_formed || got != expected_keywords) {
          problems.push_back("call " + std::to_string(call) + " batch differs from the validated reviewer output");
        }
        if (session.events().size() != events_before + 1) problems.push_back("batch event missing");
        shown.insert(got.begin(), got.end());
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kFormatError) ++format_errors;
        if (e.code() != ErrorCode::kFormatError || expect_ok) {
          problems.push_back("call " + std::to_string(call) + " unexpected " + std::string(error_name(e.code())));
        }
        if (session.events().size() != events_before) problems.push_back("failed call appended an event");
      }
      if (mock->remaining() != 0) problems.push_back("call " + std::to_string(call) + " left script unconsumed");
    }
    // No keyword string in two batches for the same segment.
    std::map<std::string, int> seen;
    for (const auto& b : session.state().batches) {
      for (const auto& c : b.cards) {
        if (++seen[c.keyword] > 1) problems.push_back("keyword repeated across batches: " + c.keyword);
      }
    }
  }
  double secs = seconds_since(t0);
  bool ok = problems.empty() && secs < kPipelineLimitSeconds && batches > 0 && format_errors > 0;
  std::string detail = std::to_string(kPipelineCalls) + " calls, " + std::to_string(batches) + " batches of 4, " +
                       std::to_string(format_errors) + " FormatError, " + fmt_seconds(secs) + ", limit " +
                       fmt_seconds(kPipelineLimitSeconds);
  if (!problems.empty()) detail += "; first problem: " + problems.front();
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// Criterion 3: exhaustive coverage oracle and monotonicity
// ---------------------------------------------------------------------------

bool covered_subset(const Coverage& smaller, const Coverage& larger) {
  for (size_t i = 0; i < smaller.nodes.size(); ++i) {
    if (smaller.nodes[i].second && !larger.nodes[i].second) return false;
  }
  for (size_t i = 0; i < smaller.links.size(); ++i) {
    if (smaller.links[i].second && !larger.links[i].second) return false;
  }
  return true;
}

bool matches_truth(const Coverage& cov, const Truth& truth) {
  for (const auto& [id, on] : cov.nodes) {
    if (on == static_cast<bool>(truth.inactive_nodes.count(id))) return false;
  }
  for (const auto& [id, on] : cov.links) {
    if (on == static_cast<bool>(truth.inactive_links.count(id))) return false;
  }
  bool complete = truth.inactive_nodes.empty() && truth.inactive_links.empty();
  return cov.is_complete == complete;
}

std::pair<bool, std::string> coverage_oracle() {
  auto t0 = Clock::now();
  long long configs = 0;
  long long mismatches = 0;
  long long monotone_checks = 0;
  long long monotone_violations = 0;

  for (int n = 1; n <= 4; ++n) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    }
    // One map per link subset.
    std::vector<AssociationMap> maps;
    for (unsigned lm = 0; lm < (1u << pairs.size()); ++lm) {
      AssociationMap m;
      for (int i = 0; i < n; ++i) m.nodes.push_back(ConceptNode{"n" + std::to_string(i), i ? "keyword" : "meaning", "N", i, ""});
      for (size_t p = 0; p < pairs.size(); ++p) {
        if (lm & (1u << p)) {
          m.links.push_back(AssociationLink{"l" + std::to_string(pairs[p].first) + std::to_string(pairs[p].second),
                                            "n" + std::to_string(pairs[p].first), "n" + std::to_string(pairs[p].second),
                                            {}, {}});
        }
      }
      maps.push_back(std::move(m));
    }
    const AssociationMap& full = maps.back();
    const int tag_choices = (1 << n) - 1;

    for (int k = 0; k <= 3; ++k) {
      std::vector<std::pair<int, int>> epairs;
      for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) epairs.emplace_back(a, b);
      }
      int combos = 1;
      for (int i = 0; i < k; ++i) combos *= tag_choices;
      for (int c = 0; c < combos; ++c) {
        CanvasModel base;
        int rest = c;
        for (int e = 0; e < k; ++e) {
          int mask = rest % tag_choices + 1;
          rest /= tag_choices;
          CanvasElement el;
          el.element_id = "e" + std::to_string(e);
          el.bbox = BBox{0, 0, 1, 1};
          for (int b = 0; b < n; ++b) {
            if (mask & (1 << b)) el.tags.push_back("n" + std::to_string(b));
          }
          base.elements.push_back(std::move(el));
        }
        for (unsigned rm = 0; rm < (1u << epairs.size()); ++rm) {
          CanvasModel canvas = base;
          for (size_t p = 0; p < epairs.size(); ++p) {
            if (rm & (1u << p)) {
              canvas.relations.push_back(CanvasRelation{"r" + std::to_string(p), "e" + std::to_string(epairs[p].first),
                                                        "e" + std::to_string(epairs[p].second), ""});
            }
          }
          for (const auto& m : maps) {
            ++configs;
            if (!matches_truth(compute_coverage(m, canvas), brute_force_truth(m, canvas))) ++mismatches;
          }
          // Monotonicity on the complete graph: removing one relation or one
          // element (with its relations) never activates anything.
          auto cov = compute_coverage(full, canvas);
          for (size_t r = 0; r < canvas.relations.size(); ++r) {
            CanvasModel less = canvas;
            less.relations.erase(less.relations.begin() + static_cast<long>(r));
            ++monotone_checks;
            if (!covered_subset(compute_coverage(full, less), cov)) ++monotone_violations;
          }
          for (size_t e = 0; e < canvas.elements.size(); ++e) {
            CanvasModel less = canvas;
            auto id = less.elements[e].element_id;
            less.elements.erase(less.elements.begin() + static_cast<long>(e));
            std::erase_if(less.relations, [&](const CanvasRelation& r) { return r.a == id || r.b == id; });
            ++monotone_checks;
            if (!covered_subset(compute_coverage(full, less), cov)) ++monotone_violations;
          }
        }
      }
    }
  }
  double secs = seconds_since(t0);
  bool ok = mismatches == 0 && monotone_violations == 0 && secs < kCoverageLimitSeconds;
  return {ok, std::to_string(configs) + " configurations, " + std::to_string(mismatches) + " mismatches, " +
                  std::to_string(monotone_checks) + " monotonicity checks, " + std::to_string(monotone_violations) +
                  " violations, " + fmt_seconds(secs) + ", limit " + fmt_seconds(kCoverageLimitSeconds)};
}

// ---------------------------------------------------------------------------
// Random sessions shared by the gating and fuzzing criteria
// ---------------------------------------------------------------------------

template <class T>
const T& pick(std::mt19937& rng, const std::vector<T>& v) {
  return v[rng() % v.size()];
}

std::vector<std::string> node_ids(const SessionState& s) {
  std::vector<std::string> out;
  for (const auto& n : s.map.nodes) out.push_back(n.node_id);
  return out;
}

BBox random_bbox(std::mt19937& rng, bool allow_bad) {
  std::uniform_real_distribution<double> u(0.0, 0.5);
  BBox b{u(rng), u(rng), u(rng) + 0.05, u(rng) + 0.05};
  if (allow_bad && rng() % 10 == 0) b.w = -0.1;
  return b;
}

/// Applies one random operation; errors are expected for some draws.
void random_step(Session& s, std::mt19937& rng) {
  const auto& st = s.state();
  const int phonemes = static_cast<int>(st.word.phonemes.size());
  switch (rng() % 16) {
    case 0:
    case 1: {
      int a = static_cast<int>(rng() % phonemes);
      int b = a + 1 + static_cast<int>(rng() % 3);
      brush_segment(s, a, b);
      break;
    }
    case 2:
      if (rng() % 4 == 0) clear_segments(s);
      break;
    case 3:
    case 4: {
      std::vector<std::string> anchors;
      for (const auto& a : st.tree.anchors) anchors.push_back(a.anchor_id);
      NewSemanticNode n;
      n.anchor_id = pick(rng, anchors);
      std::vector<std::string> parents{""};
      for (const auto& x : st.tree.nodes) {
        if (x.anchor_id == n.anchor_id) parents.push_back(x.node_id);
      }
      n.parent_id = pick(rng, parents);
      n.concept_text = "概念" + std::to_string(rng() % 12);
      add_semantic_node(s, n);
      break;
    }
    case 5:
    case 6: {
      if (st.segments.empty()) break;
      const std::string segment_id = pick(rng, st.segments).segment_id;
      std::vector<std::string> chain;
      if (!st.tree.nodes.empty() && rng() % 2) chain.push_back(pick(rng, st.tree.nodes).node_id);
      select_keyword(s, segment_id, KeywordSource::typed("词" + std::to_string(rng() % 20), "解释"), chain);
      break;
    }
    case 7: {
      auto ids = node_ids(st);
      upsert_link(s, pick(rng, ids), pick(rng, ids));
      break;
    }
    case 8:
      if (!st.map.links.empty()) {
        const std::string link_id = pick(rng, st.map.links).link_id;
        if (rng() % 3 == 0) {
          delete_link(s, link_id);
        } else if (rng() % 2) {
          set_chain(s, link_id, "链" + std::to_string(rng() % 5));
        } else {
          add_note(s, link_id, rng() % 5 ? "note" : "  ");
        }
      }
      break;
    case 9:
    case 10:
    case 11: {
      auto ids = node_ids(st);
      ElementDraft d;
      d.bbox = random_bbox(rng, true);
      int tags = 1 + static_cast<int>(rng() % 2);
      for (int i = 0; i < tags; ++i) d.tags.push_back(pick(rng, ids));
      if (rng() % 20 == 0) d.tags.push_back("cn-999");
      add_element(s, d);
      break;
    }
    case 12:
      if (!st.canvas.elements.empty()) {
        const std::string element_id = pick(rng, st.canvas.elements).element_id;
        if (rng() % 3 == 0) {
          delete_element(s, element_id);
        } else {
          ElementPatch p;
          p.bbox = random_bbox(rng, false);
          update_element(s, element_id, p);
        }
      }
      break;
    case 13:
    case 14:
      if (st.canvas.elements.size() >= 2) {
        const std::string a = pick(rng, st.canvas.elements).element_id;
        const std::string b = pick(rng, st.canvas.elements).element_id;
        add_relation(s, a, b, rng() % 2 ? "" : "关系");
      }
      break;
    default:
      if (!st.canvas.relations.empty() && rng() % 2) {
        const std::string relation_id = pick(rng, st.canvas.relations).relation_id;
        delete_relation(s, relation_id);
      } else {
        tick_active(s, static_cast<int64_t>(rng() % 5000));
      }
      break;
  }
}

/// Every structural invariant; returns the first violation or "".
std::string invariant_violation(const SessionState& s) {
  // Segment non-overlap.
  for (size_t i = 0; i < s.segments.size(); ++i) {
    const auto& a = s.segments[i];
    if (a.start < 0 || a.end > static_cast<int>(s.word.phonemes.size()) || a.start >= a.end) return "segment range";
    for (size_t j = i + 1; j < s.segments.size(); ++j) {
      const auto& b = s.segments[j];
      if (a.start < b.end && b.start < a.end) return "overlapping segments";
      if (a.color_index == b.color_index) return "shared active color";
    }
  }
  // Tree depth and parentage.
  for (const auto& n : s.tree.nodes) {
    if (n.depth < 1 || n.depth > 2) return "tree depth";
    if (n.parent_id.empty() != (n.depth == 1)) return "tree parent/depth mismatch";
    if (!n.parent_id.empty()) {
      const auto* p = s.find_semantic_node(n.parent_id);
      if (!p || p->anchor_id != n.anchor_id || p->depth != n.depth - 1) return "tree parent";
    }
  }
  // Simple graph.
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& l : s.map.links) {
    if (l.a == l.b) return "self loop";
    if (!s.map.find_node(l.a) || !s.map.find_node(l.b)) return "dangling link";
    if (!pairs.insert(std::minmax(l.a, l.b)).second) return "parallel links";
  }
  // Bijection: one meaning node plus one keyword node per active choice.
  int meaning = 0;
  std::set<std::string> keyword_refs;
  for (const auto& n : s.map.nodes) {
    if (n.kind == "meaning") {
      ++meaning;
    } else if (!keyword_refs.insert(n.source_ref).second) {
      return "two nodes for one keyword";
    }
  }
  std::set<std::string> choices;
  for (const auto& c : s.choices) {
    choices.insert(c.keyword_id);
    if (!s.find_segment(c.segment_id)) return "choice on inactive segment";
  }
  if (meaning != 1) return "meaning node count";
  if (choices != keyword_refs) return "keyword/node bijection";
  for (const auto& c : s.choices) {
    const auto* n = s.map.find_node(c.node_id);
    if (!n || n->label != c.keyword) return "keyword node label";
  }
  // Canvas referential integrity.
  for (const auto& e : s.canvas.elements) {
    if (e.tags.empty()) return "untagged element";
    for (const auto& t : e.tags) {
      if (!s.map.find_node(t)) return "dangling tag";
    }
  }
  for (const auto& r : s.canvas.relations) {
    if (!s.canvas.find_element(r.a) || !s.canvas.find_element(r.b) || r.a == r.b) return "bad relation";
  }
  return {};
}

Session random_session(std::mt19937& rng, int steps, std::string* violation) {
  auto session = Session::create(wctest::fixture_lexicon(), "s-rand", "labyrinth", "maze", std::make_shared<StepClock>());
  for (int i = 0; i < steps; ++i) {
    const size_t before = session.events().size();
    const json state_before = session.state();
    try {
      random_step(session, rng);
    } catch (const Error&) {
      if (session.events().size() != before || json(session.state()) != state_before) {
        if (violation && violation->empty()) *violation = "failed operation changed the session";
      }
    }
    if (session.events().size() > before + 1 && violation && violation->empty()) {
      *violation = "operation appended more than one event";
    }
    if (violation && violation->empty()) {
      auto v = invariant_violation(session.state());
      if (!v.empty()) *violation = v;
    }
  }
  return session;
}

// ---------------------------------------------------------------------------
// Criterion 4: gating
// ---------------------------------------------------------------------------

std::pair<bool, std::string> gating() {
  std::mt19937 rng(kSeed + 1);
  auto templates = wctest::zh_templates();
  StyleRegistry styles;
  int complete = 0;
  int incomplete = 0;
  std::vector<std::string> problems;
  for (int i = 0; i < kGatingSessions; ++i) {
    auto s = random_session(rng, 10 + static_cast<int>(rng() % 40), nullptr);
    auto truth = brute_force_truth(s.state().map, s.state().canvas);
    bool expect_complete = truth.inactive_nodes.empty() && truth.inactive_links.empty();
    try {
      auto req = build_image_request(s, templates, styles, "pixar_animation");
      ++complete;
      if (!expect_complete) problems.push_back("request built for an incomplete canvas");
      if (req.layout.size() != s.state().canvas.elements.size()) problems.push_back("layout size");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRecallPathIncomplete) {
        problems.push_back(std::string("unexpected ") + std::string(error_name(e.code())));
        continue;
      }
      ++incomplete;
      if (expect_complete) problems.push_back("complete canvas rejected");
      std::set<std::string> nodes;
      std::set<std::string> links;
      for (const auto& n : e.details()["missing_nodes"]) nodes.insert(n["node_id"].get<std::string>());
      for (const auto& l : e.details()["missing_links"]) links.insert(l["link_id"].get<std::string>());
      if (nodes != truth.inactive_nodes || links != truth.inactive_links) problems.push_back("missing-item list differs");
    }
  }
  bool ok = problems.empty() && complete > 0 && incomplete > 0;
  std::string detail = std::to_string(kGatingSessions) + " sessions, " + std::to_string(complete) + " complete, " +
                       std::to_string(incomplete) + " gated";
  if (!problems.empty()) detail += "; first problem: " + problems.front();
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// Criterion 5: structural invariants under fuzzing
// ---------------------------------------------------------------------------

std::pair<bool, std::string> structural_fuzz() {
  std::mt19937 rng(kSeed + 2);
  int violations = 0;
  std::string first;
  long long events = 0;
  for (int i = 0; i < kFuzzSequences; ++i) {
    std::string violation;
    auto s = random_session(rng, kFuzzStepsPerSequence, &violation);
    if (rng() % 4 == 0) {
      try {
        record_word_card(s, true);
        size_t n = s.events().size();
        try {
          tick_active(s, 10);
          violation = "recorded session accepted a mutation";
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kSessionClosed || s.events().size() != n) violation = "recorded session mutated";
        }
      } catch (const Error& e) {
        violation = std::string("record failed: ") + e.what();
      }
    }
    auto replayed = Session::replay(s.events());
    if (json(replayed.state()).dump() != json(s.state()).dump()) violation = "replay differs";
    events += static_cast<long long>(s.events().size());
    if (!violation.empty()) {
      ++violations;
      if (first.empty()) first = violation;
    }
  }
  std::string detail = std::to_string(kFuzzSequences) + " sequences, " + std::to_string(events) + " events, " +
                       std::to_string(violations) + " violations";
  if (!first.empty()) detail += "; first: " + first;
  return {violations == 0, detail};
}

// ---------------------------------------------------------------------------
// Criterion 6: prompt fidelity
// ---------------------------------------------------------------------------

Session labyrinth_session() {
  auto s = Session::create(wctest::fixture_lexicon(), "s-0001", "labyrinth", "maze", std::make_shared<StepClock>());
  auto seg_a = brush_segment(s, 0, 3);
  auto speaker = select_keyword(s, seg_a.segment_id, KeywordSource::typed("喇叭", "speaker"));
  NewSemanticNode intricate;
  intricate.concept_text = "错综复杂";
  intricate.translation = "intricate";
  auto n = add_semantic_node(s, intricate);
  auto seg_b = brush_segment(s, 3, 8);
  auto faint = select_keyword(s, seg_b.segment_id, KeywordSource::typed("晕死", "faint"), {n.node_id});
  const auto meaning = s.state().map.meaning_node()->node_id;
  upsert_link(s, speaker.node_id, faint.node_id);
  auto el1 = add_element(s, {BBox{0.1, 0.1, 0.5, 0.6}, {meaning, speaker.node_id},
                             "A complex labyrinth lined with speakers, their acoustic echoes resonating in all directions"});
  auto el2 = add_element(s, {BBox{0.62, 0.35, 0.33, 0.55}, {faint.node_id},
                             "A weak person lying on the ground, eyes swirling, with little stars spinning overhead"});
  add_relation(s, el1.element_id, el2.element_id, "This person is inside the labyrinth");
  return s;
}

std::map<std::string, std::string> rendered_fixtures() {
  auto templates = wctest::zh_templates();
  std::map<std::string, std::string> out;
  auto render = [&](std::string_view id, const json& vars) {
    out[std::string(id)] = templates.render(id, vars).front().content;
  };
  render(template_ids::kKeywordGen, {{"ipa", "rɪnθ"}, {"related", {"大声", "错综复杂"}}});
  render(template_ids::kKeywordReview, {{"ipa", "rɪnθ"},
                                        {"related", {"大声", "错综复杂"}},
                                        {"candidates", wctest::keyword_candidates(3)},
                                        {"exclude", {"流星"}}});
  render(template_ids::kSemanticAssoc, {{"target", "labyrinth"}, {"existing", json::array()}});
  {
    // Speaker-to-meaning link carrying a chain and two notes.
    auto s = labyrinth_session();
    const auto& st = s.state();
    const auto* speaker = st.map.find_node(st.choices.front().node_id);
    const std::string link_id = st.map.find_link_between(speaker->node_id, st.map.meaning_node()->node_id)->link_id;
    set_chain(s, link_id, "dizziness");
    add_note(s, link_id, "The speaker can guide the way in the labyrinth");
    add_note(s, link_id, "喇叭的噪音让人不舒服");
    render(template_ids::kAssocHints, hint_variables(s.state(), *s.state().map.find_link(link_id)));
  }
  render(template_ids::kImageryRecommender, {{"nodes", {"晕死"}}, {"existing", json::array()}});
  render(template_ids::kSceneRelation,
         {{"left", "[迷宫, 喇叭] A complex labyrinth lined with speakers"}, {"right", "[晕死] A weak person lying on the ground"}});
  StyleRegistry styles;
  auto s = labyrinth_session();
  out[std::string(template_ids::kImageCompose)] = build_image_request(s, templates, styles, "pixar_animation").prompt;
  return out;
}

std::pair<bool, std::string> prompt_fidelity() {
  const std::map<std::string, std::string> required = {
      {"keyword_gen", "generate 20 candidate Chinese homophones/phrases"},
      {"keyword_review", "select 4 'best homophones'"},
      {"semantic_assoc", "No more than 5 Chinese characters."},
      {"assoc_hints", "3-5 subtle but professional Chinese sentences"},
      {"imagery_recommender", "2-6 Chinese characters"},
      {"scene_relation", "12-26 Chinese characters"},
      {"image_compose", "Do not retain the black bounding box lines"}};
  auto rendered = rendered_fixtures();
  auto again = rendered_fixtures();
  const auto golden_dir = wctest::source_dir() / "tests" / "golden";
  const bool update = std::getenv("WORDCRAFT_UPDATE_GOLDENS") != nullptr;
  std::vector<std::string> problems;
  for (const auto& [id, line] : required) {
    const auto& text = rendered.at(id);
    if (text.find(line) == std::string::npos) problems.push_back(id + " lacks its constraint line");
    if (text != again.at(id)) problems.push_back(id + " render not deterministic");
    auto file = golden_dir / ("prompt_" + id + ".txt");
    if (update) {
      std::ofstream(file, std::ios::binary) << text;
    }
    std::ifstream in(file, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    if (!in.good() && buf.str().empty()) {
      problems.push_back(id + " golden missing");
    } else if (buf.str() != text) {
      problems.push_back(id + " differs from golden");
    }
  }
  std::string detail = std::to_string(required.size()) + " templates checked against goldens";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// ---------------------------------------------------------------------------
// Criterion 7: default temperatures
// ---------------------------------------------------------------------------

std::pair<bool, std::string> temperatures() {
  auto mock = std::make_shared<MockProvider>(std::vector<MockResponse>{
      MockResponse::text(wctest::keyword_candidates(20).dump()),
      MockResponse::text(wctest::reviewed({"晕死", "忍", "人声", "流星"}).dump())});
  auto gw = wctest::make_gateway(mock);
  auto s = Session::create(wctest::fixture_lexicon(), "s-t", "labyrinth", "maze");
  auto seg = brush_segment(s, 3, 8);
  suggest_keywords(s, *gw, seg.segment_id, {});
  auto calls = mock->recorded();
  bool ok = calls.size() == 2 && calls[0].template_id == "keyword_gen" && calls[0].temperature == 1.0 &&
            calls[1].template_id == "keyword_review" && calls[1].temperature == 0.3;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "keyword_gen %.1f, keyword_review %.1f", calls.size() > 0 ? calls[0].temperature : -1,
                calls.size() > 1 ? calls[1].temperature : -1);
  return {ok, buf};
}

}  // namespace

int main() {
  criterion("labyrinth_end_to_end_replay", labyrinth_replay);
  criterion("pipeline_cardinality", pipeline_cardinality);
  criterion("coverage_oracle_exhaustive", coverage_oracle);
  criterion("image_request_gating", gating);
  criterion("structural_invariants_fuzz", structural_fuzz);
  criterion("prompt_fidelity", prompt_fidelity);
  criterion("default_temperatures", temperatures);
  std::cout << (g_failures == 0 ? "ALL PASS" : std::to_string(g_failures) + " FAILED") << std::endl;
  return g_failures == 0 ? 0 : 1;
}
