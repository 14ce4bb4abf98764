#include "support/fixtures.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <stdexcept>
#include <thread>

namespace wctest {

using namespace wordcraft;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path = fs::temp_directory_path() /
         ("wordcraft-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::create_directories(path);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path, ec);
}

fs::path config_dir() { return WORDCRAFT_CONFIG_DIR; }
fs::path source_dir() { return WORDCRAFT_SOURCE_DIR; }

Profile zh_profile() { return Profile::load(config_dir() / "prompts" / "zh-en" / "profile.json"); }

TemplateStore zh_templates() { return TemplateStore::load(config_dir() / "prompts" / "zh-en"); }

const Lexicon& fixture_lexicon() {
  static const Lexicon lex = [] {
    auto profile = zh_profile();
    return Lexicon::load(config_dir() / "lexicon.jsonl", &profile);
  }();
  return lex;
}

std::shared_ptr<Gateway> make_gateway(std::shared_ptr<Provider> provider) {
  return std::make_shared<Gateway>(ProviderConfig{}, zh_templates(), zh_profile(), std::move(provider));
}

ServiceConfig test_config(const fs::path& data_dir) {
  ServiceConfig c;
  c.config_dir = config_dir();
  c.data_dir = data_dir;
  c.port = 0;
  c.mock_provider = true;
  c.image_workers = 1;
  c.provider.apply_environment();
  return c;
}

json keyword_candidates(int n, const std::string& prefix) {
  json out = json::array();
  for (int i = 0; i < n; ++i) {
    out.push_back({{"keyword", prefix + std::to_string(i)}, {"explanation", "解释" + std::to_string(i)}});
  }
  return out;
}

json reviewed(const std::vector<std::string>& keywords) {
  json out = json::array();
  for (const auto& k : keywords) {
    out.push_back({{"keyword", k}, {"explanation", k + "的解释"}, {"reasoning", "发音与词义都贴近：" + k}});
  }
  return out;
}

std::vector<MockResponse> labyrinth_script() {
  json concepts = json::array({{{"concept", "错综复杂"}, {"cue", "迷宫里纵横交错的道路"}, {"translation", "intricate"}}});

  json stage1 = json::array();
  const std::vector<std::pair<std::string, std::string>> gen = {
      {"晕死", "晕死，形容在错综复杂的迷宫里转得头晕"},
      {"忍", "忍，在喧闹声中只能忍耐"},
      {"人声", "人声，大声喧哗的人声"},
      {"流星", "流星，划过夜空的流星"},
      {"林森", "林森，树林森森像迷宫"},
      {"任性", "任性，任性地乱走"},
      {"仁心", "仁心，仁慈之心"},
      {"淋湿", "淋湿，被雨淋湿"},
      {"人参", "人参，一种药材"},
      {"认生", "认生，对陌生环境感到不安"},
      {"润色", "润色，修饰文字"},
      {"临审", "临审，临近审判"}};
  for (const auto& [k, e] : gen) stage1.push_back({{"keyword", k}, {"explanation", e}});

  json stage2 = json::array({
      {{"keyword", "晕死"}, {"explanation", "faint"}, {"reasoning", "“晕死”与 /rɪnθ/ 发音接近，且迷宫的错综复杂令人头晕。"}},
      {{"keyword", "忍"}, {"explanation", "endure"}, {"reasoning", "“忍”保留了 /rɪn/ 的核心音节，喧闹的大声需要忍耐。"}},
      {{"keyword", "人声"}, {"explanation", "human voice"}, {"reasoning", "“人声”音节与节奏相近，并与“大声”语义相关。"}},
      {{"keyword", "流星"}, {"explanation", "meteor"}, {"reasoning", "“流星”押住 /ɪn/ 的韵尾，画面感强烈。"}},
  });

  json hints = json::array({"The speaker may produce echoes in the labyrinth.",
                            "Walls that twist sound around can twist a sense of direction too.",
                            "Noise with no way out tires the ears before it tires the feet."});

  json visuals = json::array({"虚弱的身影", "倒在地上", "眼冒金星", "a feeble silhouette on the floor"});
  json relations = json::array({"这个人就身处在那座错综复杂的迷宫之中", "This person is inside the labyrinth"});

  return {MockResponse::text(concepts.dump()),
          MockResponse::text("Here are the candidates you asked for:\n" + stage1.dump(2) + "\nHope this helps."),
          MockResponse::text(stage2.dump()),
          MockResponse::text(hints.dump()),
          MockResponse::text(visuals.dump()),
          MockResponse::text(relations.dump()),
          MockResponse::png()};
}

namespace {

struct Http {
  httplib::Client client;
  explicit Http(int port) : client("127.0.0.1", port) {
    client.set_read_timeout(10, 0);
    client.set_connection_timeout(5, 0);
  }

  std::pair<int, json> send(const std::string& method, const std::string& path, const json& body = nullptr,
                            const httplib::Headers& headers = {}) {
    httplib::Result r;
    const std::string payload = body.is_null() ? std::string() : body.dump();
    if (method == "GET") {
      r = client.Get(path, headers);
    } else if (method == "POST") {
      r = client.Post(path, headers, payload, "application/json");
    } else if (method == "PATCH") {
      r = client.Patch(path, headers, payload, "application/json");
    } else {
      r = client.Delete(path, headers, payload, "application/json");
    }
    if (!r) throw std::runtime_error(method + " " + path + ": transport error " + httplib::to_string(r.error()));
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }

  json expect(int status, const std::string& method, const std::string& path, const json& body = nullptr,
              const httplib::Headers& headers = {}) {
    auto [got, j] = send(method, path, body, headers);
    if (got != status) {
      throw std::runtime_error(method + " " + path + ": expected " + std::to_string(status) + ", got " +
                               std::to_string(got) + " " + j.dump());
    }
    return j;
  }

  std::string raw_get(const std::string& path) {
    auto r = client.Get(path);
    if (!r || r->status != 200) throw std::runtime_error("GET " + path + " failed");
    return r->body;
  }
};

}  // namespace

WalkthroughRun run_labyrinth_walkthrough(const fs::path& data_dir) {
  WalkthroughRun out;
  out.data_dir = data_dir;
  auto mock = std::make_shared<MockProvider>(labyrinth_script());
  Service service(test_config(data_dir), mock, std::make_shared<StepClock>());
  const int port = service.bind();
  std::thread loop([&] { service.listen(); });
  service.wait_until_ready();

  struct Stop {
    Service& s;
    std::thread& t;
    ~Stop() {
      s.stop();
      if (t.joinable()) t.join();
    }
  } stop{service, loop};

  Http http(port);
  out.healthz = http.expect(200, "GET", "/healthz");

  // Overview: pick the "maze" sense.
  auto session = http.expect(201, "POST", "/sessions", {{"word_id", "labyrinth"}, {"sense_id", "maze"}});
  const std::string sid = session.at("session_id");
  const std::string base = "/sessions/" + sid;
  const std::string meaning_node = session["state"]["map"]["nodes"][0]["node_id"];
  http.expect(200, "POST", base + "/tick", {{"delta_ms", 1000}});

  // Keyword selection: first segment, typed keyword 喇叭.
  auto seg_a = http.expect(201, "POST", base + "/segments", {{"start", 0}, {"end", 3}});
  auto speaker = http.expect(200, "POST", base + "/segments/" + seg_a["segment_id"].get<std::string>() + "/keywords/select",
                             {{"keyword", "喇叭"}, {"explanation", "speaker"}});
  auto loud = http.expect(201, "POST", base + "/tree/nodes",
                          {{"anchor_id", speaker["keyword_id"]}, {"concept", "大声"}, {"translation", "loud"}});

  // Expand the meaning anchor with a suggested concept.
  auto suggested = http.expect(200, "POST", base + "/tree/meaning/suggest", {{"count", 3}});
  const auto& candidate = suggested["candidates"].at(0);
  auto intricate = http.expect(201, "POST", base + "/tree/nodes",
                               {{"anchor_id", "meaning"},
                                {"concept", candidate["concept"]},
                                {"cue", candidate["cue"]},
                                {"translation", candidate["translation"]},
                                {"origin", "suggested"}});

  // Second segment and the two-stage suggestion.
  auto seg_b = http.expect(201, "POST", base + "/segments", {{"start", 3}, {"end", 8}});
  const std::string seg_b_id = seg_b["segment_id"];
  out.keyword_batch = http.expect(200, "POST", base + "/segments/" + seg_b_id + "/keywords/suggest",
                                  {{"node_ids", {loud["node_id"], intricate["node_id"]}}});
  std::string faint_card;
  for (const auto& c : out.keyword_batch["cards"]) {
    if (c["keyword"] == "晕死") faint_card = c["card_id"];
  }
  auto faint = http.expect(200, "POST", base + "/segments/" + seg_b_id + "/keywords/select",
                           {{"card_id", faint_card}, {"chain_node_ids", {intricate["node_id"]}}});
  http.expect(200, "POST", base + "/tick", {{"delta_ms", 1500}});

  // Association construction.
  auto state = http.expect(200, "GET", base)["state"];
  auto node_of = [&](const std::string& keyword_id) {
    for (const auto& n : state["map"]["nodes"]) {
      if (n["source_ref"] == keyword_id) return n["node_id"].get<std::string>();
    }
    throw std::runtime_error("no node for " + keyword_id);
  };
  const auto speaker_node = node_of(speaker["keyword_id"]);
  const auto faint_node = node_of(faint["keyword_id"]);
  std::string speaker_link;
  for (const auto& l : state["map"]["links"]) {
    bool has_speaker = l["a"] == speaker_node || l["b"] == speaker_node;
    bool has_meaning = l["a"] == meaning_node || l["b"] == meaning_node;
    bool has_faint = l["a"] == faint_node || l["b"] == faint_node;
    if (has_speaker && has_meaning) speaker_link = l["link_id"];
    if (has_faint && has_meaning) out.first_chain_link = l;
  }
  http.expect(200, "POST", base + "/map/links", {{"a", speaker_node}, {"b", faint_node}});
  http.expect(200, "PATCH", base + "/map/links/" + speaker_link,
              {{"note", "The speaker can guide the way in the labyrinth"}});
  http.expect(200, "PATCH", base + "/map/links/" + speaker_link, {{"chain", "dizziness"}});
  out.hints = http.expect(200, "POST", base + "/map/links/" + speaker_link + "/hints")["hints"];
  http.expect(200, "PATCH", base + "/map",
              {{"association", "I felt faint in the labyrinth filled with the echoes of speakers"}});

  // Imagery canvas.
  auto el1 = http.expect(201, "POST", base + "/canvas/elements",
                         {{"bbox", {{"x", 0.1}, {"y", 0.1}, {"w", 0.5}, {"h", 0.6}}},
                          {"tags", {meaning_node, speaker_node}},
                          {"description",
                           "A complex labyrinth lined with speakers, their acoustic echoes resonating in all directions"}});
  out.visual_suggestions =
      http.expect(200, "POST", base + "/canvas/suggest-elements", {{"node_ids", {faint_node}}})["suggestions"];
  auto el2 = http.expect(201, "POST", base + "/canvas/elements",
                         {{"bbox", {{"x", 0.62}, {"y", 0.35}, {"w", 0.33}, {"h", 0.55}}},
                          {"tags", {faint_node}},
                          {"description", "A weak person lying on the ground, eyes swirling, with little stars spinning overhead"}});
  auto [gate_status, gate_body] = http.send("POST", base + "/image", {{"style", "pixar_animation"}});
  out.incomplete_status = gate_status;
  out.incomplete_error = gate_body;
  out.relation_suggestions = http.expect(200, "POST", base + "/canvas/suggest-relations",
                                         {{"a", el1["element_id"]}, {"b", el2["element_id"]}})["suggestions"];
  http.expect(201, "POST", base + "/canvas/relations",
              {{"a", el1["element_id"]}, {"b", el2["element_id"]}, {"text", "This person is inside the labyrinth"}});
  out.recall_path_final = http.expect(200, "GET", base + "/recall-path");
  http.expect(200, "POST", base + "/tick", {{"delta_ms", 2000}});

  // Image job with polling.
  httplib::Headers key{{"Idempotency-Key", "labyrinth-1"}};
  auto submitted = http.expect(202, "POST", base + "/image", {{"style", "pixar_animation"}}, key);
  const std::string job_id = submitted["job"]["job_id"];
  for (int i = 0; i < 500; ++i) {
    out.job = http.expect(200, "GET", "/jobs/" + job_id);
    if (out.job["state"] != "pending") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  auto again = http.expect(202, "POST", base + "/image", {{"style", "pixar_animation"}}, key);
  out.idempotent_job = again["job"]["job_id"] == job_id;

  // Word card.
  auto recorded = http.expect(201, "POST", base + "/card");
  const std::string card_id = recorded["card_id"];
  out.card_json = http.raw_get("/cards/" + card_id);
  out.card = json::parse(out.card_json);
  out.calls = mock->recorded();
  out.script_left = mock->remaining();
  return out;
}

}  // namespace wctest
