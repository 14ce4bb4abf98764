#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "support/fixtures.hpp"

using namespace wordcraft;
using wctest::json;

namespace {

/// Service listening on a background thread for the lifetime of the object.
struct Running {
  Service service;
  int port = 0;
  std::thread thread;

  explicit Running(ServiceConfig config, std::shared_ptr<Provider> provider = nullptr)
      : service(std::move(config), std::move(provider), std::make_shared<StepClock>()) {
    port = service.bind();
    thread = std::thread([this] { service.listen(); });
    service.wait_until_ready();
  }
  ~Running() {
    service.stop();
    thread.join();
  }

  std::pair<int, json> call(const std::string& method, const std::string& path, const json& body = nullptr,
                            const httplib::Headers& headers = {}) {
    httplib::Client c("127.0.0.1", port);
    const std::string payload = body.is_null() ? std::string() : body.dump();
    auto r = method == "GET"    ? c.Get(path, headers)
             : method == "POST" ? c.Post(path, headers, payload, "application/json")
                                : c.Delete(path, headers, payload, "application/json");
    REQUIRE(r);
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kCount;
}

}  // namespace

TEST_CASE("health and routing errors") {
  wctest::TempDir dir("svc");
  Running r(wctest::test_config(dir.path), std::make_shared<MockProvider>());
  auto [status, body] = r.call("GET", "/healthz");
  CHECK(status == 200);
  CHECK(body["mode"] == "mock");
  CHECK(body["profile"] == "zh-en");

  std::tie(status, body) = r.call("GET", "/no/such/route");
  CHECK(status == 404);
  CHECK(body["code"] == "NOT_FOUND");

  std::tie(status, body) = r.call("GET", "/sessions/s-0404");
  CHECK(status == 404);
  CHECK(body["code"] == "UNKNOWN_SESSION");

  std::tie(status, body) = r.call("POST", "/sessions", {{"word_id", "labyrinth"}});
  CHECK(status == 400);

  std::tie(status, body) = r.call("GET", "/lexicon/words?q=lab");
  CHECK(status == 200);
  CHECK(body["words"][0]["word_id"] == "labyrinth");
}

TEST_CASE("unwritable data dir is a config error") {
  wctest::TempDir dir("svc-bad");
  std::ofstream(dir.path / "file") << "x";
  auto cfg = wctest::test_config(dir.path / "file" / "data");
  CHECK(code_of([&] { Service s(cfg, std::make_shared<MockProvider>()); }) == ErrorCode::kConfigError);
}

TEST_CASE("port already in use") {
  wctest::TempDir d1("svc-p1");
  wctest::TempDir d2("svc-p2");
  Running first(wctest::test_config(d1.path), std::make_shared<MockProvider>());
  auto cfg = wctest::test_config(d2.path);
  cfg.port = first.port;
  Service second(cfg, std::make_shared<MockProvider>());
  CHECK(code_of([&] { second.bind(); }) == ErrorCode::kPortInUse);
}

TEST_CASE("cards are listed newest first and persisted") {
  wctest::TempDir dir("svc-cards");
  Running r(wctest::test_config(dir.path), std::make_shared<MockProvider>());
  std::vector<std::string> ids;
  for (const char* word : {"labyrinth", "lantern"}) {
    const auto* entry = r.service.lexicon().find(word);
    REQUIRE(entry != nullptr);
    auto [st, session] = r.call("POST", "/sessions", {{"word_id", word}, {"sense_id", entry->senses[0].sense_id}});
    REQUIRE(st == 201);
    auto [cs, card] = r.call("POST", "/sessions/" + session["session_id"].get<std::string>() + "/card",
                             {{"allow_no_image", true}});
    REQUIRE(cs == 201);
    ids.push_back(card["card_id"]);
    CHECK(wctest::fs::exists(r.service.cards_dir() / (ids.back() + ".json")));
  }
  auto [status, list] = r.call("GET", "/cards");
  CHECK(status == 200);
  REQUIRE(list["cards"].size() == 2);
  CHECK(list["cards"][0]["card_id"] == ids[1]);
  CHECK(list["cards"][1]["card_id"] == ids[0]);
  auto [gs, card] = r.call("GET", "/cards/" + ids[0]);
  CHECK(gs == 200);
  CHECK(card["word"] == "labyrinth");
  CHECK(r.call("GET", "/cards/card-nope").second["code"] == "UNKNOWN_WORD_CARD");
}

TEST_CASE("bearer token hook") {
  ::setenv("WORDCRAFT_UNIT_TOKEN", "t0ken", 1);
  wctest::TempDir dir("svc-auth");
  auto cfg = wctest::test_config(dir.path);
  cfg.auth_token_env = "WORDCRAFT_UNIT_TOKEN";
  Running r(cfg, std::make_shared<MockProvider>());
  CHECK(r.call("GET", "/healthz").first == 200);
  auto [status, body] = r.call("GET", "/cards");
  CHECK(status == 401);
  CHECK(body["code"] == "UNAUTHORIZED");
  CHECK(r.call("GET", "/cards", nullptr, {{"Authorization", "Bearer wrong"}}).first == 401);
  CHECK(r.call("GET", "/cards", nullptr, {{"Authorization", "Bearer t0ken"}}).first == 200);
  ::unsetenv("WORDCRAFT_UNIT_TOKEN");
}

TEST_CASE("sessions survive a restart") {
  wctest::TempDir dir("svc-restart");
  std::string sid;
  json state;
  {
    Running r(wctest::test_config(dir.path), std::make_shared<MockProvider>());
    auto [st, s] = r.call("POST", "/sessions", {{"word_id", "labyrinth"}, {"sense_id", "maze"}});
    sid = s["session_id"];
    r.call("POST", "/sessions/" + sid + "/segments", {{"start", 0}, {"end", 3}});
    state = r.call("GET", "/sessions/" + sid).second["state"];
  }
  Running again(wctest::test_config(dir.path), std::make_shared<MockProvider>());
  CHECK(again.call("GET", "/sessions/" + sid).second["state"] == state);
}

TEST_CASE("persisted artifacts never contain the provider secret") {
  const std::string secret = "sk-live-do-not-leak-42";
  ::setenv("WORDCRAFT_UNIT_SECRET", secret.c_str(), 1);
  ::setenv("WORDCRAFT_PROVIDER_KEY", "WORDCRAFT_UNIT_SECRET", 1);
  wctest::TempDir dir("svc-secret");
  auto run = wctest::run_labyrinth_walkthrough(dir.path);
  CHECK(run.card_json.find(secret) == std::string::npos);
  for (const auto& f : wctest::fs::recursive_directory_iterator(dir.path)) {
    if (!f.is_regular_file()) continue;
    std::ifstream in(f.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CAPTURE(f.path().string());
    CHECK(buf.str().find(secret) == std::string::npos);
  }
  ::unsetenv("WORDCRAFT_PROVIDER_KEY");
  ::unsetenv("WORDCRAFT_UNIT_SECRET");
}
