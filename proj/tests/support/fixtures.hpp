#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "wordcraft/gateway.hpp"
#include "wordcraft/imagery_canvas.hpp"
#include "wordcraft/lexicon.hpp"
#include "wordcraft/profile.hpp"
#include "wordcraft/service.hpp"
#include "wordcraft/session.hpp"

namespace wctest {

namespace fs = std::filesystem;
using wordcraft::json;

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

fs::path config_dir();
fs::path source_dir();
wordcraft::Profile zh_profile();
wordcraft::TemplateStore zh_templates();
const wordcraft::Lexicon& fixture_lexicon();

std::shared_ptr<wordcraft::Gateway> make_gateway(std::shared_ptr<wordcraft::Provider> provider);

/// Service config pointing at the shipped config dir, a free port and `data_dir`.
wordcraft::ServiceConfig test_config(const fs::path& data_dir);

/// keyword_gen style array with `n` distinct candidates.
json keyword_candidates(int n, const std::string& prefix = "候选");
/// keyword_review style array for the given keywords.
json reviewed(const std::vector<std::string>& keywords);

/// The seven provider responses of the labyrinth walkthrough, in call order.
std::vector<wordcraft::MockResponse> labyrinth_script();

struct WalkthroughRun {
  std::string card_json;  // GET /cards/{id} body
  json card;
  json keyword_batch;
  std::vector<std::string> hints;
  std::vector<std::string> visual_suggestions;
  std::vector<std::string> relation_suggestions;
  json first_chain_link;     // link created by selecting the card keyword
  json incomplete_error;     // body of the gated image request
  int incomplete_status = 0;
  json recall_path_final;
  json job;
  bool idempotent_job = false;
  json healthz;
  std::vector<wordcraft::RecordedCall> calls;
  size_t script_left = 0;
  fs::path data_dir;
};

/// Drives the full labyrinth walkthrough through HTTP against an in-process
/// service with a scripted mock provider and a step clock.
WalkthroughRun run_labyrinth_walkthrough(const fs::path& data_dir);

}  // namespace wctest
