#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>

#include "wordcraft/service.hpp"

namespace {
wordcraft::Service* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wordcraft keyword-mnemonic learning service"};
  std::string config_file;
  std::string data_dir;
  std::string profile;
  std::string mock_script;
  std::string lexicon;
  int port = -1;
  bool mock = false;
  app.add_option("--config", config_file, "JSON config file (default: config/wordcraft.json when present)");
  app.add_option("--port", port, "listen port (0 picks a free port)");
  app.add_option("--data-dir", data_dir, "directory for sessions, images and cards");
  app.add_option("--profile", profile, "language-pair profile id");
  app.add_flag("--mock-provider", mock, "use the scripted mock provider instead of the live API");
  app.add_option("--mock-script", mock_script, "JSON fixture list replayed by the mock provider");
  app.add_option("--lexicon", lexicon, "lexicon file (newline-delimited JSON)");
  CLI11_PARSE(app, argc, argv);

  try {
    wordcraft::ServiceConfig cfg;
    if (config_file.empty() && std::filesystem::exists("config/wordcraft.json")) config_file = "config/wordcraft.json";
    if (!config_file.empty()) cfg = wordcraft::ServiceConfig::load(config_file);
    if (port >= 0) cfg.port = port;
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (!profile.empty()) cfg.profile = profile;
    if (mock) cfg.mock_provider = true;
    if (!mock_script.empty()) cfg.mock_script = mock_script;
    if (!lexicon.empty()) cfg.lexicon = lexicon;
    cfg.provider.apply_environment();

    wordcraft::Service service(cfg);
    int bound = service.bind();
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "wordcraft: listening on " << cfg.host << ":" << bound << " (" << service.gateway().mode()
              << " provider, profile " << cfg.profile << ")\n";
    service.listen();
    g_service = nullptr;
  } catch (const wordcraft::Error& e) {
    std::cerr << "wordcraft: " << e.to_json().dump() << '\n';
    return 1;
  }
  return 0;
}
