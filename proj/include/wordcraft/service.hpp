#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "wordcraft/gateway.hpp"
#include "wordcraft/imagery_canvas.hpp"
#include "wordcraft/lexicon.hpp"
#include "wordcraft/session.hpp"

namespace wordcraft {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path config_dir = "config";
  std::filesystem::path data_dir = "data";
  std::filesystem::path lexicon;  // empty: <config_dir>/lexicon.jsonl
  std::string profile = "zh-en";
  bool mock_provider = false;
  std::filesystem::path mock_script;  // JSON fixture list for the mock provider
  size_t image_workers = 2;
  std::string auth_token_env;  // env var holding a bearer token; empty disables auth
  double imageability_cutoff = kDefaultImageabilityCutoff;
  int syllable_cutoff = kDefaultSyllableCutoff;
  ProviderConfig provider;
  std::map<std::string, GenerationParams> generation;
  std::map<std::string, std::string> styles;

  /// Reads a JSON config file. Relative paths resolve against the file's
  /// directory. Throws kConfigError.
  static ServiceConfig load(const std::filesystem::path& file);
};

/// The HTTP facade. Owns the lexicon, gateway, session store, image jobs and
/// card directory.
class Service {
 public:
  /// `provider` overrides the configured one (tests inject a MockProvider).
  /// Throws kConfigError when the data dir is not writable or config files
  /// are missing.
  explicit Service(ServiceConfig config, std::shared_ptr<Provider> provider = nullptr,
                   std::shared_ptr<Clock> clock = nullptr);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound
  /// port. Throws kPortInUse.
  int bind();
  /// Serves until stop(). Call bind() first.
  void listen();
  void stop();
  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

  const ServiceConfig& config() const;
  const Lexicon& lexicon() const;
  const Gateway& gateway() const;
  SessionStore& sessions();
  ImageJobs& jobs();
  std::filesystem::path cards_dir() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wordcraft
