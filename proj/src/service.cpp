#include "wordcraft/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "wordcraft/association_map.hpp"
#include "wordcraft/keyword_selection.hpp"

namespace wordcraft {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

ServiceConfig ServiceConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, "bad config " + file.string() + ": " + e.what());
  }
  const fs::path base = file.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  ServiceConfig c;
  c.config_dir = base;
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    if (j.contains("data_dir")) c.data_dir = resolve(j["data_dir"].get<std::string>());
    if (j.contains("lexicon")) c.lexicon = resolve(j["lexicon"].get<std::string>());
    c.profile = j.value("profile", c.profile);
    c.mock_provider = j.value("mock_provider", false);
    if (j.contains("mock_script") && j["mock_script"].is_string()) {
      c.mock_script = resolve(j["mock_script"].get<std::string>());
    }
    c.image_workers = j.value("image_workers", c.image_workers);
    if (j.contains("auth_token_env") && j["auth_token_env"].is_string()) c.auth_token_env = j["auth_token_env"];
    if (j.contains("classification")) {
      const auto& k = j["classification"];
      c.imageability_cutoff = k.value("imageability_cutoff", c.imageability_cutoff);
      c.syllable_cutoff = k.value("syllable_cutoff", c.syllable_cutoff);
    }
    if (j.contains("provider")) {
      const auto& p = j["provider"];
      auto& pc = c.provider;
      pc.base_url = p.value("base_url", pc.base_url);
      pc.credential_env = p.value("credential_env", pc.credential_env);
      pc.text_model_id = p.value("text_model_id", pc.text_model_id);
      pc.image_model_id = p.value("image_model_id", pc.image_model_id);
      pc.max_image_prompt_bytes = p.value("max_image_prompt_bytes", pc.max_image_prompt_bytes);
      pc.image_size = p.value("image_size", pc.image_size);
    }
    const json generation = j.value("generation", json::object());
    for (const auto& [id, g] : generation.items()) {
      auto params = default_params_for(id);
      params.temperature = g.value("temperature", params.temperature);
      params.max_retries = g.value("max_retries", params.max_retries);
      params.timeout_ms = g.value("timeout_ms", params.timeout_ms);
      c.generation[id] = params;
    }
    const json styles = j.value("styles", json::object());
    for (const auto& [id, d] : styles.items()) c.styles[id] = d.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, "bad config " + file.string() + ": " + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Service
// ---------------------------------------------------------------------------

namespace {

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::kBadRequest, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kBadRequest, std::string("malformed JSON body: ") + e.what());
  }
}

std::vector<std::string> string_list(const json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return {};
  return body[key].get<std::vector<std::string>>();
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) { send_json(res, http_status(e.code()), e.to_json()); }

bool valid_id(const std::string& s) {
  static const std::regex re("[A-Za-z0-9_-]+");
  return std::regex_match(s, re);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorCode::kConfigError, "cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  Lexicon lexicon;
  std::shared_ptr<Gateway> gateway;
  StyleRegistry styles;
  std::unique_ptr<SessionStore> store;
  std::unique_ptr<ImageJobs> jobs;
  httplib::Server server;
  std::mutex cards_mu;
  int port = 0;

  Impl(ServiceConfig cfg, std::shared_ptr<Provider> provider, std::shared_ptr<Clock> clock);
  void routes();
  fs::path cards_dir() const { return config.data_dir / "cards"; }

  using Handler = std::function<json(const httplib::Request&, httplib::Response&)>;
  httplib::Server::Handler wrap(Handler h, int ok = 200);

  json session_view(const Session& s) const {
    auto j = snapshot_json(s);
    j["session_id"] = s.id();
    return j;
  }
  json image_request(const std::string& sid, const std::string& style, const std::string& key);
  json record_card(const std::string& sid, bool allow_no_image);
  std::vector<json> load_cards();
};

Service::Impl::Impl(ServiceConfig cfg, std::shared_ptr<Provider> provider, std::shared_ptr<Clock> clock)
    : config(std::move(cfg)) {
  std::error_code ec;
  fs::create_directories(config.data_dir / "sessions", ec);
  if (!ec) fs::create_directories(config.data_dir / "cards", ec);
  if (ec) {
    throw Error(ErrorCode::kConfigError, "data dir " + config.data_dir.string() + " is not writable: " + ec.message(),
                json{{"data_dir", config.data_dir.string()}});
  }
  {
    auto probe = config.data_dir / ".write-probe";
    std::ofstream out(probe);
    out << "ok";
    if (!out) {
      throw Error(ErrorCode::kConfigError, "data dir " + config.data_dir.string() + " is not writable",
                  json{{"data_dir", config.data_dir.string()}});
    }
    out.close();
    fs::remove(probe, ec);
  }

  const auto prompts = config.config_dir / "prompts" / config.profile;
  Profile profile = fs::exists(prompts / "profile.json") ? Profile::load(prompts / "profile.json") : Profile::zh_en();
  auto templates = TemplateStore::load(prompts);
  lexicon = Lexicon::load(config.lexicon.empty() ? config.config_dir / "lexicon.jsonl" : config.lexicon, &profile);
  for (const auto& w : syllable_warnings(lexicon, profile)) std::cerr << "wordcraft: " << w << '\n';

  config.provider.profile = config.profile;
  if (!provider) {
    if (config.mock_provider) {
      provider = config.mock_script.empty() ? std::make_shared<MockProvider>()
                                            : std::shared_ptr<Provider>(MockProvider::from_file(config.mock_script));
    } else {
      provider = std::make_shared<HttpProvider>(config.provider);
    }
  }
  gateway = std::make_shared<Gateway>(config.provider, std::move(templates), std::move(profile), std::move(provider));
  for (const auto& [id, params] : config.generation) gateway->set_params(id, params);
  for (const auto& [id, d] : config.styles) styles.add(id, d);

  store = std::make_unique<SessionStore>(config.data_dir, clock ? clock : std::make_shared<SystemClock>());
  store->load_all();
  jobs = std::make_unique<ImageJobs>(config.data_dir, gateway, config.image_workers);
  routes();
}

httplib::Server::Handler Service::Impl::wrap(Handler h, int ok) {
  return [h = std::move(h), ok](const httplib::Request& req, httplib::Response& res) {
    try {
      auto body = h(req, res);
      send_json(res, ok, body);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorCode::kBadRequest, std::string("invalid request field: ") + e.what()));
    } catch (const std::exception& e) {
      send_error(res, Error(ErrorCode::kInternalError, e.what()));
    }
  };
}

json Service::Impl::image_request(const std::string& sid, const std::string& style, const std::string& key) {
  return store->with_session(sid, [&](Session& s) {
    if (s.closed()) throw Error(ErrorCode::kSessionClosed, "session " + sid + " is already recorded");
    auto request = build_image_request(s, gateway->templates(), styles, style);
    auto job = jobs->submit(sid, request, key, [this, sid](const ImageJob& done) {
      store->with_session(sid, [&](Session& target) {
        attach_image(target, GeneratedImage{done.image_ref, done.job_id, done.style, done.width, done.height});
      });
    });
    return json{{"job", job}, {"request", request}};
  });
}

json Service::Impl::record_card(const std::string& sid, bool allow_no_image) {
  auto card = store->with_session(sid, [&](Session& s) { return record_word_card(s, allow_no_image); });
  json j = card;
  std::lock_guard lock(cards_mu);
  write_file_atomic(cards_dir() / (card.card_id + ".json"), j.dump(2));
  if (!card.image_ref.empty()) {
    std::error_code ec;
    fs::copy_file(config.data_dir / card.image_ref, cards_dir() / (card.card_id + ".png"),
                  fs::copy_options::overwrite_existing, ec);
    if (ec) std::cerr << "wordcraft: could not copy card image: " << ec.message() << '\n';
  }
  return j;
}

std::vector<json> Service::Impl::load_cards() {
  std::vector<json> cards;
  std::lock_guard lock(cards_mu);
  for (const auto& entry : fs::directory_iterator(cards_dir())) {
    if (entry.path().extension() != ".json") continue;
    try {
      cards.push_back(json::parse(read_file(entry.path())));
    } catch (const json::exception& e) {
      std::cerr << "wordcraft: skipping unreadable card " << entry.path() << ": " << e.what() << '\n';
    }
  }
  std::sort(cards.begin(), cards.end(), [](const json& a, const json& b) {
    auto ta = a.value("created_at", int64_t{0});
    auto tb = b.value("created_at", int64_t{0});
    if (ta != tb) return ta > tb;
    return a.value("card_id", std::string()) > b.value("card_id", std::string());
  });
  return cards;
}

void Service::Impl::routes() {
  auto& s = server;
  s.set_payload_max_length(8 * 1024 * 1024);

  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) {
      send_error(res, Error(ErrorCode::kNotFound, "no route for " + req.method + " " + req.path));
    } else {
      send_error(res, Error(ErrorCode::kBadRequest, "request rejected (HTTP " + std::to_string(res.status) + ")"));
    }
  });

  s.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (config.auth_token_env.empty() || req.path == "/healthz") return httplib::Server::HandlerResponse::Unhandled;
    const char* token = std::getenv(config.auth_token_env.c_str());
    if (token == nullptr || *token == '\0') return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") != std::string("Bearer ") + token) {
      send_error(res, Error(ErrorCode::kUnauthorized, "missing or invalid bearer token"));
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  s.Get("/healthz", wrap([this](auto&, auto&) {
    return json{{"status", "ok"}, {"mode", gateway->mode()}, {"profile", gateway->profile().id}};
  }));

  // Lexicon
  s.Get("/lexicon/words", wrap([this](const httplib::Request& req, auto&) {
    json words = json::array();
    auto q = req.get_param_value("q");
    std::vector<const WordEntry*> hits;
    if (q.empty()) {
      for (const auto& e : lexicon.entries()) hits.push_back(&e);
    } else {
      hits = lexicon.search(q);
    }
    for (const auto* e : hits) {
      json w = *e;
      w["category"] = to_string(classify_word(*e, config.imageability_cutoff, config.syllable_cutoff));
      words.push_back(std::move(w));
    }
    return json{{"words", words}};
  }));

  // Sessions
  s.Post("/sessions", wrap(
                          [this](const httplib::Request& req, auto&) {
                            auto b = body_of(req);
                            auto id = store->create(lexicon, b.at("word_id").get<std::string>(),
                                                    b.at("sense_id").get<std::string>());
                            return session_view(store->snapshot(id));
                          },
                          201));

  s.Get("/sessions/:id", wrap([this](const httplib::Request& req, auto&) {
    return session_view(store->snapshot(req.path_params.at("id")));
  }));

  s.Post("/sessions/:id/tick", wrap([this](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      tick_active(x, b.at("delta_ms").get<int64_t>());
      return json{{"total_active_ms", x.state().total_active_ms}};
    });
  }));

  // Keyword selection
  s.Post("/sessions/:id/segments", wrap(
                                       [this](const httplib::Request& req, auto&) {
                                         auto b = body_of(req);
                                         return store->with_session(req.path_params.at("id"), [&](Session& x) {
                                           return json(brush_segment(x, b.at("start").get<int>(), b.at("end").get<int>()));
                                         });
                                       },
                                       201));

  s.Delete("/sessions/:id/segments", wrap([this](const httplib::Request& req, auto&) {
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      clear_segments(x);
      return json{{"segments", x.state().segments}, {"archived_segments", x.state().archived_segments}};
    });
  }));

  s.Post("/sessions/:id/tree/nodes", wrap(
                                         [this](const httplib::Request& req, auto&) {
                                           auto b = body_of(req);
                                           NewSemanticNode n;
                                           n.anchor_id = b.value("anchor_id", std::string(kMeaningAnchor));
                                           if (b.contains("parent_id") && b["parent_id"].is_string()) n.parent_id = b["parent_id"];
                                           n.concept_text = b.at("concept").get<std::string>();
                                           n.cue = b.value("cue", "");
                                           n.translation = b.value("translation", "");
                                           n.origin = b.value("origin", "user");
                                           return store->with_session(req.path_params.at("id"), [&](Session& x) {
                                             return json(add_semantic_node(x, n));
                                           });
                                         },
                                         201));

  s.Post("/sessions/:id/tree/:anchor/suggest", wrap([this](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    auto snap = store->snapshot(req.path_params.at("id"));
    auto out = suggest_semantic_nodes(snap, *gateway, req.path_params.at("anchor"), b.value("count", 5));
    return json{{"candidates", out}};
  }));

  s.Post("/sessions/:id/segments/:sid/keywords/suggest", wrap([this](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    auto nodes = string_list(b, "node_ids");
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      return json(suggest_keywords(x, *gateway, req.path_params.at("sid"), nodes));
    });
  }));

  s.Post("/sessions/:id/segments/:sid/keywords/select", wrap([this](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    KeywordSource src = b.contains("card_id") && b["card_id"].is_string()
                            ? KeywordSource::from_card(b["card_id"])
                            : KeywordSource::typed(b.at("keyword").get<std::string>(), b.value("explanation", ""));
    auto chain = string_list(b, "chain_node_ids");
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      return json(select_keyword(x, req.path_params.at("sid"), src, chain));
    });
  }));

  // Association map
  s.Post("/sessions/:id/map/links", wrap([this](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      return json(upsert_link(x, b.at("a").get<std::string>(), b.at("b").get<std::string>()));
    });
  }));

  s.Patch("/sessions/:id/map/links/:lid", wrap([this](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    const auto& lid = req.path_params.at("lid");
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      if (!x.state().map.find_link(lid)) {
        throw Error(ErrorCode::kUnknownLink, "unknown link '" + lid + "'", json{{"link_id", lid}});
      }
      if (b.contains("chain")) set_chain(x, lid, b["chain"].get<std::string>(), 64, &gateway->profile());
      if (b.contains("note")) add_note(x, lid, b["note"].get<std::string>());
      return json(*x.state().map.find_link(lid));
    });
  }));

  s.Delete("/sessions/:id/map/links/:lid", wrap([this](const httplib::Request& req, auto&) {
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      delete_link(x, req.path_params.at("lid"));
      return json{{"deleted", req.path_params.at("lid")}};
    });
  }));

  s.Patch("/sessions/:id/map", wrap([this](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      set_association(x, b.at("association").get<std::string>());
      return json(x.state().map);
    });
  }));

  s.Post("/sessions/:id/map/links/:lid/hints", wrap([this](const httplib::Request& req, auto&) {
    auto snap = store->snapshot(req.path_params.at("id"));
    return json{{"hints", suggest_hints(snap, *gateway, req.path_params.at("lid"))}};
  }));

  // Canvas
  auto element_view = [](const SessionState& st, const CanvasElement& e) {
    json j = e;
    json pie = json::array();
    for (const auto& p : pie_slices(st.map, e)) {
      pie.push_back({{"node_id", p.node_id}, {"color_index", p.color_index}, {"fraction", p.fraction}});
    }
    j["pie"] = pie;
    return j;
  };

  s.Post("/sessions/:id/canvas/elements", wrap(
                                              [this, element_view](const httplib::Request& req, auto&) {
                                                auto b = body_of(req);
                                                ElementDraft d{b.at("bbox").get<BBox>(), string_list(b, "tags"),
                                                               b.value("description", "")};
                                                return store->with_session(req.path_params.at("id"), [&](Session& x) {
                                                  auto e = add_element(x, d);
                                                  return element_view(x.state(), e);
                                                });
                                              },
                                              201));

  s.Patch("/sessions/:id/canvas/elements/:eid", wrap([this, element_view](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    ElementPatch p;
    if (b.contains("bbox")) p.bbox = b["bbox"].get<BBox>();
    if (b.contains("tags")) p.tags = string_list(b, "tags");
    if (b.contains("description")) p.description = b["description"].get<std::string>();
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      auto e = update_element(x, req.path_params.at("eid"), p);
      return element_view(x.state(), e);
    });
  }));

  s.Delete("/sessions/:id/canvas/elements/:eid", wrap([this](const httplib::Request& req, auto&) {
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      delete_element(x, req.path_params.at("eid"));
      return json{{"deleted", req.path_params.at("eid")}};
    });
  }));

  s.Post("/sessions/:id/canvas/relations", wrap(
                                               [this](const httplib::Request& req, auto&) {
                                                 auto b = body_of(req);
                                                 return store->with_session(req.path_params.at("id"), [&](Session& x) {
                                                   return json(add_relation(x, b.at("a").get<std::string>(),
                                                                            b.at("b").get<std::string>(),
                                                                            b.value("text", "")));
                                                 });
                                               },
                                               201));

  s.Delete("/sessions/:id/canvas/relations/:rid", wrap([this](const httplib::Request& req, auto&) {
    return store->with_session(req.path_params.at("id"), [&](Session& x) {
      delete_relation(x, req.path_params.at("rid"));
      return json{{"deleted", req.path_params.at("rid")}};
    });
  }));

  s.Post("/sessions/:id/canvas/suggest-elements", wrap([this](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    auto snap = store->snapshot(req.path_params.at("id"));
    return json{{"suggestions", suggest_visual_elements(snap, *gateway, string_list(b, "node_ids"))}};
  }));

  s.Post("/sessions/:id/canvas/suggest-relations", wrap([this](const httplib::Request& req, auto&) {
    auto b = body_of(req);
    auto snap = store->snapshot(req.path_params.at("id"));
    return json{{"suggestions", suggest_relations(snap, *gateway, b.at("a").get<std::string>(),
                                                  b.at("b").get<std::string>())}};
  }));

  s.Get("/sessions/:id/recall-path", wrap([this](const httplib::Request& req, auto&) {
    return json(derive_recall_path(store->snapshot(req.path_params.at("id"))));
  }));

  // Images and cards
  s.Post("/sessions/:id/image", wrap(
                                    [this](const httplib::Request& req, auto&) {
                                      auto b = body_of(req);
                                      return image_request(req.path_params.at("id"),
                                                           b.value("style", "pixar_animation"),
                                                           req.get_header_value("Idempotency-Key"));
                                    },
                                    202));

  s.Get("/sessions/:id/images/:name", [this](const httplib::Request& req, httplib::Response& res) {
    static const std::regex name_re("img-[0-9]+\\.png");
    const auto& sid = req.path_params.at("id");
    const auto& name = req.path_params.at("name");
    auto file = config.data_dir / "sessions" / sid / "images" / name;
    if (!valid_id(sid) || !std::regex_match(name, name_re) || !fs::exists(file)) {
      send_error(res, Error(ErrorCode::kNotFound, "no image " + name));
      return;
    }
    res.set_content(read_file(file), "image/png");
  });

  s.Get("/jobs/:jid", wrap([this](const httplib::Request& req, auto&) {
    auto job = jobs->get(req.path_params.at("jid"));
    if (!job) {
      throw Error(ErrorCode::kUnknownJob, "unknown job '" + req.path_params.at("jid") + "'",
                  json{{"job_id", req.path_params.at("jid")}});
    }
    return json(*job);
  }));

  s.Post("/sessions/:id/card", wrap(
                                   [this](const httplib::Request& req, auto&) {
                                     auto b = body_of(req);
                                     return record_card(req.path_params.at("id"), b.value("allow_no_image", false));
                                   },
                                   201));

  s.Get("/cards", wrap([this](auto&, auto&) { return json{{"cards", load_cards()}}; }));

  s.Get("/cards/:cid", wrap([this](const httplib::Request& req, auto&) {
    const auto& cid = req.path_params.at("cid");
    auto file = cards_dir() / (cid + ".json");
    if (!valid_id(cid) || !fs::exists(file)) {
      throw Error(ErrorCode::kUnknownWordCard, "unknown word card '" + cid + "'", json{{"card_id", cid}});
    }
    std::lock_guard lock(cards_mu);
    return json::parse(read_file(file));
  }));
}

Service::Service(ServiceConfig config, std::shared_ptr<Provider> provider, std::shared_ptr<Clock> clock)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(provider), std::move(clock))) {}

Service::~Service() {
  stop();
  impl_.reset();
}

int Service::bind() {
  auto& c = impl_->config;
  // The library default also sets SO_REUSEPORT, which would let a second
  // server share a busy port.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  if (c.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(c.host);
  } else {
    impl_->port = impl_->server.bind_to_port(c.host, c.port) ? c.port : -1;
  }
  if (impl_->port < 0) {
    throw Error(ErrorCode::kPortInUse, "cannot bind " + c.host + ":" + std::to_string(c.port),
                json{{"host", c.host}, {"port", c.port}});
  }
  return impl_->port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

const ServiceConfig& Service::config() const { return impl_->config; }
const Lexicon& Service::lexicon() const { return impl_->lexicon; }
const Gateway& Service::gateway() const { return *impl_->gateway; }
SessionStore& Service::sessions() { return *impl_->store; }
ImageJobs& Service::jobs() { return *impl_->jobs; }
fs::path Service::cards_dir() const { return impl_->cards_dir(); }

}  // namespace wordcraft
