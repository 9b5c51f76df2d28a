#include "charforge/api.hpp"

#include <httplib.h>

namespace charforge {

using nlohmann::json;

std::pair<int, std::string_view> api_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::PreconditionViolation: return {400, "precondition_violation"};
        case ErrorCode::BadRequest: return {400, "bad_request"};
        case ErrorCode::ValidationError: return {422, "validation_error"};
        case ErrorCode::TemplateError: return {500, "template_error"};
        case ErrorCode::ConfigError: return {500, "config_error"};
        case ErrorCode::Timeout: return {504, "provider_timeout"};
        case ErrorCode::RateLimited: return {429, "rate_limited"};
        case ErrorCode::MalformedResponse: return {502, "malformed_response"};
        case ErrorCode::ContentRefused: return {422, "content_refused"};
        case ErrorCode::ProviderUnavailable: return {502, "provider_unavailable"};
        case ErrorCode::ParseFailed: return {502, "profile_parse_failed"};
        case ErrorCode::UnknownPath: return {400, "unknown_path"};
        case ErrorCode::TypeMismatch: return {422, "type_mismatch"};
        case ErrorCode::UpstreamStale: return {409, "upstream_stale"};
        case ErrorCode::UnknownImage: return {404, "unknown_image"};
        case ErrorCode::StaleImages: return {409, "stale_images"};
        case ErrorCode::ConflictError: return {409, "revision_conflict"};
        case ErrorCode::SelfLoop: return {422, "self_loop"};
        case ErrorCode::UnknownNode: return {404, "unknown_node"};
        case ErrorCode::UnknownEdge: return {404, "unknown_edge"};
        case ErrorCode::BadLabel: return {422, "bad_label"};
        case ErrorCode::NotFound: return {404, "not_found"};
        case ErrorCode::CorruptEntity: return {500, "corrupt_entity"};
        case ErrorCode::Incomplete: return {409, "incomplete_character"};
        case ErrorCode::MissingBlob: return {500, "missing_blob"};
        case ErrorCode::SchemaMismatch: return {422, "schema_mismatch"};
    }
    return {500, "internal_error"};
}

ApiError to_api_error(const Error& e) {
    const auto [status, code] = api_status(e.code());
    json details = e.details();
    if (const auto* pe = dynamic_cast<const PipelineError*>(&e)) {
        if (!details.is_object()) details = json::object();
        details["layer"] = pe->layer();
    }
    return ApiError{status, std::string(code), e.what(), std::move(details)};
}

void to_json(json& j, const ApiError& v) {
    j = json{{"status", v.http_status}, {"code", v.code}, {"message", v.message}};
    if (!v.details.is_null()) j["details"] = v.details;
}

json session_view(const GenerationSession& session) {
    json view = externalize_session(session);
    for (auto& image : view.at("images")) {
        image["url"] = "/blobs/" + image.at("image_id").get<std::string>();
    }
    view["revision_count"] = session.revision_count();
    return view;
}

namespace {

TemplateCatalog load_templates(const StudioConfig& config) {
    return config.templates_dir ? TemplateCatalog::load(*config.templates_dir) : TemplateCatalog::builtin();
}

}  // namespace

Studio::Studio(StudioConfig config) : Studio(config, make_provider(config.provider)) {}

Studio::Studio(StudioConfig config, ProviderHandle provider)
    : config_(std::move(config)),
      ws_(config_.workspace),
      provider_(std::move(provider)),
      templates_(load_templates(config_)) {
    require(provider_ != nullptr, "studio needs a provider");
}

json Studio::health() const {
    return json{{"status", "ok"}, {"provider", provider_kind_name(provider_->kind())}};
}

GenerationSession Studio::create(const CharacterSpec& spec) {
    auto session = create_session(spec, config_.clock);
    ws_.save_session(session, 0);
    ws_.save_character(record_from_session(session, config_.clock()), 0);
    return session;
}

GenerationSession Studio::get_session(const std::string& id) const { return ws_.load_session(id).value; }

std::pair<GenerationSession, std::uint64_t> Studio::load_for_update(
    const std::string& id, std::optional<std::size_t> expected_revision) const {
    auto stored = ws_.load_session(id);
    if (expected_revision) check_revision(stored.value, *expected_revision);
    return {std::move(stored.value), stored.revision};
}

GenerationSession Studio::persist(const GenerationSession& session, std::uint64_t store_revision) {
    ws_.save_session(session, store_revision);
    const auto& id = session.session_id;
    ws_.save_character(record_from_session(session, config_.clock()), ws_.revision_of(EntityKind::Character, id));
    return session;
}

GenerationSession Studio::edit(const std::string& id, const std::string& path, const json& value,
                               std::optional<std::size_t> expected_revision) {
    auto [session, revision] = load_for_update(id, expected_revision);
    return persist(edit_field(session, path, value, config_.clock), revision);
}

GenerationSession Studio::regen(const std::string& id, Stage stage, std::optional<std::size_t> expected_revision) {
    auto [session, revision] = load_for_update(id, expected_revision);
    RegenerationContext ctx{*provider_, templates_, config_.image_size, config_.clock};
    return persist(regenerate(session, stage, ctx), revision);
}

GenerationSession Studio::select(const std::string& id, const std::string& image_id,
                                 std::optional<std::size_t> expected_revision) {
    auto [session, revision] = load_for_update(id, expected_revision);
    return persist(select_image(session, image_id, config_.clock), revision);
}

CharacterRecord Studio::get_character(const std::string& id) const { return ws_.load_character(id).value; }

IdCardDocument Studio::id_card(const std::string& character_id) const {
    const auto record = ws_.load_character(character_id).value;
    return export_id_card(character_id, ws_.load_session(record.session_id).value, config_.clock);
}

PersonaCard Studio::persona(const std::string& character_id) const {
    const auto record = ws_.load_character(character_id).value;
    if (!record.profile) {
        fail(ErrorCode::Incomplete, "character " + character_id + " has no profile yet",
             json{{"missing", {"profile"}}});
    }
    auto display_name = [&](const std::string& id) {
        if (ws_.exists(EntityKind::Character, id)) {
            const auto other = ws_.load_character(id).value;
            if (other.profile) return other.profile->name;
        }
        return id;
    };
    std::vector<Relationship> relationships;
    for (const auto& gid : ws_.list(EntityKind::Graph)) {
        const auto graph = ws_.load_graph(gid).value;
        if (!graph.nodes.count(character_id)) continue;
        for (const auto& n : charforge::neighbors(graph, character_id)) {
            relationships.push_back({n.label, display_name(n.other_id),
                                     n.direction == EdgeDirection::Outgoing ? RelationDirection::Outgoing
                                                                            : RelationDirection::Incoming});
        }
    }
    return build_persona(character_id, *record.profile, record.keywords.value_or(KeywordSet{}), relationships);
}

ChatOutcome Studio::chat(const std::string& character_id, const std::string& message) {
    const auto card = persona(character_id);
    ChatTranscript transcript{character_id, {}, kDefaultChatWindow};
    std::uint64_t revision = 0;
    if (ws_.exists(EntityKind::Transcript, character_id)) {
        auto stored = ws_.load_transcript(character_id);
        transcript = std::move(stored.value);
        revision = stored.revision;
    }
    auto outcome = charforge::chat(card, transcript, message, *provider_, config_.clock);
    ws_.save_transcript(outcome.transcript, revision);
    return outcome;
}

LineageGraph Studio::get_graph(const std::string& graph_id) const { return ws_.load_graph(graph_id).value; }

LineageGraph Studio::link(const std::string& graph_id, const std::string& from, const std::string& to,
                          const std::string& label) {
    check_entity_id(graph_id);
    LineageGraph graph{graph_id, {}, {}};
    std::uint64_t revision = 0;
    if (ws_.exists(EntityKind::Graph, graph_id)) {
        auto stored = ws_.load_graph(graph_id);
        graph = std::move(stored.value);
        revision = stored.revision;
    }
    if (from == to) fail(ErrorCode::SelfLoop, "a character cannot be related to itself", json{{"node", from}});
    for (const auto& id : {from, to}) {
        if (!ws_.exists(EntityKind::Character, id)) {
            fail(ErrorCode::UnknownNode, "character '" + id + "' does not exist", json{{"node", id}});
        }
        graph = add_node(graph, id);
    }
    graph = charforge::link(graph, from, to, label);
    ws_.save_graph(graph, revision);
    return graph;
}

LineageGraph Studio::unlink(const std::string& graph_id, const std::string& from, const std::string& to) {
    auto stored = ws_.load_graph(graph_id);
    auto graph = charforge::unlink(stored.value, from, to);
    ws_.save_graph(graph, stored.revision);
    return graph;
}

std::vector<Neighbor> Studio::neighbors(const std::string& graph_id, const std::string& character_id) const {
    return charforge::neighbors(ws_.load_graph(graph_id).value, character_id);
}

Bytes Studio::export_bundle(const std::string& character_id) const { return charforge::export_bundle(ws_, character_id); }

std::string Studio::import_bundle(std::span<const std::uint8_t> archive) {
    return charforge::import_bundle(ws_, archive);
}

BatchResult Studio::batch(const CharacterSpec& spec, std::size_t k) {
    PipelineOptions options;
    options.image_size = config_.image_size;
    return batch_generate_npcs(spec, k, *provider_, templates_, options);
}

namespace {

using httplib::Request;
using httplib::Response;

constexpr const char* kJson = "application/json";

void send_json(Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(canonical_dump(body), kJson);
}

void send_error(Response& res, const ApiError& error) { send_json(res, error.http_status, json(error)); }

json body_json(const Request& req) {
    if (req.body.empty()) return json::object();
    try {
        auto body = json::parse(req.body);
        if (!body.is_object()) fail(ErrorCode::BadRequest, "request body must be a JSON object");
        return body;
    } catch (const json::exception& e) {
        fail(ErrorCode::BadRequest, std::string("request body is not valid JSON: ") + e.what());
    }
}

template <typename T>
T field(const json& body, const char* key) {
    if (!body.contains(key)) fail(ErrorCode::BadRequest, std::string("missing field '") + key + "'");
    try {
        return body.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::BadRequest, std::string("field '") + key + "' has the wrong type");
    }
}

std::optional<std::size_t> expected_revision(const json& body) {
    if (!body.contains("expected_revision") || body.at("expected_revision").is_null()) return std::nullopt;
    return field<std::size_t>(body, "expected_revision");
}

std::string query(const Request& req, const char* key) {
    if (!req.has_param(key)) fail(ErrorCode::BadRequest, std::string("missing query parameter '") + key + "'");
    return req.get_param_value(key);
}

CharacterSpec spec_from(const json& body) {
    const json& doc = body.contains("spec") ? body.at("spec") : body;
    try {
        return doc.get<CharacterSpec>();
    } catch (const json::exception& e) {
        fail(ErrorCode::BadRequest, std::string("spec is malformed: ") + e.what());
    }
}

json neighbors_json(const std::vector<Neighbor>& list) {
    json out = json::array();
    for (const auto& n : list) {
        out.push_back({{"other_id", n.other_id}, {"label", n.label}, {"direction", edge_direction_name(n.direction)}});
    }
    return out;
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const Request& req, Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            send_error(res, to_api_error(e));
        } catch (const std::exception& e) {
            send_error(res, ApiError{500, "internal_error", e.what(), nullptr});
        }
    };
}

}  // namespace

void install_routes(httplib::Server& server, Studio& studio) {
    const std::string id = "([A-Za-z0-9_-]+)";

    server.Get("/health", guarded([&](const Request&, Response& res) { send_json(res, 200, studio.health()); }));

    server.Post("/sessions", guarded([&](const Request& req, Response& res) {
                    send_json(res, 201, session_view(studio.create(spec_from(body_json(req)))));
                }));
    server.Get("/sessions/" + id, guarded([&](const Request& req, Response& res) {
                   send_json(res, 200, session_view(studio.get_session(req.matches[1])));
               }));
    server.Patch("/sessions/" + id + "/fields", guarded([&](const Request& req, Response& res) {
                     const auto body = body_json(req);
                     if (!body.contains("value")) fail(ErrorCode::BadRequest, "missing field 'value'");
                     const auto session = studio.edit(req.matches[1], field<std::string>(body, "path"),
                                                      body.at("value"), expected_revision(body));
                     send_json(res, 200, session_view(session));
                 }));
    server.Post("/sessions/" + id + "/regenerate", guarded([&](const Request& req, Response& res) {
                    const auto stage = parse_stage(query(req, "layer"));
                    const auto session = studio.regen(req.matches[1], stage, expected_revision(body_json(req)));
                    send_json(res, 200, session_view(session));
                }));
    server.Post("/sessions/" + id + "/select-image", guarded([&](const Request& req, Response& res) {
                    const auto body = body_json(req);
                    const auto session =
                        studio.select(req.matches[1], field<std::string>(body, "image_id"), expected_revision(body));
                    send_json(res, 200, session_view(session));
                }));

    server.Get("/characters", guarded([&](const Request&, Response& res) {
                   send_json(res, 200, json{{"characters", studio.workspace().list(EntityKind::Character)}});
               }));
    server.Get("/characters/" + id, guarded([&](const Request& req, Response& res) {
                   send_json(res, 200, json(studio.get_character(req.matches[1])));
               }));
    server.Get("/characters/" + id + "/id-card", guarded([&](const Request& req, Response& res) {
                   json card = studio.id_card(req.matches[1]);
                   card["selected_image"]["url"] = "/blobs/" + card["selected_image"]["image_id"].get<std::string>();
                   send_json(res, 200, card);
               }));
    server.Post("/characters/" + id + "/chat", guarded([&](const Request& req, Response& res) {
                    const auto outcome = studio.chat(req.matches[1], field<std::string>(body_json(req), "message"));
                    send_json(res, 200, json{{"reply", outcome.reply}, {"transcript", outcome.transcript}});
                }));
    server.Get("/characters/" + id + "/bundle", guarded([&](const Request& req, Response& res) {
                   const auto bundle = studio.export_bundle(req.matches[1]);
                   res.status = 200;
                   res.set_header("Content-Disposition",
                                  "attachment; filename=\"" + std::string(req.matches[1]) + ".charpack\"");
                   res.set_content(std::string(bundle.begin(), bundle.end()), "application/x-tar");
               }));
    server.Post("/bundles/import", guarded([&](const Request& req, Response& res) {
                    const Bytes archive(req.body.begin(), req.body.end());
                    send_json(res, 201, json{{"character_id", studio.import_bundle(archive)}});
                }));

    server.Get("/graphs/" + id + "/edges", guarded([&](const Request& req, Response& res) {
                   send_json(res, 200, json(studio.get_graph(req.matches[1])));
               }));
    server.Post("/graphs/" + id + "/edges", guarded([&](const Request& req, Response& res) {
                    const auto body = body_json(req);
                    const auto graph =
                        studio.link(req.matches[1], field<std::string>(body, "from"), field<std::string>(body, "to"),
                                    field<std::string>(body, "label"));
                    send_json(res, 201, json(graph));
                }));
    server.Delete("/graphs/" + id + "/edges", guarded([&](const Request& req, Response& res) {
                      send_json(res, 200, json(studio.unlink(req.matches[1], query(req, "from"), query(req, "to"))));
                  }));
    server.Get("/graphs/" + id + "/neighbors/" + id, guarded([&](const Request& req, Response& res) {
                   send_json(res, 200, neighbors_json(studio.neighbors(req.matches[1], req.matches[2])));
               }));

    server.Get("/blobs/([0-9a-f]{64})", guarded([&](const Request& req, Response& res) {
                   const auto media = studio.workspace().get_blob(req.matches[1]);
                   res.status = 200;
                   res.set_content(std::string(media.begin(), media.end()), "image/png");
               }));

    server.set_error_handler([](const Request& req, Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        const auto code = res.status == 404 ? ErrorCode::NotFound : ErrorCode::BadRequest;
        auto error = ApiError{res.status, std::string(api_status(code).second),
                              "no route for " + req.method + " " + req.path, nullptr};
        res.set_content(canonical_dump(json(error)), kJson);
        return httplib::Server::HandlerResponse::Handled;
    });
}

StudioServer::StudioServer(Studio& studio, const std::string& host, int port)
    : server_(std::make_unique<httplib::Server>()) {
    install_routes(*server_, studio);
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
    } else {
        port_ = server_->bind_to_port(host, port) ? port : -1;
    }
    if (port_ <= 0) fail(ErrorCode::ConfigError, "cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

StudioServer::~StudioServer() { stop(); }

void StudioServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

void serve(const StudioConfig& config, const std::string& host, int port) {
    config.provider.validate();
    Studio studio(config);
    httplib::Server server;
    install_routes(server, studio);
    if (!server.bind_to_port(host, port)) {
        fail(ErrorCode::ConfigError, "cannot bind " + host + ":" + std::to_string(port));
    }
    server.listen_after_bind();
}

}  // namespace charforge
