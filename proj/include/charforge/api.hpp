#pragma once

// HTTP JSON service over a workspace.
//
//   POST   /sessions                         create (201)
//   GET    /sessions/{id}
//   PATCH  /sessions/{id}/fields             {path, value, expected_revision?}
//   POST   /sessions/{id}/regenerate?layer=  {expected_revision?}
//   POST   /sessions/{id}/select-image       {image_id, expected_revision?}
//   GET    /characters                       ids
//   GET    /characters/{id}
//   GET    /characters/{id}/id-card
//   POST   /characters/{id}/chat             {message}
//   GET    /characters/{id}/bundle           .charpack bytes
//   POST   /bundles/import                   .charpack bytes (201)
//   GET    /graphs/{id}/edges
//   POST   /graphs/{id}/edges                {from, to, label}
//   DELETE /graphs/{id}/edges?from=&to=
//   GET    /graphs/{id}/neighbors/{char}
//   GET    /blobs/{hash}                     image/png
//   GET    /health
//
// Failures are answered with {status, code, message, details}.

#include "charforge/batch.hpp"
#include "charforge/share.hpp"
#include "charforge/workspace.hpp"

#include <memory>
#include <thread>

namespace httplib {
class Server;
}

namespace charforge {

struct ApiError {
    int http_status = 500;
    std::string code;
    std::string message;
    nlohmann::json details;
};

/// HTTP status and machine code for each error; the pairs are all distinct.
std::pair<int, std::string_view> api_status(ErrorCode code) noexcept;
ApiError to_api_error(const Error& e);
void to_json(nlohmann::json& j, const ApiError& v);

/// Session body as served: image media replaced by /blobs/ URLs, plus
/// revision_count.
nlohmann::json session_view(const GenerationSession& session);

struct StudioConfig {
    std::filesystem::path workspace;
    ProviderConfig provider;
    std::optional<std::filesystem::path> templates_dir;
    ImageSize image_size;
    Clock clock = system_clock();
};

/// The operations behind each endpoint. Every mutating call loads the entity,
/// applies the transition and saves it against the revision it loaded.
class Studio {
public:
    explicit Studio(StudioConfig config);
    Studio(StudioConfig config, ProviderHandle provider);

    Workspace& workspace() noexcept { return ws_; }
    Provider& provider() noexcept { return *provider_; }
    const TemplateCatalog& templates() const noexcept { return templates_; }

    nlohmann::json health() const;

    GenerationSession create(const CharacterSpec& spec);
    GenerationSession get_session(const std::string& id) const;
    GenerationSession edit(const std::string& id, const std::string& path, const nlohmann::json& value,
                           std::optional<std::size_t> expected_revision);
    GenerationSession regen(const std::string& id, Stage stage, std::optional<std::size_t> expected_revision);
    GenerationSession select(const std::string& id, const std::string& image_id,
                             std::optional<std::size_t> expected_revision);

    CharacterRecord get_character(const std::string& id) const;
    IdCardDocument id_card(const std::string& character_id) const;
    PersonaCard persona(const std::string& character_id) const;
    ChatOutcome chat(const std::string& character_id, const std::string& message);

    LineageGraph get_graph(const std::string& graph_id) const;
    /// Creates the graph on first use. Both ends must be saved characters.
    LineageGraph link(const std::string& graph_id, const std::string& from, const std::string& to,
                      const std::string& label);
    LineageGraph unlink(const std::string& graph_id, const std::string& from, const std::string& to);
    std::vector<Neighbor> neighbors(const std::string& graph_id, const std::string& character_id) const;

    Bytes export_bundle(const std::string& character_id) const;
    std::string import_bundle(std::span<const std::uint8_t> archive);

    BatchResult batch(const CharacterSpec& spec, std::size_t k);

private:
    GenerationSession persist(const GenerationSession& session, std::uint64_t store_revision);
    std::pair<GenerationSession, std::uint64_t> load_for_update(const std::string& id,
                                                                std::optional<std::size_t> expected_revision) const;

    StudioConfig config_;
    Workspace ws_;
    ProviderHandle provider_;
    TemplateCatalog templates_;
};

void install_routes(httplib::Server& server, Studio& studio);

/// A Studio served on a background thread, for tests and embedding.
class StudioServer {
public:
    /// port 0 binds an ephemeral port. Throws Error{ConfigError} on bind failure.
    StudioServer(Studio& studio, const std::string& host = "127.0.0.1", int port = 0);
    ~StudioServer();
    StudioServer(const StudioServer&) = delete;
    StudioServer& operator=(const StudioServer&) = delete;

    int port() const noexcept { return port_; }
    void stop();

private:
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

/// Blocks serving on host:port until the process is stopped.
void serve(const StudioConfig& config, const std::string& host, int port);

}  // namespace charforge
