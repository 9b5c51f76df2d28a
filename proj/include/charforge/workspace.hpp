#pragma once

// File-backed persistence.
//
//   characters/<id>.char.json     CharacterRecord
//   sessions/<id>.session.json    GenerationSession (image media externalized)
//   transcripts/<id>.chat.json    ChatTranscript
//   graphs/<id>.tree.json         LineageGraph
//   blobs/<sha256>.png            image media, content addressed
//
// Every entity file carries a store_revision counter (number of successful
// saves). A save names the revision it expects to replace and fails with
// ConflictError otherwise; writes go to a temp file that is renamed into place.

#include "charforge/agent.hpp"
#include "charforge/lineage.hpp"
#include "charforge/model.hpp"
#include "charforge/session.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>

namespace charforge {

enum class EntityKind { Character, Session, Transcript, Graph };

inline constexpr std::array kAllEntityKinds = {EntityKind::Character, EntityKind::Session, EntityKind::Transcript,
                                               EntityKind::Graph};

std::string_view entity_kind_name(EntityKind kind) noexcept;

struct SaveReceipt {
    EntityKind kind = EntityKind::Character;
    std::string id;
    std::uint64_t revision = 0;
};

template <typename T>
struct Stored {
    T value;
    std::uint64_t revision = 0;
};

/// Throws Error{BadRequest} unless id is 1-80 characters of [A-Za-z0-9_-].
void check_entity_id(std::string_view id);

class Workspace {
public:
    /// Called after the temp file is fully written and before it is renamed.
    using FaultHook = std::function<void(const std::filesystem::path& temp, const std::filesystem::path& target)>;

    /// Creates the directory layout if needed, removes leftover temp files,
    /// and builds the index from the entity files on disk.
    explicit Workspace(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }

    SaveReceipt save_character(const CharacterRecord& record, std::uint64_t expected_revision);
    SaveReceipt save_session(const GenerationSession& session, std::uint64_t expected_revision);
    SaveReceipt save_transcript(const ChatTranscript& transcript, std::uint64_t expected_revision);
    SaveReceipt save_graph(const LineageGraph& graph, std::uint64_t expected_revision);

    /// Errors: NotFound, CorruptEntity, MissingBlob (sessions).
    Stored<CharacterRecord> load_character(const std::string& id) const;
    Stored<GenerationSession> load_session(const std::string& id) const;
    Stored<ChatTranscript> load_transcript(const std::string& id) const;
    Stored<LineageGraph> load_graph(const std::string& id) const;

    bool exists(EntityKind kind, const std::string& id) const;
    /// Stored revision, 0 when the entity does not exist.
    std::uint64_t revision_of(EntityKind kind, const std::string& id) const;
    std::vector<std::string> list(EntityKind kind) const;

    /// Idempotent; returns the content hash.
    std::string put_blob(std::span<const std::uint8_t> media);
    /// Errors: MissingBlob, CorruptEntity (content does not match its hash).
    Bytes get_blob(const std::string& hash) const;
    bool has_blob(const std::string& hash) const;
    std::filesystem::path blob_path(const std::string& hash) const;
    std::vector<std::string> list_blobs() const;

    std::filesystem::path entity_path(EntityKind kind, const std::string& id) const;

    /// In-memory index of (kind, id) -> revision.
    std::map<std::pair<EntityKind, std::string>, std::uint64_t> index() const;
    /// The same index rebuilt from the files on disk.
    std::map<std::pair<EntityKind, std::string>, std::uint64_t> scan() const;

    void set_fault_hook(FaultHook hook);

private:
    SaveReceipt save_document(EntityKind kind, const std::string& id, nlohmann::json doc,
                              std::uint64_t expected_revision);
    std::pair<nlohmann::json, std::uint64_t> load_document(EntityKind kind, const std::string& id) const;
    void write_atomically(const std::filesystem::path& target, std::string_view content, bool hooked) const;

    std::filesystem::path root_;
    mutable std::shared_mutex index_mutex_;
    std::mutex write_mutex_;
    std::map<std::pair<EntityKind, std::string>, std::uint64_t> index_;
    FaultHook fault_hook_;
};

/// Every blob a session refers to, including images kept in its revision log.
std::set<std::string> session_blob_hashes(const GenerationSession& session);
/// Session document with each image's media replaced by its blob reference
/// (image_id is the media hash).
nlohmann::json externalize_session(const GenerationSession& session);
/// Inverse of externalize_session; media is fetched through `blob`.
GenerationSession hydrate_session(const nlohmann::json& doc, const std::function<Bytes(const std::string&)>& blob);

}  // namespace charforge
