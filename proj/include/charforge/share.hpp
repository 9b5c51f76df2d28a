#pragma once

// ID cards and portable `.charpack` bundles.
//
// A bundle is a ustar archive with entries in sorted order, zero mtimes and
// fixed modes, so the same workspace content always produces the same bytes:
//
//   manifest.json                {schema, character_id}
//   character.char.json
//   session.session.json         image media externalized
//   transcript.chat.json         when the character has one
//   graphs/<graph_id>.tree.json  edges incident to the character
//   blobs/<sha256>.png

#include "charforge/workspace.hpp"

namespace charforge {

inline constexpr std::string_view kBundleExtension = ".charpack";

struct TarEntry {
    std::string name;
    Bytes content;

    bool operator==(const TarEntry&) const = default;
};

/// Entries are written sorted by name. Names longer than 100 bytes are rejected.
Bytes write_tar(std::vector<TarEntry> entries);
/// Errors: CorruptEntity (bad header checksum, truncation, unsupported entry).
std::vector<TarEntry> read_tar(std::span<const std::uint8_t> archive);

/// Errors: Incomplete (missing or stale layers, or no selection).
IdCardDocument export_id_card(const std::string& character_id, const GenerationSession& session,
                              const Clock& clock = system_clock());

/// The character record mirroring a session's current state.
CharacterRecord record_from_session(const GenerationSession& session, Timestamp updated_at);

struct BundleContents {
    std::string character_id;
    CharacterRecord character;
    GenerationSession session;
    std::optional<ChatTranscript> transcript;
    std::vector<LineageGraph> graphs;

    bool operator==(const BundleContents&) const = default;
};

/// Errors: NotFound, Incomplete (no profile), MissingBlob.
Bytes export_bundle(const Workspace& ws, const std::string& character_id);

/// Decodes and checks a bundle without touching a workspace.
/// Errors: CorruptEntity, SchemaMismatch.
BundleContents read_bundle(std::span<const std::uint8_t> archive);

/// Errors: CorruptEntity, SchemaMismatch, ConflictError (the character,
/// session or transcript already exists, or a graph edge has a different label).
/// Graphs already present are merged with the bundled edges.
std::string import_bundle(Workspace& ws, std::span<const std::uint8_t> archive);

}  // namespace charforge
