#include "charforge/share.hpp"

#include <algorithm>
#include <cstring>
#include <map>

namespace charforge {

using nlohmann::json;

namespace {

constexpr std::size_t kBlock = 512;

void put_field(std::uint8_t* header, std::size_t offset, std::size_t width, std::string_view value) {
    std::memcpy(header + offset, value.data(), std::min(width, value.size()));
}

void put_octal(std::uint8_t* header, std::size_t offset, std::size_t width, std::uint64_t value) {
    std::string digits(width - 1, '0');
    for (std::size_t i = width - 1; i-- > 0 && value;) {
        digits[i] = static_cast<char>('0' + (value & 7));
        value >>= 3;
    }
    put_field(header, offset, width, digits);
}

std::uint64_t get_octal(const std::uint8_t* header, std::size_t offset, std::size_t width) {
    std::uint64_t value = 0;
    bool any = false;
    for (std::size_t i = 0; i < width; ++i) {
        const char c = static_cast<char>(header[offset + i]);
        if (c == ' ' || c == '\0') {
            if (any) break;
            continue;
        }
        if (c < '0' || c > '7') fail(ErrorCode::CorruptEntity, "bundle header has a malformed number");
        value = value * 8 + static_cast<std::uint64_t>(c - '0');
        any = true;
    }
    return value;
}

std::uint64_t header_checksum(const std::uint8_t* header) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i) {
        sum += (i >= 148 && i < 156) ? static_cast<std::uint8_t>(' ') : header[i];
    }
    return sum;
}

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_text(const Bytes& b) { return std::string(b.begin(), b.end()); }

json parse_entry(const std::map<std::string, Bytes>& entries, const std::string& name) {
    auto it = entries.find(name);
    if (it == entries.end()) fail(ErrorCode::CorruptEntity, "bundle has no " + name);
    try {
        return json::parse(to_text(it->second));
    } catch (const json::exception& e) {
        fail(ErrorCode::CorruptEntity, "bundle entry " + name + " is not JSON: " + e.what());
    }
}

template <typename T>
T convert_entry(const json& doc, const std::string& name) {
    try {
        return doc.get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaMismatch, "bundle entry " + name + " does not match its schema: " + e.what());
    }
}

std::vector<LineageGraph> graphs_with(const Workspace& ws, const std::string& character_id) {
    std::vector<LineageGraph> out;
    for (const auto& gid : ws.list(EntityKind::Graph)) {
        auto graph = ws.load_graph(gid).value;
        if (graph.nodes.count(character_id)) out.push_back(incident_subgraph(graph, character_id));
    }
    return out;
}

LineageGraph merge_graph(const LineageGraph& existing, const LineageGraph& incoming) {
    LineageGraph merged = existing;
    merged.nodes.insert(incoming.nodes.begin(), incoming.nodes.end());
    for (const auto& [ends, label] : incoming.edges) {
        auto [it, inserted] = merged.edges.emplace(ends, label);
        if (!inserted && it->second != label) {
            fail(ErrorCode::ConflictError,
                 "graph " + existing.graph_id + " already labels " + ends.first + " -> " + ends.second + " as '" +
                     it->second + "'",
                 json{{"graph_id", existing.graph_id}, {"from", ends.first}, {"to", ends.second}});
        }
    }
    return merged;
}

}  // namespace

Bytes write_tar(std::vector<TarEntry> entries) {
    std::sort(entries.begin(), entries.end(), [](const TarEntry& a, const TarEntry& b) { return a.name < b.name; });
    Bytes out;
    for (const auto& entry : entries) {
        require(!entry.name.empty() && entry.name.size() < 100, "tar entry name must be 1-99 bytes: " + entry.name);
        std::uint8_t header[kBlock] = {};
        put_field(header, 0, 100, entry.name);
        put_octal(header, 100, 8, 0644);
        put_octal(header, 108, 8, 0);
        put_octal(header, 116, 8, 0);
        put_octal(header, 124, 12, entry.content.size());
        put_octal(header, 136, 12, 0);
        header[156] = '0';
        put_field(header, 257, 6, std::string_view("ustar\0", 6));
        put_field(header, 263, 2, "00");
        put_octal(header, 148, 7, header_checksum(header));
        header[155] = ' ';
        out.insert(out.end(), header, header + kBlock);
        out.insert(out.end(), entry.content.begin(), entry.content.end());
        out.resize(out.size() + (kBlock - entry.content.size() % kBlock) % kBlock, 0);
    }
    out.resize(out.size() + 2 * kBlock, 0);
    return out;
}

std::vector<TarEntry> read_tar(std::span<const std::uint8_t> archive) {
    std::vector<TarEntry> entries;
    std::size_t pos = 0;
    while (true) {
        if (pos + kBlock > archive.size()) fail(ErrorCode::CorruptEntity, "bundle is truncated");
        const auto* header = archive.data() + pos;
        if (std::all_of(header, header + kBlock, [](std::uint8_t b) { return b == 0; })) break;
        if (get_octal(header, 148, 8) != header_checksum(header)) {
            fail(ErrorCode::CorruptEntity, "bundle header checksum mismatch");
        }
        const char type = static_cast<char>(header[156]);
        if (type != '0' && type != '\0') fail(ErrorCode::CorruptEntity, "bundle contains a non-file entry");
        const auto* name_begin = reinterpret_cast<const char*>(header);
        std::string name(name_begin, strnlen(name_begin, 100));
        const auto size = get_octal(header, 124, 12);
        pos += kBlock;
        if (size > archive.size() - pos) fail(ErrorCode::CorruptEntity, "bundle is truncated");
        entries.push_back({std::move(name), Bytes(archive.begin() + pos, archive.begin() + pos + size)});
        pos += (size + kBlock - 1) / kBlock * kBlock;
    }
    return entries;
}

IdCardDocument export_id_card(const std::string& character_id, const GenerationSession& session,
                              const Clock& clock) {
    std::vector<std::string> missing;
    if (!session.profile) missing.push_back("profile");
    if (!session.keywords) missing.push_back("keywords");
    if (session.images.empty()) missing.push_back("images");
    if (!session.selected_image_id) missing.push_back("selected_image");
    std::vector<std::string> stale;
    for (auto stage : session.stale) stale.emplace_back(stage_name(stage));
    if (!missing.empty() || !stale.empty()) {
        fail(ErrorCode::Incomplete, "character is not ready for an ID card",
             json{{"missing", missing}, {"stale", stale}});
    }
    auto it = std::find_if(session.images.begin(), session.images.end(),
                           [&](const ReferenceImage& i) { return i.image_id == *session.selected_image_id; });
    if (it == session.images.end()) fail(ErrorCode::Incomplete, "selected image is not among the session images");
    return IdCardDocument{character_id, *session.profile, *it, *session.keywords, clock()};
}

CharacterRecord record_from_session(const GenerationSession& session, Timestamp updated_at) {
    return CharacterRecord{session.session_id, session.session_id, session.spec, session.profile,
                           session.keywords, session.selected_image_id, updated_at};
}

Bytes export_bundle(const Workspace& ws, const std::string& character_id) {
    const auto character = ws.load_character(character_id).value;
    if (!character.profile) {
        fail(ErrorCode::Incomplete, "character " + character_id + " has no profile yet",
             json{{"missing", {"profile"}}});
    }
    // Loading the session reads every referenced blob, so a deleted blob file surfaces as MissingBlob.
    const auto session = ws.load_session(character.session_id).value;
    const auto session_doc = externalize_session(session);

    std::vector<TarEntry> entries;
    entries.push_back({"manifest.json",
                       to_bytes(canonical_dump(json{{"schema", kSchemaVersion}, {"character_id", character_id}}))});
    entries.push_back({"character.char.json", to_bytes(encode(character))});
    entries.push_back({"session.session.json", to_bytes(canonical_dump(session_doc))});
    if (ws.exists(EntityKind::Transcript, character_id)) {
        entries.push_back({"transcript.chat.json", to_bytes(encode(ws.load_transcript(character_id).value))});
    }
    for (const auto& graph : graphs_with(ws, character_id)) {
        entries.push_back({"graphs/" + graph.graph_id + ".tree.json", to_bytes(encode(graph))});
    }
    for (const auto& hash : session_blob_hashes(session)) {
        entries.push_back({"blobs/" + hash + ".png", ws.get_blob(hash)});
    }
    return write_tar(std::move(entries));
}

BundleContents read_bundle(std::span<const std::uint8_t> archive) {
    std::map<std::string, Bytes> entries;
    for (auto& entry : read_tar(archive)) {
        if (!entries.emplace(entry.name, std::move(entry.content)).second) {
            fail(ErrorCode::CorruptEntity, "bundle has duplicate entry " + entry.name);
        }
    }

    const auto manifest = parse_entry(entries, "manifest.json");
    try {
        check_schema(manifest);
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaMismatch, std::string("bundle manifest: ") + e.what());
    }
    BundleContents out;
    try {
        out.character_id = manifest.at("character_id").get<std::string>();
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaMismatch, std::string("bundle manifest: ") + e.what());
    }
    check_entity_id(out.character_id);

    out.character = convert_entry<CharacterRecord>(parse_entry(entries, "character.char.json"), "character.char.json");
    if (out.character.character_id != out.character_id) {
        fail(ErrorCode::SchemaMismatch, "bundle manifest and character disagree on the character id");
    }
    const auto session_doc = parse_entry(entries, "session.session.json");
    try {
        out.session = hydrate_session(session_doc, [&](const std::string& hash) {
            auto it = entries.find("blobs/" + hash + ".png");
            if (it == entries.end()) {
                fail(ErrorCode::MissingBlob, "bundle is missing blob " + hash, json{{"blob", hash}});
            }
            if (sha256_hex(it->second) != hash) fail(ErrorCode::CorruptEntity, "bundle blob " + hash + " is corrupt");
            return it->second;
        });
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaMismatch, std::string("bundle session does not match its schema: ") + e.what());
    }
    if (out.session.session_id != out.character.session_id) {
        fail(ErrorCode::SchemaMismatch, "bundle character and session disagree on the session id");
    }
    if (entries.count("transcript.chat.json")) {
        out.transcript =
            convert_entry<ChatTranscript>(parse_entry(entries, "transcript.chat.json"), "transcript.chat.json");
    }
    for (const auto& [name, content] : entries) {
        if (name.rfind("graphs/", 0) == 0) out.graphs.push_back(convert_entry<LineageGraph>(parse_entry(entries, name), name));
    }
    return out;
}

std::string import_bundle(Workspace& ws, std::span<const std::uint8_t> archive) {
    const auto contents = read_bundle(archive);
    const auto& id = contents.character_id;

    auto clash = [&](EntityKind kind, const std::string& key) {
        if (ws.exists(kind, key)) {
            fail(ErrorCode::ConflictError, std::string(entity_kind_name(kind)) + " " + key + " already exists",
                 json{{"kind", entity_kind_name(kind)}, {"id", key}});
        }
    };
    clash(EntityKind::Character, id);
    clash(EntityKind::Session, contents.session.session_id);
    if (contents.transcript) clash(EntityKind::Transcript, contents.transcript->character_id);

    std::vector<std::pair<LineageGraph, std::uint64_t>> graphs;
    for (const auto& graph : contents.graphs) {
        if (ws.exists(EntityKind::Graph, graph.graph_id)) {
            auto stored = ws.load_graph(graph.graph_id);
            graphs.emplace_back(merge_graph(stored.value, graph), stored.revision);
        } else {
            graphs.emplace_back(graph, 0);
        }
    }

    ws.save_session(contents.session, 0);
    ws.save_character(contents.character, 0);
    if (contents.transcript) ws.save_transcript(*contents.transcript, 0);
    for (const auto& [graph, revision] : graphs) ws.save_graph(graph, revision);
    return id;
}

}  // namespace charforge
