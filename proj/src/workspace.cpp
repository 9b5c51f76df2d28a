#include "charforge/workspace.hpp"

#include <fstream>
#include <sstream>

namespace charforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kTempMarker = ".tmp-";
constexpr const char* kRevisionKey = "store_revision";

struct KindLayout {
    const char* dir;
    const char* extension;
};

KindLayout layout(EntityKind kind) {
    switch (kind) {
        case EntityKind::Character: return {"characters", ".char.json"};
        case EntityKind::Session: return {"sessions", ".session.json"};
        case EntityKind::Transcript: return {"transcripts", ".chat.json"};
        case EntityKind::Graph: return {"graphs", ".tree.json"};
    }
    return {"characters", ".char.json"};
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool is_hash(std::string_view s) {
    return s.size() == 64 && s.find_first_not_of("0123456789abcdef") == std::string_view::npos;
}

}  // namespace

std::string_view entity_kind_name(EntityKind kind) noexcept {
    switch (kind) {
        case EntityKind::Character: return "character";
        case EntityKind::Session: return "session";
        case EntityKind::Transcript: return "transcript";
        case EntityKind::Graph: return "graph";
    }
    return "character";
}

void check_entity_id(std::string_view id) {
    const bool ok = !id.empty() && id.size() <= 80 &&
                    id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") ==
                        std::string_view::npos;
    if (!ok) {
        fail(ErrorCode::BadRequest, "invalid entity id '" + std::string(id) + "'");
    }
}

namespace {

// Image arrays live at the top level and inside the before/after states of
// "images" revisions.
template <typename J, typename Fn>
void for_each_image(J& doc, Fn fn) {
    auto visit = [&](auto& images) {
        if (!images.is_array()) return;
        for (auto& image : images) fn(image);
    };
    visit(doc.at("images"));
    for (auto& revision : doc.at("revisions")) {
        for (const char* side : {"before", "after"}) {
            auto& state = revision.at(side);
            if (state.is_object() && state.contains("images")) visit(state.at("images"));
        }
    }
}

}  // namespace

std::set<std::string> session_blob_hashes(const GenerationSession& session) {
    std::set<std::string> hashes;
    for_each_image(static_cast<const json&>(externalize_session(session)),
                   [&](const json& image) { hashes.insert(image.at("image_id").get<std::string>()); });
    return hashes;
}

json externalize_session(const GenerationSession& session) {
    json doc = session;
    for_each_image(doc, [](json& image) { image.erase("media"); });
    return doc;
}

GenerationSession hydrate_session(const json& doc, const std::function<Bytes(const std::string&)>& blob) {
    json full = doc;
    std::map<std::string, std::string> cache;
    for_each_image(full, [&](json& image) {
        const auto id = image.at("image_id").get<std::string>();
        auto it = cache.find(id);
        if (it == cache.end()) it = cache.emplace(id, base64_encode(blob(id))).first;
        image["media"] = it->second;
    });
    return full.get<GenerationSession>();
}

Workspace::Workspace(fs::path root) : root_(std::move(root)) {
    for (auto kind : kAllEntityKinds) {
        fs::create_directories(root_ / layout(kind).dir);
    }
    fs::create_directories(root_ / "blobs");
    // A crash between temp write and rename leaves a temp file behind.
    std::vector<fs::path> dirs{root_ / "blobs"};
    for (auto kind : kAllEntityKinds) dirs.push_back(root_ / layout(kind).dir);
    for (const auto& dir : dirs) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().filename().string().find(kTempMarker) != std::string::npos) {
                fs::remove(entry.path());
            }
        }
    }
    index_ = scan();
}

std::map<std::pair<EntityKind, std::string>, std::uint64_t> Workspace::scan() const {
    std::map<std::pair<EntityKind, std::string>, std::uint64_t> found;
    for (auto kind : kAllEntityKinds) {
        const auto [dir, ext] = layout(kind);
        for (const auto& entry : fs::directory_iterator(root_ / dir)) {
            const auto name = entry.path().filename().string();
            if (!entry.is_regular_file() || !ends_with(name, ext) || name.find(kTempMarker) != std::string::npos) {
                continue;
            }
            const auto id = name.substr(0, name.size() - std::string_view(ext).size());
            std::uint64_t revision = 0;
            try {
                const auto doc = json::parse(read_file(entry.path()));
                revision = doc.at(kRevisionKey).get<std::uint64_t>();
            } catch (const json::exception&) {
                // Unreadable files are indexed at revision 0 and fail on load.
            }
            found[{kind, id}] = revision;
        }
    }
    return found;
}

std::map<std::pair<EntityKind, std::string>, std::uint64_t> Workspace::index() const {
    std::shared_lock lock(index_mutex_);
    return index_;
}

void Workspace::set_fault_hook(FaultHook hook) {
    std::lock_guard lock(write_mutex_);
    fault_hook_ = std::move(hook);
}

fs::path Workspace::entity_path(EntityKind kind, const std::string& id) const {
    check_entity_id(id);
    const auto [dir, ext] = layout(kind);
    return root_ / dir / (id + ext);
}

bool Workspace::exists(EntityKind kind, const std::string& id) const {
    std::shared_lock lock(index_mutex_);
    return index_.count({kind, id}) != 0;
}

std::uint64_t Workspace::revision_of(EntityKind kind, const std::string& id) const {
    std::shared_lock lock(index_mutex_);
    auto it = index_.find({kind, id});
    return it == index_.end() ? 0 : it->second;
}

std::vector<std::string> Workspace::list(EntityKind kind) const {
    std::shared_lock lock(index_mutex_);
    std::vector<std::string> ids;
    for (const auto& [key, revision] : index_) {
        if (key.first == kind) ids.push_back(key.second);
    }
    return ids;
}

void Workspace::write_atomically(const fs::path& target, std::string_view content, bool hooked) const {
    const fs::path temp = target.string() + std::string(kTempMarker) + random_id().substr(0, 8);
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(temp);
            fail(ErrorCode::CorruptEntity, "failed to write " + temp.string());
        }
    }
    if (hooked && fault_hook_) fault_hook_(temp, target);
    fs::rename(temp, target);
}

SaveReceipt Workspace::save_document(EntityKind kind, const std::string& id, json doc,
                                     std::uint64_t expected_revision) {
    const auto path = entity_path(kind, id);
    std::lock_guard lock(write_mutex_);
    const auto current = revision_of(kind, id);
    if (current != expected_revision) {
        fail(ErrorCode::ConflictError,
             std::string(entity_kind_name(kind)) + " " + id + " is at revision " + std::to_string(current) +
                 ", save expected " + std::to_string(expected_revision),
             json{{"current", current}, {"expected", expected_revision}});
    }
    const auto next = current + 1;
    doc[kRevisionKey] = next;
    write_atomically(path, canonical_dump(doc), true);
    {
        std::unique_lock index_lock(index_mutex_);
        index_[{kind, id}] = next;
    }
    return SaveReceipt{kind, id, next};
}

std::pair<json, std::uint64_t> Workspace::load_document(EntityKind kind, const std::string& id) const {
    const auto path = entity_path(kind, id);
    if (!fs::exists(path)) {
        fail(ErrorCode::NotFound, std::string(entity_kind_name(kind)) + " '" + id + "' not found");
    }
    json doc;
    try {
        doc = json::parse(read_file(path));
        auto revision = doc.at(kRevisionKey).get<std::uint64_t>();
        doc.erase(kRevisionKey);
        return {std::move(doc), revision};
    } catch (const json::exception& e) {
        fail(ErrorCode::CorruptEntity, path.string() + " is unreadable: " + e.what());
    }
}

namespace {

template <typename T>
Stored<T> convert(std::pair<json, std::uint64_t> loaded, const fs::path& path) {
    try {
        return Stored<T>{loaded.first.get<T>(), loaded.second};
    } catch (const json::exception& e) {
        fail(ErrorCode::CorruptEntity, path.string() + " does not match its schema: " + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaMismatch) {
            fail(ErrorCode::CorruptEntity, path.string() + ": " + e.what());
        }
        throw;
    }
}

}  // namespace

SaveReceipt Workspace::save_character(const CharacterRecord& record, std::uint64_t expected_revision) {
    return save_document(EntityKind::Character, record.character_id, json(record), expected_revision);
}

SaveReceipt Workspace::save_session(const GenerationSession& session, std::uint64_t expected_revision) {
    check_entity_id(session.session_id);
    if (session.selected_image_id) {
        const auto& images = session.images;
        if (std::none_of(images.begin(), images.end(),
                         [&](const ReferenceImage& i) { return i.image_id == *session.selected_image_id; })) {
            fail(ErrorCode::ValidationError, "selected image is not among the session images");
        }
    }
    const auto doc = externalize_session(session);
    for (const auto& image : session.images) put_blob(image.media);
    for (const auto& revision : session.revisions) {
        for (const auto* state : {&revision.before, &revision.after}) {
            if (!state->is_object() || !state->contains("images")) continue;
            for (const auto& image : state->at("images")) {
                if (!has_blob(image.at("image_id").get<std::string>())) {
                    put_blob(base64_decode(image.at("media").get<std::string>()));
                }
            }
        }
    }
    return save_document(EntityKind::Session, session.session_id, doc, expected_revision);
}

SaveReceipt Workspace::save_transcript(const ChatTranscript& transcript, std::uint64_t expected_revision) {
    return save_document(EntityKind::Transcript, transcript.character_id, json(transcript), expected_revision);
}

SaveReceipt Workspace::save_graph(const LineageGraph& graph, std::uint64_t expected_revision) {
    ensure_valid(validate_graph(graph), "lineage graph");
    return save_document(EntityKind::Graph, graph.graph_id, json(graph), expected_revision);
}

Stored<CharacterRecord> Workspace::load_character(const std::string& id) const {
    return convert<CharacterRecord>(load_document(EntityKind::Character, id), entity_path(EntityKind::Character, id));
}

Stored<GenerationSession> Workspace::load_session(const std::string& id) const {
    auto [doc, revision] = load_document(EntityKind::Session, id);
    const auto path = entity_path(EntityKind::Session, id);
    try {
        return {hydrate_session(doc, [this](const std::string& hash) { return get_blob(hash); }), revision};
    } catch (const json::exception& e) {
        fail(ErrorCode::CorruptEntity, path.string() + " does not match its schema: " + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaMismatch) fail(ErrorCode::CorruptEntity, path.string() + ": " + e.what());
        throw;
    }
}

Stored<ChatTranscript> Workspace::load_transcript(const std::string& id) const {
    return convert<ChatTranscript>(load_document(EntityKind::Transcript, id), entity_path(EntityKind::Transcript, id));
}

Stored<LineageGraph> Workspace::load_graph(const std::string& id) const {
    return convert<LineageGraph>(load_document(EntityKind::Graph, id), entity_path(EntityKind::Graph, id));
}

fs::path Workspace::blob_path(const std::string& hash) const {
    if (!is_hash(hash)) fail(ErrorCode::BadRequest, "invalid blob hash '" + hash + "'");
    return root_ / "blobs" / (hash + ".png");
}

std::string Workspace::put_blob(std::span<const std::uint8_t> media) {
    const auto hash = sha256_hex(media);
    const auto path = blob_path(hash);
    if (!fs::exists(path)) {
        write_atomically(path, std::string_view(reinterpret_cast<const char*>(media.data()), media.size()), false);
    }
    return hash;
}

bool Workspace::has_blob(const std::string& hash) const {
    return is_hash(hash) && fs::exists(blob_path(hash));
}

Bytes Workspace::get_blob(const std::string& hash) const {
    const auto path = blob_path(hash);
    if (!fs::exists(path)) {
        fail(ErrorCode::MissingBlob, "blob " + hash + " is missing", json{{"blob", hash}});
    }
    const auto content = read_file(path);
    Bytes media(content.begin(), content.end());
    if (sha256_hex(media) != hash) {
        fail(ErrorCode::CorruptEntity, "blob " + hash + " does not match its hash");
    }
    return media;
}

std::vector<std::string> Workspace::list_blobs() const {
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(root_ / "blobs")) {
        const auto name = entry.path().filename().string();
        if (ends_with(name, ".png") && is_hash(name.substr(0, name.size() - 4))) {
            out.push_back(name.substr(0, name.size() - 4));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace charforge
