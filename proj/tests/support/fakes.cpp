#include "fakes.hpp"

#include <atomic>
#include <sstream>

namespace fakes {

namespace fs = std::filesystem;

std::string text_layer(const ChatRequest& request) {
    for (const auto& m : request.messages) {
        if (m.role != Role::User) continue;
        if (contains(m.content, "no more than 150 words")) return "summary";
        if (contains(m.content, "comma-separated list of keywords")) return "keywords";
        return "chat";
    }
    return "chat";
}

std::vector<Call> RecordingProvider::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::vector<std::string> RecordingProvider::layers() const {
    std::vector<std::string> out;
    for (const auto& c : calls()) out.push_back(c.layer);
    return out;
}

std::size_t RecordingProvider::count(const std::string& layer) const {
    const auto all = layers();
    return static_cast<std::size_t>(std::count(all.begin(), all.end(), layer));
}

TextResult RecordingProvider::do_complete_text(const ChatRequest& request) {
    {
        std::lock_guard lock(mutex_);
        calls_.push_back({text_layer(request), request, {}});
    }
    return inner_->complete_text(request);
}

std::vector<ReferenceImage> RecordingProvider::do_generate_images(const ImageRequest& request) {
    {
        std::lock_guard lock(mutex_);
        calls_.push_back({"images", {}, request});
    }
    return inner_->generate_images(request);
}

ScriptedProvider::ScriptedProvider(std::vector<Reply> script, std::uint64_t seed)
    : Provider(64), script_(script.begin(), script.end()), mock_(seed) {}

ScriptedProvider::Reply ScriptedProvider::say(std::string text) {
    return [text = std::move(text)](const ChatRequest&) { return text; };
}

TextResult ScriptedProvider::do_complete_text(const ChatRequest& request) {
    ++text_calls_;
    requests_.push_back(request);
    if (script_.empty()) return mock_.complete_text(request);
    auto reply = std::move(script_.front());
    script_.pop_front();
    return TextResult{reply(request), {}};
}

std::vector<ReferenceImage> ScriptedProvider::do_generate_images(const ImageRequest& request) {
    return mock_.generate_images(request);
}

TextResult FailingProvider::do_complete_text(const ChatRequest& request) {
    if (text_layer(request) == layer_) fail(code_, "injected failure in " + layer_);
    return mock_.complete_text(request);
}

std::vector<ReferenceImage> FailingProvider::do_generate_images(const ImageRequest& request) {
    if (layer_ == "images") fail(code_, "injected failure in images");
    return mock_.generate_images(request);
}

TextResult ConstantNameProvider::do_complete_text(const ChatRequest& request) {
    auto result = mock_.complete_text(request);
    if (text_layer(request) != "summary") return result;
    ++summary_calls_;
    std::istringstream in(result.content);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
        if (line.rfind("Name:", 0) == 0) line = "Name: " + name_;
        out += line + "\n";
    }
    result.content = out;
    return result;
}

std::vector<ReferenceImage> ConstantNameProvider::do_generate_images(const ImageRequest& request) {
    return mock_.generate_images(request);
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("charforge-test-" + random_id().substr(0, 12) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

Clock fixed_clock() { return stepping_clock(Timestamp{1710000000000}, 1000); }

CharacterSpec warrior_spec() {
    return CharacterSpec{"", "brave warrior protagonist", "from a war-torn land", "open-world RPG", "anime"};
}

CharacterSpec ahab_spec() {
    return CharacterSpec{"Ahab", "a master character who leads the crew", "Lost his ship to a white whale.",
                         "platformer anime game", "2D anime AVG"};
}

CharacterSpec dwarf_spec() {
    return CharacterSpec{"", "a wise old dwarf who guards the mountain forge", "",
                         "fantasy RPG", "Chinese-ink"};
}

CharacterProfile ahab_profile() {
    CharacterProfile p;
    p.name = "Ahab";
    p.age = "52";
    p.dressing_style = "weathered captain coat with brass buttons";
    p.weapon = "whaling harpoon";
    p.background_story = "Ahab lost his ship and his leg to a white whale and swore revenge across every sea.";
    return p;
}

std::string words(std::size_t n, const std::string& word) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + word;
    return out;
}

std::string profile_text(const std::string& name, std::size_t story_words) {
    return "Name: " + name + "\nAge: 30\nDressing style: long grey cloak\nWeapon: curved sabre\nBackground story: " +
           words(story_words, "tale") + "\n";
}

namespace {

const std::vector<std::string> kWords = {
    "amber", "blade", "cinder", "dusk",  "ember",  "frost",  "gale",  "harbor", "iron",   "jade",
    "kestrel", "lantern", "moss", "night", "oak", "pyre", "quartz", "raven", "storm", "thorn",
    "umber", "vale", "willow", "xenon", "yarrow", "zephyr", "ash", "briar", "coral", "drift"};

}  // namespace

std::string random_word(std::mt19937_64& rng) {
    return kWords[std::uniform_int_distribution<std::size_t>(0, kWords.size() - 1)(rng)];
}

std::string random_phrase(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
    const auto n = std::uniform_int_distribution<std::size_t>(min_words, max_words)(rng);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + random_word(rng);
    return out;
}

CharacterSpec random_spec(std::mt19937_64& rng) {
    CharacterSpec s;
    std::bernoulli_distribution coin(0.5);
    s.name = coin(rng) ? random_word(rng) : "";
    s.role_details = random_phrase(rng, 1, 12);
    s.background_story = coin(rng) ? random_phrase(rng, 0, 40) : "";
    s.game_type = random_phrase(rng, 1, 3);
    s.render_style = random_phrase(rng, 1, 3);
    return s;
}

CharacterProfile random_profile(std::mt19937_64& rng) {
    CharacterProfile p;
    p.name = random_word(rng);
    p.age = std::to_string(std::uniform_int_distribution<int>(12, 400)(rng));
    p.dressing_style = random_phrase(rng, 1, 6);
    p.weapon = random_phrase(rng, 1, 3);
    p.background_story = random_phrase(rng, 1, 150);
    const auto extras = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int i = 0; i < extras; ++i) p.extra_sections.push_back({"Extra " + random_word(rng), random_phrase(rng, 1, 8)});
    return p;
}

LineageGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes, std::size_t max_edges) {
    LineageGraph g;
    g.graph_id = "g" + std::to_string(rng() % 100000);
    const auto n = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("c" + std::to_string(i) + random_word(rng));
    for (const auto& id : ids) g = add_node(g, id);
    if (n < 2) return g;
    const auto m = std::uniform_int_distribution<std::size_t>(0, max_edges)(rng);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < m; ++i) {
        const auto a = pick(rng);
        const auto b = pick(rng);
        if (a == b) continue;
        g = link(g, ids[a], ids[b], random_phrase(rng, 1, 3));
    }
    return g;
}

GenerationSession seed_character(Workspace& ws, Provider& provider, const CharacterSpec& spec, const std::string& id,
                                 bool with_selection) {
    const auto templates = TemplateCatalog::builtin();
    const auto clock = fixed_clock();
    auto session = create_session(spec, clock, id);
    session = regenerate(session, Stage::Profile, RegenerationContext{provider, templates, {64, 64}, clock});
    if (with_selection) session = select_image(session, session.images.at(1).image_id, clock);
    ws.save_session(session, ws.revision_of(EntityKind::Session, id));
    ws.save_character(record_from_session(session, clock()), ws.revision_of(EntityKind::Character, id));
    return session;
}

}  // namespace fakes
