#include "charforge/mock_provider.hpp"

#include "charforge/png.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>

namespace charforge {
namespace {

// Fragments the mock uses to recognise which prompt layer it is answering.
constexpr std::string_view kProfileMarker = "name, age, dressing style, weapon, background story";
constexpr std::string_view kKeywordMarker = "comma-separated list of keywords";
constexpr std::string_view kAvoidNamesLabel = "avoid these names:";
constexpr std::string_view kVariantMarker = "variant ";
constexpr std::string_view kInventMarker = "invent a fitting name";

constexpr std::array kNames = {
    "Ahab",    "Mira",    "Durin",   "Kestrel", "Lyra",    "Torvald", "Sable",   "Orin",
    "Yuki",    "Corvin",  "Isolde",  "Rhea",    "Fenwick", "Talia",   "Bram",    "Seraphine",
    "Jun",     "Halvar",  "Nadia",   "Ezra",    "Wren",    "Gideon",  "Liora",   "Magnus",
    "Ren",     "Thessaly", "Cass",   "Ilya",    "Oona",    "Piotr",   "Zara",    "Quillon",
    "Astrid",  "Bao",     "Celeste", "Dorian",  "Elowen",  "Faramir", "Greta",   "Hollis",
};
constexpr std::array kAges = {"17", "19", "23", "26", "31", "38", "45", "52", "67", "203"};
constexpr std::array kDressing = {
    "long black coat with silver buckles",
    "patched leather armor and a hooded cloak",
    "neon-lit techwear jacket with cargo pants",
    "flowing ink-washed robes",
    "heavy fur mantle over chainmail",
    "school uniform with a torn red scarf",
    "tailored detective suit and gloves",
    "ragged sailor's coat and rope belt",
};
constexpr std::array kWeapons = {
    "curved twin daggers", "rune-etched warhammer", "plasma pistol", "jian sword",
    "crossbow with bone bolts", "harpoon", "spell-bound grimoire", "steel quarterstaff",
};
constexpr std::array kTraits = {
    "calm and calculating", "warm-hearted and talkative", "stubborn but loyal",
    "cheerful with a hidden temper", "quiet, observant, and dry-witted", "reckless and proud",
};
constexpr std::array kStoryBeats = {
    "Years of hardship taught them to trust actions over words.",
    "They carry a keepsake from the home they lost.",
    "A broken oath still haunts their sleep.",
    "Old rivals whisper their name with both fear and respect.",
    "They search for the truth behind a vanished mentor.",
    "Every scar marks a promise they kept.",
};
constexpr std::array kVisualWords = {
    "cool", "long hair", "scarred face", "determined eyes", "hooded", "glowing tattoos",
    "silver earrings", "wind-swept", "battle-worn", "sharp silhouette", "confident stance",
    "mysterious aura", "braided hair", "warm smile",
};
constexpr std::array kReplyOpeners = {
    "Hm. You want to know about that?",
    "Ha! Few people dare to ask me that.",
    "Listen closely, I will only say this once.",
    "That question takes me back.",
    "I have been waiting for someone to ask.",
};
constexpr std::array kReplyClosers = {
    "Ask me something else, if you are brave enough.",
    "Now, where was I?",
    "Remember that, traveler.",
    "Do not repeat it to anyone.",
};

/// SplitMix64 over a SHA-256 derived seed; bit-exact on every platform.
class Stream {
public:
    explicit Stream(std::string_view material) {
        const auto digest = sha256_raw(material);
        for (int i = 0; i < 8; ++i) state_ = (state_ << 8) | digest[i];
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

    template <typename Pool>
    std::string pick(const Pool& pool) {
        return pool[below(pool.size())];
    }

private:
    std::uint64_t state_ = 0;
};

std::string request_material(std::uint64_t seed, const ChatRequest& request) {
    std::string material = "text|" + std::to_string(seed);
    for (const auto& m : request.messages) {
        material += '\x1e';
        material += role_name(m.role);
        material += '\x1f';
        material += m.content;
    }
    return material;
}

const ChatMessage* first_of(const ChatRequest& request, Role role) {
    for (const auto& m : request.messages) {
        if (m.role == role) return &m;
    }
    return nullptr;
}

/// "Label: value" lines keyed by lowercase label.
std::map<std::string, std::string> labeled_lines(std::string_view text) {
    std::map<std::string, std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos || colon == 0) continue;
        auto label = to_lower(trim(line.substr(0, colon)));
        if (word_count(label) > 3) continue;
        out.emplace(std::move(label), trim(line.substr(colon + 1)));
    }
    return out;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (c == ',') {
            if (auto t = trim(current); !t.empty()) out.push_back(std::move(t));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (auto t = trim(current); !t.empty()) out.push_back(std::move(t));
    return out;
}

std::string truncate_words(std::string_view text, std::size_t max_words) {
    const auto words = split_words(text);
    std::string out;
    for (std::size_t i = 0; i < words.size() && i < max_words; ++i) {
        if (!out.empty()) out += ' ';
        out += words[i];
    }
    return out;
}

std::string mock_profile(Stream& rng, const std::string& user_text) {
    const auto fields = labeled_lines(user_text);
    auto field = [&](const std::string& key) {
        auto it = fields.find(key);
        return it == fields.end() ? std::string{} : it->second;
    };

    std::set<std::string> avoid;
    if (auto it = fields.find(std::string(kAvoidNamesLabel.substr(0, kAvoidNamesLabel.size() - 1)));
        it != fields.end()) {
        for (auto& n : split_list(it->second)) avoid.insert(to_lower(n));
    }

    std::string name = field("name");
    const std::string lowered = to_lower(user_text);
    if (name.empty() || contains(to_lower(name), kInventMarker) || contains(lowered, kVariantMarker)) {
        const std::size_t start = rng.below(kNames.size());
        name = kNames[start];
        for (std::size_t i = 0; i < kNames.size(); ++i) {
            const std::string candidate = kNames[(start + i) % kNames.size()];
            if (!avoid.count(to_lower(candidate))) {
                name = candidate;
                break;
            }
        }
    }

    std::string story = name;
    if (const auto role = field("role details"); !role.empty()) {
        story += " is " + truncate_words(role, 40) + ".";
    } else {
        story += " keeps their past close.";
    }
    if (const auto game = field("game type"); !game.empty()) {
        story += " Their tale unfolds in the " + truncate_words(game, 10) + " world.";
    }
    if (const auto background = field("background story"); !background.empty()) {
        story += " " + truncate_words(background, 50);
        if (story.back() != '.') story += '.';
    }
    story += " " + rng.pick(kStoryBeats);
    story += " " + rng.pick(kStoryBeats);
    story = truncate_words(story, 140);

    std::ostringstream out;
    out << "Name: " << name << "\n"
        << "Age: " << rng.pick(kAges) << "\n"
        << "Dressing style: " << rng.pick(kDressing) << "\n"
        << "Weapon: " << rng.pick(kWeapons) << "\n"
        << "Background story: " << story << "\n"
        << "Personality: " << rng.pick(kTraits) << "\n";
    return out.str();
}

std::string mock_keywords(Stream& rng, const std::string& user_text) {
    const auto fields = labeled_lines(user_text);
    std::vector<std::string> candidates;
    for (const char* key : {"dressing style", "weapon"}) {
        if (auto it = fields.find(key); it != fields.end() && word_count(it->second) <= kMaxKeywordWords) {
            candidates.push_back(it->second);
        }
    }
    std::vector<std::string> pool(kVisualWords.begin(), kVisualWords.end());
    const std::size_t wanted = 6 + rng.below(4);
    while (candidates.size() < wanted && !pool.empty()) {
        const auto i = rng.below(pool.size());
        candidates.push_back(pool[i]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
    }
    std::string out;
    for (const auto& c : candidates) {
        if (!out.empty()) out += ", ";
        out += c;
    }
    return out;
}

std::string mock_reply(Stream& rng, const ChatRequest& request) {
    std::string name;
    if (const auto* system = first_of(request, Role::System)) {
        const auto fields = labeled_lines(system->content);
        if (auto it = fields.find("name"); it != fields.end()) name = it->second;
    }
    const auto& last = request.messages.back().content;
    std::string reply;
    if (!name.empty()) reply = "[" + name + "] ";
    reply += rng.pick(kReplyOpeners);
    reply += " You asked: \"" + truncate_words(last, 12) + "\". ";
    reply += rng.pick(kReplyClosers);
    return reply;
}

}  // namespace

MockProvider::MockProvider(std::uint64_t seed, int max_in_flight) : Provider(max_in_flight), seed_(seed) {}

TextResult MockProvider::do_complete_text(const ChatRequest& request) {
    Stream rng(request_material(seed_, request));
    const auto* user = first_of(request, Role::User);
    const std::string user_text = user ? user->content : std::string{};

    TextResult result;
    if (contains(user_text, kProfileMarker)) {
        result.content = mock_profile(rng, user_text);
    } else if (contains(user_text, kKeywordMarker)) {
        result.content = mock_keywords(rng, user_text);
    } else {
        result.content = mock_reply(rng, request);
    }
    std::size_t prompt_words = 0;
    for (const auto& m : request.messages) prompt_words += word_count(m.content);
    result.usage.prompt_tokens = static_cast<int>(prompt_words);
    result.usage.completion_tokens = static_cast<int>(word_count(result.content));
    return result;
}

std::vector<ReferenceImage> MockProvider::do_generate_images(const ImageRequest& request) {
    std::vector<ReferenceImage> images;
    std::set<std::uint32_t> used;
    for (int index = 0; index < request.count; ++index) {
        png::Rgb color;
        for (int salt = 0;; ++salt) {
            Stream rng("image|" + std::to_string(seed_) + "|" + std::to_string(request.size.width) + "x" +
                       std::to_string(request.size.height) + "|" + std::to_string(index) + "|" +
                       std::to_string(salt) + "|" + request.prompt);
            const auto v = rng.next();
            color = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                     static_cast<std::uint8_t>(v >> 16)};
            const std::uint32_t packed = (std::uint32_t{color.r} << 16) | (std::uint32_t{color.g} << 8) | color.b;
            if (used.insert(packed).second) break;
        }
        images.push_back(make_reference_image(png::encode_solid(request.size.width, request.size.height, color),
                                               request.prompt, kMockEpoch));
    }
    return images;
}

}  // namespace charforge
