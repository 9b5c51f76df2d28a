#pragma once

// Test providers, fixtures and generators.

#include "charforge/api.hpp"
#include "charforge/mock_provider.hpp"

#include <deque>
#include <filesystem>
#include <mutex>
#include <random>

namespace fakes {

using namespace charforge;

// "summary", "keywords" or "chat", read from the first user message.
std::string text_layer(const ChatRequest& request);

struct Call {
    std::string layer;  // summary | keywords | chat | images
    ChatRequest text;
    ImageRequest image;
};

// Delegates to an inner provider and records every call that reaches it.
class RecordingProvider final : public Provider {
public:
    explicit RecordingProvider(ProviderHandle inner) : Provider(64), inner_(std::move(inner)) {}

    ProviderKind kind() const noexcept override { return inner_->kind(); }
    std::vector<Call> calls() const;
    std::vector<std::string> layers() const;
    std::size_t count(const std::string& layer) const;

protected:
    TextResult do_complete_text(const ChatRequest& request) override;
    std::vector<ReferenceImage> do_generate_images(const ImageRequest& request) override;

private:
    ProviderHandle inner_;
    mutable std::mutex mutex_;
    std::vector<Call> calls_;
};

// Answers text calls from a script (one entry per call, in order) and falls
// back to a seeded mock once the script runs out. Images always come from the
// mock.
class ScriptedProvider final : public Provider {
public:
    using Reply = std::function<std::string(const ChatRequest&)>;

    explicit ScriptedProvider(std::vector<Reply> script = {}, std::uint64_t seed = 1);
    static Reply say(std::string text);

    ProviderKind kind() const noexcept override { return ProviderKind::Mock; }
    std::size_t text_calls() const { return text_calls_; }
    const std::vector<ChatRequest>& requests() const { return requests_; }

protected:
    TextResult do_complete_text(const ChatRequest& request) override;
    std::vector<ReferenceImage> do_generate_images(const ImageRequest& request) override;

private:
    std::deque<Reply> script_;
    MockProvider mock_;
    std::size_t text_calls_ = 0;
    std::vector<ChatRequest> requests_;
};

// Mock whose calls fail with `code` for the chosen layer.
class FailingProvider final : public Provider {
public:
    FailingProvider(std::string failing_layer, ErrorCode code, std::uint64_t seed = 1)
        : Provider(64), layer_(std::move(failing_layer)), code_(code), mock_(seed) {}

    ProviderKind kind() const noexcept override { return ProviderKind::Mock; }

protected:
    TextResult do_complete_text(const ChatRequest& request) override;
    std::vector<ReferenceImage> do_generate_images(const ImageRequest& request) override;

private:
    std::string layer_;
    ErrorCode code_;
    MockProvider mock_;
};

// Mock whose profiles are always named `name`, whatever the prompt asks.
class ConstantNameProvider final : public Provider {
public:
    explicit ConstantNameProvider(std::string name, std::uint64_t seed = 1)
        : Provider(64), name_(std::move(name)), mock_(seed) {}

    ProviderKind kind() const noexcept override { return ProviderKind::Mock; }
    std::size_t summary_calls() const { return summary_calls_; }

protected:
    TextResult do_complete_text(const ChatRequest& request) override;
    std::vector<ReferenceImage> do_generate_images(const ImageRequest& request) override;

private:
    std::string name_;
    MockProvider mock_;
    std::size_t summary_calls_ = 0;
};

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

Clock fixed_clock();

CharacterSpec warrior_spec();
CharacterSpec ahab_spec();
CharacterSpec dwarf_spec();
CharacterProfile ahab_profile();

// Labeled-line profile answer with a story of `story_words` words.
std::string profile_text(const std::string& name, std::size_t story_words);
std::string words(std::size_t n, const std::string& word = "word");

std::string random_word(std::mt19937_64& rng);
std::string random_phrase(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words);
CharacterSpec random_spec(std::mt19937_64& rng);
CharacterProfile random_profile(std::mt19937_64& rng);
LineageGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes, std::size_t max_edges);

// A fully generated, selected session saved in ws (character + session).
GenerationSession seed_character(Workspace& ws, Provider& provider, const CharacterSpec& spec,
                                 const std::string& id, bool with_selection = true);

}  // namespace fakes
