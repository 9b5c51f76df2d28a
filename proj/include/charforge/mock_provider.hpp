#pragma once

#include "charforge/provider.hpp"

namespace charforge {

/// Timestamp stamped on every mock image (2024-01-01T00:00:00Z).
inline constexpr Timestamp kMockEpoch{1704067200000};

/// Offline backend whose every output is a pure function of (seed, request).
///
/// Text requests are answered by recognising which prompt layer produced them:
/// a profile request (its user message lists the five profile fields) gets a
/// labeled profile, a keyword request gets a comma-separated keyword list, and
/// anything else gets an in-character chat reply. Images are solid-color PNGs
/// whose color is derived from (seed, prompt, index, size); colors never repeat
/// within one request.
class MockProvider final : public Provider {
public:
    explicit MockProvider(std::uint64_t seed, int max_in_flight = 4);

    ProviderKind kind() const noexcept override { return ProviderKind::Mock; }
    std::uint64_t seed() const noexcept { return seed_; }

protected:
    TextResult do_complete_text(const ChatRequest& request) override;
    std::vector<ReferenceImage> do_generate_images(const ImageRequest& request) override;

private:
    std::uint64_t seed_;
};

}  // namespace charforge
