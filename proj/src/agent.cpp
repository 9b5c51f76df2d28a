#include "charforge/agent.hpp"

#include <sstream>

namespace charforge {

using nlohmann::json;

PersonaCard build_persona(std::string character_id, const CharacterProfile& profile, const KeywordSet& keywords,
                          const std::vector<Relationship>& relationships, std::string style_directives) {
    ensure_valid(validate_profile(profile), "character profile");

    std::ostringstream doc;
    doc << "You are playing the game character described below.\n\n"
        << "Name: " << profile.name << "\n"
        << "Age: " << profile.age << "\n"
        << "Dressing style: " << profile.dressing_style << "\n"
        << "Weapon: " << profile.weapon << "\n"
        << "Background story: " << profile.background_story << "\n";
    for (const auto& section : profile.extra_sections) {
        doc << section.heading << ": " << section.text << "\n";
    }
    if (!keywords.keywords.empty()) {
        doc << "Keywords: ";
        for (std::size_t i = 0; i < keywords.keywords.size(); ++i) {
            doc << (i ? ", " : "") << keywords.keywords[i];
        }
        doc << "\n";
    }
    if (!relationships.empty()) {
        doc << "\nRelationships:\n";
        for (const auto& r : relationships) {
            if (r.direction == RelationDirection::Outgoing) {
                doc << "- " << r.label << " of " << r.other_name << "\n";
            } else {
                doc << "- " << r.other_name << " is " << r.label << " of " << profile.name << "\n";
            }
        }
    }
    return PersonaCard{std::move(character_id), doc.str(), std::move(style_directives)};
}

std::span<const Turn> truncate_context(const ChatTranscript& transcript, std::size_t window) {
    require(window >= 2, "chat window must be at least 2");
    const auto& turns = transcript.turns;
    const auto keep = std::min(window, turns.size());
    return std::span<const Turn>(turns).subspan(turns.size() - keep, keep);
}

ChatRequest build_chat_request(const PersonaCard& card, const ChatTranscript& transcript,
                               std::string_view user_message) {
    require(!trim(user_message).empty(), "chat message is empty");
    ChatRequest request;
    request.messages.push_back({Role::System, card.persona_document + "\n" + card.style_directives});
    for (const auto& turn : truncate_context(transcript, transcript.window)) {
        request.messages.push_back({turn.speaker == Speaker::Designer ? Role::User : Role::Assistant, turn.text});
    }
    request.messages.push_back({Role::User, std::string(user_message)});
    return request;
}

ChatOutcome chat(const PersonaCard& card, const ChatTranscript& transcript, std::string_view user_message,
                 Provider& provider, const Clock& clock) {
    const auto request = build_chat_request(card, transcript, user_message);
    const auto asked_at = clock();
    auto reply = provider.complete_text(request);

    ChatOutcome outcome{reply.content, transcript};
    outcome.transcript.turns.push_back({Speaker::Designer, std::string(user_message), asked_at});
    outcome.transcript.turns.push_back({Speaker::Character, std::move(reply.content), clock()});
    return outcome;
}

void to_json(json& j, const PersonaCard& v) {
    j = json{{"character_id", v.character_id},
             {"persona_document", v.persona_document},
             {"style_directives", v.style_directives}};
}

void from_json(const json& j, PersonaCard& v) {
    j.at("character_id").get_to(v.character_id);
    j.at("persona_document").get_to(v.persona_document);
    j.at("style_directives").get_to(v.style_directives);
}

void to_json(json& j, const Turn& v) {
    j = json{{"speaker", v.speaker == Speaker::Designer ? "designer" : "character"}, {"text", v.text}, {"at", v.at}};
}

void from_json(const json& j, Turn& v) {
    const auto speaker = j.at("speaker").get<std::string>();
    if (speaker != "designer" && speaker != "character") {
        throw Error(ErrorCode::SchemaMismatch, "unknown speaker '" + speaker + "'");
    }
    v.speaker = speaker == "designer" ? Speaker::Designer : Speaker::Character;
    j.at("text").get_to(v.text);
    j.at("at").get_to(v.at);
}

void to_json(json& j, const ChatTranscript& v) {
    j = json{{"schema", kSchemaVersion}, {"character_id", v.character_id}, {"turns", v.turns}, {"window", v.window}};
}

void from_json(const json& j, ChatTranscript& v) {
    check_schema(j);
    j.at("character_id").get_to(v.character_id);
    j.at("turns").get_to(v.turns);
    j.at("window").get_to(v.window);
    if (v.window < 2) {
        throw Error(ErrorCode::SchemaMismatch, "transcript window must be at least 2");
    }
}

}  // namespace charforge
