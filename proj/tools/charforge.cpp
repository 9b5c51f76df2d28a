#include "charforge/api.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace charforge;

namespace {

struct Globals {
    std::string workspace = "charforge-workspace";
    std::string templates;
    std::optional<std::uint64_t> mock_seed;
};

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::NotFound, "cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::BadRequest, "cannot write " + path.string());
}

CharacterSpec load_spec(const std::string& path) {
    try {
        auto doc = json::parse(read_text(path));
        return (doc.contains("spec") ? doc.at("spec") : doc).get<CharacterSpec>();
    } catch (const json::exception& e) {
        fail(ErrorCode::BadRequest, path + " is not a character spec: " + e.what());
    }
}

ProviderConfig provider_config(const Globals& g) {
    auto config = ProviderConfig::from_env();
    if (g.mock_seed) config.mock_seed = *g.mock_seed;
    config.validate();
    return config;
}

TemplateCatalog templates(const Globals& g) {
    return g.templates.empty() ? TemplateCatalog::builtin() : TemplateCatalog::load(g.templates);
}

StudioConfig studio_config(const Globals& g) {
    StudioConfig config;
    config.workspace = g.workspace;
    config.provider = provider_config(g);
    if (!g.templates.empty()) config.templates_dir = fs::path(g.templates);
    return config;
}

void print(const json& doc) { std::cout << canonical_dump(doc); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"charforge: layered character generation"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--workspace", g.workspace, "Workspace directory")->capture_default_str();
    app.add_option("--templates", g.templates, "Directory with summary.txt, keywords.txt, image.txt");
    app.add_option("--mock-seed", g.mock_seed, "Seed for the mock provider");

    std::string spec_path;
    bool no_generate = false;
    auto* create = app.add_subcommand("create", "Create a session from a spec and generate every layer");
    create->add_option("--spec", spec_path, "Spec JSON file")->required();
    create->add_flag("--no-generate", no_generate, "Only create the session");

    auto* run = app.add_subcommand("run", "Run the pipeline once and print the result; nothing is saved");
    run->add_option("--spec", spec_path, "Spec JSON file")->required();

    std::string target;
    std::string layer;
    auto* regen = app.add_subcommand("regen", "Regenerate a layer and everything below it");
    regen->add_option("session", target)->required();
    regen->add_option("--layer", layer, "profile, keywords or images")->required();

    std::string path;
    std::string value;
    auto* edit = app.add_subcommand("edit", "Edit a session field");
    edit->add_option("session", target)->required();
    edit->add_option("--path", path, "e.g. profile.weapon")->required();
    edit->add_option("--value", value, "JSON value; bare text is taken as a string")->required();

    std::string image_id;
    auto* select = app.add_subcommand("select", "Select a reference image");
    select->add_option("session", target)->required();
    select->add_option("image", image_id)->required();

    auto* show = app.add_subcommand("show", "Print a session");
    show->add_option("session", target)->required();

    auto* card = app.add_subcommand("id-card", "Print a character's ID card");
    card->add_option("character", target)->required();

    auto* chat = app.add_subcommand("chat", "Talk to a character; an empty line or EOF ends the chat");
    chat->add_option("character", target)->required();

    std::size_t k = 5;
    std::string out_dir;
    auto* batch = app.add_subcommand("batch-npc", "Generate k variants of one spec");
    batch->add_option("--spec", spec_path, "Spec JSON file")->required();
    batch->add_option("-k", k, "Number of variants")->capture_default_str();
    batch->add_option("--out", out_dir, "Output directory")->required();

    std::string bundle_path;
    auto* exp = app.add_subcommand("export", "Write a character bundle");
    exp->add_option("character", target)->required();
    exp->add_option("--bundle", bundle_path, "Output .charpack file")->required();

    auto* imp = app.add_subcommand("import", "Import a character bundle");
    imp->add_option("bundle", bundle_path)->required();

    std::string graph_id;
    std::string from;
    std::string to;
    std::string label;
    auto* link = app.add_subcommand("link", "Add or relabel a relationship edge");
    link->add_option("graph", graph_id)->required();
    link->add_option("--from", from)->required();
    link->add_option("--to", to)->required();
    link->add_option("--label", label)->required();

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto provider = make_provider(provider_config(g));
            print(json(run_pipeline(load_spec(spec_path), *provider, templates(g))));
            return 0;
        }
        if (*batch) {
            auto provider = make_provider(provider_config(g));
            const auto result = batch_generate_npcs(load_spec(spec_path), k, *provider, templates(g));
            const fs::path dir = out_dir;
            fs::create_directories(dir);
            json summary = json::array();
            for (const auto& variant : result.variants) {
                char name[32];
                std::snprintf(name, sizeof name, "npc-%02zu", variant.index);
                const auto sub = dir / name;
                fs::create_directories(sub);
                std::ofstream(sub / "profile.json") << canonical_dump(json(variant.result.profile));
                std::ofstream(sub / "keywords.json") << canonical_dump(json(variant.result.keywords));
                std::ofstream(sub / "image_prompt.json") << canonical_dump(json(variant.result.image_prompt));
                for (std::size_t i = 0; i < variant.result.images.size(); ++i) {
                    write_bytes(sub / ("image-" + std::to_string(i + 1) + ".png"), variant.result.images[i].media);
                }
                summary.push_back({{"index", variant.index},
                                   {"dir", name},
                                   {"name", variant.result.profile.name},
                                   {"name_retries", variant.name_retries},
                                   {"name_suffixed", variant.name_suffixed}});
            }
            json doc{{"schema", kSchemaVersion}, {"complete", result.complete}, {"variants", summary}};
            if (result.failed_index) {
                doc["error"] = {{"variant", *result.failed_index},
                                {"code", error_code_name(*result.error_code)},
                                {"message", result.error_message}};
            }
            std::ofstream(dir / "batch.json") << canonical_dump(doc);
            print(doc);
            return result.complete ? 0 : 2;
        }
        if (*serve_cmd) {
            std::cerr << "serving " << g.workspace << " on http://" << host << ":" << port << "\n";
            serve(studio_config(g), host, port);
            return 0;
        }

        Studio studio(studio_config(g));
        if (*create) {
            auto session = studio.create(load_spec(spec_path));
            if (!no_generate) session = studio.regen(session.session_id, Stage::Profile, std::nullopt);
            print(session_view(session));
        } else if (*regen) {
            print(session_view(studio.regen(target, parse_stage(layer), std::nullopt)));
        } else if (*edit) {
            json parsed;
            try {
                parsed = json::parse(value);
            } catch (const json::exception&) {
                parsed = value;
            }
            print(session_view(studio.edit(target, path, parsed, std::nullopt)));
        } else if (*select) {
            print(session_view(studio.select(target, image_id, std::nullopt)));
        } else if (*show) {
            print(session_view(studio.get_session(target)));
        } else if (*card) {
            print(json(studio.id_card(target)));
        } else if (*chat) {
            studio.persona(target);
            std::string line;
            while (std::cout << "> " << std::flush, std::getline(std::cin, line) && !trim(line).empty()) {
                std::cout << studio.chat(target, line).reply << "\n";
            }
        } else if (*exp) {
            write_bytes(bundle_path, studio.export_bundle(target));
            std::cout << bundle_path << "\n";
        } else if (*imp) {
            const auto text = read_text(bundle_path);
            print(json{{"character_id", studio.import_bundle(Bytes(text.begin(), text.end()))}});
        } else if (*link) {
            print(json(studio.link(graph_id, from, to, label)));
        }
    } catch (const Error& e) {
        const auto api = to_api_error(e);
        std::cerr << "error: " << api.code << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
