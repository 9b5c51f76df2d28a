#include "charforge/api.hpp"
#include "charforge/mock_provider.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace charforge;
using nlohmann::json;

namespace {

py::object g_error_type;

CharacterSpec spec_of(const std::string& text) {
    try {
        return json::parse(text).get<CharacterSpec>();
    } catch (const json::exception& e) {
        fail(ErrorCode::BadRequest, std::string("spec is malformed: ") + e.what());
    }
}

ProviderHandle mock(std::uint64_t seed) { return std::make_shared<MockProvider>(seed); }

PipelineOptions sized(std::uint32_t width, std::uint32_t height) {
    PipelineOptions o;
    o.image_size = {width, height};
    return o;
}

std::string dump(const json& j) { return j.dump(); }

// Studio over a workspace, served by the mock or by a provider read from the environment.
class PyStudio {
public:
    PyStudio(const std::string& workspace, std::optional<std::uint64_t> seed, std::uint32_t image_size)
        : studio_(config(workspace, seed, image_size)) {}

    std::string create(const std::string& spec) { return dump(session_view(studio_.create(spec_of(spec)))); }
    std::string session(const std::string& id) const { return dump(session_view(studio_.get_session(id))); }
    std::string regenerate(const std::string& id, const std::string& layer) {
        return dump(session_view(studio_.regen(id, parse_stage(layer), std::nullopt)));
    }
    std::string edit(const std::string& id, const std::string& path, const std::string& value) {
        return dump(session_view(studio_.edit(id, path, json::parse(value), std::nullopt)));
    }
    std::string select(const std::string& id, const std::string& image_id) {
        return dump(session_view(studio_.select(id, image_id, std::nullopt)));
    }
    std::string character(const std::string& id) const { return dump(json(studio_.get_character(id))); }
    std::string id_card(const std::string& id) const { return dump(json(studio_.id_card(id))); }
    std::string chat(const std::string& id, const std::string& message) {
        const auto out = studio_.chat(id, message);
        return dump(json{{"reply", out.reply}, {"transcript", out.transcript}});
    }
    std::string link(const std::string& graph, const std::string& from, const std::string& to,
                     const std::string& label) {
        return dump(json(studio_.link(graph, from, to, label)));
    }
    std::string unlink(const std::string& graph, const std::string& from, const std::string& to) {
        return dump(json(studio_.unlink(graph, from, to)));
    }
    std::string neighbors(const std::string& graph, const std::string& id) const {
        json out = json::array();
        for (const auto& n : studio_.neighbors(graph, id)) {
            out.push_back({{"other_id", n.other_id}, {"label", n.label}, {"direction", edge_direction_name(n.direction)}});
        }
        return dump(out);
    }
    py::bytes export_bundle(const std::string& id) const {
        const auto b = studio_.export_bundle(id);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
    }
    std::string import_bundle(const py::bytes& data) {
        const std::string raw = data;
        return studio_.import_bundle(Bytes(raw.begin(), raw.end()));
    }

private:
    static StudioConfig config(const std::string& workspace, std::optional<std::uint64_t> seed, std::uint32_t edge) {
        StudioConfig c;
        c.workspace = workspace;
        c.provider = seed ? ProviderConfig{} : ProviderConfig::from_env();
        if (seed) c.provider.mock_seed = *seed;
        c.image_size = {edge, edge};
        return c;
    }

    mutable Studio studio_;
};

}  // namespace

PYBIND11_MODULE(_charforge, m) {
    m.doc() = "charforge core bindings; documents cross the boundary as JSON text";

    g_error_type = py::exception<Error>(m, "CharforgeError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const auto api = to_api_error(e);
            py::object inst = g_error_type(api.code + ": " + api.message);
            inst.attr("code") = api.code;
            inst.attr("status") = api.http_status;
            inst.attr("details") = api.details.is_null() ? std::string("null") : api.details.dump();
            PyErr_SetObject(g_error_type.ptr(), inst.ptr());
        }
    });

    m.def("validate_spec", [](const std::string& spec) { return validate_spec(spec_of(spec)).violations; });
    m.def("validate_profile", [](const std::string& profile) {
        return validate_profile(json::parse(profile).get<CharacterProfile>()).violations;
    });
    m.def("parse_profile", [](const std::string& raw) {
        auto r = parse_profile_response(raw);
        if (auto* p = std::get_if<CharacterProfile>(&r)) return dump(json(*p));
        fail(ErrorCode::ParseFailed, std::get<ParseError>(r).message);
    });
    m.def("build_image_prompt",
          [](const std::vector<std::string>& keywords, const std::string& render_style, const std::string& role_details) {
              return dump(json(build_image_prompt(KeywordSet{keywords}, render_style, role_details)));
          });
    m.def(
        "run_pipeline",
        [](const std::string& spec, std::uint64_t seed, std::uint32_t width, std::uint32_t height) {
            const auto s = spec_of(spec);
            py::gil_scoped_release release;
            auto provider = mock(seed);
            return dump(json(run_pipeline(s, *provider, TemplateCatalog::builtin(), sized(width, height))));
        },
        py::arg("spec"), py::arg("seed") = 0, py::arg("width") = 512, py::arg("height") = 512);
    m.def(
        "batch_npcs",
        [](const std::string& spec, std::size_t k, std::uint64_t seed, std::uint32_t edge) {
            const auto s = spec_of(spec);
            py::gil_scoped_release release;
            auto provider = mock(seed);
            return dump(json(batch_generate_npcs(s, k, *provider, TemplateCatalog::builtin(), sized(edge, edge))));
        },
        py::arg("spec"), py::arg("k"), py::arg("seed") = 0, py::arg("image_size") = 512);
    m.def("error_codes", [] {
        std::vector<std::pair<int, std::string>> out;
        for (auto code : kAllErrorCodes) {
            const auto [status, name] = api_status(code);
            out.emplace_back(status, std::string(name));
        }
        return out;
    });

    py::class_<PyStudio>(m, "Studio")
        .def(py::init<const std::string&, std::optional<std::uint64_t>, std::uint32_t>(), py::arg("workspace"),
             py::arg("seed") = std::optional<std::uint64_t>(0), py::arg("image_size") = 512)
        .def("create", &PyStudio::create)
        .def("session", &PyStudio::session)
        .def("regenerate", &PyStudio::regenerate)
        .def("edit", &PyStudio::edit)
        .def("select", &PyStudio::select)
        .def("character", &PyStudio::character)
        .def("id_card", &PyStudio::id_card)
        .def("chat", &PyStudio::chat)
        .def("link", &PyStudio::link)
        .def("unlink", &PyStudio::unlink)
        .def("neighbors", &PyStudio::neighbors)
        .def("export_bundle", &PyStudio::export_bundle)
        .def("import_bundle", &PyStudio::import_bundle);
}
