"""Game character design pipeline: profiles, keywords, reference images, role chat."""

import json as _json

from . import _charforge
from ._charforge import CharforgeError

__all__ = [
    "CharforgeError",
    "Studio",
    "batch_npcs",
    "build_image_prompt",
    "error_codes",
    "parse_profile",
    "run_pipeline",
    "validate_profile",
    "validate_spec",
]


def _dump(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def validate_spec(spec):
    """List of violations; empty when the spec is usable."""
    return _charforge.validate_spec(_dump(spec))


def validate_profile(profile):
    return _charforge.validate_profile(_dump(profile))


def parse_profile(raw):
    return _json.loads(_charforge.parse_profile(raw))


def build_image_prompt(keywords, render_style, role_details):
    return _json.loads(_charforge.build_image_prompt(list(keywords), render_style, role_details))


def run_pipeline(spec, seed=0, width=512, height=512):
    """One full mock-provider run. Image media comes back base64 encoded."""
    return _json.loads(_charforge.run_pipeline(_dump(spec), seed, width, height))


def batch_npcs(spec, k, seed=0, image_size=512):
    return _json.loads(_charforge.batch_npcs(_dump(spec), k, seed, image_size))


def error_codes():
    return _charforge.error_codes()


class Studio:
    """Sessions, characters, chats and graphs stored in a workspace directory.

    seed=None uses the provider configured by the environment.
    """

    def __init__(self, workspace, seed=0, image_size=512):
        self._s = _charforge.Studio(str(workspace), seed, image_size)

    def create(self, spec):
        return _json.loads(self._s.create(_dump(spec)))

    def session(self, session_id):
        return _json.loads(self._s.session(session_id))

    def regenerate(self, session_id, layer):
        return _json.loads(self._s.regenerate(session_id, layer))

    def edit(self, session_id, path, value):
        return _json.loads(self._s.edit(session_id, path, _json.dumps(value)))

    def select(self, session_id, image_id):
        return _json.loads(self._s.select(session_id, image_id))

    def character(self, character_id):
        return _json.loads(self._s.character(character_id))

    def id_card(self, character_id):
        return _json.loads(self._s.id_card(character_id))

    def chat(self, character_id, message):
        return _json.loads(self._s.chat(character_id, message))

    def link(self, graph_id, source, target, label):
        return _json.loads(self._s.link(graph_id, source, target, label))

    def unlink(self, graph_id, source, target):
        return _json.loads(self._s.unlink(graph_id, source, target))

    def neighbors(self, graph_id, character_id):
        return _json.loads(self._s.neighbors(graph_id, character_id))

    def export_bundle(self, character_id):
        return self._s.export_bundle(character_id)

    def import_bundle(self, data):
        return self._s.import_bundle(bytes(data))
