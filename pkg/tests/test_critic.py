import json
import random
import re

import pytest

from archseek.critic import (
    CritiquePrompt,
    ReplayVlmClient,
    chunk_description,
    critique_media,
    parse_critique_reply,
    response_to_entries,
    split_sentences,
)
from archseek.errors import AugmentationError, ConfigurationError
from archseek.model import Aspect

# shaped like a real model reply: wrapper object, mixed-case keys untouched
CRITIC_REPLY = json.dumps(
    {
        "analysis": {
            "form": [
                "The space is defined by clean, rectilinear forms creating a minimalist courtyard.",
                "A large sculpture commands the center, providing a focal point that contrasts with the linearity of the surroundings.",
            ],
            "style": [],
            "material usage": ["Exposed concrete dominates the palette."],
            "relations to the surrounding context": [
                "The courtyard appears well integrated with greenery that softens its edges, offering a connection to nature.",
            ],
            "general design highlights": [
                "A prominent sculpture acts as a centerpiece, making the space not only a physical but also a cultural destination.",
            ],
        }
    }
)


class TestPrompt:
    def test_default_template_carries_all_seven_aspects(self):
        prompt = CritiquePrompt()
        for key in prompt.aspect_keys:
            assert key in prompt.template
        assert len(prompt.aspect_keys) == 7

    def test_template_without_schema_block_rejected(self):
        with pytest.raises(ConfigurationError):
            CritiquePrompt(template="Cover: " + ", ".join(CritiquePrompt().aspect_keys))


class TestParseCritiqueReply:
    def test_plain_json_reply(self):
        resp = parse_critique_reply(CRITIC_REPLY)
        assert (
            resp.sentences[Aspect.FORM][0]
            == "The space is defined by clean, rectilinear forms creating a minimalist courtyard."
        )
        assert resp.sentences[Aspect.STYLE] == ()
        assert resp.sentences[Aspect.MATERIAL_USAGE] == ("Exposed concrete dominates the palette.",)

    def test_empty_aspect_list_yields_no_sentences(self):
        resp = parse_critique_reply('{"analysis": {"style": []}}')
        assert resp.sentences[Aspect.STYLE] == ()
        assert resp.is_empty()

    def test_markdown_fenced_reply_is_repaired(self):
        fenced = "Sure! Here is the analysis:\n```json\n" + CRITIC_REPLY + "\n```\nHope it helps."
        assert parse_critique_reply(fenced) == parse_critique_reply(CRITIC_REPLY)

    def test_leading_prose_trimmed_to_braces(self):
        noisy = "The analysis follows. " + CRITIC_REPLY
        assert parse_critique_reply(noisy) == parse_critique_reply(CRITIC_REPLY)

    def test_unparseable_reply_raises(self):
        with pytest.raises(AugmentationError):
            parse_critique_reply("I could not analyze this image, sorry.")

    def test_unknown_aspect_dropped_with_warning(self):
        resp = parse_critique_reply('{"form": ["A line."], "color theory": ["Blue."]}')
        assert resp.sentences[Aspect.FORM] == ("A line.",)
        assert any("color theory" in w for w in resp.warnings)

    def test_bare_aspect_map_accepted(self):
        resp = parse_critique_reply('{"style": ["Brutalist massing."]}')
        assert resp.sentences[Aspect.STYLE] == ("Brutalist massing.",)

    def test_blank_and_duplicate_sentences_collapse(self):
        resp = parse_critique_reply('{"form": ["A.", "  ", "A.", "B."]}')
        assert resp.sentences[Aspect.FORM] == ("A.", "B.")


class TestResponseToEntries:
    def test_one_entry_per_sentence(self):
        resp = parse_critique_reply(CRITIC_REPLY)
        entries = response_to_entries(resp, case_id=4, origin="front.png")
        assert len(entries) == resp.total_sentences() == 5
        assert {e.aspect for e in entries} == {
            Aspect.FORM,
            Aspect.MATERIAL_USAGE,
            Aspect.CONTEXT_RELATIONS,
            Aspect.GENERAL_HIGHLIGHTS,
        }
        assert all(e.case_id == 4 and e.origin == "front.png" for e in entries)
        assert all(e.text_embedding is None for e in entries)

    def test_all_empty_response_yields_nothing(self):
        resp = parse_critique_reply('{"form": []}')
        assert response_to_entries(resp, 1, "x") == []

    def test_entry_ids_unique_and_deterministic(self):
        resp = parse_critique_reply(CRITIC_REPLY)
        a = response_to_entries(resp, 4, "front.png")
        b = response_to_entries(resp, 4, "front.png")
        assert [e.entry_id for e in a] == [e.entry_id for e in b]
        assert len({e.entry_id for e in a}) == len(a)


class TestReplayClient:
    def test_replay_round_trip(self, tmp_path):
        from conftest import write_replay_fixture

        data = b"imagebytes"
        write_replay_fixture(tmp_path, data, {"form": ["A high roof."]})
        client = ReplayVlmClient(tmp_path)
        resp = critique_media(client, data, "png")
        assert resp.sentences[Aspect.FORM] == ("A high roof.",)

    def test_missing_fixture_is_per_asset_error(self, tmp_path):
        client = ReplayVlmClient(tmp_path)
        with pytest.raises(AugmentationError):
            client.critique("prompt", b"unknown", "png")

    def test_missing_dir_is_config_error(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ReplayVlmClient(tmp_path / "nope")


class TestChunkDescription:
    def test_empty_input_gives_empty_list(self):
        assert chunk_description("") == []
        assert chunk_description("   \n  ") == []

    def test_single_short_sentence_is_its_own_chunk(self):
        text = "A quiet gallery wrapped in perforated brick sits by the canal."
        assert chunk_description(text) == [text]

    def test_three_300_char_sentences_stay_separate(self):
        sentences = [("word " * 59).strip() + "." for _ in range(3)]
        for s in sentences:
            assert len(s) == 295
        text = " ".join(sentences)
        assert chunk_description(text, max_chars=500) == sentences

    def test_short_sentences_pack_together(self):
        text = "One. Two. Three."
        assert chunk_description(text, max_chars=500) == [text]

    def test_oversized_sentence_never_split(self):
        long_sentence = "x" * 900 + "."
        chunks = chunk_description(long_sentence + " Short tail.", max_chars=500)
        assert chunks[0] == long_sentence
        assert chunks[1] == "Short tail."

    def test_budget_respected_for_random_texts(self):
        rng = random.Random(13)
        words = ["atrium", "brick", "light", "void", "garden", "steel", "axis"]
        for _ in range(50):
            n_sentences = rng.randint(1, 12)
            text = " ".join(
                " ".join(rng.choices(words, k=rng.randint(1, 30))).capitalize() + "."
                for _ in range(n_sentences)
            )
            chunks = chunk_description(text, max_chars=120)
            sentences = split_sentences(text)
            for chunk in chunks:
                assert len(chunk) <= 120 or chunk in sentences

    def test_concatenation_reproduces_input_modulo_whitespace(self):
        text = "First claim.  Second claim!\nThird claim?   Fourth one."
        chunks = chunk_description(text, max_chars=30)
        normalize = lambda s: re.sub(r"\s+", " ", s).strip()
        assert normalize(" ".join(chunks)) == normalize(text)
