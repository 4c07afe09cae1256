import pytest

from archseek.critic import ReplayVlmClient
from archseek.errors import ConfigurationError, InputError
from archseek.index import CaseDatabase
from archseek.ingest import IngestOptions, ingest, ingest_to_path, sniff_media_type
from archseek.model import Aspect, MediaKind
from conftest import make_png, write_case_folder, write_replay_fixture


PNG_A = make_png((10, 20, 30))
PNG_B = make_png((200, 100, 0))

ANALYSES_A = {
    "form": ["A cantilevered roof floats over the entry.", "The massing steps down the hill."],
    "style": ["Quiet modernism with regional accents."],
}
ANALYSES_B = {
    "material usage": ["Board-marked concrete and weathered steel."],
}
NOTES_TEXT = "The building opened in 2014. Its courtyard holds a single oak."
ANALYSES_NOTES = {
    "relations to the surrounding context": ["The courtyard ties the halls to the street."],
}


def corpus_with_fixtures(tmp_path):
    root = tmp_path / "cases"
    fixtures = tmp_path / "fixtures"
    write_case_folder(
        root,
        "alpha",
        case_id=1,
        description="A glass hall above the river. It glows at night.",
        images={"front.png": (PNG_A, "glass hall river")},
    )
    write_case_folder(
        root,
        "beta",
        case_id=2,
        description="Stone galleries under a green roof.",
        images={"aerial.png": (PNG_B, None)},
        texts={"notes.txt": NOTES_TEXT},
    )
    write_replay_fixture(fixtures, PNG_A, ANALYSES_A)
    write_replay_fixture(fixtures, PNG_B, ANALYSES_B)
    write_replay_fixture(fixtures, NOTES_TEXT.encode("utf-8"), ANALYSES_NOTES)
    return root, fixtures


class TestSniff:
    def test_png_and_jpeg_detected(self):
        assert sniff_media_type(PNG_A) == "png"
        assert sniff_media_type(b"\xff\xd8\xff\xe0rest") == "jpeg"
        assert sniff_media_type(b"GIF89a") is None


class TestIngest:
    def test_two_case_corpus_counts(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        db = ingest(root, gateway, ReplayVlmClient(fixtures))
        assert len(db) == 2
        assert db.ingest_report.ok

        case1 = db.case(1)
        # 2 description chunks? description fits one chunk; 3 critique sentences
        critique_entries = [e for e in case1.entries if e.aspect is not Aspect.ORIGINAL_TEXT]
        chunk_entries = [e for e in case1.entries if e.aspect is Aspect.ORIGINAL_TEXT]
        assert len(critique_entries) == 3
        assert len(chunk_entries) == 1
        assert set(case1.image_embeddings) == {"front.png"}

        case2 = db.case(2)
        # critique of aerial.png (1) + critique of notes.txt (1)
        assert len([e for e in case2.entries if e.aspect is not Aspect.ORIGINAL_TEXT]) == 2
        # chunks: description (1) + notes.txt contents (1)
        origins = {e.origin for e in case2.entries if e.aspect is Aspect.ORIGINAL_TEXT}
        assert origins == {"description", "notes.txt"}

    def test_every_entry_gets_both_embeddings(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        db = ingest(root, gateway, ReplayVlmClient(fixtures))
        for case in db.cases:
            for entry in case.entries:
                assert entry.text_embedding is not None
                assert entry.crossmodal_embedding is not None

    def test_caption_sidecar_feeds_image_embedding(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        db = ingest(root, gateway, ReplayVlmClient(fixtures))
        from archseek.model import Space

        expected = gateway.embed_text(Space.CROSSMODAL, "glass hall river")
        assert db.case(1).image_embeddings["front.png"] == expected

    def test_empty_root_is_fatal(self, gateway, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(InputError):
            ingest(tmp_path / "empty", gateway, vlm=object())

    def test_missing_vlm_is_fatal(self, gateway, tmp_path):
        root, _ = corpus_with_fixtures(tmp_path)
        with pytest.raises(ConfigurationError):
            ingest(root, gateway, vlm=None)

    def test_missing_fixture_is_recorded_not_fatal(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        extra = make_png((1, 2, 3))
        write_case_folder(
            root, "gamma", case_id=3, description="A barn.", images={"x.png": (extra, None)}
        )
        db = ingest(root, gateway, ReplayVlmClient(fixtures))
        assert len(db) == 3
        assert not db.ingest_report.ok
        assert any("gamma" in where for where, _ in db.ingest_report.failures)
        # the failed asset contributes no critique entries, chunks remain
        assert all(e.aspect is Aspect.ORIGINAL_TEXT for e in db.case(3).entries)

    def test_bad_case_json_skipped_and_recorded(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        bad = root / "broken"
        bad.mkdir()
        (bad / "case.json").write_text("{not json", encoding="utf-8")
        db = ingest(root, gateway, ReplayVlmClient(fixtures))
        assert len(db) == 2
        assert any(where == "broken" for where, _ in db.ingest_report.failures)

    def test_duplicate_case_ids_fatal(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        write_case_folder(root, "dupe", case_id=1, description="Copy.")
        with pytest.raises(InputError):
            ingest(root, gateway, ReplayVlmClient(fixtures))

    def test_non_image_content_recorded(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        write_case_folder(
            root,
            "delta",
            case_id=4,
            description="A tower.",
            images={"fake.png": (b"GIF89a not a png", None)},
        )
        db = ingest(root, gateway, ReplayVlmClient(fixtures))
        assert any("not png or jpeg" in why for _, why in db.ingest_report.failures)
        assert db.case(4).assets == ()

    def test_parallel_jobs_merge_in_asset_order(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        serial = ingest(root, gateway, ReplayVlmClient(fixtures), IngestOptions(jobs=1))
        parallel = ingest(root, gateway, ReplayVlmClient(fixtures), IngestOptions(jobs=4))
        assert serial.cases == parallel.cases

    def test_text_asset_critique_can_be_disabled(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        options = IngestOptions(critique_text_assets=False)
        db = ingest(root, gateway, ReplayVlmClient(fixtures), options)
        case2 = db.case(2)
        critique_origins = {
            e.origin for e in case2.entries if e.aspect is not Aspect.ORIGINAL_TEXT
        }
        assert critique_origins == {"aerial.png"}  # notes.txt only chunked
        chunk_origins = {e.origin for e in case2.entries if e.aspect is Aspect.ORIGINAL_TEXT}
        assert "notes.txt" in chunk_origins


class TestIngestToPath:
    def test_replay_ingest_twice_is_byte_identical(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        vlm = ReplayVlmClient(fixtures)
        ingest_to_path(root, tmp_path / "db1", gateway, vlm)
        ingest_to_path(root, tmp_path / "db2", gateway, vlm)
        for name in ("manifest.json", "cases.jsonl"):
            assert (tmp_path / "db1" / name).read_bytes() == (tmp_path / "db2" / name).read_bytes()

    def test_reingest_with_different_manifest_refused(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        vlm = ReplayVlmClient(fixtures)
        ingest_to_path(root, tmp_path / "db", gateway, vlm)
        with pytest.raises(ConfigurationError):
            ingest_to_path(
                root, tmp_path / "db", gateway, vlm, IngestOptions(chunk_chars=100)
            )

    def test_loaded_database_equals_ingested(self, gateway, tmp_path):
        root, fixtures = corpus_with_fixtures(tmp_path)
        db = ingest_to_path(root, tmp_path / "db", gateway, ReplayVlmClient(fixtures))
        loaded = CaseDatabase.load(tmp_path / "db")
        assert loaded.cases == db.cases
        assert loaded.check() == []
