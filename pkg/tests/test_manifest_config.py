import pytest

from strkit.config import build_backends, load_config
from strkit.core import Sample
from strkit.errors import ConfigError, DataError, FormatError
from strkit.manifest import (
    ground_truth_from_manifest,
    load_ground_truth,
    load_manifest,
    load_predictions,
    save_manifest,
    save_predictions,
)
from strkit.recognize import PrototypeBackend, RecordedBackend
from strkit.router import Route


class TestManifest:
    def test_round_trip(self, tmp_path):
        samples = [
            Sample("s1", str(tmp_path / "a.pgm"), "cat"),
            Sample("s2", str(tmp_path / "b.pgm"), None),
        ]
        path = tmp_path / "manifest.tsv"
        save_manifest(samples, path)
        back = load_manifest(path)
        assert [(s.id, s.image_path, s.transcription) for s in back] == \
            [(s.id, s.image_path, s.transcription) for s in samples]

    def test_paths_resolve_against_manifest_dir(self, tmp_path):
        sub = tmp_path / "data"
        sub.mkdir()
        (sub / "manifest.tsv").write_text("s1\timg/a.pgm\tcat\n")
        rows = load_manifest(sub / "manifest.tsv")
        assert rows[0].image_path == str(sub / "img" / "a.pgm")

    def test_absolute_paths_kept(self, tmp_path):
        (tmp_path / "manifest.tsv").write_text("s1\t/elsewhere/a.pgm\n")
        rows = load_manifest(tmp_path / "manifest.tsv")
        assert rows[0].image_path == "/elsewhere/a.pgm"

    def test_two_column_rows_have_no_transcription(self, tmp_path):
        (tmp_path / "manifest.tsv").write_text("s1\ta.pgm\n")
        rows = load_manifest(tmp_path / "manifest.tsv")
        assert rows[0].transcription is None

    def test_duplicate_id_is_data_error(self, tmp_path):
        (tmp_path / "m.tsv").write_text("s1\ta.pgm\ns1\tb.pgm\n")
        with pytest.raises(DataError):
            load_manifest(tmp_path / "m.tsv")

    def test_empty_id_rejected(self, tmp_path):
        (tmp_path / "m.tsv").write_text("\ta.pgm\n")
        with pytest.raises(FormatError):
            load_manifest(tmp_path / "m.tsv")

    def test_column_count_enforced(self, tmp_path):
        (tmp_path / "m.tsv").write_text("s1\ta.pgm\tcat\textra\n")
        with pytest.raises(FormatError, match=":1"):
            load_manifest(tmp_path / "m.tsv")

    def test_blank_lines_skipped(self, tmp_path):
        (tmp_path / "m.tsv").write_text("\ns1\ta.pgm\n\n")
        assert len(load_manifest(tmp_path / "m.tsv")) == 1

    def test_save_rejects_embedded_tabs(self, tmp_path):
        samples = [Sample("s1", str(tmp_path / "a.pgm"), "with\ttab")]
        with pytest.raises(FormatError):
            save_manifest(samples, tmp_path / "m.tsv")


class TestGroundTruthAndPredictions:
    def test_ground_truth_roundtrip(self, tmp_path):
        (tmp_path / "gts.tsv").write_text("s1\tcat\ns2\tdog\n")
        assert load_ground_truth(tmp_path / "gts.tsv") == {"s1": "cat", "s2": "dog"}

    def test_ground_truth_from_manifest(self, tmp_path):
        (tmp_path / "m.tsv").write_text("s1\ta.pgm\tcat\n")
        assert ground_truth_from_manifest(tmp_path / "m.tsv") == {"s1": "cat"}

    def test_unlabeled_manifest_cannot_be_ground_truth(self, tmp_path):
        (tmp_path / "m.tsv").write_text("s1\ta.pgm\n")
        with pytest.raises(FormatError):
            ground_truth_from_manifest(tmp_path / "m.tsv")

    def test_predictions_round_trip(self, tmp_path):
        path = tmp_path / "preds.tsv"
        save_predictions([("s1", "cat", 0.5), ("s2", "", 1.0)], path)
        assert path.read_text() == "s1\tcat\t0.500000\ns2\t\t1.000000\n"
        back = load_predictions(path)
        assert back == {"s1": ("cat", 0.5), "s2": ("", 1.0)}

    def test_prediction_bad_confidence(self, tmp_path):
        (tmp_path / "p.tsv").write_text("s1\tcat\tmaybe\n")
        with pytest.raises(FormatError):
            load_predictions(tmp_path / "p.tsv")

    def test_prediction_duplicate_id(self, tmp_path):
        (tmp_path / "p.tsv").write_text("s1\tcat\t1.0\ns1\tdog\t1.0\n")
        with pytest.raises(DataError):
            load_predictions(tmp_path / "p.tsv")


class TestConfig:
    def test_defaults_without_file(self):
        cfg = load_config()
        assert cfg.seed == 0
        assert cfg.alphabet.size == 63
        assert cfg.router.long_threshold == 9.0
        assert cfg.synth is None
        assert [s.name for s in cfg.backends] == ["baseline", "long", "vertical"]

    def test_missing_file_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.yaml")

    def test_unknown_top_level_key(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("sede: 3\n")
        with pytest.raises(ConfigError, match="sede"):
            load_config(path)

    def test_sections_parse(self, tmp_path, lexfile):
        path = tmp_path / "c.yaml"
        path.write_text(
            "seed: 7\n"
            "alphabet: abc\n"
            "normalizer: {case_fold: false}\n"
            "router: {long_threshold: 4.0}\n"
            "augment: {p_noise: 1.0, noise_sigma: [0, 5]}\n"
            f"synth: {{lexicon_path: {lexfile}, count: 10}}\n"
        )
        cfg = load_config(path)
        assert cfg.seed == 7
        assert cfg.alphabet.printable == ("a", "b", "c")
        assert cfg.normalizer.case_fold is False
        assert cfg.router.long_threshold == 4.0
        assert cfg.augment.p_noise == 1.0
        assert cfg.synth.count == 10
        assert cfg.synth.seed == 7  # inherits the global seed

    def test_set_override_typed_values(self, tmp_path):
        cfg = load_config(None, overrides=["router.long_threshold=5.5", "seed=3"])
        assert cfg.router.long_threshold == 5.5
        assert cfg.seed == 3

    def test_seed_flag_beats_config_and_synth(self, tmp_path, lexfile):
        path = tmp_path / "c.yaml"
        path.write_text(f"seed: 7\nsynth: {{lexicon_path: {lexfile}, seed: 9}}\n")
        cfg = load_config(path, seed_override=42)
        assert cfg.seed == 42
        assert cfg.synth.seed == 42

    def test_explicit_synth_seed_wins_without_flag(self, tmp_path, lexfile):
        path = tmp_path / "c.yaml"
        path.write_text(f"seed: 7\nsynth: {{lexicon_path: {lexfile}, seed: 9}}\n")
        assert load_config(path).synth.seed == 9

    def test_synth_augment_bakes_policy(self, tmp_path, lexfile):
        path = tmp_path / "c.yaml"
        path.write_text(
            "augment: {p_noise: 0.25}\n"
            f"synth: {{lexicon_path: {lexfile}, augment: true}}\n"
        )
        cfg = load_config(path)
        assert cfg.synth.augment is not None
        assert cfg.synth.augment.p_noise == 0.25

    def test_synth_without_augment_flag_stays_clean(self, tmp_path, lexfile):
        path = tmp_path / "c.yaml"
        path.write_text(f"synth: {{lexicon_path: {lexfile}}}\n")
        assert load_config(path).synth.augment is None

    def test_missing_lexicon_rejected(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("synth: {lexicon_path: /no/such/file.txt}\n")
        with pytest.raises(ConfigError, match="lexicon"):
            load_config(path)

    def test_unknown_section_key_rejected(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("router: {long_treshold: 4.0}\n")
        with pytest.raises(ConfigError, match="long_treshold"):
            load_config(path)

    def test_backend_names_must_be_unique(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(
            "backends:\n"
            "  - {name: one, type: prototype, routes: [Baseline]}\n"
            "  - {name: one, type: prototype, routes: [Long]}\n"
        )
        with pytest.raises(ConfigError, match="unique"):
            load_config(path)

    def test_backend_unknown_route_rejected(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("backends:\n  - {name: b, type: prototype, routes: [Wide]}\n")
        with pytest.raises(ConfigError, match="Wide"):
            load_config(path)

    def test_recorded_backend_requires_existing_file(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(
            "backends:\n"
            "  - {name: rec, type: recorded, routes: [Baseline], path: /missing.tsv}\n"
        )
        with pytest.raises(ConfigError, match="not found"):
            load_config(path)

    def test_list_index_override(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(
            "backends:\n  - {name: b, type: prototype, routes: [Baseline]}\n")
        cfg = load_config(path, overrides=["backends.0.name=renamed"])
        assert cfg.backends[0].name == "renamed"

    def test_bad_override_shapes(self):
        with pytest.raises(ConfigError):
            load_config(None, overrides=["no_equals_sign"])
        with pytest.raises(ConfigError):
            load_config(None, overrides=["a..b=1"])


class TestBuildBackends:
    def test_default_backends_by_route(self):
        cfg = load_config()
        by_route = build_backends(cfg)
        assert [b.name for b in by_route[Route.BASELINE]] == ["baseline"]
        assert [b.name for b in by_route[Route.LONG]] == ["long"]
        assert [b.name for b in by_route[Route.VERTICAL]] == ["vertical"]
        assert isinstance(by_route[Route.BASELINE][0], PrototypeBackend)
        assert by_route[Route.VERTICAL][0].flip_search is True
        assert by_route[Route.BASELINE][0].flip_search is False

    def test_prototype_params_forwarded(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(
            "backends:\n"
            "  - {name: b, type: prototype, routes: [Baseline, Long],\n"
            "     distance_scale: 30, temperatures: [1.0, 2.0]}\n"
        )
        by_route = build_backends(load_config(path))
        backend = by_route[Route.BASELINE][0]
        assert backend.distance_scale == 30
        assert backend.temperatures == (1.0, 2.0)
        assert by_route[Route.LONG][0] is backend
        assert by_route[Route.VERTICAL] == []

    def test_unknown_prototype_param_rejected(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(
            "backends:\n  - {name: b, type: prototype, routes: [Baseline], beam: 3}\n")
        with pytest.raises(ConfigError):
            build_backends(load_config(path))

    def test_recorded_backend_built(self, tmp_path):
        rec = tmp_path / "rec.tsv"
        rec.write_text("s1\t1\t1\t2\t1 0\n")
        path = tmp_path / "c.yaml"
        path.write_text(
            "backends:\n"
            f"  - {{name: rec, type: recorded, routes: [Baseline], path: {rec}}}\n"
        )
        by_route = build_backends(load_config(path))
        assert isinstance(by_route[Route.BASELINE][0], RecordedBackend)


@pytest.fixture()
def lexfile(tmp_path):
    path = tmp_path / "words.txt"
    path.write_text("cat\ndog\nhouse\nlonghandedness\n")
    return path
