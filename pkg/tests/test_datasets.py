"""Dataset ingestion: IDX parsing, tables, text corpora, spike surrogate."""

import gzip
import struct

import numpy as np
import pytest

from conformal_hdc.datasets import (
    DatasetError,
    SpikeSurrogateConfig,
    generate_spike_surrogate,
    ingest_isolet,
    ingest_languages,
    ingest_mnist,
)


def write_idx_pair(tmp_path, images, labels, gz=False, declared_count=None):
    """Write a (n, rows, cols) uint8 stack and labels in IDX layout."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    img_bytes = struct.pack(">IIII", 0x00000803, declared_count or n, rows, cols)
    img_bytes += images.tobytes()
    lbl_bytes = struct.pack(">II", 0x00000801, declared_count or len(labels))
    lbl_bytes += labels.tobytes()
    suffix = ".gz" if gz else ""
    img_path = tmp_path / f"images-idx3-ubyte{suffix}"
    lbl_path = tmp_path / f"labels-idx1-ubyte{suffix}"
    img_path.write_bytes(gzip.compress(img_bytes) if gz else img_bytes)
    lbl_path.write_bytes(gzip.compress(lbl_bytes) if gz else lbl_bytes)
    return img_path, lbl_path


class TestMnistIngestion:
    def test_threshold_and_shapes(self, tmp_path):
        images = np.zeros((3, 4, 4), dtype=np.uint8)
        images[1, 0, 0] = 128   # 128/255 > 0.5 -> active
        images[1, 0, 1] = 127   # 127/255 < 0.5 -> inactive
        images[2] = 255
        img, lbl = write_idx_pair(tmp_path, images, [7, 1, 2])
        bundle = ingest_mnist(img, lbl)
        assert bundle.features.shape == (3, 16)
        assert bundle.features[0].sum() == 0
        assert bundle.features[1, 0] == 1 and bundle.features[1, 1] == 0
        assert bundle.features[2].sum() == 16
        assert bundle.labels.tolist() == [7, 1, 2]
        assert bundle.label_names[7] == "7"

    def test_gzip_transparent(self, tmp_path):
        images = np.full((2, 2, 2), 200, dtype=np.uint8)
        img, lbl = write_idx_pair(tmp_path, images, [0, 1], gz=True)
        bundle = ingest_mnist(img, lbl)
        assert bundle.features.sum() == 8

    def test_bad_magic_rejected(self, tmp_path):
        img, lbl = write_idx_pair(tmp_path, np.zeros((1, 2, 2), dtype=np.uint8), [0])
        broken = tmp_path / "broken"
        broken.write_bytes(b"\x00\x00\x08\x04" + img.read_bytes()[4:])
        with pytest.raises(DatasetError, match="magic"):
            ingest_mnist(broken, lbl)

    def test_declared_count_mismatch_rejected(self, tmp_path):
        img, lbl = write_idx_pair(
            tmp_path, np.zeros((2, 2, 2), dtype=np.uint8), [0, 1], declared_count=3
        )
        with pytest.raises(DatasetError, match="declares"):
            ingest_mnist(img, lbl)

    def test_image_label_count_mismatch_rejected(self, tmp_path):
        img, _ = write_idx_pair(tmp_path, np.zeros((2, 2, 2), dtype=np.uint8), [0, 1])
        _, lbl = write_idx_pair(tmp_path / "..", np.zeros((3, 2, 2), dtype=np.uint8), [0, 1, 2])
        with pytest.raises(DatasetError, match="mismatch"):
            ingest_mnist(img, lbl)

    def test_truncated_rejected(self, tmp_path):
        img, lbl = write_idx_pair(tmp_path, np.zeros((1, 2, 2), dtype=np.uint8), [0])
        short = tmp_path / "short"
        short.write_bytes(img.read_bytes()[:10])
        with pytest.raises(DatasetError):
            ingest_mnist(short, lbl)

    def test_provenance_checksums_present(self, tmp_path):
        img, lbl = write_idx_pair(tmp_path, np.zeros((1, 2, 2), dtype=np.uint8), [3])
        bundle = ingest_mnist(img, lbl)
        assert len(bundle.provenance["images_sha256"]) == 64


def isolet_row(label, value=0.5):
    return ", ".join([f"{value:.4f}"] * 617 + [f"{label}."])


class TestIsoletIngestion:
    def test_accepts_617_features_plus_label(self, tmp_path):
        path = tmp_path / "isolet.data"
        path.write_text("\n".join([isolet_row(1), isolet_row(26), isolet_row(2)]))
        bundle = ingest_isolet(path)
        assert bundle.features.shape == (3, 617)
        assert bundle.labels.tolist() == [0, 25, 1]
        assert bundle.label_names[0] == "A" and bundle.label_names[25] == "Z"

    def test_wrong_column_count_names_row(self, tmp_path):
        path = tmp_path / "isolet.data"
        path.write_text(isolet_row(1) + "\n" + ", ".join(["0.1"] * 616 + ["2."]))
        with pytest.raises(DatasetError, match="row 2"):
            ingest_isolet(path)

    def test_unparseable_value_names_row(self, tmp_path):
        path = tmp_path / "isolet.data"
        bad = isolet_row(1).replace("0.5000", "oops", 1)
        path.write_text(bad)
        with pytest.raises(DatasetError, match="row 1"):
            ingest_isolet(path)

    def test_label_outside_range_rejected(self, tmp_path):
        path = tmp_path / "isolet.data"
        path.write_text(isolet_row(27))
        with pytest.raises(DatasetError, match="label"):
            ingest_isolet(path)


class TestLanguagesIngestion:
    def test_per_language_files(self, tmp_path):
        (tmp_path / "english.txt").write_text("Hello  World\nSecond   line here\n")
        (tmp_path / "french.txt").write_text("Bonjour le monde\n")
        bundle = ingest_languages(tmp_path)
        assert bundle.label_names == ["english", "french"]
        assert "hello world" in bundle.features.tolist()
        assert bundle.labels.tolist() == [0, 0, 1]

    def test_per_language_directories(self, tmp_path):
        (tmp_path / "german").mkdir()
        (tmp_path / "german" / "a.txt").write_text("guten tag\n")
        (tmp_path / "italian").mkdir()
        (tmp_path / "italian" / "b.txt").write_text("buongiorno\n")
        bundle = ingest_languages(tmp_path)
        assert bundle.label_names == ["german", "italian"]

    def test_long_lines_truncated(self, tmp_path):
        (tmp_path / "x.txt").write_text("a" * 500 + "\n" + "bb cc\n")
        bundle = ingest_languages(tmp_path)
        assert max(len(t) for t in bundle.features) == 128

    def test_empty_language_rejected(self, tmp_path):
        (tmp_path / "greek.txt").write_text("   \n\n")
        with pytest.raises(DatasetError, match="greek"):
            ingest_languages(tmp_path)

    def test_empty_directory_rejected(self, tmp_path):
        with pytest.raises(DatasetError):
            ingest_languages(tmp_path)


class TestSpikeSurrogate:
    def test_default_bin_count_is_eight(self):
        bundle = generate_spike_surrogate(SpikeSurrogateConfig(n_per_class=3, n_ood=2, seed=0))
        assert bundle.features.shape[2] == 8

    def test_zero_rate_profile_gives_all_zero_matrices(self):
        cfg = SpikeSurrogateConfig(
            n_classes=1, n_neurons=4, n_bins=8, n_per_class=5, n_ood=1,
            rate_profiles=np.zeros((1, 4, 8)), seed=1,
        )
        bundle = generate_spike_surrogate(cfg)
        odor = bundle.features[bundle.labels == 0]
        assert odor.sum() == 0

    def test_negative_rates_rejected(self):
        cfg = SpikeSurrogateConfig(
            n_classes=1, n_neurons=2, n_bins=2, n_per_class=1, n_ood=1,
            rate_profiles=np.full((1, 2, 2), -1.0),
        )
        with pytest.raises(ValueError, match="nonnegative"):
            generate_spike_surrogate(cfg)

    def test_run_state_is_last_label(self):
        bundle = generate_spike_surrogate(SpikeSurrogateConfig(n_per_class=2, n_ood=2, seed=2))
        assert bundle.label_names[-1] == "run"
        assert (bundle.labels == 4).sum() == 2

    def test_deterministic(self):
        cfg = SpikeSurrogateConfig(n_per_class=4, n_ood=2, seed=9)
        a = generate_spike_surrogate(cfg)
        b = generate_spike_surrogate(cfg)
        np.testing.assert_array_equal(a.features, b.features)
