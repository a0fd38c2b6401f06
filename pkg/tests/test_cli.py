import json
import struct
from pathlib import Path

import numpy as np
import pytest

from minsyn.checkpoint import load_checkpoint, restore_model, save_checkpoint
from minsyn.cli import main
from minsyn.gaussian import GaussianSystem, gk_synergy
from minsyn.idx import labels_tensor, write_idx, write_idx_file, images_tensor
from minsyn.nn import build_autoencoder
from minsyn.words import builtin_glyph


def write_config(path: Path, doc: dict) -> Path:
    p = path / f"{doc['name']}.json"
    p.write_text(json.dumps(doc, indent=2))
    return p


def digits_config(tmp_path, name="run", decoder_kind="minsyn_binary", epochs=2,
                  lr=0.005, **extra_training):
    return {
        "name": name,
        "dataset": {"kind": "synthetic_digits", "train": 32, "test": 8, "seed": 0},
        "model": {"kind": "autoencoder", "latents": 6,
                  "encoder": [{"units": 6, "activation": "sigmoid"}],
                  "decoder_kind": decoder_kind},
        "training": {"epochs": epochs, "batch_size": 8, "lr": lr, "seed": 1,
                     **extra_training},
        "output_dir": str(tmp_path / name),
    }


class TestDatasetBuild:
    def test_counts_printed_and_manifest(self, word_data_dir, capsys):
        manifest = json.loads((word_data_dir / "manifest.json").read_text())
        counts = manifest["counts"]
        assert counts["train"] + counts["test"] == 512
        assert len(manifest["train_words"]) == counts["train"]
        assert manifest["glyph_source"] == "builtin"

    def test_rerun_byte_identical(self, word_data_dir, tmp_path):
        out2 = tmp_path / "again"
        assert main(["dataset-build", "--out-dir", str(out2), "--glyphs", "builtin"]) == 0
        for name in ("train_images.idx", "test_images.idx", "train_labels.idx",
                     "test_labels.idx", "manifest.json"):
            assert (word_data_dir / name).read_bytes() == (out2 / name).read_bytes()

    def test_missing_emnist_dir_exits_2(self, tmp_path, capsys):
        out = tmp_path / "w"
        code = main(["dataset-build", "--out-dir", str(out),
                     "--emnist-dir", str(tmp_path / "nope")])
        assert code == 2
        assert not out.exists()  # no partial output

    def test_emnist_glyphs_loaded_and_transposed(self, tmp_path):
        # fake handwritten-letters pair: one stored sample per letter, saved
        # transposed the way the source files are
        emnist = tmp_path / "emnist"
        emnist.mkdir()
        images, labels = [], []
        for code in range(1, 27):
            glyph = builtin_glyph(chr(ord("a") + code - 1))
            images.append(glyph.T.ravel())
            labels.append(code)
        write_idx_file(emnist / "emnist-letters-train-images-idx3-ubyte",
                       images_tensor(np.array(images)))
        write_idx_file(emnist / "emnist-letters-train-labels-idx1-ubyte",
                       labels_tensor_ubyte(np.array(labels)))
        out = tmp_path / "words"
        assert main(["dataset-build", "--out-dir", str(out),
                     "--emnist-dir", str(emnist)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["glyph_source"] == "emnist"
        assert set(manifest["glyph_indices"]) == {
            c for g in manifest["letters_by_position"] for c in g}


def labels_tensor_ubyte(labels):
    from minsyn.idx import IdxTensor
    return IdxTensor(dims=(labels.size,), data=labels / 255.0)


class TestTrain:
    def test_lr_zero_checkpoint_equals_init(self, tmp_path):
        doc = digits_config(tmp_path, name="frozen", decoder_kind="learned_sigmoid",
                            epochs=1, lr=0.0)
        cfg_path = write_config(tmp_path, doc)
        assert main(["train", "--config", str(cfg_path)]) == 0
        ckpt = load_checkpoint(Path(doc["output_dir"]) / "checkpoint.msck")
        ref = build_autoencoder(784, ((6, "sigmoid"),), "learned_sigmoid", seed=1)
        assert np.array_equal(ckpt.arrays["encoder.0.weights"], ref.encoder[0].weights)
        history = (Path(doc["output_dir"]) / "history.csv").read_text().splitlines()
        assert history[0] == "epoch,loss"
        assert len(history) == 2

    def test_same_seed_identical_checkpoints(self, tmp_path):
        doc_a = digits_config(tmp_path, name="a", epochs=2)
        doc_b = digits_config(tmp_path, name="b", epochs=2)
        doc_b["name"] = "a"  # identical config content, different directory
        doc_b["output_dir"] = str(tmp_path / "b")
        pa = write_config(tmp_path / "ca", _mk(tmp_path / "ca", doc_a))
        pb = write_config(tmp_path / "cb", _mk(tmp_path / "cb", doc_b))
        assert main(["train", "--config", str(pa)]) == 0
        assert main(["train", "--config", str(pb)]) == 0
        a = (Path(doc_a["output_dir"]) / "checkpoint.msck").read_bytes()
        b = (Path(doc_b["output_dir"]) / "checkpoint.msck").read_bytes()
        # payloads differ only in the recorded output_dir inside the config
        assert _strip_config(a) == _strip_config(b)

    def test_invalid_config_exits_2(self, tmp_path):
        doc = digits_config(tmp_path)
        doc["surprise"] = True
        cfg_path = write_config(tmp_path, doc)
        assert main(["train", "--config", str(cfg_path)]) == 2

    def test_diverged_training_exits_4(self, tmp_path):
        doc = digits_config(tmp_path, name="boom", decoder_kind="learned_linear",
                            epochs=2, lr=1e200)
        cfg_path = write_config(tmp_path, doc)
        with np.errstate(all="ignore"):
            assert main(["train", "--config", str(cfg_path)]) == 4

    def test_words_training_smoke(self, tmp_path, word_data_dir):
        doc = {
            "name": "words_smoke",
            "dataset": {"kind": "words", "dir": str(word_data_dir)},
            "model": {"kind": "autoencoder", "latents": 9,
                      "encoder": [{"units": 9, "activation": "sigmoid"}],
                      "decoder_kind": "minsyn_binary"},
            "training": {"epochs": 12, "batch_size": 16, "lr": 0.01, "seed": 0},
            "output_dir": str(tmp_path / "words_smoke"),
        }
        cfg_path = write_config(tmp_path, doc)
        assert main(["train", "--config", str(cfg_path)]) == 0
        lines = (tmp_path / "words_smoke" / "history.csv").read_text().splitlines()
        losses = [float(l.split(",")[1]) for l in lines[1:]]
        assert len(losses) == 12
        assert losses[-1] < losses[0]


def _mk(d, doc):
    d.mkdir(parents=True, exist_ok=True)
    return doc


def _strip_config(blob: bytes) -> bytes:
    (hlen,) = struct.unpack("<Q", blob[8:16])
    header = json.loads(blob[16:16 + hlen])
    header["config"].pop("output_dir")
    return json.dumps(header, sort_keys=True).encode() + blob[16 + hlen:]


class TestEval:
    def _identity_checkpoint(self, tmp_path, n=784):
        model = build_autoencoder(n, ((n, "identity"),), "learned_linear", seed=0)
        model.encoder[0].weights[:] = np.eye(n)
        model.encoder[0].bias[:] = 0.0
        model.decoder.weights[:] = np.eye(n)
        model.decoder.bias[:] = 0.0
        from minsyn.checkpoint import model_arrays
        arrays, meta = model_arrays(model, [0.0])
        path = tmp_path / "identity.msck"
        save_checkpoint(path, {"name": "identity"}, arrays, meta)
        return path

    def _digit_images(self, tmp_path, count=6):
        from minsyn.words import synthetic_digits
        imgs, _ = synthetic_digits(count, seed=3)
        path = tmp_path / "digits.idx"
        write_idx_file(path, images_tensor(imgs))
        return path

    def test_identity_model_no_noise_zero_loss(self, tmp_path, capsys):
        ckpt = self._identity_checkpoint(tmp_path)
        images = self._digit_images(tmp_path)
        out = tmp_path / "eval.csv"
        code = main(["eval", "--checkpoint", str(ckpt), "--images", str(images),
                     "--noise", "none", "--loss", "mse", "--out", str(out)])
        assert code == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "noise,loss"
        kind, value = rows[1].split(",")
        assert kind == "none"
        assert float(value) == pytest.approx(0.0, abs=1e-18)

    def test_all_noise_kinds_and_determinism(self, tmp_path):
        ckpt = self._identity_checkpoint(tmp_path)
        images = self._digit_images(tmp_path)
        out1, out2 = tmp_path / "e1.csv", tmp_path / "e2.csv"
        for out in (out1, out2):
            code = main(["eval", "--checkpoint", str(ckpt), "--images", str(images),
                         "--loss", "mse", "--seed", "11", "--out", str(out)])
            assert code == 0
        assert out1.read_text() == out2.read_text()
        rows = out1.read_text().splitlines()
        assert len(rows) == 7  # header + six kinds
        assert [r.split(",")[0] for r in rows[1:]] == [
            "none", "bottom_half", "right_half", "erase_chunk", "v_stripe", "h_stripe"]

    def test_missing_checkpoint_exits_3(self, tmp_path):
        images = self._digit_images(tmp_path)
        assert main(["eval", "--checkpoint", str(tmp_path / "no.msck"),
                     "--images", str(images)]) == 3


class TestSynergyCurve:
    def test_reference_curve(self, tmp_path, capsys):
        out = tmp_path / "curve"
        assert main(["synergy-curve", "--rho1", "0.5", "--rho2", "0.75",
                     "--steps", "101", "--out-dir", str(out)]) == 0
        rows = (out / "synergy_curve.csv").read_text().splitlines()
        assert rows[0] == "sigma12,mutual_information,union_information,gk_synergy,ci_synergy"
        data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
        assert data.shape == (101, 5)
        assert np.isfinite(data).all()
        assert (data[:, 3] >= 0).all() and (data[:, 4] >= 0).all()
        gk_min_row = data[np.argmin(data[:, 3])]
        assert gk_min_row[0] == pytest.approx(2 / 3, abs=(data[1, 0] - data[0, 0]) + 1e-12)
        assert gk_min_row[3] <= 1e-9
        assert (out / "synergy_curve.svg").read_text().startswith("<svg")

    def test_rows_match_module(self, tmp_path):
        out = tmp_path / "curve"
        main(["synergy-curve", "--rho1", "0.5", "--rho2", "0.75",
              "--steps", "31", "--out-dir", str(out)])
        rows = (out / "synergy_curve.csv").read_text().splitlines()[1:]
        for r in rows[::7]:
            s12, mi, ui, gk, ci = (float(v) for v in r.split(","))
            assert gk == pytest.approx(
                gk_synergy(GaussianSystem.pair(0.5, 0.75, s12)), abs=1e-9)

    def test_bits_units(self, tmp_path):
        out_n, out_b = tmp_path / "nats", tmp_path / "bits"
        main(["synergy-curve", "--rho1", "0.5", "--rho2", "0.75", "--steps", "11",
              "--out-dir", str(out_n)])
        main(["synergy-curve", "--rho1", "0.5", "--rho2", "0.75", "--steps", "11",
              "--units", "bits", "--out-dir", str(out_b)])
        n = np.loadtxt(out_n / "synergy_curve.csv", delimiter=",", skiprows=1)
        b = np.loadtxt(out_b / "synergy_curve.csv", delimiter=",", skiprows=1)
        assert np.allclose(n[:, 1] / np.log(2), b[:, 1], atol=1e-9)

    def test_infeasible_rho_exits(self, tmp_path):
        assert main(["synergy-curve", "--rho1", "1.0", "--rho2", "0.5",
                     "--steps", "11", "--out-dir", str(tmp_path / "x")]) == 3


class TestReport:
    @pytest.fixture()
    def trained_runs(self, tmp_path, word_data_dir):
        runs = []
        for name, kind in (("minsyn", "minsyn_binary"), ("ae", "learned_sigmoid")):
            doc = {
                "name": name,
                "dataset": {"kind": "words", "dir": str(word_data_dir)},
                "model": {"kind": "autoencoder", "latents": 9,
                          "encoder": [{"units": 9, "activation": "sigmoid"}],
                          "decoder_kind": kind},
                "training": {"epochs": 4, "batch_size": 16, "lr": 0.01, "seed": 0},
                "output_dir": str(tmp_path / name),
            }
            cfg_path = write_config(tmp_path, doc)
            assert main(["train", "--config", str(cfg_path)]) == 0
            runs.append(doc["output_dir"])
        # one PCA run through the same pipeline
        doc = {
            "name": "pca",
            "dataset": {"kind": "words", "dir": str(word_data_dir)},
            "model": {"kind": "pca", "latents": 9},
            "output_dir": str(tmp_path / "pca"),
        }
        cfg_path = write_config(tmp_path, doc)
        assert main(["train", "--config", str(cfg_path)]) == 0
        runs.append(doc["output_dir"])
        return runs

    def test_report_rows_and_determinism(self, tmp_path, trained_runs, capsys):
        out = tmp_path / "report"
        assert main(["report", *trained_runs, "--out-dir", str(out)]) == 0
        csv = (out / "report.csv").read_text()
        lines = csv.splitlines()
        assert lines[0] == "method,train_loss,test_loss,acc"
        assert [l.split(",")[0] for l in lines[1:]] == ["ae", "minsyn", "pca"]
        assert main(["report", *trained_runs, "--out-dir", str(tmp_path / "r2")]) == 0
        assert (tmp_path / "r2" / "report.csv").read_text() == csv

    def test_mismatched_datasets_rejected(self, tmp_path, trained_runs, word_data_dir):
        other_dir = tmp_path / "other_words"
        # different dictionary -> different manifest (enough words for k=9 PCA)
        wl = tmp_path / "tiny_words.txt"
        wl.write_text("\n".join(["ail", "air", "ale", "all", "ant", "ban",
                                 "bar", "bat", "bee", "bet", "bin", "bit"]) + "\n")
        assert main(["dataset-build", "--out-dir", str(other_dir),
                     "--glyphs", "builtin", "--word-list", str(wl)]) == 0
        doc = {
            "name": "odd",
            "dataset": {"kind": "words", "dir": str(other_dir)},
            "model": {"kind": "pca", "latents": 9},
            "output_dir": str(tmp_path / "odd"),
        }
        cfg_path = write_config(tmp_path, doc)
        assert main(["train", "--config", str(cfg_path)]) == 0
        code = main(["report", trained_runs[0], str(tmp_path / "odd"),
                     "--out-dir", str(tmp_path / "bad")])
        assert code == 3

    def test_missing_run_dir_exits_3(self, tmp_path):
        assert main(["report", str(tmp_path / "ghost"),
                     "--out-dir", str(tmp_path / "r")]) == 3
