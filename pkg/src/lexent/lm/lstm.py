"""LSTM phonotactic model: inference over externally trained weights.

The weight file fixes the semantics independent of any trainer's internal
layout: matrices are row-major with one row per output unit, and the four
gate blocks are stacked input, forget, cell-candidate, output (i, f, g, o)
along the rows.  One step computes

    a = w_ih @ x + b_ih + w_hh @ h + b_hh        (a split into i*, f*, g*, o*)
    i, f, o = sigmoid(i*), sigmoid(f*), sigmoid(o*);  g = tanh(g*)
    c' = f*c + i*g;  h' = o*tanh(c')

with the input of layer l>1 being h' of layer l-1, and next-symbol logits
``out_w @ h'_top + out_b``.  Dropout exists only at training time and is
absent here.  The embedding table covers phones plus BOW; the output layer
covers phones plus EOW.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..core import Alphabet
from .base import PhonotacticModel, categorical_rows

FILE_VERSION = 1
_LN2 = math.log(2.0)


class WeightFileError(ValueError):
    """Base class for weight-file problems."""


class WeightSchemaError(WeightFileError):
    """Unknown schema version or missing/unknown fields."""


class WeightDimensionError(WeightFileError):
    """Arrays whose shapes disagree with the declared dimensions."""


class NonFiniteWeightError(WeightFileError):
    """NaN or infinity in a weight array."""


def _sigmoid(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


class LstmModel(PhonotacticModel):
    """States are tuples of per-layer (h, c) vectors; arrays are never
    mutated in place, so copied states fork decoding branches safely."""

    def __init__(self, alphabet: Alphabet, embedding, layers, out_w, out_b):
        self.alphabet = alphabet
        self.embedding = np.asarray(embedding, dtype=np.float64)
        self.layers = [
            tuple(np.asarray(m, dtype=np.float64) for m in layer) for layer in layers
        ]
        self.out_w = np.asarray(out_w, dtype=np.float64)
        self.out_b = np.asarray(out_b, dtype=np.float64)
        self._validate_shapes()
        self.hidden_dim = self.layers[0][1].shape[1]
        self.embed_dim = self.embedding.shape[1]

    def _validate_shapes(self):
        P = self.alphabet.n_phones
        if self.embedding.ndim != 2 or self.embedding.shape[0] != P + 1:
            raise WeightDimensionError(
                f"embedding must have {P + 1} rows (phones + BOW), "
                f"got shape {self.embedding.shape}"
            )
        e = self.embedding.shape[1]
        in_dim = e
        d = None
        for li, (w_ih, w_hh, b_ih, b_hh) in enumerate(self.layers):
            if w_hh.ndim != 2 or w_hh.shape[0] % 4 != 0:
                raise WeightDimensionError(f"layer {li}: w_hh rows not a multiple of 4")
            layer_d = w_hh.shape[0] // 4
            if d is None:
                d = layer_d
            if layer_d != d or w_hh.shape != (4 * d, d):
                raise WeightDimensionError(f"layer {li}: w_hh shape {w_hh.shape}")
            if w_ih.shape != (4 * d, in_dim):
                raise WeightDimensionError(
                    f"layer {li}: w_ih shape {w_ih.shape}, expected {(4 * d, in_dim)}"
                )
            if b_ih.shape != (4 * d,) or b_hh.shape != (4 * d,):
                raise WeightDimensionError(f"layer {li}: bias shapes")
            in_dim = d
        if self.out_w.shape != (P + 1, in_dim):
            raise WeightDimensionError(
                f"out_w shape {self.out_w.shape}, expected {(P + 1, in_dim)}"
            )
        if self.out_b.shape != (P + 1,):
            raise WeightDimensionError(f"out_b shape {self.out_b.shape}")
        for arr in self._all_arrays():
            if not np.all(np.isfinite(arr)):
                raise NonFiniteWeightError("non-finite value in weights")

    def _all_arrays(self):
        yield self.embedding
        for layer in self.layers:
            yield from layer
        yield self.out_w
        yield self.out_b

    # --- single-branch interface ---------------------------------------------

    def _advance(self, state, x: np.ndarray):
        new = []
        for (w_ih, w_hh, b_ih, b_hh), (h, c) in zip(self.layers, state):
            a = w_ih @ x + b_ih + w_hh @ h + b_hh
            d = h.shape[0]
            i = _sigmoid(a[:d])
            f = _sigmoid(a[d:2 * d])
            g = np.tanh(a[2 * d:3 * d])
            o = _sigmoid(a[3 * d:])
            c2 = f * c + i * g
            h2 = o * np.tanh(c2)
            new.append((h2, c2))
            x = h2
        return tuple(new)

    def initial_state(self):
        d = self.layers[0][1].shape[1]
        zeros = tuple((np.zeros(d), np.zeros(d)) for _ in self.layers)
        return self._advance(zeros, self.embedding[self.alphabet.bow_index])

    def step(self, state, phone_index: int):
        if phone_index >= self.alphabet.n_phones:
            raise ValueError(f"phone index {phone_index} outside alphabet")
        return self._advance(state, self.embedding[phone_index])

    def next_log_probs(self, state) -> np.ndarray:
        h_top = state[-1][0]
        logits = self.out_w @ h_top + self.out_b
        m = logits.max()
        lse = m + math.log(np.exp(logits - m).sum())
        return (logits - lse) / _LN2

    # --- batched paths ---------------------------------------------------------

    def _advance_batch(self, hs, cs, x):
        """hs, cs: lists of [B, d] arrays; x: [B, in]. Returns new lists."""
        new_h, new_c = [], []
        for (w_ih, w_hh, b_ih, b_hh), h, c in zip(self.layers, hs, cs):
            a = x @ w_ih.T + b_ih + h @ w_hh.T + b_hh
            d = h.shape[1]
            i = _sigmoid(a[:, :d])
            f = _sigmoid(a[:, d:2 * d])
            g = np.tanh(a[:, 2 * d:3 * d])
            o = _sigmoid(a[:, 3 * d:])
            c2 = f * c + i * g
            h2 = o * np.tanh(c2)
            new_h.append(h2)
            new_c.append(c2)
            x = h2
        return new_h, new_c

    def _log_probs_batch(self, hs) -> np.ndarray:
        logits = hs[-1] @ self.out_w.T + self.out_b
        m = logits.max(axis=1, keepdims=True)
        lse = m + np.log(np.exp(logits - m).sum(axis=1, keepdims=True))
        return (logits - lse) / _LN2

    def score_words(self, words) -> np.ndarray:
        """Batched scoring; pads to the longest word and masks finished rows."""
        for w in words:
            self._check_word(w)
        B = len(words)
        if B == 0:
            return np.zeros(0)
        lens = np.array([len(w) for w in words])
        T = int(lens.max())
        d = self.layers[0][1].shape[1]
        hs = [np.zeros((B, d)) for _ in self.layers]
        cs = [np.zeros((B, d)) for _ in self.layers]
        bow = self.alphabet.bow_index
        x = np.repeat(self.embedding[bow][None, :], B, axis=0)
        hs, cs = self._advance_batch(hs, cs, x)
        total = np.zeros(B)
        rows = np.arange(B)
        for t in range(T + 1):
            lp = self._log_probs_batch(hs)
            targets = np.where(
                lens > t,
                np.array([w.phones[t] if t < len(w) else 0 for w in words]),
                self.eow_out,
            )
            live = lens >= t
            total[live] += lp[rows[live], targets[live]]
            if t == T:
                break
            feeding = lens > t
            if not feeding.any():
                break
            safe = np.where(feeding, targets, 0)
            hs, cs = self._advance_batch(hs, cs, self.embedding[safe])
        return total

    def sample_forms(self, rng, count, max_len=50):
        out: list[tuple[int, ...]] = []
        overflows = 0
        rounds = 0
        while len(out) < count:
            rounds += 1
            if rounds > 200:
                raise RuntimeError(
                    f"sampling stalled after {overflows} overflow draws; "
                    "the model may never emit EOW within max_len"
                )
            words, ok = self._sample_batch(rng, count - len(out), max_len)
            out.extend(w for w, good in zip(words, ok) if good)
            overflows += int(len(words) - int(ok.sum()))
        return out, overflows

    def _sample_batch(self, rng, batch, max_len):
        eow = self.eow_out
        d = self.layers[0][1].shape[1]
        hs = [np.zeros((batch, d)) for _ in self.layers]
        cs = [np.zeros((batch, d)) for _ in self.layers]
        bow = self.alphabet.bow_index
        x = np.repeat(self.embedding[bow][None, :], batch, axis=0)
        hs, cs = self._advance_batch(hs, cs, x)
        mat = np.full((batch, max_len), -1, dtype=np.int16)
        finished = np.zeros(batch, dtype=bool)
        active = np.arange(batch)
        for t in range(max_len + 1):
            if active.size == 0:
                break
            probs = 2.0 ** self._log_probs_batch(hs)
            draws = categorical_rows(rng, probs)
            done = draws == eow
            finished[active[done]] = True
            if t == max_len:
                break
            keep = ~done
            active = active[keep]
            if active.size == 0:
                break
            mat[active, t] = draws[keep]
            hs = [h[keep] for h in hs]
            cs = [c[keep] for c in cs]
            hs, cs = self._advance_batch(hs, cs, self.embedding[draws[keep]])
        words = [tuple(int(s) for s in row[row >= 0]) for row in mat]
        return words, finished

    # --- persistence -------------------------------------------------------------

    def save(self, path) -> None:
        obj = {
            "version": FILE_VERSION,
            "alphabet": {"phones": list(self.alphabet.phones)},
            "embed_dim": int(self.embedding.shape[1]),
            "hidden_dim": int(self.layers[0][1].shape[1]),
            "layers": len(self.layers),
            "embedding": self.embedding.tolist(),
            "lstm": [
                {
                    "w_ih": w_ih.tolist(),
                    "w_hh": w_hh.tolist(),
                    "b_ih": b_ih.tolist(),
                    "b_hh": b_hh.tolist(),
                }
                for (w_ih, w_hh, b_ih, b_hh) in self.layers
            ],
            "out_w": self.out_w.tolist(),
            "out_b": self.out_b.tolist(),
        }
        Path(path).write_text(json.dumps(obj) + "\n")

    @classmethod
    def load(cls, path) -> "LstmModel":
        obj = json.loads(Path(path).read_text())
        return cls.from_dict(obj, source=str(path))

    @classmethod
    def from_dict(cls, obj: dict, source: str = "<dict>") -> "LstmModel":
        if not isinstance(obj, dict) or "lstm" not in obj:
            raise WeightSchemaError(f"{source}: not an LSTM weight file")
        version = obj.get("version")
        if version != FILE_VERSION:
            raise WeightSchemaError(f"{source}: unknown schema version {version!r}")
        required = {"alphabet", "embedding", "lstm", "out_w", "out_b",
                    "embed_dim", "hidden_dim", "layers"}
        missing = required - obj.keys()
        if missing:
            raise WeightSchemaError(f"{source}: missing fields {sorted(missing)}")
        alphabet = Alphabet(tuple(obj["alphabet"]["phones"]))
        layers = [
            (layer["w_ih"], layer["w_hh"], layer["b_ih"], layer["b_hh"])
            for layer in obj["lstm"]
        ]
        model = cls(alphabet, obj["embedding"], layers, obj["out_w"], obj["out_b"])
        declared = (int(obj["embed_dim"]), int(obj["hidden_dim"]), int(obj["layers"]))
        actual = (model.embed_dim, model.hidden_dim, len(model.layers))
        if declared != actual:
            raise WeightDimensionError(
                f"{source}: declared (embed, hidden, layers)={declared} "
                f"but arrays give {actual}"
            )
        return model
