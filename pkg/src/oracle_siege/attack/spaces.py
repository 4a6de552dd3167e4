"""Coordinate systems the adversary perturbs in.

Attack code works on "working" vectors; ``realize`` turns one into the raw
feature vector actually submitted to the oracle. ``anchor`` is the raw
ground-truth sample the working vector was derived from.
"""

from __future__ import annotations

import numpy as np

from .latent import LatentCodec


class RawSpace:
    name = "raw"

    def __init__(self, bounds=None):
        self.bounds = None if bounds is None else np.asarray(bounds, dtype=float)

    def encode(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float)

    def clip(self, z) -> np.ndarray:
        if self.bounds is None:
            return z
        return np.clip(z, self.bounds[:, 0], self.bounds[:, 1])

    def realize(self, z, anchor=None) -> np.ndarray:
        return self.clip(np.asarray(z, dtype=float))


class LatentSpace:
    """Perturb in codec coordinates, decode at the oracle boundary.

    With ``keep_residual`` the decoded vector keeps the anchor's
    off-subspace detail (a latent edit of the adversary's own sample);
    otherwise it is the plain decoding.
    """

    name = "latent"

    def __init__(self, codec: LatentCodec, bounds=None, keep_residual: bool = True):
        self.codec = codec
        self.bounds = None if bounds is None else np.asarray(bounds, dtype=float)
        self.keep_residual = keep_residual

    def encode(self, X) -> np.ndarray:
        return self.codec.encode(X)

    def clip(self, z) -> np.ndarray:
        return z

    def realize(self, z, anchor=None) -> np.ndarray:
        if self.keep_residual and anchor is not None:
            x = self.codec.edit(anchor, z)
        else:
            x = self.codec.decode(z)
        if self.bounds is not None:
            x = np.clip(x, self.bounds[:, 0], self.bounds[:, 1])
        return x
