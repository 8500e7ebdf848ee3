"""Event generation from intensity video under the per-pixel biased threshold model."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import CalibrationMap, EventStream, IntensityFrame, LogFrame, PixelClass, log_intensity

# Log-units slack so that a level reached exactly at a frame sample still fires.
CROSSING_EPS = 1e-9


@dataclass(frozen=True)
class SimConfig:
    refractory: float = 0.0
    interpolation: str = "linear"

    def __post_init__(self):
        if self.refractory < 0:
            raise ValueError(f"refractory must be >= 0, got {self.refractory}")
        if self.interpolation != "linear":
            raise ValueError(f"unsupported interpolation {self.interpolation!r}")


@dataclass(frozen=True)
class SpecialPixel:
    x: int
    y: int
    kind: PixelClass
    magnitude: float

    def __post_init__(self):
        object.__setattr__(self, "kind", PixelClass(self.kind) if not isinstance(self.kind, str)
                           else PixelClass[self.kind.upper()])
        if not self.magnitude > 0:
            raise ValueError(f"magnitude must be positive, got {self.magnitude}")
        if self.kind == PixelClass.NOMINAL:
            raise ValueError("nominal is not a special pixel class")


@dataclass(frozen=True)
class SpecialPixelSpec:
    pixels: tuple[SpecialPixel, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "pixels", tuple(self.pixels))

    def __iter__(self):
        return iter(self.pixels)

    def __len__(self):
        return len(self.pixels)

    @classmethod
    def parse(cls, text: str) -> "SpecialPixelSpec":
        """Parse lines of ``x y class magnitude``; ``#`` starts a comment."""
        pixels = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: expected 'x y class magnitude'")
            try:
                pixels.append(SpecialPixel(int(parts[0]), int(parts[1]), parts[2], float(parts[3])))
            except (KeyError, ValueError) as err:
                raise ValueError(f"line {lineno}: {err}") from None
        return cls(tuple(pixels))


def inject_special_pixels(cmap: CalibrationMap, spec: SpecialPixelSpec,
                          nominal_c: float = 0.1) -> CalibrationMap:
    """Return a copy of ``cmap`` with hot/cold thresholds and warm/cool biases set."""
    c, b = cmap.c.copy(), cmap.b.copy()
    h, w = c.shape
    for sp in spec:
        if not (0 <= sp.x < w and 0 <= sp.y < h):
            raise ValueError(f"special pixel ({sp.x}, {sp.y}) outside {w}x{h} map")
        if sp.kind == PixelClass.HOT:
            c[sp.y, sp.x] = nominal_c - sp.magnitude
        elif sp.kind == PixelClass.COLD:
            c[sp.y, sp.x] = nominal_c + sp.magnitude
        elif sp.kind == PixelClass.WARM:
            b[sp.y, sp.x] = -sp.magnitude
        elif sp.kind == PixelClass.COOL:
            b[sp.y, sp.x] = sp.magnitude
        if not c[sp.y, sp.x] > 0:
            raise ValueError(f"{sp.kind.name.lower()} pixel ({sp.x}, {sp.y}) gets c = {c[sp.y, sp.x]:g}")
        if not abs(b[sp.y, sp.x]) < c[sp.y, sp.x]:
            raise ValueError(f"{sp.kind.name.lower()} pixel ({sp.x}, {sp.y}) gets |b| >= c "
                             f"(b={b[sp.y, sp.x]:g}, c={c[sp.y, sp.x]:g})")
    return CalibrationMap(c, b)


def _as_log(frame) -> np.ndarray:
    if isinstance(frame, LogFrame):
        return np.asarray(frame.values, dtype=float)
    return np.asarray(log_intensity(frame).values, dtype=float)


def _first_hit(A, B, slope, T0, dt, level, rising):
    """Sub-interval ``[lo, hi]`` (absolute times) where the segment is beyond ``level``.

    ``rising`` selects ``L >= level`` versus ``L <= level``. Returns masks and
    bounds; pixels whose segment never gets there have ``ok`` false.
    """
    s = np.where(rising, 1.0, -1.0)
    a, bb, lv, sl = s * A, s * B, s * level, s * slope
    ok = np.maximum(a, bb) >= lv - CROSSING_EPS
    already = a >= lv
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.clip((lv - a) / sl, 0.0, 1.0)
    frac = np.where(np.isfinite(frac), frac, 0.0)
    # increasing along s: beyond from the crossing to the end; decreasing: from start to crossing
    lo = np.where(sl > 0, np.where(already, 0.0, frac * dt), 0.0)
    hi = np.where(sl < 0, np.where(already, frac * dt, 0.0), dt)
    hi = np.where(sl > 0, dt, hi)
    hi = np.where(sl == 0, dt, hi)
    return ok, T0 + lo, T0 + hi, already


def simulate_events(video: Sequence[IntensityFrame | LogFrame], cmap: CalibrationMap,
                    cfg: SimConfig = SimConfig()) -> EventStream:
    """Generate the events a sensor with map ``cmap`` would emit for ``video``.

    Log intensity is linearly interpolated between frames. Each pixel keeps a
    reference level, starting at the first frame; it fires ON once
    ``L - ref >= c + b`` and OFF once ``L - ref <= b - c``, timestamps the
    event at the crossing instant and resets the reference to ``L`` there.
    """
    if len(video) < 2:
        raise ValueError(f"need at least 2 frames, got {len(video)}")
    shape = video[0].shape
    if shape != cmap.shape:
        raise ValueError(f"resolution mismatch: video {shape}, map {cmap.shape}")
    for i, f in enumerate(video):
        if f.shape != shape:
            raise ValueError(f"resolution mismatch at frame {i}: {f.shape} vs {shape}")
        if i and not f.timestamp > video[i - 1].timestamp:
            raise ValueError(f"frame timestamps not increasing at frame {i}")
    h, w = shape
    on = (cmap.c + cmap.b).ravel()
    off = (cmap.c - cmap.b).ravel()
    refr = float(cfg.refractory)

    prev = _as_log(video[0]).ravel()
    ref = prev.copy()
    last_t = np.full(h * w, -np.inf)
    out_t, out_i, out_p = [], [], []

    for k in range(1, len(video)):
        cur = _as_log(video[k]).ravel()
        T0, T1 = float(video[k - 1].timestamp), float(video[k].timestamp)
        dt = T1 - T0
        idx = np.arange(h * w)
        while idx.size:
            A, B = prev[idx], cur[idx]
            slope = (B - A) / dt
            up_lvl = ref[idx] + on[idx]
            dn_lvl = ref[idx] - off[idx]
            ok_u, lo_u, hi_u, at_u = _first_hit(A, B, slope, T0, dt, up_lvl, True)
            ok_d, lo_d, hi_d, at_d = _first_hit(A, B, slope, T0, dt, dn_lvl, False)
            earliest = last_t[idx] + refr
            te_u = np.maximum(lo_u, earliest)
            te_d = np.maximum(lo_d, earliest)
            ok_u &= te_u <= hi_u
            ok_d &= te_d <= hi_d
            # a non-degenerate band never allows both; keep the earlier one
            both = ok_u & ok_d
            ok_u &= ~(both & (te_d < te_u))
            ok_d &= ~(both & ~(te_d < te_u))
            fired = ok_u | ok_d
            if not fired.any():
                break
            pol = np.where(ok_u, 1, -1)
            te = np.where(ok_u, te_u, te_d)
            lvl = np.where(ok_u, up_lvl, dn_lvl)
            lo = np.where(ok_u, lo_u, lo_d)
            at_start = np.where(ok_u, at_u, at_d)
            level_at_te = A + slope * (te - T0)
            new_ref = np.where((te > lo) | at_start, level_at_te, lvl)

            sel = idx[fired]
            out_t.append(te[fired])
            out_i.append(sel)
            out_p.append(pol[fired])
            ref[sel] = new_ref[fired]
            last_t[sel] = te[fired]
            idx = sel
        prev = cur

    if out_t:
        t = np.concatenate(out_t)
        pix = np.concatenate(out_i)
        p = np.concatenate(out_p)
        order = np.lexsort((pix, t))
        t, pix, p = t[order], pix[order], p[order]
    else:
        t = np.zeros(0)
        pix = np.zeros(0, dtype=np.int64)
        p = np.zeros(0, dtype=np.int8)
    return EventStream(w, h, t, pix % w, pix // w, p)
