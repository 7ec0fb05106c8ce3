"""Procedural generator of hand-object interaction clips with exact ground truth.

Clips contain RGB frames, stylized hand renderings, binary hand/object masks,
a reference object image, and the layout sequence. Everything is a pure,
deterministic function of the SceneSpec.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .layout import (
    Box,
    LayoutFrame,
    LayoutSequence,
    contact_points,
    contact_threshold,
    square_box,
)

GENERATOR_VERSION = "1"

OBJECT_SHAPES = ("rectangle", "ellipse", "capsule")

_SIDE_NORMALS = {"top": (0.0, -1.0), "bottom": (0.0, 1.0), "left": (-1.0, 0.0), "right": (1.0, 0.0)}


class DatasetError(Exception):
    """Raised for missing or corrupt dataset files."""


@dataclass(frozen=True)
class HandKey:
    """Hand state at one keyframe: an explicit center, or a declared contact."""

    center: Optional[tuple[float, float]] = None
    contact_side: Optional[str] = None
    gap: float = 20.0

    def __post_init__(self):
        if (self.center is None) == (self.contact_side is None):
            raise ValueError("HandKey needs exactly one of center or contact_side")
        if self.contact_side is not None and self.contact_side not in _SIDE_NORMALS:
            raise ValueError(f"unknown contact side {self.contact_side!r}")

    def to_dict(self):
        if self.center is not None:
            return {"center": list(self.center)}
        return {"contact_side": self.contact_side, "gap": self.gap}

    @staticmethod
    def from_dict(d) -> "HandKey":
        if "center" in d:
            return HandKey(center=tuple(d["center"]))
        return HandKey(contact_side=d["contact_side"], gap=d["gap"])


@dataclass(frozen=True)
class Keyframe:
    t: float
    object_center: tuple[float, float]
    left: Optional[HandKey] = None
    right: Optional[HandKey] = None

    def to_dict(self):
        return {
            "t": self.t,
            "object_center": list(self.object_center),
            "left": None if self.left is None else self.left.to_dict(),
            "right": None if self.right is None else self.right.to_dict(),
        }

    @staticmethod
    def from_dict(d) -> "Keyframe":
        return Keyframe(
            t=d["t"],
            object_center=tuple(d["object_center"]),
            left=None if d["left"] is None else HandKey.from_dict(d["left"]),
            right=None if d["right"] is None else HandKey.from_dict(d["right"]),
        )


@dataclass(frozen=True)
class MotionScript:
    """Keyframed tracks; values between keyframes are linearly interpolated."""

    keyframes: tuple[Keyframe, ...]

    def __post_init__(self):
        if len(self.keyframes) == 0:
            raise ValueError("motion script needs at least one keyframe")
        ts = [k.t for k in self.keyframes]
        if sorted(ts) != ts or len(set(ts)) != len(ts):
            raise ValueError("keyframe times must be strictly increasing")
        has_left = [k.left is not None for k in self.keyframes]
        has_right = [k.right is not None for k in self.keyframes]
        if len(set(has_left)) > 1 or len(set(has_right)) > 1:
            raise ValueError("hand presence must be consistent across keyframes")
        object.__setattr__(self, "keyframes", tuple(self.keyframes))

    @property
    def has_left(self) -> bool:
        return self.keyframes[0].left is not None

    @property
    def has_right(self) -> bool:
        return self.keyframes[0].right is not None

    def to_dict(self):
        return {"keyframes": [k.to_dict() for k in self.keyframes]}

    @staticmethod
    def from_dict(d) -> "MotionScript":
        return MotionScript(tuple(Keyframe.from_dict(k) for k in d["keyframes"]))


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    object_shape: str
    object_texture_seed: int
    object_size: tuple[float, float]
    background_seed: int
    motion: MotionScript
    n_frames: int
    frame_size: tuple[int, int] = (256, 256)  # (W, H)
    fps: float = 25.0
    s_hand: float = 40.0

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        if self.object_shape not in OBJECT_SHAPES:
            raise ValueError(f"unknown object shape {self.object_shape!r}")
        if self.object_size[0] <= 0 or self.object_size[1] <= 0:
            raise ValueError("object_size must be positive")

    def to_dict(self):
        return {
            "seed": self.seed,
            "object_shape": self.object_shape,
            "object_texture_seed": self.object_texture_seed,
            "object_size": list(self.object_size),
            "background_seed": self.background_seed,
            "motion": self.motion.to_dict(),
            "n_frames": self.n_frames,
            "frame_size": list(self.frame_size),
            "fps": self.fps,
            "s_hand": self.s_hand,
        }

    @staticmethod
    def from_dict(d) -> "SceneSpec":
        return SceneSpec(
            seed=d["seed"],
            object_shape=d["object_shape"],
            object_texture_seed=d["object_texture_seed"],
            object_size=tuple(d["object_size"]),
            background_seed=d["background_seed"],
            motion=MotionScript.from_dict(d["motion"]),
            n_frames=d["n_frames"],
            frame_size=tuple(d["frame_size"]),
            fps=d["fps"],
            s_hand=d["s_hand"],
        )


@dataclass
class SyntheticClip:
    frames: np.ndarray        # (F, H, W, 3) uint8
    hand_renders: np.ndarray  # (F, H, W, 3) uint8, glyphs on black
    hand_masks: np.ndarray    # (F, H, W) uint8 in {0, 1}
    object_masks: np.ndarray  # (F, H, W) uint8 in {0, 1}
    reference_image: np.ndarray  # (H, W, 3) uint8
    layout: LayoutSequence
    spec: SceneSpec

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def _lerp_track(times, values, t):
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    x = np.interp(t, times, values[:, 0])
    y = np.interp(t, times, values[:, 1])
    return float(x), float(y)


def _resolve_hand_keys(spec: SceneSpec, which: str):
    """Concrete hand centers at keyframes (contacts resolved against the object box there)."""
    w_obj, h_obj = spec.object_size
    out_t, out_c = [], []
    for kf in spec.motion.keyframes:
        key: HandKey = getattr(kf, which)
        ocx, ocy = kf.object_center
        obox = Box(ocx - w_obj / 2, ocy - h_obj / 2, ocx + w_obj / 2, ocy + h_obj / 2)
        if key.center is not None:
            cx, cy = key.center
        else:
            pts = dict(zip(("top", "bottom", "left", "right"), contact_points(obox)))
            px, py = pts[key.contact_side]
            nx, ny = _SIDE_NORMALS[key.contact_side]
            if key.gap >= contact_threshold(spec.s_hand):
                raise ValueError(
                    f"declared contact gap {key.gap} is not below the contact threshold"
                )
            cx, cy = px + nx * key.gap, py + ny * key.gap
        W, H = spec.frame_size
        half = spec.s_hand / 2.0
        cx = min(max(cx, half), W - half)
        cy = min(max(cy, half), H - half)
        out_t.append(kf.t)
        out_c.append((cx, cy))
    return out_t, out_c


def build_layout(spec: SceneSpec) -> LayoutSequence:
    """Ground-truth layout implied by the motion script."""
    W, H = spec.frame_size
    w_obj, h_obj = spec.object_size
    times = [kf.t for kf in spec.motion.keyframes]
    obj_track = [kf.object_center for kf in spec.motion.keyframes]
    hand_tracks = {}
    if spec.motion.has_left:
        hand_tracks["left"] = _resolve_hand_keys(spec, "left")
    if spec.motion.has_right:
        hand_tracks["right"] = _resolve_hand_keys(spec, "right")

    frames = []
    for t in range(spec.n_frames):
        ocx, ocy = _lerp_track(times, obj_track, t)
        obox = Box(ocx - w_obj / 2, ocy - h_obj / 2, ocx + w_obj / 2, ocy + h_obj / 2)
        if obox.x_min < 1 or obox.y_min < 1 or obox.x_max > W - 1 or obox.y_max > H - 1:
            raise ValueError(f"motion script leaves the object within 1 px of the frame edge at t={t}")
        hands = {}
        for name, (kt, kc) in hand_tracks.items():
            cx, cy = _lerp_track(kt, kc, t)
            hands[name] = square_box(cx, cy, spec.s_hand)
        frames.append(
            LayoutFrame(
                frame_index=t,
                left_hand=hands.get("left"),
                right_hand=hands.get("right"),
                obj=obox,
            )
        )
    return LayoutSequence(frames=tuple(frames), width=W, height=H, fps=spec.fps, s_hand=spec.s_hand)


def _background(spec: SceneSpec) -> np.ndarray:
    """Smooth low-frequency color field, seeded; float32 in [0, 1]."""
    W, H = spec.frame_size
    rng = np.random.default_rng([spec.background_seed, 11])
    ys, xs = np.mgrid[0:H, 0:W].astype(np.float32)
    img = np.zeros((H, W, 3), dtype=np.float32)
    for c in range(3):
        base = rng.uniform(0.25, 0.55)
        img[:, :, c] = base
        for _ in range(3):
            fx, fy = rng.uniform(0.5, 2.5, size=2) * 2 * math.pi
            phase = rng.uniform(0, 2 * math.pi)
            amp = rng.uniform(0.03, 0.10)
            img[:, :, c] += amp * np.sin(fx * xs / W + fy * ys / H + phase)
    return np.clip(img, 0.0, 1.0)


def _texture_patch(texture_seed: int, w: int, h: int) -> np.ndarray:
    """Seeded procedural texture of size (h, w); float32 in [0, 1]."""
    rng = np.random.default_rng([texture_seed, 7])
    kind = rng.integers(0, 4)
    c0 = rng.uniform(0.15, 0.95, size=3).astype(np.float32)
    c1 = rng.uniform(0.15, 0.95, size=3).astype(np.float32)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float32)
    if kind == 0:  # diagonal stripes
        period = rng.uniform(6, 18)
        wave = ((xs + ys) / period) % 1.0 < 0.5
    elif kind == 1:  # checker
        px, py = rng.uniform(6, 16, size=2)
        wave = ((xs // px) + (ys // py)) % 2 == 0
    elif kind == 2:  # dots
        px = rng.uniform(8, 16)
        gx = (xs % px) - px / 2
        gy = (ys % px) - px / 2
        wave = gx**2 + gy**2 < (px * 0.3) ** 2
    else:  # two-tone gradient bands
        period = rng.uniform(10, 24)
        wave = (np.sin(2 * math.pi * xs / period) + np.sin(2 * math.pi * ys / (period * 1.3))) > 0
    patch = np.where(wave[..., None], c0, c1)
    shade = 0.85 + 0.15 * (xs / max(w - 1, 1))
    return (patch * shade[..., None]).astype(np.float32)


def _shape_support(shape: str, w: int, h: int) -> np.ndarray:
    """Boolean support of the object inside its (h, w) box raster."""
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float32)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    if shape == "rectangle":
        return np.ones((h, w), dtype=bool)
    if shape == "ellipse":
        a, b = max(w / 2.0, 1e-6), max(h / 2.0, 1e-6)
        return ((xs - cx) / a) ** 2 + ((ys - cy) / b) ** 2 <= 1.0
    # capsule: a stadium along the longer axis
    if w >= h:
        r = h / 2.0
        x0, x1 = cx - (w / 2.0 - r), cx + (w / 2.0 - r)
        px = np.clip(xs, x0, x1)
        return (xs - px) ** 2 + (ys - cy) ** 2 <= r**2
    r = w / 2.0
    y0, y1 = cy - (h / 2.0 - r), cy + (h / 2.0 - r)
    py = np.clip(ys, y0, y1)
    return (xs - cx) ** 2 + (ys - py) ** 2 <= r**2


def _object_sprite(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    """(texture, support) for the object's constant-size box raster.

    Floor keeps the sprite inside the box's half-open pixel coverage so the
    mask bounding box stays within 1 px of the layout box.
    """
    w = max(1, int(math.floor(spec.object_size[0])))
    h = max(1, int(math.floor(spec.object_size[1])))
    return _texture_patch(spec.object_texture_seed, w, h), _shape_support(spec.object_shape, w, h)


def _segment_distance(xs, ys, p0, p1):
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    den = dx * dx + dy * dy
    if den == 0:
        t = np.zeros_like(xs)
    else:
        t = np.clip(((xs - p0[0]) * dx + (ys - p0[1]) * dy) / den, 0.0, 1.0)
    px, py = p0[0] + t * dx, p0[1] + t * dy
    return np.sqrt((xs - px) ** 2 + (ys - py) ** 2), t


def _render_glyph(size: int, bend: float, orient: float, color: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Articulated 3-segment chevron on a (size, size) canvas.

    Returns (rgb float32, ink mask bool); the ink centroid is shifted onto the
    canvas center so layout boxes stay centered on the glyph.
    """
    g = float(size)
    seg = 0.30 * g
    radius = 0.11 * g
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float32)
    cx = cy = (size - 1) / 2.0

    pts = [np.array([cx - 0.35 * g, cy])]
    angles = [orient, orient + bend, orient + 2.0 * bend]
    lengths = [seg, seg, 0.75 * seg]
    for ang, ln in zip(angles, lengths):
        prev = pts[-1]
        pts.append(prev + ln * np.array([math.cos(ang), math.sin(ang)]))

    rgb = np.zeros((size, size, 3), dtype=np.float32)
    ink = np.zeros((size, size), dtype=bool)
    shade_levels = (1.0, 0.86, 0.72)
    for i in range(3):
        dist, t = _segment_distance(xs, ys, pts[i], pts[i + 1])
        seg_mask = dist <= radius
        shade = shade_levels[i] * (0.85 + 0.15 * (1.0 - t))
        for c in range(3):
            rgb[:, :, c] = np.where(seg_mask, color[c] * shade, rgb[:, :, c])
        ink |= seg_mask

    if ink.any():
        iy, ix = np.nonzero(ink)
        sy = int(round(cy - iy.mean()))
        sx = int(round(cx - ix.mean()))
        rgb = np.roll(rgb, (sy, sx), axis=(0, 1))
        ink = np.roll(ink, (sy, sx), axis=(0, 1))
    return rgb, ink


def _hand_color(spec: SceneSpec, which: str) -> np.ndarray:
    rng = np.random.default_rng([spec.seed, 31 if which == "left" else 37])
    base = np.array([0.87, 0.67, 0.54], dtype=np.float32)
    if which == "right":
        base = np.array([0.78, 0.60, 0.50], dtype=np.float32)
    return np.clip(base + rng.uniform(-0.06, 0.06, size=3).astype(np.float32), 0.0, 1.0)


def _hand_pose(spec: SceneSpec, which: str, t: int) -> tuple[float, float]:
    rng = np.random.default_rng([spec.seed, 41 if which == "left" else 43])
    orient = rng.uniform(0, 2 * math.pi)
    phase = rng.uniform(0, 2 * math.pi)
    base_bend = rng.uniform(0.45, 0.75)
    amp = rng.uniform(0.2, 0.4)
    bend = base_bend + amp * math.sin(2 * math.pi * t / max(spec.n_frames, 1) + phase)
    return bend, orient


def _paste_glyph(canvas: np.ndarray, rgb: np.ndarray, ink: np.ndarray, cx: float, cy: float):
    size = rgb.shape[0]
    H, W = canvas.shape[:2]
    x0 = int(round(cx - size / 2.0))
    y0 = int(round(cy - size / 2.0))
    x0 = min(max(x0, 0), W - size)
    y0 = min(max(y0, 0), H - size)
    region = canvas[y0 : y0 + size, x0 : x0 + size]
    region[ink] = rgb[ink]


def render_hand_layer(
    spec: SceneSpec,
    layout: LayoutSequence,
    t: int,
    offsets: Optional[dict[str, tuple[float, float]]] = None,
) -> np.ndarray:
    """Hand glyphs for frame t on black, optionally with per-hand shifts; uint8."""
    W, H = spec.frame_size
    canvas = np.zeros((H, W, 3), dtype=np.float32)
    frame = layout.frames[t]
    size = int(round(spec.s_hand))
    for which, box in (("left", frame.left_hand), ("right", frame.right_hand)):
        if box is None:
            continue
        bend, orient = _hand_pose(spec, which, t)
        rgb, ink = _render_glyph(size, bend, orient, _hand_color(spec, which))
        cx, cy = box.center
        if offsets is not None and which in offsets:
            cx += offsets[which][0]
            cy += offsets[which][1]
        _paste_glyph(canvas, rgb, ink, cx, cy)
    return (np.clip(canvas, 0, 1) * 255).round().astype(np.uint8)


def _fill_box_mask(mask: np.ndarray, box: Box) -> None:
    h, w = mask.shape
    x0 = min(max(int(math.ceil(box.x_min)), 0), w)
    x1 = min(max(int(math.ceil(box.x_max)), 0), w)
    y0 = min(max(int(math.ceil(box.y_min)), 0), h)
    y1 = min(max(int(math.ceil(box.y_max)), 0), h)
    mask[y0:y1, x0:x1] = 1


def generate_clip(spec: SceneSpec) -> SyntheticClip:
    """Render a full clip from the scene spec. Deterministic in the spec."""
    W, H = spec.frame_size
    layout = build_layout(spec)
    background = _background(spec)
    texture, support = _object_sprite(spec)

    frames = np.zeros((spec.n_frames, H, W, 3), dtype=np.uint8)
    renders = np.zeros_like(frames)
    hand_masks = np.zeros((spec.n_frames, H, W), dtype=np.uint8)
    object_masks = np.zeros_like(hand_masks)

    for t in range(spec.n_frames):
        frame_img = background.copy()
        lf = layout.frames[t]
        # paste the object sprite at its box (rounding may overhang by a pixel)
        x0 = int(math.ceil(lf.obj.x_min))
        y0 = int(math.ceil(lf.obj.y_min))
        ph, pw = support.shape
        y1, x1 = min(y0 + ph, H), min(x0 + pw, W)
        sup = support[: y1 - y0, : x1 - x0]
        region = frame_img[y0:y1, x0:x1]
        region[sup] = texture[: y1 - y0, : x1 - x0][sup]
        object_masks[t, y0:y1, x0:x1][sup] = 1

        hands = render_hand_layer(spec, layout, t)
        hand_ink = hands.any(axis=-1)
        frame_uint8 = (np.clip(frame_img, 0, 1) * 255).round().astype(np.uint8)
        frame_uint8[hand_ink] = hands[hand_ink]
        frames[t] = frame_uint8
        renders[t] = hands
        for _, hb in lf.hands():
            _fill_box_mask(hand_masks[t], hb)

    # reference image: the object sprite centered on a neutral gray background
    ref = np.full((H, W, 3), 0.5, dtype=np.float32)
    ph, pw = support.shape
    ry, rx = max((H - ph) // 2, 0), max((W - pw) // 2, 0)
    sup = support[: H - ry, : W - rx]
    ref_region = ref[ry : ry + sup.shape[0], rx : rx + sup.shape[1]]
    ref_region[sup] = texture[: sup.shape[0], : sup.shape[1]][sup]
    reference = (ref * 255).round().astype(np.uint8)

    return SyntheticClip(
        frames=frames,
        hand_renders=renders,
        hand_masks=hand_masks,
        object_masks=object_masks,
        reference_image=reference,
        layout=layout,
        spec=spec,
    )


def augment_hand_positions(clip: SyntheticClip, max_shift: float, seed: int) -> np.ndarray:
    """Hand renderings with each hand translated by an independent uniform shift.

    Only the renderings move; frames, masks, and layout stay as generated.
    Shifted glyphs are clamped at the frame edge. Returns (F, H, W, 3) uint8.
    """
    if max_shift < 0:
        raise ValueError("max_shift must be >= 0")
    rng = np.random.default_rng(seed)
    offsets = {
        "left": tuple(rng.uniform(-max_shift, max_shift, size=2)),
        "right": tuple(rng.uniform(-max_shift, max_shift, size=2)),
    }
    out = np.zeros_like(clip.hand_renders)
    for t in range(clip.n_frames):
        out[t] = render_hand_layer(clip.spec, clip.layout, t, offsets=offsets)
    return out


def random_scene_spec(
    seed: int,
    frame_size: tuple[int, int] = (256, 256),
    n_frames: Optional[int] = None,
    s_hand: float = 40.0,
    contact_prob: float = 0.7,
) -> SceneSpec:
    """Seeded random scene: a moving textured object with one or two hands,
    most of them declared in contact with a side of the object."""
    rng = np.random.default_rng(seed)
    W, H = frame_size
    if n_frames is None:
        n_frames = int(rng.integers(8, 25))
    lo = max(16.0, 0.15 * min(W, H))
    w_obj = float(rng.uniform(lo, max(lo + 1, min(110, 0.4 * W))))
    h_obj = float(rng.uniform(lo, max(lo + 1, min(110, 0.4 * H))))
    # keep contact hands comfortably inside the frame where room permits
    margin_x = max(w_obj / 2 + 2, min(w_obj / 2 + s_hand + 22, W / 2 - 1))
    margin_y = max(h_obj / 2 + 2, min(h_obj / 2 + s_hand + 22, H / 2 - 1))

    def obj_center():
        return (float(rng.uniform(margin_x, W - margin_x)), float(rng.uniform(margin_y, H - margin_y)))

    def hand_key(present: bool):
        if not present:
            return None
        if rng.random() < contact_prob:
            side = ("top", "bottom", "left", "right")[rng.integers(0, 4)]
            gap = float(rng.uniform(s_hand * 0.4, s_hand / 2 + 12))
            return HandKey(contact_side=side, gap=gap)
        return HandKey(center=(float(rng.uniform(s_hand, W - s_hand)), float(rng.uniform(s_hand, H - s_hand))))

    has_left = rng.random() < 0.9
    has_right = rng.random() < 0.9
    if not (has_left or has_right):
        has_left = True
    times = [0.0, float(n_frames - 1)] if n_frames > 1 else [0.0]
    if n_frames > 6 and rng.random() < 0.5:
        times = [0.0, float(n_frames // 2), float(n_frames - 1)]
    keyframes = tuple(
        Keyframe(t=t, object_center=obj_center(), left=hand_key(has_left), right=hand_key(has_right))
        for t in times
    )
    return SceneSpec(
        seed=int(seed),
        object_shape=OBJECT_SHAPES[rng.integers(0, len(OBJECT_SHAPES))],
        object_texture_seed=int(rng.integers(0, 2**31)),
        object_size=(w_obj, h_obj),
        background_seed=int(rng.integers(0, 2**31)),
        motion=MotionScript(keyframes),
        n_frames=n_frames,
        frame_size=frame_size,
        fps=25.0,
        s_hand=s_hand,
    )


# ---------------------------------------------------------------------------
# dataset persistence
# ---------------------------------------------------------------------------

_REQUIRED_DIRS = ("frames", "hand", "mask_hand", "mask_obj")


def _save_png(path: Path, arr: np.ndarray) -> None:
    Image.fromarray(arr).save(path)


def _load_png(path: Path, clip_id: str, frame: Optional[int] = None) -> np.ndarray:
    where = f"{clip_id}" + ("" if frame is None else f" frame {frame}")
    if not path.exists():
        raise DatasetError(f"missing file for {where}: {path}")
    try:
        return np.asarray(Image.open(path))
    except Exception as exc:
        raise DatasetError(f"corrupt file for {where}: {path} ({exc})") from exc


def write_dataset(clips, root_path) -> dict:
    """Write clips under root_path, one directory per clip; returns the manifest."""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for idx, clip in enumerate(clips):
        clip_id = f"clip_{idx:04d}"
        cdir = root / clip_id
        for sub in _REQUIRED_DIRS:
            (cdir / sub).mkdir(parents=True, exist_ok=True)
        for t in range(clip.n_frames):
            _save_png(cdir / "frames" / f"{t:06d}.png", clip.frames[t])
            _save_png(cdir / "hand" / f"{t:06d}.png", clip.hand_renders[t])
            _save_png(cdir / "mask_hand" / f"{t:06d}.png", clip.hand_masks[t] * 255)
            _save_png(cdir / "mask_obj" / f"{t:06d}.png", clip.object_masks[t] * 255)
        _save_png(cdir / "ref.png", clip.reference_image)
        from .layout import write_layout_jsonl

        write_layout_jsonl(clip.layout, cdir / "layout.jsonl")
        meta = {"spec": clip.spec.to_dict(), "generator_version": GENERATOR_VERSION}
        (cdir / "meta.json").write_text(json.dumps(meta, indent=1))
        W, H = clip.spec.frame_size
        entries.append({"id": clip_id, "n_frames": clip.n_frames, "width": W, "height": H})
    manifest = {"version": GENERATOR_VERSION, "clips": entries}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return manifest


def read_dataset(root_path) -> dict:
    """Validate the dataset layout under root_path and return its manifest."""
    root = Path(root_path)
    mpath = root / "manifest.json"
    if not mpath.exists():
        raise DatasetError(f"missing manifest: {mpath}")
    manifest = json.loads(mpath.read_text())
    for entry in manifest["clips"]:
        cdir = root / entry["id"]
        if not cdir.is_dir():
            raise DatasetError(f"missing clip directory: {entry['id']}")
        for fname in ("ref.png", "layout.jsonl", "meta.json"):
            if not (cdir / fname).exists():
                raise DatasetError(f"{entry['id']}: missing {fname}")
        for sub in _REQUIRED_DIRS:
            for t in range(entry["n_frames"]):
                p = cdir / sub / f"{t:06d}.png"
                if not p.exists():
                    raise DatasetError(f"{entry['id']}: missing {sub} frame {t}")
    return manifest


def load_clip(root_path, clip_id: str) -> SyntheticClip:
    """Materialize one clip from disk."""
    from .layout import read_layout_jsonl

    root = Path(root_path)
    cdir = root / clip_id
    meta_path = cdir / "meta.json"
    if not meta_path.exists():
        raise DatasetError(f"{clip_id}: missing meta.json")
    meta = json.loads(meta_path.read_text())
    spec = SceneSpec.from_dict(meta["spec"])
    layout = read_layout_jsonl(cdir / "layout.jsonl")

    def stack(sub):
        return np.stack(
            [_load_png(cdir / sub / f"{t:06d}.png", clip_id, t) for t in range(spec.n_frames)]
        )

    frames = stack("frames")
    renders = stack("hand")
    hand_masks = (stack("mask_hand") > 127).astype(np.uint8)
    object_masks = (stack("mask_obj") > 127).astype(np.uint8)
    reference = _load_png(cdir / "ref.png", clip_id)
    return SyntheticClip(
        frames=frames,
        hand_renders=renders,
        hand_masks=hand_masks,
        object_masks=object_masks,
        reference_image=reference,
        layout=layout,
        spec=spec,
    )
