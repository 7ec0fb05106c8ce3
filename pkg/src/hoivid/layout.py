"""Box geometry, contact detection, adaptive layout adjustment, and rasterization.

Layouts are per-frame triples of axis-aligned boxes: two fixed-size square
hand boxes plus one variable-size object box. Coordinates are continuous,
origin top-left, y increasing downward.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

SIDES = ("top", "bottom", "left", "right")

# Extra slack beyond half the hand box side when deciding contact.
CONTACT_MARGIN = 20.0


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with strictly positive width and height."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(
                f"degenerate box: ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def translated(self, dx: float, dy: float) -> "Box":
        return Box(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


def square_box(cx: float, cy: float, side: float) -> Box:
    """Square of exactly `side`, centered at (cx, cy)."""
    x0 = cx - side / 2.0
    y0 = cy - side / 2.0
    return Box(x0, y0, x0 + side, y0 + side)


@dataclass(frozen=True)
class LayoutFrame:
    """One frame of layout guidance: optional hand boxes plus the object box.

    `flags` carries adjustment metadata (e.g. "left_hand:clamped"); it is not
    part of the on-disk layout record.
    """

    frame_index: int
    left_hand: Optional[Box]
    right_hand: Optional[Box]
    obj: Box
    flags: tuple[str, ...] = ()

    def hands(self) -> list[tuple[str, Box]]:
        out = []
        if self.left_hand is not None:
            out.append(("left_hand", self.left_hand))
        if self.right_hand is not None:
            out.append(("right_hand", self.right_hand))
        return out


@dataclass(frozen=True)
class LayoutSequence:
    frames: tuple[LayoutFrame, ...]
    width: int
    height: int
    fps: float
    s_hand: float = 40.0

    def __post_init__(self):
        if len(self.frames) == 0:
            raise ValueError("empty layout sequence")
        object.__setattr__(self, "frames", tuple(self.frames))
        for i, f in enumerate(self.frames):
            if f.frame_index != i:
                raise ValueError(f"frame_index {f.frame_index} at position {i}")
            for b in [f.obj] + [h for _, h in f.hands()]:
                if b.x_min < -1e-9 or b.y_min < -1e-9 or b.x_max > self.width + 1e-9 or b.y_max > self.height + 1e-9:
                    raise ValueError(f"box out of bounds at frame {i}: {b}")
            for name, h in f.hands():
                if abs(h.width - self.s_hand) > 1e-6 or abs(h.height - self.s_hand) > 1e-6:
                    raise ValueError(f"{name} at frame {i} is not an s_hand square")

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class ContactState:
    in_contact: bool
    h2o_distance: float
    nearest_side: str


@dataclass(frozen=True)
class SizeSpec:
    """Replacement object's box dimensions at the reference frame."""

    target_width: float
    target_height: float

    def __post_init__(self):
        if self.target_width <= 0 or self.target_height <= 0:
            raise ValueError("SizeSpec dimensions must be strictly positive")


def contact_points(b: Box) -> tuple[tuple[float, float], ...]:
    """Midpoints of the four sides, in the fixed order top, bottom, left, right."""
    cx, cy = b.center
    return (
        (cx, b.y_min),
        (cx, b.y_max),
        (b.x_min, cy),
        (b.x_max, cy),
    )


def h2o_distance(hand: Box, obj: Box) -> tuple[float, str]:
    """Distance from the hand-box center to the nearest object contact point.

    Ties between sides are broken by the fixed order top, bottom, left, right.
    """
    hx, hy = hand.center
    best_d = math.inf
    best_side = SIDES[0]
    for side, (px, py) in zip(SIDES, contact_points(obj)):
        d = math.hypot(hx - px, hy - py)
        if d < best_d:
            best_d = d
            best_side = side
    return best_d, best_side


def contact_threshold(s_hand: float) -> float:
    """Contact threshold: half the hand box side plus a fixed 20 px margin."""
    return s_hand / 2.0 + CONTACT_MARGIN


def detect_contact(hand: Box, obj: Box, s_hand: float) -> ContactState:
    """Classify the hand/object pair via the H2O distance (strict `<` threshold)."""
    d, side = h2o_distance(hand, obj)
    return ContactState(in_contact=d < contact_threshold(s_hand), h2o_distance=d, nearest_side=side)


def _side_of(x: float, cx: float) -> int:
    if x < cx:
        return -1
    if x > cx:
        return 1
    return 0


def _pick_root(px: float, delta: float, hand_x: float, obj_cx: float) -> float:
    """Choose between the two horizontal solutions px +- delta.

    Preference: roots on the hand's original side of the object's vertical
    center line; remaining ties resolved by proximity to the original x.
    """
    candidates = [px - delta, px + delta]
    hand_side = _side_of(hand_x, obj_cx)
    if hand_side != 0:
        on_side = [x for x in candidates if _side_of(x, obj_cx) in (hand_side, 0)]
        if len(on_side) == 1:
            return on_side[0]
        if len(on_side) == 2:
            candidates = on_side
    return min(candidates, key=lambda x: (abs(x - hand_x), x))


def adjust_layout(
    src: LayoutFrame,
    spec: SizeSpec,
    s_hand: float,
    *,
    bounds: Optional[tuple[float, float]] = None,
    ref_obj_size: Optional[tuple[float, float]] = None,
    co_translate_hands: bool = False,
) -> LayoutFrame:
    """Four-step adaptive adjustment of one layout frame to a new object size.

    1. Contact states of each hand against the original object box.
    2. Object box rescaled about its fixed center by the ratios of `spec` to
       the reference object dimensions (this frame's box unless `ref_obj_size`
       is given), applied to this frame's box.
    3. Each in-contact hand translated horizontally so its distance to the
       contact point on its original nearest side of the resized box equals
       the original H2O distance; with no horizontal solution the hand center
       is clamped to the contact point's x and flagged.
    4. Object box translated vertically until its bottom matches the original
       bottom edge. Hands stay put unless `co_translate_hands` is set.

    Result is clipped to `bounds` (W, H) when given; hand boxes are shifted,
    never shrunk, so they stay exact squares.
    """
    obj = src.obj
    if ref_obj_size is None:
        ref_w, ref_h = obj.width, obj.height
    else:
        ref_w, ref_h = ref_obj_size
    if ref_w <= 0 or ref_h <= 0:
        raise ValueError("reference object dimensions must be positive")
    r_w = spec.target_width / ref_w
    r_h = spec.target_height / ref_h

    # Step 1: contact relationship against the original box.
    states = {name: detect_contact(hand, obj, s_hand) for name, hand in src.hands()}

    # Step 2: rescale about the fixed center. Ratios of exactly 1.0 keep the
    # original extents so the identity spec is bitwise idempotent.
    cx, cy = obj.center
    half_w = obj.width * r_w / 2.0
    half_h = obj.height * r_h / 2.0
    if half_w <= 0 or half_h <= 0:
        raise ValueError("size spec produces an empty object box")
    rx = (obj.x_min, obj.x_max) if r_w == 1.0 else (cx - half_w, cx + half_w)
    ry = (obj.y_min, obj.y_max) if r_h == 1.0 else (cy - half_h, cy + half_h)
    resized = Box(rx[0], ry[0], rx[1], ry[1])
    if resized == obj:
        return LayoutFrame(src.frame_index, src.left_hand, src.right_hand, obj, flags=())

    # Step 3: horizontal hand adjustment against the resized (pre-drop) box.
    flags: list[str] = []
    new_hand: dict[str, Optional[Box]] = {"left_hand": src.left_hand, "right_hand": src.right_hand}
    for name, hand in src.hands():
        st = states[name]
        if not st.in_contact:
            continue
        hx, hy = hand.center
        pts = dict(zip(SIDES, contact_points(resized)))
        px, py = pts[st.nearest_side]
        gap_sq = st.h2o_distance**2 - (hy - py) ** 2
        if gap_sq < 0:
            nx = px
            flags.append(f"{name}:clamped")
        else:
            nx = _pick_root(px, math.sqrt(gap_sq), hx, cx)
            # The solved position can, in contrived geometries, sit nearer a
            # different side of the resized box; flag it so callers know the
            # nearest-point distance was not exactly preserved.
            check, _ = h2o_distance(square_box(nx, hy, s_hand), resized)
            if abs(check - st.h2o_distance) > 1e-9 * max(1.0, st.h2o_distance):
                flags.append(f"{name}:h2o_approx")
        new_hand[name] = square_box(nx, hy, s_hand)

    # Step 4: vertical drop so the bottom edge matches the original.
    dy = obj.y_max - resized.y_max
    final_obj = resized.translated(0.0, dy)
    if co_translate_hands:
        for name in new_hand:
            if new_hand[name] is not None and name in states and states[name].in_contact:
                new_hand[name] = new_hand[name].translated(0.0, dy)

    if bounds is not None:
        w_lim, h_lim = bounds
        clipped = Box(
            max(0.0, final_obj.x_min),
            max(0.0, final_obj.y_min),
            min(float(w_lim), final_obj.x_max),
            min(float(h_lim), final_obj.y_max),
        )
        if (clipped.x_min, clipped.y_min, clipped.x_max, clipped.y_max) != (
            final_obj.x_min,
            final_obj.y_min,
            final_obj.x_max,
            final_obj.y_max,
        ):
            flags.append("object:clipped")
        final_obj = clipped
        for name in new_hand:
            hand = new_hand[name]
            if hand is None:
                continue
            shifted = _shift_into_bounds(hand, w_lim, h_lim)
            if shifted is not hand:
                flags.append(f"{name}:edge")
            new_hand[name] = shifted

    return LayoutFrame(
        frame_index=src.frame_index,
        left_hand=new_hand["left_hand"],
        right_hand=new_hand["right_hand"],
        obj=final_obj,
        flags=tuple(flags),
    )


def _shift_into_bounds(box: Box, w_lim: float, h_lim: float) -> Box:
    if box.width > w_lim or box.height > h_lim:
        raise ValueError("box larger than frame bounds")
    dx = max(0.0, -box.x_min) + min(0.0, w_lim - box.x_max)
    dy = max(0.0, -box.y_min) + min(0.0, h_lim - box.y_max)
    if dx == 0.0 and dy == 0.0:
        return box
    return box.translated(dx, dy)


def adjust_sequence(
    src: LayoutSequence,
    spec: SizeSpec,
    s_hand: Optional[float] = None,
    *,
    co_translate_hands: bool = False,
) -> LayoutSequence:
    """Per-frame layout adjustment, with size ratios anchored to the first frame's object box."""
    if s_hand is None:
        s_hand = src.s_hand
    first = src.frames[0].obj
    ref = (first.width, first.height)
    frames = tuple(
        adjust_layout(
            f,
            spec,
            s_hand,
            bounds=(src.width, src.height),
            ref_obj_size=ref,
            co_translate_hands=co_translate_hands,
        )
        for f in src.frames
    )
    return LayoutSequence(frames=frames, width=src.width, height=src.height, fps=src.fps, s_hand=src.s_hand)


# Guidance-image colors: object red, left hand blue, right hand green.
_OBJECT_COLOR = (1.0, 0.0, 0.0)
_LEFT_COLOR = (0.0, 0.0, 1.0)
_RIGHT_COLOR = (0.0, 1.0, 0.0)


def _fill(img: np.ndarray, box: Box, color: tuple[float, float, float]) -> None:
    h, w = img.shape[:2]
    # Half-open pixel coverage: index i is inside iff lo <= i < hi.
    x0 = min(max(int(math.ceil(box.x_min)), 0), w)
    x1 = min(max(int(math.ceil(box.x_max)), 0), w)
    y0 = min(max(int(math.ceil(box.y_min)), 0), h)
    y1 = min(max(int(math.ceil(box.y_max)), 0), h)
    img[y0:y1, x0:x1] = color


def rasterize_layout(frame: LayoutFrame, width: int, height: int) -> np.ndarray:
    """Color-coded guidance image (H, W, 3) float32 in [0, 1].

    Filled rectangles drawn object first, then left hand, then right hand, so
    hands overwrite the object on overlap. Background stays black.
    """
    img = np.zeros((height, width, 3), dtype=np.float32)
    _fill(img, frame.obj, _OBJECT_COLOR)
    if frame.left_hand is not None:
        _fill(img, frame.left_hand, _LEFT_COLOR)
    if frame.right_hand is not None:
        _fill(img, frame.right_hand, _RIGHT_COLOR)
    return img


def _box_to_json(box: Optional[Box]):
    return None if box is None else box.as_list()


def _box_from_json(value) -> Optional[Box]:
    if value is None:
        return None
    return Box(*map(float, value))


def write_layout_jsonl(seq: LayoutSequence, path) -> None:
    """Layout file: a header line, then one record per frame."""
    path = Path(path)
    with path.open("w") as fh:
        header = {"width": seq.width, "height": seq.height, "fps": seq.fps, "s_hand": seq.s_hand}
        fh.write(json.dumps(header) + "\n")
        for f in seq.frames:
            rec = {
                "frame": f.frame_index,
                "left_hand": _box_to_json(f.left_hand),
                "right_hand": _box_to_json(f.right_hand),
                "object": f.obj.as_list(),
            }
            fh.write(json.dumps(rec) + "\n")


def read_layout_jsonl(path) -> LayoutSequence:
    path = Path(path)
    with path.open() as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"empty layout file: {path}")
    header = json.loads(lines[0])
    for key in ("width", "height", "fps", "s_hand"):
        if key not in header:
            raise ValueError(f"layout header missing '{key}': {path}")
    frames = []
    for i, ln in enumerate(lines[1:]):
        rec = json.loads(ln)
        if rec["frame"] != i:
            raise ValueError(f"non-contiguous frame index {rec['frame']} at line {i + 2}")
        frames.append(
            LayoutFrame(
                frame_index=i,
                left_hand=_box_from_json(rec["left_hand"]),
                right_hand=_box_from_json(rec["right_hand"]),
                obj=_box_from_json(rec["object"]),
            )
        )
    return LayoutSequence(
        frames=tuple(frames),
        width=int(header["width"]),
        height=int(header["height"]),
        fps=float(header["fps"]),
        s_hand=float(header["s_hand"]),
    )
