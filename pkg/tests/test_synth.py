import numpy as np
import pytest

from hoivid.layout import contact_threshold, h2o_distance
from hoivid.synth import (
    DatasetError,
    HandKey,
    Keyframe,
    MotionScript,
    SceneSpec,
    augment_hand_positions,
    generate_clip,
    load_clip,
    random_scene_spec,
    read_dataset,
    write_dataset,
)


def simple_spec(n_frames=4, seed=0, size=(64, 48), shape="rectangle", frame=(160, 160)):
    motion = MotionScript(
        (
            Keyframe(0.0, (70.0, 80.0), left=HandKey(contact_side="left", gap=20.0),
                     right=HandKey(center=(130.0, 40.0))),
            Keyframe(float(max(n_frames - 1, 1)), (90.0, 80.0),
                     left=HandKey(contact_side="left", gap=20.0),
                     right=HandKey(center=(120.0, 50.0))),
        )
    )
    return SceneSpec(
        seed=seed,
        object_shape=shape,
        object_texture_seed=seed + 1,
        object_size=size,
        background_seed=seed + 2,
        motion=motion,
        n_frames=n_frames,
        frame_size=frame,
        fps=25.0,
        s_hand=24.0,
    )


def mask_bbox(mask):
    ys, xs = np.nonzero(mask)
    return xs.min(), ys.min(), xs.max() + 1, ys.max() + 1


class TestGenerateClip:
    def test_deterministic(self):
        a = generate_clip(simple_spec())
        b = generate_clip(simple_spec())
        assert np.array_equal(a.frames, b.frames)
        assert np.array_equal(a.hand_renders, b.hand_renders)
        assert np.array_equal(a.hand_masks, b.hand_masks)
        assert np.array_equal(a.object_masks, b.object_masks)
        assert np.array_equal(a.reference_image, b.reference_image)

    def test_single_frame(self):
        spec = simple_spec(n_frames=1)
        clip = generate_clip(spec)
        assert clip.frames.shape == (1, 160, 160, 3)
        assert clip.hand_masks.shape == (1, 160, 160)
        assert len(clip.layout) == 1

    def test_object_box_matches_object_size(self):
        spec = simple_spec(size=(40, 80), frame=(256, 256))
        clip = generate_clip(spec)
        for f in clip.layout.frames:
            assert f.obj.width == pytest.approx(40.0)
            assert f.obj.height == pytest.approx(80.0)
        # mask bounding box agrees with the generator's own ground truth
        for t in range(clip.n_frames):
            x0, y0, x1, y1 = mask_bbox(clip.object_masks[t])
            box = clip.layout.frames[t].obj
            assert abs(x0 - box.x_min) <= 1.0 and abs(x1 - box.x_max) <= 1.0
            assert abs(y0 - box.y_min) <= 1.0 and abs(y1 - box.y_max) <= 1.0

    def test_masks_are_binary(self):
        clip = generate_clip(simple_spec(shape="ellipse"))
        assert set(np.unique(clip.hand_masks)) <= {0, 1}
        assert set(np.unique(clip.object_masks)) <= {0, 1}

    def test_mask_layout_agreement_random_specs(self):
        for seed in range(12):
            spec = random_scene_spec(seed, frame_size=(192, 192), n_frames=3, s_hand=20.0)
            clip = generate_clip(spec)
            for t in range(clip.n_frames):
                x0, y0, x1, y1 = mask_bbox(clip.object_masks[t])
                box = clip.layout.frames[t].obj
                assert abs(x0 - box.x_min) <= 1.0 and abs(x1 - box.x_max) <= 1.0
                assert abs(y0 - box.y_min) <= 1.0 and abs(y1 - box.y_max) <= 1.0

    def test_hand_box_centered_on_glyph_centroid(self):
        spec = simple_spec(frame=(256, 256))
        clip = generate_clip(spec)
        s = spec.s_hand
        for t in range(clip.n_frames):
            frame = clip.layout.frames[t]
            for _, box in frame.hands():
                cx, cy = box.center
                x0, y0 = max(0, int(cx - s)), max(0, int(cy - s))
                win = clip.hand_renders[t, y0 : int(cy + s), x0 : int(cx + s)]
                ys, xs = np.nonzero(win.any(axis=-1))
                assert len(xs) > 0
                assert abs(xs.mean() + x0 - cx) <= 2.0
                assert abs(ys.mean() + y0 - cy) <= 2.0

    def test_declared_contact_is_within_threshold(self):
        spec = simple_spec()
        clip = generate_clip(spec)
        for f in clip.layout.frames:
            d, side = h2o_distance(f.left_hand, f.obj)
            assert d < contact_threshold(spec.s_hand)
            assert side == "left"

    def test_script_leaving_frame_rejected(self):
        motion = MotionScript((Keyframe(0.0, (10.0, 80.0), left=HandKey(center=(100, 100))),))
        spec = SceneSpec(
            seed=0, object_shape="rectangle", object_texture_seed=1,
            object_size=(64, 48), background_seed=2, motion=motion,
            n_frames=1, frame_size=(160, 160),
        )
        with pytest.raises(ValueError, match="frame edge"):
            generate_clip(spec)

    def test_distinct_texture_seeds_differ(self):
        a = generate_clip(simple_spec(seed=0))
        b_spec = simple_spec(seed=0)
        b_spec = SceneSpec.from_dict({**b_spec.to_dict(), "object_texture_seed": 999})
        b = generate_clip(b_spec)
        assert not np.array_equal(a.reference_image, b.reference_image)


class TestAugmentation:
    def test_zero_shift_is_identity(self):
        clip = generate_clip(simple_spec())
        out = augment_hand_positions(clip, 0.0, seed=5)
        assert np.array_equal(out, clip.hand_renders)

    def test_reproducible(self):
        clip = generate_clip(simple_spec())
        a = augment_hand_positions(clip, 10.0, seed=5)
        b = augment_hand_positions(clip, 10.0, seed=5)
        assert np.array_equal(a, b)
        c = augment_hand_positions(clip, 10.0, seed=6)
        assert not np.array_equal(a, c)

    def test_does_not_touch_other_arrays(self):
        clip = generate_clip(simple_spec())
        frames = clip.frames.copy()
        masks = clip.hand_masks.copy()
        augment_hand_positions(clip, 12.0, seed=1)
        assert np.array_equal(clip.frames, frames)
        assert np.array_equal(clip.hand_masks, masks)

    def test_measured_centroid_shift_within_bounds(self):
        # hands far apart so each centroid can be measured in its own window
        motion = MotionScript(
            (
                Keyframe(0.0, (128.0, 128.0), left=HandKey(center=(60.0, 60.0)),
                         right=HandKey(center=(200.0, 200.0))),
            )
        )
        spec = SceneSpec(
            seed=3, object_shape="rectangle", object_texture_seed=4,
            object_size=(60, 40), background_seed=5, motion=motion,
            n_frames=2, frame_size=(256, 256), s_hand=40.0,
        )
        clip = generate_clip(spec)
        out = augment_hand_positions(clip, 16.0, seed=11)

        def centroid(img, cx, cy, r=60):
            win = img[cy - r : cy + r, cx - r : cx + r]
            ys, xs = np.nonzero(win.any(axis=-1))
            return xs.mean(), ys.mean()

        for (cx, cy) in ((60, 60), (200, 200)):
            for t in range(clip.n_frames):
                ox, oy = centroid(clip.hand_renders[t], cx, cy)
                nx, ny = centroid(out[t], cx, cy)
                assert -16.0 <= nx - ox <= 16.0
                assert -16.0 <= ny - oy <= 16.0


class TestDatasetIO:
    def test_round_trip(self, tmp_path):
        clips = [generate_clip(simple_spec(seed=s)) for s in range(2)]
        manifest = write_dataset(clips, tmp_path / "ds")
        back = read_dataset(tmp_path / "ds")
        assert manifest == back
        for i, clip in enumerate(clips):
            loaded = load_clip(tmp_path / "ds", f"clip_{i:04d}")
            assert np.array_equal(loaded.hand_masks, clip.hand_masks)
            assert np.array_equal(loaded.object_masks, clip.object_masks)
            assert np.array_equal(loaded.frames, clip.frames)
            assert np.array_equal(loaded.hand_renders, clip.hand_renders)
            assert np.array_equal(loaded.reference_image, clip.reference_image)
            assert loaded.spec == clip.spec
            for a, b in zip(loaded.layout.frames, clip.layout.frames):
                assert a.obj == b.obj
                assert a.left_hand == b.left_hand

    def test_empty_clip_list(self, tmp_path):
        manifest = write_dataset([], tmp_path / "empty")
        assert manifest["clips"] == []
        assert [p.name for p in (tmp_path / "empty").iterdir()] == ["manifest.json"]

    def test_three_clips_manifest(self, tmp_path):
        clips = [generate_clip(simple_spec(seed=s, n_frames=3 + s)) for s in range(3)]
        manifest = write_dataset(clips, tmp_path / "ds3")
        assert len(manifest["clips"]) == 3
        assert [e["n_frames"] for e in manifest["clips"]] == [3, 4, 5]

    def test_missing_file_reported_with_clip_and_frame(self, tmp_path):
        clips = [generate_clip(simple_spec())]
        write_dataset(clips, tmp_path / "ds")
        (tmp_path / "ds" / "clip_0000" / "frames" / "000002.png").unlink()
        with pytest.raises(DatasetError, match="clip_0000.*frames.*2"):
            read_dataset(tmp_path / "ds")

    def test_corrupt_file_reported(self, tmp_path):
        clips = [generate_clip(simple_spec())]
        write_dataset(clips, tmp_path / "ds")
        (tmp_path / "ds" / "clip_0000" / "ref.png").write_bytes(b"not a png")
        with pytest.raises(DatasetError, match="clip_0000"):
            load_clip(tmp_path / "ds", "clip_0000")


class TestSpecValidation:
    def test_hand_key_needs_one_of(self):
        with pytest.raises(ValueError):
            HandKey()
        with pytest.raises(ValueError):
            HandKey(center=(1, 2), contact_side="left")

    def test_inconsistent_presence_rejected(self):
        with pytest.raises(ValueError, match="presence"):
            MotionScript(
                (
                    Keyframe(0.0, (50, 50), left=HandKey(center=(10, 10))),
                    Keyframe(1.0, (50, 50), left=None),
                )
            )

    def test_random_specs_generate(self):
        for seed in (0, 1, 2):
            clip = generate_clip(random_scene_spec(seed, frame_size=(128, 128), n_frames=2, s_hand=16.0))
            assert clip.frames.shape[0] == 2
