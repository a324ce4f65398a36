"""Frame ingestion, background construction and foreground segmentation.

Images are plain numpy arrays: a gray image is ``(height, width)`` uint8,
a color image is ``(height, width, 3)`` uint8 in R, G, B order, and a
binary mask is a ``(height, width)`` bool array (True = foreground).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image
from scipy import ndimage

DEFAULT_THETA = 15
DEFAULT_MORPH_RADIUS = 1


class ImageError(ValueError):
    """Unreadable, malformed or inconsistent image input."""


@dataclass
class ImageStack:
    """Ordered color frames sharing one size; slice numbers run 1..len."""

    frames: np.ndarray  # (n, height, width, 3) uint8
    frame_interval: float = 1.0

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.uint8)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise ImageError(f"expected (n, h, w, 3) frames, got {self.frames.shape}")
        if not self.frame_interval > 0:
            raise ImageError("frame interval must be positive")

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames.shape[1], self.frames.shape[2]

    def slices(self):
        """Yield ``(slice_number, frame)`` with slice numbers starting at 1."""
        for i, frame in enumerate(self.frames):
            yield i + 1, frame


def as_color(image: np.ndarray) -> np.ndarray:
    """Promote a gray image to three identical planes; color passes through."""
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim == 2:
        return np.repeat(image[:, :, None], 3, axis=2)
    if image.ndim == 3 and image.shape[2] == 3:
        return image
    raise ImageError(f"not a gray or RGB image: shape {image.shape}")


def read_netpbm(path) -> np.ndarray:
    """Read a binary PGM (P5) or PPM (P6) file with maxval 255."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            magic = fh.read(2)
    except OSError as exc:
        raise ImageError(f"{path}: cannot read ({exc.strerror})") from exc
    if magic not in (b"P5", b"P6"):
        raise ImageError(f"{path}: malformed header, expected P5 or P6 magic")
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            data = np.asarray(img)
    except Exception as exc:  # PIL raises a zoo of exception types here
        raise ImageError(f"{path}: malformed image ({exc})") from exc
    if mode not in ("L", "RGB"):
        raise ImageError(f"{path}: unsupported maxval (mode {mode}); only 255 is accepted")
    return data.astype(np.uint8)


def write_netpbm(path, image: np.ndarray) -> None:
    """Write a gray image as P5 or a color image as P6."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    if image.ndim == 2:
        magic = b"P5"
    elif image.ndim == 3 and image.shape[2] == 3:
        magic = b"P6"
    else:
        raise ImageError(f"cannot write image of shape {image.shape}")
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(image.tobytes())


def write_mask(path, mask: np.ndarray) -> None:
    """Export a mask as PGM, 0 = background and 255 = foreground."""
    write_netpbm(path, np.where(mask, 255, 0).astype(np.uint8))


def load_image_sequence(paths: Sequence, frame_interval: float = 1.0) -> ImageStack:
    paths = list(paths)
    if not paths:
        raise ImageError("empty sequence")
    frames = []
    for i, path in enumerate(paths):
        frame = as_color(read_netpbm(path))
        if frames and frame.shape != frames[0].shape:
            h0, w0 = frames[0].shape[:2]
            h, w = frame.shape[:2]
            raise ImageError(
                f"{path}: dimension mismatch at frame {i + 1} "
                f"({w}x{h}, expected {w0}x{h0})"
            )
        frames.append(frame)
    return ImageStack(np.stack(frames), frame_interval)


def median_background(stack: ImageStack) -> np.ndarray:
    """Per-pixel, per-channel lower median over all frames."""
    if len(stack) == 0:
        raise ImageError("empty stack")
    n = len(stack)
    # lower median: element (n-1)//2 of the sorted values
    return np.partition(stack.frames, (n - 1) // 2, axis=0)[(n - 1) // 2]


def subtract_background(frame: np.ndarray, background: np.ndarray, theta: float = DEFAULT_THETA):
    """Background subtraction with threshold ``theta``.

    A pixel stays background when ``|f - b| < theta``; otherwise it is
    foreground and keeps its original value in the object image. For
    color input the test fires if any channel exceeds the threshold.

    Returns ``(object_image, mask)``.
    """
    frame = np.asarray(frame)
    background = np.asarray(background)
    if frame.shape != background.shape:
        raise ImageError(f"dimension mismatch: frame {frame.shape} vs background {background.shape}")
    if not 0 <= theta <= 255:
        raise ValueError(f"theta must lie in [0, 255], got {theta}")
    diff = np.abs(frame.astype(np.int16) - background.astype(np.int16))
    fires = diff >= theta
    mask = fires.any(axis=2) if frame.ndim == 3 else fires
    keep = mask[:, :, None] if frame.ndim == 3 else mask
    return np.where(keep, frame, 0).astype(frame.dtype), mask


def _square(radius: int) -> np.ndarray:
    return np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    return ndimage.binary_dilation(mask, structure=_square(radius), border_value=0)


def erode(mask: np.ndarray, radius: int) -> np.ndarray:
    # border_value=0: pixels outside the image count as background
    return ndimage.binary_erosion(mask, structure=_square(radius), border_value=0)


def morph_close_open(mask: np.ndarray, radius: int = DEFAULT_MORPH_RADIUS) -> np.ndarray:
    """Closing followed by opening with a square (2r+1)^2 element."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    mask = np.asarray(mask, dtype=bool)
    if radius == 0:
        return mask.copy()
    closed = erode(dilate(mask, radius), radius)
    return dilate(erode(closed, radius), radius)
