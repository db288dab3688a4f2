"""Split raw inputs into ordered discrete elements and reassemble them.

Images become row-major grids of square patches with a 4-neighborhood slot
layout; sentences become word chains.  Both directions are lossless: placing
every element back into its own slot reproduces the original input.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from PIL import Image

from .errors import (
    DimensionNotDivisible,
    IncompletePlacement,
    TooFewTokens,
    TooSmall,
)

Modality = str  # "image" | "text"

IMAGE = "image"
TEXT = "text"


@dataclass(frozen=True)
class ImageBuffer:
    """Raw 8-bit RGB image, row-major interleaved."""

    width: int
    height: int
    pixels: bytes
    channels: int = 3

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if self.channels != 3:
            raise ValueError("only 3-channel RGB is supported")
        if len(self.pixels) != self.width * self.height * self.channels:
            raise ValueError(
                f"pixel buffer has {len(self.pixels)} bytes, expected "
                f"{self.width * self.height * self.channels}"
            )

    def to_array(self) -> np.ndarray:
        """Return an (H, W, 3) uint8 view of the buffer."""
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(
            self.height, self.width, 3
        )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageBuffer":
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError("expected an (H, W, 3) array")
        return cls(width=arr.shape[1], height=arr.shape[0], pixels=arr.tobytes())


@dataclass(frozen=True)
class SlotLayout:
    """Positions elements can occupy, plus which positions touch."""

    slot_count: int
    adjacency: frozenset  # of (lo, hi) index pairs, lo < hi

    def __post_init__(self):
        for a, b in self.adjacency:
            if not (0 <= a < b < self.slot_count):
                raise ValueError(f"bad adjacency pair ({a}, {b})")

    @classmethod
    def grid(cls, side: int) -> "SlotLayout":
        """4-neighborhood of a side x side grid, slots in row-major order."""
        pairs = set()
        for r in range(side):
            for c in range(side):
                s = r * side + c
                if c + 1 < side:
                    pairs.add((s, s + 1))
                if r + 1 < side:
                    pairs.add((s, s + side))
        return cls(slot_count=side * side, adjacency=frozenset(pairs))

    @classmethod
    def chain(cls, length: int) -> "SlotLayout":
        return cls(
            slot_count=length,
            adjacency=frozenset((i, i + 1) for i in range(length - 1)),
        )


@dataclass(frozen=True)
class ImagePatch:
    """One grid cell: its pixel block and its (row, col) grid position."""

    index: int
    row: int
    col: int
    pixels: bytes  # patch_h x patch_w x 3, row-major


@dataclass(frozen=True)
class Token:
    index: int
    text: str


Element = Union[ImagePatch, Token]


@dataclass(frozen=True)
class SampleDecomposition:
    """An input split into ordered elements plus the slot layout."""

    modality: Modality
    elements: tuple
    layout: SlotLayout
    # image-only geometry (0 for text)
    grid_side: int = 0
    patch_width: int = 0
    patch_height: int = 0

    def __post_init__(self):
        if len(self.elements) < 2:
            raise ValueError("need at least 2 elements")
        if len(self.elements) != self.layout.slot_count:
            raise ValueError("element count must match slot count")

    @property
    def n(self) -> int:
        return len(self.elements)

    def element_labels(self) -> list:
        """Patch (row, col) coordinates or token strings, for reports."""
        if self.modality == IMAGE:
            return [[e.row, e.col] for e in self.elements]
        return [e.text for e in self.elements]


def partition_image(image: ImageBuffer, grid_side: int) -> SampleDecomposition:
    """Cut an image into a grid_side x grid_side grid of patches."""
    if grid_side < 2:
        raise TooSmall(f"grid_side must be >= 2, got {grid_side}")
    if image.width % grid_side or image.height % grid_side:
        raise DimensionNotDivisible(
            f"{image.width}x{image.height} image not divisible by grid "
            f"side {grid_side}"
        )
    pw = image.width // grid_side
    ph = image.height // grid_side
    arr = image.to_array()
    patches = []
    for r in range(grid_side):
        for c in range(grid_side):
            block = arr[r * ph:(r + 1) * ph, c * pw:(c + 1) * pw]
            patches.append(
                ImagePatch(
                    index=r * grid_side + c,
                    row=r,
                    col=c,
                    pixels=np.ascontiguousarray(block).tobytes(),
                )
            )
    return SampleDecomposition(
        modality=IMAGE,
        elements=tuple(patches),
        layout=SlotLayout.grid(grid_side),
        grid_side=grid_side,
        patch_width=pw,
        patch_height=ph,
    )


def tokenize_text(sentence: str) -> SampleDecomposition:
    """One element per whitespace-separated token, chained in order."""
    words = sentence.split()
    if len(words) < 2:
        raise TooFewTokens(f"need >= 2 tokens, got {len(words)}")
    tokens = tuple(Token(index=i, text=w) for i, w in enumerate(words))
    return SampleDecomposition(
        modality=TEXT, elements=tokens, layout=SlotLayout.chain(len(words))
    )


def reassemble(decomp: SampleDecomposition, placement: Sequence[int]):
    """Write elements back into slots; returns an ImageBuffer or a string.

    placement[slot] is the element index occupying that slot.  Duplicates
    are allowed (with-replacement semantics); every slot must be assigned.
    """
    n = decomp.n
    if len(placement) != n:
        raise IncompletePlacement(
            f"placement covers {len(placement)} of {n} slots"
        )
    for e in placement:
        if not 0 <= e < n:
            raise IncompletePlacement(f"element index {e} out of range")

    if decomp.modality == TEXT:
        return " ".join(decomp.elements[e].text for e in placement)

    side = decomp.grid_side
    pw, ph = decomp.patch_width, decomp.patch_height
    out = np.empty((side * ph, side * pw, 3), dtype=np.uint8)
    for slot, e in enumerate(placement):
        r, c = divmod(slot, side)
        block = np.frombuffer(decomp.elements[e].pixels, dtype=np.uint8)
        out[r * ph:(r + 1) * ph, c * pw:(c + 1) * pw] = block.reshape(ph, pw, 3)
    return ImageBuffer.from_array(out)


# -- image I/O ---------------------------------------------------------------

def read_image(path) -> ImageBuffer:
    """Read a PNG or raw PPM (P6) file into an RGB8 buffer."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P6":
        return _read_ppm(data)
    img = Image.open(io.BytesIO(data)).convert("RGB")
    return ImageBuffer(width=img.width, height=img.height, pixels=img.tobytes())


def write_png(image: ImageBuffer, path) -> None:
    Image.frombytes("RGB", (image.width, image.height), image.pixels).save(
        path, format="PNG"
    )


def write_ppm(image: ImageBuffer, path) -> None:
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.pixels)


def _read_ppm(data: bytes) -> ImageBuffer:
    # P6 header: magic, width, height, maxval, then one whitespace byte and
    # the raw pixel payload.  Comment lines start with '#'.
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != ord("\n"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ValueError("only 8-bit PPM is supported")
    pixels = data[pos:pos + width * height * 3]
    return ImageBuffer(width=width, height=height, pixels=pixels)
