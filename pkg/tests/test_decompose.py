import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rle.decompose import (
    ImageBuffer,
    SlotLayout,
    partition_image,
    read_image,
    reassemble,
    tokenize_text,
    write_png,
    write_ppm,
)
from rle.errors import (
    DimensionNotDivisible,
    IncompletePlacement,
    TooFewTokens,
    TooSmall,
)


def random_image(w, h, seed=0):
    rng = np.random.default_rng(seed)
    return ImageBuffer.from_array(
        rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    )


class TestPartitionImage:
    def test_224_grid7_gives_49_32px_patches(self):
        decomp = partition_image(random_image(224, 224), 7)
        assert decomp.n == 49
        assert decomp.patch_width == decomp.patch_height == 32

    def test_2x2_grid_adjacency(self):
        decomp = partition_image(random_image(8, 8), 2)
        assert decomp.layout.adjacency == frozenset(
            {(0, 1), (0, 2), (1, 3), (2, 3)}
        )

    def test_3x3_grid_has_12_edges(self):
        decomp = partition_image(random_image(9, 9), 3)
        assert len(decomp.layout.adjacency) == 12

    def test_non_divisible_raises(self):
        with pytest.raises(DimensionNotDivisible):
            partition_image(random_image(10, 9), 3)

    def test_grid_side_below_2_raises(self):
        with pytest.raises(TooSmall):
            partition_image(random_image(8, 8), 1)

    @given(side=st.integers(2, 6), scale=st.integers(1, 5),
           seed=st.integers(0, 1000))
    @settings(max_examples=40, deadline=None)
    def test_round_trip_identity(self, side, scale, seed):
        image = random_image(side * scale, side * scale, seed)
        decomp = partition_image(image, side)
        out = reassemble(decomp, tuple(range(decomp.n)))
        assert out.pixels == image.pixels

    @given(side=st.integers(2, 6))
    @settings(max_examples=10, deadline=None)
    def test_grid_edge_count(self, side):
        layout = SlotLayout.grid(side)
        assert len(layout.adjacency) == 2 * side * (side - 1)


class TestTokenize:
    def test_three_words(self):
        decomp = tokenize_text("I love you")
        assert decomp.n == 3
        assert decomp.layout.adjacency == frozenset({(0, 1), (1, 2)})

    def test_nine_word_sentence(self):
        decomp = tokenize_text(
            "you gonna suffer but you'll be happy about it"
        )
        assert decomp.n == 9
        assert len(decomp.layout.adjacency) == 8

    def test_single_token_raises(self):
        with pytest.raises(TooFewTokens):
            tokenize_text("hi")

    @given(n=st.integers(2, 20))
    @settings(max_examples=20, deadline=None)
    def test_chain_is_a_path(self, n):
        layout = SlotLayout.chain(n)
        assert len(layout.adjacency) == n - 1
        degree = [0] * n
        for a, b in layout.adjacency:
            degree[a] += 1
            degree[b] += 1
        assert all(d == 2 for d in degree[1:-1])
        assert degree[0] == degree[-1] == 1


class TestReassemble:
    def test_text_reversal(self):
        decomp = tokenize_text("I love you")
        assert reassemble(decomp, [2, 1, 0]) == "you love I"

    def test_text_duplicates_allowed(self):
        decomp = tokenize_text("I love you")
        assert reassemble(decomp, [0, 0, 2]) == "I I you"

    def test_whitespace_normalized_on_identity(self):
        decomp = tokenize_text("I   love \t you")
        assert reassemble(decomp, [0, 1, 2]) == "I love you"

    def test_incomplete_placement_raises(self):
        decomp = tokenize_text("I love you")
        with pytest.raises(IncompletePlacement):
            reassemble(decomp, [0, 1])

    def test_out_of_range_element_raises(self):
        decomp = tokenize_text("I love you")
        with pytest.raises(IncompletePlacement):
            reassemble(decomp, [0, 1, 5])

    def test_image_patch_swap_moves_pixels(self):
        image = random_image(8, 8)
        decomp = partition_image(image, 2)
        swapped = reassemble(decomp, [1, 0, 2, 3]).to_array()
        original = image.to_array()
        assert np.array_equal(swapped[:4, :4], original[:4, 4:])
        assert np.array_equal(swapped[:4, 4:], original[:4, :4])


class TestImageIo:
    def test_png_round_trip(self, tmp_path):
        image = random_image(13, 9, seed=3)
        write_png(image, tmp_path / "img.png")
        back = read_image(tmp_path / "img.png")
        assert back.pixels == image.pixels
        assert (back.width, back.height) == (13, 9)

    def test_ppm_round_trip(self, tmp_path):
        image = random_image(5, 7, seed=4)
        write_ppm(image, tmp_path / "img.ppm")
        back = read_image(tmp_path / "img.ppm")
        assert back.pixels == image.pixels
