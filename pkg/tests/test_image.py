import numpy as np
import pytest

from deraintv import image
from deraintv.angle import anisotropy_score
from deraintv.errors import ImageIOError, InvalidImageError

from oracles import dense_grad_matrix


def test_grad_constant_is_zero():
    img = np.full((8, 8), 0.37)
    for axis in ("along", "across"):
        for boundary in ("periodic", "replicate"):
            assert np.all(image.grad_forward(img, axis, boundary) == 0)


def test_grad_ramp_matches_forward_difference():
    ramp = np.tile([0.0, 0.25, 0.5, 0.75], (4, 1))
    out = image.grad_forward(ramp, "across", "periodic")
    expected = np.tile([0.25, 0.25, 0.25, -0.75], (4, 1))
    np.testing.assert_allclose(out, expected)


@pytest.mark.parametrize("axis", ["along", "across"])
@pytest.mark.parametrize("boundary", ["periodic", "replicate"])
def test_grad_matches_dense_matrix(rng, axis, boundary):
    img = rng.random((8, 8))
    D = dense_grad_matrix(8, 8, axis, boundary)
    expected = (D @ img.ravel()).reshape(8, 8)
    np.testing.assert_allclose(
        image.grad_forward(img, axis, boundary), expected, atol=1e-14
    )


@pytest.mark.parametrize("axis", ["along", "across"])
def test_adjoint_matches_dense_transpose(rng, axis):
    v = rng.random((8, 8))
    D = dense_grad_matrix(8, 8, axis, "periodic")
    expected = (D.T @ v.ravel()).reshape(8, 8)
    np.testing.assert_allclose(image.grad_adjoint(v, axis), expected, atol=1e-14)


@pytest.mark.parametrize("size", [(8, 8), (16, 16), (64, 64), (13, 19)])
@pytest.mark.parametrize("axis", ["along", "across"])
def test_adjoint_identity(rng, size, axis):
    u, v = rng.random(size), rng.random(size)
    lhs = float(np.sum(image.grad_forward(u, axis) * v))
    rhs = float(np.sum(u * image.grad_adjoint(v, axis)))
    assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


def test_adjoint_of_delta():
    delta = np.zeros((6, 6))
    delta[0, 0] = 1.0
    out = image.grad_adjoint(delta, "along")
    # out[i] = delta[i-1] - delta[i]: +1 at the periodic successor, -1 at origin
    assert out[1, 0] == 1.0
    assert out[0, 0] == -1.0
    assert np.count_nonzero(out) == 2


def test_adjoint_constant_is_zero():
    assert np.all(image.grad_adjoint(np.full((8, 8), 2.0), "across") == 0)


def test_periodic_gradient_sums_to_zero(rng):
    img = rng.random((17, 23))
    for axis in ("along", "across"):
        assert abs(image.grad_forward(img, axis).sum()) < 1e-12


def test_grad_linearity(rng):
    u, v = rng.random((8, 8)), rng.random((8, 8))
    a, b = 2.5, -1.25
    for axis in ("along", "across"):
        lhs = image.grad_forward(a * u + b * v, axis)
        rhs = a * image.grad_forward(u, axis) + b * image.grad_forward(v, axis)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_grad_rejects_bad_inputs():
    with pytest.raises(InvalidImageError):
        image.grad_forward(np.ones((1, 5)), "along")
    with pytest.raises(InvalidImageError):
        image.grad_forward(np.array([[np.nan, 1.0], [0.0, 1.0]]), "along")
    with pytest.raises(InvalidImageError):
        image.grad_forward(np.ones((4, 4)), "diagonal")
    with pytest.raises(InvalidImageError):
        image.grad_adjoint(np.ones((4, 4)), "along", boundary="replicate")


def test_rotate_zero_is_identity(rng):
    img = rng.random((32, 32))
    out = image.rotate(img, 0.0)
    assert np.array_equal(out, img)


def test_rotate_90_square_is_permutation(rng):
    img = rng.random((33, 33))
    out = image.rotate(img, 90.0)
    # mapping direction (cos a, sin a) -> vertical for a=90 turns a
    # horizontal line vertical, i.e. the clockwise index permutation
    err = np.abs(image.central_crop(out - np.rot90(img, -1), 0.8)).max()
    assert err < 1e-6


@pytest.mark.parametrize("angle", [15.0, 30.0, 45.0, -30.0, -45.0])
def test_rotate_roundtrip_on_smooth_images(smooth_tiles, angle):
    for img in smooth_tiles.values():
        back = image.rotate(image.rotate(img, angle), -angle)
        err = np.abs(image.central_crop(back - img, 0.7)).max()
        assert err <= 0.02, f"roundtrip error {err} at angle {angle}"


def test_rotate_verticalizes_stripes():
    # vertical stripe pattern rotated to 30 degrees scores best at 30
    cols = np.zeros((96, 96))
    cols[:, ::8] = 1.0
    from scipy import ndimage

    smooth = ndimage.gaussian_filter(cols, 1.0)
    tilted = image.rotate(smooth, -30.0)  # move stripes from 0 to 30 degrees
    assert anisotropy_score(tilted, 30.0) > anisotropy_score(tilted, 0.0)


def test_rotate_fill_policies():
    img = np.ones((32, 32))
    spec = image.RotationSpec(30.0, fill_policy="constant")
    out = image.rotate(img, spec)
    assert out.min() < 0.5  # constant fill exposes corners
    spec = image.RotationSpec(30.0, fill_policy="reflect")
    out = image.rotate(img, spec)
    np.testing.assert_allclose(out, 1.0)  # reflecting ones stays ones


def test_rotation_spec_validation():
    with pytest.raises(InvalidImageError):
        image.RotationSpec(120.0)
    with pytest.raises(InvalidImageError):
        image.RotationSpec(10.0, fill_policy="wrap")


def test_canonical_angle():
    assert image.canonical_angle(90.0) == 90.0
    assert image.canonical_angle(-90.0) == 90.0
    assert image.canonical_angle(135.0) == -45.0
    assert image.canonical_angle(181.0) == pytest.approx(1.0)


def test_png_roundtrip_8bit(rng, tmp_path):
    img = rng.random((16, 16))
    path = tmp_path / "g.png"
    image.save_image(img, path)
    back = image.load_image(path)
    assert back.shape == (16, 16)
    assert np.abs(back - np.clip(img, 0, 1)).max() <= 1.0 / 255.0


def test_png_roundtrip_16bit(rng, tmp_path):
    img = rng.random((16, 16))
    path = tmp_path / "g16.png"
    image.save_image(img, path, bit_depth=16)
    back = image.load_image(path)
    assert np.abs(back - img).max() <= 1.0 / 65535.0


def test_png_rgb_channel_order(tmp_path):
    img = np.zeros((8, 8, 3))
    img[:, :, 0] = 1.0  # pure red
    path = tmp_path / "rgb.png"
    image.save_image(img, path)
    back = image.load_image(path)
    assert back.shape == (8, 8, 3)
    np.testing.assert_allclose(back[:, :, 0], 1.0)
    np.testing.assert_allclose(back[:, :, 1:], 0.0)


def test_load_truncated_file_raises(rng, tmp_path):
    path = tmp_path / "x.png"
    image.save_image(rng.random((16, 16)), path)
    data = path.read_bytes()
    trunc = tmp_path / "trunc.png"
    trunc.write_bytes(data[: len(data) // 2])
    with pytest.raises(ImageIOError, match="trunc"):
        image.load_image(trunc)


def test_load_missing_file_raises(tmp_path):
    with pytest.raises(ImageIOError, match="nope"):
        image.load_image(tmp_path / "nope.png")


def test_luma_weights():
    rgb = np.zeros((4, 4, 3))
    rgb[:, :, 1] = 1.0
    np.testing.assert_allclose(image.to_luma(rgb), 0.587)
