import * as tf from "@tensorflow/tfjs";

/**
 * Rotation that maps a streak direction (cos a, sin a) in (row, col)
 * coordinates onto the vertical axis, matching the solver library's
 * convention: same-size output, bilinear sampling about the center,
 * reflected boundary.
 *
 * The sampler follows the scipy convention exactly: the inverse-mapped
 * coordinate keeps its raw fractional weight, and each integer neighbor
 * index is folded by the edge-symmetric reflection a b c d | d c b a.
 *
 * `rotatePlain` is the float64 reference used for parity checks;
 * `rotateDifferentiable` is the tensor path whose gradient flows to the
 * angle through the bilinear weights (spatial-transformer style: the
 * integer neighbor indices are detached, the fractional parts are not).
 */

/** Fold an integer index into [0, n-1] by edge-symmetric reflection. */
function reflectIndex(i: number, n: number): number {
  if (n === 1) return 0;
  const period = 2 * n;
  let u = i % period;
  if (u < 0) u += period;
  return u < n ? u : period - 1 - u;
}

export function rotatePlain(
  input: Float64Array,
  height: number,
  width: number,
  angleDegrees: number
): Float64Array {
  if (angleDegrees === 0) return input.slice();
  // inverse map: source = R(phi) @ (dest - center) + center
  const phi = (-angleDegrees * Math.PI) / 180;
  const cos = Math.cos(phi);
  const sin = Math.sin(phi);
  const cr = (height - 1) / 2;
  const cc = (width - 1) / 2;
  const out = new Float64Array(height * width);
  for (let r = 0; r < height; r++) {
    for (let c = 0; c < width; c++) {
      const dr = r - cr;
      const dc = c - cc;
      const sr = cos * dr + sin * dc + cr;
      const sc = -sin * dr + cos * dc + cc;
      const r0 = Math.floor(sr);
      const c0 = Math.floor(sc);
      const fr = sr - r0;
      const fc = sc - c0;
      const r0r = reflectIndex(r0, height);
      const r1r = reflectIndex(r0 + 1, height);
      const c0r = reflectIndex(c0, width);
      const c1r = reflectIndex(c0 + 1, width);
      out[r * width + c] =
        input[r0r * width + c0r] * (1 - fr) * (1 - fc) +
        input[r0r * width + c1r] * (1 - fr) * fc +
        input[r1r * width + c0r] * fr * (1 - fc) +
        input[r1r * width + c1r] * fr * fc;
    }
  }
  return out;
}

/**
 * Disconnect a tensor from the gradient tape by materializing its data
 * into a fresh constant (this tfjs build lacks stopGradient, and the
 * GatherV2 gradient rejects tracked integer indices outright).
 */
export function detach(t: tf.Tensor): tf.Tensor {
  return tf.tensor(t.dataSync(), t.shape, t.dtype as "float32" | "int32");
}

/** Integer edge-symmetric reflection on an int32 tensor. */
function reflectIndexTf(i: tf.Tensor, n: number): tf.Tensor {
  const period = tf.scalar(2 * n, "int32");
  const u = tf.mod(tf.mod(i, period).add(period), period);
  const mirrored = tf.scalar(2 * n - 1, "int32").sub(u);
  return tf.where(u.less(tf.scalar(n, "int32")), u, mirrored);
}

/**
 * Rotate a batch of tiles by per-sample angles with gradient flow to the
 * angles.  `images` is [batch, h, w]; `angleDegrees` is [batch].
 */
export function rotateDifferentiable(
  images: tf.Tensor3D,
  angleDegrees: tf.Tensor1D
): tf.Tensor3D {
  return tf.tidy(() => {
    const [batch, height, width] = images.shape;
    const cr = (height - 1) / 2;
    const cc = (width - 1) / 2;
    const phi = angleDegrees.mul(-Math.PI / 180);
    const cos = tf.cos(phi).reshape([batch, 1, 1]);
    const sin = tf.sin(phi).reshape([batch, 1, 1]);

    const rows = tf.range(0, height).reshape([1, height, 1]).sub(cr);
    const cols = tf.range(0, width).reshape([1, 1, width]).sub(cc);

    const sr = cos.mul(rows).add(sin.mul(cols)).add(cr); // [batch, h, w]
    const sc = cos.mul(cols).sub(sin.mul(rows)).add(cc);

    // indices are detached so the angle gradient flows only through the
    // fractional bilinear weights
    const r0f = detach(tf.floor(sr));
    const c0f = detach(tf.floor(sc));
    const fr = sr.sub(r0f); // differentiable w.r.t. the angle
    const fc = sc.sub(c0f);

    const r0 = tf.cast(r0f, "int32");
    const c0 = tf.cast(c0f, "int32");
    const one = tf.scalar(1, "int32");
    const r0r = reflectIndexTf(r0, height);
    const r1r = reflectIndexTf(r0.add(one), height);
    const c0r = reflectIndexTf(c0, width);
    const c1r = reflectIndexTf(c0.add(one), width);

    const batchOffset = tf
      .range(0, batch, 1, "int32")
      .mul(tf.scalar(height * width, "int32"))
      .reshape([batch, 1, 1]);
    const flat = images.reshape([batch * height * width]);
    const wScalar = tf.scalar(width, "int32");

    const corner = (ri: tf.Tensor, ci: tf.Tensor) => {
      const idx = batchOffset
        .add(ri.mul(wScalar))
        .add(ci)
        .reshape([batch * height * width]);
      return tf.gather(flat, idx).reshape([batch, height, width]);
    };

    const v00 = corner(r0r, c0r);
    const v01 = corner(r0r, c1r);
    const v10 = corner(r1r, c0r);
    const v11 = corner(r1r, c1r);

    const omr = tf.sub(1, fr);
    const omc = tf.sub(1, fc);
    return v00
      .mul(omr)
      .mul(omc)
      .add(v01.mul(omr).mul(fc))
      .add(v10.mul(fr).mul(omc))
      .add(v11.mul(fr).mul(fc)) as tf.Tensor3D;
  });
}
