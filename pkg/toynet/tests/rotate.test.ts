import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";

import { rotateDifferentiable, rotatePlain } from "../src/rotate";

const FIXTURE = path.join(__dirname, "..", "fixtures", "rotate_parity.json");

interface RotateFixture {
  cases: { angle_degrees: number; input: number[][]; rotated: number[][] }[];
}

const fx: RotateFixture = JSON.parse(fs.readFileSync(FIXTURE, "utf8"));

describe("differentiable rotation", () => {
  it("zero angle is the identity", () => {
    const img = tf.randomNormal([1, 12, 12], 0.5, 0.2, "float32", 3) as tf.Tensor3D;
    const out = rotateDifferentiable(img, tf.tensor1d([0]));
    expect(tf.max(tf.abs(out.sub(img))).dataSync()[0]).toBe(0);
  });

  it("forward-matches the solver library's rotate on fixture tiles", () => {
    let worstPlain = 0;
    let worstTf = 0;
    for (const c of fx.cases) {
      const n = c.input.length;
      const want = c.rotated.flat();
      const plain = rotatePlain(
        Float64Array.from(c.input.flat()),
        n,
        n,
        c.angle_degrees
      );
      const t = tf.tensor3d(c.input.flat(), [1, n, n]);
      const viaTf = rotateDifferentiable(
        t,
        tf.tensor1d([c.angle_degrees])
      ).dataSync();
      for (let i = 0; i < want.length; i++) {
        worstPlain = Math.max(worstPlain, Math.abs(plain[i] - want[i]));
        worstTf = Math.max(worstTf, Math.abs(viaTf[i] - want[i]));
      }
    }
    expect(worstPlain).toBeLessThan(1e-10); // float64 path is exact
    expect(worstTf).toBeLessThan(1e-5); // tensor path is float32
  });

  it("angle gradient matches central finite differences", () => {
    const values = Array.from(
      { length: 256 },
      (_, i) => 0.5 + 0.4 * Math.sin(i * 0.41)
    );
    const img = tf.tensor3d(values, [1, 16, 16]);
    const lossOf = (t: tf.Tensor) =>
      tf.sum(tf.square(rotateDifferentiable(img, t.reshape([1]) as tf.Tensor1D)));
    // the finite-difference reference runs through the float64 rotation,
    // which forward-matches the tensor path to 1e-6, so cancellation
    // noise stays far below the tolerance
    const f64 = Float64Array.from(values);
    const lossPlain = (deg: number) => {
      const rot = rotatePlain(f64, 16, 16, deg);
      let s = 0;
      for (let i = 0; i < rot.length; i++) s += rot[i] * rot[i];
      return s;
    };
    for (const angle of [7.0, -23.5]) {
      const auto = tf.grad(lossOf)(tf.scalar(angle)).dataSync()[0];
      const eps = 1e-3;
      const fd = (lossPlain(angle + eps) - lossPlain(angle - eps)) / (2 * eps);
      expect(Math.abs(auto - fd) / Math.abs(fd)).toBeLessThan(1e-3);
    }
  });

  it("round trip returns close to the original interior", () => {
    const n = 24;
    const data = Array.from({ length: n * n }, (_, i) => {
      const r = Math.floor(i / n);
      const c = i % n;
      return 0.5 + 0.3 * Math.sin(r / 3) * Math.cos(c / 4);
    });
    const img = Float64Array.from(data);
    const there = rotatePlain(img, n, n, 20);
    const back = rotatePlain(there, n, n, -20);
    let worst = 0;
    for (let r = 6; r < n - 6; r++) {
      for (let c = 6; c < n - 6; c++) {
        worst = Math.max(worst, Math.abs(back[r * n + c] - img[r * n + c]));
      }
    }
    expect(worst).toBeLessThan(0.02);
  });
});
