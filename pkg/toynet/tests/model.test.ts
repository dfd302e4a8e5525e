import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";

import { FAST_CONFIG, TwoStreamNet } from "../src/model";

const input = () =>
  tf.randomUniform([2, 16, 16], 0, 1, "float32", 7) as tf.Tensor3D;

describe("two-stream network", () => {
  it("same seed gives identical outputs, different seeds differ", () => {
    const a = new TwoStreamNet({ ...FAST_CONFIG, seed: 5 });
    const b = new TwoStreamNet({ ...FAST_CONFIG, seed: 5 });
    const c = new TwoStreamNet({ ...FAST_CONFIG, seed: 6 });
    const x = input();
    const outA = a.forward(x).X.dataSync();
    const outB = b.forward(x).X.dataSync();
    const outC = c.forward(x).X.dataSync();
    expect(Array.from(outA)).toEqual(Array.from(outB));
    expect(Array.from(outA)).not.toEqual(Array.from(outC));
  });

  it("untrained clean stream starts at the observation", () => {
    // residual parameterization: X = Y_r + small perturbation
    const net = new TwoStreamNet({ ...FAST_CONFIG, seed: 1 });
    const x = input();
    const { X } = net.forward(x);
    const drift = tf.mean(tf.abs(X.sub(x))).dataSync()[0];
    expect(drift).toBeLessThan(0.5);
  });

  it("angle head outputs one degree value per tile", () => {
    const net = new TwoStreamNet({ ...FAST_CONFIG, seed: 2 });
    const theta = net.angleHead(input());
    expect(theta.shape).toEqual([2]);
    expect(Number.isFinite(theta.dataSync()[0])).toBe(true);
  });

  it("checkpoint round trip restores outputs exactly", () => {
    const net = new TwoStreamNet({ ...FAST_CONFIG, seed: 3 });
    const x = input();
    const before = net.forward(x).R.dataSync();
    const file = path.join(fs.mkdtempSync(path.join(os.tmpdir(), "ckpt-")), "w.json");
    net.save(file);
    const other = new TwoStreamNet({ ...FAST_CONFIG, seed: 99 });
    other.load(file);
    const after = other.forward(x).R.dataSync();
    expect(Array.from(after)).toEqual(Array.from(before));
  });

  it("rejects invalid configurations", () => {
    expect(
      () => new TwoStreamNet({ ...FAST_CONFIG, weights: { ...FAST_CONFIG.weights, tau: 0 } })
    ).toThrow();
    expect(() => new TwoStreamNet({ ...FAST_CONFIG, nBlocks: 0 })).toThrow();
  });
});
