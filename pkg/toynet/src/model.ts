import * as tf from "@tensorflow/tfjs";
import * as fs from "fs";

import { LossWeights, DEFAULT_WEIGHTS } from "./losses";

export interface ToyNetConfig {
  nBlocks: number;
  channels: number;
  weights: LossWeights;
  useAdversarial: boolean;
  tileSize: number;
  seed: number;
}

export const DEFAULT_CONFIG: ToyNetConfig = {
  nBlocks: 4,
  channels: 32,
  weights: DEFAULT_WEIGHTS,
  useAdversarial: false,
  tileSize: 64,
  seed: 0,
};

/** Config scaled down to what the pure-JS backend trains in minutes. */
export const FAST_CONFIG: ToyNetConfig = {
  ...DEFAULT_CONFIG,
  nBlocks: 1,
  channels: 4,
  tileSize: 16,
};

function validateConfig(cfg: ToyNetConfig): void {
  const w = cfg.weights;
  if (!(w.tau > 0 && w.lambdaAlong > 0 && w.lambdaAcross > 0 && w.mu > 0)) {
    throw new Error("loss weights must be positive");
  }
  if (cfg.nBlocks < 1 || cfg.channels < 1 || cfg.tileSize < 8) {
    throw new Error("invalid architecture configuration");
  }
}

interface Stream {
  convIn: tf.Variable;
  body: tf.Variable[]; // pairs of residual-block kernels
  convOut: tf.Variable;
}

/**
 * Two parallel residual-conv streams that split a rectified tile into
 * clean and rain layers, plus a small pooled head regressing the streak
 * angle (in degrees) from the unrotated tile.  Weight init is He-scaled
 * and fully seeded, so a config reproduces bit-identical runs.
 */
export class TwoStreamNet {
  readonly cfg: ToyNetConfig;
  private seedCounter: number;
  cleanStream: Stream;
  rainStream: Stream;
  headConv1: tf.Variable;
  headConv2: tf.Variable;
  headDense: tf.Variable;
  headBias: tf.Variable;

  constructor(cfg: Partial<ToyNetConfig> = {}) {
    this.cfg = { ...DEFAULT_CONFIG, ...cfg, weights: { ...DEFAULT_WEIGHTS, ...(cfg.weights ?? {}) } };
    validateConfig(this.cfg);
    this.seedCounter = this.cfg.seed * 1000 + 1;
    const c = this.cfg.channels;
    this.cleanStream = this.makeStream(c);
    this.rainStream = this.makeStream(c);
    const hc = Math.max(2, Math.floor(c / 2));
    this.headConv1 = this.kernel([3, 3, 1, hc]);
    this.headConv2 = this.kernel([3, 3, hc, hc]);
    // near-zero init so the first rotations are close to identity and
    // the angle loss does not dominate the opening steps
    this.headDense = tf.variable(
      tf.randomNormal([hc, 1], 0, 0.02, "float32", this.seedCounter++)
    );
    this.headBias = tf.variable(tf.zeros([1]));
  }

  private kernel(shape: number[]): tf.Variable {
    const fanIn = shape.length === 4 ? shape[0] * shape[1] * shape[2] : shape[0];
    const std = Math.sqrt(2.0 / fanIn);
    return tf.variable(
      tf.randomNormal(shape, 0, std, "float32", this.seedCounter++)
    );
  }

  private makeStream(c: number): Stream {
    const body: tf.Variable[] = [];
    for (let b = 0; b < this.cfg.nBlocks * 2; b++) {
      body.push(this.kernel([3, 3, c, c]));
    }
    return {
      convIn: this.kernel([3, 3, 1, c]),
      body,
      convOut: this.kernel([3, 3, c, 1]),
    };
  }

  get variables(): tf.Variable[] {
    const vars: tf.Variable[] = [];
    for (const s of [this.cleanStream, this.rainStream]) {
      vars.push(s.convIn, ...s.body, s.convOut);
    }
    vars.push(this.headConv1, this.headConv2, this.headDense, this.headBias);
    return vars;
  }

  private runStream(input: tf.Tensor4D, s: Stream): tf.Tensor3D {
    let h = tf.relu(tf.conv2d(input, s.convIn as tf.Tensor4D, 1, "same"));
    for (let i = 0; i < s.body.length; i += 2) {
      let r = tf.relu(tf.conv2d(h, s.body[i] as tf.Tensor4D, 1, "same"));
      r = tf.conv2d(r, s.body[i + 1] as tf.Tensor4D, 1, "same");
      h = tf.relu(h.add(r));
    }
    const out = tf.conv2d(h, s.convOut as tf.Tensor4D, 1, "same");
    return out.squeeze([3]) as tf.Tensor3D;
  }

  /** Split a rectified batch [B,H,W] into clean and rain layers.

  The clean stream predicts a residual on top of the observation, so the
  untrained network already reproduces the input and learning only has
  to move rain across to the rain stream.  The rain output is kept
  non-negative through abs(): streaks are additive brightening, and
  without the sign constraint the losses leave the constant direction
  (X+c, R-c) completely flat, which adaptive optimizers wander along;
  a relu() gate instead dies once its preactivations go negative. */
  forward(Yr: tf.Tensor3D): { X: tf.Tensor3D; R: tf.Tensor3D } {
    const input = Yr.expandDims(3) as tf.Tensor4D;
    return {
      X: Yr.add(this.runStream(input, this.cleanStream)) as tf.Tensor3D,
      R: tf.abs(this.runStream(input, this.rainStream)),
    };
  }

  /** Regress the streak angle (degrees) from unrotated tiles [B,H,W]. */
  angleHead(Y: tf.Tensor3D): tf.Tensor1D {
    const input = Y.expandDims(3) as tf.Tensor4D;
    let h = tf.relu(tf.conv2d(input, this.headConv1 as tf.Tensor4D, 1, "same"));
    h = tf.avgPool(h, 2, 2, "same");
    h = tf.relu(tf.conv2d(h, this.headConv2 as tf.Tensor4D, 1, "same"));
    h = tf.avgPool(h, 2, 2, "same");
    const pooled = tf.mean(h, [1, 2]); // [B, hc]
    const out = tf
      .matMul(pooled, this.headDense as tf.Tensor2D)
      .add(this.headBias)
      // raw logits scaled to a plausible degree range
      .mul(60.0);
    return out.squeeze([1]) as tf.Tensor1D;
  }

  /** Serialize all weights to a JSON checkpoint. */
  save(path: string): void {
    const payload: Record<string, { shape: number[]; data: number[] }> = {};
    this.variables.forEach((v, i) => {
      payload[`var${i}`] = {
        shape: v.shape.slice(),
        data: Array.from(v.dataSync()),
      };
    });
    fs.writeFileSync(
      path,
      JSON.stringify({ config: this.cfg, weights: payload })
    );
  }

  /** Restore weights saved by `save` into this network. */
  load(path: string): void {
    const payload = JSON.parse(fs.readFileSync(path, "utf8"));
    this.variables.forEach((v, i) => {
      const entry = payload.weights[`var${i}`];
      if (!entry) throw new Error(`checkpoint missing var${i}`);
      v.assign(tf.tensor(entry.data, entry.shape as number[]));
    });
  }
}

/** Tiny patch discriminator for the optional adversarial term. */
export class PatchDiscriminator {
  private seedCounter: number;
  k1: tf.Variable;
  k2: tf.Variable;
  k3: tf.Variable;

  constructor(channels = 8, seed = 17) {
    this.seedCounter = seed;
    this.k1 = this.kernel([3, 3, 1, channels]);
    this.k2 = this.kernel([3, 3, channels, channels]);
    this.k3 = this.kernel([3, 3, channels, 1]);
  }

  private kernel(shape: number[]): tf.Variable {
    const fanIn = shape[0] * shape[1] * shape[2];
    return tf.variable(
      tf.randomNormal(shape, 0, Math.sqrt(2 / fanIn), "float32", this.seedCounter++)
    );
  }

  get variables(): tf.Variable[] {
    return [this.k1, this.k2, this.k3];
  }

  /** Per-patch realness logits for [B,H,W] images. */
  forward(x: tf.Tensor3D): tf.Tensor {
    let h = tf.relu(tf.conv2d(x.expandDims(3) as tf.Tensor4D, this.k1 as tf.Tensor4D, 2, "same"));
    h = tf.relu(tf.conv2d(h, this.k2 as tf.Tensor4D, 2, "same"));
    return tf.conv2d(h, this.k3 as tf.Tensor4D, 1, "same");
  }
}
