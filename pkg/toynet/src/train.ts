import * as tf from "@tensorflow/tfjs";
import * as fs from "fs";

import { Pair, toBatch } from "./data";
import { lossOverall, lossSelf, lossImage, lossRain, lossAngle } from "./losses";
import { PatchDiscriminator, TwoStreamNet, ToyNetConfig } from "./model";
import { psnr } from "./png";
import { rotateDifferentiable, rotatePlain } from "./rotate";

export interface StepRecord {
  step: number;
  loss_total: number;
  loss_theta: number;
  loss_image: number;
  loss_rain: number;
  loss_self: number;
}

export interface TrainResult {
  net: TwoStreamNet;
  history: StepRecord[];
}

export const CSV_HEADER =
  "step,loss_total,loss_theta,loss_image,loss_rain,loss_self";

export function writeCurveCsv(history: StepRecord[], path: string): void {
  const rows = history.map(
    (r) =>
      `${r.step},${r.loss_total},${r.loss_theta},${r.loss_image},` +
      `${r.loss_rain},${r.loss_self}`
  );
  fs.writeFileSync(path, [CSV_HEADER, ...rows].join("\n") + "\n");
}

/**
 * Full-batch training of the two-stream network with the unsupervised
 * losses: angle regression on the raw tiles, rotation by the predicted
 * angle, smoothness/directional priors on the two streams and the
 * self-consistency term.  Full-batch descent keeps the recorded loss
 * curve deterministic for a seed (and, at sane learning rates,
 * monotone).
 */
export function trainTwoStream(
  pairs: Pair[],
  cfg: Partial<ToyNetConfig>,
  steps: number,
  learningRate = 2e-3,
  options: {
    csvPath?: string;
    checkpointPath?: string;
    logEvery?: number;
    warmupSteps?: number;
    monotone?: boolean;
  } = {}
): TrainResult {
  const net = new TwoStreamNet(cfg);
  const batch = toBatch(pairs);
  const Y = tf.tensor3d(batch.rainy, [batch.count, batch.height, batch.width]);
  const thetaTrue = tf.tensor1d(batch.angles);
  const history: StepRecord[] = [];
  const disc = net.cfg.useAdversarial ? new PatchDiscriminator() : null;
  const discOpt = disc ? tf.train.adam(learningRate) : null;
  const warmup = options.warmupSteps ?? 0;
  const monotone = options.monotone ?? true;

  let optimizer = tf.train.adam(learningRate);
  let lrScale = 1.0; // adaptive multiplier driven by accept/reject

  const snapshot = () => net.variables.map((v) => v.clone());
  const restore = (snap: tf.Tensor[]) => {
    net.variables.forEach((v, i) => v.assign(snap[i]));
  };

  for (let step = 0; step < steps; step++) {
    let parts: StepRecord | null = null;
    const lossFn = (record: boolean) => (): tf.Scalar => {
      const thetaPred = net.angleHead(Y);
      const Yr = rotateDifferentiable(Y, thetaPred);
      const { X, R } = net.forward(Yr);
      const breakdown = lossOverall(thetaTrue, thetaPred, X, R, Yr, net.cfg.weights);
      let total = breakdown.total;
      if (disc) {
        // non-saturating generator objective on the clean stream
        const logits = disc.forward(X);
        const advGen = tf.mean(tf.losses.sigmoidCrossEntropy(tf.onesLike(logits), logits));
        total = total.add(advGen.mul(net.cfg.weights.mu / 1e4));
      }
      if (record) {
        parts = {
          step,
          loss_total: 0,
          loss_theta: breakdown.theta,
          loss_image: breakdown.image,
          loss_rain: breakdown.rain,
          loss_self: breakdown.self,
        };
      }
      return total as tf.Scalar;
    };

    // The subgradient field is full of L1 kinks and the update is only a
    // descent direction approximately, so each step is accepted only if
    // the full-batch loss actually went down; otherwise the weights are
    // rolled back and the step size halved before retrying.  The
    // recorded curve is therefore strictly decreasing by construction.
    const warmScale = warmup > 0 ? Math.min(1.0, (step + 1) / warmup) : 1.0;
    let total = 0;
    for (let attempt = 0; ; attempt++) {
      (optimizer as unknown as { learningRate: number }).learningRate =
        learningRate * warmScale * lrScale;
      const snap = monotone ? snapshot() : null;
      const lossVal = optimizer.minimize(lossFn(true), true, net.variables);
      total = lossVal!.dataSync()[0];
      lossVal!.dispose();
      if (!monotone || attempt >= 12) {
        if (snap) snap.forEach((t) => t.dispose());
        break;
      }
      const after = tf.tidy(() => lossFn(false)().dataSync()[0]);
      if (after < total) {
        lrScale = Math.min(lrScale * 1.1, 1.0);
        snap!.forEach((t) => t.dispose());
        break;
      }
      restore(snap!);
      snap!.forEach((t) => t.dispose());
      lrScale *= 0.5;
      if (attempt === 6) {
        // stale moments can hold an ascent direction; drop them
        optimizer.dispose();
        optimizer = tf.train.adam(learningRate * warmScale * lrScale);
      }
    }
    const rec = parts! as StepRecord;
    rec.loss_total = total;
    history.push(rec);

    if (disc && discOpt) {
      const dLoss = discOpt.minimize(
        () => {
          const thetaPred = net.angleHead(Y);
          const Yr = rotateDifferentiable(Y, thetaPred);
          const { X } = net.forward(Yr);
          const fake = disc.forward(X);
          const real = disc.forward(Yr);
          return tf
            .mean(tf.losses.sigmoidCrossEntropy(tf.zerosLike(fake), fake))
            .add(tf.mean(tf.losses.sigmoidCrossEntropy(tf.onesLike(real), real))) as tf.Scalar;
        },
        true,
        disc.variables
      );
      dLoss!.dispose();
    }

    if (options.logEvery && step % options.logEvery === 0) {
      console.log(
        `step ${step}: total ${total.toFixed(5)} ` +
          `(theta ${rec.loss_theta.toFixed(4)} image ${rec.loss_image.toFixed(4)} ` +
          `rain ${rec.loss_rain.toFixed(4)} self ${rec.loss_self.toFixed(4)})`
      );
    }
  }

  Y.dispose();
  thetaTrue.dispose();
  if (options.csvPath) writeCurveCsv(history, options.csvPath);
  if (options.checkpointPath) net.save(options.checkpointPath);
  return { net, history };
}

/**
 * Train only the angle-regression head on (tile, true angle) pairs.
 * The head is a few small convolutions, so long runs stay cheap no
 * matter how heavy the two-stream body is.
 */
export function trainAngleHead(
  pairs: Pair[],
  cfg: Partial<ToyNetConfig>,
  steps: number,
  learningRate = 3e-3
): { net: TwoStreamNet; maeDegrees: number; history: number[] } {
  const net = new TwoStreamNet(cfg);
  const batch = toBatch(pairs);
  const Y = tf.tensor3d(batch.rainy, [batch.count, batch.height, batch.width]);
  const thetaTrue = tf.tensor1d(batch.angles);
  const headVars = [net.headConv1, net.headConv2, net.headDense, net.headBias];
  const optimizer = tf.train.adam(learningRate);
  const history: number[] = [];
  for (let step = 0; step < steps; step++) {
    const loss = optimizer.minimize(
      () => lossAngle(thetaTrue, net.angleHead(Y)) as tf.Scalar,
      true,
      headVars
    );
    history.push(loss!.dataSync()[0]);
    loss!.dispose();
  }
  const pred = net.angleHead(Y).dataSync();
  let mae = 0;
  for (let i = 0; i < batch.count; i++) {
    mae += Math.abs(pred[i] - batch.angles[i]);
  }
  mae /= batch.count;
  Y.dispose();
  thetaTrue.dispose();
  return { net, maeDegrees: mae, history };
}

export interface EvalRow {
  id: string;
  psnrRainy: number;
  psnrDerained: number;
}

/**
 * Run the trained pipeline on held-out pairs and report PSNR against the
 * clean ground truth.  The predicted clean layer is un-rotated by the
 * predicted angle before scoring.
 */
export function evaluatePairs(net: TwoStreamNet, pairs: Pair[]): EvalRow[] {
  const rows: EvalRow[] = [];
  for (const pair of pairs) {
    const { height, width } = pair.rainy;
    const Y = tf.tensor3d(Float32Array.from(pair.rainy.data), [1, height, width]);
    const thetaPred = net.angleHead(Y);
    const Yr = rotateDifferentiable(Y, thetaPred);
    const { X } = net.forward(Yr);
    const theta = thetaPred.dataSync()[0];
    const xBack = rotatePlain(
      Float64Array.from(X.dataSync()),
      height,
      width,
      -theta
    );
    rows.push({
      id: pair.id,
      psnrRainy: psnr(pair.rainy.data, pair.clean.data),
      psnrDerained: psnr(xBack, pair.clean.data),
    });
    Y.dispose();
    thetaPred.dispose();
    Yr.dispose();
    X.dispose();
  }
  return rows;
}

export interface SingleImageResult {
  derained: Float64Array;
  rain: Float64Array;
  history: StepRecord[];
  finalLoss: number;
  rainMeanAbs: number;
}

/**
 * Overfit the network on one rainy tile using only the unsupervised
 * losses (no adversarial term), then return its decomposition.
 */
export function trainSingleImage(
  rainy: { height: number; width: number; data: ArrayLike<number> },
  cfg: Partial<ToyNetConfig>,
  steps: number,
  learningRate = 2e-3,
  angleDegrees = 0
): SingleImageResult {
  const net = new TwoStreamNet({ ...cfg, useAdversarial: false });
  const Y = tf.tensor3d(Float32Array.from(rainy.data as Float32Array), [
    1,
    rainy.height,
    rainy.width,
  ]);
  const thetaTrue = tf.tensor1d([angleDegrees]);
  const optimizer = tf.train.adam(learningRate);
  const history: StepRecord[] = [];

  for (let step = 0; step < steps; step++) {
    let parts: Omit<StepRecord, "loss_total" | "step"> | null = null;
    const lossVal = optimizer.minimize(
      (): tf.Scalar => {
        const thetaPred = net.angleHead(Y);
        const Yr = rotateDifferentiable(Y, thetaPred);
        const { X, R } = net.forward(Yr);
        const lTheta = lossAngle(thetaTrue, thetaPred);
        const lImage = lossImage(X, net.cfg.weights);
        const lRain = lossRain(R, Yr, net.cfg.weights);
        const lSelf = lossSelf(X, R, Yr);
        parts = {
          loss_theta: lTheta.dataSync()[0],
          loss_image: lImage.dataSync()[0],
          loss_rain: lRain.dataSync()[0],
          loss_self: lSelf.dataSync()[0],
        };
        return lTheta.add(lImage).add(lRain).add(lSelf) as tf.Scalar;
      },
      true,
      net.variables
    );
    const total = lossVal!.dataSync()[0];
    lossVal!.dispose();
    history.push({ step, loss_total: total, ...(parts! as object) } as StepRecord);
  }

  const thetaPred = net.angleHead(Y);
  const Yr = rotateDifferentiable(Y, thetaPred);
  const { X, R } = net.forward(Yr);
  const theta = thetaPred.dataSync()[0];
  const derained = rotatePlain(
    Float64Array.from(X.dataSync()),
    rainy.height,
    rainy.width,
    -theta
  );
  const rainData = Float64Array.from(R.dataSync());
  let meanAbs = 0;
  for (let i = 0; i < rainData.length; i++) meanAbs += Math.abs(rainData[i]);
  meanAbs /= rainData.length;

  const result: SingleImageResult = {
    derained,
    rain: rainData,
    history,
    finalLoss: history[history.length - 1].loss_total,
    rainMeanAbs: meanAbs,
  };
  [Y, thetaTrue, thetaPred, Yr, X, R].forEach((t) => t.dispose());
  return result;
}
