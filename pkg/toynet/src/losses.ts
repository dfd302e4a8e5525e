import * as tf from "@tensorflow/tfjs";

/**
 * Unsupervised loss terms mirroring the decomposition solver's energy.
 *
 * The raw term functions return per-batch SUMS with periodic forward
 * differences, exactly as the solver defines them (that is what the
 * cross-language parity fixture checks).  The training losses divide by
 * the pixel count so learning rates stay tile-size independent.
 */

export interface LossWeights {
  tau: number;
  lambdaAlong: number;
  lambdaAcross: number;
  mu: number;
}

// Network-loss weights from the reference configuration.
export const DEFAULT_WEIGHTS: LossWeights = {
  tau: 0.01,
  lambdaAlong: 1.5,
  lambdaAcross: 1.0,
  mu: 400.0,
};

/** Periodic forward difference along rows (the streak direction). */
export function gradAlong(t: tf.Tensor3D): tf.Tensor3D {
  const h = t.shape[1];
  const rolled = tf.concat(
    [t.slice([0, 1, 0], [-1, h - 1, -1]), t.slice([0, 0, 0], [-1, 1, -1])],
    1
  );
  return rolled.sub(t);
}

/** Periodic forward difference along columns (across the streaks). */
export function gradAcross(t: tf.Tensor3D): tf.Tensor3D {
  const w = t.shape[2];
  const rolled = tf.concat(
    [t.slice([0, 0, 1], [-1, -1, w - 1]), t.slice([0, 0, 0], [-1, -1, 1])],
    2
  );
  return rolled.sub(t);
}

const sumAbs = (t: tf.Tensor): tf.Tensor => tf.sum(tf.abs(t));

/** 1/2 * sum((X + R - Y_r)^2), the data-fidelity term. */
export function termFidelity(
  X: tf.Tensor3D,
  R: tf.Tensor3D,
  Yr: tf.Tensor3D
): tf.Tensor {
  return tf.sum(tf.square(X.add(R).sub(Yr))).mul(0.5);
}

export function termTvAlong(X: tf.Tensor3D): tf.Tensor {
  return sumAbs(gradAlong(X));
}

export function termTvAcross(X: tf.Tensor3D): tf.Tensor {
  return sumAbs(gradAcross(X));
}

export function termRainAlong(R: tf.Tensor3D): tf.Tensor {
  return sumAbs(gradAlong(R));
}

export function termRainAcross(R: tf.Tensor3D, Yr: tf.Tensor3D): tf.Tensor {
  return sumAbs(gradAcross(Yr).sub(gradAcross(R)));
}

/** Full decomposition energy (same definition as the solver library). */
export function energyTotal(
  X: tf.Tensor3D,
  R: tf.Tensor3D,
  Yr: tf.Tensor3D,
  w: { tau: number; lambdaAlong: number; lambdaAcross: number }
): tf.Tensor {
  return termFidelity(X, R, Yr)
    .add(termTvAlong(X).add(termTvAcross(X)).mul(w.tau))
    .add(termRainAlong(R).mul(w.lambdaAlong))
    .add(termRainAcross(R, Yr).mul(w.lambdaAcross));
}

/** RMS angle-regression loss in degrees. */
export function lossAngle(
  thetaTrue: tf.Tensor1D,
  thetaPred: tf.Tensor1D
): tf.Tensor {
  return tf.sqrt(tf.mean(tf.square(thetaTrue.sub(thetaPred))).add(1e-12));
}

/** Smoothness prior on the clean stream, per pixel. */
export function lossImage(X: tf.Tensor3D, w: LossWeights): tf.Tensor {
  const pixels = X.shape[0] * X.shape[1] * X.shape[2];
  return termTvAlong(X).add(termTvAcross(X)).mul(w.tau / pixels);
}

/** Directional prior on the rain stream, per pixel. */
export function lossRain(
  R: tf.Tensor3D,
  Yr: tf.Tensor3D,
  w: LossWeights
): tf.Tensor {
  const pixels = R.shape[0] * R.shape[1] * R.shape[2];
  return termRainAlong(R)
    .mul(w.lambdaAlong / pixels)
    .add(termRainAcross(R, Yr).mul(w.lambdaAcross / pixels));
}

/** Self-consistency: RMS of Y_r - X - R. */
export function lossSelf(
  X: tf.Tensor3D,
  R: tf.Tensor3D,
  Yr: tf.Tensor3D
): tf.Tensor {
  return tf.sqrt(tf.mean(tf.square(Yr.sub(X).sub(R))).add(1e-12));
}

export interface LossBreakdown {
  total: tf.Tensor;
  theta: number;
  image: number;
  rain: number;
  self: number;
}

/**
 * Overall training loss: angle + image + rain + self-consistency (the
 * adversarial term is added by the trainer when enabled).
 */
export function lossOverall(
  thetaTrue: tf.Tensor1D,
  thetaPred: tf.Tensor1D,
  X: tf.Tensor3D,
  R: tf.Tensor3D,
  Yr: tf.Tensor3D,
  w: LossWeights
): LossBreakdown {
  const lTheta = lossAngle(thetaTrue, thetaPred);
  const lImage = lossImage(X, w);
  const lRain = lossRain(R, Yr, w);
  const lSelf = lossSelf(X, R, Yr);
  const total = lTheta.add(lImage).add(lRain).add(lSelf);
  return {
    total,
    theta: lTheta.dataSync()[0],
    image: lImage.dataSync()[0],
    rain: lRain.dataSync()[0],
    self: lSelf.dataSync()[0],
  };
}
