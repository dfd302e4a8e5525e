const tf = require("@tensorflow/tfjs");
const { loadPairs } = require("./dist/data.js");
const { trainTwoStream, evaluatePairs } = require("./dist/train.js");
const { FAST_CONFIG } = require("./dist/model.js");
const { rotateDifferentiable } = require("./dist/rotate.js");

const train = loadPairs("fixtures/pairs_train");
const test = loadPairs("fixtures/pairs_test");
for (const [name, cfgExtra, lr, steps] of [
  ["abs paper-w 150", {}, 1e-3, 150],
  ["abs paper-w 300", {}, 1e-3, 300],
]) {
  const t0 = Date.now();
  const { net, history } = trainTwoStream(
    train,
    { ...FAST_CONFIG, seed: 1, ...cfgExtra },
    steps,
    lr,
    { warmupSteps: 30 }
  );
  let nInc = 0,
    worst = 0;
  for (let i = 1; i < history.length; i++) {
    const d = history[i].loss_total - history[i - 1].loss_total;
    if (d >= 0) {
      nInc++;
      worst = Math.max(worst, d);
    }
  }
  const rows = evaluatePairs(net, test);
  const gains = rows.map((r) => r.psnrDerained - r.psnrRainy);
  const mean = gains.reduce((a, b) => a + b, 0) / gains.length;
  const p = test[0];
  const Y = tf.tensor3d(Float32Array.from(p.rainy.data), [1, 16, 16]);
  const Yr = rotateDifferentiable(Y, net.angleHead(Y));
  const { R } = net.forward(Yr);
  const rd = R.dataSync();
  let rmean = 0;
  for (const v of rd) rmean += v;
  console.log(
    `${name}: inc=${nInc} worst=${worst.toExponential(1)} ` +
      `loss->${history[steps - 1].loss_total.toFixed(3)} gain ${mean.toFixed(2)} ` +
      `[${gains.map((g) => g.toFixed(1)).join(",")}] Rmean ${(rmean / rd.length).toFixed(3)} ` +
      `(${((Date.now() - t0) / 1000).toFixed(0)}s)`
  );
}
