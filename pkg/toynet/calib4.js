const { loadPairs } = require("./dist/data.js");
const { trainTwoStream, evaluatePairs } = require("./dist/train.js");
const { FAST_CONFIG } = require("./dist/model.js");

const train = loadPairs("fixtures/pairs_train");
const test = loadPairs("fixtures/pairs_test");
for (const [name, W, lr] of [
  ["paper", undefined, 2e-3],
  ["capture", { tau: 0.005, lambdaAlong: 0.5, lambdaAcross: 1.0, mu: 400 }, 2e-3],
]) {
  const t0 = Date.now();
  const cfg = { ...FAST_CONFIG, seed: 1 };
  if (W) cfg.weights = W;
  const { net, history } = trainTwoStream(train, cfg, 300, lr, { warmupSteps: 50 });
  let nInc = 0, worst = 0;
  for (let i = 1; i < history.length; i++) {
    const d = history[i].loss_total - history[i - 1].loss_total;
    if (d >= 0) { nInc++; worst = Math.max(worst, d); }
  }
  const rows = evaluatePairs(net, test);
  const gains = rows.map((r) => r.psnrDerained - r.psnrRainy);
  const mean = gains.reduce((a, b) => a + b, 0) / gains.length;
  console.log(`${name}: inc=${nInc} worst=${worst ? worst.toExponential(1) : 0} loss->${history[299].loss_total.toFixed(3)} mean gain ${mean.toFixed(2)} [${gains.map((g) => g.toFixed(1)).join(",")}] (${((Date.now()-t0)/1000).toFixed(0)}s)`);
}
