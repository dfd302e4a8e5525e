const tf = require('@tensorflow/tfjs');
const { loadPairs } = require('./dist/data.js');
const { trainTwoStream, evaluatePairs } = require('./dist/train.js');
const { FAST_CONFIG } = require('./dist/model.js');

const train = loadPairs('fixtures/pairs_train');
const test = loadPairs('fixtures/pairs_test');
const W = { tau: 0.002, lambdaAlong: 0.45, lambdaAcross: 0.15, mu: 400 };
for (const [name, cfgExtra, lr] of [
  ["paper-w lr1e-3", {}, 1e-3],
  ["retuned lr1e-3", { weights: W }, 1e-3],
]) {
  const t0 = Date.now();
  const { net, history } = trainTwoStream(train, { ...FAST_CONFIG, seed: 1, ...cfgExtra }, 150, lr, { warmupSteps: 30 });
  let nInc = 0, worst = 0;
  for (let i = 1; i < history.length; i++) {
    const d = history[i].loss_total - history[i-1].loss_total;
    if (d >= 0) { nInc++; worst = Math.max(worst, d); }
  }
  const rows = evaluatePairs(net, test);
  const gains = rows.map(r => r.psnrDerained - r.psnrRainy);
  const mean = gains.reduce((a,b)=>a+b,0)/gains.length;
  console.log(`${name}: ${((Date.now()-t0)/150).toFixed(0)}ms/step inc=${nInc} worst=${worst.toExponential(1)} loss ${history[0].loss_total.toFixed(3)}->${history[149].loss_total.toFixed(3)} gain ${mean.toFixed(2)} [${gains.map(g=>g.toFixed(1)).join(',')}]`);
}
