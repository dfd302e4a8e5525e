const { loadPairs } = require("./dist/data.js");
const {
  trainTwoStream,
  evaluatePairs,
  trainAngleHead,
  trainSingleImage,
} = require("./dist/train.js");
const { FAST_CONFIG } = require("./dist/model.js");
const { psnr } = require("./dist/png.js");

const train = loadPairs("fixtures/pairs_train");
const test = loadPairs("fixtures/pairs_test");
const t0 = Date.now();
const { net, history } = trainTwoStream(
  train,
  { ...FAST_CONFIG, seed: 1 },
  500,
  2e-3,
  { warmupSteps: 50, monotone: true }
);
let nInc = 0;
for (let i = 1; i < history.length; i++) {
  if (history[i].loss_total - history[i - 1].loss_total >= 0) nInc++;
}
const rows = evaluatePairs(net, test);
const gains = rows.map((r) => r.psnrDerained - r.psnrRainy);
const mean = gains.reduce((a, b) => a + b, 0) / gains.length;
console.log(
  `monotone 500: inc=${nInc} loss ${history[0].loss_total.toFixed(3)}->` +
    `${history[499].loss_total.toFixed(3)} mean gain ${mean.toFixed(2)} ` +
    `[${gains.map((g) => g.toFixed(1)).join(",")}] (${((Date.now() - t0) / 1000).toFixed(0)}s)`
);

const singles = loadPairs("fixtures/pairs_single");
let t1 = Date.now();
const sr = trainSingleImage(singles[0].rainy, { ...FAST_CONFIG, seed: 2 }, 300, 2e-3);
console.log(
  `single rainy: psnr ${psnr(singles[0].rainy.data, singles[0].clean.data).toFixed(2)} -> ` +
    `${psnr(sr.derained, singles[0].clean.data).toFixed(2)} (${((Date.now() - t1) / 1000).toFixed(0)}s)`
);
t1 = Date.now();
const sc = trainSingleImage(singles[1].clean, { ...FAST_CONFIG, seed: 3 }, 300, 2e-3);
console.log(
  `single clean: mean|R| ${sc.rainMeanAbs.toFixed(4)} (${((Date.now() - t1) / 1000).toFixed(0)}s)`
);

t1 = Date.now();
const ang = loadPairs("fixtures/pairs_angles");
const ah = trainAngleHead(ang, { ...FAST_CONFIG, seed: 5 }, 2000, 3e-3);
console.log(
  `angle head: MAE ${ah.maeDegrees.toFixed(2)} deg (${((Date.now() - t1) / 1000).toFixed(0)}s)`
);
