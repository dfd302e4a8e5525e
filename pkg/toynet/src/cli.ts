import * as fs from "fs";
import * as path from "path";

import { loadPairs } from "./data";
import { FAST_CONFIG } from "./model";
import { readGray, writeGray } from "./png";
import { evaluatePairs, trainSingleImage, trainTwoStream } from "./train";

function parseArgs(argv: string[]): { cmd: string; opts: Record<string, string> } {
  const cmd = argv[0];
  const opts: Record<string, string> = {};
  for (let i = 1; i < argv.length; i++) {
    if (argv[i].startsWith("--")) {
      opts[argv[i].slice(2)] = argv[i + 1];
      i++;
    } else if (!opts._) {
      opts._ = argv[i];
    }
  }
  return { cmd, opts };
}

function usage(): void {
  console.log(
    [
      "usage:",
      "  node dist/cli.js train <pairs_dir> [--steps N] [--lr F] [--out DIR]",
      "  node dist/cli.js single <rainy.png> [--steps N] [--out DIR]",
    ].join("\n")
  );
}

function main(): number {
  const { cmd, opts } = parseArgs(process.argv.slice(2));
  if (cmd === "train") {
    const pairsDir = opts._;
    if (!pairsDir) {
      usage();
      return 2;
    }
    const steps = parseInt(opts.steps ?? "500", 10);
    const lr = parseFloat(opts.lr ?? "2e-3");
    const outDir = opts.out ?? "train_out";
    fs.mkdirSync(outDir, { recursive: true });
    const pairs = loadPairs(pairsDir);
    if (pairs.length === 0) {
      console.error(`no pairs found in ${pairsDir}`);
      return 2;
    }
    console.log(`training on ${pairs.length} tiles for ${steps} steps`);
    const { net, history } = trainTwoStream(pairs, FAST_CONFIG, steps, lr, {
      csvPath: path.join(outDir, "curve.csv"),
      checkpointPath: path.join(outDir, "checkpoint.json"),
      logEvery: 50,
    });
    const rows = evaluatePairs(net, pairs);
    const meanGain =
      rows.reduce((acc, r) => acc + (r.psnrDerained - r.psnrRainy), 0) /
      rows.length;
    console.log(`final loss ${history[history.length - 1].loss_total.toFixed(5)}`);
    console.log(`mean train PSNR gain ${meanGain.toFixed(2)} dB`);
    return 0;
  }
  if (cmd === "single") {
    const input = opts._;
    if (!input) {
      usage();
      return 2;
    }
    const steps = parseInt(opts.steps ?? "400", 10);
    const outDir = opts.out ?? "single_out";
    fs.mkdirSync(outDir, { recursive: true });
    const rainy = readGray(input);
    const result = trainSingleImage(rainy, FAST_CONFIG, steps);
    const stem = path.basename(input).replace(/\.png$/, "");
    writeGray(
      { height: rainy.height, width: rainy.width, data: result.derained },
      path.join(outDir, `${stem}.X.png`)
    );
    writeGray(
      { height: rainy.height, width: rainy.width, data: result.rain },
      path.join(outDir, `${stem}.R.png`)
    );
    console.log(
      `final loss ${result.finalLoss.toFixed(5)}, ` +
        `mean |rain| ${result.rainMeanAbs.toFixed(5)}`
    );
    return 0;
  }
  usage();
  return 2;
}

process.exit(main());
