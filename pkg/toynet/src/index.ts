export { loadPairs, toBatch, Pair } from "./data";
export {
  DEFAULT_WEIGHTS,
  LossWeights,
  energyTotal,
  gradAcross,
  gradAlong,
  lossAngle,
  lossImage,
  lossOverall,
  lossRain,
  lossSelf,
  termFidelity,
  termRainAcross,
  termRainAlong,
  termTvAcross,
  termTvAlong,
} from "./losses";
export {
  DEFAULT_CONFIG,
  FAST_CONFIG,
  PatchDiscriminator,
  ToyNetConfig,
  TwoStreamNet,
} from "./model";
export { GrayImage, centralCrop, psnr, readGray, writeGray } from "./png";
export { detach, rotateDifferentiable, rotatePlain } from "./rotate";
export {
  CSV_HEADER,
  EvalRow,
  SingleImageResult,
  StepRecord,
  TrainResult,
  evaluatePairs,
  trainSingleImage,
  trainTwoStream,
  writeCurveCsv,
} from "./train";
