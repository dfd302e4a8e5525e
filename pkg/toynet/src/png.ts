import * as fs from "fs";
import { PNG } from "pngjs";

/** Grayscale image as a flat row-major float array in [0, 1]. */
export interface GrayImage {
  height: number;
  width: number;
  data: Float64Array;
}

const LUMA = [0.299, 0.587, 0.114];

/** Read a PNG and return its luma plane scaled to [0, 1]. */
export function readGray(path: string): GrayImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const { width, height } = png;
  const out = new Float64Array(width * height);
  // pngjs normalizes everything to 8-bit RGBA in png.data
  for (let i = 0; i < width * height; i++) {
    const r = png.data[i * 4] / 255;
    const g = png.data[i * 4 + 1] / 255;
    const b = png.data[i * 4 + 2] / 255;
    out[i] = LUMA[0] * r + LUMA[1] * g + LUMA[2] * b;
  }
  return { height, width, data: out };
}

/** Write a [0, 1] grayscale image as an 8-bit PNG. */
export function writeGray(img: GrayImage, path: string): void {
  const png = new PNG({ width: img.width, height: img.height });
  for (let i = 0; i < img.width * img.height; i++) {
    const v = Math.max(0, Math.min(1, img.data[i]));
    const q = Math.round(v * 255);
    png.data[i * 4] = q;
    png.data[i * 4 + 1] = q;
    png.data[i * 4 + 2] = q;
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png));
}

export function psnr(a: ArrayLike<number>, b: ArrayLike<number>): number {
  let sum = 0;
  const n = a.length;
  for (let i = 0; i < n; i++) {
    const d = a[i] - b[i];
    sum += d * d;
  }
  const mse = sum / n;
  if (mse === 0) return Infinity;
  return 10 * Math.log10(1 / mse);
}

/** Central crop of a flat image, keeping `fraction` of each side. */
export function centralCrop(img: GrayImage, fraction: number): GrayImage {
  const ch = Math.max(1, Math.round(img.height * fraction));
  const cw = Math.max(1, Math.round(img.width * fraction));
  const r0 = Math.floor((img.height - ch) / 2);
  const c0 = Math.floor((img.width - cw) / 2);
  const out = new Float64Array(ch * cw);
  for (let r = 0; r < ch; r++) {
    for (let c = 0; c < cw; c++) {
      out[r * cw + c] = img.data[(r0 + r) * img.width + (c0 + c)];
    }
  }
  return { height: ch, width: cw, data: out };
}
