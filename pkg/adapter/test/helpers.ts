import * as fs from 'node:fs';
import * as path from 'node:path';

import * as jpeg from 'jpeg-js';
import { PNG } from 'pngjs';

import { RasterImage } from '../src/image';

type Painter = (x: number, y: number) => [number, number, number];

export function makeRaster(width: number, height: number, paint: Painter): RasterImage {
  const pixels = new Uint8Array(width * height * 4);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = paint(x, y);
      const i = 4 * (y * width + x);
      pixels[i] = r;
      pixels[i + 1] = g;
      pixels[i + 2] = b;
      pixels[i + 3] = 255;
    }
  }
  return { width, height, pixels };
}

export function encodePng(raster: RasterImage): Buffer {
  const png = new PNG({ width: raster.width, height: raster.height });
  Buffer.from(raster.pixels).copy(png.data);
  return PNG.sync.write(png);
}

export function encodeJpeg(raster: RasterImage, quality = 90): Buffer {
  return jpeg.encode(
    { width: raster.width, height: raster.height, data: Buffer.from(raster.pixels) },
    quality,
  ).data;
}

export function writePng(dir: string, name: string, raster: RasterImage): void {
  fs.writeFileSync(path.join(dir, name), encodePng(raster));
}

/** Deterministic byte noise; pure in (seed, x, y). */
export function noisePainter(seed: number): Painter {
  return (x, y) => {
    let h = (seed ^ Math.imul(x, 374761393) ^ Math.imul(y, 668265263)) >>> 0;
    h = Math.imul(h ^ (h >>> 13), 1274126177) >>> 0;
    h ^= h >>> 16;
    return [h & 0xff, (h >>> 8) & 0xff, (h >>> 16) & 0xff];
  };
}

export const flat = (r: number, g: number, b: number): Painter => () => [r, g, b];

/** Dark field with one bright block, guaranteed person-like cell. */
export const brightBlock = (width: number, height: number): Painter => (x, y) =>
  x >= width / 3 && x < (2 * width) / 3 && y >= height / 3 && y < (2 * height) / 3
    ? [240, 240, 240]
    : [20, 20, 20];

export function gradientPainter(width: number): Painter {
  return (x) => {
    const v = Math.round((255 * x) / Math.max(1, width - 1));
    return [v, v, v];
  };
}
