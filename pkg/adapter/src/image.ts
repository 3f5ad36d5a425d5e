import * as path from 'node:path';

import * as jpeg from 'jpeg-js';
import { PNG } from 'pngjs';

/** Decoded raster, RGBA interleaved, 8 bits per channel. */
export interface RasterImage {
  width: number;
  height: number;
  pixels: Uint8Array;
}

const SUPPORTED = new Set(['.png', '.jpg', '.jpeg']);

export function isSupportedImage(fileName: string): boolean {
  return SUPPORTED.has(path.extname(fileName).toLowerCase());
}

/** Strip the extension; the stem becomes the image id. */
export function imageIdFor(fileName: string): string {
  return path.basename(fileName, path.extname(fileName));
}

/**
 * Decode PNG or JPEG bytes into an RGBA raster. Throws on malformed
 * input; callers decide whether that aborts the run or skips the file.
 */
export function decodeImage(fileName: string, bytes: Buffer): RasterImage {
  const ext = path.extname(fileName).toLowerCase();
  if (ext === '.png') {
    const png = PNG.sync.read(bytes);
    return { width: png.width, height: png.height, pixels: new Uint8Array(png.data) };
  }
  if (ext === '.jpg' || ext === '.jpeg') {
    const img = jpeg.decode(bytes, { useTArray: true, formatAsRGBA: true });
    return { width: img.width, height: img.height, pixels: img.data };
  }
  throw new Error(`unsupported image extension: ${fileName}`);
}
