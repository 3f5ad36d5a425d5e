import { RasterImage } from './image';
import { Box, Detection, RawScores, UnknownModel } from './types';
import { VadRange } from './vad';

/**
 * Model interfaces. A reference string picks an implementation; the
 * builtins below are deterministic pixel-statistic stand-ins so the
 * export pipeline can run and be tested without model weights. A real
 * integration implements the same interface: the detector reports every
 * class it sees (including 'person') with raw confidences, the VAD
 * model returns a (valence, arousal, dominance) triple on its declared
 * native range, and the classifier returns a probability pair that
 * sums to 1.
 */
export interface DetectorModel {
  detect(image: RasterImage): Detection[];
}

export interface VadModel {
  nativeRange: VadRange;
  estimate(image: RasterImage, box: Box): [number, number, number];
}

export interface ClassifierModel {
  score(image: RasterImage): RawScores;
}

function luminance(r: number, g: number, b: number): number {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

function meanLuminance(image: RasterImage): number {
  const { pixels } = image;
  let total = 0;
  for (let i = 0; i < pixels.length; i += 4) {
    total += luminance(pixels[i]!, pixels[i + 1]!, pixels[i + 2]!);
  }
  return total / (image.width * image.height);
}

function meanLuminanceIn(image: RasterImage, box: Box): number {
  const [x0, y0, x1, y1] = box;
  let total = 0;
  for (let y = y0; y < y1; y++) {
    for (let x = x0; x < x1; x++) {
      const i = 4 * (y * image.width + x);
      total += luminance(image.pixels[i]!, image.pixels[i + 1]!, image.pixels[i + 2]!);
    }
  }
  return total / ((x1 - x0) * (y1 - y0));
}

/**
 * Splits the image into a coarse grid and reports cells whose mean
 * luminance deviates from the global mean. Brighter-than-average cells
 * are called 'person', darker ones 'object'; confidence grows with the
 * deviation. Crude, but stable and sensitive to composition, which is
 * all the pipeline needs from a stand-in.
 */
class CellDetector implements DetectorModel {
  detect(image: RasterImage): Detection[] {
    const cols = Math.min(3, image.width);
    const rows = Math.min(3, image.height);
    const globalMean = meanLuminance(image);
    const detections: Detection[] = [];
    for (let r = 0; r < rows; r++) {
      for (let c = 0; c < cols; c++) {
        const box: Box = [
          Math.floor((c * image.width) / cols),
          Math.floor((r * image.height) / rows),
          Math.floor(((c + 1) * image.width) / cols),
          Math.floor(((r + 1) * image.height) / rows),
        ];
        const cellMean = meanLuminanceIn(image, box);
        const deviation = Math.abs(cellMean - globalMean) / 255;
        if (deviation <= 0.015) {
          continue;
        }
        detections.push({
          box,
          label: cellMean >= globalMean ? 'person' : 'object',
          confidence: Math.min(1, 0.35 + 3 * deviation),
        });
      }
    }
    return detections;
  }
}

/** Mean R, G, B inside the box, each scaled to [0, 1], as V, A, D. */
class RgbVad implements VadModel {
  readonly nativeRange: VadRange = [0, 1];

  estimate(image: RasterImage, box: Box): [number, number, number] {
    const [x0, y0, x1, y1] = box;
    let r = 0;
    let g = 0;
    let b = 0;
    for (let y = y0; y < y1; y++) {
      for (let x = x0; x < x1; x++) {
        const i = 4 * (y * image.width + x);
        r += image.pixels[i]!;
        g += image.pixels[i + 1]!;
        b += image.pixels[i + 2]!;
      }
    }
    const n = (x1 - x0) * (y1 - y0) * 255;
    return [r / n, g / n, b / n];
  }
}

/** Brighter scenes score higher for 'violation'; pair sums to 1 exactly. */
class LumaClassifier implements ClassifierModel {
  score(image: RasterImage): RawScores {
    const violation = 0.02 + 0.96 * (meanLuminance(image) / 255);
    return { violation, no_violation: 1 - violation };
  }
}

const DETECTORS: Record<string, () => DetectorModel> = {
  'builtin:cell-detector': () => new CellDetector(),
};

const VAD_MODELS: Record<string, () => VadModel> = {
  'builtin:rgb-vad': () => new RgbVad(),
};

const CLASSIFIERS: Record<string, () => ClassifierModel> = {
  'builtin:luma-classifier': () => new LumaClassifier(),
};

function resolve<T>(kind: string, ref: string, registry: Record<string, () => T>): T {
  const make = registry[ref];
  if (!make) {
    const known = Object.keys(registry).join(', ');
    throw new UnknownModel(`unknown ${kind} reference '${ref}' (available: ${known})`);
  }
  return make();
}

export function resolveDetector(ref: string): DetectorModel {
  return resolve('detector', ref, DETECTORS);
}

export function resolveVadModel(ref: string): VadModel {
  return resolve('VAD model', ref, VAD_MODELS);
}

export function resolveClassifier(ref: string): ClassifierModel {
  return resolve('classifier', ref, CLASSIFIERS);
}
