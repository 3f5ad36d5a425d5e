export { decodeImage, imageIdFor, isSupportedImage } from './image';
export type { RasterImage } from './image';
export { resolveClassifier, resolveDetector, resolveVadModel } from './models';
export type { ClassifierModel, DetectorModel, VadModel } from './models';
export { exportAnnotations } from './exporter';
export type { ExportResult } from './exporter';
export { normalizeVad } from './vad';
export type { VadRange } from './vad';
export { NonFiniteOutput, UnknownModel } from './types';
export type {
  AdapterConfig,
  Box,
  Detection,
  Manifest,
  ManifestEntry,
  PersonVad,
  RawScores,
  Sidecar,
  SkippedEntry,
} from './types';
