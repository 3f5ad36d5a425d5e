/** Pixel rectangle as [xMin, yMin, xMax, yMax], max edges exclusive. */
export type Box = [number, number, number, number];

export interface Detection {
  box: Box;
  label: string;
  confidence: number;
}

export interface PersonVad {
  valence: number;
  arousal: number;
  dominance: number;
}

export interface RawScores {
  violation: number;
  no_violation: number;
}

/** One sidecar document, matching the engine's annotation schema. */
export interface Sidecar {
  image_id: string;
  detections: Detection[];
  person_vads: PersonVad[];
  raw_scores: RawScores;
}

export interface ManifestEntry {
  image_id: string;
  sidecar: string;
}

export interface SkippedEntry {
  source: string;
  reason: string;
}

export interface Manifest {
  name: string;
  task: string;
  params: { detection_threshold: number };
  entries: ManifestEntry[];
  skipped?: SkippedEntry[];
}

export interface AdapterConfig {
  imageDirectory: string;
  outputDirectory: string;
  detectorRef: string;
  vadRef: string;
  classifierRef: string;
  /** Mirrors the engine's person filter; VADs are only computed for persons above it. */
  detectionThreshold: number;
  task: string;
}

/** A model emitted NaN or infinity where a finite number was required. */
export class NonFiniteOutput extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'NonFiniteOutput';
  }
}

/** A model reference did not resolve to anything runnable. */
export class UnknownModel extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'UnknownModel';
  }
}
