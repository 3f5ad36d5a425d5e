import * as fs from 'node:fs';
import * as path from 'node:path';

import { decodeImage, imageIdFor, isSupportedImage, RasterImage } from './image';
import { ClassifierModel, DetectorModel, resolveClassifier, resolveDetector, resolveVadModel, VadModel } from './models';
import { AdapterConfig, Manifest, ManifestEntry, Sidecar, SkippedEntry } from './types';
import { normalizeVad } from './vad';

export interface ExportResult {
  manifestPath: string;
  written: string[];
  skipped: SkippedEntry[];
}

function buildSidecar(
  imageId: string,
  image: RasterImage,
  detector: DetectorModel,
  vadModel: VadModel,
  classifier: ClassifierModel,
  detectionThreshold: number,
): Sidecar {
  const detections = detector.detect(image);
  // The engine filters to persons above the threshold and expects one
  // VAD per survivor, in detection order. Everything else stays in the
  // sidecar untouched; filtering is the engine's job, not ours.
  const personVads = detections
    .filter((d) => d.label === 'person' && d.confidence > detectionThreshold)
    .map((d) => normalizeVad(vadModel.estimate(image, d.box), vadModel.nativeRange));
  return {
    image_id: imageId,
    detections,
    person_vads: personVads,
    raw_scores: classifier.score(image),
  };
}

/**
 * Run the three models over every supported image in the configured
 * directory and write one sidecar per image plus a manifest. A failure
 * on one image (unreadable file, model blow-up) is logged, recorded in
 * the manifest under 'skipped', and the run continues.
 */
export function exportAnnotations(config: AdapterConfig): ExportResult {
  const detector = resolveDetector(config.detectorRef);
  const vadModel = resolveVadModel(config.vadRef);
  const classifier = resolveClassifier(config.classifierRef);

  const fileNames = fs
    .readdirSync(config.imageDirectory)
    .filter(isSupportedImage)
    .sort();
  if (fileNames.length === 0) {
    throw new Error(`no PNG or JPEG images found in ${config.imageDirectory}`);
  }

  fs.mkdirSync(config.outputDirectory, { recursive: true });

  const entries: ManifestEntry[] = [];
  const written: string[] = [];
  const skipped: SkippedEntry[] = [];
  const seenIds = new Set<string>();

  for (const fileName of fileNames) {
    const imageId = imageIdFor(fileName);
    try {
      if (seenIds.has(imageId)) {
        throw new Error(`image id '${imageId}' already produced by another file`);
      }
      const bytes = fs.readFileSync(path.join(config.imageDirectory, fileName));
      const image = decodeImage(fileName, bytes);
      const sidecar = buildSidecar(imageId, image, detector, vadModel, classifier, config.detectionThreshold);
      const sidecarName = `${imageId}.json`;
      fs.writeFileSync(path.join(config.outputDirectory, sidecarName), JSON.stringify(sidecar, null, 2) + '\n');
      seenIds.add(imageId);
      entries.push({ image_id: imageId, sidecar: sidecarName });
      written.push(sidecarName);
    } catch (err) {
      const reason = err instanceof Error ? err.message : String(err);
      console.warn(`skipping ${fileName}: ${reason}`);
      skipped.push({ source: fileName, reason });
    }
  }

  const manifest: Manifest = {
    name: path.basename(path.resolve(config.imageDirectory)),
    task: config.task,
    params: { detection_threshold: config.detectionThreshold },
    entries,
  };
  if (skipped.length > 0) {
    manifest.skipped = skipped;
  }
  const manifestPath = path.join(config.outputDirectory, 'manifest.json');
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n');

  return { manifestPath, written, skipped };
}
