#!/usr/bin/env node
import { parseArgs } from 'node:util';

import { exportAnnotations } from './exporter';
import { UnknownModel } from './types';

const USAGE = `usage: emofuse-adapter export --images DIR --out DIR \\
    --detector REF --vad REF --classifier REF [--threshold X] [--task NAME]

Runs the referenced models over every PNG/JPEG in --images and writes
one sidecar per image plus manifest.json into --out, ready for
'emofuse classify'. Builtin references: builtin:cell-detector,
builtin:rgb-vad, builtin:luma-classifier.

options:
  --threshold X   detection confidence mirror of the engine filter (default: 0.5)
  --task NAME     manifest task, child_labour or displaced_populations
                  (default: child_labour)
`;

const EXIT_OK = 0;
const EXIT_USAGE = 2;
const EXIT_DATA = 3;

const TASKS = new Set(['child_labour', 'displaced_populations']);

function fail(code: number, message: string): never {
  console.error(`emofuse-adapter: ${message}`);
  process.exit(code);
}

export function main(argv: string[]): number {
  if (argv[0] === '--help' || argv[0] === '-h') {
    console.log(USAGE);
    return EXIT_OK;
  }
  if (argv[0] !== 'export') {
    fail(EXIT_USAGE, `expected the 'export' command\n${USAGE}`);
  }

  let values;
  try {
    ({ values } = parseArgs({
      args: argv.slice(1),
      options: {
        images: { type: 'string' },
        out: { type: 'string' },
        detector: { type: 'string' },
        vad: { type: 'string' },
        classifier: { type: 'string' },
        threshold: { type: 'string', default: '0.5' },
        task: { type: 'string', default: 'child_labour' },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    fail(EXIT_USAGE, err instanceof Error ? err.message : String(err));
  }

  for (const flag of ['images', 'out', 'detector', 'vad', 'classifier'] as const) {
    if (!values[flag]) {
      fail(EXIT_USAGE, `--${flag} is required\n${USAGE}`);
    }
  }
  const threshold = Number(values.threshold);
  if (!Number.isFinite(threshold) || threshold < 0 || threshold > 1) {
    fail(EXIT_USAGE, `--threshold must be a number in [0, 1], got '${values.threshold}'`);
  }
  if (!TASKS.has(values.task!)) {
    fail(EXIT_USAGE, `--task must be one of: ${[...TASKS].join(', ')}`);
  }

  try {
    const result = exportAnnotations({
      imageDirectory: values.images!,
      outputDirectory: values.out!,
      detectorRef: values.detector!,
      vadRef: values.vad!,
      classifierRef: values.classifier!,
      detectionThreshold: threshold,
      task: values.task!,
    });
    const skipNote = result.skipped.length > 0 ? ` (${result.skipped.length} skipped)` : '';
    console.error(`wrote ${result.written.length} sidecars and ${result.manifestPath}${skipNote}`);
    return EXIT_OK;
  } catch (err) {
    if (err instanceof UnknownModel) {
      fail(EXIT_USAGE, err.message);
    }
    fail(EXIT_DATA, err instanceof Error ? err.message : String(err));
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
