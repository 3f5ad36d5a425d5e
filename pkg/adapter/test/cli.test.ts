import { spawnSync } from 'node:child_process';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { fileURLToPath } from 'node:url';

import { afterEach, beforeEach, describe, expect, it } from 'vitest';

import { brightBlock, gradientPainter, makeRaster, writePng } from './helpers';

const CLI = path.resolve(path.dirname(fileURLToPath(import.meta.url)), '../dist/cli.js');

let root: string;
let imageDir: string;

beforeEach(() => {
  root = fs.mkdtempSync(path.join(os.tmpdir(), 'adapter-cli-'));
  imageDir = path.join(root, 'images');
  fs.mkdirSync(imageDir);
  writePng(imageDir, 'one.png', makeRaster(24, 24, brightBlock(24, 24)));
  writePng(imageDir, 'two.png', makeRaster(24, 24, gradientPainter(24)));
});

afterEach(() => {
  fs.rmSync(root, { recursive: true, force: true });
});

function runCli(...args: string[]) {
  return spawnSync(process.execPath, [CLI, ...args], { encoding: 'utf8', cwd: root });
}

function exportArgs(outDir: string, extra: string[] = []): string[] {
  return [
    'export',
    '--images', imageDir,
    '--out', path.join(root, outDir),
    '--detector', 'builtin:cell-detector',
    '--vad', 'builtin:rgb-vad',
    '--classifier', 'builtin:luma-classifier',
    ...extra,
  ];
}

describe('emofuse-adapter CLI', () => {
  it('exports a folder and reports the count', () => {
    const run = runCli(...exportArgs('out'));
    expect(run.status, run.stderr).toBe(0);
    expect(run.stderr).toContain('wrote 2 sidecars');
    expect(fs.readdirSync(path.join(root, 'out')).sort()).toEqual(['manifest.json', 'one.json', 'two.json']);
  });

  it('exits 0 but mentions the skip count when an image is broken', () => {
    fs.writeFileSync(path.join(imageDir, 'broken.png'), 'nope');
    const run = runCli(...exportArgs('out'));
    expect(run.status).toBe(0);
    expect(run.stderr).toContain('(1 skipped)');
    expect(run.stderr).toContain('broken.png');
  });

  it('prints usage on --help', () => {
    const run = runCli('--help');
    expect(run.status).toBe(0);
    expect(run.stdout).toContain('emofuse-adapter export');
    expect(run.stdout).toContain('builtin:cell-detector');
  });

  it('rejects a missing command', () => {
    const run = runCli();
    expect(run.status).toBe(2);
    expect(run.stderr).toContain('usage:');
  });

  it('rejects an unknown flag', () => {
    expect(runCli(...exportArgs('out', ['--wat', '1'])).status).toBe(2);
  });

  it('rejects a missing required flag', () => {
    const run = runCli('export', '--images', imageDir, '--out', path.join(root, 'out'));
    expect(run.status).toBe(2);
    expect(run.stderr).toContain('--detector is required');
  });

  it('rejects an out-of-range threshold', () => {
    expect(runCli(...exportArgs('out', ['--threshold', '1.5'])).status).toBe(2);
    expect(runCli(...exportArgs('out', ['--threshold', 'abc'])).status).toBe(2);
  });

  it('rejects an unknown task', () => {
    const run = runCli(...exportArgs('out', ['--task', 'wildlife']));
    expect(run.status).toBe(2);
    expect(run.stderr).toContain('child_labour');
  });

  it('rejects an unknown model reference as a usage error', () => {
    const run = runCli('export', '--images', imageDir, '--out', path.join(root, 'out'),
      '--detector', 'vgg16', '--vad', 'builtin:rgb-vad', '--classifier', 'builtin:luma-classifier');
    expect(run.status).toBe(2);
    expect(run.stderr).toContain('builtin:cell-detector');
  });

  it('reports a missing image directory as a data error', () => {
    const run = runCli('export', '--images', path.join(root, 'absent'), '--out', path.join(root, 'out'),
      '--detector', 'builtin:cell-detector', '--vad', 'builtin:rgb-vad', '--classifier', 'builtin:luma-classifier');
    expect(run.status).toBe(3);
  });

  it('honours --threshold and --task in the manifest', () => {
    const run = runCli(...exportArgs('out', ['--threshold', '0.75', '--task', 'displaced_populations']));
    expect(run.status).toBe(0);
    const manifest = JSON.parse(fs.readFileSync(path.join(root, 'out', 'manifest.json'), 'utf8'));
    expect(manifest.params.detection_threshold).toBe(0.75);
    expect(manifest.task).toBe('displaced_populations');
  });
});
