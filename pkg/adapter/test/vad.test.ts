import { describe, expect, it } from 'vitest';

import { NonFiniteOutput } from '../src/types';
import { normalizeVad } from '../src/vad';

describe('normalizeVad', () => {
  it('maps the midpoint of a [0, 1] model onto 5.5', () => {
    const out = normalizeVad([0.5, 0.5, 0.5], [0, 1]);
    expect(out.valence).toBe(5.5);
    expect(out.arousal).toBe(5.5);
    expect(out.dominance).toBe(5.5);
  });

  it('maps [0, 1] endpoints onto the scale endpoints', () => {
    expect(normalizeVad([0, 0, 0], [0, 1]).valence).toBe(1);
    expect(normalizeVad([1, 1, 1], [0, 1]).dominance).toBe(10);
  });

  it('passes a model already on [1, 10] through unchanged', () => {
    const out = normalizeVad([7.2, 1.0, 10.0], [1, 10]);
    expect(out.valence).toBe(7.2);
    expect(out.arousal).toBe(1.0);
    expect(out.dominance).toBe(10.0);
  });

  it('clips outputs that land outside the scale', () => {
    const above = normalizeVad([11.3, 5.0, 5.0], [1, 10]);
    expect(above.valence).toBe(10);
    const below = normalizeVad([-0.2, 0.5, 0.5], [0, 1]);
    expect(below.valence).toBe(1);
  });

  it('handles a shifted native range', () => {
    // [-1, 1]: scale 4.5, so 0 lands on 5.5 and 0.5 on 7.75.
    const out = normalizeVad([0, 0.5, -1], [-1, 1]);
    expect(out.valence).toBeCloseTo(5.5, 12);
    expect(out.arousal).toBeCloseTo(7.75, 12);
    expect(out.dominance).toBe(1);
  });

  it('rejects non-finite model output', () => {
    expect(() => normalizeVad([NaN, 5, 5], [1, 10])).toThrow(NonFiniteOutput);
    expect(() => normalizeVad([5, Infinity, 5], [1, 10])).toThrow(NonFiniteOutput);
    expect(() => normalizeVad([5, 5, -Infinity], [1, 10])).toThrow(/component 2/);
  });

  it('rejects a degenerate native range', () => {
    expect(() => normalizeVad([1, 1, 1], [3, 3])).toThrow(/native range/);
    expect(() => normalizeVad([1, 1, 1], [5, 2])).toThrow(/native range/);
    expect(() => normalizeVad([1, 1, 1], [0, Infinity])).toThrow(/native range/);
  });
});
