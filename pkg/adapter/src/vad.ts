import { NonFiniteOutput, PersonVad } from './types';

export type VadRange = [low: number, high: number];

/**
 * Map a model's (valence, arousal, dominance) triple from its declared
 * native range onto the 1-10 scale the engine expects, then clip.
 *
 * The scale factor is computed once up front so a model already on
 * [1, 10] gets scale exactly 1 and passes through unchanged.
 */
export function normalizeVad(output: readonly [number, number, number], nativeRange: VadRange): PersonVad {
  const [low, high] = nativeRange;
  if (!Number.isFinite(low) || !Number.isFinite(high) || high <= low) {
    throw new Error(`invalid native range [${low}, ${high}]: need finite low < high`);
  }
  const scale = 9 / (high - low);
  const mapped = output.map((value, i) => {
    if (!Number.isFinite(value)) {
      throw new NonFiniteOutput(`VAD component ${i} is ${value}`);
    }
    const onScale = 1 + scale * (value - low);
    return Math.min(10, Math.max(1, onScale));
  });
  return { valence: mapped[0]!, arousal: mapped[1]!, dominance: mapped[2]! };
}
