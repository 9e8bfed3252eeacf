/**
 * Deterministic sentence encoder: word unigrams plus character 3..5-grams,
 * feature-hashed into a fixed dimension and L2-normalized.
 *
 * No model weights and no randomness, so the same text always produces the
 * bitwise-identical vector; character grams let morphological variants of
 * a word ("anchor" / "anchoring") land near each other.
 */

const MIN_GRAM = 3;
const MAX_GRAM = 5;

/** FNV-1a 32-bit hash. */
function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

function tokenize(text: string): string[] {
  return text
    .toLowerCase()
    .split(/[^a-z0-9']+/)
    .filter((t) => t.length > 0);
}

function* features(text: string): Generator<string> {
  for (const token of tokenize(text)) {
    yield `w:${token}`;
    // boundary markers keep prefix/suffix grams distinct from inner ones
    const padded = `^${token}$`;
    for (let n = MIN_GRAM; n <= MAX_GRAM; n++) {
      for (let i = 0; i + n <= padded.length; i++) {
        yield `c:${padded.slice(i, i + n)}`;
      }
    }
  }
}

export class HashedNgramEncoder {
  readonly modelId: string;
  readonly dimension: number;

  constructor(dimension = 384) {
    if (!Number.isInteger(dimension) || dimension < 8) {
      throw new Error(`dimension must be an integer >= 8, got ${dimension}`);
    }
    this.dimension = dimension;
    this.modelId = `hashed-ngram-${dimension}`;
  }

  encode(text: string): number[] {
    const vec = new Array<number>(this.dimension).fill(0);
    for (const feature of features(text)) {
      const h = fnv1a(feature);
      const bucket = h % this.dimension;
      // one hash bit decides the sign, which keeps colliding features
      // from always reinforcing each other
      const sign = (h & 0x80000000) === 0 ? 1 : -1;
      vec[bucket] += sign;
    }
    const norm = Math.sqrt(vec.reduce((acc, v) => acc + v * v, 0));
    if (norm === 0) {
      return vec;
    }
    return vec.map((v) => v / norm);
  }

  encodeBatch(texts: string[]): number[][] {
    return texts.map((t) => this.encode(t));
  }
}

/** Parse a model name like "hashed-ngram-384" into an encoder. */
export function encoderFromModelName(model: string): HashedNgramEncoder {
  const match = /^hashed-ngram-(\d+)$/.exec(model);
  if (!match) {
    throw new Error(
      `unknown model ${JSON.stringify(model)} (expected hashed-ngram-<dimension>)`
    );
  }
  return new HashedNgramEncoder(Number(match[1]));
}
