/**
 * HTTP embedding service.
 *
 * GET  /health -> 200 {status, model_id, dimension} once ready, 503 before.
 * POST /embed  -> 200 {model_id, dimension, embeddings} for 1..256 texts,
 *                 400 on malformed input, 503 before the encoder is ready.
 */

import * as http from "node:http";
import { parseArgs } from "node:util";
import { HashedNgramEncoder, encoderFromModelName } from "./encoder.js";

const MAX_BATCH = 256;

interface ServerOptions {
  encoder: HashedNgramEncoder;
  /** resolves when the encoder may serve; defaults to immediately ready */
  ready?: Promise<void>;
}

function sendJson(res: http.ServerResponse, status: number, body: unknown): void {
  const payload = JSON.stringify(body);
  res.writeHead(status, {
    "Content-Type": "application/json",
    "Content-Length": Buffer.byteLength(payload),
  });
  res.end(payload);
}

function readBody(req: http.IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on("data", (c: Buffer) => chunks.push(c));
    req.on("end", () => resolve(Buffer.concat(chunks).toString("utf-8")));
    req.on("error", reject);
  });
}

/** null means valid; otherwise a message for the 400 response. */
export function validateEmbedRequest(payload: unknown): string | null {
  if (typeof payload !== "object" || payload === null) {
    return "request body must be a JSON object";
  }
  const texts = (payload as { texts?: unknown }).texts;
  if (!Array.isArray(texts)) {
    return "field 'texts' must be an array of strings";
  }
  if (texts.length < 1) {
    return "batch must contain at least one text";
  }
  if (texts.length > MAX_BATCH) {
    return `batch of ${texts.length} exceeds the maximum of ${MAX_BATCH}`;
  }
  for (const t of texts) {
    if (typeof t !== "string" || t.length === 0) {
      return "every text must be a non-empty string";
    }
  }
  return null;
}

export function createEmbedServer(options: ServerOptions): http.Server {
  const { encoder } = options;
  let isReady = options.ready === undefined;
  void options.ready?.then(() => {
    isReady = true;
  });

  return http.createServer((req, res) => {
    void handle(req, res).catch((err: unknown) => {
      sendJson(res, 500, { error: `internal error: ${String(err)}` });
    });
  });

  async function handle(
    req: http.IncomingMessage,
    res: http.ServerResponse
  ): Promise<void> {
    if (req.method === "GET" && req.url === "/health") {
      if (!isReady) {
        sendJson(res, 503, { status: "loading" });
        return;
      }
      sendJson(res, 200, {
        status: "ok",
        model_id: encoder.modelId,
        dimension: encoder.dimension,
      });
      return;
    }
    if (req.method === "POST" && req.url === "/embed") {
      if (!isReady) {
        sendJson(res, 503, { error: "model is still loading" });
        return;
      }
      const raw = await readBody(req);
      let payload: unknown;
      try {
        payload = JSON.parse(raw);
      } catch {
        sendJson(res, 400, { error: "request body is not valid JSON" });
        return;
      }
      const problem = validateEmbedRequest(payload);
      if (problem !== null) {
        sendJson(res, 400, { error: problem });
        return;
      }
      const texts = (payload as { texts: string[] }).texts;
      sendJson(res, 200, {
        model_id: encoder.modelId,
        dimension: encoder.dimension,
        embeddings: encoder.encodeBatch(texts),
      });
      return;
    }
    sendJson(res, 404, { error: `no route for ${req.method} ${req.url}` });
  }
}

export function main(argv: string[]): void {
  const { values } = parseArgs({
    args: argv,
    options: {
      port: { type: "string", default: "8094" },
      model: { type: "string", default: "hashed-ngram-384" },
    },
  });
  const port = Number(values.port);
  if (!Number.isInteger(port) || port < 0 || port > 65535) {
    console.error(`error: invalid port ${JSON.stringify(values.port)}`);
    process.exit(1);
  }
  let encoder: HashedNgramEncoder;
  try {
    encoder = encoderFromModelName(values.model as string);
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    process.exit(1);
  }
  const server = createEmbedServer({ encoder });
  server.listen(port, "127.0.0.1", () => {
    const address = server.address();
    const bound = typeof address === "object" && address ? address.port : port;
    console.log(`embed-server ${encoder.modelId} listening on 127.0.0.1:${bound}`);
  });
}

if (process.argv[1] && process.argv[1].endsWith("server.js")) {
  main(process.argv.slice(2));
}
