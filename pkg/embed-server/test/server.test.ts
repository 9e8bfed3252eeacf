import * as http from "node:http";
import { AddressInfo } from "node:net";
import { afterEach, describe, expect, it } from "vitest";
import { HashedNgramEncoder } from "../src/encoder.js";
import { createEmbedServer, validateEmbedRequest } from "../src/server.js";

let server: http.Server | undefined;

function listen(s: http.Server): Promise<string> {
  server = s;
  return new Promise((resolve) => {
    s.listen(0, "127.0.0.1", () => {
      const { port } = s.address() as AddressInfo;
      resolve(`http://127.0.0.1:${port}`);
    });
  });
}

afterEach(() => {
  server?.close();
  server = undefined;
});

describe("validateEmbedRequest", () => {
  it("accepts a small batch", () => {
    expect(validateEmbedRequest({ texts: ["a", "b"] })).toBeNull();
  });

  it.each([
    [null],
    [{}],
    [{ texts: "a" }],
    [{ texts: [] }],
    [{ texts: [""] }],
    [{ texts: ["ok", 5] }],
    [{ texts: new Array(257).fill("x") }],
  ])("rejects %j", (payload) => {
    expect(validateEmbedRequest(payload)).not.toBeNull();
  });
});

describe("embed server", () => {
  const encoder = new HashedNgramEncoder(64);

  it("serves health once ready", async () => {
    const url = await listen(createEmbedServer({ encoder }));
    const resp = await fetch(`${url}/health`);
    expect(resp.status).toBe(200);
    const body = await resp.json();
    expect(body).toEqual({ status: "ok", model_id: "hashed-ngram-64", dimension: 64 });
    // repeated calls return the identical body
    const again = await (await fetch(`${url}/health`)).json();
    expect(again).toEqual(body);
  });

  it("returns 503 until the ready promise resolves", async () => {
    let release!: () => void;
    const ready = new Promise<void>((resolve) => {
      release = resolve;
    });
    const url = await listen(createEmbedServer({ encoder, ready }));

    expect((await fetch(`${url}/health`)).status).toBe(503);
    const early = await fetch(`${url}/embed`, {
      method: "POST",
      body: JSON.stringify({ texts: ["hello"] }),
    });
    expect(early.status).toBe(503);

    release();
    await new Promise((resolve) => setImmediate(resolve));
    expect((await fetch(`${url}/health`)).status).toBe(200);
  });

  it("embeds a batch preserving order and shape", async () => {
    const url = await listen(createEmbedServer({ encoder }));
    const texts = ["hello", "hello", "another sentence"];
    const resp = await fetch(`${url}/embed`, {
      method: "POST",
      body: JSON.stringify({ texts }),
    });
    expect(resp.status).toBe(200);
    const body = await resp.json();
    expect(body.model_id).toBe("hashed-ngram-64");
    expect(body.dimension).toBe(64);
    expect(body.embeddings).toHaveLength(3);
    for (const vec of body.embeddings) {
      expect(vec).toHaveLength(64);
      expect(vec.every((x: number) => Number.isFinite(x))).toBe(true);
    }
    expect(body.embeddings[0]).toEqual(body.embeddings[1]);
    expect(body.embeddings[0]).toEqual(encoder.encode("hello"));
  });

  it("repeated requests are bitwise stable", async () => {
    const url = await listen(createEmbedServer({ encoder }));
    const request = () =>
      fetch(`${url}/embed`, {
        method: "POST",
        body: JSON.stringify({ texts: ["stability check"] }),
      }).then((r) => r.json());
    const [a, b] = [await request(), await request()];
    expect(a.embeddings).toEqual(b.embeddings);
  });

  it("rejects bad batches with 400", async () => {
    const url = await listen(createEmbedServer({ encoder }));
    for (const body of ["{broken", JSON.stringify({ texts: [] }),
                        JSON.stringify({ texts: new Array(257).fill("x") })]) {
      const resp = await fetch(`${url}/embed`, { method: "POST", body });
      expect(resp.status).toBe(400);
      expect((await resp.json()).error).toBeTruthy();
    }
  });

  it("answers unknown routes with 404", async () => {
    const url = await listen(createEmbedServer({ encoder }));
    expect((await fetch(`${url}/nope`)).status).toBe(404);
    expect((await fetch(`${url}/embed`)).status).toBe(404); // GET, not POST
  });

  it("handles concurrent requests", async () => {
    const url = await listen(createEmbedServer({ encoder }));
    const bodies = await Promise.all(
      Array.from({ length: 16 }, (_, i) =>
        fetch(`${url}/embed`, {
          method: "POST",
          body: JSON.stringify({ texts: [`text number ${i % 4}`] }),
        }).then((r) => r.json())
      )
    );
    for (let i = 0; i < bodies.length; i++) {
      expect(bodies[i].embeddings[0]).toEqual(
        encoder.encode(`text number ${i % 4}`)
      );
    }
  });
});
