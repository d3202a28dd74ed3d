/** WebSocket-to-TCP bridge plus static file serving for the browser UI.
 *
 * Browsers cannot open raw TCP sockets, so each WebSocket connection gets
 * its own TCP session to the typing service.  Payloads pass through
 * untouched in both directions; the newline framing already in the
 * protocol survives the trip.
 *
 *   node dist/node/bridge.js --listen 8080 --target 127.0.0.1:7910
 */
import fs from "node:fs";
import http from "node:http";
import net from "node:net";
import path from "node:path";
import process from "node:process";
import { fileURLToPath } from "node:url";
import { WebSocketServer } from "ws";

const CONTENT_TYPES: Record<string, string> = {
  ".html": "text/html; charset=utf-8",
  ".js": "text/javascript; charset=utf-8",
  ".map": "application/json",
  ".css": "text/css",
};

export interface Bridge {
  port: number;
  close(): Promise<void>;
}

export function startBridge(opts: {
  listenPort: number;
  targetHost: string;
  targetPort: number;
  root?: string;
}): Promise<Bridge> {
  const root = opts.root ?? path.join(path.dirname(fileURLToPath(import.meta.url)), "..", "..");

  const server = http.createServer((req, res) => {
    const url = (req.url ?? "/").split("?")[0];
    const rel = url === "/" ? "index.html" : url.slice(1);
    const file = path.normalize(path.join(root, rel));
    if (!file.startsWith(path.normalize(root))) {
      res.writeHead(403).end();
      return;
    }
    fs.readFile(file, (err, body) => {
      if (err) {
        res.writeHead(404).end("not found");
        return;
      }
      res.writeHead(200, { "content-type": CONTENT_TYPES[path.extname(file)] ?? "application/octet-stream" });
      res.end(body);
    });
  });

  const wss = new WebSocketServer({ server, path: "/bridge" });
  wss.on("connection", (ws) => {
    const tcp = net.createConnection({ host: opts.targetHost, port: opts.targetPort });
    tcp.setNoDelay(true);
    ws.on("message", (data) => tcp.write(data as Buffer));
    tcp.on("data", (buf) => ws.send(buf.toString("utf8")));
    ws.on("close", () => tcp.destroy());
    tcp.on("close", () => ws.close());
    tcp.on("error", () => ws.close());
  });

  return new Promise((resolve, reject) => {
    server.on("error", reject);
    server.listen(opts.listenPort, "127.0.0.1", () => {
      const address = server.address() as net.AddressInfo;
      resolve({
        port: address.port,
        close: () =>
          new Promise((done) => {
            wss.clients.forEach((c) => c.terminate());
            server.close(() => done());
          }),
      });
    });
  });
}

function parseArgs(argv: string[]): { listenPort: number; targetHost: string; targetPort: number } {
  let listenPort = 8080;
  let target = "127.0.0.1:7910";
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--listen") listenPort = Number(argv[++i]);
    else if (argv[i] === "--target") target = argv[++i];
    else throw new Error(`unknown flag ${argv[i]}`);
  }
  const sep = target.lastIndexOf(":");
  return { listenPort, targetHost: target.slice(0, sep), targetPort: Number(target.slice(sep + 1)) };
}

const isMain = process.argv[1] && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isMain) {
  const opts = parseArgs(process.argv.slice(2));
  startBridge(opts).then((bridge) => {
    console.log(`ui on http://127.0.0.1:${bridge.port}/  (service at ${opts.targetHost}:${opts.targetPort})`);
  });
}
