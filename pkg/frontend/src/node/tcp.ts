/** Line-framed TCP client for Node: tests and the WS bridge use it to talk
 * to the typing service directly. */
import net from "node:net";
import { LineDecoder } from "../protocol.js";

export interface LineSocket {
  send(line: string): void;
  close(): void;
}

export function connectTcp(
  host: string,
  port: number,
  onLine: (line: string) => void,
  onClose?: () => void,
): Promise<LineSocket> {
  return new Promise((resolve, reject) => {
    const decoder = new LineDecoder();
    const sock = net.createConnection({ host, port }, () => {
      resolve({
        send: (line) => void sock.write(line),
        close: () => sock.destroy(),
      });
    });
    sock.setNoDelay(true);
    sock.on("data", (buf) => {
      for (const line of decoder.push(buf.toString("utf8"))) onLine(line);
    });
    sock.on("error", reject);
    sock.on("close", () => onClose?.());
  });
}
