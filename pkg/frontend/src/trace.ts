// Collapsible span-tree inspector. Payloads arrive already truncated by
// the server's span cap; they are shown verbatim.

import type { TraceNode } from "./types.js";

function payloadBlock(title: string, payload: Record<string, unknown>): HTMLElement {
  const pre = document.createElement("pre");
  pre.className = "trace-payload";
  pre.textContent = `${title}: ${JSON.stringify(payload, null, 1)}`;
  return pre;
}

export function renderTraceNode(node: TraceNode): HTMLDetailsElement {
  const details = document.createElement("details");
  details.className = `trace-node trace-${node.kind} trace-status-${node.status}`;
  const summary = document.createElement("summary");
  summary.textContent =
    `[${node.kind}] ${node.name} — ${node.elapsed_ms} ms (${node.status})`;
  details.appendChild(summary);
  if (Object.keys(node.inputs ?? {}).length > 0) {
    details.appendChild(payloadBlock("inputs", node.inputs));
  }
  if (Object.keys(node.outputs ?? {}).length > 0) {
    details.appendChild(payloadBlock("outputs", node.outputs));
  }
  for (const child of node.children ?? []) {
    details.appendChild(renderTraceNode(child));
  }
  return details;
}

export function renderTrace(root: TraceNode | null): HTMLElement {
  const container = document.createElement("div");
  container.className = "trace-tree";
  if (root === null) {
    container.textContent = "no trace recorded for this turn";
    return container;
  }
  const tree = renderTraceNode(root);
  tree.open = true;
  container.appendChild(tree);
  return container;
}

export function countSpans(root: TraceNode | null, kind?: string): number {
  if (!root) return 0;
  let count = kind === undefined || root.kind === kind ? 1 : 0;
  for (const child of root.children ?? []) {
    count += countSpans(child, kind);
  }
  return count;
}
