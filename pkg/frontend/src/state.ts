// View state and pure reducers. Rendering reads this; the stream and the
// feedback controls write through the functions here, which enforce the
// ordering, dedup and idempotency invariants.

import type { FinalOutputDoc, StreamEvent, TurnDoc } from "./types.js";

export type ConnectionState = "idle" | "streaming" | "reconnecting" | "done";

export interface FeedItem {
  id: number;
  kind: StreamEvent["event"] | "user-message" | "history-final";
  label: string;
  detail?: string;
  data: Record<string, unknown>;
}

export interface ViewState {
  sessionId: string | null;
  eventFeed: FeedItem[];
  lastEventId: number;
  connection: ConnectionState;
  pendingFeedback: boolean;
  awaitingClarification: boolean;
  composerEnabled: boolean;
  lastFinal: FinalOutputDoc | null;
  memorizedBadge: boolean;
  cycleClosed: boolean;
}

export function initialState(sessionId: string | null = null): ViewState {
  return {
    sessionId,
    eventFeed: [],
    lastEventId: -1,
    connection: "idle",
    pendingFeedback: false,
    awaitingClarification: false,
    composerEnabled: true,
    lastFinal: null,
    memorizedBadge: false,
    cycleClosed: false,
  };
}

function describe(event: StreamEvent): { label: string; detail?: string } {
  const data = event.data;
  switch (event.event) {
    case "phase-started":
      return { label: `phase: ${String(data.phase ?? "?")}` };
    case "tool-call":
      return { label: `tool call: ${String(data.tool ?? "?")}`,
               detail: String(data.role ?? "") };
    case "tool-result":
      return { label: `tool result: ${String(data.tool ?? "?")}`,
               detail: String(data.status ?? "") };
    case "clarification":
      return { label: "clarification requested",
               detail: String(data.question ?? "") };
    case "final":
      return { label: data.success ? "final: success" : "final: failed" };
    case "error":
      return { label: `error: ${String(data.kind ?? "?")}`,
               detail: String(data.message ?? "") };
    case "feedback-effect":
      return { label: `feedback: ${String(data.action ?? "?")}` };
    default:
      return { label: event.event };
  }
}

/**
 * Fold one stream event into the state. Events arriving out of order or
 * already seen (resume after a drop) are ignored, which keeps the rendered
 * feed identical to the server's stream order.
 */
export function applyEvent(state: ViewState, event: StreamEvent): ViewState {
  if (event.id <= state.lastEventId) return state; // duplicate after resume
  const { label, detail } = describe(event);
  const next: ViewState = {
    ...state,
    lastEventId: event.id,
    eventFeed: [...state.eventFeed,
                { id: event.id, kind: event.event, label, detail,
                  data: event.data }],
  };
  if (event.event === "clarification") {
    next.awaitingClarification = true;
    next.composerEnabled = true; // the input re-opens for the answer
    next.connection = "done";
  } else if (event.event === "final") {
    next.lastFinal = event.data as unknown as FinalOutputDoc;
    next.pendingFeedback = true;
    next.connection = "done";
    next.composerEnabled = true;
  } else if (event.event === "error") {
    next.connection = "done";
    next.composerEnabled = true;
  }
  return next;
}

export function startTurn(state: ViewState, message: string): ViewState {
  return {
    ...state,
    connection: "streaming",
    composerEnabled: false, // single active turn per session
    awaitingClarification: false,
    pendingFeedback: false,
    memorizedBadge: false,
    eventFeed: [...state.eventFeed, {
      id: state.lastEventId, kind: "user-message", label: message, data: {},
    }],
  };
}

export function streamDropped(state: ViewState): ViewState {
  if (state.connection !== "streaming") return state;
  return { ...state, connection: "reconnecting" };
}

export function renderHistory(state: ViewState, turns: TurnDoc[]): ViewState {
  const feed: FeedItem[] = [];
  let pendingFeedback = false;
  let lastFinal: FinalOutputDoc | null = null;
  for (const turn of turns) {
    feed.push({ id: -1, kind: "user-message", label: turn.user_message,
                data: {} });
    const clarification = turn.outputs?.clarification;
    if (clarification) {
      feed.push({ id: -1, kind: "clarification",
                  label: "clarification requested", detail: clarification,
                  data: {} });
    }
    for (const final of turn.outputs?.finals ?? []) {
      feed.push({
        id: -1,
        kind: "history-final",
        label: final.success ? "final: success" : "final: failed",
        detail: JSON.stringify(final.processed_output?.answer ?? null),
        data: final as unknown as Record<string, unknown>,
      });
      lastFinal = final;
      pendingFeedback = turn.feedback === null;
    }
    if (turn.feedback) {
      feed.push({ id: -1, kind: "feedback-effect",
                  label: `feedback: ${turn.feedback}`, data: {} });
    }
  }
  return {
    ...initialState(state.sessionId),
    eventFeed: feed,
    lastFinal,
    pendingFeedback,
    connection: "idle",
  };
}

/**
 * Idempotency guard for the feedback buttons: each click issues exactly one
 * API call; repeat clicks while one is in flight are dropped.
 */
export class ClickGuard {
  private inFlight = new Set<string>();

  async run(key: string, action: () => Promise<void>): Promise<boolean> {
    if (this.inFlight.has(key)) return false;
    this.inFlight.add(key);
    try {
      await action();
      return true;
    } finally {
      this.inFlight.delete(key);
    }
  }
}

const ARTIFACT_RE = /[\w./-]+\.(png|jpe?g|svg|gif|txt|csv|json|log)\b/g;
const IMAGE_SUFFIX = /\.(png|jpe?g|svg|gif)$/i;

/** Pull artifact-looking paths out of a final output for previewing. */
export function extractArtifacts(final: FinalOutputDoc): {
  path: string;
  kind: "image" | "text";
}[] {
  const haystacks = [
    String(final.processed_output?.analysis ?? ""),
    String((final.execution_results as { stdout?: string })?.stdout ?? ""),
  ];
  const seen = new Set<string>();
  const artifacts: { path: string; kind: "image" | "text" }[] = [];
  for (const text of haystacks) {
    for (const match of text.matchAll(ARTIFACT_RE)) {
      const path = match[0].replace(/^\.\//, "");
      if (seen.has(path)) continue;
      seen.add(path);
      artifacts.push({
        path,
        kind: IMAGE_SUFFIX.test(path) ? "image" : "text",
      });
    }
  }
  return artifacts;
}
