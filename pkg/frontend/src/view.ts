// DOM rendering for the conversation view, feedback controls and the
// session sidebar. All state transitions go through state.ts; this module
// only projects the current ViewState into elements.

import type { ApiClient } from "./api.js";
import type { FeedItem, ViewState } from "./state.js";
import { extractArtifacts } from "./state.js";
import type { FeedbackAction, SessionSummary } from "./types.js";

export function renderFeedItem(item: FeedItem, api: ApiClient): HTMLElement {
  const el = document.createElement("div");
  el.className = `feed-item feed-${item.kind}`;
  el.dataset.eventId = String(item.id);
  const label = document.createElement("span");
  label.className = "feed-label";
  label.textContent = item.label;
  el.appendChild(label);
  if (item.detail) {
    const detail = document.createElement("span");
    detail.className = "feed-detail";
    detail.textContent = item.detail;
    el.appendChild(detail);
  }
  if (item.kind === "final" || item.kind === "history-final") {
    const final = item.data as unknown as Parameters<typeof extractArtifacts>[0];
    const answer = document.createElement("pre");
    answer.className = "feed-answer";
    answer.textContent = JSON.stringify(
      final.processed_output?.answer ?? null, null, 1);
    el.appendChild(answer);
    for (const artifact of extractArtifacts(final)) {
      el.appendChild(renderArtifact(artifact, api));
    }
  }
  return el;
}

function renderArtifact(
  artifact: { path: string; kind: "image" | "text" },
  api: ApiClient,
): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = `artifact artifact-${artifact.kind}`;
  if (artifact.kind === "image") {
    const img = document.createElement("img");
    img.src = api.artifactUrl(artifact.path);
    img.alt = artifact.path;
    img.className = "artifact-preview";
    wrap.appendChild(img);
  } else {
    // non-image artifacts stay download-only links; text previews load lazily
    const link = document.createElement("a");
    link.href = api.artifactUrl(artifact.path);
    link.textContent = artifact.path;
    link.className = "artifact-link";
    link.setAttribute("download", "");
    wrap.appendChild(link);
  }
  return wrap;
}

export function renderFeed(
  container: HTMLElement,
  state: ViewState,
  api: ApiClient,
): void {
  container.textContent = "";
  for (const item of state.eventFeed) {
    container.appendChild(renderFeedItem(item, api));
  }
  if (state.connection === "reconnecting") {
    const banner = document.createElement("div");
    banner.className = "reconnect-banner";
    banner.textContent = "connection lost — reconnecting…";
    container.appendChild(banner);
  }
  container.scrollTop = container.scrollHeight;
}

export interface FeedbackHandlers {
  onAction: (action: FeedbackAction, critique: string) => void;
}

export function renderFeedbackControls(
  container: HTMLElement,
  state: ViewState,
  handlers: FeedbackHandlers,
): void {
  container.textContent = "";
  if (!state.pendingFeedback) {
    container.classList.add("hidden"); // controls hidden without a completed turn
    return;
  }
  container.classList.remove("hidden");
  if (state.memorizedBadge) {
    const badge = document.createElement("span");
    badge.className = "memorized-badge";
    badge.textContent = "memorized ✓";
    container.appendChild(badge);
  }
  if (state.cycleClosed) {
    const closed = document.createElement("span");
    closed.className = "cycle-closed";
    closed.textContent = "problem-solving cycle closed";
    container.appendChild(closed);
    return;
  }
  const actions: FeedbackAction[] = [
    "satisfied", "improve", "continue", "terminate",
  ];
  const critiqueBox = document.createElement("textarea");
  critiqueBox.className = "critique-box hidden";
  critiqueBox.placeholder = "what should be improved?";
  for (const action of actions) {
    const button = document.createElement("button");
    button.className = `feedback-btn feedback-${action}`;
    button.textContent = action;
    button.addEventListener("click", () => {
      if (action === "improve" && critiqueBox.classList.contains("hidden")) {
        critiqueBox.classList.remove("hidden"); // open the critique box first
        const send = document.createElement("button");
        send.className = "feedback-btn feedback-improve-send";
        send.textContent = "send critique";
        send.addEventListener("click", () =>
          handlers.onAction("improve", critiqueBox.value));
        container.appendChild(send);
        return;
      }
      handlers.onAction(action, critiqueBox.value);
    });
    container.appendChild(button);
  }
  container.appendChild(critiqueBox);
}

export interface SidebarHandlers {
  onOpen: (sessionId: string) => void;
  onRename: (sessionId: string, title: string) => void;
  onBookmark: (sessionId: string, saved: boolean) => void;
  onAnnotate: (sessionId: string, notes: string) => void;
  onNew: () => void;
}

export function renderSidebar(
  container: HTMLElement,
  sessions: SessionSummary[],
  activeId: string | null,
  savedFilter: boolean,
  handlers: SidebarHandlers,
): void {
  container.textContent = "";
  const newButton = document.createElement("button");
  newButton.className = "new-session";
  newButton.textContent = "+ new session";
  newButton.addEventListener("click", handlers.onNew);
  container.appendChild(newButton);

  const list = document.createElement("ul");
  list.className = "session-list";
  const visible = savedFilter ? sessions.filter((s) => s.saved) : sessions;
  for (const session of visible) {
    const item = document.createElement("li");
    item.className = "session-item" +
      (session.session_id === activeId ? " active" : "") +
      (session.saved ? " saved" : "");
    item.dataset.sessionId = session.session_id;

    const title = document.createElement("span");
    title.className = "session-title";
    title.textContent = session.title || session.session_id;
    title.addEventListener("click", () => handlers.onOpen(session.session_id));
    item.appendChild(title);

    const bookmark = document.createElement("button");
    bookmark.className = "session-bookmark";
    bookmark.textContent = session.saved ? "★" : "☆";
    bookmark.title = "toggle saved";
    bookmark.addEventListener("click", () =>
      handlers.onBookmark(session.session_id, !session.saved));
    item.appendChild(bookmark);

    const rename = document.createElement("button");
    rename.className = "session-rename";
    rename.textContent = "✎";
    rename.title = "rename";
    rename.addEventListener("click", () => {
      const next = window.prompt("session title",
                                 session.title ?? "") ?? undefined;
      if (next !== undefined) handlers.onRename(session.session_id, next);
    });
    item.appendChild(rename);

    const annotate = document.createElement("button");
    annotate.className = "session-annotate";
    annotate.textContent = "🗒";
    annotate.title = "notes";
    annotate.addEventListener("click", () => {
      const next = window.prompt("notes", session.notes ?? "") ?? undefined;
      if (next !== undefined) handlers.onAnnotate(session.session_id, next);
    });
    item.appendChild(annotate);

    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderComposer(
  input: HTMLTextAreaElement,
  sendButton: HTMLButtonElement,
  state: ViewState,
): void {
  input.disabled = !state.composerEnabled;
  sendButton.disabled = !state.composerEnabled;
  if (state.awaitingClarification) {
    const last = [...state.eventFeed].reverse()
      .find((item) => item.kind === "clarification");
    input.placeholder = last?.detail
      ? `answer: ${last.detail}`
      : "answer the clarification…";
    input.focus();
  } else {
    input.placeholder = "describe the task…";
  }
}
