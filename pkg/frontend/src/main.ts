// Application bootstrap: wires the API client, stream handling, state and
// rendering together against the static index.html skeleton.

import { ApiClient } from "./api.js";
import {
  ClickGuard,
  applyEvent,
  initialState,
  renderHistory,
  startTurn,
  streamDropped,
  type ViewState,
} from "./state.js";
import { renderTrace } from "./trace.js";
import {
  renderComposer,
  renderFeed,
  renderFeedbackControls,
  renderSidebar,
} from "./view.js";
import type { FeedbackAction, StreamEvent } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

export class App {
  private state: ViewState = initialState();
  private guard = new ClickGuard();
  private savedFilter = false;

  constructor(private api: ApiClient) {}

  async start(): Promise<void> {
    const tokenInput = el<HTMLInputElement>("token-input");
    tokenInput.value = localStorage.getItem("solverkit-token") ?? "";
    this.api.setToken(tokenInput.value);
    tokenInput.addEventListener("change", () => {
      localStorage.setItem("solverkit-token", tokenInput.value);
      this.api.setToken(tokenInput.value);
      void this.refreshSidebar();
    });
    el<HTMLInputElement>("saved-filter").addEventListener("change", (ev) => {
      this.savedFilter = (ev.target as HTMLInputElement).checked;
      void this.refreshSidebar();
    });
    el<HTMLButtonElement>("send-button").addEventListener("click", () =>
      void this.sendMessage());
    await this.refreshSidebar();
  }

  private render(): void {
    renderFeed(el("event-feed"), this.state, this.api);
    renderFeedbackControls(el("feedback-controls"), this.state, {
      onAction: (action, critique) => void this.feedback(action, critique),
    });
    renderComposer(el<HTMLTextAreaElement>("composer-input"),
                   el<HTMLButtonElement>("send-button"), this.state);
  }

  private async refreshSidebar(): Promise<void> {
    try {
      const sessions = await this.api.listSessions(this.savedFilter);
      renderSidebar(el("sidebar"), sessions, this.state.sessionId,
                    this.savedFilter, {
        onOpen: (id) => void this.openSession(id),
        onRename: (id, title) =>
          void this.api.patchSession(id, { title })
            .then(() => this.refreshSidebar()),
        onBookmark: (id, saved) =>
          void this.api.patchSession(id, { saved })
            .then(() => this.refreshSidebar()),
        onAnnotate: (id, notes) =>
          void this.api.patchSession(id, { notes })
            .then(() => this.refreshSidebar()),
        onNew: () => void this.newSession(),
      });
    } catch {
      // unauthenticated until a token is configured; sidebar stays empty
    }
  }

  async newSession(): Promise<void> {
    const session = await this.api.createSession();
    this.state = initialState(session.session_id);
    this.render();
    await this.refreshSidebar();
  }

  async openSession(sessionId: string): Promise<void> {
    const session = await this.api.getSession(sessionId);
    this.state = renderHistory(initialState(sessionId), session.turns);
    this.render();
    await this.refreshSidebar();
    await this.showTraceForLastTurn(session.turns.at(-1)?.turn_id);
  }

  private async showTraceForLastTurn(turnId?: string): Promise<void> {
    const panel = el("trace-panel");
    panel.textContent = "";
    if (!turnId) return;
    const { trace } = await this.api.getTrace(turnId);
    panel.appendChild(renderTrace(trace));
  }

  async sendMessage(): Promise<void> {
    const input = el<HTMLTextAreaElement>("composer-input");
    const message = input.value.trim();
    if (!message || !this.state.composerEnabled) return;
    if (this.state.sessionId === null) await this.newSession();
    const sessionId = this.state.sessionId!;
    input.value = "";
    this.state = startTurn(this.state, message);
    this.render();
    const onEvent = (event: StreamEvent) => {
      this.state = applyEvent(this.state, event);
      this.render();
    };
    try {
      await this.api.streamTurn(sessionId, message, onEvent);
    } catch {
      // stream dropped: show reconnect state, then catch up from the
      // buffer without duplicating already-rendered events
      this.state = streamDropped(this.state);
      this.render();
      const { events } = await this.api.bufferedEvents(
        sessionId, this.state.lastEventId);
      for (const event of events) onEvent(event);
      this.state = { ...this.state, connection: "done",
                     composerEnabled: true };
    }
    this.render();
    const session = await this.api.getSession(sessionId);
    await this.showTraceForLastTurn(session.turns.at(-1)?.turn_id);
  }

  async feedback(action: FeedbackAction, critique: string): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    await this.guard.run(`feedback:${action}`, async () => {
      const effect = await this.api.postFeedback(sessionId, action, critique);
      if (action === "satisfied") {
        // the badge is backed by the server's effect report, not assumed
        this.state = { ...this.state,
                       memorizedBadge: effect.memory_saved === true };
      } else if (action === "terminate") {
        this.state = { ...this.state, cycleClosed: true,
                       composerEnabled: false };
      } else if (action === "improve" && effect.new_output) {
        this.state = {
          ...this.state,
          eventFeed: [...this.state.eventFeed, {
            id: this.state.lastEventId,
            kind: "history-final",
            label: effect.new_output.success
              ? "improved: success" : "improved: failed",
            data: effect.new_output as unknown as Record<string, unknown>,
          }],
          lastFinal: effect.new_output,
        };
      }
    });
    this.render();
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const app = new App(new ApiClient(""));
  void app.start();
}
