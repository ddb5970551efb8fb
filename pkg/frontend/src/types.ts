// API document shapes mirrored from the session service.

export interface SessionSummary {
  session_id: string;
  user_id: string;
  title: string | null;
  saved: boolean;
  notes: string | null;
  created_at: string;
  closed: boolean;
}

export interface SessionDoc extends SessionSummary {
  turns: TurnDoc[];
}

export interface TurnDoc {
  turn_id: string;
  user_message: string;
  decision: { route?: string; rationale?: string };
  outputs: {
    finals?: FinalOutputDoc[];
    clarification?: string;
    failed?: boolean;
  } | null;
  feedback: string | null;
  trace_root: string | null;
  created_at: string;
}

export interface FinalOutputDoc {
  original_query: string;
  success: boolean;
  final_code: string;
  execution_results: Record<string, unknown>;
  processed_output: { answer?: unknown; analysis?: string };
}

export type StreamEventType =
  | "phase-started"
  | "tool-call"
  | "tool-result"
  | "clarification"
  | "final"
  | "error"
  | "feedback-effect";

export interface StreamEvent {
  id: number;
  event: StreamEventType;
  data: Record<string, unknown>;
}

export interface FeedbackEffect {
  action: string;
  turn_id: string;
  memory_saved?: boolean;
  verbatim_record_id?: string;
  new_output?: FinalOutputDoc;
  cycle_closed?: boolean;
  awaiting_followup?: boolean;
}

export interface TraceNode {
  span_id: string;
  parent: string | null;
  kind: "turn" | "agent-phase" | "tool-call" | "model-call";
  name: string;
  inputs: Record<string, unknown>;
  outputs: Record<string, unknown>;
  started_at: string;
  elapsed_ms: number;
  status: string;
  children: TraceNode[];
}

export type FeedbackAction = "satisfied" | "improve" | "continue" | "terminate";
