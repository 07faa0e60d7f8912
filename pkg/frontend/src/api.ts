// Typed client for the session HTTP+JSON API. This is the frontend's only
// channel to the engine; it never reads world assets directly.

export interface DisplayPayload {
  title: string;
  items: string[];
}

export interface SituationRef {
  id: number;
  label: string;
}

export interface TurnPayload {
  session: string;
  turn: number;
  spoken: string;
  display: DisplayPayload;
  kind: string;
  situation: SituationRef | null;
}

export interface TranscriptPayload {
  turn: number;
  input: { type: string; text?: string; kind?: string; target?: number };
  output: { spoken: string; display: DisplayPayload; kind: string };
}

export interface StatePayload {
  session: string;
  world: string;
  turn: number;
  date: string;
  situation: SituationRef | null;
  start_situation: number;
  displayed: DisplayPayload;
  adjacent: SituationRef[];
  transcript: TranscriptPayload[];
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body.code ?? "error", body.message ?? "request failed");
    }
    return body as T;
  }

  createSession(world: string, date?: string): Promise<TurnPayload> {
    return this.request<TurnPayload>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(date ? { world, date } : { world }),
    });
  }

  postUtterance(sessionId: string, text: string): Promise<TurnPayload> {
    return this.request<TurnPayload>(`/sessions/${sessionId}/utterance`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  postEvent(sessionId: string, kind: "enter" | "look_at", target: number): Promise<TurnPayload> {
    return this.request<TurnPayload>(`/sessions/${sessionId}/event`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ kind, target }),
    });
  }

  getState(sessionId: string): Promise<StatePayload> {
    return this.request<StatePayload>(`/sessions/${sessionId}/state`);
  }
}
