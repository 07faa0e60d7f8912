// View-model for one browser session. Holds the transcript and the overlay,
// guards against double submission, and keeps rendering order equal to the
// server's turn order no matter when responses arrive.

import { ApiClient, DisplayPayload, SituationRef, TurnPayload } from "./api.js";

export interface TranscriptLine {
  turn: number;
  who: "user" | "system";
  text: string;
}

export interface Overlay {
  spoken: string;
  title: string;
  items: string[];
}

export interface SessionView {
  sessionId: string | null;
  situationLabel: string;
  overlay: Overlay;
  transcript: TranscriptLine[];
  turn: number;
  adjacent: SituationRef[];
  busy: boolean;
  error: string | null;
}

export type SubmitResult = "ok" | "busy" | "error";

const EMPTY_OVERLAY: Overlay = { spoken: "", title: "", items: [] };

export function emptyView(): SessionView {
  return {
    sessionId: null,
    situationLabel: "",
    overlay: EMPTY_OVERLAY,
    transcript: [],
    turn: 0,
    adjacent: [],
    busy: false,
    error: null,
  };
}

// The overlay must be byte-equal to the display payload the service sent;
// copying the arrays is allowed, rewriting the strings is not.
function overlayFrom(turn: TurnPayload): Overlay {
  return {
    spoken: turn.spoken,
    title: turn.display.title,
    items: [...turn.display.items],
  };
}

export class SessionController {
  view: SessionView = emptyView();
  onChange: (view: SessionView) => void = () => {};

  constructor(private api: ApiClient) {}

  private emit(): void {
    this.onChange(this.view);
  }

  async start(world: string): Promise<SubmitResult> {
    this.view = emptyView();
    this.view.busy = true;
    this.emit();
    try {
      const turn = await this.api.createSession(world);
      this.view.sessionId = turn.session;
      this.applyTurn(null, turn);
      await this.refreshState();
      return "ok";
    } catch (err) {
      this.view.error = describe(err);
      return "error";
    } finally {
      this.view.busy = false;
      this.emit();
    }
  }

  /** Record one completed turn; idempotent per turn number. */
  applyTurn(userText: string | null, turn: TurnPayload): void {
    if (this.view.transcript.some((line) => line.who === "system" && line.turn === turn.turn)) {
      return; // duplicate delivery of an already-rendered turn
    }
    if (userText !== null) {
      this.view.transcript.push({ turn: turn.turn, who: "user", text: userText });
    }
    this.view.transcript.push({ turn: turn.turn, who: "system", text: turn.spoken });
    this.view.transcript.sort((a, b) => a.turn - b.turn || (a.who === "user" ? -1 : 1));
    if (turn.turn >= this.view.turn) {
      this.view.turn = turn.turn;
      this.view.overlay = overlayFrom(turn);
      if (turn.situation) {
        this.view.situationLabel = turn.situation.label;
      }
    }
    this.emit();
  }

  async submitUtterance(text: string): Promise<SubmitResult> {
    const sessionId = this.view.sessionId;
    if (!sessionId || !text.trim()) {
      return "error";
    }
    if (this.view.busy) {
      return "busy"; // a turn is already in flight; no duplicate submission
    }
    this.view.busy = true;
    this.view.error = null;
    this.emit();
    try {
      const turn = await this.api.postUtterance(sessionId, text);
      this.applyTurn(text, turn);
      await this.refreshState();
      return "ok";
    } catch (err) {
      this.view.error = describe(err);
      return "error";
    } finally {
      this.view.busy = false;
      this.emit();
    }
  }

  async submitMove(target: number, kind: "enter" | "look_at" = "enter"): Promise<SubmitResult> {
    const sessionId = this.view.sessionId;
    if (!sessionId) {
      return "error";
    }
    if (this.view.busy) {
      return "busy";
    }
    this.view.busy = true;
    this.view.error = null;
    this.emit();
    try {
      const turn = await this.api.postEvent(sessionId, kind, target);
      this.applyTurn(`[${kind} ${target}]`, turn);
      await this.refreshState();
      return "ok";
    } catch (err) {
      this.view.error = describe(err);
      return "error";
    } finally {
      this.view.busy = false;
      this.emit();
    }
  }

  /** Re-fetch server state; converges the turn counter and move controls. */
  async refreshState(): Promise<void> {
    const sessionId = this.view.sessionId;
    if (!sessionId) {
      return;
    }
    const state = await this.api.getState(sessionId);
    this.view.adjacent = state.adjacent;
    if (state.situation) {
      this.view.situationLabel = state.situation.label;
    }
    if (state.turn > this.view.turn) {
      // We missed turns (stale counter): rebuild transcript from the server.
      this.view.turn = state.turn;
      this.view.transcript = [];
      for (const entry of state.transcript) {
        if (entry.input.type === "utterance") {
          this.view.transcript.push({ turn: entry.turn, who: "user", text: entry.input.text ?? "" });
        }
        this.view.transcript.push({ turn: entry.turn, who: "system", text: entry.output.spoken });
      }
      this.view.overlay = {
        spoken: this.view.overlay.spoken,
        title: state.displayed.title,
        items: [...state.displayed.items],
      };
    }
    this.emit();
  }
}

function describe(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

/**
 * Typo injector for the noise toggle: swaps two adjacent letters inside one
 * word of at least four letters. Deterministic for a given seed.
 */
export function corruptText(text: string, seed: number): string {
  const words = text.split(" ");
  const eligible = words
    .map((word, index) => ({ word, index }))
    .filter(({ word }) => word.length >= 4);
  for (let attempt = 0; attempt < eligible.length; attempt += 1) {
    const pick = eligible[(seed + attempt) % eligible.length];
    const chars = pick.word.split("");
    for (let offset = 0; offset < chars.length - 2; offset += 1) {
      const at = 1 + ((seed + offset) % (chars.length - 2));
      if (chars[at] !== chars[at + 1]) {
        [chars[at], chars[at + 1]] = [chars[at + 1], chars[at]];
        words[pick.index] = chars.join("");
        return words.join(" ");
      }
    }
  }
  return text;
}
