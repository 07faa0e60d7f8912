// DOM rendering: a scene card with the overlay, the transcript, and controls.
// Rendering copies payload text verbatim; numbering on display items comes
// from the service, inviting "the fourth one"-style follow-ups.

import { SessionView } from "./session.js";

export interface Handlers {
  onUtterance: (text: string) => void;
  onMove: (target: number) => void;
  onRestart: () => void;
}

export function render(root: HTMLElement, view: SessionView, handlers: Handlers): void {
  root.textContent = "";

  const scene = el("section", "scene");
  scene.appendChild(el("h2", "scene-label", view.situationLabel || "No code in view"));
  const overlay = el("div", "overlay");
  if (view.overlay.spoken) {
    overlay.appendChild(el("p", "spoken", view.overlay.spoken));
  }
  if (view.overlay.title) {
    overlay.appendChild(el("h3", "display-title", view.overlay.title));
  }
  const list = el("ul", "display-items");
  for (const item of view.overlay.items) {
    list.appendChild(el("li", "display-item", item));
  }
  overlay.appendChild(list);
  scene.appendChild(overlay);
  root.appendChild(scene);

  const transcript = el("section", "transcript");
  for (const line of view.transcript) {
    transcript.appendChild(el("p", `line ${line.who}`, `${line.who === "user" ? "> " : ""}${line.text}`));
  }
  root.appendChild(transcript);

  const controls = el("section", "controls");
  const form = document.createElement("form");
  const input = document.createElement("input");
  input.type = "text";
  input.placeholder = "Say something...";
  input.disabled = view.busy;
  const send = document.createElement("button");
  send.type = "submit";
  send.textContent = "Say";
  send.disabled = view.busy;
  form.append(input, send);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (input.value.trim()) {
      handlers.onUtterance(input.value);
      input.value = "";
    }
  });
  controls.appendChild(form);

  const moves = el("div", "moves");
  for (const neighbor of view.adjacent) {
    const button = document.createElement("button");
    button.textContent = `Go to ${neighbor.label}`;
    button.disabled = view.busy;
    button.addEventListener("click", () => handlers.onMove(neighbor.id));
    moves.appendChild(button);
  }
  controls.appendChild(moves);
  root.appendChild(controls);

  if (view.error) {
    const banner = el("div", "error-banner", view.error);
    const retry = document.createElement("button");
    retry.textContent = "Restart session";
    retry.addEventListener("click", () => handlers.onRestart());
    banner.appendChild(retry);
    root.appendChild(banner);
  }

  root.appendChild(el("footer", "turn-counter", `turn ${view.turn}`));
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}
