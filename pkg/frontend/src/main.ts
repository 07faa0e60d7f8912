import { ApiClient } from "./api.js";
import { SessionController, corruptText } from "./session.js";
import { render } from "./view.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app element");
}

const params = new URLSearchParams(window.location.search);
const world = params.get("world") ?? "library";
const api = new ApiClient(params.get("api") ?? "");
const controller = new SessionController(api);

const noiseToggle = document.getElementById("noise") as HTMLInputElement | null;
let typoSeed = 1;

function maybeCorrupt(text: string): string {
  if (noiseToggle?.checked) {
    typoSeed += 1;
    return corruptText(text, typoSeed);
  }
  return text;
}

controller.onChange = (view) => {
  render(root, view, {
    onUtterance: (text) => void controller.submitUtterance(maybeCorrupt(text)),
    onMove: (target) => void controller.submitMove(target),
    onRestart: () => void controller.start(world),
  });
};

void controller.start(world);
