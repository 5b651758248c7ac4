import type { ExplanationView, MapView } from "./types.js";

const ARROWS: Record<string, string> = {
  north: "↑",
  east: "→",
  south: "↓",
  west: "←",
  stop: "■",
};

const GLYPHS: Record<string, string> = {
  start: "S",
  destination: "D",
  landmark: "★",
  obstacle: "",
  crowded: "",
  corridor: "",
};

/**
 * Grid view of the map. Start/destination carry their letters, the
 * landmark its star, crowded cells a red tint, obstacles a dark fill;
 * the route, when present, is overlaid as direction arrows.
 */
export function renderMap(map: MapView, route: [number, string][] | null): HTMLElement {
  const container = document.createElement("div");
  container.className = "map-view";

  const grid = document.createElement("div");
  grid.className = "grid";
  grid.style.gridTemplateColumns = `repeat(${map.width}, 2.2rem)`;

  const routeAction = new Map<number, string>();
  for (const [state, action] of route ?? []) {
    routeAction.set(state, action);
  }

  map.cells.forEach((kind, index) => {
    const cell = document.createElement("div");
    cell.className = `cell ${kind}`;
    cell.dataset.cell = String(index);
    const glyph = document.createElement("span");
    glyph.className = "glyph";
    glyph.textContent = GLYPHS[kind] ?? "";
    cell.appendChild(glyph);
    const action = routeAction.get(index);
    if (action !== undefined) {
      cell.classList.add("route");
      const arrow = document.createElement("span");
      arrow.className = "arrow";
      arrow.textContent = ARROWS[action] ?? "?";
      cell.appendChild(arrow);
    }
    grid.appendChild(cell);
  });
  container.appendChild(grid);

  if (!route) {
    const placeholder = document.createElement("p");
    placeholder.className = "placeholder";
    placeholder.textContent = "No route planned yet.";
    container.appendChild(placeholder);
  }
  return container;
}

export interface SentenceHooks {
  onAsk: (state: number, action: string, host: HTMLLIElement) => void;
  onHover: (state: number, entered: boolean) => void;
}

/**
 * Ordered sentence list; every sentence is a button linked to its
 * (state, action) provenance so a click can ask the why-question.
 */
export function renderExplanation(
  explanation: ExplanationView,
  hooks: SentenceHooks,
): HTMLElement {
  const list = document.createElement("ol");
  list.className = "sentences";
  for (const sentence of explanation.sentences) {
    const item = document.createElement("li");
    item.dataset.state = String(sentence.state);
    const button = document.createElement("button");
    button.type = "button";
    button.className = "sentence";
    button.textContent = sentence.text;
    button.addEventListener("click", () => hooks.onAsk(sentence.state, sentence.action, item));
    item.addEventListener("mouseenter", () => hooks.onHover(sentence.state, true));
    item.addEventListener("mouseleave", () => hooks.onHover(sentence.state, false));
    item.appendChild(button);
    list.appendChild(item);
  }
  return list;
}

export function renderAnswer(host: HTMLLIElement, question: string, answer: string): void {
  let panel = host.querySelector<HTMLDivElement>(".answer");
  if (!panel) {
    panel = document.createElement("div");
    panel.className = "answer";
    host.appendChild(panel);
  }
  panel.replaceChildren();
  const q = document.createElement("p");
  q.className = "answer-question";
  q.textContent = question;
  const a = document.createElement("p");
  a.className = "answer-text";
  a.textContent = answer;
  panel.append(q, a);
}
