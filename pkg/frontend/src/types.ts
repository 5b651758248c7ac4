export interface Preference {
  version?: string;
  objective: string;
  locality: string;
  specificity: string;
  corpus: string;
}

export interface MapView {
  id: string;
  name: string;
  width: number;
  height: number;
  cells: string[];
  start: number;
  destination: number;
}

export interface SentenceView {
  text: string;
  state: number;
  action: string;
}

export interface ExplanationView {
  sentences: SentenceView[];
  preference: Preference;
  routeStates: number[];
}

export interface Snapshot {
  id: string;
  mapId: string;
  state: string;
  preference: Preference | null;
  pendingPreference: Preference | null;
  conflict: string | null;
  prompt: string | null;
  route: [number, string][] | null;
  metrics: { moves: number; crowdedEntries: number } | null;
  explanation: ExplanationView | null;
  updateCount: number;
  map: MapView;
}

export interface PromptResponse {
  prompt: string;
  conflict: "none" | "soft" | "hard";
}

export interface AnswerResponse {
  answer: string;
  question: string;
}
