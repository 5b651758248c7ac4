import type {
  AnswerResponse,
  MapView,
  Preference,
  PromptResponse,
  Snapshot,
} from "./types.js";

export interface ApiErrorBody {
  code: string;
  message: string;
  details?: unknown;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

/** Thin typed client for the /v1 JSON API; no planning logic lives here. */
export class Client {
  constructor(private readonly base: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.base}${path}`, {
      headers: init?.body ? { "content-type": "application/json" } : undefined,
      ...init,
    });
    const text = await response.text();
    const data = text ? JSON.parse(text) : null;
    if (!response.ok) {
      throw new ApiError(response.status, data as ApiErrorBody);
    }
    return data as T;
  }

  getMap(mapId: string): Promise<MapView> {
    return this.request(`/maps/${mapId}`);
  }

  createSession(mapId: string, preference: Preference): Promise<Snapshot> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ mapId, preference }),
    });
  }

  getSession(sessionId: string): Promise<Snapshot> {
    return this.request(`/sessions/${sessionId}`);
  }

  ask(sessionId: string, state: number, action: string): Promise<AnswerResponse> {
    return this.request(`/sessions/${sessionId}/question`, {
      method: "POST",
      body: JSON.stringify({ state, action }),
    });
  }

  submitPreference(sessionId: string, preference: Preference): Promise<PromptResponse> {
    return this.request(`/sessions/${sessionId}/preference`, {
      method: "POST",
      body: JSON.stringify(preference),
    });
  }

  confirm(sessionId: string, reply: "yes" | "no"): Promise<Snapshot> {
    return this.request(`/sessions/${sessionId}/confirm`, {
      method: "POST",
      body: JSON.stringify({ reply }),
    });
  }
}
