import type {
  LineEdit,
  LineResponse,
  SessionState,
  SnapshotResponse,
  VoiceResponse,
} from "./types";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string }
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

// Thin typed wrapper over the service HTTP API. The fetch function is
// injected so tests can script responses without a network.
export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init)
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: { method: string; headers?: Record<string, string>; body?: string } = {
      method,
    };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, `${method} ${path} -> ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  createSession(): Promise<{ session_id: string }> {
    return this.request("POST", "/sessions");
  }

  getSession(id: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${id}`);
  }

  openStudy(id: string, manifest: string): Promise<SessionState> {
    return this.request("POST", `/sessions/${id}/open`, { manifest });
  }

  openNext(id: string): Promise<SessionState & { opened: boolean }> {
    return this.request("POST", `/sessions/${id}/open-next`);
  }

  patchLine(id: string, edit: LineEdit): Promise<LineResponse> {
    return this.request("PATCH", `/sessions/${id}/lines`, edit);
  }

  sendVoiceToken(id: string, token: string): Promise<VoiceResponse> {
    return this.request("POST", `/sessions/${id}/voice`, { token });
  }

  saveSnapshot(id: string, note: string): Promise<SnapshotResponse> {
    return this.request("POST", `/sessions/${id}/snapshot`, { note });
  }
}
