import type { ApiClient } from "./api";
import type { SessionState, VoiceResponse } from "./types";
import { buildViewModel, ViewModel } from "./viewmodel";

export type Listener = (vm: ViewModel) => void;

// Holds the latest session state and keeps it fresh by polling; voice
// responses are applied verbatim (indicator and view come from the
// service, never from local guesswork).
export class SessionController {
  private state: SessionState | null = null;
  private listeners: Listener[] = [];
  private timer: ReturnType<typeof setInterval> | null = null;

  error: string | null = null;

  constructor(
    private client: ApiClient,
    private sessionId: string,
    private pollMs = 500
  ) {}

  onChange(fn: Listener): void {
    this.listeners.push(fn);
  }

  get viewModel(): ViewModel | null {
    return this.state ? buildViewModel(this.state) : null;
  }

  private publish(): void {
    const vm = this.viewModel;
    if (vm) {
      for (const fn of this.listeners) {
        fn(vm);
      }
    }
  }

  async refresh(): Promise<void> {
    try {
      this.state = await this.client.getSession(this.sessionId);
      this.error = null;
    } catch (e) {
      this.error = e instanceof Error ? e.message : String(e);
      return;
    }
    this.publish();
  }

  startPolling(): void {
    if (this.timer === null) {
      this.timer = setInterval(() => void this.refresh(), this.pollMs);
    }
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async sendToken(token: string): Promise<VoiceResponse | null> {
    let resp: VoiceResponse;
    try {
      resp = await this.client.sendVoiceToken(this.sessionId, token);
    } catch (e) {
      this.error = e instanceof Error ? e.message : String(e);
      return null;
    }
    if (this.state) {
      this.state = { ...this.state, indicator: resp.indicator, view: resp.view };
      this.publish();
    }
    // actions that change studies need a full state re-fetch
    if (resp.action === "open_next") {
      await this.refresh();
    }
    return resp;
  }

  async openNext(): Promise<void> {
    try {
      this.state = await this.client.openNext(this.sessionId);
      this.error = null;
    } catch (e) {
      this.error = e instanceof Error ? e.message : String(e);
      return;
    }
    this.publish();
  }
}
