// Round-flow state machine. The UI is a thin client: it never computes
// edge labels, only mirrors the server's remaining set and posts the
// checked ids. At most one mutation is in flight at a time; extra
// submit calls while one is pending are dropped, so a double-click
// produces exactly one round record.

import { ApiClient, ApiError, Task } from "./api.js";

export type View =
  | { kind: "loading" }
  | { kind: "round"; task: Task; checked: Set<string>; error?: string }
  | { kind: "done" }
  | { kind: "error"; message: string };

export type Listener = (view: View) => void;

export class AnnotationController {
  private view_: View = { kind: "loading" };
  private inFlight = false;
  private listeners: Listener[] = [];

  constructor(private api: ApiClient) {}

  get view(): View {
    return this.view_;
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private setView(view: View): void {
    this.view_ = view;
    for (const l of this.listeners) l(view);
  }

  private roundView(task: Task): View {
    // a new round always starts with every remaining model checked
    return { kind: "round", task, checked: new Set(task.remaining) };
  }

  async loadNext(): Promise<View> {
    this.setView({ kind: "loading" });
    try {
      const task = await this.api.nextCluster();
      this.setView(task === null ? { kind: "done" } : this.roundView(task));
    } catch (err) {
      this.setView({ kind: "error", message: String(err) });
    }
    return this.view_;
  }

  /** Flip one model's checkbox; no-op outside a round. */
  toggle(modelId: string): void {
    if (this.view_.kind !== "round") return;
    const checked = new Set(this.view_.checked);
    if (checked.has(modelId)) checked.delete(modelId);
    else if (this.view_.task.remaining.includes(modelId)) checked.add(modelId);
    else return;
    this.setView({ ...this.view_, checked, error: undefined });
  }

  /** Post the currently checked ids as a confirm/divide round. */
  async submit(): Promise<View> {
    if (this.view_.kind !== "round") return this.view_;
    return this.post([...this.view_.checked].sort());
  }

  /** "None similar": every remaining model becomes its own subcluster. */
  async submitNoneSimilar(): Promise<View> {
    if (this.view_.kind !== "round") return this.view_;
    return this.post([]);
  }

  private async post(checked: string[]): Promise<View> {
    if (this.inFlight || this.view_.kind !== "round") return this.view_;
    const current = this.view_;
    this.inFlight = true;
    try {
      const result = await this.api.submitRound(current.task.cluster_id, checked);
      if (result.terminal) {
        this.inFlight = false;
        return this.loadNext();
      }
      const task: Task = {
        ...current.task,
        remaining: result.remaining,
        round: current.task.round + 1,
        previews: result.remaining.map((m) => `/api/preview/${m}.xyz`),
      };
      this.setView(this.roundView(task));
    } catch (err) {
      if (err instanceof ApiError) {
        // rejection: keep the checkboxes, surface the message inline
        this.setView({ ...current, error: err.message });
      } else {
        // network failure: no state loss, offer retry
        this.setView({ ...current, error: `network error, retry: ${String(err)}` });
      }
    } finally {
      this.inFlight = false;
    }
    return this.view_;
  }
}
