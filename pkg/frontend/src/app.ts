/**
 * Single-page annotation flow: one item at a time, keyboard-first.
 *
 * The server stays the source of truth: progress counts are re-read
 * after every submission, and resumption falls out of asking it for
 * the next unlabeled item.  The Done screen additionally tallies what
 * this visit submitted.  Item texts render verbatim through
 * textContent — no trimming, casing, or markup interpretation.
 */

import { AnnotationClient, ApiError, SessionItem, SessionView } from "./api.js";
import { LabelBinding, bindingsFor } from "./keymap.js";

export interface AppOptions {
  annotator?: string;
  onNavigate?: (sessionId: string) => void;
}

// Payload fields shown as full text panels, in display order; other
// primitive fields follow.  The producing system stays hidden so
// judgments are blind to it (it still reaches the export untouched).
const TEXT_FIELD_ORDER = ["question", "paraphrase", "candidate", "text"];
const HIDDEN_FIELDS = new Set(["item_id", "uid", "system"]);

type Screen = "home" | "annotate" | "done";

export function displayFields(item: SessionItem): Array<[string, string]> {
  const out: Array<[string, string]> = [];
  const seen = new Set<string>(HIDDEN_FIELDS);
  const fields = [
    ...TEXT_FIELD_ORDER.filter((f) => f in item),
    ...Object.keys(item).filter((f) => !TEXT_FIELD_ORDER.includes(f)),
  ];
  for (const field of fields) {
    if (seen.has(field)) continue;
    seen.add(field);
    const value = item[field];
    if (typeof value === "string") {
      out.push([field, value]);
    } else if (typeof value === "number" || typeof value === "boolean") {
      out.push([field, String(value)]);
    }
  }
  return out;
}

export function parseItemLines(raw: string): unknown[] {
  const items: unknown[] = [];
  const lines = raw.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    try {
      items.push(JSON.parse(line));
    } catch (err) {
      throw new Error(`items line ${i + 1}: ${err instanceof Error ? err.message : String(err)}`);
    }
  }
  return items;
}

export class AnnotationApp {
  private readonly doc: Document;
  private view: SessionView | null = null;
  private current: SessionItem | null = null;
  private bindings: LabelBinding[] = [];
  private tally = new Map<string, number>();
  private screen: Screen = "home";
  private busy = false;
  private pending: (() => Promise<void>) | null = null;
  private annotator: string;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: AnnotationClient,
    private readonly options: AppOptions = {},
  ) {
    this.doc = root.ownerDocument;
    this.annotator = options.annotator ?? "";
    this.onKeyDown = this.onKeyDown.bind(this);
    this.doc.addEventListener("keydown", this.onKeyDown);
  }

  destroy(): void {
    this.doc.removeEventListener("keydown", this.onKeyDown);
    this.root.replaceChildren();
  }

  async start(sessionId?: string): Promise<void> {
    await this.run(() => (sessionId ? this.openSession(sessionId) : this.showHome()));
  }

  /**
   * Every screen transition goes through here: the task is remembered
   * so the error panel's Retry re-runs exactly the step that failed,
   * and the busy flag drops concurrent input instead of queueing it.
   */
  private async run(task: () => Promise<void>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.pending = task;
    try {
      await task();
      this.pending = null;
      this.clearError();
    } catch (err) {
      this.renderError(err);
    } finally {
      this.busy = false;
    }
  }

  private onKeyDown(ev: KeyboardEvent): void {
    if (this.screen !== "annotate" || this.busy) return;
    if (ev.altKey || ev.ctrlKey || ev.metaKey) return;
    const target = ev.target as HTMLElement | null;
    if (target && ["INPUT", "TEXTAREA", "SELECT"].includes(target.tagName)) return;
    const key = ev.key.toLowerCase();
    const binding = this.bindings.find((b) => b.key === key);
    if (!binding) return;
    ev.preventDefault();
    void this.run(() => this.submit(binding));
  }

  private async openSession(sessionId: string): Promise<void> {
    const view = await this.client.session(sessionId);
    this.view = view;
    this.bindings = bindingsFor(view.labels);
    this.tally = new Map();
    this.options.onNavigate?.(view.session_id);
    await this.advance();
  }

  private async advance(): Promise<void> {
    if (!this.view) return;
    this.current = await this.client.next(this.view.session_id);
    if (this.current === null) {
      this.renderDone();
    } else {
      this.renderItem();
    }
  }

  private async submit(binding: LabelBinding): Promise<void> {
    if (!this.view || !this.current) return;
    const sessionId = this.view.session_id;
    try {
      await this.client.submitLabel(sessionId, this.current.item_id, binding.label, this.annotator);
      this.tally.set(binding.label, (this.tally.get(binding.label) ?? 0) + 1);
    } catch (err) {
      // 409 means the server already holds a label for this item (a
      // retried POST that landed, another tab); settle on its state.
      if (!(err instanceof ApiError && err.status === 409)) throw err;
    }
    this.view = await this.client.session(sessionId);
    await this.advance();
  }

  private async showHome(): Promise<void> {
    this.screen = "home";
    const sessions = await this.client.listSessions();
    const container = this.el("div", "home");
    container.append(this.el("h1", "", "Annotation sessions"));

    const annotatorRow = this.el("label", "annotator-row", "Annotator ");
    const annotatorInput = this.el("input", "annotator-input");
    annotatorInput.value = this.annotator;
    annotatorRow.append(annotatorInput);
    container.append(annotatorRow);

    const list = this.el("ul", "session-list");
    for (const s of sessions) {
      const entry = this.el("li");
      const open = this.el(
        "button",
        "open-session",
        `${s.session_id} — ${s.task} — ${s.labeled}/${s.total} labeled`,
      );
      open.type = "button";
      open.onclick = () => {
        this.annotator = annotatorInput.value;
        void this.run(() => this.openSession(s.session_id));
      };
      entry.append(open);
      list.append(entry);
    }
    container.append(list);

    const form = this.el("div", "create-form");
    form.append(this.el("h2", "", "New session"));
    const taskSelect = this.el("select", "task-select");
    for (const task of ["adequacy", "dataset_error"]) {
      const option = this.el("option", "", task);
      option.value = task;
      taskSelect.append(option);
    }
    const itemsInput = this.el("textarea", "items-input");
    itemsInput.rows = 6;
    itemsInput.placeholder = '{"uid": "q1", "question": "…", "paraphrase": "…"} — one JSON object per line';
    const createButton = this.el("button", "create-session", "Create session");
    createButton.type = "button";
    createButton.onclick = () => {
      this.annotator = annotatorInput.value;
      void this.run(async () => {
        const items = parseItemLines(itemsInput.value);
        const sessionId = await this.client.createSession(taskSelect.value, items);
        await this.openSession(sessionId);
      });
    };
    form.append(taskSelect, itemsInput, createButton);
    container.append(form);

    this.root.replaceChildren(container);
  }

  private renderItem(): void {
    this.screen = "annotate";
    const view = this.view;
    const item = this.current;
    if (!view || !item) return;
    const container = this.el("div", "annotate");

    const header = this.el("header", "session-header");
    header.append(this.el("div", "task-name", view.task));
    const progress = this.el("div", "progress", `${view.labeled} / ${view.total} labeled`);
    progress.setAttribute("role", "status");
    header.append(progress);
    container.append(header);

    const card = this.el("div", "item-card");
    card.append(this.el("div", "item-meta", item.item_id));
    for (const [field, value] of displayFields(item)) {
      const section = this.el("section", "item-field");
      section.append(this.el("h2", "field-name", field));
      const text = this.el("pre", "item-text");
      text.textContent = value;
      section.append(text);
      card.append(section);
    }
    container.append(card);

    const buttons = this.el("div", "label-buttons");
    for (const binding of this.bindings) {
      const button = this.el("button", "label-button", binding.text);
      button.type = "button";
      button.dataset.label = binding.label;
      button.onclick = () => void this.run(() => this.submit(binding));
      buttons.append(button);
    }
    container.append(buttons);
    container.append(
      this.el(
        "div",
        "key-legend",
        "keys: " + this.bindings.map((b) => `${b.key} = ${b.text}`).join(" · "),
      ),
    );

    this.root.replaceChildren(container);
  }

  private renderDone(): void {
    this.screen = "done";
    const view = this.view;
    if (!view) return;
    const container = this.el("div", "done");
    container.append(this.el("h1", "", "Done"));
    const progress = this.el("div", "progress", `${view.labeled} / ${view.total} labeled`);
    progress.setAttribute("role", "status");
    container.append(progress);
    container.append(this.el("h2", "", "Submitted this visit"));
    const summary = this.el("ul", "done-summary");
    for (const binding of this.bindings) {
      const row = this.el(
        "li",
        "summary-row",
        `${binding.text}: ${this.tally.get(binding.label) ?? 0}`,
      );
      row.dataset.label = binding.label;
      summary.append(row);
    }
    container.append(summary);
    this.root.replaceChildren(container);
  }

  /**
   * Errors overlay the current screen instead of replacing it, so the
   * item under judgment stays visible and is never skipped; Retry
   * re-runs the failed step.
   */
  private renderError(err: unknown): void {
    this.clearError();
    const panel = this.el("div", "error-panel");
    panel.setAttribute("role", "alert");
    const code = err instanceof ApiError ? err.code : "Error";
    const message = err instanceof Error ? err.message : String(err);
    panel.append(this.el("strong", "error-code", code));
    panel.append(this.el("span", "error-message", ` ${message} `));
    const retry = this.el("button", "retry-button", "Retry");
    retry.type = "button";
    retry.onclick = () => {
      const task = this.pending;
      if (task) void this.run(task);
    };
    panel.append(retry);
    this.root.prepend(panel);
  }

  private clearError(): void {
    this.root.querySelector(".error-panel")?.remove();
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className = "",
    text = "",
  ): HTMLElementTagNameMap[K] {
    const node = this.doc.createElement(tag);
    if (className) node.className = className;
    if (text) node.textContent = text;
    return node;
  }
}
