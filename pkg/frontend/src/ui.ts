/** DOM layer: queue cards with marker highlighting, char-offset span
 * selection, and the label form. All displayed text comes verbatim from the
 * API, so selection offsets map one-to-one onto server-side spans. */

import { QueueItem, QueueView, Stage } from "./api.js";
import {
  AnnotationSession,
  LabelForm,
  ValidationError,
  annotationProblems,
  emptyForm,
} from "./state.js";

type SpanSlot = "node1" | "node2";

const SLOT_CLASS: Record<SpanSlot, string> = { node1: "sel-node1", node2: "sel-node2" };

/** Render the sentence one character per element so clicks carry offsets. */
export function renderSentence(item: QueueItem, onCharClick?: (offset: number) => void): HTMLElement {
  const holder = document.createElement("p");
  holder.className = "sentence";
  const [m0, m1] = item.marker_span ?? [-1, -1];
  for (let i = 0; i < item.text.length; i++) {
    const ch = document.createElement("span");
    ch.textContent = item.text[i]!;
    ch.dataset.offset = String(i);
    if (i >= m0 && i < m1) {
      ch.classList.add("marker");
    }
    if (onCharClick) {
      ch.addEventListener("click", () => onCharClick(i));
    }
    holder.appendChild(ch);
  }
  return holder;
}

export function paintSelection(holder: HTMLElement, slot: SpanSlot, start: number, end: number): void {
  holder.querySelectorAll<HTMLElement>("span").forEach((ch) => {
    const off = Number(ch.dataset.offset);
    ch.classList.toggle(SLOT_CLASS[slot], off >= start && off < end);
  });
}

export function renderProgress(view: QueueView): HTMLElement {
  const bar = document.createElement("div");
  bar.className = "progress";
  const p = view.progress;
  bar.textContent = `pending ${p.pending} · screened ${p.screened} · annotated ${p.annotated} · total ${p.total}`;
  return bar;
}

function errorBanner(message: string): HTMLElement {
  const el = document.createElement("div");
  el.className = "banner error";
  el.textContent = message;
  return el;
}

interface CardCallbacks {
  onScreen: (sentenceId: string, verdict: boolean) => void;
  onAnnotate: (sentenceId: string, form: LabelForm) => void;
}

/** One candidate card: screening buttons or the annotation form. */
export function renderCard(item: QueueItem, stage: Stage, cb: CardCallbacks): HTMLElement {
  const card = document.createElement("section");
  card.className = "card";
  card.dataset.sentenceId = item.sentence_id;

  const form = emptyForm();
  let pendingSlot: SpanSlot = "node1";
  let anchor: number | null = null;

  const sentence = renderSentence(item, (offset) => {
    if (stage !== "annotation") return;
    if (anchor === null) {
      anchor = offset;
      return;
    }
    const start = Math.min(anchor, offset);
    const end = Math.max(anchor, offset) + 1;
    form[pendingSlot] = { start, end };
    paintSelection(sentence, pendingSlot, start, end);
    anchor = null;
    pendingSlot = pendingSlot === "node1" ? "node2" : "node1";
    refreshSubmit();
  });
  card.appendChild(sentence);

  if (item.marker) {
    const tag = document.createElement("small");
    tag.className = "marker-tag";
    tag.textContent = `marker: ${item.marker}`;
    card.appendChild(tag);
  }

  if (stage === "screening") {
    for (const [label, verdict, key] of [["hypothesis (a)", true, "a"], ["not a hypothesis (r)", false, "r"]] as const) {
      const btn = document.createElement("button");
      btn.textContent = label;
      btn.dataset.key = key;
      btn.addEventListener("click", () => cb.onScreen(item.sentence_id, verdict));
      card.appendChild(btn);
    }
    return card;
  }

  const choices = document.createElement("div");
  choices.className = "choices";
  const directionSel = document.createElement("select");
  directionSel.innerHTML =
    `<option value="">direction…</option>` +
    ["positive", "negative", "nonlinear"].map((d) => `<option>${d}</option>`).join("");
  const causalitySel = document.createElement("select");
  causalitySel.innerHTML =
    `<option value="">causality…</option>` +
    ["causal", "associative"].map((c) => `<option>${c}</option>`).join("");
  choices.append(directionSel, causalitySel);
  card.appendChild(choices);

  const problems = document.createElement("ul");
  problems.className = "problems";
  card.appendChild(problems);

  const submit = document.createElement("button");
  submit.textContent = "save annotation";
  submit.disabled = true;
  card.appendChild(submit);

  function refreshSubmit(): void {
    form.direction = (directionSel.value || null) as LabelForm["direction"];
    form.causality = (causalitySel.value || null) as LabelForm["causality"];
    const issues = annotationProblems(form, item.text.length);
    problems.innerHTML = "";
    for (const issue of issues) {
      const li = document.createElement("li");
      li.textContent = issue;
      problems.appendChild(li);
    }
    submit.disabled = issues.length > 0;
  }

  directionSel.addEventListener("change", refreshSubmit);
  causalitySel.addEventListener("change", refreshSubmit);
  submit.addEventListener("click", () => cb.onAnnotate(item.sentence_id, { ...form }));
  return card;
}

export class AnnotatorApp {
  private stage: Stage = "screening";

  constructor(
    private readonly root: HTMLElement,
    private readonly session: AnnotationSession,
  ) {}

  async start(): Promise<void> {
    await this.refresh();
  }

  async setStage(stage: Stage): Promise<void> {
    this.stage = stage;
    await this.refresh();
  }

  private async refresh(): Promise<void> {
    const view = await this.session.load(this.stage);
    this.root.innerHTML = "";
    if (!view) {
      this.root.appendChild(errorBanner(this.session.lastError ?? "service unreachable"));
      return;
    }
    const tabs = document.createElement("nav");
    for (const stage of ["screening", "annotation"] as const) {
      const b = document.createElement("button");
      b.textContent = stage;
      b.disabled = stage === this.stage;
      b.addEventListener("click", () => void this.setStage(stage));
      tabs.appendChild(b);
    }
    this.root.appendChild(tabs);
    this.root.appendChild(renderProgress(view));

    if (view.items.length === 0) {
      const done = document.createElement("p");
      done.className = "drained";
      done.textContent = "queue drained";
      this.root.appendChild(done);
      return;
    }
    for (const item of view.items) {
      this.root.appendChild(
        renderCard(item, this.stage, {
          onScreen: (sid, verdict) => void this.guard(() => this.session.screen(sid, verdict)),
          onAnnotate: (sid, form) => void this.guard(() => this.session.annotate(sid, form)),
        }),
      );
    }
  }

  private async guard(action: () => Promise<unknown>): Promise<void> {
    try {
      await action();
      await this.refresh();
    } catch (err) {
      if (err instanceof ValidationError) {
        this.root.prepend(errorBanner(err.message));
        return; // blocked client-side; no state change
      }
      this.root.prepend(errorBanner(err instanceof Error ? err.message : String(err)));
    }
  }
}
