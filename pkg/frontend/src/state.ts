/** Client-side session state and the invariants that gate every request.
 *
 * All truth lives on the server; this layer only mirrors the queue and
 * refuses to build a request the record state machine would reject:
 * screening judgments go to pending/screened items only, annotation
 * judgments only to screened-true items, and span selections must be
 * non-overlapping, ordered, and inside the sentence before a POST is issued.
 */

import {
  AnnotationApi,
  AnnotationJudgment,
  ApiError,
  Causality,
  Direction,
  Progress,
  QueueItem,
  QueueView,
  Stage,
} from "./api.js";

export interface SpanSelection {
  start: number;
  end: number;
}

export interface LabelForm {
  node1: SpanSelection | null;
  node2: SpanSelection | null;
  direction: Direction | null;
  causality: Causality | null;
  annotator: string;
}

export function emptyForm(annotator = "annotator"): LabelForm {
  return { node1: null, node2: null, direction: null, causality: null, annotator };
}

export function spansOverlap(a: SpanSelection, b: SpanSelection): boolean {
  return a.start < b.end && b.start < a.end;
}

/** Problems that make the form unsubmittable; empty list means go. */
export function annotationProblems(form: LabelForm, textLength: number): string[] {
  const problems: string[] = [];
  for (const [name, span] of [["node1", form.node1], ["node2", form.node2]] as const) {
    if (!span) {
      problems.push(`${name} span is not selected`);
      continue;
    }
    if (!(0 <= span.start && span.start < span.end && span.end <= textLength)) {
      problems.push(`${name} span (${span.start}, ${span.end}) is out of range`);
    }
  }
  if (form.node1 && form.node2 && spansOverlap(form.node1, form.node2)) {
    problems.push("node1 and node2 selections overlap");
  }
  if (!form.direction) {
    problems.push("direction is not chosen");
  }
  if (!form.causality) {
    problems.push("causality is not chosen");
  }
  return problems;
}

export function canSubmitAnnotation(form: LabelForm, textLength: number): boolean {
  return annotationProblems(form, textLength).length === 0;
}

/** Raised before any network traffic when a submission violates an invariant. */
export class ValidationError extends Error {
  constructor(public readonly problems: string[]) {
    super(problems.join("; "));
  }
}

export interface SessionEvents {
  onQueueChanged?: (view: QueueView) => void;
  onError?: (message: string) => void;
}

export class AnnotationSession {
  view: QueueView | null = null;
  lastError: string | null = null;

  constructor(
    private readonly api: AnnotationApi,
    private readonly events: SessionEvents = {},
  ) {}

  get progress(): Progress | null {
    return this.view?.progress ?? null;
  }

  private fail(message: string): void {
    this.lastError = message;
    this.events.onError?.(message);
  }

  async load(stage: Stage, limit = 20): Promise<QueueView | null> {
    try {
      this.view = await this.api.fetchQueue(stage, limit);
      this.lastError = null;
      this.events.onQueueChanged?.(this.view);
      return this.view;
    } catch (err) {
      this.fail(err instanceof Error ? err.message : String(err));
      return null;
    }
  }

  private itemFor(sentenceId: string): QueueItem {
    const item = this.view?.items.find((i) => i.sentence_id === sentenceId);
    if (!item) {
      throw new ValidationError([`sentence ${sentenceId} is not in the loaded batch`]);
    }
    return item;
  }

  /** Screening verdict; allowed on pending items (and re-screens of screened ones). */
  async screen(sentenceId: string, isHypothesis: boolean, annotator = "annotator") {
    const item = this.itemFor(sentenceId);
    if (item.status === "annotated") {
      throw new ValidationError(["annotated records cannot be re-screened"]);
    }
    const record = await this.api.submitLabel(sentenceId, {
      is_hypothesis: isHypothesis,
      annotator,
    });
    await this.load(this.view!.stage, Math.max(this.view!.items.length, 1));
    return record;
  }

  /** Annotation submit; every client-side invariant must hold first. */
  async annotate(sentenceId: string, form: LabelForm) {
    const item = this.itemFor(sentenceId);
    if (!(item.status === "screened" || item.status === "annotated") || item.is_hypothesis !== true) {
      throw new ValidationError(["only screened-true records accept annotations"]);
    }
    const problems = annotationProblems(form, item.text.length);
    if (problems.length > 0) {
      throw new ValidationError(problems);
    }
    const judgment: AnnotationJudgment = {
      node1_span: [form.node1!.start, form.node1!.end],
      node2_span: [form.node2!.start, form.node2!.end],
      direction: form.direction!,
      causality: form.causality!,
      annotator: form.annotator,
    };
    try {
      const record = await this.api.submitLabel(sentenceId, judgment);
      await this.load(this.view!.stage, Math.max(this.view!.items.length, 1));
      return record;
    } catch (err) {
      // server rejection: keep the form, surface the detail
      if (err instanceof ApiError) {
        this.fail(err.detail);
      }
      throw err;
    }
  }
}
