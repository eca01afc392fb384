// View layer: render the machine state into a container and re-wire the
// handlers it needs. Everything is rebuilt from state on each pass, so the
// machines stay the single source of truth.

import { FeedbackKey, FeedbackValue, IdeaCard, IdeaDetail, TraceStep } from "./api.js";
import { CRITERIA_HINTS, JudgingMachine, SIDES, Side } from "./judging.js";
import {
  FEEDBACK_KEYS,
  FEEDBACK_QUESTIONS,
  FEEDBACK_VALUES,
  StudyMachine,
  TOPICS_TO_CHOOSE,
  formatClock,
} from "./study.js";

const ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function esc(text: string): string {
  return text.replace(/[&<>"']/g, (c) => ESCAPES[c] ?? c);
}

function ideaBody(idea: IdeaCard): string {
  return `
    <p class="rq">${esc(idea.research_question)}</p>
    <p class="theory">${esc(idea.theory)}</p>
    <ol class="hypotheses">
      ${idea.hypotheses.map((h) => `<li>${esc(h)}</li>`).join("")}
    </ol>`;
}

// -- pair judging ----------------------------------------------------------

export function renderJudging(root: HTMLElement, machine: JudgingMachine): void {
  const s = machine.state;
  if (s.phase === "idle") {
    root.innerHTML = "";
    return;
  }
  if (s.phase === "loading") {
    root.innerHTML = `<p class="muted">Fetching the next pair...</p>`;
    return;
  }
  if (s.phase === "done") {
    root.innerHTML = `
      <div class="card">
        <h2>All done</h2>
        <p>No more pairs for <strong>${esc(machine.annotator)}</strong>.
           You judged ${s.judged} this sitting.</p>
      </div>`;
    return;
  }
  if (s.phase === "offline") {
    root.innerHTML = `
      <div class="banner">
        <p>Connection problem: ${esc(s.toast ?? "network error")}</p>
        <p>Nothing was stored. Your selections are kept.</p>
        <button data-retry>Retry</button>
      </div>`;
    root.querySelector("[data-retry]")?.addEventListener("click", () => void machine.retry());
    return;
  }

  const pair = s.pair;
  if (pair === null) return;
  const busy = s.phase === "submitting";
  root.innerHTML = `
    <div class="pair">
      <article class="idea"><h3>Left</h3>${ideaBody(pair.first)}</article>
      <article class="idea"><h3>Right</h3>${ideaBody(pair.second)}</article>
    </div>
    <div class="selectors">
      ${pair.criteria
        .map(
          (criterion, i) => `
        <div class="criterion" data-criterion="${esc(criterion)}">
          <div class="label">
            <strong>${esc(criterion)}</strong>
            <p class="hint">${esc(CRITERIA_HINTS[criterion] ?? "")}</p>
          </div>
          <div class="sides">
            ${SIDES.map(
              (side) => `
              <label>
                <input type="radio" name="criterion-${i}" value="${side}"
                  ${s.selections[criterion] === side ? "checked" : ""}
                  ${busy ? "disabled" : ""}>
                ${side}
              </label>`,
            ).join("")}
          </div>
        </div>`,
        )
        .join("")}
    </div>
    ${s.toast ? `<p class="toast">${esc(s.toast)}</p>` : ""}
    <button data-submit ${machine.canSubmit() && !busy ? "" : "disabled"}>
      ${busy ? "Submitting..." : "Submit judgment"}
    </button>`;

  for (const row of root.querySelectorAll<HTMLElement>("[data-criterion]")) {
    const criterion = row.dataset.criterion ?? "";
    for (const input of row.querySelectorAll<HTMLInputElement>("input[type=radio]")) {
      input.addEventListener("change", () => machine.select(criterion, input.value as Side));
    }
  }
  root.querySelector("[data-submit]")?.addEventListener("click", () => void machine.submit());
}

// -- study session ---------------------------------------------------------

function traceStepHtml(step: TraceStep): string {
  const body =
    step.type === "code" ? `<pre>${esc(step.content)}</pre>` : `<p>${esc(step.content)}</p>`;
  const output = step.output ? `<pre class="output">${esc(step.output)}</pre>` : "";
  const error = step.error ? `<pre class="error">${esc(step.error)}</pre>` : "";
  return `<div class="step">${body}${output}${error}</div>`;
}

function referenceCard(ref: IdeaDetail, machine: StudyMachine): string {
  const steps = machine.state.traceMode === "raw" ? ref.trace : ref.summary;
  return `
    <article class="idea ref">
      ${ideaBody(ref)}
      <div class="snippets">
        ${ref.snippets
          .map(
            (sn) => `
          <button data-snippet data-idea="${esc(ref.id)}" data-index="${sn.index}">
            ${machine.snippetOpen(ref.id, sn.index) ? "Hide" : "Show"} ${esc(sn.name)}
          </button>
          ${machine.snippetOpen(ref.id, sn.index) ? `<pre>${esc(sn.lines)}</pre>` : ""}`,
          )
          .join("")}
      </div>
      <div class="trace">
        <h4>${machine.state.traceMode === "raw" ? "Validation trace" : "Trace summary"}</h4>
        ${steps.length ? steps.map(traceStepHtml).join("") : `<p class="muted">No trace recorded.</p>`}
      </div>
    </article>`;
}

function feedbackLabel(value: string): string {
  // VeryHelpful -> Very helpful
  return value.replace(/([a-z])([A-Z])/g, "$1 $2").replace(/^(\w)(.*)$/, (_, a, rest) => {
    return a.toUpperCase() + rest.toLowerCase();
  });
}

export function renderStudy(root: HTMLElement, machine: StudyMachine): void {
  const s = machine.state;
  const toast = s.toast ? `<p class="toast">${esc(s.toast)}</p>` : "";

  if (s.phase === "choosing") {
    root.innerHTML = `
      <div class="card">
        <h2>Choose ${TOPICS_TO_CHOOSE} topics</h2>
        <p class="muted">You get one timed writing window per topic, in order.</p>
        ${s.offered
          .map(
            (t) => `
          <label class="pick">
            <input type="checkbox" value="${esc(t.id)}" ${s.picked.includes(t.id) ? "checked" : ""}>
            ${esc(t.title)}
          </label>`,
          )
          .join("")}
        ${toast}
        <button data-begin ${machine.canBegin() ? "" : "disabled"}>Begin session</button>
      </div>`;
    for (const input of root.querySelectorAll<HTMLInputElement>("input[type=checkbox]")) {
      input.addEventListener("change", () => machine.togglePick(input.value));
    }
    root.querySelector("[data-begin]")?.addEventListener("click", () => void machine.begin());
    return;
  }

  if (s.phase === "opening") {
    root.innerHTML = `<p class="muted">Opening session...</p>`;
    return;
  }

  if (s.phase === "working") {
    const topic = machine.currentTopic();
    const session = s.session;
    if (topic === null || session === null) return;
    const title = s.offered.find((t) => t.id === topic.topic_id)?.title ?? topic.topic_id;
    const locked = machine.editorLocked();
    root.innerHTML = `
      <div class="workbench">
        <div class="editor-pane">
          <div class="row">
            <h2>Topic ${s.current + 1} of ${s.progress.length}: ${esc(title)}</h2>
            <span class="clock" data-clock>${formatClock(machine.remainingMs())}</span>
          </div>
          <p class="muted">Propose one research idea: question, theory, hypotheses.
             The window closes when the clock runs out; the server keeps its own time.</p>
          <textarea data-editor rows="14" ${locked ? "disabled" : ""}
            placeholder="Your idea for this topic">${esc(topic.draft)}</textarea>
          ${toast}
          <div class="row">
            <button data-submit-idea ${locked ? "disabled" : ""}>Submit idea</button>
            ${locked && !topic.submitted ? `<button data-skip>Continue without submitting</button>` : ""}
          </div>
        </div>
        ${
          machine.referencesVisible()
            ? `
        <aside class="refs">
          <div class="row">
            <h3>Reference ideas</h3>
            <button data-trace-mode>
              Show ${s.traceMode === "raw" ? "summaries" : "raw traces"}
            </button>
          </div>
          ${session.references.map((ref) => referenceCard(ref, machine)).join("")}
        </aside>`
            : ""
        }
      </div>`;

    const editor = root.querySelector<HTMLTextAreaElement>("[data-editor]");
    editor?.addEventListener("change", () => machine.editDraft(editor.value));
    root.querySelector("[data-submit-idea]")?.addEventListener("click", () => {
      if (editor) machine.editDraft(editor.value);
      void machine.submitIdea();
    });
    root.querySelector("[data-skip]")?.addEventListener("click", () => machine.nextTopic());
    root
      .querySelector("[data-trace-mode]")
      ?.addEventListener("click", () => machine.toggleTraceMode());
    for (const button of root.querySelectorAll<HTMLElement>("[data-snippet]")) {
      button.addEventListener("click", () =>
        machine.toggleSnippet(button.dataset.idea ?? "", Number(button.dataset.index)),
      );
    }
    return;
  }

  if (s.phase === "feedback") {
    root.innerHTML = `
      <div class="card">
        <h2>Before you go</h2>
        ${FEEDBACK_KEYS.map(
          (key, i) => `
          <fieldset data-key="${key}">
            <legend>${esc(FEEDBACK_QUESTIONS[key])}</legend>
            ${FEEDBACK_VALUES.map(
              (value) => `
              <label>
                <input type="radio" name="feedback-${i}" value="${value}"
                  ${s.feedback[key] === value ? "checked" : ""}>
                ${feedbackLabel(value)}
              </label>`,
            ).join("")}
          </fieldset>`,
        ).join("")}
        ${toast}
        <button data-finish ${machine.canFinish() ? "" : "disabled"}>Finish</button>
      </div>`;
    for (const fieldset of root.querySelectorAll<HTMLElement>("[data-key]")) {
      for (const input of fieldset.querySelectorAll<HTMLInputElement>("input[type=radio]")) {
        input.addEventListener("change", () =>
          machine.setFeedback(fieldset.dataset.key as FeedbackKey, input.value as FeedbackValue),
        );
      }
    }
    root.querySelector("[data-finish]")?.addEventListener("click", () => void machine.finish());
    return;
  }

  // done
  const late = s.progress.filter((p) => p.submitted && p.late).map((p) => p.topic_id);
  root.innerHTML = `
    <div class="card">
      <h2>Thanks!</h2>
      <p>Your session is complete.</p>
      ${
        late.length
          ? `<p class="muted">Stored after the deadline (flagged late): ${late
              .map(esc)
              .join(", ")}.</p>`
          : ""
      }
      ${toast}
    </div>`;
}
