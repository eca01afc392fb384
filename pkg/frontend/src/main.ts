// Page bootstrap: tab switching, entry forms, and the advisory countdown
// tick. Offered study topics come from the inline JSON block in index.html
// and must match the study configuration of the run being served.

import { Client, SessionPayload } from "./api.js";
import { JudgingMachine } from "./judging.js";
import { StudyMachine, TopicOption, formatClock } from "./study.js";
import { renderJudging, renderStudy } from "./dom.js";

const client = new Client("");

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

const tabs = { judge: el("tab-judge"), study: el("tab-study") };
const views = { judge: el("judge-view"), study: el("study-view") };

function showTab(name: keyof typeof tabs): void {
  for (const key of Object.keys(tabs) as (keyof typeof tabs)[]) {
    tabs[key].classList.toggle("active", key === name);
    views[key].hidden = key !== name;
  }
}
tabs.judge.addEventListener("click", () => showTab("judge"));
tabs.study.addEventListener("click", () => showTab("study"));

// -- pair judging ----------------------------------------------------------

const judgeRoot = el("judge-root");
let activeJudge: JudgingMachine | null = null;

el<HTMLFormElement>("judge-entry").addEventListener("submit", (event) => {
  event.preventDefault();
  const name = el<HTMLInputElement>("annotator-name").value.trim();
  if (!name) return;
  // restarting replaces the machine; a superseded one stops rendering
  const machine: JudgingMachine = new JudgingMachine(client, name, () => {
    if (machine === activeJudge) renderJudging(judgeRoot, machine);
  });
  activeJudge = machine;
  void machine.start();
});

// -- study session ---------------------------------------------------------

const SESSION_KEY = "study-session";
const studyRoot = el("study-root");
let activeStudy: StudyMachine | null = null;
let ticker: number | undefined;

function offeredTopics(): TopicOption[] {
  const node = document.getElementById("study-topics");
  if (!node?.textContent) return [];
  try {
    return JSON.parse(node.textContent) as TopicOption[];
  } catch {
    return [];
  }
}

function savedSession(participant: string): SessionPayload | null {
  try {
    const raw = sessionStorage.getItem(SESSION_KEY);
    if (!raw) return null;
    const session = JSON.parse(raw) as SessionPayload;
    return session.participant === participant ? session : null;
  } catch {
    return null;
  }
}

el<HTMLFormElement>("study-entry").addEventListener("submit", (event) => {
  event.preventDefault();
  const name = el<HTMLInputElement>("participant-name").value.trim();
  if (!name) return;
  const offered = offeredTopics();
  if (offered.length === 0) {
    studyRoot.innerHTML = `<p class="toast">No study topics configured for this page.</p>`;
    return;
  }

  const machine: StudyMachine = new StudyMachine(client, {
    participant: name,
    offered,
    onChange: () => {
      if (machine === activeStudy) renderStudy(studyRoot, machine);
    },
    persist: (session) => {
      try {
        sessionStorage.setItem(SESSION_KEY, JSON.stringify(session));
      } catch {
        // without storage the session still runs; it just won't survive a reload
      }
    },
  });

  activeStudy = machine;
  const saved = savedSession(name);
  if (saved) {
    machine.rehydrate(saved);
  } else {
    renderStudy(studyRoot, machine);
  }

  if (ticker !== undefined) clearInterval(ticker);
  let wasLocked = machine.editorLocked();
  ticker = window.setInterval(() => {
    if (machine !== activeStudy || machine.state.phase !== "working") return;
    const clock = studyRoot.querySelector("[data-clock]");
    if (clock) clock.textContent = formatClock(machine.remainingMs());
    const locked = machine.editorLocked();
    if (locked && !wasLocked) {
      // window just closed: keep whatever was typed, then go read-only
      const editor = studyRoot.querySelector<HTMLTextAreaElement>("[data-editor]");
      if (editor) machine.editDraft(editor.value);
      renderStudy(studyRoot, machine);
    }
    wasLocked = locked;
  }, 500);
});
