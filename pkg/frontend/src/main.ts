// DOM wiring. All behavior lives in Composer/Playground; this file
// only moves values between the page and the controllers.

import { ServiceClient, fetchTransport } from "./api.js";
import { Composer, type ComposerView } from "./composer.js";
import { Playground, type PlaygroundView } from "./playground.js";

const client = new ServiceClient(fetchTransport(""));

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function renderComposer(view: ComposerView): void {
  const banner = el<HTMLDivElement>("block-banner");
  banner.hidden = !view.guidance.submission_blocked;
  const messages = el<HTMLUListElement>("guidance-messages");
  messages.innerHTML = "";
  for (const message of view.guidance.messages) {
    const item = document.createElement("li");
    item.textContent = message;
    messages.appendChild(item);
  }
  el<HTMLButtonElement>("submit").disabled = !view.submitEnabled || view.submitting;
  el<HTMLSpanElement>("arm-indicator").textContent = view.arm ?? "unknown";
  const warning = el<HTMLDivElement>("warning-banner");
  warning.hidden = view.warning === null;
  warning.textContent = view.warning ?? "";
  const submitState = el<HTMLDivElement>("submit-result");
  if (view.lastSubmit?.accepted) {
    submitState.textContent = `posted as ${view.lastSubmit.post_id}`;
  }
}

function renderPlayground(view: PlaygroundView): void {
  el<HTMLSpanElement>("playground-version").textContent =
    view.version === null ? "not applied" : `version ${view.version}`;
  const errors = el<HTMLUListElement>("playground-errors");
  errors.innerHTML = "";
  if (view.parseError) {
    const item = document.createElement("li");
    item.textContent = view.parseError;
    errors.appendChild(item);
  }
  for (const issue of view.issues) {
    const item = document.createElement("li");
    item.textContent = `${issue.rule_name ?? "<document>"}: ${issue.reason}`;
    errors.appendChild(item);
  }
  const grid = el<HTMLTableElement>("verdict-grid");
  grid.innerHTML = "";
  const head = grid.insertRow();
  head.insertCell().textContent = "draft";
  head.insertCell().textContent = "verdict";
  view.ruleNames.forEach((name, index) => {
    head.insertCell().textContent = `${name} (${view.ruleActions[index]})`;
  });
  for (const row of view.grid) {
    const tr = grid.insertRow();
    tr.insertCell().textContent = row.draft.title || "(empty title)";
    tr.insertCell().textContent = row.blocked
      ? "block"
      : row.messages.length
        ? "message"
        : "allow";
    for (const cell of row.cells) {
      const td = tr.insertCell();
      td.textContent = cell === "fired" ? "x" : "";
      td.className = cell;
    }
  }
}

async function start(): Promise<void> {
  const community = "demo";
  const treatedUser = await client.findUserInArm("Treatment", "composer");
  const controlUser = await client.findUserInArm("Control", "composer");

  const composer = new Composer(client, {
    community,
    userId: treatedUser,
    onChange: renderComposer,
  });

  const title = el<HTMLInputElement>("title");
  const body = el<HTMLTextAreaElement>("body");
  const sync = () => composer.edit(title.value, body.value);
  title.addEventListener("input", sync);
  body.addEventListener("input", sync);
  el<HTMLButtonElement>("submit").addEventListener("click", () => void composer.submit());
  el<HTMLSelectElement>("arm-toggle").addEventListener("change", (event) => {
    const arm = (event.target as HTMLSelectElement).value;
    composer.setUser(arm === "Control" ? controlUser : treatedUser);
  });

  const playground = new Playground(client, {
    evaluatorId: await client.findUserInArm("Treatment", "playground"),
    onChange: renderPlayground,
  });
  const editor = el<HTMLTextAreaElement>("ruleset-editor");
  editor.addEventListener("input", () => playground.setDocumentText(editor.value));
  el<HTMLButtonElement>("apply-ruleset").addEventListener(
    "click",
    () => void playground.apply(),
  );
}

void start();
