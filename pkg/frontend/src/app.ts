// Dashboard rendering: code + error details on the left, the conversation
// on the right. Everything is built with DOM nodes and textContent so the
// model output can never inject markup.

import { ApiClient, Diagnostic, SessionView, Turn } from "./api";

export interface MountOptions {
  token: string;
  readOnly: boolean;
  api: ApiClient;
}

export interface DashboardHandle {
  view: SessionView;
  refresh(): Promise<void>;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function errorLines(diagnostics: Diagnostic[], path: string): Set<number> {
  const lines = new Set<number>();
  for (const d of diagnostics) {
    if (d.file === path || path.endsWith(d.file) || d.file.endsWith(path)) {
      lines.add(d.line);
    }
  }
  return lines;
}

function renderSourcePane(view: SessionView): HTMLElement {
  const pane = el("section", "pane pane-code");
  for (const source of view.source_files) {
    pane.appendChild(el("h2", "source-path", source.path));
    const pre = el("pre", "source-listing");
    const highlight = errorLines(view.diagnostics, source.path);
    const lines = source.text.split("\n");
    lines.forEach((line, index) => {
      const lineNo = index + 1;
      const row = el("div", highlight.has(lineNo) ? "line highlight" : "line");
      row.appendChild(el("span", "line-no", String(lineNo)));
      row.appendChild(el("span", "line-text", line));
      pre.appendChild(row);
    });
    pane.appendChild(pre);
  }
  pane.appendChild(renderErrorDetails(view));
  return pane;
}

function renderErrorDetails(view: SessionView): HTMLElement {
  const details = el("div", "error-details");
  if (view.kind === "run_time") {
    details.appendChild(renderRuntimeTabs(view));
  } else {
    const block = el("div", "error-message");
    for (const d of view.diagnostics) {
      block.appendChild(el("pre", `diagnostic ${d.severity}`, d.raw));
    }
    details.appendChild(block);
  }
  return details;
}

// Run-time sessions spread the error, the call stack and the variable
// values over tabs so the detail can be explored piece by piece.
function renderRuntimeTabs(view: SessionView): HTMLElement {
  const wrap = el("div", "tabs");
  const bar = el("div", "tab-bar");
  const panels: Record<string, HTMLElement> = {
    Error: el("div", "tab-panel tab-error"),
    Stack: el("div", "tab-panel tab-stack"),
    Variables: el("div", "tab-panel tab-variables"),
  };

  const errorPanel = panels["Error"];
  if (view.runtime_signal) {
    errorPanel.appendChild(el("p", "runtime-signal", `Terminated by: ${view.runtime_signal}`));
  }
  for (const d of view.diagnostics) {
    errorPanel.appendChild(el("pre", `diagnostic ${d.severity}`, d.raw));
  }

  const stackPanel = panels["Stack"];
  const stackList = el("ol", "stack-frames");
  for (const frame of view.stack) {
    stackList.appendChild(
      el("li", "frame", `${frame.function_name} at ${frame.file}:${frame.line}`),
    );
  }
  stackPanel.appendChild(stackList);

  const varsPanel = panels["Variables"];
  for (const frame of view.stack) {
    if (!frame.locals.length) continue;
    varsPanel.appendChild(el("h3", "frame-name", frame.function_name));
    const table = el("table", "bindings");
    for (const binding of frame.locals) {
      const row = el("tr", "binding");
      row.appendChild(el("td", "binding-name", binding.name));
      row.appendChild(el("td", "binding-value", binding.value_repr));
      row.appendChild(el("td", "binding-type", binding.type_name));
      table.appendChild(row);
    }
    varsPanel.appendChild(table);
  }

  const names = Object.keys(panels);
  names.forEach((name, index) => {
    const button = el("button", index === 0 ? "tab active" : "tab", name);
    button.addEventListener("click", () => {
      bar.querySelectorAll(".tab").forEach((b) => b.classList.remove("active"));
      button.classList.add("active");
      names.forEach((n) => panels[n].classList.toggle("hidden", n !== name));
    });
    bar.appendChild(button);
    panels[name].classList.toggle("hidden", index !== 0);
  });

  wrap.appendChild(bar);
  names.forEach((name) => wrap.appendChild(panels[name]));
  return wrap;
}

function bubble(turn: Pick<Turn, "role" | "text">): HTMLElement {
  return el("div", `bubble ${turn.role}`, turn.text);
}

export async function mountDashboard(
  root: HTMLElement,
  opts: MountOptions,
): Promise<DashboardHandle> {
  let view: SessionView;
  try {
    view = await opts.api.getSession(opts.token);
  } catch (error) {
    root.replaceChildren(
      el("div", "not-found", "This session link is unknown or has expired."),
    );
    throw error;
  }

  const layout = el("div", "dashboard");
  const left = renderSourcePane(view);
  const right = el("section", "pane pane-chat");

  const banner = el("div", "banner-overuse hidden");
  banner.textContent =
    "You have been opening a lot of AI sessions in a short time. Remember " +
    "that AI assistance will not be available in the final exam.";
  right.appendChild(banner);

  const conversation = el("div", "conversation");
  right.appendChild(conversation);

  const shareRow = el("div", "share-row");
  const shareUrl = el("input", "share-url hidden") as HTMLInputElement;
  shareUrl.readOnly = true;

  const composer = el("form", "composer") as HTMLFormElement;
  const input = el("textarea", "composer-input") as HTMLTextAreaElement;
  input.placeholder = "Ask a follow-up question about this error";
  const send = el("button", "composer-send", "Send") as HTMLButtonElement;
  send.type = "submit";
  composer.appendChild(input);
  composer.appendChild(send);

  function syncBanner() {
    banner.classList.toggle("hidden", !view.overuse_warning);
  }

  function renderTurns() {
    conversation.replaceChildren();
    for (const turn of view.turns) {
      if (turn.status === "failed") continue; // replaced by the retry notice
      conversation.appendChild(bubble(turn));
    }
    if (view.explanation_pending) {
      const pending = el("div", "pending-notice");
      pending.appendChild(
        el("span", "pending-text", "The explanation is still pending."),
      );
      if (!opts.readOnly) pending.appendChild(retryButton());
      conversation.appendChild(pending);
    }
  }

  function retryButton(): HTMLElement {
    const button = el("button", "retry", "Retry");
    button.addEventListener("click", async (event) => {
      event.preventDefault();
      try {
        await opts.api.retry(opts.token);
        await refresh();
      } catch {
        // the notice stays; the student can try again
      }
    });
    return button;
  }

  async function refresh() {
    view = await opts.api.getSession(opts.token);
    renderTurns();
    syncBanner();
  }

  async function sendFollowup(text: string) {
    if (!text.trim()) return; // rejected client-side
    input.disabled = true;
    send.disabled = true;
    const optimistic = bubble({ role: "user", text });
    conversation.appendChild(optimistic);
    try {
      const reply = await opts.api.postMessage(opts.token, text);
      if (reply.status === "failed") throw new Error("generation failed");
      input.value = "";
      await refresh();
    } catch {
      optimistic.remove();
      const failure = el("div", "send-failed");
      failure.appendChild(el("span", "send-failed-text", "That message could not be sent."));
      const again = el("button", "retry-send", "Try again");
      again.addEventListener("click", (event) => {
        event.preventDefault();
        failure.remove();
        void sendFollowup(input.value);
      });
      failure.appendChild(again);
      conversation.appendChild(failure);
      // the student's text stays in the box for the retry
    } finally {
      input.disabled = false;
      send.disabled = false;
    }
  }

  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    void sendFollowup(input.value);
  });

  if (!opts.readOnly) {
    const shareButton = el("button", "share", "Create read-only link");
    shareButton.addEventListener("click", async (event) => {
      event.preventDefault();
      const result = await opts.api.createShare(opts.token);
      shareUrl.value = result.url;
      shareUrl.classList.remove("hidden");
      shareUrl.select?.();
    });
    shareRow.appendChild(shareButton);
    shareRow.appendChild(shareUrl);
    right.appendChild(shareRow);
    right.appendChild(composer); // the input box exists only for owners
  }

  renderTurns();
  syncBanner();
  layout.appendChild(left);
  layout.appendChild(right);
  root.replaceChildren(layout);

  return {
    get view() {
      return view;
    },
    refresh,
  };
}
