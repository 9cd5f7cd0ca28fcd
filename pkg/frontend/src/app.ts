/** Single-page annotation UI: annotator task screen and expert dispute queue.
 *
 * All state lives server-side; the page can be reloaded at any point and
 * resumes where the user left off. Keyboard shortcuts: 1-9 select a
 * candidate, 0 selects NIL, Enter submits.
 */

import {
  ApiClient,
  ApiError,
  CandidateCard,
  Dispute,
  NIL,
  NilPattern,
  Progress,
  Task,
} from "./api.js";

export type Role = "annotator" | "expert";

const PATTERNS: { value: NilPattern; label: string }[] = [
  { value: "MissingEntity", label: "Missing entity (referent exists, not listed)" },
  { value: "NonEntityPhrase", label: "Non-entity phrase (not an entity at all)" },
];

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

export function renderContext(left: string[], mention: string[], right: string[]): HTMLElement {
  const p = el("p", "context");
  p.append(document.createTextNode(left.join(" ") + " "));
  const mark = el("mark", "mention", mention.join(" "));
  p.append(mark);
  p.append(document.createTextNode(" " + right.join(" ")));
  return p;
}

function progressLine(progress: Progress): string {
  return (
    `pending ${progress.pending} · agreed ${progress.agreed} · ` +
    `disputed ${progress.disputed} · adjudicated ${progress.adjudicated}`
  );
}

export class App {
  role: Role | null = null;
  userId: string | null = null;
  task: Task | null = null;
  selection: string | null = null;
  pattern: NilPattern | null = null;
  busy = false;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
    private storage: Storage = window.localStorage,
  ) {
    document.addEventListener("keydown", (event) => this.handleKey(event));
  }

  async start(): Promise<void> {
    const role = this.storage.getItem("nilink.role") as Role | null;
    const userId = this.storage.getItem("nilink.user");
    if (role && userId) {
      await this.login(role, userId);
    } else {
      this.renderLogin();
    }
  }

  async login(role: Role, userId: string): Promise<void> {
    this.role = role;
    this.userId = userId;
    this.storage.setItem("nilink.role", role);
    this.storage.setItem("nilink.user", userId);
    if (role === "annotator") {
      await this.loadTask();
    } else {
      await this.loadDisputes();
    }
  }

  logout(): void {
    this.storage.removeItem("nilink.role");
    this.storage.removeItem("nilink.user");
    this.role = null;
    this.userId = null;
    this.renderLogin();
  }

  // -- views ---------------------------------------------------------------

  private header(progress?: Progress): HTMLElement {
    const head = el("header");
    head.append(el("strong", undefined, "nilink annotation"));
    if (this.userId) {
      head.append(el("span", "user", ` ${this.role}: ${this.userId}`));
      const out = el("button", "logout", "switch user");
      out.addEventListener("click", () => this.logout());
      head.append(out);
    }
    if (progress) {
      head.append(el("span", "progress", progressLine(progress)));
    }
    return head;
  }

  private renderLogin(): void {
    this.root.replaceChildren(this.header());
    const form = el("div", "login");
    form.append(el("h2", undefined, "Sign in"));
    const idInput = el("input");
    idInput.id = "user-id";
    idInput.placeholder = "your id";
    const roleSelect = el("select");
    roleSelect.id = "role";
    for (const role of ["annotator", "expert"] as Role[]) {
      const opt = el("option", undefined, role);
      opt.value = role;
      roleSelect.append(opt);
    }
    const go = el("button", "primary", "start");
    go.addEventListener("click", () => {
      if (idInput.value.trim()) {
        void this.login(roleSelect.value as Role, idInput.value.trim());
      }
    });
    form.append(idInput, roleSelect, go);
    this.root.append(form);
  }

  private banner(message: string, retry: () => Promise<void>): void {
    const bar = el("div", "banner");
    bar.append(el("span", undefined, message));
    const button = el("button", "retry", "retry");
    button.addEventListener("click", () => {
      bar.remove();
      void retry();
    });
    bar.append(button);
    this.root.prepend(bar);
  }

  private inlineError(message: string): void {
    const slot = this.root.querySelector(".error-inline");
    if (slot) slot.textContent = message;
  }

  // -- annotator flow --------------------------------------------------------

  async loadTask(): Promise<void> {
    try {
      this.task = await this.client.nextTask(this.userId!);
    } catch (error) {
      this.banner(`could not reach the service: ${(error as Error).message}`, () =>
        this.loadTask(),
      );
      return;
    }
    this.selection = null;
    this.pattern = null;
    this.busy = false;
    if (this.task.done) {
      this.renderDone();
    } else {
      this.renderTask();
    }
  }

  private renderDone(): void {
    this.root.replaceChildren(this.header(this.task?.progress));
    const done = el("div", "done");
    done.append(el("h2", undefined, "All done"));
    done.append(el("p", undefined, "No tasks remain for you in this session."));
    this.root.append(done);
  }

  private renderTask(): void {
    const task = this.task!;
    this.root.replaceChildren(this.header(task.progress));
    const main = el("div", "task");
    main.append(renderContext(task.left!, task.mention!, task.right!));

    const list = el("div", "candidates");
    task.candidates!.forEach((card, index) => {
      list.append(this.candidateCard(card, index));
    });
    list.append(this.nilCard(task.candidates!.length));
    main.append(list);

    main.append(el("div", "error-inline"));
    const submit = el("button", "primary submit", "submit");
    submit.disabled = true;
    submit.addEventListener("click", () => void this.submit());
    main.append(submit);
    this.root.append(main);
    this.refreshControls();
  }

  private candidateCard(card: CandidateCard, index: number): HTMLElement {
    const box = el("div", "candidate");
    box.dataset.id = card.id;
    const pick = el("button", "pick", `${index + 1}. ${card.title}`);
    pick.addEventListener("click", () => this.select(card.id));
    box.append(pick);
    box.append(el("p", "description", card.description));
    if (card.url) {
      const link = el("a", "kb-link", "open in knowledge base");
      link.href = card.url;
      link.target = "_blank";
      link.rel = "noopener";
      box.append(link);
    }
    return box;
  }

  private nilCard(shortcut: number): HTMLElement {
    const box = el("div", "candidate nil");
    box.dataset.id = NIL;
    const pick = el("button", "pick", "0. NIL — no candidate matches");
    pick.addEventListener("click", () => this.select(NIL));
    box.append(pick);
    const patterns = el("div", "patterns");
    for (const { value, label } of PATTERNS) {
      const lab = el("label");
      const radio = el("input");
      radio.type = "radio";
      radio.name = "nil-pattern";
      radio.value = value;
      radio.addEventListener("change", () => {
        this.pattern = value;
        this.refreshControls();
      });
      lab.append(radio, document.createTextNode(" " + label));
      patterns.append(lab);
    }
    box.append(patterns);
    void shortcut;
    return box;
  }

  select(id: string): void {
    this.selection = id;
    if (id !== NIL) this.pattern = null;
    this.refreshControls();
  }

  /** Exactly one selectable answer at a time; NIL needs a pattern before
   * the submit button unlocks (mirrors the server-side validation). */
  private refreshControls(): void {
    for (const box of this.root.querySelectorAll<HTMLElement>(".candidate")) {
      box.classList.toggle("selected", box.dataset.id === this.selection);
    }
    const patterns = this.root.querySelector<HTMLElement>(".patterns");
    if (patterns) patterns.classList.toggle("visible", this.selection === NIL);
    const submit = this.root.querySelector<HTMLButtonElement>("button.submit");
    if (submit) submit.disabled = !this.canSubmit();
  }

  canSubmit(): boolean {
    if (this.busy || !this.selection) return false;
    if (this.selection === NIL && !this.pattern) return false;
    return true;
  }

  async submit(): Promise<void> {
    if (!this.canSubmit()) return;
    const task = this.task!;
    this.busy = true;
    this.refreshControls();
    try {
      await this.client.submitAnnotation(
        task.entry_id!,
        this.userId!,
        this.selection!,
        this.pattern ?? undefined,
      );
    } catch (error) {
      this.busy = false;
      this.refreshControls();
      if (error instanceof ApiError && error.status > 0) {
        this.inlineError(error.message);
      } else {
        this.banner(`submit failed: ${(error as Error).message}`, () => this.submit());
      }
      return;
    }
    await this.loadTask();
  }

  // -- expert flow -----------------------------------------------------------

  async loadDisputes(notice?: string): Promise<void> {
    let disputes: Dispute[];
    let progress: Progress;
    try {
      [disputes, progress] = await Promise.all([
        this.client.disputes(),
        this.client.progress(),
      ]);
    } catch (error) {
      this.banner(`could not reach the service: ${(error as Error).message}`, () =>
        this.loadDisputes(),
      );
      return;
    }
    this.root.replaceChildren(this.header(progress));
    if (notice) this.root.append(el("div", "notice", notice));
    const queue = el("div", "queue");
    queue.append(el("h2", undefined, `Disputes (${disputes.length})`));
    if (disputes.length === 0) {
      queue.append(el("p", "empty", "No disputes — nothing to adjudicate."));
    }
    for (const dispute of disputes) {
      queue.append(this.disputeCard(dispute));
    }
    this.root.append(queue);
  }

  private disputeCard(dispute: Dispute): HTMLElement {
    const box = el("div", "dispute");
    box.dataset.id = dispute.entry_id;
    box.append(renderContext(dispute.left, dispute.mention, dispute.right));

    const table = el("table", "choices");
    const head = el("tr");
    const body = el("tr");
    for (const choice of dispute.choices) {
      head.append(el("th", undefined, choice.annotator_id));
      const label = choice.choice === NIL ? `NIL (${choice.nil_pattern})` : choice.choice;
      body.append(el("td", undefined, label));
    }
    table.append(head, body);
    box.append(table);

    const controls = el("div", "resolve");
    const pickSelect = el("select", "resolution");
    for (const card of dispute.candidates) {
      const opt = el("option", undefined, card.title);
      opt.value = card.id;
      pickSelect.append(opt);
    }
    const nilOpt = el("option", undefined, "NIL");
    nilOpt.value = NIL;
    pickSelect.append(nilOpt);

    const patternSelect = el("select", "resolution-pattern");
    for (const { value, label } of PATTERNS) {
      const opt = el("option", undefined, label);
      opt.value = value;
      patternSelect.append(opt);
    }
    patternSelect.hidden = true;
    pickSelect.addEventListener("change", () => {
      patternSelect.hidden = pickSelect.value !== NIL;
    });

    const resolve = el("button", "primary", "resolve");
    resolve.addEventListener("click", () => {
      const pattern = pickSelect.value === NIL
        ? (patternSelect.value as NilPattern)
        : undefined;
      void this.resolve(dispute.entry_id, pickSelect.value, pattern);
    });
    controls.append(pickSelect, patternSelect, resolve);
    box.append(controls);
    return box;
  }

  async resolve(entryId: string, choice: string, pattern?: NilPattern): Promise<void> {
    try {
      await this.client.adjudicate(entryId, this.userId!, choice, pattern);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        await this.loadDisputes("that entry was already resolved — queue refreshed");
        return;
      }
      this.banner(`resolution failed: ${(error as Error).message}`, () =>
        this.resolve(entryId, choice, pattern),
      );
      return;
    }
    await this.loadDisputes();
  }

  // -- keyboard ---------------------------------------------------------------

  handleKey(event: KeyboardEvent): void {
    if (this.role !== "annotator" || !this.task || this.task.done) return;
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "SELECT")) return;
    if (event.key === "0") {
      this.select(NIL);
    } else if (event.key >= "1" && event.key <= "9") {
      const index = Number(event.key) - 1;
      const cards = this.task.candidates!;
      if (index < cards.length) this.select(cards[index].id);
    } else if (event.key === "Enter") {
      void this.submit();
    }
  }
}
