import { ApiError, Client } from "./api.js";
import { renderAnswer, renderExplanation, renderMap } from "./render.js";
import type { MapView, Preference, Snapshot } from "./types.js";

interface Option {
  value: string;
  label: string;
}

// Drop-down options mirror the preference module's variants; labels use
// the study questionnaire wording.
const OBJECTIVE_OPTIONS: Option[] = [
  { value: "shortest", label: "Shortest Path" },
  { value: "safest", label: "Safest Path" },
  { value: "combined", label: "Shortest and Safest Path" },
];
const LOCALITY_OPTIONS: Option[] = [
  { value: "global", label: "Global" },
  { value: "only:corridor", label: "Only Highways" },
  { value: "only:crowded", label: "Only Alleyways" },
  { value: "segment:landmark:destination", label: "Segment (landmark to destination)" },
  { value: "position", label: "Single Position" },
];
const SPECIFICITY_OPTIONS: Option[] = [
  { value: "every", label: "All Information" },
  { value: "critical", label: "Important Information" },
];
const CORPUS_OPTIONS: Option[] = [
  { value: "concrete", label: "Lefts and Rights" },
  { value: "high_level", label: "Landmarks" },
];

export interface AppOptions {
  apiBase?: string;
  mapId?: string;
}

export class App {
  readonly client: Client;
  readonly mapId: string;
  session: Snapshot | null = null;
  map: MapView | null = null;

  private pending = false;
  private chain: Promise<void> = Promise.resolve();

  private readonly badge = document.createElement("span");
  private readonly mapHost = document.createElement("section");
  private readonly form = document.createElement("form");
  private readonly fields = document.createElement("fieldset");
  private readonly submitButton = document.createElement("button");
  private readonly explanationHost = document.createElement("section");
  private readonly dialogHost = document.createElement("div");
  private readonly toastHost = document.createElement("div");
  private readonly selects = new Map<string, HTMLSelectElement>();
  private readonly positionInput = document.createElement("input");

  constructor(
    private readonly root: HTMLElement,
    options: AppOptions = {},
  ) {
    this.client = new Client(options.apiBase ?? "/v1");
    this.mapId = options.mapId ?? "paper-5x5";
  }

  /** Fetch the map and draw the initial screen. */
  async mount(): Promise<void> {
    this.root.replaceChildren();
    this.root.className = "app";

    const header = document.createElement("header");
    const title = document.createElement("h1");
    title.textContent = "Robot route explainer";
    this.badge.className = "badge";
    this.badge.textContent = "no session";
    header.append(title, this.badge);

    this.mapHost.className = "map-host";
    this.explanationHost.className = "explanation-host";
    this.dialogHost.className = "dialog-host";
    this.toastHost.className = "toast-host";
    this.buildForm();

    this.root.append(header, this.mapHost, this.form, this.explanationHost, this.dialogHost, this.toastHost);

    this.map = await this.client.getMap(this.mapId);
    this.renderMapPane();
  }

  /** Resolves once every queued operation has finished. */
  async settle(): Promise<void> {
    let previous;
    do {
      previous = this.chain;
      await previous;
    } while (previous !== this.chain);
  }

  preferenceFromForm(): Preference {
    const locality =
      this.selects.get("locality")!.value === "position"
        ? `position:${this.positionInput.value || "0"}`
        : this.selects.get("locality")!.value;
    return {
      version: "v1",
      objective: this.selects.get("objective")!.value,
      locality,
      specificity: this.selects.get("specificity")!.value,
      corpus: this.selects.get("corpus")!.value,
    };
  }

  populateForm(preference: Preference): void {
    this.selects.get("objective")!.value = preference.objective;
    const locality = this.selects.get("locality")!;
    if (preference.locality.startsWith("position:")) {
      locality.value = "position";
      this.positionInput.value = preference.locality.split(":")[1] ?? "";
    } else {
      if (![...locality.options].some((option) => option.value === preference.locality)) {
        const extra = document.createElement("option");
        extra.value = preference.locality;
        extra.textContent = preference.locality;
        locality.appendChild(extra);
      }
      locality.value = preference.locality;
    }
    this.positionInput.disabled = locality.value !== "position";
    this.selects.get("specificity")!.value = preference.specificity;
    this.selects.get("corpus")!.value = preference.corpus;
  }

  // -- internals -----------------------------------------------------

  private buildForm(): void {
    this.form.className = "preference-form";
    this.fields.className = "preference-fields";

    const addSelect = (name: string, label: string, options: Option[]) => {
      const wrapper = document.createElement("label");
      wrapper.className = `field field-${name}`;
      const caption = document.createElement("span");
      caption.textContent = label;
      const select = document.createElement("select");
      select.name = name;
      for (const option of options) {
        const element = document.createElement("option");
        element.value = option.value;
        element.textContent = option.label;
        select.appendChild(element);
      }
      wrapper.append(caption, select);
      this.fields.appendChild(wrapper);
      this.selects.set(name, select);
    };

    addSelect("objective", "Objective", OBJECTIVE_OPTIONS);
    addSelect("locality", "Locality", LOCALITY_OPTIONS);

    this.positionInput.type = "number";
    this.positionInput.name = "position";
    this.positionInput.min = "0";
    this.positionInput.placeholder = "cell";
    this.positionInput.disabled = true;
    this.positionInput.className = "position-input";
    this.fields.appendChild(this.positionInput);
    this.selects.get("locality")!.addEventListener("change", () => {
      this.positionInput.disabled = this.selects.get("locality")!.value !== "position";
    });

    addSelect("specificity", "Specificity", SPECIFICITY_OPTIONS);
    addSelect("corpus", "Corpus", CORPUS_OPTIONS);

    this.submitButton.type = "submit";
    this.submitButton.className = "submit";
    this.submitButton.textContent = "Plan & explain";
    this.fields.appendChild(this.submitButton);
    this.form.appendChild(this.fields);

    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      this.run(() => this.submitPreference());
    });
  }

  /** One in-flight request per session: queue and disable while busy. */
  private run(task: () => Promise<void>): Promise<void> {
    const execute = async () => {
      this.setPending(true);
      try {
        await task();
      } catch (error) {
        this.reportError(error, task);
      } finally {
        this.setPending(false);
      }
    };
    this.chain = this.chain.then(execute);
    return this.chain;
  }

  private finalized(): boolean {
    return this.session?.state === "finalized";
  }

  private setPending(pending: boolean): void {
    this.pending = pending;
    this.refreshControls();
  }

  private refreshControls(): void {
    // Preference controls lock for good once finalized; sentences stay
    // clickable so a stale view surfaces the server's WrongState.
    this.fields.disabled = this.pending || this.finalized();
    this.root
      .querySelectorAll<HTMLButtonElement>("button.sentence, .dialog button")
      .forEach((button) => {
        button.disabled = this.pending;
      });
  }

  private async submitPreference(): Promise<void> {
    const preference = this.preferenceFromForm();
    if (this.session === null) {
      this.session = await this.client.createSession(this.mapId, preference);
      this.renderSnapshot();
      return;
    }
    const response = await this.client.submitPreference(this.session.id, preference);
    this.openDialog(response.conflict, response.prompt);
  }

  private async reply(answer: "yes" | "no"): Promise<void> {
    if (!this.session) {
      return;
    }
    this.session = await this.client.confirm(this.session.id, answer);
    this.closeDialog();
    this.renderSnapshot();
  }

  private async ask(state: number, action: string, host: HTMLLIElement): Promise<void> {
    if (!this.session) {
      return;
    }
    const response = await this.client.ask(this.session.id, state, action);
    renderAnswer(host, response.question, response.answer);
  }

  private renderMapPane(): void {
    if (!this.map) {
      return;
    }
    const source = this.session?.map ?? this.map;
    this.mapHost.replaceChildren(renderMap(source, this.session?.route ?? null));
  }

  private renderSnapshot(): void {
    if (!this.session) {
      return;
    }
    this.badge.textContent = this.session.state;
    this.badge.dataset.state = this.session.state;
    this.renderMapPane();
    if (this.session.preference) {
      this.populateForm(this.session.preference);
    }
    this.submitButton.textContent = "Update preferences";
    this.explanationHost.replaceChildren();
    if (this.session.explanation) {
      const heading = document.createElement("h2");
      heading.textContent = "Explanation";
      const metrics = this.session.metrics;
      const caption = document.createElement("p");
      caption.className = "metrics";
      if (metrics) {
        caption.textContent = `${metrics.moves} moves, ${metrics.crowdedEntries} crowded entries, ${this.session.updateCount} preference updates`;
      }
      this.explanationHost.append(
        heading,
        caption,
        renderExplanation(this.session.explanation, {
          onAsk: (state, action, host) => this.run(() => this.ask(state, action, host)),
          onHover: (state, entered) => this.highlightCell(state, entered),
        }),
      );
    }
    this.refreshControls();
  }

  private highlightCell(state: number, entered: boolean): void {
    const cell = this.mapHost.querySelector(`[data-cell="${state}"]`);
    cell?.classList.toggle("highlight", entered);
  }

  private openDialog(kind: "none" | "soft" | "hard", prompt: string): void {
    const dialog = document.createElement("div");
    dialog.className = "dialog";
    dialog.dataset.kind = kind;
    const text = document.createElement("p");
    text.className = "dialog-prompt";
    text.textContent = prompt;
    const yes = document.createElement("button");
    yes.type = "button";
    yes.className = "dialog-yes";
    yes.textContent = "Yes";
    yes.addEventListener("click", () => this.run(() => this.reply("yes")));
    const no = document.createElement("button");
    no.type = "button";
    no.className = "dialog-no";
    no.textContent = "No";
    no.addEventListener("click", () => this.run(() => this.reply("no")));
    const dismiss = document.createElement("button");
    dismiss.type = "button";
    dismiss.className = "dialog-dismiss";
    dismiss.textContent = "×";
    // Dismissing sends no reply; the session stays in its awaiting state.
    dismiss.addEventListener("click", () => this.closeDialog());
    dialog.append(text, yes, no, dismiss);
    this.dialogHost.replaceChildren(dialog);
  }

  private closeDialog(): void {
    this.dialogHost.replaceChildren();
  }

  private reportError(error: unknown, task: () => Promise<void>): void {
    const toast = document.createElement("div");
    toast.className = "toast";
    if (error instanceof ApiError) {
      toast.dataset.code = error.body.code;
      toast.textContent = `${error.body.code}: ${error.body.message}`;
    } else {
      toast.textContent = "Network error.";
      const retry = document.createElement("button");
      retry.type = "button";
      retry.className = "retry";
      retry.textContent = "Retry";
      retry.addEventListener("click", () => {
        toast.remove();
        this.run(task);
      });
      toast.appendChild(retry);
    }
    const close = document.createElement("button");
    close.type = "button";
    close.className = "toast-close";
    close.textContent = "×";
    close.addEventListener("click", () => toast.remove());
    toast.appendChild(close);
    this.toastHost.appendChild(toast);
  }
}

export async function mountApp(root: HTMLElement, options: AppOptions = {}): Promise<App> {
  const app = new App(root, options);
  await app.mount();
  return app;
}
