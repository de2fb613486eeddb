// Moderator rule playground: edit a ruleset document against a scratch
// community, see validation issues inline, and watch a grid of sample
// drafts x rules refresh after every applied edit. Verdicts come from
// the service; the edited document only supplies the action labels.
//
// The evaluator id must belong to a treated user (control users get
// empty guidance by design); the wiring code probes /assignment to
// find one.

import { RulesetRejected, ServiceClient } from "./api.js";
import type { RulesetDocument, RulesetIssue } from "./types.js";

export type CellState = "fired" | "quiet";

export interface SampleDraft {
  title: string;
  body: string;
}

export interface GridRow {
  draft: SampleDraft;
  blocked: boolean;
  messages: string[];
  cells: CellState[]; // one per rule, in document order
}

export interface PlaygroundView {
  community: string;
  documentText: string;
  version: number | null;
  issues: RulesetIssue[];
  parseError: string | null;
  ruleNames: string[];
  ruleActions: string[]; // block | flag | message, from the document
  samples: SampleDraft[];
  grid: GridRow[];
  busy: boolean;
}

export const DEFAULT_SAMPLES: SampleDraft[] = [
  { title: "Why is the sky blue", body: "short q" },
  { title: "Why is the sky blue?", body: "a question with the mark" },
  { title: "check www.example.com please", body: "link drop" },
  { title: "", body: "an empty title draft" },
  { title: "wifi keeps dropping", body: "tech support bait" },
];

export function actionLabel(rule: RulesetDocument["rules"][number]): string {
  if (rule.intervention.block_submission) return "block";
  if (rule.intervention.flag_for_review) return "flag";
  return "message";
}

export class Playground {
  private view: PlaygroundView;
  private onChange: (view: PlaygroundView) => void;
  private evaluatorId: string;

  constructor(
    private client: ServiceClient,
    options: {
      community?: string;
      evaluatorId?: string;
      samples?: SampleDraft[];
      onChange?: (view: PlaygroundView) => void;
    } = {},
  ) {
    this.onChange = options.onChange ?? (() => {});
    this.evaluatorId = options.evaluatorId ?? "playground-evaluator";
    this.view = {
      community: options.community ?? "playground",
      documentText: "",
      version: null,
      issues: [],
      parseError: null,
      ruleNames: [],
      ruleActions: [],
      samples: options.samples ?? DEFAULT_SAMPLES,
      grid: [],
      busy: false,
    };
  }

  get state(): PlaygroundView {
    return this.view;
  }

  private publish(changes: Partial<PlaygroundView>): void {
    this.view = { ...this.view, ...changes };
    this.onChange(this.view);
  }

  setDocumentText(text: string): void {
    this.publish({ documentText: text });
  }

  /** Parse, upload, and (when accepted) refresh the verdict grid. */
  async apply(): Promise<boolean> {
    let document: RulesetDocument;
    try {
      document = JSON.parse(this.view.documentText) as RulesetDocument;
    } catch (error) {
      this.publish({ parseError: `not valid JSON: ${String(error)}`, issues: [] });
      return false;
    }
    delete document.community_id;
    delete document.version;
    this.publish({ parseError: null, busy: true });
    try {
      const accepted = await this.client.putRuleset(this.view.community, document);
      const rules = document.rules ?? [];
      this.publish({
        version: accepted.version,
        issues: [],
        ruleNames: rules.map((rule) => rule.name),
        ruleActions: rules.map(actionLabel),
      });
      await this.refreshGrid();
      return true;
    } catch (error) {
      if (error instanceof RulesetRejected) {
        // Inline errors stay attached to the offending rules.
        this.publish({ issues: error.issues });
        return false;
      }
      this.publish({ issues: [{ rule_name: null, reason: String(error) }] });
      return false;
    } finally {
      this.publish({ busy: false });
    }
  }

  issuesFor(ruleName: string): RulesetIssue[] {
    return this.view.issues.filter((issue) => issue.rule_name === ruleName);
  }

  async refreshGrid(): Promise<void> {
    const { community, samples, ruleNames } = this.view;
    const grid: GridRow[] = [];
    for (const draft of samples) {
      const response = await this.client.evaluate(
        community,
        this.evaluatorId,
        draft.title,
        draft.body,
        "OnSubmit",
      );
      const firedNames = new Set(response.guidance.fired.map((f) => f.rule_name));
      grid.push({
        draft,
        blocked: response.guidance.submission_blocked,
        messages: response.guidance.messages,
        cells: ruleNames.map((name) => (firedNames.has(name) ? "fired" : "quiet")),
      });
    }
    this.publish({ grid });
  }
}
