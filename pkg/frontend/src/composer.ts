// Composer state machine: a draft, its latest guidance, and the submit
// gate. Responses are sequence-numbered so an out-of-order network
// completion can never overwrite newer guidance, and the submit button
// is enabled exactly when the latest applied response does not block.

import { ServiceClient } from "./api.js";
import { Debouncer } from "./debounce.js";
import { emptyGuidance, type Guidance, type SubmitResponse } from "./types.js";

export interface ComposerView {
  community: string;
  userId: string;
  title: string;
  body: string;
  guidance: Guidance;
  arm: string | null;
  rulesetVersion: number | null;
  submitEnabled: boolean;
  warning: string | null;
  submitting: boolean;
  lastSubmit: SubmitResponse | null;
}

export interface ComposerOptions {
  community: string;
  userId: string;
  debounceMs?: number;
  onChange?: (view: ComposerView) => void;
}

export class Composer {
  private client: ServiceClient;
  private debouncer: Debouncer;
  private requestSeq = 0;
  private appliedSeq = 0;
  private view: ComposerView;
  private onChange: (view: ComposerView) => void;

  constructor(client: ServiceClient, options: ComposerOptions) {
    this.client = client;
    this.debouncer = new Debouncer(options.debounceMs ?? 250);
    this.onChange = options.onChange ?? (() => {});
    this.view = {
      community: options.community,
      userId: options.userId,
      title: "",
      body: "",
      guidance: emptyGuidance("OnEdit"),
      arm: null,
      rulesetVersion: null,
      submitEnabled: true,
      warning: null,
      submitting: false,
      lastSubmit: null,
    };
  }

  get state(): ComposerView {
    return this.view;
  }

  private publish(changes: Partial<ComposerView>): void {
    this.view = { ...this.view, ...changes };
    this.onChange(this.view);
  }

  setUser(userId: string): void {
    // Draft text survives an arm/user switch; guidance resets until
    // the next evaluation arrives.
    this.publish({
      userId,
      guidance: emptyGuidance("OnEdit"),
      arm: null,
      submitEnabled: true,
      lastSubmit: null,
    });
    this.debouncer.flush(() => void this.evaluateNow("OnEdit"));
  }

  /** Called on every keystroke; evaluation is debounced. */
  edit(title: string, body: string): void {
    this.publish({ title, body });
    this.debouncer.schedule(() => void this.evaluateNow("OnEdit"));
  }

  async evaluateNow(event: "OnEdit" | "OnSubmit"): Promise<void> {
    const seq = ++this.requestSeq;
    const { community, userId, title, body } = this.view;
    let response;
    try {
      response = await this.client.evaluate(community, userId, title, body, event);
    } catch (error) {
      if (seq > this.appliedSeq) {
        // Network trouble never loses the draft; it only warns.
        this.publish({ warning: `evaluation unavailable: ${String(error)}` });
      }
      return;
    }
    if (seq <= this.appliedSeq) {
      return; // stale: a newer response already rendered
    }
    this.appliedSeq = seq;
    this.publish({
      guidance: response.guidance,
      arm: response.arm,
      rulesetVersion: response.ruleset_version,
      submitEnabled: !response.guidance.submission_blocked,
      warning: null,
    });
  }

  /**
   * Submit flow: a final OnSubmit evaluation runs first; only if it
   * does not block is the submission posted.
   */
  async submit(): Promise<SubmitResponse | null> {
    this.debouncer.cancel();
    this.publish({ submitting: true });
    try {
      await this.evaluateNow("OnSubmit");
      if (!this.view.submitEnabled) {
        return null;
      }
      const { community, userId, title, body } = this.view;
      const response = await this.client.submit(community, userId, title, body);
      this.publish({
        lastSubmit: response,
        guidance: response.guidance,
        arm: response.arm,
        rulesetVersion: response.ruleset_version,
        submitEnabled: !response.guidance.submission_blocked,
      });
      return response;
    } catch (error) {
      this.publish({ warning: `submit failed: ${String(error)}` });
      return null;
    } finally {
      this.publish({ submitting: false });
    }
  }
}
