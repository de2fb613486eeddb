// A scripted stand-in for the moderation service. It reproduces the
// service's observable behavior (the question-mark rule, control-arm
// invisibility, ruleset validation shapes) so controller logic can be
// tested without a network; all "evaluation" below is the test double
// acting as the server.

import type { HttpReply, Transport } from "../src/api.js";
import { emptyGuidance, type Guidance } from "../src/types.js";

export interface FakeOptions {
  armOf?: (userId: string) => string;
  latencyQueue?: Array<() => Promise<void>>;
}

export class FakeService {
  version = 0;
  rules: Array<{
    name: string;
    polarity: string;
    action: "block" | "message" | "flag";
    message?: string;
  }> = [];
  evaluateCalls = 0;
  submitCalls = 0;
  armOf: (userId: string) => string;
  pendingGates: Array<(value: void) => void> = [];
  gated = false;

  constructor(options: FakeOptions = {}) {
    this.armOf = options.armOf ?? (() => "Treatment");
  }

  /** When gated, each request waits until release() is called. */
  gate(): void {
    this.gated = true;
  }

  release(count = 1): void {
    for (let i = 0; i < count; i += 1) {
      const next = this.pendingGates.shift();
      if (next) next();
    }
  }

  private async maybeWait(): Promise<void> {
    if (!this.gated) return;
    await new Promise<void>((resolve) => this.pendingGates.push(resolve));
  }

  private guidanceFor(userId: string, title: string, event: string): Guidance {
    if (this.armOf(userId) === "Control") {
      return emptyGuidance(event);
    }
    const fired: Guidance["fired"] = [];
    const messages: string[] = [];
    const flags: string[] = [];
    let blocked = false;
    for (const rule of this.rules) {
      const matches = /\? *$/.test(title);
      const fires = rule.polarity === "Missing" ? !matches : matches;
      if (!fires) continue;
      fired.push({ rule_name: rule.name, part: "title" });
      if (rule.message && !messages.includes(rule.message)) messages.push(rule.message);
      if (rule.action === "block") blocked = true;
      if (rule.action === "flag") flags.push(rule.name);
    }
    return {
      fired,
      messages,
      submission_blocked: blocked,
      review_flags: flags,
      event,
    };
  }

  transport(): Transport {
    return async (method, path, payload): Promise<HttpReply> => {
      await this.maybeWait();
      if (method === "GET" && path.startsWith("/assignment/")) {
        const userId = path.split("/").pop()!;
        return { status: 200, body: { user_id: userId, arm: this.armOf(userId) } };
      }
      if (method === "PUT" && path.endsWith("/ruleset")) {
        const document = payload as {
          rules?: Array<{
            name?: string;
            condition?: { polarity?: string; pattern?: string };
            intervention?: {
              message?: string;
              block_submission?: boolean;
              flag_for_review?: boolean;
            };
          }>;
        };
        const issues: Array<{ rule_name: string | null; reason: string }> = [];
        for (const rule of document.rules ?? []) {
          const pattern = rule.condition?.pattern ?? "";
          if ((pattern.match(/\(/g) ?? []).length !== (pattern.match(/\)/g) ?? []).length) {
            issues.push({ rule_name: rule.name ?? null, reason: "regex does not compile" });
          }
        }
        if (issues.length) {
          return { status: 422, body: { detail: { errors: issues } } };
        }
        this.version += 1;
        this.rules = (document.rules ?? []).map((rule) => ({
          name: rule.name ?? "",
          polarity: rule.condition?.polarity ?? "Included",
          action: rule.intervention?.block_submission
            ? "block"
            : rule.intervention?.flag_for_review
              ? "flag"
              : "message",
          message: rule.intervention?.message,
        }));
        return { status: 200, body: { community_id: "playground", version: this.version } };
      }
      if (method === "POST" && path.endsWith("/evaluate")) {
        this.evaluateCalls += 1;
        const request = payload as { user_id: string; title: string; event: string };
        return {
          status: 200,
          body: {
            arm: this.armOf(request.user_id),
            ruleset_version: this.version,
            guidance: this.guidanceFor(request.user_id, request.title, request.event),
          },
        };
      }
      if (method === "POST" && path.endsWith("/submit")) {
        this.submitCalls += 1;
        const request = payload as { user_id: string; title: string };
        const guidance = this.guidanceFor(request.user_id, request.title, "OnSubmit");
        const accepted = !guidance.submission_blocked;
        return {
          status: 200,
          body: {
            accepted,
            post_id: accepted ? `post-${this.submitCalls}` : null,
            arm: this.armOf(request.user_id),
            ruleset_version: this.version,
            guidance,
          },
        };
      }
      return { status: 404, body: { detail: "unknown path" } };
    };
  }
}

export const QUESTION_RULE = {
  name: "Title must end in a question mark",
  condition: { kind: "RegexPattern", pattern: "\\? *?$", polarity: "Missing" },
  trigger: { scope: "TitleOnly", events: ["OnEdit", "OnSubmit"] },
  intervention: {
    message: "Your post title must be in form of a question.",
    block_submission: true,
    flag_for_review: false,
  },
  enabled: true,
};
