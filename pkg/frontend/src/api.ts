// Thin client for the moderation service. Every verdict shown in the
// UI comes from these endpoints; nothing is evaluated client-side.

import type {
  EvaluateResponse,
  RulesetDocument,
  RulesetIssue,
  SubmitResponse,
} from "./types.js";

export interface HttpReply {
  status: number;
  body: unknown;
}

export type Transport = (
  method: string,
  path: string,
  payload?: unknown,
) => Promise<HttpReply>;

export class ServiceError extends Error {
  constructor(
    message: string,
    public status: number,
    public detail: unknown = null,
  ) {
    super(message);
  }
}

export class RulesetRejected extends ServiceError {
  constructor(status: number, public issues: RulesetIssue[]) {
    super("ruleset rejected", status, issues);
  }
}

export function fetchTransport(baseUrl: string): Transport {
  return async (method, path, payload) => {
    const response = await fetch(baseUrl + path, {
      method,
      headers: payload === undefined ? {} : { "Content-Type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
    let body: unknown = null;
    const text = await response.text();
    try {
      body = text ? JSON.parse(text) : null;
    } catch {
      body = text;
    }
    return { status: response.status, body };
  };
}

export class ServiceClient {
  constructor(private transport: Transport) {}

  private async expectOk<T>(reply: HttpReply): Promise<T> {
    if (reply.status >= 400) {
      const detail = (reply.body as { detail?: unknown })?.detail ?? reply.body;
      throw new ServiceError(`service returned ${reply.status}`, reply.status, detail);
    }
    return reply.body as T;
  }

  async evaluate(
    community: string,
    userId: string,
    title: string,
    body: string,
    event: "OnEdit" | "OnSubmit",
  ): Promise<EvaluateResponse> {
    const reply = await this.transport("POST", `/communities/${community}/evaluate`, {
      user_id: userId,
      title,
      body,
      event,
    });
    return this.expectOk<EvaluateResponse>(reply);
  }

  async submit(
    community: string,
    userId: string,
    title: string,
    body: string,
  ): Promise<SubmitResponse> {
    const reply = await this.transport("POST", `/communities/${community}/submit`, {
      user_id: userId,
      title,
      body,
    });
    return this.expectOk<SubmitResponse>(reply);
  }

  async putRuleset(
    community: string,
    document: RulesetDocument,
  ): Promise<{ community_id: string; version: number }> {
    const reply = await this.transport(
      "PUT",
      `/communities/${community}/ruleset`,
      document,
    );
    if (reply.status === 422) {
      const detail = (reply.body as { detail?: { errors?: RulesetIssue[] } })?.detail;
      throw new RulesetRejected(reply.status, detail?.errors ?? []);
    }
    return this.expectOk(reply);
  }

  async assignment(userId: string): Promise<{ user_id: string; arm: string }> {
    const reply = await this.transport("GET", `/assignment/${userId}`);
    return this.expectOk(reply);
  }

  /**
   * Demo helper: assignment is a pure hash of the user id, so a user
   * in the wanted arm can be found by probing candidate ids. This is
   * how the arm toggle works without any server-side override.
   */
  async findUserInArm(arm: string, prefix = "demo"): Promise<string> {
    for (let i = 0; i < 512; i += 1) {
      const candidate = `${prefix}-${i}`;
      const reply = await this.assignment(candidate);
      if (reply.arm === arm) {
        return candidate;
      }
    }
    throw new ServiceError(`no ${arm} user found under prefix ${prefix}`, 500);
  }
}
