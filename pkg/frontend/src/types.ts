// Wire types for the moderation service endpoints.

export interface FiredRule {
  rule_name: string;
  part: string;
}

export interface Guidance {
  fired: FiredRule[];
  messages: string[];
  submission_blocked: boolean;
  review_flags: string[];
  event: string;
}

export interface EvaluateResponse {
  arm: string;
  ruleset_version: number;
  guidance: Guidance;
}

export interface SubmitResponse extends EvaluateResponse {
  accepted: boolean;
  post_id: string | null;
}

export interface RulesetIssue {
  rule_name: string | null;
  reason: string;
}

export interface RuleDocument {
  name: string;
  condition: {
    kind: string;
    pattern?: string;
    keywords?: string[];
    polarity: string;
  };
  trigger: { scope: string; events: string[] };
  intervention: {
    message?: string;
    block_submission?: boolean;
    flag_for_review?: boolean;
  };
  enabled?: boolean;
}

export interface RulesetDocument {
  community_id?: string;
  version?: number;
  rules: RuleDocument[];
}

export function emptyGuidance(event: string): Guidance {
  return {
    fired: [],
    messages: [],
    submission_blocked: false,
    review_flags: [],
    event,
  };
}
