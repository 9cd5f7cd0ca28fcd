/** Typed client for the annotation service API. */

export interface CandidateCard {
  id: string;
  title: string;
  description: string;
  url: string;
}

export interface Progress {
  pending: number;
  agreed: number;
  disputed: number;
  adjudicated: number;
}

export interface Task {
  done: boolean;
  entry_id?: string;
  left?: string[];
  mention?: string[];
  right?: string[];
  candidates?: CandidateCard[];
  progress: Progress;
}

export interface ConsensusState {
  entry_id: string;
  status: "Pending" | "Agreed" | "Disputed" | "Adjudicated";
  answer: string | null;
  nil_pattern: string | null;
}

export interface DisputeChoice {
  annotator_id: string;
  choice: string;
  nil_pattern: string | null;
}

export interface Dispute {
  entry_id: string;
  left: string[];
  mention: string[];
  right: string[];
  candidates: CandidateCard[];
  choices: DisputeChoice[];
}

export const NIL = "NIL";
export type NilPattern = "MissingEntity" | "NonEntityPhrase";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(private base: string, private sessionId: string) {}

  private url(path: string): string {
    return `${this.base}/api/session/${encodeURIComponent(this.sessionId)}${path}`;
  }

  nextTask(annotator: string): Promise<Task> {
    return fetch(this.url(`/next?annotator=${encodeURIComponent(annotator)}`)).then((r) =>
      asJson<Task>(r),
    );
  }

  submitAnnotation(
    entryId: string,
    annotatorId: string,
    choice: string,
    nilPattern?: NilPattern,
  ): Promise<ConsensusState> {
    if (choice === NIL && !nilPattern) {
      return Promise.reject(new ApiError(0, "NIL choices require a pattern"));
    }
    return fetch(this.url("/annotation"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        entry_id: entryId,
        annotator_id: annotatorId,
        choice,
        nil_pattern: nilPattern ?? null,
      }),
    }).then((r) => asJson<ConsensusState>(r));
  }

  disputes(): Promise<Dispute[]> {
    return fetch(this.url("/disputes")).then((r) => asJson<Dispute[]>(r));
  }

  adjudicate(
    entryId: string,
    expertId: string,
    choice: string,
    nilPattern?: NilPattern,
  ): Promise<ConsensusState> {
    if (choice === NIL && !nilPattern) {
      return Promise.reject(new ApiError(0, "NIL choices require a pattern"));
    }
    return fetch(this.url("/adjudication"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        entry_id: entryId,
        expert_id: expertId,
        choice,
        nil_pattern: nilPattern ?? null,
      }),
    }).then((r) => asJson<ConsensusState>(r));
  }

  progress(): Promise<Progress> {
    return fetch(this.url("/progress")).then((r) => asJson<Progress>(r));
  }

  agreement(): Promise<{ agreement_rate: number }> {
    return fetch(this.url("/agreement")).then((r) => asJson<{ agreement_rate: number }>(r));
  }

  exportEntries(): Promise<string> {
    return fetch(this.url("/export")).then(async (r) => {
      if (!r.ok) throw new ApiError(r.status, r.statusText);
      return r.text();
    });
  }
}
