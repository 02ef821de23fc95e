// Typed client for the session service JSON API. The dashboard only ever
// talks to the backend through this module, which makes the read-only
// "no mutating requests" guarantee easy to audit and to test.

export interface Binding {
  name: string;
  type_name: string;
  value_repr: string;
}

export interface Frame {
  function_name: string;
  file: string;
  line: number;
  locals: Binding[];
}

export interface Diagnostic {
  file: string;
  line: number;
  column: number;
  severity: string;
  message: string;
  raw: string;
}

export interface SourceFile {
  path: string;
  text: string;
}

export interface Turn {
  role: "assistant" | "user";
  text: string;
  created_at: string;
  status?: string;
}

export interface SessionView {
  kind: "compile_time" | "run_time";
  source_files: SourceFile[];
  diagnostics: Diagnostic[];
  runtime_signal: string | null;
  stack: Frame[];
  turns: Turn[];
  can_post: boolean;
  overuse_warning: boolean;
  explanation_pending: boolean;
}

export interface ShareResult {
  share_token: string;
  url: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.error === "string") detail = body.error;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  getSession(token: string): Promise<SessionView> {
    return this.fetchFn(`${this.baseUrl}/api/sessions/${token}`).then((r) =>
      asJson<SessionView>(r),
    );
  }

  postMessage(token: string, text: string): Promise<Turn> {
    return this.fetchFn(`${this.baseUrl}/api/sessions/${token}/messages`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    }).then((r) => asJson<Turn>(r));
  }

  createShare(token: string): Promise<ShareResult> {
    return this.fetchFn(`${this.baseUrl}/api/sessions/${token}/share`, {
      method: "POST",
    }).then((r) => asJson<ShareResult>(r));
  }

  retry(token: string): Promise<Turn> {
    return this.fetchFn(`${this.baseUrl}/api/sessions/${token}/retry`, {
      method: "POST",
    }).then((r) => asJson<Turn>(r));
  }
}
